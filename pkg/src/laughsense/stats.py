"""Per-feature significance testing between the two laughter classes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import FEATURE_NAMES

ALPHA = 0.05


@dataclass
class TTestResult:
    feature_name: str
    mean_a: float
    mean_b: float
    t: float
    df: float
    p_two_tailed: float
    significant: bool

    @property
    def higher_class(self) -> str:
        return "a" if self.mean_a >= self.mean_b else "b"


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (Lentz's method)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            return h
    raise RuntimeError("incomplete beta continued fraction failed to converge")


def _betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t: float, df: float) -> float:
    """Two-tailed p for Student's t; I_x(df/2, 1/2) with x = df / (df + t^2)."""
    if df <= 0.0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return _betainc_reg(df / 2.0, 0.5, x)


def welch_t_test(
    sample_a: Sequence[float], sample_b: Sequence[float], feature_name: str = ""
) -> TTestResult:
    """Welch's unequal-variance two-sample test with a two-tailed p-value."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    if va == 0.0 or vb == 0.0:
        raise ValueError("degenerate sample: zero variance")
    sa, sb = va / a.size, vb / b.size
    t = float((a.mean() - b.mean()) / math.sqrt(sa + sb))
    df = float((sa + sb) ** 2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1)))
    p = student_t_two_tailed_p(t, df)
    return TTestResult(
        feature_name=feature_name,
        mean_a=float(a.mean()),
        mean_b=float(b.mean()),
        t=t,
        df=df,
        p_two_tailed=p,
        significant=p < ALPHA,
    )


def significance_table(dataset) -> list[TTestResult]:
    """One Welch test per feature, class "a" against class "b", in field order."""
    from .corpus import Label  # local import; corpus builds on features

    group_a = [s.features.as_array() for s in dataset if s.label is Label.LAUGH_WITH]
    group_b = [s.features.as_array() for s in dataset if s.label is Label.LAUGH_AT]
    if len(group_a) < 2 or len(group_b) < 2:
        raise ValueError("both classes need at least 2 samples")
    mat_a = np.stack(group_a)
    mat_b = np.stack(group_b)
    return [
        welch_t_test(mat_a[:, i], mat_b[:, i], feature_name=name)
        for i, name in enumerate(FEATURE_NAMES)
    ]
