"""The 19 manual acoustic parameters computed per laughter episode.

Field groups: six F0 statistics, two formant means, two long-term spectral
measures, two voicing measures, five intensity statistics, and two temporal
measures. All analysis parameters (thresholds, windows, orders) are module
constants so the extraction is reproducible from the code alone.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import audio_io, dsp
from .audio_io import AudioClip, SilentClipError
from .dsp import FrameSpec

PITCH_FLOOR_HZ = 60.0
PITCH_CEIL_HZ = 500.0
PITCH_STEP_S = 0.01
VOICING_STRENGTH_MIN = 0.45  # autocorrelation peak strength for a voiced call
SILENCE_RANGE_DB = 30.0  # frames more than this below the clip peak are unvoiced
OCTAVE_COST = 0.01  # per-octave penalty; keeps subharmonic ACF peaks from winning

FORMANT_RATE_HZ = 10000  # male 5 kHz formant ceiling
FORMANT_ORDER = 10
FORMANT_FRAME_S = 0.025
FORMANT_MAX_BANDWIDTH_HZ = 400.0
PREEMPHASIS_FROM_HZ = 50.0

SPECTRUM_FRAME = FrameSpec(0.04, 0.01)
IMPULSE_MIN_PROMINENCE_DB = 2.0
IMPULSE_MIN_SPACING_S = 0.1


class InsufficientVoicingError(ValueError):
    """Too few voiced frames to compute pitch-based statistics."""


@dataclass
class PitchTrack:
    """Per-frame F0 with the autocorrelation strength behind each decision.

    f0_hz[i] is None for unvoiced frames; strength[i] mirrors that and keeps
    the interpolated peak value the HNR computation reads back.
    """

    spec: FrameSpec
    f0_hz: list[float | None]
    strength: list[float | None]

    def voiced_values(self) -> np.ndarray:
        return np.array([v for v in self.f0_hz if v is not None])

    @property
    def n_voiced(self) -> int:
        return sum(v is not None for v in self.f0_hz)


@dataclass
class IntensityTrack:
    spec: FrameSpec
    spl_db: np.ndarray  # clamped to a 0 dB floor, always finite


@dataclass
class ManualFeatures:
    f0_min_hz: float
    f0_max_hz: float
    f0_mean_hz: float
    f0_range_hz: float
    f0_std_hz: float
    f0_mean_abs_slope_hz_per_s: float
    f1_mean_hz: float
    f2_mean_hz: float
    cog_hz: float
    peak_freq_hz: float
    voiced_frames_pct: float
    hnr_db: float
    spl_min_db: float
    spl_max_db: float
    spl_mean_db: float
    spl_std_db: float
    spl_range_db: float
    duration_s: float
    laugh_rate_per_s: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FEATURE_NAMES])

    @classmethod
    def from_array(cls, values) -> "ManualFeatures":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(FEATURE_NAMES),):
            raise ValueError(f"expected {len(FEATURE_NAMES)} values, got shape {values.shape}")
        return cls(**{name: float(v) for name, v in zip(FEATURE_NAMES, values)})

    def validate(self) -> None:
        vec = self.as_array()
        if not np.all(np.isfinite(vec)):
            raise ValueError("non-finite feature value")
        if not self.f0_min_hz <= self.f0_mean_hz <= self.f0_max_hz:
            raise ValueError("F0 min/mean/max ordering violated")
        if self.f0_range_hz != self.f0_max_hz - self.f0_min_hz:
            raise ValueError("F0 range identity violated")
        if not self.spl_min_db <= self.spl_mean_db <= self.spl_max_db:
            raise ValueError("SPL min/mean/max ordering violated")
        if self.spl_range_db != self.spl_max_db - self.spl_min_db:
            raise ValueError("SPL range identity violated")
        if not 0.0 <= self.voiced_frames_pct <= 100.0:
            raise ValueError("voiced percentage out of [0, 100]")
        if self.duration_s <= 0 or self.laugh_rate_per_s < 0:
            raise ValueError("temporal features out of range")


FEATURE_NAMES: tuple[str, ...] = tuple(f.name for f in dataclasses.fields(ManualFeatures))


def _parabolic_vertex(ym: float, y0: float, yp: float) -> tuple[float, float]:
    """Vertex (offset, value) of the parabola through three equidistant points."""
    den = ym - 2.0 * y0 + yp
    if den == 0.0:
        return 0.0, y0
    delta = 0.5 * (ym - yp) / den
    delta = float(np.clip(delta, -0.5, 0.5))
    value = y0 - 0.25 * (ym - yp) * delta
    return delta, value


def _sinc_interp(row: np.ndarray, tau: float, half: int = 30) -> float:
    """Band-limited read of a sampled sequence at fractional index tau."""
    lo = max(0, int(np.floor(tau)) - half)
    hi = min(row.size, int(np.ceil(tau)) + half + 1)
    k = np.arange(lo, hi)
    u = (tau - k) / half
    taper = 0.5 * (1.0 + np.cos(np.pi * np.clip(u, -1.0, 1.0)))
    return float(np.sum(row[k] * np.sinc(tau - k) * taper))


def track_f0(
    clip: AudioClip, floor_hz: float = PITCH_FLOOR_HZ, ceil_hz: float = PITCH_CEIL_HZ
) -> PitchTrack:
    """Autocorrelation pitch track with per-frame (Viterbi-free) decisions.

    Frame length is three floor periods, hop 10 ms. A frame is voiced when
    its best interpolated peak strength reaches VOICING_STRENGTH_MIN and the
    frame SPL sits within SILENCE_RANGE_DB of the clip peak. Candidate peaks
    compete on strength minus a small per-octave cost toward longer lags.
    """
    rate = clip.sample_rate_hz
    spec = FrameSpec(3.0 / floor_hz, PITCH_STEP_S)
    frames = dsp.frame_signal(clip, spec)
    if frames.shape[0] < 2:
        raise ValueError(f"clip {clip.id!r} too short for pitch analysis (need >= 2 frames)")

    max_lag = min(frames.shape[1] - 1, int(np.ceil(rate / floor_hz)) + 2)
    r, silent = dsp.autocorr_frames(frames, max_lag)

    rms = np.sqrt(np.mean(frames * frames, axis=1))
    with np.errstate(divide="ignore"):
        frame_db = 20.0 * np.log10(rms / audio_io.SPL_REFERENCE_PA)
    try:
        loud_enough = frame_db >= (audio_io.peak_spl(clip) - SILENCE_RANGE_DB)
    except SilentClipError:
        # an all-zero clip still yields a track: every frame unvoiced
        n = frames.shape[0]
        return PitchTrack(spec, [None] * n, [None] * n)

    lag_lo = max(2, int(np.floor(rate / ceil_hz)))
    lag_hi = min(max_lag - 1, int(np.ceil(rate / floor_hz)))

    f0: list[float | None] = []
    strength: list[float | None] = []
    for i in range(r.shape[0]):
        if silent[i] or not loud_enough[i]:
            f0.append(None)
            strength.append(None)
            continue
        row = r[i]
        seg = row[lag_lo : lag_hi + 1]
        peaks = np.nonzero((seg[1:-1] > seg[:-2]) & (seg[1:-1] >= seg[2:]))[0] + 1 + lag_lo
        if peaks.size == 0:
            f0.append(None)
            strength.append(None)
            continue
        # candidates are scored on their parabolic peak value; only the
        # winner gets the (more expensive) band-limited strength read-out
        ym, y0, yp = row[peaks - 1], row[peaks], row[peaks + 1]
        den = ym - 2.0 * y0 + yp
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = np.where(den != 0.0, 0.5 * (ym - yp) / den, 0.0)
        delta = np.clip(delta, -0.5, 0.5)
        values = y0 - 0.25 * (ym - yp) * delta
        taus = peaks + delta
        scores = values - OCTAVE_COST * np.log2(floor_hz * taus / rate)
        k = int(np.argmax(scores))
        best_tau = float(taus[k])
        best_r = _sinc_interp(row, best_tau)
        if best_r < VOICING_STRENGTH_MIN:
            f0.append(None)
            strength.append(None)
        else:
            f0.append(rate / best_tau)
            strength.append(min(best_r, 1.0 - 1e-6))
    return PitchTrack(spec, f0, strength)


def f0_statistics(track: PitchTrack) -> tuple[float, float, float, float, float, float]:
    """(min, max, mean, range, population std, mean absolute slope in Hz/s).

    Slope averages |dF0|/step over adjacent voiced frame pairs; pairs broken
    by an unvoiced frame are skipped.
    """
    voiced = track.voiced_values()
    if voiced.size < 2:
        raise InsufficientVoicingError(f"need >= 2 voiced frames, have {voiced.size}")
    slopes = []
    for a, b in zip(track.f0_hz, track.f0_hz[1:]):
        if a is not None and b is not None:
            slopes.append(abs(b - a) / track.spec.step_s)
    if not slopes:
        raise InsufficientVoicingError("no adjacent voiced frame pair for the slope")
    f_min = float(voiced.min())
    f_max = float(voiced.max())
    return (
        f_min,
        f_max,
        float(voiced.mean()),
        f_max - f_min,
        float(voiced.std()),
        float(np.mean(slopes)),
    )


def voicing_measures(clip: AudioClip, track: PitchTrack) -> tuple[float, float]:
    """(voiced frame percentage, mean HNR in dB over voiced frames).

    HNR per frame is 10*log10(r / (1 - r)) with r the stored peak strength,
    clamped below 1 so clean periodic frames stay finite.
    """
    total = len(track.f0_hz)
    if total == 0:
        raise ValueError("empty pitch track")
    strengths = np.array([s for s in track.strength if s is not None])
    if strengths.size == 0:
        raise InsufficientVoicingError("no voiced frames; HNR undefined")
    strengths = np.clip(strengths, 1e-9, 1.0 - 1e-6)
    hnr = 10.0 * np.log10(strengths / (1.0 - strengths))
    return 100.0 * strengths.size / total, float(hnr.mean())


def _formant_candidates(coeffs: np.ndarray, rate: int) -> list[float]:
    roots = dsp.lpc_roots(coeffs)
    roots = roots[roots.imag > 0]
    freqs = np.angle(roots) / (2.0 * np.pi) * rate
    bands = -rate / np.pi * np.log(np.maximum(np.abs(roots), 1e-12))
    keep = (freqs > 50.0) & (freqs < rate / 2.0 - 50.0) & (bands < FORMANT_MAX_BANDWIDTH_HZ)
    return sorted(float(f) for f in freqs[keep])


def formant_means(clip: AudioClip, track: PitchTrack) -> tuple[float, float]:
    """Mean F1 and F2 over voiced frames via Burg LPC at a 5 kHz ceiling.

    The clip is resampled to 10 kHz and pre-emphasized from 50 Hz; each
    voiced pitch frame contributes the roots of an order-10 Burg fit over a
    25 ms window centered on it. Frames without usable roots are skipped.
    """
    if track.n_voiced < 1:
        raise InsufficientVoicingError("no voiced frames; formants undefined")
    work = dsp.resample(clip, FORMANT_RATE_HZ)
    alpha = float(np.exp(-2.0 * np.pi * PREEMPHASIS_FROM_HZ / FORMANT_RATE_HZ))
    emphasized = work.samples.copy()
    emphasized[1:] -= alpha * emphasized[:-1]

    half = int(round(FORMANT_FRAME_S * FORMANT_RATE_HZ / 2))
    window = np.hanning(2 * half)
    f1_values: list[float] = []
    f2_values: list[float] = []
    for i, f0 in enumerate(track.f0_hz):
        if f0 is None:
            continue
        center_s = i * track.spec.step_s + track.spec.frame_s / 2.0
        mid = int(round(center_s * FORMANT_RATE_HZ))
        lo, hi = mid - half, mid + half
        if lo < 0 or hi > emphasized.size:
            continue
        frame = emphasized[lo:hi] * window
        if np.ptp(frame) == 0.0:
            continue
        try:
            coeffs = dsp.lpc_burg(frame, FORMANT_ORDER)
        except ValueError:
            continue
        formants = _formant_candidates(coeffs, FORMANT_RATE_HZ)
        if len(formants) >= 1:
            f1_values.append(formants[0])
        if len(formants) >= 2:
            f2_values.append(formants[1])
    if not f1_values:
        raise InsufficientVoicingError("no voiced frame produced a usable formant fit")
    if not f2_values:
        raise InsufficientVoicingError("no voiced frame produced a second formant")
    return float(np.mean(f1_values)), float(np.mean(f2_values))


def _long_term_spectrum(clip: AudioClip) -> tuple[np.ndarray, float]:
    frames = dsp.frame_signal(clip, SPECTRUM_FRAME)
    power, bin_hz = dsp.power_spectra(frames, clip.sample_rate_hz)
    ltas = power.mean(axis=0)
    if ltas.sum() <= 0.0:
        raise SilentClipError(f"clip {clip.id!r} is silent; spectrum undefined")
    return ltas, bin_hz


def spectral_cog(clip: AudioClip) -> float:
    """Power-weighted mean frequency of the long-term average spectrum."""
    ltas, bin_hz = _long_term_spectrum(clip)
    freqs = np.arange(ltas.size) * bin_hz
    return float((freqs * ltas).sum() / ltas.sum())


def peak_frequency(clip: AudioClip) -> float:
    """Frequency of the strongest long-term spectral bin, log-parabolically refined."""
    ltas, bin_hz = _long_term_spectrum(clip)
    peak = int(np.argmax(ltas))
    if peak == 0 or peak == ltas.size - 1:
        return peak * bin_hz
    logs = np.log(np.maximum(ltas[peak - 1 : peak + 2], 1e-300))
    delta, _ = _parabolic_vertex(logs[0], logs[1], logs[2])
    return float((peak + delta) * bin_hz)


def intensity_track(clip: AudioClip) -> IntensityTrack:
    raw = audio_io.spl_track(clip, SPECTRUM_FRAME.frame_s, SPECTRUM_FRAME.step_s)
    return IntensityTrack(SPECTRUM_FRAME, np.maximum(raw, 0.0))


def intensity_statistics(clip: AudioClip) -> tuple[float, float, float, float, float]:
    """(min, max, mean, std, range) of the SPL track, near-silent frames excluded."""
    track = intensity_track(clip)
    kept = track.spl_db[track.spl_db > 0.0]
    if kept.size == 0:
        raise SilentClipError(f"clip {clip.id!r} is silent; intensity undefined")
    lo, hi = float(kept.min()), float(kept.max())
    return lo, hi, float(kept.mean()), float(kept.std()), hi - lo


def _smooth3(values: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    for i in range(values.size):
        out[i] = values[max(0, i - 1) : i + 2].mean()
    return out


def laughter_rate(clip: AudioClip) -> tuple[float, float]:
    """(duration in s, intensity impulses per second).

    An impulse is a local maximum of the 3-frame smoothed SPL track that is
    above the track mean, stands at least IMPULSE_MIN_PROMINENCE_DB over the
    lowest point toward its neighboring peaks on both sides, and is at least
    IMPULSE_MIN_SPACING_S from any stronger accepted impulse.
    """
    duration = clip.duration_s
    try:
        track = intensity_track(clip)
    except ValueError:
        return duration, 0.0
    smoothed = _smooth3(track.spl_db)
    if not np.any(smoothed > 0.0):
        return duration, 0.0

    n = smoothed.size
    peaks = [
        i
        for i in range(1, n - 1)
        if smoothed[i] > smoothed[i - 1] and smoothed[i] >= smoothed[i + 1]
    ]
    mean_level = smoothed.mean()
    candidates = []
    for j, i in enumerate(peaks):
        if smoothed[i] <= mean_level:
            continue
        left_edge = peaks[j - 1] if j > 0 else 0
        right_edge = peaks[j + 1] if j + 1 < len(peaks) else n - 1
        left_min = smoothed[left_edge : i + 1].min()
        right_min = smoothed[i : right_edge + 1].min()
        if (smoothed[i] - left_min >= IMPULSE_MIN_PROMINENCE_DB
                and smoothed[i] - right_min >= IMPULSE_MIN_PROMINENCE_DB):
            candidates.append(i)

    min_gap = IMPULSE_MIN_SPACING_S / track.spec.step_s
    accepted: list[int] = []
    for i in sorted(candidates, key=lambda i: -smoothed[i]):
        if all(abs(i - a) >= min_gap for a in accepted):
            accepted.append(i)
    return duration, len(accepted) / duration


def extract_manual_features(clip: AudioClip) -> ManualFeatures:
    """Assemble the 19-feature vector for one (normalized) laughter clip.

    Raises SilentClipError or InsufficientVoicingError when the clip cannot
    support the pitch-based measures; callers exclude such clips explicitly.
    """
    duration_s, rate_per_s = laughter_rate(clip)
    spl_min, spl_max, spl_mean, spl_std, spl_range = intensity_statistics(clip)
    track = track_f0(clip)
    f0_min, f0_max, f0_mean, f0_range, f0_std, f0_slope = f0_statistics(track)
    voiced_pct, hnr_db = voicing_measures(clip, track)
    f1_mean, f2_mean = formant_means(clip, track)
    features = ManualFeatures(
        f0_min_hz=f0_min,
        f0_max_hz=f0_max,
        f0_mean_hz=f0_mean,
        f0_range_hz=f0_range,
        f0_std_hz=f0_std,
        f0_mean_abs_slope_hz_per_s=f0_slope,
        f1_mean_hz=f1_mean,
        f2_mean_hz=f2_mean,
        cog_hz=spectral_cog(clip),
        peak_freq_hz=peak_frequency(clip),
        voiced_frames_pct=voiced_pct,
        hnr_db=hnr_db,
        spl_min_db=spl_min,
        spl_max_db=spl_max,
        spl_mean_db=spl_mean,
        spl_std_db=spl_std,
        spl_range_db=spl_range,
        duration_s=duration_s,
        laugh_rate_per_s=rate_per_s,
    )
    features.validate()
    return features
