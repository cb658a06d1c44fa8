"""Shared numeric kernels: framing, spectra, autocorrelation, Burg LPC, resampling.

Everything here is a deterministic pure function. The single window policy is
Hann; FFT sizes round up to the next power of two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip


@dataclass(frozen=True)
class FrameSpec:
    frame_s: float
    step_s: float

    def __post_init__(self) -> None:
        if not 0 < self.step_s <= self.frame_s:
            raise ValueError(f"need 0 < step_s <= frame_s, got {self.step_s}/{self.frame_s}")

    def frame_len(self, rate: int) -> int:
        return int(round(self.frame_s * rate))

    def hop(self, rate: int) -> int:
        return int(round(self.step_s * rate))


@dataclass
class PowerSpectrum:
    bin_hz: float
    power: np.ndarray

    @property
    def freqs_hz(self) -> np.ndarray:
        return np.arange(self.power.size) * self.bin_hz


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def frame_signal(clip: AudioClip, spec: FrameSpec) -> np.ndarray:
    """Slice the clip into a (n_frames, frame_len) matrix; the trailing partial frame is dropped."""
    flen = spec.frame_len(clip.sample_rate_hz)
    hop = spec.hop(clip.sample_rate_hz)
    n = clip.samples.size
    if n < flen:
        raise ValueError(f"clip {clip.id!r} shorter than one frame ({n} < {flen} samples)")
    n_frames = (n - flen) // hop + 1
    idx = np.arange(flen)[None, :] + hop * np.arange(n_frames)[:, None]
    return clip.samples[idx]


def power_spectrum(frame: np.ndarray, rate: int) -> PowerSpectrum:
    """|FFT|^2 of the Hann-windowed frame, zero-padded to the next power of two."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("empty frame")
    spectra, bin_hz = power_spectra(frame[None, :], rate)
    return PowerSpectrum(bin_hz, spectra[0])


def power_spectra(frames: np.ndarray, rate: int) -> tuple[np.ndarray, float]:
    """Batch power spectra over a frame matrix; returns (n_frames, nfft/2+1) and the bin width."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    flen = frames.shape[1]
    nfft = next_pow2(flen)
    window = np.hanning(flen)
    spec = np.fft.rfft(frames * window, n=nfft, axis=1)
    return (spec.real**2 + spec.imag**2), rate / nfft


def _window_acf(window: np.ndarray, nfft: int) -> np.ndarray:
    spec = np.fft.rfft(window, n=nfft)
    acf = np.fft.irfft(spec.real**2 + spec.imag**2, n=nfft)
    return acf


def autocorr_frames(frames: np.ndarray, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized, window-corrected autocorrelation of each frame.

    Frames are mean-subtracted and Hann-windowed; the raw autocorrelation is
    divided by the window's own autocorrelation (Boersma's correction), which
    undoes the taper so a periodic frame keeps r near 1 at its period lag.
    Returns (r, silent) where r has shape (n_frames, max_lag+1) with r[:, 0] = 1
    and silent marks zero-energy frames (their rows are zeros).
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    flen = frames.shape[1]
    if not 0 < max_lag < flen:
        raise ValueError(f"max_lag must be in (0, frame_len); got {max_lag} for length {flen}")
    nfft = next_pow2(2 * flen)  # enough padding for linear (non-circular) lags < flen
    window = np.hanning(flen)
    centered = frames - frames.mean(axis=1, keepdims=True)
    tapered = centered * window

    spec = np.fft.rfft(tapered, n=nfft, axis=1)
    acf = np.fft.irfft(spec.real**2 + spec.imag**2, n=nfft, axis=1)[:, : max_lag + 1]

    wacf = _window_acf(window, nfft)[: max_lag + 1]
    wacf = np.maximum(wacf / wacf[0], 1e-12)

    energy = acf[:, 0].copy()
    silent = energy <= 0.0
    energy[silent] = 1.0
    r = acf / energy[:, None] / wacf[None, :]
    r[:, 0] = 1.0
    r[silent] = 0.0
    return r, silent


def autocorr_norm(frame: np.ndarray, max_lag: int) -> np.ndarray:
    """Single-frame wrapper around autocorr_frames; raises on a silent frame."""
    r, silent = autocorr_frames(np.asarray(frame, dtype=np.float64)[None, :], max_lag)
    if silent[0]:
        raise ValueError("silent frame: autocorrelation undefined")
    return r[0]


def lpc_burg(frame: np.ndarray, order: int) -> np.ndarray:
    """Burg-method linear prediction coefficients.

    Returns c of length `order` such that the error filter is
    A(z) = 1 + c[0] z^-1 + ... + c[order-1] z^-order; the prediction is
    x_hat[n] = -sum(c[i] * x[n-1-i]). Burg's reflection coefficients keep
    every root of A strictly inside the unit circle.
    """
    x = np.asarray(frame, dtype=np.float64)
    n = x.size
    if order < 0 or order >= n / 2:
        raise ValueError(f"order must satisfy 0 <= order < frame_len/2; got {order} for {n}")
    if order == 0:
        return np.zeros(0)
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate (constant) frame")

    a = np.zeros(order + 1)
    a[0] = 1.0
    f = x[1:].copy()
    b = x[:-1].copy()
    for m in range(1, order + 1):
        den = f @ f + b @ b
        if den <= 0.0:
            break  # perfect prediction reached; remaining reflections are zero
        k = 2.0 * (f @ b) / den
        a_prev = a[: m + 1].copy()
        a[1 : m + 1] = a_prev[1 : m + 1] - k * a_prev[m - 1 :: -1]
        fn = f - k * b
        bn = b - k * f
        f = fn[1:]
        b = bn[:-1]
    return a[1:]


def lpc_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of the error polynomial 1 + c1 z^-1 + ... (as roots in z)."""
    if coeffs.size == 0:
        return np.zeros(0, dtype=complex)
    return np.roots(np.concatenate(([1.0], coeffs)))


def resample(clip: AudioClip, target_hz: int) -> AudioClip:
    """Band-limited windowed-sinc resampling.

    Cut-off is 0.45x the lower of the two rates so downsampling stays
    alias-free; duration is preserved within one output sample.
    """
    if target_hz < 8000:
        raise ValueError(f"target rate {target_hz} Hz below 8 kHz minimum")
    src = clip.sample_rate_hz
    if target_hz == src:
        return AudioClip(clip.id, clip.samples.copy(), src)

    x = clip.samples
    n_in = x.size
    n_out = int(round(n_in * target_hz / src))
    fc = 0.45 * min(src, target_hz)
    lobes = 16  # sinc zero crossings kept on each side
    half_t = lobes / (2.0 * fc)
    half_taps = int(np.ceil(half_t * src))

    pad = half_taps + 1
    xp = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    t_out = np.arange(n_out) / target_hz
    base = np.floor(t_out * src).astype(np.int64)

    y = np.zeros(n_out)
    for k in range(-half_taps, half_taps + 1):
        idx = base + k
        dt = idx / src - t_out
        u = dt / half_t
        taper = 0.5 * (1.0 + np.cos(np.pi * np.clip(u, -1.0, 1.0)))
        taper[np.abs(u) >= 1.0] = 0.0
        y += xp[idx + pad] * np.sinc(2.0 * fc * dt) * taper
    y *= 2.0 * fc / src
    return AudioClip(clip.id, y, int(target_hz))
