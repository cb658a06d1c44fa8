"""WAV ingestion, SPL measurement, peak normalization, and segmentation."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Sample values are interpreted as sound pressure in pascal against the
# standard 2e-5 Pa reference (Praat convention), so a full-scale sine sits
# near 91 dB and corpus clips are pulled down to a 70 dB peak.
SPL_REFERENCE_PA = 2e-5
SPL_FRAME_S = 0.04
SPL_STEP_S = 0.01
DEFAULT_TARGET_DB = 70.0

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class SilentClipError(ValueError):
    """Signal has no energy, so SPL-based processing is undefined."""


@dataclass
class AudioClip:
    """Mono sample buffer with rate; the unit of all signal analysis."""

    id: str
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("clip requires a non-empty mono sample buffer")
        if int(self.sample_rate_hz) < 8000:
            raise ValueError(f"sample rate {self.sample_rate_hz} Hz is below the 8 kHz minimum")
        self.sample_rate_hz = int(self.sample_rate_hz)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def scaled(self, gain: float, new_id: str | None = None) -> "AudioClip":
        return AudioClip(new_id or self.id, self.samples * gain, self.sample_rate_hz)


def _parse_fmt_chunk(payload: bytes) -> tuple[int, int, int, int]:
    if len(payload) < 16:
        raise ValueError("malformed fmt chunk")
    tag, channels, rate, _byte_rate, _block_align, bits = struct.unpack("<HHIIHH", payload[:16])
    if tag == _WAVE_FORMAT_EXTENSIBLE:
        # actual format lives in the first two bytes of the SubFormat GUID
        if len(payload) < 26:
            raise ValueError("malformed extensible fmt chunk")
        tag = struct.unpack("<H", payload[24:26])[0]
    return tag, channels, rate, bits


def _decode_pcm(data: bytes, tag: int, bits: int) -> np.ndarray:
    """Scale integer PCM by its full-scale value; floats pass through."""
    if tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise ValueError(f"unsupported float width: {bits} bits")
        return np.frombuffer(data, dtype="<f4").astype(np.float64)
    if tag != _WAVE_FORMAT_PCM:
        raise ValueError(f"unsupported (non-PCM) WAV format tag 0x{tag:04x}")
    if bits == 8:
        return (np.frombuffer(data, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    if bits == 16:
        return np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    if bits == 24:
        raw = np.frombuffer(data, dtype=np.uint8)
        if raw.size % 3:
            raw = raw[: raw.size - raw.size % 3]
        as_int = (
            raw[0::3].astype(np.int32)
            | (raw[1::3].astype(np.int32) << 8)
            | (raw[2::3].astype(np.int32) << 16)
        )
        as_int = np.where(as_int >= 2**23, as_int - 2**24, as_int)
        return as_int.astype(np.float64) / float(2**23)
    if bits == 32:
        return np.frombuffer(data, dtype="<i4").astype(np.float64) / float(2**31)
    raise ValueError(f"unsupported PCM sample width: {bits} bits")


def load_wav(path: str | Path) -> AudioClip:
    """Read a RIFF/WAVE file into a mono clip scaled to [-1, 1].

    Accepts 8/16/24/32-bit integer and 32-bit float PCM, 1 or 2 channels.
    Stereo is collapsed by channel mean. The clip id is the file stem.
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        cid, size = struct.unpack("<4sI", blob[pos : pos + 8])
        body = blob[pos + 8 : pos + 8 + size]
        if cid == b"fmt ":
            fmt = _parse_fmt_chunk(body)
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None:
        raise ValueError(f"{path}: missing fmt chunk")
    if data is None or len(data) == 0:
        raise ValueError(f"{path}: zero-length audio payload")

    tag, channels, rate, bits = fmt
    if channels not in (1, 2):
        raise ValueError(f"{path}: {channels} channels unsupported (expected mono or stereo)")
    samples = _decode_pcm(data, tag, bits)
    if samples.size == 0:
        raise ValueError(f"{path}: zero-length audio payload")
    if channels == 2:
        if samples.size % 2:
            samples = samples[:-1]
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioClip(path.stem, samples, rate)


def write_wav(path: str | Path, clip: AudioClip) -> None:
    """Write a clip as 16-bit mono PCM; round-trips int16 data bit-exactly."""
    scaled = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = scaled.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        _WAVE_FORMAT_PCM,
        1,
        clip.sample_rate_hz,
        clip.sample_rate_hz * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    Path(path).write_bytes(header + payload)


def _frame_rms(samples: np.ndarray, flen: int, hop: int) -> np.ndarray:
    if samples.size < flen:
        raise ValueError(f"signal shorter than one frame ({samples.size} < {flen} samples)")
    n_frames = (samples.size - flen) // hop + 1
    idx = np.arange(flen)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = samples[idx]
    return np.sqrt(np.mean(frames * frames, axis=1))


def spl_track(
    clip: AudioClip, frame_s: float = SPL_FRAME_S, step_s: float = SPL_STEP_S
) -> np.ndarray:
    """Per-frame SPL in dB; silent frames come back as -inf."""
    if not 0 < step_s <= frame_s:
        raise ValueError("need frame_s >= step_s > 0")
    flen = int(round(frame_s * clip.sample_rate_hz))
    hop = int(round(step_s * clip.sample_rate_hz))
    rms = _frame_rms(clip.samples, flen, hop)
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(rms / SPL_REFERENCE_PA)


def peak_spl(clip: AudioClip, frame_s: float = SPL_FRAME_S, step_s: float = SPL_STEP_S) -> float:
    """Maximum frame SPL of the clip in dB."""
    track = spl_track(clip, frame_s, step_s)
    finite = track[np.isfinite(track)]
    if finite.size == 0:
        raise SilentClipError(f"clip {clip.id!r} is silent; SPL undefined")
    return float(finite.max())


def normalize_peak_spl(clip: AudioClip, target_db: float = DEFAULT_TARGET_DB) -> AudioClip:
    """Scale by one gain so the peak frame SPL lands on target_db."""
    current = peak_spl(clip)
    gain = 10.0 ** ((target_db - current) / 20.0)
    return clip.scaled(gain)


def segment(clip: AudioClip, start_s: float, end_s: float) -> AudioClip:
    """Extract [start_s, end_s) as a new clip."""
    if not 0 <= start_s < end_s or end_s > clip.duration_s + 1e-9:
        raise ValueError(f"invalid segment interval [{start_s}, {end_s}) for {clip.duration_s:.3f} s clip")
    lo = int(round(start_s * clip.sample_rate_hz))
    hi = int(round(end_s * clip.sample_rate_hz))
    hi = min(hi, clip.samples.size)
    if hi <= lo:
        raise ValueError("segment interval collapses to zero samples")
    return AudioClip(f"{clip.id}[{start_s:g}-{end_s:g}]", clip.samples[lo:hi].copy(), clip.sample_rate_hz)
