"""Manifest-driven corpus ingestion plus a synthetic test-corpus generator.

The manifest is a CSV with header `file,label,speaker,start,end`; start/end
are optional clip-internal segment bounds in seconds. Labels are "a"
(laughing with) and "b" (being laughed at).
"""

from __future__ import annotations

import csv
import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import audio_io, features
from .audio_io import AudioClip
from .features import ManualFeatures

MANIFEST_COLUMNS = ("file", "label", "speaker", "start", "end")
SYNTH_RATE_HZ = 16000


class Label(enum.Enum):
    LAUGH_WITH = "a"
    LAUGH_AT = "b"

    @classmethod
    def parse(cls, token: str) -> "Label":
        token = token.strip()
        for member in cls:
            if member.value == token:
                return member
        raise ValueError(f"unknown label {token!r} (expected 'a' or 'b')")


@dataclass
class ManifestEntry:
    file: str
    label: Label
    speaker_id: str
    start_s: float | None = None
    end_s: float | None = None

    @property
    def clip_key(self) -> tuple:
        return (self.file, self.start_s, self.end_s)


@dataclass
class LabeledSample:
    clip_id: str
    speaker_id: str
    label: Label
    features: ManualFeatures


def parse_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    entries: list[ManifestEntry] = []
    seen: set[tuple] = set()
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: manifest missing columns {sorted(missing)}")
        for row_no, row in enumerate(reader, start=2):
            start = float(row["start"]) if row["start"] not in (None, "") else None
            end = float(row["end"]) if row["end"] not in (None, "") else None
            if (start is None) != (end is None):
                raise ValueError(f"{path}:{row_no}: start and end must be given together")
            if start is not None and not start < end:
                raise ValueError(f"{path}:{row_no}: start must be strictly before end")
            entry = ManifestEntry(
                file=row["file"].strip(),
                label=Label.parse(row["label"]),
                speaker_id=row["speaker"].strip(),
                start_s=start,
                end_s=end,
            )
            if not entry.file or not entry.speaker_id:
                raise ValueError(f"{path}:{row_no}: empty file or speaker field")
            if entry.clip_key in seen:
                raise ValueError(f"{path}:{row_no}: duplicate entry for {entry.clip_key}")
            seen.add(entry.clip_key)
            entries.append(entry)
    return entries


def _extract_entry(args: tuple) -> tuple[int, LabeledSample | None, str | None]:
    index, entry, audio_root, target_db = args
    wav_path = Path(audio_root) / entry.file
    try:
        clip = audio_io.load_wav(wav_path)
        if entry.start_s is not None:
            clip = audio_io.segment(clip, entry.start_s, entry.end_s)
        clip = audio_io.normalize_peak_spl(clip, target_db)
        vector = features.extract_manual_features(clip)
        return index, LabeledSample(clip.id, entry.speaker_id, entry.label, vector), None
    except (OSError, ValueError) as exc:
        return index, None, str(exc)


def build_dataset(
    entries: list[ManifestEntry],
    audio_root: str | Path,
    target_db: float = audio_io.DEFAULT_TARGET_DB,
    jobs: int = 1,
) -> tuple[list[LabeledSample], list[dict]]:
    """Load, segment, normalize, and featurize every manifest entry.

    Failures never vanish: each one lands in the exclusion list with its
    reason, and len(entries) == len(samples) + len(exclusions).
    """
    audio_root = Path(audio_root)
    if not audio_root.is_dir():
        raise FileNotFoundError(f"audio root {audio_root} does not exist")
    work = [(i, entry, str(audio_root), target_db) for i, entry in enumerate(entries)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_entry, work, chunksize=4))
    else:
        results = [_extract_entry(args) for args in work]

    samples: list[LabeledSample] = []
    exclusions: list[dict] = []
    for index, sample, reason in sorted(results):
        entry = entries[index]
        if sample is not None:
            samples.append(sample)
        else:
            exclusions.append({"file": entry.file, "speaker": entry.speaker_id,
                               "label": entry.label.value, "reason": reason})
    return samples, exclusions


# ---------------------------------------------------------------------------
# feature CSV round trip (the on-disk dataset format)
# ---------------------------------------------------------------------------

FEATURE_CSV_HEADER = ("clip_id", "speaker_id", "label") + features.FEATURE_NAMES


def write_features_csv(samples: list[LabeledSample], path: str | Path) -> None:
    lines = [",".join(FEATURE_CSV_HEADER)]
    for s in samples:
        values = [repr(float(v)) for v in s.features.as_array()]
        lines.append(",".join([s.clip_id, s.speaker_id, s.label.value] + values))
    Path(path).write_text("\n".join(lines) + "\n")


def read_features_csv(path: str | Path) -> list[LabeledSample]:
    samples: list[LabeledSample] = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(FEATURE_CSV_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: features CSV missing columns {sorted(missing)}")
        for row in reader:
            vector = ManualFeatures.from_array([float(row[n]) for n in features.FEATURE_NAMES])
            samples.append(
                LabeledSample(row["clip_id"], row["speaker_id"], Label.parse(row["label"]), vector)
            )
    return samples


# ---------------------------------------------------------------------------
# synthetic corpus
# ---------------------------------------------------------------------------


def _damped_kernel(freq_hz: float, bandwidth_hz: float, gain: float, length: int) -> np.ndarray:
    t = np.arange(length) / SYNTH_RATE_HZ
    return gain * np.exp(-np.pi * bandwidth_hz * t) * np.sin(2 * np.pi * freq_hz * t)


def synth_laugh(
    rng: np.random.Generator, *, f0_hz: float, f1_hz: float, f2_hz: float,
    brightness: float, level_spread: float, duration_s: float, n_bursts: int,
) -> np.ndarray:
    """One pulse-train 'laugh': voiced bursts through two vocal-tract resonators."""
    n = int(round(duration_s * SYNTH_RATE_HZ))
    out = np.zeros(n + 2048)
    kernel = _damped_kernel(f1_hz, 90.0, 1.0, 1024) + _damped_kernel(
        f2_hz, 110.0, brightness, 1024
    )
    burst_len = rng.uniform(0.12, 0.2)
    gap = max(0.02, (duration_s - n_bursts * burst_len) / max(1, n_bursts))
    t0 = rng.uniform(0.01, 0.05)
    for _ in range(n_bursts):
        level = 1.0 - rng.uniform(0.0, level_spread)
        glide = rng.uniform(0.88, 0.98)  # falling pitch within the burst
        pos_s = t0
        while pos_s < t0 + burst_len:
            frac = (pos_s - t0) / burst_len
            inst_f0 = f0_hz * (1.0 + rng.normal(0.0, 0.01)) * (1.0 + (glide - 1.0) * frac)
            env = level * np.sin(np.pi * min(1.0, frac * 1.15)) ** 2
            idx = int(round(pos_s * SYNTH_RATE_HZ))
            if idx >= n:
                break
            seg = min(kernel.size, out.size - idx)
            out[idx : idx + seg] += env * kernel[:seg]
            pos_s += 1.0 / inst_f0
        t0 += burst_len + gap * rng.uniform(0.8, 1.2)
    out = out[:n]
    peak = np.max(np.abs(out))
    if peak > 0:
        out = 0.7 * out / peak
    out += rng.normal(0.0, 0.7 * 10 ** (-38.0 / 20.0), n)  # ~38 dB-down noise floor
    return out


# class-dependent parameter distributions: the laughed-at class gets higher
# F0, higher F1/F2, brighter spectrum, and a flatter intensity contour
_CLASS_PARAMS = {
    Label.LAUGH_WITH: dict(f0=(140.0, 15.0), f1=(550.0, 40.0), f2=(1400.0, 80.0),
                           brightness=(0.25, 0.06), level_spread=0.55),
    Label.LAUGH_AT: dict(f0=(265.0, 20.0), f1=(840.0, 50.0), f2=(1800.0, 90.0),
                         brightness=(0.55, 0.1), level_spread=0.15),
}


def synth_corpus(n_per_class: int, seed: int, out_dir: str | Path) -> Path:
    """Generate a labeled WAV corpus plus manifest; deterministic per seed."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    index = 0
    for label in (Label.LAUGH_WITH, Label.LAUGH_AT):
        params = _CLASS_PARAMS[label]
        for _ in range(n_per_class):
            name = f"laugh_{label.value}_{index:03d}"
            samples = synth_laugh(
                rng,
                f0_hz=float(np.clip(rng.normal(*params["f0"]), 90.0, 420.0)),
                f1_hz=float(rng.normal(*params["f1"])),
                f2_hz=float(rng.normal(*params["f2"])),
                brightness=float(max(0.05, rng.normal(*params["brightness"]))),
                level_spread=params["level_spread"],
                duration_s=float(rng.uniform(1.6, 2.4)),
                n_bursts=int(rng.integers(3, 7)),
            )
            audio_io.write_wav(out_dir / f"{name}.wav", AudioClip(name, samples, SYNTH_RATE_HZ))
            rows.append((f"{name}.wav", label.value, f"spk{index:03d}"))
            index += 1
    manifest = out_dir / "manifest.csv"
    lines = [",".join(MANIFEST_COLUMNS)]
    lines += [f"{file},{label},{speaker},," for file, label, speaker in rows]
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
