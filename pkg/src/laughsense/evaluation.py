"""Speaker-grouped cross-validation, UAR, and confusion matrices."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .corpus import LabeledSample, Label
from .learners import LEARNERS

CLASSES = ("a", "b")


@dataclass
class CvPlan:
    folds: list[set[str]]
    seed: int

    def fold_of(self, speaker: str) -> int:
        hits = [i for i, fold in enumerate(self.folds) if speaker in fold]
        if len(hits) != 1:
            raise ValueError(f"speaker {speaker!r} appears in {len(hits)} folds (must be exactly 1)")
        return hits[0]


@dataclass
class ConfusionMatrix2x2:
    counts: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), dtype=np.int64))

    def add(self, truth: str, predicted: str) -> None:
        self.counts[CLASSES.index(truth), CLASSES.index(predicted)] += 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())

    def to_lists(self) -> list[list[int]]:
        return self.counts.tolist()


def uar(confusion: ConfusionMatrix2x2) -> float:
    """Unweighted average recall: mean of per-class diagonal rates."""
    rows = confusion.counts.sum(axis=1)
    if np.any(rows == 0):
        raise ValueError("confusion matrix has an empty truth row; UAR undefined")
    recalls = np.diag(confusion.counts) / rows
    return float(recalls.mean())


@dataclass
class FoldResult:
    fold: int
    test_speakers: list[str]
    n_train: int
    n_test: int
    confusion: ConfusionMatrix2x2 | None
    skipped: bool = False
    skip_reason: str = ""


@dataclass
class EvalReport:
    learner: str
    feature_set: str
    seed: int
    folds: list[FoldResult]
    pooled: ConfusionMatrix2x2
    uar: float
    accuracy: float
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "learner": self.learner,
            "feature_set": self.feature_set,
            "seed": self.seed,
            "uar": self.uar,
            "accuracy": self.accuracy,
            "pooled_confusion": self.pooled.to_lists(),
            "classes": list(CLASSES),
            "folds": [
                {
                    "fold": f.fold,
                    "test_speakers": sorted(f.test_speakers),
                    "n_train": f.n_train,
                    "n_test": f.n_test,
                    "confusion": f.confusion.to_lists() if f.confusion else None,
                    "skipped": f.skipped,
                    "skip_reason": f.skip_reason,
                }
                for f in self.folds
            ],
            "notes": self.notes,
        }

    def to_text(self) -> str:
        lines = [
            f"learner: {self.learner}   features: {self.feature_set}   seed: {self.seed}",
            f"UAR: {self.uar:.4f}   accuracy: {self.accuracy:.4f}",
            "pooled confusion (rows = truth a/b, cols = predicted a/b):",
        ]
        for truth, row in zip(CLASSES, self.pooled.counts):
            lines.append(f"  {truth}: " + " ".join(f"{v:5d}" for v in row))
        skipped = [f for f in self.folds if f.skipped]
        if skipped:
            lines.append(f"skipped folds: {[f.fold for f in skipped]}")
        for key, value in self.notes.items():
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def make_speaker_folds(speakers, k: int = 10, seed: int = 0) -> CvPlan:
    """Shuffle speakers with a seeded PRNG and deal them round-robin into k folds."""
    speakers = sorted(set(speakers))
    if len(speakers) < k:
        raise ValueError(f"need at least {k} speakers, have {len(speakers)}")
    rng = random.Random(seed)
    rng.shuffle(speakers)
    folds: list[set[str]] = [set() for _ in range(k)]
    for i, speaker in enumerate(speakers):
        folds[i % k].add(speaker)
    return CvPlan(folds=folds, seed=seed)


def _validate_plan(dataset: list[LabeledSample], plan: CvPlan) -> None:
    seen: dict[str, int] = {}
    for i, fold in enumerate(plan.folds):
        for speaker in fold:
            if speaker in seen:
                raise ValueError(
                    f"corrupted plan: speaker {speaker!r} in folds {seen[speaker]} and {i}"
                )
            seen[speaker] = i
    for sample in dataset:
        if sample.speaker_id not in seen:
            raise ValueError(f"sample {sample.clip_id!r}: speaker {sample.speaker_id!r} not in plan")


def run_cv(dataset: list[LabeledSample], plan: CvPlan, learner: str) -> EvalReport:
    """Train on out-of-fold speakers, test on the fold, pool predictions.

    A fold whose training split collapses to one class is skipped and the
    skip is recorded; no sample is ever scored by a model that saw its
    speaker during training (asserted per fold).
    """
    if learner not in LEARNERS:
        raise ValueError(f"unknown learner {learner!r}; choices: {sorted(LEARNERS)}")
    _validate_plan(dataset, plan)
    trainer = LEARNERS[learner]

    x = np.stack([s.features.as_array() for s in dataset])
    y01 = np.array([1 if s.label is Label.LAUGH_AT else 0 for s in dataset])
    speakers = [s.speaker_id for s in dataset]

    pooled = ConfusionMatrix2x2()
    fold_results: list[FoldResult] = []
    tested = 0
    for fi, fold in enumerate(plan.folds):
        test_idx = [i for i, spk in enumerate(speakers) if spk in fold]
        train_idx = [i for i, spk in enumerate(speakers) if spk not in fold]
        train_speakers = {speakers[i] for i in train_idx}
        assert not (train_speakers & fold), "speaker leaked between train and test"
        if not test_idx:
            fold_results.append(FoldResult(fi, sorted(fold), len(train_idx), 0, None))
            continue
        if np.unique(y01[train_idx]).size < 2:
            fold_results.append(
                FoldResult(
                    fi, sorted(fold), len(train_idx), len(test_idx), None,
                    skipped=True, skip_reason="single-class training split",
                )
            )
            continue
        model = trainer(x[train_idx], y01[train_idx])
        confusion = ConfusionMatrix2x2()
        for i in test_idx:
            label, _ = model.predict(x[i])
            truth = dataset[i].label.value
            confusion.add(truth, label)
            pooled.add(truth, label)
        tested += len(test_idx)
        fold_results.append(FoldResult(fi, sorted(fold), len(train_idx), len(test_idx), confusion))

    if pooled.total == 0:
        raise ValueError("no fold produced predictions")
    report = EvalReport(
        learner=learner,
        feature_set="manual-19",
        seed=plan.seed,
        folds=fold_results,
        pooled=pooled,
        uar=uar(pooled),
        accuracy=pooled.accuracy(),
        notes={"n_tested": tested, "n_samples": len(dataset)},
    )
    if learner == "gbt":
        report.notes["boosting_rounds"] = 100
    return report
