"""Listening-experiment service: randomized stimulus delivery, forced-choice
judgment capture, and the pooled listener-confusion report.

State is an append-only pair of JSONL logs (sessions and judgments) inside a
data directory; replaying them reconstructs every session cursor exactly, so
the service survives restarts mid-experiment. Session ids are capability
URLs: whoever holds the link owns the session.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from . import audio_io
from .corpus import Label, ManifestEntry, parse_manifest

CHOICES = ("a", "b", "other")


class UnknownSessionError(KeyError):
    pass


class OutOfOrderJudgmentError(ValueError):
    pass


class InvalidChoiceError(ValueError):
    pass


class NoJudgmentsError(ValueError):
    pass


@dataclass
class Stimulus:
    stimulus_id: str
    truth: Label
    entry: ManifestEntry


@dataclass
class Session:
    session_id: str
    participant_meta: dict
    stimulus_order: list[str]
    cursor: int = 0

    @property
    def done(self) -> bool:
        return self.cursor >= len(self.stimulus_order)


@dataclass
class ListenerConfusion:
    counts: dict = field(default_factory=lambda: {t: {c: 0 for c in CHOICES} for t in ("a", "b")})

    def add(self, truth: str, choice: str) -> None:
        self.counts[truth][choice] += 1

    @property
    def total(self) -> int:
        return sum(sum(row.values()) for row in self.counts.values())


class PerceptionService:
    """Core experiment logic; the HTTP layer in create_app is a thin wrapper."""

    def __init__(self, manifest_path: str | Path, audio_root: str | Path,
                 data_dir: str | Path, seed: int | None = None):
        self.audio_root = Path(audio_root)
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions_log = self.data_dir / "sessions.jsonl"
        self._judgments_log = self.data_dir / "judgments.jsonl"
        self._lock = threading.Lock()
        self._rng = random.Random(seed) if seed is not None else random.Random()

        self.stimuli: dict[str, Stimulus] = {}
        for entry in parse_manifest(manifest_path):
            sid = Path(entry.file).stem
            if entry.start_s is not None:
                sid = f"{sid}[{entry.start_s:g}-{entry.end_s:g}]"
            self.stimuli[sid] = Stimulus(sid, entry.label, entry)

        self.sessions: dict[str, Session] = {}
        self._replay()

    # -- persistence --------------------------------------------------------

    def _append(self, path: Path, record: dict) -> None:
        with path.open("a") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay(self) -> None:
        if self._sessions_log.exists():
            for line in self._sessions_log.read_text().splitlines():
                rec = json.loads(line)
                self.sessions[rec["session_id"]] = Session(
                    rec["session_id"], rec.get("participant", {}), rec["order"]
                )
        if self._judgments_log.exists():
            for line in self._judgments_log.read_text().splitlines():
                rec = json.loads(line)
                session = self.sessions.get(rec["session_id"])
                if session is None:
                    raise ValueError(f"judgment log references unknown session {rec['session_id']}")
                expected = session.stimulus_order[session.cursor]
                if rec["stimulus_id"] != expected:
                    raise ValueError(
                        f"corrupt log: session {session.session_id} expected "
                        f"{expected!r}, log has {rec['stimulus_id']!r}"
                    )
                session.cursor += 1

    def _iter_judgments(self):
        if not self._judgments_log.exists():
            return
        for line in self._judgments_log.read_text().splitlines():
            yield json.loads(line)

    # -- operations ----------------------------------------------------------

    def create_session(self, participant_meta: dict | None = None) -> Session:
        if not self.stimuli:
            raise ValueError("no stimuli loaded")
        meta = dict(participant_meta or {})
        with self._lock:
            order = list(self.stimuli)
            self._rng.shuffle(order)
            session = Session(uuid.uuid4().hex, meta, order)
            self._append(
                self._sessions_log,
                {"session_id": session.session_id, "participant": meta,
                 "order": order, "created_at": time.time()},
            )
            self.sessions[session.session_id] = session
        return session

    def _get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def next_stimulus(self, session_id: str) -> dict:
        """Current stimulus without advancing; refresh-safe."""
        with self._lock:
            session = self._get(session_id)
            if session.done:
                return {"done": True, "answered": session.cursor,
                        "total": len(session.stimulus_order)}
            sid = session.stimulus_order[session.cursor]
            return {
                "done": False,
                "stimulus": {
                    "id": sid,
                    "audio_url": f"/stimuli/{sid}/audio",
                    "index": session.cursor,
                    "total": len(session.stimulus_order),
                },
            }

    def record_judgment(self, session_id: str, stimulus_id: str, choice: str,
                        replayed: bool = False) -> dict:
        if choice not in CHOICES:
            raise InvalidChoiceError(f"choice must be one of {CHOICES}, got {choice!r}")
        with self._lock:
            session = self._get(session_id)
            if session.done:
                raise OutOfOrderJudgmentError("session already complete")
            expected = session.stimulus_order[session.cursor]
            if stimulus_id != expected:
                raise OutOfOrderJudgmentError(
                    f"expected judgment for {expected!r}, got {stimulus_id!r}"
                )
            self._append(
                self._judgments_log,
                {"session_id": session_id, "stimulus_id": stimulus_id,
                 "choice": choice, "replayed": bool(replayed), "responded_at": time.time()},
            )
            session.cursor += 1
            return {"accepted": True, "answered": session.cursor,
                    "total": len(session.stimulus_order)}

    def confusion_report(self) -> dict:
        """Pooled 2x3 listener confusion plus the summary rates.

        The summary keeps the overlapping statistics separate: the fraction
        of a/b (non-"other") responses, accuracy over those responses only,
        the per-class rates over non-"other" responses, and total accuracy
        over every judgment.
        """
        confusion = ListenerConfusion()
        n = 0
        for rec in self._iter_judgments():
            stim = self.stimuli.get(rec["stimulus_id"])
            if stim is None:
                continue
            confusion.add(stim.truth.value, rec["choice"])
            n += 1
        if n == 0:
            raise NoJudgmentsError("no judgments recorded")

        correct = sum(confusion.counts[t][t] for t in ("a", "b"))
        n_other = sum(confusion.counts[t]["other"] for t in ("a", "b"))
        n_ab = n - n_other
        per_class = {}
        for t in ("a", "b"):
            denom = sum(confusion.counts[t][c] for c in ("a", "b"))
            per_class[t] = confusion.counts[t][t] / denom if denom else None
        return {
            "counts": confusion.counts,
            "n_judgments": n,
            "summary": {
                "ab_response_fraction": n_ab / n,
                "other_fraction": n_other / n,
                "accuracy_over_ab": correct / n_ab if n_ab else None,
                "accuracy_over_ab_defined": n_ab > 0,
                "total_correct_fraction": correct / n,
                "per_class_rate_over_ab": per_class,
                "chance_level": 0.5,
            },
        }

    def stimulus_audio_path(self, stimulus_id: str) -> Path:
        """WAV file for a stimulus; interval entries are cut once into a cache."""
        stim = self.stimuli.get(stimulus_id)
        if stim is None:
            raise UnknownSessionError(stimulus_id)
        source = self.audio_root / stim.entry.file
        if stim.entry.start_s is None:
            return source
        cache = self.data_dir / "stimuli_cache"
        cache.mkdir(exist_ok=True)
        cut = cache / f"{stimulus_id}.wav"
        if not cut.exists():
            clip = audio_io.segment(audio_io.load_wav(source), stim.entry.start_s, stim.entry.end_s)
            audio_io.write_wav(cut, clip)
        return cut


def create_app(manifest_path: str | Path, audio_root: str | Path,
               data_dir: str | Path, seed: int | None = None):
    """FastAPI wrapper exposing the documented HTTP surface."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import FileResponse
    from pydantic import BaseModel

    service = PerceptionService(manifest_path, audio_root, data_dir, seed=seed)
    app = FastAPI(title="laughsense perception service")
    app.state.service = service

    class SessionRequest(BaseModel):
        participant: dict | None = None

    class JudgmentRequest(BaseModel):
        stimulus_id: str
        choice: str
        replayed: bool = False

    @app.post("/sessions")
    def post_session(body: SessionRequest | None = None):
        try:
            session = service.create_session(body.participant if body else None)
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"session_id": session.session_id, "total": len(session.stimulus_order)}

    @app.get("/sessions/{session_id}/next")
    def get_next(session_id: str):
        try:
            return service.next_stimulus(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.post("/sessions/{session_id}/judgments")
    def post_judgment(session_id: str, body: JudgmentRequest):
        try:
            return service.record_judgment(session_id, body.stimulus_id, body.choice,
                                           replayed=body.replayed)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail="unknown session")
        except InvalidChoiceError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except OutOfOrderJudgmentError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/report/confusion")
    def get_report():
        try:
            return service.confusion_report()
        except NoJudgmentsError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/stimuli/{stimulus_id}/audio")
    def get_audio(stimulus_id: str):
        try:
            path = service.stimulus_audio_path(stimulus_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail="unknown stimulus")
        if not path.exists():
            raise HTTPException(status_code=404, detail="audio file missing")
        return FileResponse(path, media_type="audio/wav")

    return app
