"""HTTP session API: create sessions, fetch artifacts, submit choices, stream events.

Pipeline steps run on a per-session worker thread so the human loop stays
responsive; every read endpoint serves either an immutable committed artifact
straight from the archive or a snapshot taken under the session lock. Events
carry strictly increasing sequence numbers and replay idempotently from any
``after`` cursor.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .session import CHOICE_ACTIONS, Session, SessionConfig, SessionStateError


class CreateSessionBody(BaseModel):
    scene: str
    config: dict = {}


class ChoiceBody(BaseModel):
    action: str
    rank: int | None = None
    point: tuple[int, int] | None = None
    factor: float | None = None
    chooser: str = "human"


class SessionRunner:
    """Drives one Session on a worker thread and serializes its mutations.

    Only mutations take the lock (one step at a time, choices excluded while a
    step runs). Reads go through lock-free list snapshots: committed steps and
    appended events are immutable, so a snapshot is always a consistent prefix.
    """

    def __init__(self, sid: str, session: Session):
        self.id = sid
        self.session = session
        self.lock = threading.RLock()
        self.wakeup = threading.Condition(self.lock)
        self.busy = False
        self.error: str | None = None
        session._on_event = self._on_event

    def _on_event(self, record: dict) -> None:
        with self.wakeup:
            self.wakeup.notify_all()

    def _drive(self) -> None:
        try:
            while True:
                with self.lock:
                    if self.session.status != "running":
                        break
                    self.session.run_step()
                    if self.session.config.mode == "autonomous" and self.session.status == "running":
                        self.session.choose("approach", rank=1, chooser="machine")
                    elif self.session.config.mode == "interactive":
                        break
        except Exception as exc:  # surfaced via the projection; session stays inspectable
            self.error = str(exc)
        finally:
            with self.wakeup:
                self.busy = False
                self.wakeup.notify_all()

    def launch(self) -> None:
        with self.lock:
            if self.busy:
                return
            self.busy = True
        threading.Thread(target=self._drive, name=f"session-{self.id}", daemon=True).start()

    def submit(self, body: ChoiceBody) -> None:
        with self.lock:
            if self.busy:
                raise SessionStateError("a step is still running")
            self.session.choose(
                action=body.action,
                rank=body.rank,
                point=body.point,
                factor=body.factor,
                chooser=body.chooser,
            )
        if self.session.status == "running":
            self.launch()

    def projection(self) -> dict:
        s = self.session
        steps = list(s.steps)
        last = steps[-1] if steps else None
        return {
            "id": self.id,
            "status": s.status,
            "busy": self.busy,
            "mode": s.config.mode,
            "step_count": len(steps),
            "current_distance": s.camera.distance,
            "done_reason": s.done_reason,
            "error": self.error,
            "pending_points": [p.to_dict() for p in last.points] if last else [],
        }

    def step_summaries(self) -> list[dict]:
        return [
            {
                "index": st.index,
                "distance": st.distance,
                "points": [p.to_dict() for p in st.points],
                "chosen": st.chosen,
            }
            for st in list(self.session.steps)
        ]

    def events_after(self, after: int) -> list[dict]:
        return [e for e in list(self.session.events) if e["seq"] > after]

    def wait_for_event(self, after: int, timeout: float) -> list[dict]:
        fresh = self.events_after(after)
        if fresh:
            return fresh
        with self.wakeup:
            self.wakeup.wait(timeout)
        return self.events_after(after)


ARTIFACT_MEDIA_TYPES = {
    ".png": "image/png",
    ".json": "application/json",
    ".jsonl": "application/x-ndjson",
    ".npy": "application/octet-stream",
    ".csv": "text/csv",
}


def create_app(
    scene_dir: str | Path,
    archive_root: str | Path = "fieldscout-archives",
    ui_dir: str | Path | None = None,
) -> FastAPI:
    scene_dir = Path(scene_dir)
    archive_root = Path(archive_root)
    app = FastAPI(title="fieldscout service")
    runners: dict[str, SessionRunner] = {}

    def scene_descriptors() -> dict[str, Path]:
        return {p.stem: p for p in sorted(scene_dir.glob("*.json"))}

    def get_runner(sid: str) -> SessionRunner:
        runner = runners.get(sid)
        if runner is None:
            raise HTTPException(404, f"unknown session {sid}")
        return runner

    @app.get("/api/health")
    def health():
        return {"status": "ok", "sessions": len(runners)}

    @app.get("/api/scenes")
    def scenes():
        out = []
        for sid, path in scene_descriptors().items():
            meta = json.loads(path.read_text())
            out.append(
                {
                    "id": sid,
                    "name": meta.get("name", sid),
                    "physical_width_m": meta.get("physical_width_m"),
                }
            )
        return out

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        descriptors = scene_descriptors()
        if body.scene not in descriptors:
            raise HTTPException(404, f"unknown scene {body.scene!r}")
        try:
            config = SessionConfig.from_dict({**body.config, "scene": str(descriptors[body.scene])})
        except (TypeError, ValueError) as exc:
            raise HTTPException(422, f"invalid config override: {exc}")
        sid = uuid.uuid4().hex[:12]
        try:
            session = Session(config, archive_root=archive_root / sid)
        except (FileNotFoundError, ValueError) as exc:
            raise HTTPException(422, str(exc))
        runner = SessionRunner(sid, session)
        runners[sid] = runner
        runner.launch()
        return runner.projection()

    @app.get("/api/sessions")
    def list_sessions():
        return [r.projection() for r in runners.values()]

    @app.get("/api/sessions/{sid}")
    def get_session(sid: str):
        return get_runner(sid).projection()

    @app.get("/api/sessions/{sid}/steps")
    def list_steps(sid: str):
        return get_runner(sid).step_summaries()

    @app.get("/api/sessions/{sid}/steps/{index}")
    def get_step(sid: str, index: int):
        steps = get_runner(sid).step_summaries()
        if index < 0 or index >= len(steps):
            raise HTTPException(404, f"step {index} is not committed")
        return steps[index]

    @app.get("/api/sessions/{sid}/steps/{index}/artifacts/{name:path}")
    def get_artifact(sid: str, index: int, name: str):
        runner = get_runner(sid)
        if index < 0 or index >= len(list(runner.session.steps)):
            raise HTTPException(404, f"step {index} is not committed")
        if runner.session.archive is None:
            raise HTTPException(404, "session has no archive")
        step_dir = runner.session.archive.step_dir(index).resolve()
        target = (step_dir / name).resolve()
        if not target.is_relative_to(step_dir) or not target.is_file():
            raise HTTPException(404, f"unknown artifact {name!r}")
        media = ARTIFACT_MEDIA_TYPES.get(target.suffix, "application/octet-stream")
        return FileResponse(target, media_type=media)

    @app.post("/api/sessions/{sid}/choices")
    def submit_choice(sid: str, body: ChoiceBody):
        runner = get_runner(sid)
        if body.action not in CHOICE_ACTIONS:
            raise HTTPException(422, f"unknown action {body.action!r}")
        try:
            runner.submit(body)
        except SessionStateError as exc:
            raise HTTPException(409, str(exc))
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        return runner.projection()

    @app.get("/api/sessions/{sid}/events")
    def get_events(sid: str, after: int = 0, wait: float = 0.0):
        runner = get_runner(sid)
        events = (
            runner.wait_for_event(after, timeout=min(wait, 30.0)) if wait > 0 else runner.events_after(after)
        )
        return {"events": events}

    @app.get("/api/sessions/{sid}/events/stream")
    def stream_events(sid: str, after: int = 0):
        runner = get_runner(sid)

        def generate():
            cursor = after
            while True:
                fresh = runner.wait_for_event(cursor, timeout=15.0)
                for event in fresh:
                    cursor = event["seq"]
                    yield f"id: {event['seq']}\ndata: {json.dumps(event, sort_keys=True)}\n\n"
                if not fresh:
                    yield ": keep-alive\n\n"
                if any(e["event"] == "session_done" for e in fresh):
                    return

        return StreamingResponse(generate(), media_type="text/event-stream")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
