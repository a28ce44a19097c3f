"""File-backed session service shared by the HTTP API and the CLI.

Each operation loads the session, applies exactly one state transition, and
persists only on success, so a rejected request leaves the stored file
byte-identical. Mutations on one session are serialized through a
per-session lock; independent sessions proceed in parallel.
"""

from __future__ import annotations

import re
import threading
from collections import defaultdict
from pathlib import Path

from .backends import Backend
from .config import SessionConfig, build_backend
from .core import SamplingPool
from .errors import NotFoundError, PoolExhaustedError, ValidationError
from .evaluation import EvaluationReport
from .session import (
    PHASE_AWAITING,
    PHASE_EVALUATING,
    STOP_MAX_ITERATIONS,
    STOP_POOL_EXHAUSTED,
    STOP_USER,
    AnnotationSubmission,
    SessionState,
    load_session,
    run_evaluation,
    save_session,
    simulated_annotator,
    start_iteration,
    submit_annotations,
)

_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class SessionStore:
    """One JSON file per session under a data directory."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)

    def path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.json"

    def exists(self, session_id: str) -> bool:
        return self.path(session_id).exists()

    def load(self, session_id: str) -> SessionState:
        path = self.path(session_id)
        if not path.exists():
            raise NotFoundError(f"no such session: {session_id!r}")
        return load_session(path)

    def save(self, state: SessionState) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        save_session(state, self.path(state.session_id))


class SessionService:
    def __init__(self, data_dir: str | Path, backend_factory=build_backend):
        self.store = SessionStore(data_dir)
        self._backend_factory = backend_factory
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks[session_id]

    def _backend(self, config: SessionConfig) -> Backend:
        return self._backend_factory(config)

    # -- lifecycle ---------------------------------------------------------

    def create_session(
        self,
        session_id: str,
        config: SessionConfig,
        pool: SamplingPool,
        eval_set: SamplingPool,
    ) -> SessionState:
        if not _SESSION_ID_RE.match(session_id):
            raise ValidationError(f"invalid session id: {session_id!r}")
        with self._lock(session_id):
            if self.store.exists(session_id):
                raise ValidationError(f"session already exists: {session_id!r}")
            state = SessionState(
                session_id=session_id, config=config, pool=pool, eval_set=eval_set
            )
            self.store.save(state)
        return state

    def get_session(self, session_id: str) -> SessionState:
        return self.store.load(session_id)

    # -- loop steps ---------------------------------------------------------

    def iterate(self, session_id: str) -> tuple[SessionState, list[str]]:
        with self._lock(session_id):
            state = self.store.load(session_id)
            backend = self._backend(state.config)
            batch = start_iteration(state, backend)
            self.store.save(state)
        return state, batch

    def annotate(
        self,
        session_id: str,
        submissions: list[AnnotationSubmission] | None = None,
        *,
        simulate: bool = False,
    ) -> SessionState:
        with self._lock(session_id):
            state = self.store.load(session_id)
            if simulate:
                if submissions:
                    raise ValidationError("pass either submissions or simulate, not both")
                submissions = simulated_annotator(state)
            if not submissions:
                raise ValidationError("no submissions given")
            submit_annotations(state, submissions)
            self.store.save(state)
        return state

    def evaluate(self, session_id: str) -> tuple[SessionState, EvaluationReport]:
        with self._lock(session_id):
            state = self.store.load(session_id)
            backend = self._backend(state.config)
            report = run_evaluation(state, backend)
            self.store.save(state)
        return state, report

    def run_loop(
        self,
        session_id: str,
        iterations: int,
        *,
        simulate_annotator: bool = False,
    ) -> SessionState:
        """Drive whole iterations unattended; stops early on exhaustion.

        The stop cause (requested count, pool exhaustion, or the configured
        iteration bound) is recorded on the session.
        """
        if iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {iterations}")
        if not simulate_annotator:
            raise ValidationError("unattended runs need the simulated annotator")
        with self._lock(session_id):
            state = self.store.load(session_id)
            backend = self._backend(state.config)
            # Finish an iteration left half-done by a paused run; catch-up
            # steps do not count toward the requested iteration budget.
            if state.phase == PHASE_AWAITING:
                submit_annotations(state, simulated_annotator(state))
            if state.phase == PHASE_EVALUATING:
                run_evaluation(state, backend)
            max_iterations = state.config.max_iterations
            completed = 0
            stop_reason = STOP_USER
            while completed < iterations:
                if max_iterations is not None and state.iteration >= max_iterations:
                    stop_reason = STOP_MAX_ITERATIONS
                    break
                try:
                    start_iteration(state, backend)
                except PoolExhaustedError:
                    stop_reason = STOP_POOL_EXHAUSTED
                    break
                submit_annotations(state, simulated_annotator(state))
                if state.phase == PHASE_EVALUATING:
                    run_evaluation(state, backend)
                completed += 1
            state.stop_reason = stop_reason
            self.store.save(state)
        return state
