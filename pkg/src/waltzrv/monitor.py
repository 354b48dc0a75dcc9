"""Online monitors compiled from WALTZ formulas.

A compiled monitor keeps one cursor per context.  Each cursor waits for the
signature of its current step and skips everything else, the way a chain of
nested selective ``receive`` statements would.  The first event that matches
decides the step: if its constraint holds the cursor advances, otherwise the
chain is broken.

* omega: a broken chain is a violation (terminal).  A completed chain resets the
  cursor with fresh bindings and the context is watched again.
* theta: a completed chain is a satisfaction (terminal).  A broken chain only
  retires that context.

At end of stream omega is satisfied only if nothing was violated and every
known context finished at least one chain and is not midway through another;
theta is satisfied only if it already was.  Everything else is inconclusive.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .lang import Formula, Omega, Step, Theta, WellFormednessError, check_well_formed, flatten_steps
from .semantics import signature_matches
from .terms import Ref, constraint_holds, is_term
from .trace import ROOT, ContextTree, Event, EventBus
from .verdict import INCONCLUSIVE, SATISFIED, Verdict, VerdictKind, bindings_snapshot

log = logging.getLogger(__name__)

OMEGA = "omega"
THETA = "theta"


class NotWellFormed(ValueError):
    pass


@dataclass(frozen=True)
class MonitorProgram:
    steps: tuple[Step, ...]
    mode: str


def compile_monitor(f: Formula) -> MonitorProgram:
    try:
        check_well_formed(f)
    except WellFormednessError as exc:
        raise NotWellFormed(str(exc)) from exc
    mode = OMEGA if isinstance(f, Omega) else THETA
    return MonitorProgram(tuple(flatten_steps(f.body)), mode)


@dataclass
class ChainCursor:
    context: Ref
    step: int = 0
    bindings: dict = field(default_factory=dict)
    completed: int = 0


class Monitor:
    """Incremental monitor state; feed events with ``step`` and close with ``finalize``."""

    def __init__(
        self,
        program: MonitorProgram,
        tree: Optional[ContextTree] = None,
        root: Ref = ROOT,
        log_path: Union[str, Path, None] = None,
    ):
        self.program = program
        self.tree = tree
        self.root = root
        self.cursors: dict[Ref, ChainCursor] = {}
        self.failed: set[Ref] = set()
        self.verdict: Optional[Verdict] = None
        self.position = 0
        self.skipped = 0
        self.malformed = 0
        self.log: list[dict] = []
        self._log_fh = open(log_path, "w", encoding="utf-8") if log_path else None

    # -- bookkeeping ------------------------------------------------------
    def _record(self, verdict: Verdict) -> None:
        rec = {"ts_us": time.time_ns() // 1000, **verdict.to_json()}
        self.log.append(rec)
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(rec) + "\n")
            self._log_fh.flush()

    def close_log(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    def _in_scope(self, ctx: Ref) -> bool:
        if self.tree is None:
            return ctx != self.root
        return self.tree.derives(ctx, self.root)

    def known_contexts(self) -> list[Ref]:
        seen = set(self.cursors)
        if self.tree is not None:
            seen.update(self.tree.children(self.root))
        return sorted(seen, key=lambda r: r.serial)

    # -- transitions ------------------------------------------------------
    def step(self, e: Event) -> Optional[Verdict]:
        """Consume one event; return a terminal verdict when one is reached."""
        pos = self.position
        self.position += 1
        if self.verdict is not None:
            return None
        if not isinstance(e, Event) or not is_term(e.payload) or not isinstance(e.context, Ref):
            self.malformed += 1
            return None
        ctx = e.context
        if not self._in_scope(ctx) or ctx in self.failed:
            self.skipped += 1
            return None
        cur = self.cursors.get(ctx)
        if cur is None:
            cur = self.cursors[ctx] = ChainCursor(ctx)
        step = self.program.steps[cur.step]
        b = signature_matches(e, step.signature, cur.bindings)
        if b is None:
            self.skipped += 1
            return None
        if not constraint_holds(step.constraint, b):
            if self.program.mode == OMEGA:
                self.verdict = Verdict(VerdictKind.VIOLATED, ctx, cur.step, e, bindings_snapshot(b), pos)
                self._record(self.verdict)
                return self.verdict
            self.failed.add(ctx)
            self.log.append({"ts_us": time.time_ns() // 1000, "verdict": "context_failed",
                             "step": cur.step, "position": pos})
            return None
        if cur.step + 1 < len(self.program.steps):
            cur.step += 1
            cur.bindings = b
            return None
        # chain complete
        if self.program.mode == THETA:
            self.verdict = Verdict(VerdictKind.SATISFIED, ctx, cur.step, e, bindings_snapshot(b), pos)
            self._record(self.verdict)
            return self.verdict
        cur.completed += 1
        cur.step = 0
        cur.bindings = {}
        return None

    def finalize(self) -> Verdict:
        if self.verdict is not None:
            final = self.verdict
        elif self.program.mode == OMEGA:
            contexts = self.known_contexts()
            clean = bool(contexts) and all(
                (c := self.cursors.get(ctx)) is not None and c.step == 0 and c.completed >= 1
                for ctx in contexts
            )
            final = SATISFIED if clean else INCONCLUSIVE
        else:
            final = INCONCLUSIVE
        self._record(final)
        self.close_log()
        return final


def monitor_step(state: Monitor, e: Event) -> tuple[Monitor, Optional[Verdict]]:
    return state, state.step(e)


def finalize(state: Monitor) -> Verdict:
    return state.finalize()


def run_monitor(
    p: MonitorProgram,
    events: Iterable[Event],
    tree: Optional[ContextTree] = None,
    log_path: Union[str, Path, None] = None,
) -> tuple[Verdict, list[dict]]:
    """Consume ``events`` until a terminal verdict or the end of the stream."""
    m = Monitor(p, tree, log_path=log_path)
    for e in events:
        if m.step(e) is not None:
            break
    return m.finalize(), m.log


class MonitorThread:
    """A monitor consuming a live bus on its own thread.

    The subscription is taken in the constructor, so every event published
    after construction is seen.  ``result`` waits for the bus to close (or a
    terminal verdict) and returns the final verdict.
    """

    def __init__(
        self,
        bus: EventBus,
        program: MonitorProgram,
        tree: Optional[ContextTree] = None,
        log_path: Union[str, Path, None] = None,
    ):
        self.monitor = Monitor(program, tree, log_path=log_path)
        self._sub = bus.subscribe()
        self._verdict: Optional[Verdict] = None
        self._done = threading.Event()
        self._thread = threading.Thread(target=self._run, name="monitor", daemon=True)
        self._thread.start()

    def _run(self) -> None:
        m = self.monitor
        try:
            for e in self._sub:
                if m.step(e) is not None:
                    self._sub.cancel()
                    break
            self._verdict = m.finalize()
        finally:
            self._done.set()

    def result(self, timeout: Optional[float] = None) -> Verdict:
        if not self._done.wait(timeout):
            raise TimeoutError("monitor did not finish")
        assert self._verdict is not None
        return self._verdict

    @property
    def log(self) -> list[dict]:
        return self.monitor.log
