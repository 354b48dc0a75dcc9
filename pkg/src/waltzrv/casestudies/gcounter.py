"""Grow-only counter service.

``{increment}`` replies ``{old, V}`` with the value before the increment and
``{query}`` replies ``{value, V}``.  The ``stale_query`` bug answers queries with
the value as it was before the most recent increment.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from ..lang import Formula
from ..runtime import Reply
from ..terms import Atom
from .common import RunReport, ScenarioConfig, System, resolve_spec, run_system

INCREMENT = Atom("increment")
QUERY = Atom("query")
OLD = Atom("old")
VALUE = Atom("value")

BUGS = ("stale_query",)
SPEC_FILE = "counter_monotonic.waltz"


class GCounter:
    def __init__(self, bug: Optional[str] = None):
        self.stale = bug == "stale_query"

    def init(self):
        # (current value, value before the last increment)
        return (0, 0)

    def handle_call(self, msg, from_, state, net):
        value, before = state
        if msg == (INCREMENT,):
            return Reply((OLD, value), (value + 1, value))
        if msg == (QUERY,):
            return Reply((VALUE, before if self.stale else value), state)
        return Reply((Atom("error"), Atom("unknown_request")), state)


def setup(system: System, cfg: ScenarioConfig) -> None:
    system.spawn(GCounter(cfg.bug), "counter")


def run_gcounter(
    cfg: ScenarioConfig,
    instrumented: bool = True,
    monitor: bool = True,
    spec: Union[Formula, str, Path, None] = None,
    trace_out: Union[str, Path, None] = None,
    verdict_log: Union[str, Path, None] = None,
    timeout: Optional[float] = None,
) -> RunReport:
    """Each client performs ``requests_per_client`` rounds of increment then query."""
    if cfg.bug is not None and cfg.bug not in BUGS:
        raise ValueError(f"unknown counter bug {cfg.bug!r}; known: {BUGS}")

    def work(index, send, pid):
        replies = []
        for _ in range(cfg.requests_per_client):
            replies.append(send("counter", (INCREMENT,)))
            replies.append(send("counter", (QUERY,)))
        return replies, None

    def final_state(system: System):
        state = system.runtime.get_state("counter")
        return getattr(state, "inner", state)[0]

    return run_system(
        "counter", cfg, lambda s: setup(s, cfg), work,
        resolve_spec(spec, SPEC_FILE), instrumented, monitor, trace_out, verdict_log, timeout,
        final_state,
    )
