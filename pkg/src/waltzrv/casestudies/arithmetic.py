"""Pipeline system: client -> main -> add -> mult.

``main`` hands each request to a spawned helper and replies later, so requests
from many clients are in flight at once; ``add`` adds 10 and ``mult`` doubles.
The end-to-end reply to ``{process, Pid, N}`` is ``{result, (N + 10) * 2}``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from ..runtime import NoReply, Reply
from ..terms import Atom
from ..lang import Formula
from .common import RunReport, ScenarioConfig, System, resolve_spec, run_system

PROCESS = Atom("process")
RESULT = Atom("result")
BUGS = ("add_decrements",)
SPEC_FILE = "phi.waltz"


class Main:
    def __init__(self, runtime):
        self.runtime = runtime

    def init(self):
        return 0

    def handle_call(self, msg, from_, state, net):
        def forward():
            try:
                from_.reply(net.call("add", msg))
            except Exception as exc:
                from_.fail(exc)

        self.runtime.spawn(forward)
        return NoReply(state + 1)


class Add:
    def __init__(self, bug: Optional[str] = None):
        self.delta = -10 if bug == "add_decrements" else 10

    def init(self):
        return 0

    def handle_call(self, msg, from_, state, net):
        # accepts {process, Pid, N} from main and the bare {process, N}
        n = msg[-1]
        return Reply(net.call("mult", (PROCESS, n + self.delta)), state + 1)


class Mult:
    def init(self):
        return 0

    def handle_call(self, msg, from_, state, net):
        _, n = msg
        return Reply((RESULT, n * 2), state + 1)


def expected_reply(n: int) -> tuple:
    return (RESULT, (n + 10) * 2)


def setup(system: System, bug: Optional[str] = None) -> None:
    system.spawn(Main(system.runtime), "main")
    system.spawn(Add(bug), "add")
    system.spawn(Mult(), "mult")


def run_arithmetic(
    cfg: ScenarioConfig,
    instrumented: bool = True,
    monitor: bool = True,
    spec: Union[Formula, str, Path, None] = None,
    trace_out: Union[str, Path, None] = None,
    verdict_log: Union[str, Path, None] = None,
    timeout: Optional[float] = None,
) -> RunReport:
    if cfg.bug is not None and cfg.bug not in BUGS:
        raise ValueError(f"unknown arithmetic bug {cfg.bug!r}; known: {BUGS}")

    def work(index, send, pid):
        rng = cfg.client_rng(index)
        replies, inputs = [], []
        for _ in range(cfg.requests_per_client):
            n = rng.randint(0, 1000)
            inputs.append(n)
            replies.append(send("main", (PROCESS, pid, n)))
        return replies, inputs

    return run_system(
        "arithmetic", cfg, lambda s: setup(s, cfg.bug), work,
        resolve_spec(spec, SPEC_FILE), instrumented, monitor, trace_out, verdict_log, timeout,
    )
