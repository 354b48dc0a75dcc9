"""Shared scaffolding for the case-study systems."""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional, Union

from ..conductor import Conductor
from ..injection import ClientHandle, wrap_server
from ..lang import Formula, load_spec, parse
from ..monitor import MonitorThread, compile_monitor
from ..runtime import Runtime, ServerBehavior
from ..terms import Pid, Term
from ..trace import write_trace
from ..verdict import Verdict, VerdictKind


class ScenarioError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    clients: int = 1
    requests_per_client: int = 1
    bug: Optional[str] = None
    seed: int = 0
    # busy-loop iterations added to each chat post (amortization experiment)
    background_work: int = 0

    def __post_init__(self):
        if self.clients < 1 or self.requests_per_client < 1:
            raise ValueError("clients and requests_per_client must be >= 1")

    @property
    def label(self) -> str:
        return f"{self.clients}Cx{self.requests_per_client}M"

    def client_rng(self, index: int) -> random.Random:
        """Per-client generator, identical across baseline and instrumented runs."""
        return random.Random(self.seed * 1_000_003 + index)


@dataclass
class RunReport:
    system: str
    config: ScenarioConfig
    instrumented: bool
    verdict: Optional[Verdict]
    events: int
    active_s: float
    messages: int
    latency_total_s: float
    results: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    trace_path: Optional[str] = None
    verdict_log_path: Optional[str] = None
    verdict_log: list = field(default_factory=list)
    final_state: Any = None

    @property
    def violated(self) -> bool:
        return self.verdict is not None and self.verdict.kind is VerdictKind.VIOLATED

    @property
    def exec_time_ms(self) -> float:
        return self.active_s * 1000.0

    @property
    def latency_ms(self) -> float:
        return self.latency_total_s / self.messages * 1000.0

    @property
    def throughput(self) -> float:
        return self.messages / self.active_s

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "config": asdict(self.config),
            "instrumented": self.instrumented,
            "verdict": None if self.verdict is None else self.verdict.to_json(),
            "events": self.events,
            "messages": self.messages,
            "exec_time_ms": self.exec_time_ms,
            "latency_ms": self.latency_ms,
            "throughput_msgs_per_s": self.throughput,
            "trace_path": self.trace_path,
            "verdict_log_path": self.verdict_log_path,
        }

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")
        return path


def shipped_spec(name: str) -> Formula:
    text = resources.files("waltzrv").joinpath("specs").joinpath(name).read_text(encoding="utf-8")
    return parse(text)


def resolve_spec(spec: Union[Formula, str, Path, None], default: str) -> Formula:
    if spec is None:
        return shipped_spec(default)
    if isinstance(spec, (str, Path)):
        return load_spec(spec)
    return spec


class System:
    """One isolated runtime, optionally instrumented with a conductor and a live monitor."""

    def __init__(
        self,
        instrumented: bool,
        spec: Optional[Formula] = None,
        monitor: bool = True,
        timeout: Optional[float] = None,
        verdict_log: Union[str, Path, None] = None,
        record: bool = True,
    ):
        self.instrumented = instrumented
        self.runtime = Runtime(timeout)
        self.conductor: Optional[Conductor] = None
        self.monitor: Optional[MonitorThread] = None
        if instrumented:
            self.conductor = Conductor(self.runtime, clients=("client",))
            self.conductor.bus.record = record
            self.conductor.start()
            if monitor and spec is not None:
                self.monitor = MonitorThread(self.conductor.bus, compile_monitor(spec),
                                             self.conductor.tree, verdict_log)

    def spawn(self, behavior: ServerBehavior, name: str) -> Pid:
        if self.instrumented:
            behavior = wrap_server(behavior, name, self.conductor)
        return self.runtime.spawn_server(behavior, name)

    def client_sender(self) -> Callable[[str, Term], Term]:
        if self.instrumented:
            return ClientHandle(self.conductor).send
        return self.runtime.call

    def close(self) -> Optional[Verdict]:
        verdict = None
        if self.conductor is not None:
            self.conductor.bus.close()
            if self.monitor is not None:
                verdict = self.monitor.result(timeout=max(60.0, self.runtime.timeout))
        return verdict

    def shutdown(self) -> None:
        self.runtime.shutdown()


ClientWork = Callable[[int, Callable[[str, Term], Term], Pid], list]


def drive_clients(system: System, n: int, work: ClientWork) -> tuple[float, int, float, list]:
    """Run ``n`` client threads to completion.

    Returns (active seconds, messages sent, summed per-call latency, per-client results).
    Timing starts when all clients are released together and stops when the last
    one finishes, so process spawning is excluded.
    """
    results: list = [None] * n
    errors: list = []
    counts = [0] * n
    latencies = [0.0] * n
    gate = threading.Barrier(n + 1)

    def body(index: int) -> None:
        raw_send = system.client_sender()
        pid = system.runtime.new_pid()
        perf = time.perf_counter

        def send(to: str, msg: Term) -> Term:
            t0 = perf()
            out = raw_send(to, msg)
            latencies[index] += perf() - t0
            counts[index] += 1
            return out

        gate.wait()
        try:
            results[index] = work(index, send, pid)
        except Exception as exc:
            errors.append(exc)

    threads = [threading.Thread(target=body, args=(i,), daemon=True) for i in range(n)]
    for t in threads:
        t.start()
    gate.wait()
    start = time.perf_counter()
    for t in threads:
        t.join()
    active = time.perf_counter() - start
    if errors:
        raise ScenarioError(f"{len(errors)} client(s) failed; first: {errors[0]!r}") from errors[0]
    return active, sum(counts), sum(latencies), results


def run_system(
    name: str,
    cfg: ScenarioConfig,
    setup: Callable[[System], None],
    work: ClientWork,
    spec: Optional[Formula],
    instrumented: bool,
    monitor: bool,
    trace_out: Union[str, Path, None],
    verdict_log: Union[str, Path, None],
    timeout: Optional[float],
    final_state: Optional[Callable[[System], Any]] = None,
) -> RunReport:
    system = System(instrumented, spec, monitor=monitor, timeout=timeout, verdict_log=verdict_log)
    try:
        setup(system)
        active, messages, latency, results = drive_clients(system, cfg.clients, work)
        state = final_state(system) if final_state else None
        verdict = system.close()
        events = 0
        trace_path = None
        if system.conductor is not None:
            bus = system.conductor.bus
            events = bus.published
            if trace_out is not None:
                trace_path = str(write_trace(trace_out, bus.history, system.conductor.tree))
        return RunReport(
            system=name,
            config=cfg,
            instrumented=instrumented,
            verdict=verdict,
            events=events,
            active_s=active,
            messages=messages,
            latency_total_s=latency,
            results=[r[0] for r in results],
            inputs=[r[1] for r in results],
            trace_path=trace_path,
            verdict_log_path=None if verdict_log is None else str(verdict_log),
            verdict_log=[] if system.monitor is None else list(system.monitor.log),
            final_state=state,
        )
    finally:
        if system.conductor is not None and not system.conductor.bus.closed:
            system.conductor.bus.close()
        system.shutdown()
