"""Baseline-vs-instrumented benchmark harness and report writers.

Each repetition runs the same seeded workload once without instrumentation and
once through the conductor with the shipped monitor attached.  The runs of all
repetitions are shuffled (seeded) so neither mode systematically goes first.
Only client activity is timed: spawning servers and draining the monitor after
the last reply are excluded.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import random
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .casestudies import SCENARIOS, ScenarioConfig
from .casestudies.common import RunReport

CSV_COLUMNS = [
    "system", "config", "base_ms", "instr_ms", "oh_pct",
    "base_lat_ms", "instr_lat_ms", "lat_oh_pct", "base_thr", "instr_thr", "thr_delta_pct",
]
MARKDOWN_HEADER = [
    "System", "Config", "Base (ms)", "Instr. (ms)", "OH (%)",
    "Base lat. (ms)", "Instr. lat. (ms)", "Lat. OH (%)",
    "Base thr. (m/s)", "Instr. thr. (m/s)", "Δ thr. (%)",
]

# Execution-time overheads measured for the Erlang/OTP implementation on the
# same workloads; printed next to our numbers, never compared against them.
REFERENCE_OH_PCT = {
    ("chat", "5Cx30M"): 97.7, ("chat", "10Cx30M"): 116.7, ("chat", "20Cx30M"): 131.1,
    ("chat", "50Cx30M"): 137.7, ("chat", "100Cx30M"): 144.6, ("chat", "200Cx30M"): 152.7,
    ("counter", "100Cx10M"): 88.2, ("counter", "200Cx10M"): 60.3, ("counter", "500Cx10M"): 18.0,
    ("counter", "1000Cx10M"): 26.4, ("counter", "1500Cx10M"): 12.0, ("counter", "2000Cx10M"): 20.2,
    ("arithmetic", "1Cx10000M"): 105.4, ("arithmetic", "2Cx10000M"): 108.1,
    ("arithmetic", "4Cx10000M"): 113.1, ("arithmetic", "8Cx10000M"): 128.5,
    ("arithmetic", "16Cx10000M"): 129.6,
}

TABLE_CONFIGS = {
    "chat": [(c, 30) for c in (5, 10, 20, 50, 100, 200)],
    "counter": [(c, 10) for c in (100, 200, 500, 1000, 1500, 2000)],
    "arithmetic": [(c, 10_000) for c in (1, 2, 4, 8, 16)],
}


class ScenarioFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Metrics:
    exec_time_ms: float
    latency_ms: float
    throughput_msgs_per_s: float
    messages: int

    @classmethod
    def from_report(cls, r: RunReport) -> "Metrics":
        return cls(r.exec_time_ms, r.latency_ms, r.throughput, r.messages)

    @classmethod
    def mean(cls, ms: Sequence["Metrics"]) -> "Metrics":
        return cls(
            statistics.fmean(m.exec_time_ms for m in ms),
            statistics.fmean(m.latency_ms for m in ms),
            statistics.fmean(m.throughput_msgs_per_s for m in ms),
            ms[0].messages,
        )

    def consistency_error(self) -> float:
        """Relative gap between throughput x time and the message count."""
        return abs(self.throughput_msgs_per_s * self.exec_time_ms / 1000.0 - self.messages) / self.messages


def _pct(new: float, old: float) -> float:
    return (new - old) / old * 100.0


@dataclass
class PairedMetrics:
    system: str
    config: str
    base_reps: list[Metrics]
    instr_reps: list[Metrics]
    order: list[str] = field(default_factory=list)
    host: dict = field(default_factory=dict)

    @property
    def base(self) -> Metrics:
        return Metrics.mean(self.base_reps)

    @property
    def instr(self) -> Metrics:
        return Metrics.mean(self.instr_reps)

    @property
    def overhead_pct(self) -> float:
        return _pct(self.instr.exec_time_ms, self.base.exec_time_ms)

    @property
    def latency_overhead_pct(self) -> float:
        return _pct(self.instr.latency_ms, self.base.latency_ms)

    @property
    def throughput_delta_pct(self) -> float:
        """Throughput lost to instrumentation, as a positive percentage."""
        return -_pct(self.instr.throughput_msgs_per_s, self.base.throughput_msgs_per_s)

    @property
    def instr_slower_reps(self) -> int:
        return sum(i.exec_time_ms > b.exec_time_ms for b, i in zip(self.base_reps, self.instr_reps))

    def row(self) -> dict:
        b, i = self.base, self.instr
        return {
            "system": self.system,
            "config": self.config,
            "base_ms": b.exec_time_ms,
            "instr_ms": i.exec_time_ms,
            "oh_pct": self.overhead_pct,
            "base_lat_ms": b.latency_ms,
            "instr_lat_ms": i.latency_ms,
            "lat_oh_pct": self.latency_overhead_pct,
            "base_thr": b.throughput_msgs_per_s,
            "instr_thr": i.throughput_msgs_per_s,
            "thr_delta_pct": self.throughput_delta_pct,
        }

    def to_json(self) -> dict:
        return {
            **self.row(),
            "reference_oh_pct": REFERENCE_OH_PCT.get((self.system, self.config)),
            "instr_slower_reps": self.instr_slower_reps,
            "order": self.order,
            "base_reps": [asdict(m) for m in self.base_reps],
            "instr_reps": [asdict(m) for m in self.instr_reps],
            "host": self.host,
        }


def host_info() -> dict:
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "implementation": platform.python_implementation(),
        "cpus": os.cpu_count(),
        "machine": platform.machine(),
    }


def _run_once(scenario: str, cfg: ScenarioConfig, instrumented: bool) -> RunReport:
    report = SCENARIOS[scenario](cfg, instrumented=instrumented, monitor=instrumented)
    if cfg.bug is None and report.violated:
        raise ScenarioFailure(f"{scenario} {cfg.label}: monitor reported a violation in a correct run")
    return report


def run_benchmark(
    scenario: str,
    cfg: ScenarioConfig,
    reps: int = 10,
    warmup: int = 1,
    baseline_only: bool = False,
) -> PairedMetrics:
    """Paired baseline/instrumented measurement of one configuration.

    ``baseline_only`` turns instrumentation off on both sides, which is useful
    for estimating the harness's own noise.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; known: {sorted(SCENARIOS)}")
    instr_mode = not baseline_only
    for _ in range(warmup):
        _run_once(scenario, cfg, False)
        _run_once(scenario, cfg, instr_mode)

    schedule = [("base", r) for r in range(reps)] + [("instr", r) for r in range(reps)]
    random.Random(cfg.seed).shuffle(schedule)
    base: list[Optional[Metrics]] = [None] * reps
    instr: list[Optional[Metrics]] = [None] * reps
    for mode, rep in schedule:
        report = _run_once(scenario, cfg, instr_mode if mode == "instr" else False)
        (instr if mode == "instr" else base)[rep] = Metrics.from_report(report)
    return PairedMetrics(scenario, cfg.label, base, instr,
                         order=[f"{m}{r}" for m, r in schedule], host=host_info())


def emit_report(
    rows: Sequence[PairedMetrics],
    path: Union[str, Path],
    fmt: str = "markdown",
    details: bool = False,
) -> Path:
    """Write the overhead table; ``details`` adds a JSON sidecar with per-rep data."""
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            for r in rows:
                w.writerow({k: (f"{v:.3f}" if isinstance(v, float) else v) for k, v in r.row().items()})
    elif fmt == "markdown":
        lines = ["| " + " | ".join(MARKDOWN_HEADER) + " |",
                 "|" + "|".join(["---"] * 2 + ["---:"] * 9) + "|"]
        for r in rows:
            cells = [f"{v:.1f}" if isinstance(v, float) else str(v) for v in r.row().values()]
            lines.append("| " + " | ".join(cells) + " |")
        refs = [(r, REFERENCE_OH_PCT.get((r.system, r.config))) for r in rows]
        refs = [(r, ref) for r, ref in refs if ref is not None]
        if refs:
            lines += ["", "Reference execution-time overhead of the Erlang/OTP implementation "
                          "(different runtime; for context only):", ""]
            lines += [f"- {r.system} {r.config}: {ref:.1f}%" for r, ref in refs]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if details:
        sidecar = path.with_suffix(path.suffix + ".json")
        sidecar.write_text(json.dumps([r.to_json() for r in rows], indent=2) + "\n", encoding="utf-8")
    return path


def parse_config(text: str) -> tuple[int, int]:
    """'5Cx30M', '5x30' -> (5, 30)."""
    t = text.strip().upper().replace("×", "X")
    left, sep, right = t.partition("X")
    if not sep:
        raise ValueError(f"bad config {text!r}; expected e.g. 5Cx30M")
    return int(left.rstrip("C")), int(right.rstrip("M"))
