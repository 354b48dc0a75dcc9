"""Measure what instrumentation and monitoring cost on a small workload.

Run with ``python3 demos/05_measuring_overhead.py``; the table goes to stdout.
"""

import sys
import tempfile
from pathlib import Path

from waltzrv.bench import emit_report, run_benchmark
from waltzrv.casestudies import ScenarioConfig

rows = [
    run_benchmark("chat", ScenarioConfig(10, 30, seed=1), reps=5, warmup=1),
    run_benchmark("counter", ScenarioConfig(100, 10, seed=1), reps=5, warmup=1),
]
for row in rows:
    print(f"{row.system} {row.config}: instrumented slower in {row.instr_slower_reps}/5 reps",
          file=sys.stderr)

with tempfile.TemporaryDirectory() as tmp:
    path = emit_report(rows, Path(tmp) / "overhead.md")
    print(path.read_text())
