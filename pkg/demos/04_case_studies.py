"""Run the three bundled systems under their properties, with and without bugs.

Run with ``python3 demos/04_case_studies.py``.
"""

from waltzrv.casestudies import BUGS, SCENARIOS, ScenarioConfig

for name, run in SCENARIOS.items():
    for bug in (None, BUGS[name]):
        report = run(ScenarioConfig(clients=8, requests_per_client=20, bug=bug, seed=1))
        v = report.verdict
        where = f" (context {v.context}, step {v.step}, event #{v.position})" if report.violated else ""
        print(f"{name:<10} bug={bug or '-':<18} {report.events:>5} events  "
              f"{v.kind.value}{where}")
