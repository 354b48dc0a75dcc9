"""The three example systems, each with a shipped property and a bug switch."""

from .arithmetic import run_arithmetic
from .chat import run_chat
from .common import RunReport, ScenarioConfig, ScenarioError
from .gcounter import run_gcounter

SCENARIOS = {
    "arithmetic": run_arithmetic,
    "chat": run_chat,
    "counter": run_gcounter,
}

BUGS = {
    "arithmetic": "add_decrements",
    "chat": "bypass_membership",
    "counter": "stale_query",
}

__all__ = ["BUGS", "SCENARIOS", "RunReport", "ScenarioConfig", "ScenarioError",
           "run_arithmetic", "run_chat", "run_gcounter"]
