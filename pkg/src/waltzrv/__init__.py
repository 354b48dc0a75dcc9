"""Causality-aware runtime verification for actor-style client/server systems."""

from .conductor import Conductor
from .injection import ClientHandle, client_send, wrap_server
from .lang import check_well_formed, load_spec, parse, print_formula
from .monitor import Monitor, MonitorProgram, compile_monitor, run_monitor
from .runtime import NoReply, Reply, Runtime
from .semantics import oracle_verdict, satisfies
from .terms import Atom, Pid, Ref
from .trace import ROOT, ContextTree, Event, EventBus, read_trace, write_trace
from .verdict import Verdict, VerdictKind

__version__ = "0.1.0"

__all__ = [
    "Atom", "ClientHandle", "Conductor", "ContextTree", "Event", "EventBus", "Monitor",
    "MonitorProgram", "NoReply", "Pid", "ROOT", "Ref", "Reply", "Runtime", "Verdict",
    "VerdictKind", "check_well_formed", "client_send", "compile_monitor", "load_spec",
    "oracle_verdict", "parse", "print_formula", "read_trace", "run_monitor", "satisfies",
    "wrap_server", "write_trace",
]
