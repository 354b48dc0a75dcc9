"""Compare the incremental monitor with the reference semantics on a small trace.

Run with ``python3 demos/03_monitor_and_oracle.py``.
"""

from waltzrv import ContextTree, Event, Ref, compile_monitor, oracle_verdict, parse, run_monitor, satisfies
from waltzrv.semantics import EXISTENTIAL, FIRST_MATCH
from waltzrv.terms import Atom, Pid
from waltzrv.trace import ROOT

P = Atom("process")
phi = parse("omega( send main -> add {process, _, N1} : true ; "
            "send add -> mult {process, N2} : N2 = N1 + 10 )")
a, b = Ref(1), Ref(2)
tree = ContextTree.flat([a, b])
trace = [
    Event("main", "add", (P, Pid(0, 1, 0), 4), a),
    Event("main", "add", (P, Pid(0, 2, 0), 7), b),
    Event("add", "mult", (P, 17), b),
    Event("add", "mult", (P, 99), a),   # wrong value for context a ...
    Event("add", "mult", (P, 14), a),   # ... followed by the right one
]

verdict, log = run_monitor(compile_monitor(phi), trace, tree)
print("monitor verdict:", verdict.kind.value, "in", verdict.context, "at step", verdict.step,
      "with", verdict.bindings)
print("oracle verdict: ", oracle_verdict(trace, tree, phi).value)

# The monitor commits to the first matching event (selective receive), which is
# what the first-match reading formalises.  The existential reading may instead
# pick any matching event, so it accepts this trace.
n = len(trace) + 1
print("first-match semantics holds:", satisfies(trace, tree, ROOT, 1, n, phi, FIRST_MATCH))
print("existential semantics holds:", satisfies(trace, tree, ROOT, 1, n, phi, EXISTENTIAL))
