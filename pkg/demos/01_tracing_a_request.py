"""Follow one request through an instrumented three-server pipeline.

Run with ``python3 demos/01_tracing_a_request.py``.
"""

from waltzrv import ClientHandle, Conductor, Reply, Runtime, wrap_server
from waltzrv.terms import Atom, format_term


class Doubler:
    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        return Reply(msg * 2, state)


class Front:
    # asks the doubler and adds one; `net` routes the call through the conductor
    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        return Reply((Atom("answer"), net.call("doubler", msg) + 1), state)


with Runtime(timeout=2.0) as rt:
    conductor = Conductor(rt)
    conductor.start()
    rt.spawn_server(wrap_server(Front(), "front", conductor), "front")
    rt.spawn_server(wrap_server(Doubler(), "doubler", conductor), "doubler")

    alice, bob = ClientHandle(conductor), ClientHandle(conductor)
    print("alice gets", format_term(alice.send("front", 20)))
    print("bob gets  ", format_term(bob.send("front", 5)))
    print("alice again", format_term(alice.send("front", 1)))

    # Each client handle received a token on its first call and reuses it, so
    # every event caused by alice shares one context and bob's share another.
    print("\nevents on the bus:")
    for e in conductor.bus.history:
        print(f"  {e.context}  {e.from_:>8} -> {e.to:<8} {format_term(e.payload)}")
    print("\ncontexts derived from the root:", [str(c) for c in conductor.tree.children()])
