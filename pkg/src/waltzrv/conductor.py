"""The conductor: interception hub that assigns causality tokens and reports events.

Instrumented code never calls a server directly.  It calls ``Conductor.call``
with its current context (or ``None``).  A missing context gets a fresh token
registered under the root context; otherwise the token is reused.  The
conductor's own server publishes the request event and hands the forwarding to
a freshly spawned worker thread, so the conductor never blocks on downstream
work.  The worker delivers ``{with_context, Ctx, Msg}`` to the target, publishes
the reply event and unblocks the original caller.  Callers registered as client
modules receive ``{Reply, Ctx}`` so they can cache the token.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .runtime import CallTimeout, NoReply, ReplyHandle, Runtime, RuntimeFailure
from .terms import Atom, Pid, Ref, Term, make_ref
from .trace import ROOT, ContextTree, Event, EventBus

WITH_CONTEXT = Atom("with_context")
TIMEOUT_PAYLOAD = (Atom("conductor_timeout"),)
ERROR_PAYLOAD = (Atom("conductor_error"),)


@dataclass(frozen=True)
class _Send:
    to: Union[str, Pid]
    msg: Term
    context: Ref
    from_module: str


class _ConductorServer:
    def __init__(self, conductor: "Conductor"):
        self.conductor = conductor

    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        c = self.conductor
        to_mod = c.get_target_module(msg.to)
        c.bus.publish(Event(msg.from_module, to_mod, msg.msg, msg.context))
        c.runtime.spawn(c._worker, msg, from_, to_mod)
        return NoReply(state)


class Conductor:
    def __init__(
        self,
        runtime: Runtime,
        clients: Iterable[str] = ("client",),
        bus: Optional[EventBus] = None,
        tree: Optional[ContextTree] = None,
        name: str = "conductor",
    ):
        self.runtime = runtime
        self.clients = frozenset(clients)
        self.bus = bus if bus is not None else EventBus()
        self.tree = tree if tree is not None else ContextTree()
        self.name = name
        self.pid: Optional[Pid] = None

    def start(self) -> Pid:
        self.pid = self.runtime.spawn_server(_ConductorServer(self), self.name)
        return self.pid

    def gen_context(self) -> Ref:
        ctx = make_ref()
        self.tree.add(ctx, ROOT)
        return ctx

    def get_target_module(self, target: Union[str, Pid]) -> str:
        return self.runtime.name_of(target)

    def is_client_module(self, module: str) -> bool:
        return module in self.clients

    def call(self, to: Union[str, Pid], msg: Term, ctx: Optional[Ref], from_module: str) -> Term:
        """Route one request through the conductor (the gamma case analysis happens here)."""
        self.get_target_module(to)  # UnknownTarget surfaces in the caller
        if ctx is None:
            ctx = self.gen_context()
        # the worker's own call carries the real timeout; leave it room to report first
        return self.runtime.call(self.name, _Send(to, msg, ctx, from_module),
                                 timeout=self.runtime.timeout * 2)

    conductor_call = call

    def _worker(self, send: _Send, from_: ReplyHandle, to_mod: str) -> None:
        try:
            reply = self.runtime.call(send.to, (WITH_CONTEXT, send.context, send.msg))
        except CallTimeout as exc:
            self.bus.publish(Event(to_mod, send.from_module, TIMEOUT_PAYLOAD, send.context))
            from_.fail(exc)
            return
        except RuntimeFailure as exc:
            self.bus.publish(Event(to_mod, send.from_module, ERROR_PAYLOAD, send.context))
            from_.fail(exc)
            return
        self.bus.publish(Event(to_mod, send.from_module, reply, send.context))
        if self.is_client_module(send.from_module):
            from_.reply((reply, send.context))
        else:
            from_.reply(reply)
