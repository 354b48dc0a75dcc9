"""Context injection as behavior wrappers.

``wrap_server`` gives an ordinary behavior the four hooks the instrumentation
needs: a context slot in its state, handling of ``{with_context, Ctx, Msg}``,
outbound calls redirected through the conductor, and (on the client side,
``ClientHandle``) extraction of the token piggybacked on replies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Union

from .conductor import WITH_CONTEXT, Conductor
from .runtime import Reply, ReplyHandle, ServerBehavior
from .terms import Pid, Ref, Term


class ConductorNet:
    """Outbound calls bound to the context captured when the handler was entered."""

    __slots__ = ("conductor", "context", "module")

    def __init__(self, conductor: Conductor, context: Optional[Ref], module: str):
        self.conductor = conductor
        self.context = context
        self.module = module

    def call(self, target: Union[str, Pid], msg: Term) -> Term:
        return self.conductor.call(target, msg, self.context, self.module)


@dataclass(frozen=True)
class InstrumentedState:
    context: Optional[Ref]
    inner: Any


def is_envelope(msg: Any) -> bool:
    return isinstance(msg, tuple) and len(msg) == 3 and msg[0] == WITH_CONTEXT


class InstrumentedBehavior:
    def __init__(self, inner: ServerBehavior, module_name: str, conductor: Conductor):
        self.inner = inner
        self.module_name = module_name
        self.conductor = conductor

    def init(self) -> InstrumentedState:
        return InstrumentedState(None, self.inner.init())

    def handle_call(self, msg: Term, from_: ReplyHandle, state: InstrumentedState, net: Any):
        if is_envelope(msg):
            _, ctx, body = msg
        else:
            ctx, body = state.context, msg
        # captured once, here: later requests may overwrite the slot before
        # threads spawned by this invocation get to make their calls
        outbound = ConductorNet(self.conductor, ctx, self.module_name)
        result = self.inner.handle_call(body, from_, state.inner, outbound)
        new_state = InstrumentedState(ctx, result.state)
        if isinstance(result, Reply):
            return Reply(result.value, new_state)
        return type(result)(new_state)


def wrap_server(b: ServerBehavior, name: str, conductor: Conductor) -> InstrumentedBehavior:
    return InstrumentedBehavior(b, name, conductor)


class ClientHandle:
    """Client-side endpoint that caches the context handed back by the conductor.

    Single owner; do not share one handle between threads.
    """

    def __init__(self, conductor: Conductor, module: str = "client"):
        self.conductor = conductor
        self.module = module
        self.cached_context: Optional[Ref] = None

    def send(self, to: Union[str, Pid], msg: Term) -> Term:
        reply, ctx = self.conductor.call(to, msg, self.cached_context, self.module)
        self.cached_context = ctx
        return reply

    def reset(self) -> None:
        """Forget the cached context so the next request starts a new chain."""
        self.cached_context = None


def client_send(h: ClientHandle, to: Union[str, Pid], msg: Term) -> Term:
    return h.send(to, msg)
