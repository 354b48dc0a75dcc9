"""Chat system: chat_server in front of a registry_server and the chat_room actor.

A client connects, joins one room, posts, and disconnects.  Rooms are integer
ids.  ``chat_server`` only forwards a post to the room the client joined; the
``bypass_membership`` bug skips that check and delivers to the next room id.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from ..lang import Formula
from ..runtime import Reply
from ..terms import Atom
from .common import RunReport, ScenarioConfig, System, resolve_spec, run_system

OK = Atom("ok")
ERROR = Atom("error")
CONNECT = Atom("connect")
DISCONNECT = Atom("disconnect")
JOIN = Atom("join")
LEAVE = Atom("leave")
POST = Atom("post")
REGISTER = Atom("register")
UNREGISTER = Atom("unregister")
NOT_MEMBER = Atom("not_member")

BUGS = ("bypass_membership",)
SPEC_FILE = "chat_membership.waltz"


class RegistryServer:
    def init(self):
        return set()

    def handle_call(self, msg, from_, state, net):
        tag, client = msg
        if tag == REGISTER:
            state.add(client)
            return Reply((OK, client), state)
        state.discard(client)
        return Reply((OK,), state)


class ChatRoom:
    """Holds every room's members and message log."""

    def __init__(self, background_work: int = 0):
        self.background_work = background_work

    def init(self):
        return {"members": {}, "log": {}}

    def handle_call(self, msg, from_, state, net):
        tag = msg[0]
        if tag == POST:
            _, room, body = msg
            state["log"].setdefault(room, []).append(body)
            if self.background_work:
                _busy(self.background_work)
            return Reply((OK, room), state)
        _, room, client = msg
        members = state["members"].setdefault(room, set())
        if tag == JOIN:
            members.add(client)
        else:
            members.discard(client)
        return Reply((OK, room), state)


def _busy(n: int) -> int:
    acc = 0
    for i in range(n):
        acc = (acc * 31 + i) & 0xFFFF
    return acc


class ChatServer:
    def __init__(self, bug: Optional[str] = None):
        self.bypass = bug == "bypass_membership"

    def init(self):
        return {}

    def handle_call(self, msg, from_, state, net):
        tag = msg[0]
        if tag == CONNECT:
            return Reply(net.call("registry_server", (REGISTER, msg[1])), state)
        if tag == JOIN:
            _, room, client = msg
            state[client] = room
            net.call("chat_room", (JOIN, room, client))
            return Reply((OK, room), state)
        if tag == POST:
            _, room, client, seq = msg
            if self.bypass:
                room = room + 1
            elif state.get(client) != room:
                return Reply((ERROR, NOT_MEMBER), state)
            return Reply(net.call("chat_room", (POST, room, (client, seq))), state)
        if tag == DISCONNECT:
            client = msg[1]
            room = state.pop(client, None)
            if room is not None:
                net.call("chat_room", (LEAVE, room, client))
            net.call("registry_server", (UNREGISTER, client))
            return Reply((OK,), state)
        return Reply((ERROR, Atom("unknown_request")), state)


def room_count(clients: int) -> int:
    return max(1, clients // 5)


def setup(system: System, cfg: ScenarioConfig) -> None:
    system.spawn(RegistryServer(), "registry_server")
    system.spawn(ChatRoom(cfg.background_work), "chat_room")
    system.spawn(ChatServer(cfg.bug), "chat_server")


def run_chat(
    cfg: ScenarioConfig,
    instrumented: bool = True,
    monitor: bool = True,
    spec: Union[Formula, str, Path, None] = None,
    trace_out: Union[str, Path, None] = None,
    verdict_log: Union[str, Path, None] = None,
    timeout: Optional[float] = None,
) -> RunReport:
    if cfg.bug is not None and cfg.bug not in BUGS:
        raise ValueError(f"unknown chat bug {cfg.bug!r}; known: {BUGS}")
    rooms = room_count(cfg.clients)

    def work(index, send, pid):
        rng = cfg.client_rng(index)
        room = rng.randrange(rooms)
        replies = [send("chat_server", (CONNECT, index)),
                   send("chat_server", (JOIN, room, index))]
        for seq in range(cfg.requests_per_client):
            replies.append(send("chat_server", (POST, room, index, seq)))
        replies.append(send("chat_server", (DISCONNECT, index)))
        return replies, room

    def final_state(system: System):
        state = system.runtime.get_state("chat_room")
        return getattr(state, "inner", state)

    return run_system(
        "chat", cfg, lambda s: setup(s, cfg), work,
        resolve_spec(spec, SPEC_FILE), instrumented, monitor, trace_out, verdict_log, timeout,
        final_state,
    )
