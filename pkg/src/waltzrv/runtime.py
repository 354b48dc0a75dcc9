"""A small in-process actor runtime with gen_server style request/reply calls.

Every spawned server owns a thread and an unbounded FIFO mailbox.  Handlers run
one message at a time, so server state is never touched concurrently.  ``call``
is a blocking rendezvous that can be issued from any thread: the caller parks on
a one-shot ``ReplyHandle`` until the server replies, either directly by
returning ``Reply`` or later through ``ReplyHandle.reply``.
"""

from __future__ import annotations

import itertools
import logging
import os
import queue
import threading
from dataclasses import dataclass
from typing import Any, Callable, Optional, Protocol, Union

from .terms import Pid, Term

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 5.0


def default_timeout() -> float:
    """Call timeout in seconds; ``WALTZ_TIMEOUT_MS`` overrides the 5 s default."""
    raw = os.environ.get("WALTZ_TIMEOUT_MS")
    if raw:
        return int(raw) / 1000.0
    return DEFAULT_TIMEOUT_S


class RuntimeFailure(RuntimeError):
    pass


class NameAlreadyRegistered(RuntimeFailure):
    pass


class UnknownTarget(RuntimeFailure):
    pass


class CallTimeout(RuntimeFailure):
    pass


class AlreadyReplied(RuntimeFailure):
    pass


class ServerCrashed(RuntimeFailure):
    pass


@dataclass
class Reply:
    value: Term
    state: Any


@dataclass
class NoReply:
    state: Any


CallResult = Union[Reply, NoReply]


class ReplyHandle:
    """One-shot slot a blocked caller waits on."""

    __slots__ = ("_done", "_lock", "_value", "_error", "_used")

    def __init__(self) -> None:
        self._done = threading.Event()
        self._lock = threading.Lock()
        self._value: Any = None
        self._error: Optional[BaseException] = None
        self._used = False

    def _settle(self, value: Any, error: Optional[BaseException]) -> None:
        with self._lock:
            if self._used:
                raise AlreadyReplied("reply handle already used")
            self._used = True
            self._value = value
            self._error = error
        self._done.set()

    def reply(self, value: Term) -> None:
        self._settle(value, None)

    def fail(self, error: BaseException) -> None:
        self._settle(None, error)

    @property
    def used(self) -> bool:
        return self._used

    def wait(self, timeout: Optional[float]) -> Any:
        if not self._done.wait(timeout):
            raise CallTimeout(f"no reply within {timeout} s")
        if self._error is not None:
            raise self._error
        return self._value


def reply(handle: ReplyHandle, value: Term) -> None:
    handle.reply(value)


class Net(Protocol):
    """Outbound call capability handed to every handler invocation."""

    def call(self, target: Union[str, Pid], msg: Term) -> Term: ...


class ServerBehavior(Protocol):
    def init(self) -> Any: ...

    def handle_call(self, msg: Term, from_: ReplyHandle, state: Any, net: Net) -> CallResult: ...


class DirectNet:
    """Plain uninstrumented calls straight through the runtime."""

    __slots__ = ("runtime",)

    def __init__(self, runtime: "Runtime") -> None:
        self.runtime = runtime

    def call(self, target: Union[str, Pid], msg: Term) -> Term:
        return self.runtime.call(target, msg)


_STOP = object()


class Process:
    def __init__(self, runtime: "Runtime", pid: Pid, name: str, behavior: ServerBehavior):
        self.runtime = runtime
        self.pid = pid
        self.name = name
        self.behavior = behavior
        self.mailbox: queue.SimpleQueue = queue.SimpleQueue()
        self.state: Any = None
        self.crashed: Optional[BaseException] = None
        self.handled = 0
        self._net = DirectNet(runtime)
        self.thread = threading.Thread(target=self._loop, name=f"proc-{name}", daemon=True)

    def _loop(self) -> None:
        self.state = self.behavior.init()
        while True:
            item = self.mailbox.get()
            if item is _STOP:
                return
            msg, handle = item
            try:
                result = self.behavior.handle_call(msg, handle, self.state, self._net)
                self.state = result.state
                self.handled += 1
                if isinstance(result, Reply):
                    handle.reply(result.value)
            except Exception as exc:  # crash: fail the caller and stop serving
                log.error("server %s crashed on %r: %s", self.name, msg, exc)
                self.crashed = exc
                if not handle.used:
                    handle.fail(ServerCrashed(f"{self.name} crashed: {exc!r}"))
                self._drain()
                return

    def _drain(self) -> None:
        while True:
            try:
                item = self.mailbox.get_nowait()
            except queue.Empty:
                return
            if item is not _STOP:
                item[1].fail(ServerCrashed(f"{self.name} is down"))


class Runtime:
    """Registry of named server processes plus the blocking call primitive."""

    def __init__(self, timeout: Optional[float] = None):
        self.timeout = default_timeout() if timeout is None else timeout
        self._lock = threading.Lock()
        self._by_name: dict[str, Process] = {}
        self._by_pid: dict[Pid, Process] = {}
        self._serials = itertools.count(1)

    def new_pid(self) -> Pid:
        return Pid(0, next(self._serials), 0)

    def spawn_server(self, behavior: ServerBehavior, name: str) -> Pid:
        with self._lock:
            if name in self._by_name:
                raise NameAlreadyRegistered(name)
            proc = Process(self, self.new_pid(), name, behavior)
            self._by_name[name] = proc
            self._by_pid[proc.pid] = proc
        proc.thread.start()
        return proc.pid

    def lookup(self, target: Union[str, Pid]) -> Process:
        proc = self._by_pid.get(target) if isinstance(target, Pid) else self._by_name.get(target)
        if proc is None:
            raise UnknownTarget(str(target))
        return proc

    def whereis(self, name: str) -> Pid:
        return self.lookup(name).pid

    def name_of(self, target: Union[str, Pid]) -> str:
        return self.lookup(target).name

    def registered(self) -> list[str]:
        with self._lock:
            return list(self._by_name)

    def get_state(self, target: Union[str, Pid]) -> Any:
        return self.lookup(target).state

    def call(self, target: Union[str, Pid], msg: Term, timeout: Optional[float] = None) -> Term:
        proc = self.lookup(target)
        if proc.crashed is not None:
            raise ServerCrashed(f"{proc.name} is down")
        handle = ReplyHandle()
        proc.mailbox.put((msg, handle))
        return handle.wait(self.timeout if timeout is None else timeout)

    def spawn(self, fn: Callable[..., Any], *args: Any) -> threading.Thread:
        t = threading.Thread(target=fn, args=args, daemon=True)
        t.start()
        return t

    def shutdown(self, join: bool = True) -> None:
        with self._lock:
            procs = list(self._by_name.values())
            self._by_name.clear()
            self._by_pid.clear()
        for proc in procs:
            proc.mailbox.put(_STOP)
        if join:
            for proc in procs:
                proc.thread.join(timeout=1.0)

    def __enter__(self) -> "Runtime":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.shutdown()
