import threading

import pytest
from hypothesis import given, settings, strategies as st

from waltzrv.runtime import (
    AlreadyReplied, CallTimeout, NameAlreadyRegistered, NoReply, Reply, Runtime, ServerCrashed,
    UnknownTarget, default_timeout,
)
from waltzrv.terms import Atom, Pid

OK = Atom("ok")


class Echo:
    def init(self):
        return 0

    def handle_call(self, msg, from_, state, net):
        return Reply(msg, state + 1)


class Recorder:
    """Appends (msg, state_in, state_out) and flags overlapping handler runs."""

    def __init__(self):
        self.trace = []
        self.active = 0
        self.overlap = False

    def init(self):
        return 0

    def handle_call(self, msg, from_, state, net):
        self.active += 1
        if self.active > 1:
            self.overlap = True
        self.trace.append((msg, state, state + 1))
        self.active -= 1
        return Reply(OK, state + 1)


class Forwarder:
    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        return Reply(("fwd", net.call("echo", msg)), state)


class Deferred:
    def __init__(self, runtime):
        self.runtime = runtime

    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        self.runtime.spawn(lambda: from_.reply(("later", msg)))
        return NoReply(state)


class Silent:
    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        return NoReply(state)


class Crashy:
    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        if msg == "boom":
            raise ValueError("boom")
        return Reply(msg, state)


class DoubleReply:
    def init(self):
        return None

    def handle_call(self, msg, from_, state, net):
        from_.reply("first")
        return Reply("second", state)


@pytest.fixture
def rt():
    with Runtime(timeout=2.0) as runtime:
        yield runtime


class TestCalls:
    def test_echo_and_state(self, rt):
        pid = rt.spawn_server(Echo(), "echo")
        assert rt.call("echo", (Atom("hi"), 1)) == (Atom("hi"), 1)
        assert rt.call(pid, 2) == 2
        assert rt.get_state("echo") == 2
        assert rt.whereis("echo") == pid and rt.name_of(pid) == "echo"
        assert rt.registered() == ["echo"]

    def test_nested_call_through_net(self, rt):
        rt.spawn_server(Echo(), "echo")
        rt.spawn_server(Forwarder(), "fwd")
        assert rt.call("fwd", 5) == ("fwd", 5)

    def test_deferred_reply(self, rt):
        rt.spawn_server(Deferred(rt), "d")
        assert rt.call("d", 1) == ("later", 1)

    def test_pids_are_unique(self, rt):
        assert len({rt.new_pid() for _ in range(100)}) == 100
        assert isinstance(rt.new_pid(), Pid)


class TestErrors:
    def test_duplicate_name(self, rt):
        rt.spawn_server(Echo(), "x")
        with pytest.raises(NameAlreadyRegistered):
            rt.spawn_server(Echo(), "x")

    def test_unknown_target(self, rt):
        with pytest.raises(UnknownTarget):
            rt.call("nobody", 1)

    def test_timeout(self, rt):
        rt.spawn_server(Silent(), "s")
        with pytest.raises(CallTimeout):
            rt.call("s", 1, timeout=0.05)

    def test_crash_fails_caller_and_later_calls(self, rt):
        rt.spawn_server(Crashy(), "c")
        assert rt.call("c", 1) == 1
        with pytest.raises(ServerCrashed):
            rt.call("c", "boom")
        with pytest.raises(ServerCrashed):
            rt.call("c", 2)

    def test_reply_is_one_shot(self, rt):
        rt.spawn_server(DoubleReply(), "dr")
        assert rt.call("dr", 0) == "first"
        assert isinstance(rt.lookup("dr").crashed, AlreadyReplied)

    def test_timeout_env_override(self, monkeypatch):
        monkeypatch.setenv("WALTZ_TIMEOUT_MS", "250")
        assert default_timeout() == 0.25
        assert Runtime().timeout == 0.25
        monkeypatch.delenv("WALTZ_TIMEOUT_MS")
        assert default_timeout() == 5.0


class TestConcurrency:
    def test_handlers_never_interleave(self, rt):
        rec = Recorder()
        rt.spawn_server(rec, "r")
        threads = [threading.Thread(target=lambda i=i: [rt.call("r", (i, k)) for k in range(50)])
                   for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not rec.overlap
        assert [(s_in, s_out) for _, s_in, s_out in rec.trace] == [(k, k + 1) for k in range(400)]

    def test_fifo_per_caller(self, rt):
        rec = Recorder()
        rt.spawn_server(rec, "r")

        def caller(i):
            for k in range(100):
                rt.call("r", (i, k))

        threads = [threading.Thread(target=caller, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for i in range(4):
            assert [m[1] for m, _, _ in rec.trace if m[0] == i] == list(range(100))

    @settings(max_examples=10, deadline=None)
    @given(st.integers(1, 100), st.integers(1, 100))
    def test_echo_topology_completes(self, n, m):
        with Runtime(timeout=5.0) as runtime:
            runtime.spawn_server(Echo(), "echo")
            errors = []

            def client(i):
                try:
                    for k in range(m):
                        assert runtime.call("echo", (i, k)) == (i, k)
                except Exception as exc:
                    errors.append(exc)

            threads = [threading.Thread(target=client, args=(i,)) for i in range(n)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert not errors
            assert runtime.get_state("echo") == n * m
