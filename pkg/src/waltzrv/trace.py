"""Events, the context tree, the event bus and the JSON-lines trace format."""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from .terms import Ref, Term, context_label, parse_context_label, term_from_json, term_to_json

ROOT = Ref(0)


@dataclass(frozen=True)
class Event:
    """One directed message observation, tagged with its causality token."""

    from_: str
    to: str
    payload: Term
    context: Ref

    def to_json(self) -> dict:
        return {
            "from": self.from_,
            "to": self.to,
            "payload": term_to_json(self.payload),
            "context": context_label(self.context),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Event":
        return cls(obj["from"], obj["to"], term_from_json(obj["payload"]),
                   parse_context_label(obj["context"]))


def gamma_of(e: Event) -> Ref:
    return e.context


class ContextTree:
    """Parent links between contexts; ROOT has no parent."""

    def __init__(self) -> None:
        self._parent: dict[Ref, Ref] = {}
        self._lock = threading.Lock()

    def add(self, child: Ref, parent: Ref = ROOT) -> None:
        if child == ROOT:
            raise ValueError("the root context has no parent")
        with self._lock:
            self._parent[child] = parent

    def parent(self, ctx: Ref) -> Optional[Ref]:
        return self._parent.get(ctx)

    def derives(self, child: Ref, parent: Ref) -> bool:
        return self._parent.get(child) == parent

    def children(self, ctx: Ref = ROOT) -> list[Ref]:
        with self._lock:
            items = list(self._parent.items())
        return sorted((c for c, p in items if p == ctx), key=lambda r: r.serial)

    def contexts(self) -> list[Ref]:
        with self._lock:
            return sorted(self._parent, key=lambda r: r.serial)

    def __contains__(self, ctx: Ref) -> bool:
        return ctx == ROOT or ctx in self._parent

    def __len__(self) -> int:
        return len(self._parent)

    def links(self) -> list[list[str]]:
        return [[context_label(c), context_label(self._parent[c])] for c in self.contexts()]

    @classmethod
    def from_links(cls, links: Iterable[Iterable[str]]) -> "ContextTree":
        tree = cls()
        for child, parent in links:
            tree.add(parse_context_label(child), parse_context_label(parent))
        return tree

    @classmethod
    def flat(cls, contexts: Iterable[Ref]) -> "ContextTree":
        tree = cls()
        for c in contexts:
            tree.add(c)
        return tree


_CLOSED = object()


class Subscription:
    def __init__(self, bus: "EventBus"):
        self._bus = bus
        self._q: queue.SimpleQueue = queue.SimpleQueue()

    def _push(self, item) -> None:
        self._q.put(item)

    def get(self, timeout: Optional[float] = None) -> Optional[Event]:
        """Next event, or None once the bus is closed."""
        item = self._q.get(timeout=timeout)
        return None if item is _CLOSED else item

    def __iter__(self) -> Iterator[Event]:
        while True:
            item = self._q.get()
            if item is _CLOSED:
                return
            yield item

    def cancel(self) -> None:
        self._bus._unsubscribe(self)
        self._q.put(_CLOSED)


class EventBus:
    """Single serialization point for events.

    ``publish`` is safe from any thread; the order in which publishers acquire
    the bus lock is the one total order that monitors and dumps observe.
    Subscriber queues are unbounded.
    """

    def __init__(self, record: bool = True):
        self.record = record
        self.history: list[Event] = []
        self.published = 0
        self._subs: list[Subscription] = []
        self._lock = threading.Lock()
        self._closed = False
        self.dropped = 0

    def subscribe(self, replay: bool = False) -> Subscription:
        sub = Subscription(self)
        with self._lock:
            if replay:
                for e in self.history:
                    sub._push(e)
            if self._closed:
                sub._push(_CLOSED)
            else:
                self._subs.append(sub)
        return sub

    def _unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    def publish(self, event: Event) -> int:
        """Append ``event`` to the total order; returns its index, or -1 after close."""
        with self._lock:
            if self._closed:
                self.dropped += 1
                return -1
            seq = self.published
            self.published += 1
            if self.record:
                self.history.append(event)
            for sub in self._subs:
                sub._push(event)
        return seq

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            subs, self._subs = self._subs, []
        for sub in subs:
            sub._push(_CLOSED)

    @property
    def closed(self) -> bool:
        return self._closed


def write_trace(path: Union[str, Path], events: Iterable[Event], tree: ContextTree) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"context_tree": tree.links()}) + "\n")
        for e in events:
            fh.write(json.dumps(e.to_json(), separators=(",", ":")) + "\n")
    return path


def read_trace(path: Union[str, Path]) -> tuple[list[Event], ContextTree]:
    """Load a JSON-lines trace; a missing header yields a flat tree over the events' contexts."""
    events: list[Event] = []
    tree: Optional[ContextTree] = None
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "context_tree" in obj:
                tree = ContextTree.from_links(obj["context_tree"])
            else:
                events.append(Event.from_json(obj))
    if tree is None:
        tree = ContextTree.flat({e.context for e in events if e.context != ROOT})
    return events, tree
