"""Brute-force evaluation of WALTZ formulas over finite recorded traces.

This is the reference the compiled monitors are tested against, so it is kept
deliberately naive: it re-scans trace intervals recursively instead of keeping
incremental state.

Two modes are available.

``existential``
    The declarative reading.  A step holds on ``[i, j]`` if *some* event in the
    interval, in the current context, matches the signature and satisfies the
    constraint.  A chain holds if some split point ``k`` with ``i <= k < j``
    makes the left part hold on ``[i, k]`` and the right part on ``[k, j]``.
    ``omega`` quantifies universally over the contexts derived from the current
    one, ``theta`` existentially.

``first-match``
    The selective-receive reading the monitors implement.  In each context the
    *first* event matching a step's signature decides that step; the chain's
    split point is that event and the next step searches strictly after it.
    Under ``omega`` a context repeats the chain until the trace runs out: the
    context is good when it completed at least one chain, never failed a
    constraint and is not stuck half-way through a chain.  Under ``theta`` a
    context is good when its first chain completes.

Positions are 1-based; ``j = len(trace) + 1`` denotes the end of the trace.
Variables bound by a step stay visible to the steps after it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .lang import Chain, Formula, Omega, Signature, Step, Theta
from .terms import BindingConflict, Bindings, Ref, constraint_holds, match_pattern, merge_bindings
from .trace import ROOT, ContextTree, Event
from .verdict import VerdictKind

EXISTENTIAL = "existential"
FIRST_MATCH = "first-match"
MODES = (EXISTENTIAL, FIRST_MATCH)


class InvalidInterval(ValueError):
    pass


def signature_matches(e: Event, a: Signature, inherited: Optional[Bindings] = None) -> Optional[Bindings]:
    """Bindings if ``e`` has signature ``a`` (and agrees with ``inherited``), else None."""
    if e.from_ != a.from_ or e.to != a.to:
        return None
    b = match_pattern(a.pattern, e.payload)
    if b is None:
        return None
    if inherited:
        try:
            return merge_bindings(inherited, b)
        except BindingConflict:
            return None
    return b


def satisfies(
    t: Sequence[Event],
    ct: ContextTree,
    delta: Ref,
    i: int,
    j: int,
    f: Formula,
    mode: str = EXISTENTIAL,
) -> bool:
    n = len(t)
    if not (1 <= i <= j <= n + 1):
        raise InvalidInterval(f"need 1 <= i <= j <= {n + 1}, got i={i}, j={j}")
    if mode == EXISTENTIAL:
        return next(_solutions(t, ct, delta, i, j, f, {}), None) is not None
    if mode == FIRST_MATCH:
        return _first_match_holds(t, ct, delta, i, j, f)
    raise ValueError(f"unknown mode {mode!r}")


# --------------------------------------------------------------------------
# existential mode


def _solutions(t, ct, delta, i, j, f, b) -> Iterator[Bindings]:
    """Every binding environment under which ``f`` holds on [i, j] in ``delta``."""
    if isinstance(f, Step):
        for k in range(i, min(j, len(t)) + 1):
            e = t[k - 1]
            if e.context != delta:
                continue
            m = signature_matches(e, f.signature, b)
            if m is not None and constraint_holds(f.constraint, m):
                yield m
    elif isinstance(f, Chain):
        for k in range(i, j):
            for left in _solutions(t, ct, delta, i, k, f.left, b):
                yield from _solutions(t, ct, delta, k, j, f.right, left)
    elif isinstance(f, Omega):
        if all(_holds(t, ct, c, i, j, f.body, b) for c in ct.children(delta)):
            yield b
    elif isinstance(f, Theta):
        if any(_holds(t, ct, c, i, j, f.body, b) for c in ct.children(delta)):
            yield b
    else:
        raise TypeError(f"not a formula: {f!r}")


def _holds(t, ct, delta, i, j, f, b) -> bool:
    return next(_solutions(t, ct, delta, i, j, f, b), None) is not None


# --------------------------------------------------------------------------
# first-match mode


@dataclass(frozen=True)
class _Outcome:
    status: str  # 'ok' | 'fail' | 'pending'
    end: int = 0
    bindings: Bindings = field(default_factory=dict)
    progressed: bool = False


def _first_match(t, delta, i, j, f, b) -> _Outcome:
    if isinstance(f, Step):
        for k in range(i, min(j, len(t)) + 1):
            e = t[k - 1]
            if e.context != delta:
                continue
            m = signature_matches(e, f.signature, b)
            if m is None:
                continue
            if constraint_holds(f.constraint, m):
                return _Outcome("ok", k, m)
            return _Outcome("fail", k, m)
        return _Outcome("pending")
    if isinstance(f, Chain):
        left = _first_match(t, delta, i, j, f.left, b)
        if left.status != "ok":
            return left
        right = _first_match(t, delta, left.end + 1, j, f.right, left.bindings)
        if right.status == "pending":
            return _Outcome("pending", progressed=True)
        return right
    raise ValueError("first-match mode supports modal operators only at top level")


@dataclass(frozen=True)
class ContextRun:
    """Result of repeating a chain in one context under first-match."""

    completed: int
    failed: bool
    partial: bool


def iterate_chain(t: Sequence[Event], delta: Ref, i: int, j: int, body: Formula) -> ContextRun:
    pos, completed = i, 0
    while pos <= j:
        r = _first_match(t, delta, pos, j, body, {})
        if r.status == "ok":
            completed += 1
            pos = r.end + 1
            continue
        if r.status == "fail":
            return ContextRun(completed, True, False)
        return ContextRun(completed, False, r.progressed)
    return ContextRun(completed, False, False)


def _first_match_holds(t, ct, delta, i, j, f) -> bool:
    if isinstance(f, Omega):
        for c in ct.children(delta):
            run = iterate_chain(t, c, i, j, f.body)
            if run.failed or run.partial or run.completed == 0:
                return False
        return True
    if isinstance(f, Theta):
        return any(_first_match(t, c, i, j, f.body, {}).status == "ok" for c in ct.children(delta))
    return _first_match(t, delta, i, j, f, {}).status == "ok"


def oracle_verdict(t: Sequence[Event], ct: ContextTree, f: Formula) -> VerdictKind:
    """Three-valued reading of the first-match semantics on a trace prefix.

    Omega is violated once some derived context has failed a constraint (no
    extension can repair that), satisfied when the first-match semantics holds
    over at least one derived context, and undecided otherwise.  Theta is
    satisfied when it holds and undecided otherwise, since a later context may
    still satisfy it.
    """
    end = len(t) + 1
    if isinstance(f, Omega):
        children = ct.children(ROOT)
        if any(iterate_chain(t, c, 1, end, f.body).failed for c in children):
            return VerdictKind.VIOLATED
        if children and satisfies(t, ct, ROOT, 1, end, f, FIRST_MATCH):
            return VerdictKind.SATISFIED
        return VerdictKind.INCONCLUSIVE
    if isinstance(f, Theta):
        if satisfies(t, ct, ROOT, 1, end, f, FIRST_MATCH):
            return VerdictKind.SATISFIED
        return VerdictKind.INCONCLUSIVE
    raise ValueError("oracle verdicts need a top-level omega or theta")
