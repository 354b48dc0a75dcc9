"""Random traces and formulas shared by the property and acceptance tests."""

from __future__ import annotations

import random

from waltzrv.lang import Chain, Omega, Signature, Step, Theta, flatten_steps, is_well_formed
from waltzrv.terms import (
    Atom, BinOp, Cmp, Const, FalseC, IntLit, Not, Ref, TrueC, TuplePat, Var, VarRef, Wildcard,
)
from waltzrv.trace import ROOT, ContextTree, Event

MODULES = ("a", "b", "c")
TAGS = (Atom("p"), Atom("q"))
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
STRAY = Ref(99)  # a context that never appears in the tree


# --------------------------------------------------------------------------
# traces


def random_trace(rng: random.Random, max_events: int = 20, max_contexts: int = 3,
                 stray: bool = True):
    """Events over modules a/b/c with payloads {tag, 0..10 [, 0..10]}."""
    k = rng.randint(1, max_contexts)
    contexts = [Ref(i) for i in range(1, k + 1)]
    tree = ContextTree.flat(contexts)
    pool = list(contexts)
    if stray:
        pool += [ROOT, STRAY]
    n = rng.randint(0, max_events)
    events = []
    for _ in range(n):
        src, dst = rng.choice(MODULES), rng.choice(MODULES)
        payload = (rng.choice(TAGS),) + tuple(rng.randint(0, 10) for _ in range(rng.randint(1, 2)))
        ctx = rng.choice(contexts) if rng.random() < 0.9 or not stray else rng.choice(pool)
        events.append(Event(src, dst, payload, ctx))
    return events, tree


# --------------------------------------------------------------------------
# formulas for monitoring (flat chains, integer constraints)


def _random_arith(rng, names, depth):
    if depth <= 0 or rng.random() < 0.5:
        if names and rng.random() < 0.6:
            return VarRef(rng.choice(names))
        return IntLit(rng.randint(-2, 12))
    return BinOp(rng.choice("+-*"), _random_arith(rng, names, depth - 1),
                 _random_arith(rng, names, depth - 1))


def _random_constraint(rng, names, depth=2):
    r = rng.random()
    if r < 0.35 or not names:
        return TrueC() if rng.random() < 0.9 else FalseC()
    if r < 0.45 and depth > 0:
        return Not(_random_constraint(rng, names, depth - 1))
    return Cmp(rng.choice(CMP_OPS), _random_arith(rng, names, 1), _random_arith(rng, names, 1))


def random_monitor_formula(rng: random.Random, max_steps: int = 3):
    """A well-formed omega/theta over a chain of 1..max_steps steps."""
    while True:
        bound: list[str] = []
        steps = []
        for k in range(rng.randint(1, max_steps)):
            items = [Const(rng.choice(TAGS)) if rng.random() < 0.8 else Wildcard()]
            for m in range(rng.randint(1, 2)):
                r = rng.random()
                if r < 0.55:
                    name = f"X{k}{m}"
                    items.append(Var(name))
                    bound.append(name)
                elif r < 0.65 and bound:
                    items.append(Var(rng.choice(bound)))  # equality with an earlier step
                elif r < 0.85:
                    items.append(Wildcard())
                else:
                    items.append(Const(rng.randint(0, 10)))
            sig = Signature(rng.choice(MODULES), rng.choice(MODULES), TuplePat(tuple(items)))
            steps.append(Step(sig, _random_constraint(rng, list(dict.fromkeys(bound)))))
        body = steps[-1]
        for s in reversed(steps[:-1]):
            body = Chain(s, body)
        f = (Omega if rng.random() < 0.6 else Theta)(body)
        if is_well_formed(f):
            return f


# --------------------------------------------------------------------------
# formulas for the printer round-trip (deeper nesting, arbitrary grouping)

_IDENTS = ("main", "add", "mult", "chat_server", "x1", "node_b")
_ATOMS = ("process", "result", "join", "ok", "a_b")


def _rt_item(rng, depth, names):
    r = rng.random()
    if depth > 0 and r < 0.15:
        return _rt_tuple(rng, depth - 1, names)
    if r < 0.4:
        name = f"V{len(names)}"
        names.append(name)
        return Var(name)
    if r < 0.55:
        return Wildcard()
    if r < 0.75:
        return Const(rng.randint(-50, 50))
    return Const(Atom(rng.choice(_ATOMS)))


def _rt_tuple(rng, depth, names):
    return TuplePat(tuple(_rt_item(rng, depth, names) for _ in range(rng.randint(1, 3))))


def _rt_arith(rng, depth, names):
    if depth <= 0 or rng.random() < 0.4:
        if names and rng.random() < 0.5:
            return VarRef(rng.choice(names))
        return IntLit(rng.randint(-20, 20))
    return BinOp(rng.choice("+-*"), _rt_arith(rng, depth - 1, names), _rt_arith(rng, depth - 1, names))


def _rt_constraint(rng, depth, names):
    r = rng.random()
    if r < 0.15:
        return TrueC()
    if r < 0.2:
        return FalseC()
    if r < 0.35 and depth > 0:
        return Not(_rt_constraint(rng, depth - 1, names))
    return Cmp(rng.choice(CMP_OPS), _rt_arith(rng, depth, names), _rt_arith(rng, depth, names))


def _rt_chain(rng, depth, names):
    if depth <= 0 or rng.random() < 0.35:
        pattern = _rt_tuple(rng, min(depth, 2), names)
        sig = Signature(rng.choice(_IDENTS), rng.choice(_IDENTS), pattern)
        return Step(sig, _rt_constraint(rng, min(depth, 3), list(names)))
    # both associativities, so the printer's grouping is exercised
    return Chain(_rt_chain(rng, depth - 1, names), _rt_chain(rng, depth - 1, names))


def random_roundtrip_formula(rng: random.Random, max_depth: int = 5):
    """A well-formed formula of nesting depth <= max_depth."""
    while True:
        names: list[str] = []
        body = _rt_chain(rng, rng.randint(0, max_depth - 1), names)
        f = (Omega if rng.random() < 0.5 else Theta)(body)
        if is_well_formed(f):
            return f


def _instance(rng, pattern: TuplePat):
    out = []
    for p in pattern.items:
        if isinstance(p, Const):
            out.append(p.value)
        elif isinstance(p, TuplePat):
            out.append(_instance(rng, p))
        elif out or rng.random() < 0.2:
            out.append(rng.randint(0, 10))
        else:
            out.append(rng.choice(TAGS))
    return tuple(out)


def planted_trace(rng: random.Random, f, max_events: int = 20, max_contexts: int = 3):
    """Like random_trace, but each context mostly replays the steps of ``f``'s chain.

    Payload integers are random, so constraints hold or fail by chance; random
    noise events and stray contexts are mixed in.
    """
    steps = flatten_steps(f.body)
    k = rng.randint(1, max_contexts)
    contexts = [Ref(i) for i in range(1, k + 1)]
    tree = ContextTree.flat(contexts)
    queues = []
    for ctx in contexts:
        q = []
        for _ in range(rng.randint(0, 2)):
            upto = len(steps) if rng.random() < 0.8 else rng.randint(1, len(steps))
            for s in steps[:upto]:
                sig = s.signature
                q.append(Event(sig.from_, sig.to, _instance(rng, sig.pattern), ctx))
        queues.append(q)
    noise, _ = random_trace(rng, max_events=6, max_contexts=k)
    queues.append(noise)
    events = []
    while any(queues) and len(events) < max_events:
        q = rng.choice([q for q in queues if q])
        events.append(q.pop(0))
    return events, tree
