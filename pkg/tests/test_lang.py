import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from generators import random_monitor_formula, random_roundtrip_formula, random_trace
from waltzrv.lang import (
    Chain, DuplicatePatternVariable, MissingModalWrapper, NestedModal, Omega, ParseError, Signature,
    Step, Theta, UnboundConstraintVariable, check_well_formed, is_well_formed, load_spec, parse,
    print_formula,
)
from waltzrv.monitor import compile_monitor, run_monitor
from waltzrv.terms import Atom, BinOp, Cmp, Const, IntLit, Not, TrueC, TuplePat, Var, VarRef, Wildcard

SPECS = Path(__file__).resolve().parent.parent / "specs"

PHI = Omega(Chain(
    Step(Signature("main", "add", TuplePat((Const(Atom("process")), Wildcard(), Var("Number1")))),
         TrueC()),
    Step(Signature("add", "mult", TuplePat((Const(Atom("process")), Var("Number2")))),
         Cmp("==", VarRef("Number2"), BinOp("+", VarRef("Number1"), IntLit(10)))),
))


class TestParse:
    def test_phi(self):
        src = """
        omega(
          send main -> add {process, _, Number1} : true ;   # the request
          send add -> mult {process, Number2} : Number2 = Number1 + 10
        )
        """
        assert parse(src) == PHI

    def test_shipped_phi_file(self):
        assert load_spec(SPECS / "phi.waltz") == PHI

    @pytest.mark.parametrize("name", ["phi.waltz", "chat_membership.waltz", "counter_monotonic.waltz"])
    def test_shipped_specs_are_well_formed(self, name):
        f = load_spec(SPECS / name)
        assert isinstance(f, Omega)

    def test_chain_is_right_associative(self):
        f = parse("theta( send a -> b {x} : true ; send b -> c {y} : true ; send c -> a {z} : true )")
        assert isinstance(f.body.right, Chain)

    def test_grouping_and_precedence(self):
        f = parse("theta( (send a -> b {X} : true ; send b -> c {Y} : true) ; "
                  "send c -> a {Z} : Z == X + Y * 2 )")
        assert isinstance(f.body.left, Chain)
        expr = f.body.right.constraint.right
        assert expr == BinOp("+", VarRef("X"), BinOp("*", VarRef("Y"), IntLit(2)))

    def test_negation_and_negative_literals(self):
        f = parse("omega( send a -> b {N, -3} : !(N < -1) )")
        step = f.body
        assert step.signature.pattern.items[1] == Const(-3)
        assert step.constraint == Not(Cmp("<", VarRef("N"), IntLit(-1)))

    def test_nested_payload(self):
        f = parse("omega( send a -> b {post, R, {C, _}} : R >= 0 )")
        assert f.body.signature.pattern.items[2] == TuplePat((Var("C"), Wildcard()))

    @pytest.mark.parametrize("src, line, column", [
        ("omega( send a -> b {x} )", 1, 24),
        ("omega( send a b {x} : true )", 1, 15),
        ("omega(\n  send a -> b {x} : X +\n)", 3, 1),
        ("", 1, 1),
    ])
    def test_errors_have_positions(self, src, line, column):
        with pytest.raises(ParseError) as err:
            parse(src)
        assert (err.value.line, err.value.column) == (line, column)
        assert err.value.expected

    def test_trailing_input(self):
        with pytest.raises(ParseError):
            parse("omega( send a -> b {x} : true ) extra")


class TestWellFormedness:
    def test_missing_modal(self):
        with pytest.raises(MissingModalWrapper):
            check_well_formed(parse("send a -> b {x} : true"))

    def test_nested_modal(self):
        with pytest.raises(NestedModal):
            check_well_formed(parse("omega( theta( send a -> b {x} : true ) )"))

    def test_unbound_variable(self):
        with pytest.raises(UnboundConstraintVariable) as err:
            check_well_formed(parse("omega( send a -> b {X} : true ; send b -> a {Y} : Y == Z )"))
        assert err.value.name == "Z" and err.value.step == 1

    def test_variable_bound_later_is_unbound(self):
        src = "omega( send a -> b {X} : Y > X ; send b -> a {Y} : true )"
        with pytest.raises(UnboundConstraintVariable):
            check_well_formed(parse(src))

    def test_duplicate_in_one_pattern(self):
        with pytest.raises(DuplicatePatternVariable):
            check_well_formed(parse("omega( send a -> b {X, X} : true )"))

    def test_reuse_across_steps_is_allowed(self):
        assert is_well_formed(parse("omega( send a -> b {X} : true ; send b -> a {X} : true )"))


class TestPrinter:
    def test_phi_text(self):
        assert print_formula(PHI) == (
            "omega( send main -> add {process, _, Number1} : true ; "
            "send add -> mult {process, Number2} : Number2 == Number1 + 10 )")

    def test_minimal_parentheses(self):
        f = parse("theta( send a -> b {X} : X - (1 - 2) == (X + 1) * 3 )")
        assert print_formula(f).endswith(": X - (1 - 2) == (X + 1) * 3 )")

    def test_left_nested_chain_keeps_grouping(self):
        f = parse("theta( (send a -> b {x} : true ; send b -> c {y} : true) ; send c -> a {z} : true )")
        assert parse(print_formula(f)) == f

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32))
    def test_round_trip(self, seed):
        f = random_roundtrip_formula(random.Random(seed))
        assert parse(print_formula(f)) == f


class TestBindingDiscipline:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32))
    def test_monitoring_never_hits_unbound_variables(self, seed):
        rng = random.Random(seed)
        f = random_monitor_formula(rng)
        t, ct = random_trace(rng)
        run_monitor(compile_monitor(f), t, ct)  # raises on an unbound variable
