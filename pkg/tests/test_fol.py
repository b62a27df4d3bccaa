import pytest
from hypothesis import given, settings, strategies as st

import oracles
from ckbench import fol
from ckbench.corpus import one_world
from ckbench.errors import ParseError, UnboundPredicate
from ckbench.fol import (FF, And, Eq, Exists, Forall, Implies, Leq, Not, Or, Pred, Rel, fo_eval,
                         fo_evaluator, fo_text, parse_fo)
from ckbench.frames import CKFrame

VARS = ["x", "y", "z"]
terms = st.sampled_from(VARS + [FF])


def fo_formulas(max_leaves=10):
    atoms = st.one_of(
        st.builds(Eq, terms, terms), st.builds(Leq, terms, terms), st.builds(Rel, terms, terms),
        st.builds(Pred, st.sampled_from(["P", "Q"]), terms),
        st.sampled_from([fol.TRUE, fol.FALSE]))
    return st.recursive(
        atoms,
        lambda kids: st.one_of(
            st.builds(Not, kids), st.builds(And, kids, kids), st.builds(Or, kids, kids),
            st.builds(Implies, kids, kids),
            st.builds(Forall, st.sampled_from(VARS), kids), st.builds(Exists, st.sampled_from(VARS), kids)),
        max_leaves=max_leaves)


def close(f):
    for v in sorted(fol.free_vars(f)):
        f = Forall(v, f)
    return f


def guarded(max_leaves=8):
    """Sentences shaped like translations: quantifiers guarded by ≤, R or =."""
    rel = st.sampled_from([Leq, Rel, Eq])

    def q(kids):
        return st.one_of(
            st.builds(lambda v, w, g, b: Forall(v, Implies(g(w, v), b)), st.sampled_from(VARS),
                      st.sampled_from(VARS), rel, kids),
            st.builds(lambda v, w, g, b: Exists(v, And(g(w, v), b)), st.sampled_from(VARS),
                      st.sampled_from(VARS), rel, kids),
            st.builds(lambda v, w, g, b: Forall(v, Implies(g(v, w), b)), st.sampled_from(VARS),
                      st.sampled_from(VARS), rel, kids),
            st.builds(And, kids, kids), st.builds(Not, kids))
    return st.recursive(fo_formulas(2), q, max_leaves=max_leaves)


def two_world():
    return CKFrame(["x", "e"], "e", [("x", "x"), ("e", "e")], [("e", "e")])


class TestPrinting:
    def test_reference_syntax(self):
        text = "forall x. exists y. (R(x,y) & (y != ff -> x <= y))"
        f = parse_fo(text)
        assert f == Forall("x", Exists("y", And(Rel("x", "y"), Implies(Not(Eq("y", FF)), Leq("x", "y")))))
        assert fo_text(f) == text

    def test_multi_binder(self):
        assert parse_fo("forall x y. x <= y") == Forall("x", Forall("y", Leq("x", "y")))

    def test_unicode(self):
        f = parse_fo("forall x. exists t. R(x,t)")
        assert parse_fo(fo_text(f, unicode=True)) == f
        assert parse_fo("∀x. ∃t. R(x,t)") == f

    def test_implication_right_assoc(self):
        assert parse_fo("x = y -> y = z -> x = z") == Implies(Eq("x", "y"), Implies(Eq("y", "z"), Eq("x", "z")))

    @pytest.mark.parametrize("text", ["forall . x = x", "S(x,y)", "x <=", "(x = y", "P(x", "x ? y"])
    def test_errors(self, text):
        with pytest.raises(ParseError):
            parse_fo(text)

    @settings(max_examples=300, deadline=None)
    @given(fo_formulas())
    def test_round_trip(self, f):
        assert parse_fo(fo_text(f)) == f
        assert parse_fo(fo_text(f, unicode=True)) == f


class TestEvaluation:
    def test_seriality_on_two_worlds(self):
        assert not fo_eval(two_world(), parse_fo("forall x. exists t. R(x,t)"))

    def test_reflexivity(self, frames3):
        s = parse_fo("forall x. x <= x")
        assert all(fo_eval(f, s) for f in frames3)

    def test_ff_is_exploding(self):
        f = two_world()
        assert fo_eval(f, parse_fo("R(ff,ff)"))
        assert fo_eval(f, parse_fo("x = ff"), assignment={"x": "e"})
        assert not fo_eval(f, parse_fo("x = ff"), assignment={"x": "x"})

    def test_predicates(self):
        f = two_world()
        s = parse_fo("exists x. (P(x) & x != ff)")
        assert fo_eval(f, s, {"P": ["x"]})
        assert not fo_eval(f, s, {"P": ["e"]})

    def test_unbound_predicate(self):
        with pytest.raises(UnboundPredicate):
            fo_eval(one_world(), parse_fo("forall x. P(x)"))

    def test_free_variable_needs_value(self):
        with pytest.raises(ValueError):
            fo_eval(one_world(), parse_fo("x = x"))

    def test_evaluator_closure(self):
        f = two_world()
        at = fo_evaluator(f, parse_fo("exists y. R(x,y)"), var="x")
        assert [at(i) for i in range(f.n)] == [True, False]

    @settings(max_examples=250, deadline=None)
    @given(fo_formulas(), st.integers(0, 408), st.integers(0, 63))
    def test_against_naive(self, frames3, f, k, bits):
        fr = frames3[k]
        s = close(f)
        interp = {"P": [w for i, w in enumerate(fr.worlds) if bits >> i & 1],
                  "Q": [w for i, w in enumerate(fr.worlds) if bits >> (i + 3) & 1]}
        assert fo_eval(fr, s, interp) == oracles.fo_holds(fr, s, interp)

    @settings(max_examples=250, deadline=None)
    @given(guarded(), st.integers(0, 408), st.integers(0, 63))
    def test_guarded_against_naive(self, frames3, f, k, bits):
        fr = frames3[k]
        s = close(f)
        interp = {"P": [w for i, w in enumerate(fr.worlds) if bits >> i & 1],
                  "Q": [w for i, w in enumerate(fr.worlds) if bits >> (i + 3) & 1]}
        assert fo_eval(fr, s, interp) == oracles.fo_holds(fr, s, interp)

    @settings(max_examples=100, deadline=None)
    @given(fo_formulas(), st.integers(0, 408))
    def test_assignment(self, frames3, f, k):
        fr = frames3[k]
        free = sorted(fol.free_vars(f))
        interp = {"P": fr.worlds[:1], "Q": fr.worlds[-1:]}
        env = {v: fr.worlds[i % fr.n] for i, v in enumerate(free)}
        assert fo_eval(fr, f, interp, env) == oracles.fo_holds(fr, f, interp, env)


class TestHelpers:
    def test_free_vars(self):
        assert fol.free_vars(parse_fo("forall x. R(x,y) & y = ff")) == {"y"}

    def test_predicates(self):
        assert fol.predicates(parse_fo("forall x. P(x) | Q(x)")) == {"P", "Q"}

    def test_replace_predicates(self):
        f = parse_fo("forall x. P(x)")
        got = fol.replace_predicates(f, {"P": lambda t: Eq(t, FF)})
        assert got == parse_fo("forall x. x = ff")

    def test_empty_connectives(self):
        assert fol.conj([]) == fol.TRUE and fol.disj([]) == fol.FALSE
