import pytest
from hypothesis import given, settings, strategies as st

from ckbench.errors import ParseError
from ckbench.syntax import (BOTTOM, TOP, And, Atom, Bottom, Box, Diamond, Implies, Not, Or, atoms,
                            depth, formulas_up_to_depth, is_boxed_atom, is_positive, is_sahlqvist,
                            parse, substitute, to_text)

p, q, r = Atom("p"), Atom("q"), Atom("r")


def formulas(max_leaves=12):
    leaves = st.sampled_from([p, q, r, Atom("x_1"), BOTTOM, TOP])
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            st.builds(And, kids, kids), st.builds(Or, kids, kids), st.builds(Implies, kids, kids),
            st.builds(Box, kids), st.builds(Diamond, kids), st.builds(Not, kids)),
        max_leaves=max_leaves)


class TestParse:
    def test_box_implication(self):
        assert parse("[]p -> p") == Implies(Box(p), p)

    def test_not_false_is_bottom_implies_bottom(self):
        assert parse("~F") == Implies(Bottom(), Bottom())

    def test_not_top_desugars(self):
        assert parse("~T") == Implies(Implies(Bottom(), Bottom()), Bottom())

    def test_implication_right_associative(self):
        assert parse("p -> q -> r") == Implies(p, Implies(q, r))

    def test_precedence(self):
        assert parse("~p & q | r -> p") == Implies(Or(And(Not(p), q), r), p)
        assert parse("[]p & <>q") == And(Box(p), Diamond(q))

    def test_unicode_aliases(self):
        assert parse("□(p∧q)→◇⊤") == parse("[](p & q) -> <>T")
        assert parse("¬p ∨ ⊥") == parse("~p | F")

    @pytest.mark.parametrize("text, message, offset", [
        ("p $ q", "lexical error", 2),
        ("(p | q", "unbalanced parenthesis", 0),
        ("p)", "unbalanced parenthesis", 1),
        ("p & ", "dangling binary operator", 2),
        ("p & & q", "dangling binary operator", 4),
        ("", "empty formula", 0),
    ])
    def test_errors_carry_offsets(self, text, message, offset):
        with pytest.raises(ParseError) as info:
            parse(text)
        assert message in info.value.message
        assert info.value.offset == offset

    def test_offsets_are_bytes(self):
        with pytest.raises(ParseError) as info:
            parse("□p $")
        assert info.value.offset == len("□p ".encode())

    def test_atom_names(self):
        assert parse("foo_Bar1") == Atom("foo_Bar1")
        with pytest.raises(ParseError):
            parse("Pq")


class TestPrinting:
    def test_top_prints_as_t(self):
        assert to_text(TOP) == "T"
        assert to_text(parse("p -> T")) == "p -> T"

    def test_minimal_parentheses(self):
        assert to_text(parse("(p -> q) -> r")) == "(p -> q) -> r"
        assert to_text(parse("p -> (q -> r)")) == "p -> q -> r"
        assert to_text(parse("(p & q) & r")) == "p & q & r"
        assert to_text(parse("p & (q & r)")) == "p & (q & r)"

    @settings(max_examples=300, deadline=None)
    @given(formulas())
    def test_round_trip(self, phi):
        assert parse(to_text(phi)) == phi
        assert parse(to_text(phi, unicode=True)) == phi

    @settings(max_examples=200, deadline=None)
    @given(formulas())
    def test_print_parse_print(self, phi):
        text = to_text(phi)
        assert to_text(parse(text)) == text


class TestSubstitute:
    def test_examples(self):
        assert substitute(parse("[]p -> p"), {"p": parse("q & r")}) == parse("[](q & r) -> q & r")
        assert substitute(BOTTOM, {"p": q}) == BOTTOM
        assert substitute(parse("p | q"), {"p": BOTTOM}) == parse("F | q")

    @settings(max_examples=150, deadline=None)
    @given(formulas(8), formulas(4), formulas(4), formulas(4))
    def test_compositional(self, phi, a, b, c):
        sigma = {"p": a, "q": b}
        tau = {"p": c, "r": a}
        composed = {k: substitute(v, tau) for k, v in sigma.items()}
        for k, v in tau.items():
            composed.setdefault(k, v)
        assert substitute(substitute(phi, sigma), tau) == substitute(phi, composed)

    @given(formulas(8))
    def test_identity(self, phi):
        assert substitute(phi, {}) == phi


class TestClassifiers:
    def test_positive(self):
        assert is_positive(parse("[]<>(p & q)"))
        assert not is_positive(parse("p -> q"))
        assert is_positive(BOTTOM)
        assert is_positive(parse("T & <>T"))
        assert not is_positive(parse("F -> F & p"))

    def test_boxed_atom(self):
        assert is_boxed_atom(parse("[][]p")) == (2, "p")
        assert is_boxed_atom(p) == (0, "p")
        assert is_boxed_atom(parse("[](p & q)")) is None

    def test_sahlqvist(self):
        assert is_sahlqvist(parse("[]p -> <>p")) == (Box(p), Diamond(p))
        assert is_sahlqvist(parse("<>p -> []p")) is None
        assert is_sahlqvist(parse("p -> []<>p")) == (p, Box(Diamond(p)))
        assert is_sahlqvist(parse("T & F | [][]q -> p")) is not None
        assert is_sahlqvist(TOP) is None
        assert is_sahlqvist(parse("[]T -> p")) is None

    @given(formulas(10))
    def test_sahlqvist_split_invariant(self, phi):
        split = is_sahlqvist(phi)
        if split is None:
            return
        ant, con = split
        assert is_positive(con)

        def leaves(f):
            if isinstance(f, (And, Or)) and f != TOP:
                return leaves(f.left) + leaves(f.right)
            return [f]
        assert all(f == TOP or f == BOTTOM or is_boxed_atom(f) for f in leaves(ant))


def test_depth_and_atoms():
    phi = parse("[](p -> <>q) & T")
    assert atoms(phi) == {"p", "q"}
    assert depth(phi) == 4
    assert depth(TOP) == 0


def test_literal_enumeration_sizes():
    assert len(formulas_up_to_depth(0)) == 3
    one = formulas_up_to_depth(1)
    assert len(one) == 3 + 2 * 3 + 3 * 9
    assert all(depth(f) <= 1 for f in one)
