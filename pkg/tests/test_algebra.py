import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from strategies import formulas
from ckbench.algebra import (AlgValid, Counterexample, PdtFails, alg_valid, build_algebra, chain,
                             check_homomorphism, find_homomorphisms, find_isomorphism,
                             image_subalgebra, interpret, pdt_check, product, subalgebra_generated,
                             trivial_algebra)
from ckbench.corpus import ck_algebras, cluster_frame
from ckbench.errors import AlgebraError, BudgetExceeded
from ckbench.frames import complex_algebra, frame_valid
from ckbench.syntax import BOTTOM, TOP, parse, substitute

K_BOX = parse("[](p -> q) -> ([]p -> []q)")
K_DIA = parse("[](p -> q) -> (<>p -> <>q)")


class TestValidation:
    def test_two_chain_identity(self):
        A = chain(2)
        assert A.size == 2 and oracles.ck_axioms_hold(A)

    def test_swapped_diamond(self):
        with pytest.raises(AlgebraError) as info:
            chain(2, dia=[1, 0])
        assert any(v.kind == "CKAxiomViolation" and v.witness[0] == "dia a <= dia(a | b)"
                   for v in info.value.violations)

    def test_box_must_keep_top(self):
        with pytest.raises(AlgebraError) as info:
            chain(2, box=[0, 0])
        assert "CKAxiomViolation" in info.value.kinds

    def test_not_heyting(self):
        # M3: the diamond lattice is not distributive, hence has no implication
        els = ["0", "a", "b", "c", "1"]
        leq = [("0", x) for x in els] + [(x, "1") for x in els]
        with pytest.raises(AlgebraError) as info:
            build_algebra(els, leq, {e: e for e in els}, {e: e for e in els})
        assert "NotHeyting" in info.value.kinds

    def test_not_a_partial_order(self):
        with pytest.raises(AlgebraError):
            build_algebra(["0", "1"], [("0", "1"), ("1", "0")], {"0": "0", "1": "1"}, {"0": "0", "1": "1"})

    def test_bad_table(self):
        with pytest.raises(AlgebraError) as info:
            build_algebra(["0", "1"], [("0", "1")], {"0": "0"}, {"0": "0", "1": "1"})
        assert "BadTable" in info.value.kinds

    def test_complex_algebras_validate(self, frames3):
        for f in frames3[::4]:
            assert oracles.ck_axioms_hold(complex_algebra(f))

    def test_corpus_satisfies_axioms(self, corpus_algebras):
        for A in corpus_algebras:
            assert oracles.ck_axioms_hold(A)


class TestInterpret:
    def test_bottom(self, corpus_algebras):
        for A in corpus_algebras[:50]:
            assert interpret(A, {}, BOTTOM) == A.bottom
            assert interpret(A, {}, TOP) == A.top

    def test_two_chain(self):
        A = chain(2)
        assert interpret(A, {"p": "1"}, parse("[]p -> p")) == A.top

    def test_missing_atoms_are_bottom(self):
        A = chain(3)
        assert interpret(A, {}, parse("p")) == A.bottom

    @settings(max_examples=80, deadline=None)
    @given(formulas(max_leaves=8), formulas(max_leaves=4), formulas(max_leaves=4), st.integers(0, 40))
    def test_respects_substitution(self, corpus_algebras, phi, a, b, k):
        A = corpus_algebras[k * 7 % len(corpus_algebras)]
        sigma = {"p": a, "q": b}
        for vals in itertools.product(range(A.size), repeat=2):
            v = dict(zip(("p", "q"), vals))
            composed = {x: interpret(A, v, s) for x, s in sigma.items()}
            assert interpret(A, v, substitute(phi, sigma)) == interpret(A, composed, phi)


class TestAlgValid:
    def test_k_axioms_on_corpus(self, corpus_algebras):
        for A in corpus_algebras:
            assert alg_valid(A, K_BOX) and alg_valid(A, K_DIA)

    def test_trivial_algebra(self):
        assert isinstance(alg_valid(trivial_algebra(), BOTTOM), AlgValid)

    def test_two_chain_t(self):
        assert alg_valid(chain(2), parse("[]p -> p"))

    def test_counterexample(self):
        got = alg_valid(chain(2), parse("p"))
        assert isinstance(got, Counterexample)
        assert got.valuation == {"p": "0"} and got.value == "0"

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            alg_valid(chain(4), parse("p & q & r"), budget=10)

    @settings(max_examples=60, deadline=None)
    @given(formulas(max_leaves=8), st.integers(0, 408))
    def test_frame_iff_complex_algebra(self, frames3, phi, k):
        f = frames3[k]
        assert bool(frame_valid(f, phi)) == bool(alg_valid(complex_algebra(f), phi))

    def test_frame_iff_complex_algebra_examples(self, frames3):
        phis = [parse(s) for s in ("[]p -> p", "p -> <>p", "[]p -> <>p", "[]p -> [][]p",
                                   "<>(p | q) -> <>p | <>q", "<>F -> F", "p | ~p")]
        for f in frames3:
            A = complex_algebra(f)
            for phi in phis:
                assert bool(frame_valid(f, phi)) == bool(alg_valid(A, phi))

    def test_cluster_distribution(self):
        A = complex_algebra(cluster_frame())
        assert not alg_valid(A, parse("<>(p | q) -> <>p | <>q"))


class TestPdt:
    def test_reflexive(self, corpus_algebras):
        phi = parse("[]p -> <>q")
        assert pdt_check(corpus_algebras[:30], [phi], phi)

    def test_two_chain_identity(self):
        assert pdt_check([chain(2)], [parse("p")], parse("[]p"))

    def test_necessitation_is_not_a_consequence(self):
        refuting = None
        for A in ck_algebras(4):
            got = pdt_check([A], [parse("p")], parse("[]p"))
            if not got:
                refuting = (A, got)
                break
        assert refuting is not None
        A, got = refuting
        assert isinstance(got, PdtFails)
        a = A.index(got.element)
        v = {k: A.index(x) for k, x in got.valuation.items()}
        assert A.le(a, interpret(A, v, parse("p")))
        assert not A.le(a, interpret(A, v, parse("[]p")))
        # the premise is not valid there, so the rule form is untouched
        assert not alg_valid(A, parse("p"))

    def test_modus_ponens(self, corpus_algebras):
        assert pdt_check(corpus_algebras[:60], [parse("p"), parse("p -> q")], parse("q"))


class TestConstructions:
    def test_identity_homomorphism(self, corpus_algebras):
        for A in corpus_algebras[:40]:
            assert check_homomorphism(list(range(A.size)), A, A) == []

    def test_non_homomorphism_reports(self):
        A = chain(3)
        # 1 -> 0 is 0, but h(1) -> h(0) = 0 -> 0 is the top
        got = check_homomorphism([0, 0, 2], A, A)
        assert [(v.kind, v.witness) for v in got] == [("implies", ("1", "0"))]

    def test_product_of_two_chains(self):
        A = chain(2)
        P = product([A, A])
        assert P.size == 4
        assert oracles.ck_axioms_hold(P)
        bot, top = P.payload.index((0, 0)), P.payload.index((1, 1))
        a, b = P.payload.index((1, 0)), P.payload.index((0, 1))
        assert (P.bottom, P.top) == (bot, top)
        assert P.meet[a][b] == bot and P.join[a][b] == top
        assert P.implies[a][b] == b
        for x, t in enumerate(P.payload):
            assert P.payload[P.box[x]] == (A.box[t[0]], A.box[t[1]])

    def test_subalgebra_of_bounds(self):
        A = chain(2)
        S, members = subalgebra_generated(A, [A.top, A.bottom])
        assert members == [0, 1] and S.size == 2

    def test_subalgebra_is_closed(self, corpus_algebras):
        rng = random.Random(5)
        for A in corpus_algebras[::9]:
            S, members = subalgebra_generated(A, [rng.randrange(A.size)])
            assert oracles.ck_axioms_hold(S)
            assert check_homomorphism(members, S, A) == []

    def test_hsp_preserve_validity(self, corpus_algebras):
        phis = [parse(s) for s in ("[]p -> p", "p -> <>p", "[]p -> <>p", "<>(p | q) -> <>p | <>q")]
        small = [A for A in corpus_algebras if A.size <= 3]
        rng = random.Random(6)
        for phi in phis:
            good = [A for A in small if alg_valid(A, phi)]
            for _ in range(10):
                A, B = rng.choice(good), rng.choice(good)
                P = product([A, B])
                assert alg_valid(P, phi)
                S, _ = subalgebra_generated(P, [rng.randrange(P.size)])
                assert alg_valid(S, phi)
                C = rng.choice(small)
                for h in find_homomorphisms(P, C, limit=3):
                    assert alg_valid(image_subalgebra(h, C), phi)

    def test_isomorphism_search(self, corpus_algebras):
        A = chain(2)
        P = product([A, A])
        swap = [P.payload.index((t[1], t[0])) for t in P.payload]
        assert find_isomorphism(P, P) is not None
        assert check_homomorphism(swap, P, P) == []
        assert find_isomorphism(chain(4), P) is None
