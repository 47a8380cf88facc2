import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_force, illustrative, random_instance
from splcheck.encoder import EncodingContext, f_implements
from splcheck.qbf import (EXISTS, FALSE, FORALL, TRUE, Block, CnfInstance, Iff, Implies, Not,
                          QbfError, QbfFormula, QdimacsError, ShadowingError, Var, and_,
                          emit_qdimacs, evaluate, exists, forall, free_vars, iff, implies,
                          instance_formula, max_index, negate, node_count, not_, or_,
                          parse_qdimacs, prenex,
                          substitute, tseitin)

x, y, z, w = (Var(i) for i in range(1, 5))

ILLUSTRATION = "c Illustration\np cnf 2 2\na 1 0\ne 2 0\n1 -2 0\n-1 2 0\n"


def test_hash_consing():
    assert and_(x, y) is and_(x, y)
    assert Var(1) is x


def test_constant_folding():
    assert and_(x, TRUE) is x
    assert and_(x, FALSE) is FALSE
    assert or_(x, not_(x)) is TRUE
    assert and_() is TRUE and or_() is FALSE
    assert not_(not_(x)) is x
    assert implies(FALSE, x) is TRUE and implies(x, FALSE) is not_(x)
    assert iff(TRUE, x) is x and iff(x, FALSE) is not_(x)
    assert forall([x], TRUE) is TRUE


def test_flattening():
    assert and_(and_(x, y), z) is and_(x, y, z)


def test_bad_var():
    with pytest.raises(QbfError):
        Var(0)


def test_substitute_folds():
    assert substitute(and_(x, y), {x: True}) is y
    assert substitute(or_(x, y), {x: True}) is TRUE


def test_substitute_refuses_bound():
    with pytest.raises(QbfError):
        substitute(forall([x], or_(x, y)), {x: True})


def test_substitute_implements_illustration():
    # constant tuple (1,1,0,0) folds the guard to c1 & c2
    ctx = EncodingContext(illustrative())
    n = f_implements(ctx, (1, 1, 0, 0), "f1")
    assert evaluate(n)
    c = ctx.c
    assert n is forall(c, implies(and_(c[0], c[1]), or_(and_(c[0], c[1]), c[2])))


def test_free_vars():
    assert free_vars(exists([x], and_(x, y))) == {y}


def _formulas():
    leaves = st.sampled_from([x, y, z, w, TRUE, FALSE])

    def extend(kids):
        return st.one_of(
            st.builds(not_, kids),
            st.builds(lambda a, b: and_(a, b), kids, kids),
            st.builds(lambda a, b: or_(a, b), kids, kids),
            st.builds(implies, kids, kids),
            st.builds(iff, kids, kids),
            st.builds(lambda v, b: forall([v], b), st.sampled_from([x, y, z, w]), kids),
            st.builds(lambda v, b: exists([v], b), st.sampled_from([x, y, z, w]), kids),
        )
    return st.recursive(leaves, extend, max_leaves=10)


def _close(n):
    free = sorted(free_vars(n), key=lambda v: v.index)
    return exists(free, n) if free else n


@settings(max_examples=400, deadline=None)
@given(_formulas())
def test_prenex_equivalent(n):
    n = _close(n)
    try:
        p = prenex(n)
    except ShadowingError:
        return
    assert p.is_prenex()
    assert evaluate(p) == evaluate(n)


@settings(max_examples=300, deadline=None)
@given(_formulas())
def test_tseitin_equisatisfiable_and_bounded(n):
    n = _close(n)
    try:
        p = prenex(n)
    except ShadowingError:
        return
    c = tseitin(p)
    assert brute_force(c) == evaluate(n)
    assert len(c.clauses) <= 4 * node_count(p.body) + 1
    if c.num_vars > max_index(p):
        # auxiliaries sit in the innermost existential block
        assert c.prefix[-1][0] == EXISTS
        assert set(range(max_index(p) + 1, c.num_vars + 1)) <= set(c.prefix[-1][1])


def test_shadowing_error():
    with pytest.raises(ShadowingError):
        prenex(forall([x], exists([x], x)))


def test_sibling_rebinding_renamed():
    n = and_(forall([x], x), exists([x], x))
    p = prenex(n)
    assert len({v for b in p.prefix for v in b.vars}) == 2
    assert evaluate(p) == evaluate(n) is False


def test_tseitin_rejects_open_and_nonprenex():
    with pytest.raises(QbfError):
        tseitin(QbfFormula(x))
    with pytest.raises(QbfError):
        tseitin(QbfFormula(forall([x], x)))


def test_tseitin_full_biconditional():
    # an Iff node gets all four defining clauses even under positive polarity
    c = tseitin(QbfFormula(or_(iff(x, y), z), (Block(EXISTS, (x, y, z)),)))
    assert len(c.clauses) == 1 + 4
    assert c.prefix == ((EXISTS, (1, 2, 3, 4)),)


def test_constant_bodies():
    assert tseitin(QbfFormula(TRUE)).clauses == ()
    assert tseitin(QbfFormula(FALSE)).is_false_instance


def test_illustration_document():
    c = CnfInstance(2, ((1, -2), (-1, 2)), ((FORALL, (1,)), (EXISTS, (2,))))
    assert emit_qdimacs(c, ["Illustration"]) == ILLUSTRATION
    assert parse_qdimacs(ILLUSTRATION) == c
    assert brute_force(c) is True


def test_illustration_from_formula():
    n = forall([x], exists([y], and_(or_(x, not_(y)), or_(not_(x), y))))
    c = tseitin(prenex(n))
    assert emit_qdimacs(c, ["Illustration"]) == ILLUSTRATION


@pytest.mark.parametrize("doc, line, needle", [
    ("p cnf 2 3\n1 2 0\n", 1, "count mismatch"),
    ("1 2 0\n", 1, "missing problem line"),
    ("p cnf 2 1\n1 3 0\n", 2, "out of range"),
    ("p cnf 2 1\ne 1 0\n1 0\na 2 0\n", 4, "after the matrix"),
    ("p cnf 2 1\ne 1 0\ne 2 0\n1 0\n", 3, "adjacent"),
    ("p cnf 2 1\ne 1 0\na 1 0\n1 0\n", 3, "quantified twice"),
    ("p cnf 2 1\n1 -1 0\n", 2, "tautological"),
    ("p cnf 2 1\n1 2\n", 2, "unterminated"),
    ("p cnf 2 1\n1 x 0\n", 2, "integer"),
    ("p cnf 2\n", 1, "malformed"),
])
def test_parse_errors(doc, line, needle):
    with pytest.raises(QdimacsError) as e:
        parse_qdimacs(doc)
    assert e.value.line == line
    assert needle in str(e.value)


def test_clause_across_lines():
    c = parse_qdimacs("p cnf 3 1\ne 1 2 3 0\n1\n2 3 0\n")
    assert c.clauses == ((1, 2, 3),)


def test_false_instance_round_trip():
    c = CnfInstance(1, ((),), ((EXISTS, (1,)),))
    assert parse_qdimacs(emit_qdimacs(c)) == c


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    c = random_instance(random.Random(seed), max_vars=20, free_ok=True)
    assert parse_qdimacs(emit_qdimacs(c)) == c


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_negate(seed):
    c = random_instance(random.Random(seed), max_vars=6, max_clauses=8)
    assert brute_force(negate(c)) == (not brute_force(c))


def test_instance_formula_matches_brute_force():
    rng = random.Random(3)
    for _ in range(100):
        c = random_instance(rng, max_vars=6)
        f = instance_formula(c)
        if f.is_closed() and not c.is_false_instance:
            assert evaluate(f) == brute_force(c)


def test_evaluate_needs_assignment():
    with pytest.raises(QbfError):
        evaluate(and_(x, y), {x: True})
    assert evaluate(and_(x, y), {x: True, y: True})


def test_node_count_tree():
    n = and_(x, or_(y, z))
    assert node_count(n) == 5
    assert isinstance(implies(x, y), Implies) and isinstance(iff(x, y), Iff)
    assert isinstance(not_(x), Not)


def test_exhaustive_two_var_prenex():
    ops = [lambda a, b: and_(a, b), lambda a, b: or_(a, b), implies, iff]
    for op, q1, q2 in itertools.product(ops, (forall, exists), (forall, exists)):
        n = op(q1([x], or_(x, y)), q2([x], and_(x, y)))
        n = _close(n)
        assert evaluate(prenex(n)) == evaluate(n)
