import itertools

import pytest
from hypothesis import given, settings

from helpers import all_subsets, ecpl, illustrative, models
from splcheck import semantics as sem
from splcheck.encoder import (EncodingContext, EncodingError, Query, c_f_predicate, c_i_predicate,
                              covers_formula, encode_property, f_implements, f_realizes,
                              formula_prov, formula_req, tcf)
from splcheck.model import SplModel, Traceability
from splcheck.qbf import FALSE, TRUE, and_, evaluate, or_, prenex, tseitin
from splcheck.solver import solve_formula

fs = frozenset


def _satisfying(pred, over):
    hits = []
    for bits in itertools.product((False, True), repeat=len(over)):
        if evaluate(pred, dict(zip(over, bits))):
            hits.append(bits)
    return hits


def test_formula_prov_illustrative():
    ctx = EncodingContext(illustrative())
    c1, c2, c3, c4 = ctx.c
    assert formula_prov(ctx, "f1") is or_(and_(c1, c2), c3)
    assert formula_prov(ctx, "f3") is and_(c1, c4)
    assert formula_req(ctx, "f3") is c4


def test_formula_prov_bottom_and_empty():
    m = ecpl()
    ctx = EncodingContext(m)
    assert formula_prov(ctx, "Manual_Lock") is FALSE
    raw = SplModel(("f",), ("c",), (), (), Traceability({"f": (fs({"c"}),)}, {"f": ()}))
    assert formula_req(EncodingContext(raw), "f") is TRUE


def test_c_i_illustrative():
    ctx = EncodingContext(illustrative())
    assert _satisfying(c_i_predicate(ctx), ctx.c) == [(False, False, True, True),
                                                      (True, True, False, False)]
    assert len(_satisfying(c_f_predicate(ctx), ctx.f)) == 2


def test_c_i_ecpl():
    ctx = EncodingContext(ecpl())
    pred = c_i_predicate(ctx)
    assert len(_satisfying(pred, ctx.c)) == 9
    assert len(_satisfying(c_f_predicate(ctx), ctx.f)) == 8


def test_illustrative_queries_via_qbf():
    m = illustrative()
    ctx = EncodingContext(m)
    v = lambda n: solve_formula(n).verdict
    assert v(f_implements(ctx, (1, 1, 0, 0), "f1"))
    assert not v(f_implements(ctx, (0, 0, 1, 0), "f3"))
    assert v(f_realizes(ctx, (1, 1, 0, 0), (1, 1, 0)))
    assert not v(f_realizes(ctx, (1, 1, 0, 0), (1, 0, 0)))
    assert not v(encode_property(EncodingContext(m), Query("complete")))


def test_tcf_ecpl():
    ctx = EncodingContext(ecpl())
    assert solve_formula(tcf(ctx)).verdict


def test_rejects_non_canonical():
    raw = SplModel(("f",), tuple("cde"), (), (),
                   Traceability({"f": (fs("cd"), fs("cde"))}, {"f": (fs("de"),)}))
    with pytest.raises(EncodingError):
        EncodingContext(raw)
    ctx = EncodingContext(raw, allow_raw=True)
    # prov-only encoding: {c,d} passes although it holds no req set
    assert evaluate(f_implements(ctx, {"c", "d"}, "f"))
    assert not sem.implements(raw, {"c", "d"}, "f")


def test_unknown_kind_and_mode():
    ctx = EncodingContext(illustrative())
    with pytest.raises(EncodingError):
        encode_property(ctx, Query("popular"))
    with pytest.raises(EncodingError):
        covers_formula(ctx, (1, 1, 0, 0), (1, 0, 0), "loose")
    with pytest.raises(EncodingError):
        f_implements(ctx, (1, 0), "f1")


def test_legend():
    m = illustrative()
    ctx = EncodingContext(m)
    f = encode_property(ctx, Query("covers", ("A1", "S1")))
    p = prenex(f)
    c = tseitin(p)
    lines = ctx.legend_lines(p, c.num_vars)
    assert lines[0] == "var 1 = component c1"
    # the specification is a constant vector, so features 5..7 do not occur
    assert lines[4] == "var 8 = feature f1 (provided set)"
    assert "var 11 = component c1'" in lines
    assert lines[-1] == f"vars 23..{c.num_vars} = tseitin auxiliaries"
    assert ctx.legend_lines()[4] == "var 5 = feature f1"
    assert lines[-1].startswith("vars ") and lines[-1].endswith("tseitin auxiliaries")


@settings(max_examples=60, deadline=None)
@given(models(max_components=5, max_features=3))
def test_simplified_implements_matches_definition(m):
    # canonical relations: the prov-only formula agrees with the full definition
    ctx = EncodingContext(m)
    for C in all_subsets(m.components):
        for f in m.features:
            assert evaluate(f_implements(ctx, C, f)) == sem.implements(m, C, f)


@settings(max_examples=40, deadline=None)
@given(models(max_components=4, max_features=3))
def test_realizes_and_covers_match(m):
    ctx = EncodingContext(m)
    for C in all_subsets(m.components):
        for F in all_subsets(m.features):
            assert evaluate(f_realizes(ctx, C, F)) == (sem.provided_by(m, C) == F)
            for mode in ("lemma", "definition"):
                want = sem.covers(m, C, F, mode)
                assert evaluate(covers_formula(EncodingContext(m), C, F, mode)) == want


def test_covers_modes_differ_on_ecpl():
    # A9 provides a set outside the scope: lemma mode accepts, definition mode refuses
    m = ecpl()
    ctx = EncodingContext(m)
    a9, s2 = m.arch("A9"), m.spec("S2")
    assert evaluate(covers_formula(ctx, a9, s2, "lemma"))
    assert not evaluate(covers_formula(ctx, a9, s2, "definition"))


@pytest.mark.parametrize("kind", ["existentially_explicit", "universally_explicit",
                                  "unique_implementation", "extendable"])
def test_ecpl_spec_queries(kind):
    m = ecpl()
    fn = {"existentially_explicit": sem.is_existentially_explicit,
          "universally_explicit": sem.is_universally_explicit,
          "unique_implementation": sem.has_unique_implementation,
          "extendable": sem.is_extendable}[kind]
    for s in m.scope:
        got = solve_formula(encode_property(EncodingContext(m), Query(kind, (s.name,)))).verdict
        assert got == fn(m, s), s.name


def test_extends_query():
    m = ecpl()
    ctx = EncodingContext(m)
    assert evaluate(encode_property(ctx, Query("extends", ("S1", "S3"))))
    assert not evaluate(encode_property(ctx, Query("extends", ("S3", "S1"))))
    assert not evaluate(encode_property(ctx, Query("extends", ("S1", "S1", True))))
