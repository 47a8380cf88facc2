import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import ecpl, random_model
from splcheck.model import (BOTTOM, ModelError, NamedSet, ParseError, PropVector, SplModel,
                            Traceability, UniverseMismatch, parse_model, prop_vector,
                            serialize_model, set_of, subset)


def test_ecpl_dimensions():
    m = ecpl()
    assert (len(m.features), len(m.components), len(m.scope), len(m.platform)) == (8, 13, 8, 9)
    assert m.features[0] == "Manual_Lock"
    assert m.prov("Manual_Lock") is BOTTOM and m.req("Manual_Lock") is BOTTOM


def test_empty_sections():
    m = parse_model("[features]\nf\n[components]\nc\n[scope]\n[platform]\n")
    assert m.scope == () and m.platform == ()
    assert m.prov("f") is BOTTOM  # absent from [prov]
    assert m.req("f") == ()


def test_empty_model_round_trip():
    m = parse_model("")
    text = serialize_model(m)
    assert parse_model(text) == m
    assert "[features]" in text and "[req]" in text


def test_empty_named_set():
    m = parse_model("[features]\nf\n[components]\nc\n[scope]\nS0:\n[platform]\nA0:\n")
    assert m.scope[0].members == frozenset() and m.platform[0].members == frozenset()


def test_unknown_identifier_location():
    doc = "[features]\nf\n[components]\nc\n[prov]\nf <- c, c_turbo\n"
    with pytest.raises(ParseError) as e:
        parse_model(doc)
    assert e.value.kind == "unknown identifier"
    assert e.value.line == 6 and e.value.column == 9


@pytest.mark.parametrize("doc, kind, line", [
    ("[features]\nf\nf\n", "duplicate identifier", 3),
    ("[features]\nf\n[components]\nf\n", "duplicate identifier", 4),
    ("[features]\nf\n[scope]\nS1: f\nS2: f\n", "duplicate entry", 5),
    ("[features]\nf\n[bogus]\n", "syntax error", 3),
    ("f\n", "syntax error", 1),
    ("[features]\n1abc\n", "syntax error", 2),
    ("[features]\nf\n[scope]\nS1 f\n", "syntax error", 4),
    ("[features]\nf\n[components]\nc\n[prov]\nf <- !\nf <- c\n", "duplicate entry", 7),
    ("[features]\nf\n[features]\n", "duplicate identifier", 3),
])
def test_parse_errors(doc, kind, line):
    with pytest.raises(ParseError) as e:
        parse_model(doc)
    assert e.value.kind == kind
    assert e.value.line == line


def test_bottom_round_trip():
    doc = "[features]\nf\ng\n[components]\nc\n[prov]\nf <- !\ng <- c\n[req]\nf <- !\n"
    m = parse_model(doc)
    text = serialize_model(m)
    assert "f <- !" in text
    assert parse_model(text) == m


def test_ecpl_round_trip():
    m = ecpl()
    assert parse_model(serialize_model(m)) == m


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_round_trip(seed):
    m = random_model(random.Random(seed), max_components=12, max_features=12, max_entries=10,
                     canonical=False)
    assert parse_model(serialize_model(m)) == m


def test_prop_vector_ecpl_a1():
    m = ecpl()
    v = prop_vector(m.arch("A1").members, m.components)
    assert v.bits == (1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0)
    assert prop_vector(frozenset(), m.components).bits == (0,) * 13
    assert prop_vector(frozenset(m.components), m.components).bits == (1,) * 13


def test_prop_vector_rejects_outsider():
    with pytest.raises(ModelError):
        prop_vector({"zz"}, ("a", "b"))


def test_subset_examples():
    m = ecpl()
    a4 = prop_vector(m.arch("A4").members, m.components)
    a6 = prop_vector(m.arch("A6").members, m.components)
    assert subset(a4, a6) and subset(a6, a6)
    assert not subset(PropVector((1, 0), "component"), PropVector((0, 1), "component"))
    with pytest.raises(UniverseMismatch):
        subset(PropVector((1,), "component"), PropVector((1,), "feature"))


@pytest.mark.parametrize("size", range(0, 9))
def test_prop_vector_bijection_exhaustive(size):
    u = tuple(f"x{i}" for i in range(size))
    for bits in itertools.product((0, 1), repeat=size):
        v = PropVector(bits, "component")
        s = set_of(v, u)
        assert prop_vector(s, u) == v


@settings(max_examples=100, deadline=None)
@given(st.lists(st.booleans(), min_size=9, max_size=16))
def test_prop_vector_bijection_large(bits):
    u = tuple(f"x{i}" for i in range(len(bits)))
    s = frozenset(x for x, b in zip(u, bits) if b)
    assert set_of(prop_vector(s, u), u) == s


def test_subset_exhaustive_six():
    u = tuple("abcdef")
    subsets = [frozenset(x for i, x in enumerate(u) if mask >> i & 1) for mask in range(64)]
    for a in subsets:
        for b in subsets:
            assert subset(prop_vector(a, u), prop_vector(b, u)) == (a <= b)


def test_model_validation():
    t = Traceability({"f": (frozenset({"c"}),)}, {"f": ()})
    with pytest.raises(ModelError):
        SplModel(("f",), ("f",), (), (), t)  # shared name
    with pytest.raises(ModelError):
        SplModel(("f",), ("c",), (NamedSet("S", frozenset({"g"})),), (), t)
    with pytest.raises(ModelError):
        SplModel(("f",), ("c",), (), (NamedSet("A", frozenset()), NamedSet("B", frozenset())), t)
