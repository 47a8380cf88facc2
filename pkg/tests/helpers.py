"""Random generators, hypothesis strategies and brute-force oracles for the test suite.

The oracles here are written from the definitions without touching the
package's search code, so agreement with them is evidence, not tautology.
"""

from __future__ import annotations

import functools
import itertools
import random
from pathlib import Path

from hypothesis import strategies as st

from splcheck.canonize import canonize_model
from splcheck.model import BOTTOM, NamedSet, SplModel, Traceability, load_model
from splcheck.qbf import EXISTS, FORALL, CnfInstance

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def ecpl() -> SplModel:
    return load_model(FIXTURES / "ecpl.spl")


def illustrative() -> SplModel:
    return load_model(FIXTURES / "illustrative.spl")


@functools.lru_cache(maxsize=None)
def ecpl_report():
    """Full ECPL analysis with both engines; slow, so computed once per session."""
    from splcheck.report import EngineOptions, analyze
    return analyze(ecpl(), EngineOptions(), model_id="ecpl.spl", canonized=True)


# ---- random models ----

def random_traceability(rng: random.Random, comps, feats, max_alts=3, bottom_rate=0.15):
    def rset():
        return frozenset(c for c in comps if rng.random() < 0.5)

    prov, req = {}, {}
    for f in feats:
        r = rng.random()
        if r < bottom_rate:
            prov[f] = BOTTOM
            req[f] = BOTTOM if rng.random() < 0.7 else tuple({rset() for _ in range(rng.randint(0, 2))})
        else:
            prov[f] = tuple(dict.fromkeys(rset() for _ in range(rng.randint(0, max_alts))))
            req[f] = tuple(dict.fromkeys(rset() for _ in range(rng.randint(0, max_alts - 1))))
    return Traceability(prov, req)


def random_model(rng: random.Random, max_components=6, max_features=4, max_entries=5,
                 canonical=True) -> SplModel:
    n = rng.randint(1, max_components)
    m = rng.randint(1, max_features)
    comps = tuple(f"c{i + 1}" for i in range(n))
    feats = tuple(f"f{j + 1}" for j in range(m))

    def entries(universe, prefix):
        out = []
        for _ in range(rng.randint(0, max_entries)):
            s = frozenset(u for u in universe if rng.random() < 0.5)
            if s not in out:
                out.append(s)
        return tuple(NamedSet(f"{prefix}{i + 1}", s) for i, s in enumerate(out))

    model = SplModel(feats, comps, entries(feats, "S"), entries(comps, "A"),
                     random_traceability(rng, comps, feats))
    if canonical:
        model = canonize_model(model)[0]
    return model


@st.composite
def models(draw, max_components=5, max_features=3, max_entries=4, canonical=True):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_model(random.Random(seed), max_components, max_features, max_entries, canonical)


@st.composite
def traceabilities(draw, max_components=8, max_features=3, max_alts=4):
    n = draw(st.integers(1, max_components))
    m = draw(st.integers(1, max_features))
    comps = tuple(f"c{i + 1}" for i in range(n))
    feats = tuple(f"f{j + 1}" for j in range(m))
    seed = draw(st.integers(0, 2**32 - 1))
    return comps, feats, random_traceability(random.Random(seed), comps, feats, max_alts)


# ---- random QBF instances ----

def random_instance(rng: random.Random, max_vars=14, max_clauses=None, free_ok=False) -> CnfInstance:
    n = rng.randint(1, max_vars)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    quantified = order if not free_ok else order[: rng.randint(0, n)]
    prefix = []
    kind = rng.choice((FORALL, EXISTS))
    i = 0
    while i < len(quantified):
        k = rng.randint(1, max(1, len(quantified) - i))
        prefix.append((kind, tuple(sorted(quantified[i:i + k]))))
        kind = EXISTS if kind == FORALL else FORALL
        i += k
    clauses = []
    for _ in range(rng.randint(0, max_clauses or 3 * n)):
        width = rng.randint(1, min(4, n))
        vs = rng.sample(range(1, n + 1), width)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfInstance(n, tuple(clauses), tuple(prefix))


def truth_table(c: CnfInstance) -> bool:
    """Full 2^k expansion: evaluate the matrix on every assignment, then fold the prefix."""
    if c.is_false_instance:
        return False
    quantified = {v for _, vs in c.prefix for v in vs}
    free = sorted({abs(l) for cl in c.clauses for l in cl} - quantified)
    order = [(EXISTS, v) for v in free] + [(k, v) for k, vs in c.prefix for v in vs]
    pos = {v: i for i, (_, v) in enumerate(order)}
    vals = [all(any(bits[pos[abs(l)]] == (l > 0) for l in cl) for cl in c.clauses)
            for bits in itertools.product((False, True), repeat=len(order))]
    for k, _ in reversed(order):
        pairs = zip(vals[0::2], vals[1::2])
        vals = [a and b for a, b in pairs] if k == FORALL else [a or b for a, b in pairs]
    return vals[0]


def brute_force(c: CnfInstance) -> bool:
    """Truth-table expansion of a prenex CNF instance; free variables are outermost existential."""
    if c.is_false_instance:
        return False
    mentioned = sorted({abs(l) for cl in c.clauses for l in cl})
    quantified = [v for _, vs in c.prefix for v in vs]
    free = [v for v in mentioned if v not in set(quantified)]
    order = [(EXISTS, v) for v in free] + [(k, v) for k, vs in c.prefix for v in vs]

    def falsified(env):
        return any(all(abs(l) in env and env[abs(l)] != (l > 0) for l in cl) for cl in c.clauses)

    def go(i, env):
        # a fully falsified clause decides the branch; this is plain expansion with pruning
        if falsified(env):
            return False
        if i == len(order):
            return True
        k, v = order[i]
        result = k == FORALL
        for val in (False, True):
            env[v] = val
            r = go(i + 1, env)
            del env[v]
            if k == FORALL and not r:
                result = False
                break
            if k == EXISTS and r:
                result = True
                break
        return result

    return go(0, {})


# ---- definitional oracles for the product line notions ----

def o_implements(m: SplModel, C, f) -> bool:
    prov, req = m.trace.prov[f], m.trace.req[f]
    if prov is BOTTOM or req is BOTTOM:
        return False
    reqs = list(req) if req else [frozenset()]
    return any(c2 <= c1 <= frozenset(C) for c1 in prov for c2 in reqs)


def o_provided(m: SplModel, C) -> frozenset:
    return frozenset(f for f in m.features if o_implements(m, C, f))


def o_products(m: SplModel) -> set:
    scope = [s.members for s in m.scope]
    out = set()
    for s in m.scope:
        for a in m.platform:
            p = o_provided(m, a.members)
            if p in scope and s.members <= p:
                out.add((s.name, a.name))
    return out


def all_subsets(universe):
    u = list(universe)
    for r in range(len(u) + 1):
        for combo in itertools.combinations(u, r):
            yield frozenset(combo)
