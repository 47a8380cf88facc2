"""Direct evaluation of the product line definitions over explicit sets.

This is the reference engine: every analysis is a literal loop over the
scope and platform.  The QBF pipeline is checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .model import BOTTOM, ModelError, NamedSet, SplModel, members

COVERS_MODES = ("definition", "lemma")


@dataclass(frozen=True)
class ProductPair:
    spec: NamedSet
    arch: NamedSet


@dataclass(frozen=True)
class ElementStatus:
    element: str
    status: str  # common | live | dead
    vacuous: bool = False


@dataclass(frozen=True)
class EmergenceRecord:
    arch: NamedSet
    emerging: frozenset


def _arch(m: SplModel, C) -> frozenset:
    if isinstance(C, str):
        C = m.arch(C)
    s = members(C)
    bad = s - set(m.components)
    if bad:
        raise ModelError(f"unknown component: {sorted(bad)[0]}")
    return s


def _feats(m: SplModel, F) -> frozenset:
    if isinstance(F, str):
        F = m.spec(F)
    s = members(F)
    bad = s - set(m.features)
    if bad:
        raise ModelError(f"unknown feature: {sorted(bad)[0]}")
    return s


def _check_feature(m: SplModel, f: str):
    if f not in m.feature_index:
        raise ModelError(f"unknown feature: {f}")


def _check_component(m: SplModel, c: str):
    if c not in m.component_index:
        raise ModelError(f"unknown component: {c}")


def _in_scope(m: SplModel, F) -> frozenset:
    s = _feats(m, F)
    if s not in {e.members for e in m.scope}:
        raise ModelError("specification is not in scope")
    return s


def _implements(m: SplModel, C: frozenset, f: str) -> bool:
    prov = m.trace.prov[f]
    req = m.trace.req[f]
    if prov is BOTTOM or req is BOTTOM:
        return False
    req = req or (frozenset(),)  # no requirements
    return any(c1 <= C and any(c2 <= c1 for c2 in req) for c1 in prov)


def implements(m: SplModel, C, f: str) -> bool:
    """Some C1 in prov(f) and C2 in req(f) with C2 <= C1 <= C."""
    _check_feature(m, f)
    return _implements(m, _arch(m, C), f)


def implements_prov_only(m: SplModel, C, f: str) -> bool:
    """The simplified test valid for canonical relations: some C1 in prov(f) with C1 <= C."""
    _check_feature(m, f)
    C = _arch(m, C)
    prov = m.trace.prov[f]
    return prov is not BOTTOM and any(c1 <= C for c1 in prov)


def _provided(m: SplModel, C: frozenset) -> frozenset:
    return frozenset(f for f in m.features if _implements(m, C, f))


def provided_by(m: SplModel, C) -> frozenset:
    return _provided(m, _arch(m, C))


def realizes(m: SplModel, C, F) -> bool:
    return provided_by(m, C) == _feats(m, F)


def covers(m: SplModel, C, F, mode: str = "definition") -> bool:
    """F <= Provided_by(C); definition mode also needs Provided_by(C) in scope."""
    if mode not in COVERS_MODES:
        raise ValueError(f"unknown covers mode {mode!r}")
    P = provided_by(m, C)
    F = _feats(m, F)
    if mode == "definition" and P not in {s.members for s in m.scope}:
        return False
    return F <= P


class _Index:
    """Per-call cache of provided sets for the platform."""

    def __init__(self, m: SplModel):
        self.m = m
        self.prov = {a.name: _provided(m, a.members) for a in m.platform}
        self.scope_sets = {s.members for s in m.scope}

    def covers(self, a: NamedSet, F: frozenset) -> bool:
        P = self.prov[a.name]
        return P in self.scope_sets and F <= P

    def products(self) -> list:
        return [ProductPair(s, a) for s in self.m.scope for a in self.m.platform
                if self.covers(a, s.members)]


def products(m: SplModel) -> list:
    """All scope/platform pairs related by covers, scope-major order."""
    return _Index(m).products()


def is_complete(m: SplModel) -> bool:
    ix = _Index(m)
    return all(any(ix.covers(a, s.members) for a in m.platform) for s in m.scope)


def is_sound(m: SplModel) -> bool:
    ix = _Index(m)
    return all(any(ix.covers(a, s.members) for s in m.scope) for a in m.platform)


def realizing_architectures(m: SplModel, F) -> list:
    F = _feats(m, F)
    ix = _Index(m)
    return [a for a in m.platform if ix.prov[a.name] == F]


def covering_architectures(m: SplModel, F) -> list:
    F = _feats(m, F)
    ix = _Index(m)
    return [a for a in m.platform if ix.covers(a, F)]


def is_existentially_explicit(m: SplModel, F) -> bool:
    _in_scope(m, F)
    return bool(realizing_architectures(m, F))


def is_universally_explicit(m: SplModel, F) -> bool:
    F = _in_scope(m, F)
    ix = _Index(m)
    if not any(ix.prov[a.name] == F for a in m.platform):
        return False
    return all(ix.prov[a.name] == F for a in m.platform if ix.covers(a, F))


def has_unique_implementation(m: SplModel, F) -> bool:
    _in_scope(m, F)
    return len(covering_architectures(m, F)) == 1


def _element_hits(m: SplModel, e: str) -> list:
    if e not in m.feature_index and e not in m.component_index:
        raise ModelError(f"unknown element: {e}")
    return [e in p.spec.members or e in p.arch.members for p in products(m)]


def is_common(m: SplModel, e: str) -> bool:
    return all(_element_hits(m, e))


def is_live(m: SplModel, e: str) -> bool:
    return any(_element_hits(m, e))


def is_dead(m: SplModel, e: str) -> bool:
    return not any(_element_hits(m, e))


def element_status(m: SplModel, e: str) -> ElementStatus:
    hits = _element_hits(m, e)
    if not hits:
        # every element is vacuously both common and dead
        return ElementStatus(e, "dead", vacuous=True)
    if all(hits):
        return ElementStatus(e, "common")
    if any(hits):
        return ElementStatus(e, "live")
    return ElementStatus(e, "dead")


def is_superfluous(m: SplModel, c: str) -> bool:
    """spec(Prod) is unchanged when products using c are dropped."""
    _check_component(m, c)
    prods = products(m)
    all_specs = {p.spec.members for p in prods}
    without = {p.spec.members for p in prods if c not in p.arch.members}
    return all_specs == without


def is_redundant(m: SplModel, c: str) -> bool:
    """Every architecture with c has a sub-architecture without c providing the same."""
    _check_component(m, c)
    ix = _Index(m)
    for a in m.platform:
        if c not in a.members:
            continue
        if not any(c not in b.members and b.members <= a.members
                   and ix.prov[b.name] == ix.prov[a.name] for b in m.platform):
            return False
    return True


def is_critical(m: SplModel, c: str, f: str) -> bool:
    """Every platform architecture implementing f contains c."""
    _check_component(m, c)
    _check_feature(m, f)
    return all(c in a.members for a in m.platform if _implements(m, a.members, f))


def emerging(m: SplModel, F) -> list:
    F = _in_scope(m, F)
    ix = _Index(m)
    return [EmergenceRecord(a, ix.prov[a.name] - F) for a in m.platform if ix.covers(a, F)]


def extends(F, F2, proper: bool = False) -> bool:
    """F2 extends F: componentwise f_i => f2_i, optionally with F != F2."""
    from .model import PropVector, UniverseMismatch
    if isinstance(F, PropVector) or isinstance(F2, PropVector):
        if not (isinstance(F, PropVector) and isinstance(F2, PropVector)):
            raise UniverseMismatch("cannot compare a vector with a set")
        if F.universe_kind != F2.universe_kind or len(F.bits) != len(F2.bits):
            raise UniverseMismatch("vectors index different universes")
        ok = all(b or not a for a, b in zip(F.bits, F2.bits))
        return ok and (not proper or F.bits != F2.bits)
    a, b = members(F), members(F2)
    return a <= b and (not proper or a != b)


def is_extendable(m: SplModel, F) -> bool:
    F = _feats(m, F)
    return any(extends(F, s.members, proper=True) for s in m.scope)


def all_subsets(universe: Iterable[str]):
    """Every subset of a small universe, in binary counting order."""
    u = list(universe)
    for mask in range(1 << len(u)):
        yield frozenset(x for i, x in enumerate(u) if mask >> i & 1)
