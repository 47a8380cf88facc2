"""Non-redundancy, internal consistency and canonization of traceability."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import BOTTOM, SplModel, Traceability, UniverseMismatch
from . import semantics


@dataclass(frozen=True)
class CanonizationStep:
    rule: int
    feature: str
    target: str  # prov | req | both
    removed: frozenset | None = None  # None for a Bottom assignment

    def describe(self) -> str:
        if self.removed is None:
            return f"rule {self.rule}: {self.feature}: prov <- BOTTOM, req <- BOTTOM"
        s = "{" + ", ".join(sorted(self.removed)) + "}"
        return f"rule {self.rule}: {self.feature}: remove {s} from {self.target}"


@dataclass
class CanonizationTrace:
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def history(self, t: Traceability, feature: str, target: str = "prov") -> list:
        """Successive values of prov(feature) (or req) while replaying the steps."""
        cur = t
        out = [getattr(cur, target)[feature]]
        for st in self.steps:
            cur = apply_step(cur, st)
            if st.feature == feature:
                out.append(getattr(cur, target)[feature])
        return out


def _antichain(alts) -> bool:
    if alts is BOTTOM:
        return True
    return not any(a < b for a in alts for b in alts)


def is_non_redundant(t: Traceability) -> bool:
    return all(_antichain(t.prov[f]) for f in t.prov) and all(_antichain(t.req[f]) for f in t.req)


def _covered(C: frozenset, req) -> bool:
    if req is BOTTOM:
        return False
    if not req:
        return True  # empty req means no requirements
    return any(r <= C for r in req)


def is_internally_consistent(t: Traceability) -> bool:
    for f, prov in t.prov.items():
        if prov is BOTTOM:
            continue
        req = t.req.get(f, ())
        if not all(_covered(C, req) for C in prov):
            return False
    return True


def is_canonical(t: Traceability) -> bool:
    for f, prov in t.prov.items():
        if prov is BOTTOM:
            if t.req.get(f, ()) is not BOTTOM:
                return False
        elif not prov:
            return False
    return is_non_redundant(t) and is_internally_consistent(t)


def apply_step(t: Traceability, st: CanonizationStep) -> Traceability:
    if st.removed is None:
        return t.replace(st.feature, prov=BOTTOM, req=BOTTOM)
    alts = getattr(t, st.target)[st.feature]
    rest = tuple(s for s in alts if s != st.removed)
    if st.target == "prov":
        return t.replace(st.feature, prov=rest)
    return t.replace(st.feature, req=rest)


def replay(t: Traceability, trace: CanonizationTrace) -> Traceability:
    for st in trace:
        t = apply_step(t, st)
    return t


def _rule1(t, f):
    prov = t.prov[f]
    if (prov is BOTTOM or not prov) and not (prov is BOTTOM and t.req.get(f, ()) is BOTTOM):
        return CanonizationStep(1, f, "both")
    return None


def _rule2(t, f):
    prov = t.prov[f]
    if prov is BOTTOM:
        return None
    for cj in prov:
        if any(ci < cj for ci in prov):
            return CanonizationStep(2, f, "prov", cj)
    return None


def _rule3(t, f, strict):
    req = t.req.get(f, ())
    if req is BOTTOM:
        return None
    for ci in req:
        for cj in req:
            if ci < cj:
                # the literal rule drops the smaller set, the default drops the larger
                return CanonizationStep(3, f, "req", ci if strict else cj)
    return None


def _rule4(t, f):
    prov = t.prov[f]
    if prov is BOTTOM:
        return None
    req = t.req.get(f, ())
    for C in prov:
        if not _covered(C, req):
            return CanonizationStep(4, f, "prov", C)
    return None


def canonize(t: Traceability, strict_paper: bool = False):
    """Apply the four rewrite rules to a fixpoint; returns (relation, trace).

    Default schedule: rules 3 and 4 until stable, then rule 2, then rule 1,
    repeated while anything fires.  Once rule 4 is exhausted every prov set
    contains a req set, so dropping a prov superset can no longer lose an
    implementation.

    strict_paper follows the rules in their listed order (1, 2, 3, 4) with
    rule 3 removing the smaller req set as literally stated.  Neither of
    these choices preserves implements in general: prov={{c,d},{c,d,e}},
    req={{d,e}} loses {c,d,e} because rule 2 runs before rule 4.
    """
    feats = list(t.prov) + [f for f in t.req if f not in t.prov]
    t = Traceability({f: t.prov.get(f, BOTTOM) for f in feats},
                     {f: t.req.get(f, ()) for f in feats})
    trace = CanonizationTrace()

    def exhaust(rule) -> bool:
        nonlocal t
        fired = False
        for f in feats:
            st = rule(t, f)
            while st:
                t = apply_step(t, st)
                trace.steps.append(st)
                fired = True
                st = rule(t, f)
        return fired

    def r3(t, f):
        return _rule3(t, f, strict_paper)

    if strict_paper:
        schedule = (_rule1, _rule2, r3, _rule4)
    else:
        schedule = (r3, _rule4, _rule2, _rule1)
    changed = True
    while changed:
        changed = False
        for rule in schedule:
            changed |= exhaust(rule)
    return t, trace


def canonize_model(m: SplModel, strict_paper: bool = False):
    t, trace = canonize(m.trace, strict_paper)
    return m.with_trace(t), trace


def implements_preserved(before: SplModel, after: SplModel, exhaustive: bool = False,
                         max_components: int = 8) -> bool:
    """Implements verdicts agree on every platform architecture (or every subset)."""
    if before.features != after.features or before.components != after.components:
        raise UniverseMismatch("models have different universes")
    if exhaustive and before.n <= max_components:
        archs = list(semantics.all_subsets(before.components))
    else:
        archs = [a.members for a in before.platform]
    return all(semantics.implements(before, C, f) == semantics.implements(after, C, f)
               for C in archs for f in before.features)
