"""Compile product line analyses into closed QBF formulas.

Variable numbering: the primary component tuple is 1..n and the primary
feature tuple n+1..n+m, in declaration order.  Further tuples (the inner
universal tuple of f_implements, d', g') are numbered from n+m+1 in
allocation order; Tseitin auxiliaries come after all of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .canonize import is_canonical
from .model import BOTTOM, ModelError, NamedSet, PropVector, SplModel, members
from .qbf import (FALSE, TRUE, Node, QbfFormula, Var, all_vars, and_, as_formula, exists, forall,
                  iff, implies, not_, or_)


class EncodingError(ValueError):
    pass


QUERY_KINDS = (
    "implements", "covers", "realizes", "complete", "sound",
    "existentially_explicit", "universally_explicit", "unique_implementation",
    "common", "live", "dead", "superfluous", "redundant", "critical",
    "extends", "extendable", "tcf",
)


@dataclass(frozen=True)
class Query:
    kind: str
    args: tuple = ()
    mode: str = "definition"  # covers only; `lemma` drops the scope check

    def label(self) -> str:
        parts = [self.kind] + [str(a) for a in self.args]
        if self.kind == "covers":
            parts.append(f"[{self.mode}]")
        return " ".join(parts)


class EncodingContext:
    def __init__(self, model: SplModel, allow_raw: bool = False):
        if not allow_raw and not is_canonical(model.trace):
            raise EncodingError("model is not canonical; canonize it first or allow raw encoding")
        self.model = model
        n, m = model.n, model.m
        self.c = tuple(Var(i + 1, f"component {name}") for i, name in enumerate(model.components))
        self.f = tuple(Var(n + j + 1, f"feature {name}") for j, name in enumerate(model.features))
        self.fresh_counter = n + m + 1
        self.legend = {i + 1: f"component {name}" for i, name in enumerate(model.components)}
        self.legend.update({n + j + 1: f"feature {name}" for j, name in enumerate(model.features)})

    def _fresh(self, names, kind, label):
        out = []
        for name in names:
            tag = f"{kind} {name} ({label})"
            v = Var(self.fresh_counter, tag)
            self.legend[self.fresh_counter] = tag
            self.fresh_counter += 1
            out.append(v)
        return tuple(out)

    def fresh_components(self, label: str) -> tuple:
        return self._fresh(self.model.components, "component", label)

    def fresh_features(self, label: str) -> tuple:
        return self._fresh(self.model.features, "feature", label)

    def legend_lines(self, formula=None, num_vars: int | None = None) -> list:
        """One line per variable of `formula` (all allocated ones if None), then the auxiliary range."""
        if formula is None:
            used = {i: tag for i, tag in self.legend.items()}
        else:
            used = {v.index: self.legend.get(v.index) or v.tag or "renamed copy"
                    for v in all_vars(as_formula(formula).as_node())}
        lines = [f"var {i} = {tag}" for i, tag in sorted(used.items())]
        top = max(used, default=0)
        if num_vars and num_vars > top:
            lines.append(f"vars {top + 1}..{num_vars} = tseitin auxiliaries")
        return lines


def _vec(ctx_universe: Sequence[str], v, kind: str) -> tuple:
    """Normalise a parameter vector to a tuple of nodes (constants or variables)."""
    if isinstance(v, PropVector):
        if v.universe_kind != kind or len(v.bits) != len(ctx_universe):
            raise EncodingError(f"vector does not index the {kind} universe")
        return tuple(TRUE if b else FALSE for b in v.bits)
    if isinstance(v, (NamedSet, frozenset, set)):
        s = members(v)
        bad = s - set(ctx_universe)
        if bad:
            raise ModelError(f"unknown {kind}: {sorted(bad)[0]}")
        return tuple(TRUE if u in s else FALSE for u in ctx_universe)
    v = tuple(v)
    if len(v) != len(ctx_universe):
        raise EncodingError(f"vector length {len(v)} does not match the {kind} universe")
    return tuple(x if isinstance(x, Node) else (TRUE if x else FALSE) for x in v)


def cvec(ctx: EncodingContext, v) -> tuple:
    return _vec(ctx.model.components, v, "component")


def fvec(ctx: EncodingContext, v) -> tuple:
    return _vec(ctx.model.features, v, "feature")


def _alts_formula(alts, over, empty) -> Node:
    if alts is BOTTOM:
        return FALSE
    if not alts:
        return empty
    return or_([and_([over[i] for i in sorted(S)]) for S in alts])


def _index_sets(ctx, alts):
    if alts is BOTTOM:
        return BOTTOM
    ix = ctx.model.component_index
    return [frozenset(ix[c] for c in S) for S in alts]


def _feature(ctx, f: str) -> str:
    if f not in ctx.model.feature_index:
        raise ModelError(f"unknown feature: {f}")
    return f


def formula_prov(ctx: EncodingContext, f: str, over=None) -> Node:
    """Disjunction over prov(f) of the conjunction of its components; Bottom or empty gives FALSE."""
    over = ctx.c if over is None else over
    return _alts_formula(_index_sets(ctx, ctx.model.prov(_feature(ctx, f))), over, FALSE)


def formula_req(ctx: EncodingContext, f: str, over=None) -> Node:
    """Like formula_prov over req(f); an empty req gives TRUE."""
    over = ctx.c if over is None else over
    return _alts_formula(_index_sets(ctx, ctx.model.req(_feature(ctx, f))), over, TRUE)


def f_implements(ctx: EncodingContext, c, f: str, inner=None) -> Node:
    """forall inner [ AND_i (c_i => inner_i) ] => formula_prov(f)(inner)."""
    c = cvec(ctx, c)
    inner = ctx.c if inner is None else inner
    guard = and_([implies(ci, xi) for ci, xi in zip(c, inner)])
    return forall(inner, implies(guard, formula_prov(ctx, f, inner)))


def f_covers(ctx: EncodingContext, c, fv, inner=None) -> Node:
    fv = fvec(ctx, fv)
    return and_([implies(fj, f_implements(ctx, c, name, inner))
                 for fj, name in zip(fv, ctx.model.features)])


def f_realizes(ctx: EncodingContext, c, fv, inner=None) -> Node:
    fv = fvec(ctx, fv)
    return and_([iff(fj, f_implements(ctx, c, name, inner))
                 for fj, name in zip(fv, ctx.model.features)])


def _minterms(entries, universe, over) -> Node:
    return or_([and_([x if u in e.members else not_(x) for u, x in zip(universe, over)])
                for e in entries])


def c_i_predicate(ctx: EncodingContext, over=None) -> Node:
    """Satisfied exactly by the indicator tuples of platform architectures."""
    over = ctx.c if over is None else over
    return _minterms(ctx.model.platform, ctx.model.components, over)


def c_f_predicate(ctx: EncodingContext, over=None) -> Node:
    """Satisfied exactly by the indicator tuples of scope specifications."""
    over = ctx.f if over is None else over
    return _minterms(ctx.model.scope, ctx.model.features, over)


def covers_def(ctx: EncodingContext, c, fv, inner, g) -> Node:
    """f_covers plus the side condition that the provided set is in scope."""
    return and_(f_covers(ctx, c, fv, inner),
                exists(g, and_(c_f_predicate(ctx, g), f_realizes(ctx, c, g, inner))))


def covers_formula(ctx: EncodingContext, c, fv, mode: str = "definition") -> Node:
    if mode == "lemma":
        return f_covers(ctx, c, fv)
    if mode != "definition":
        raise EncodingError(f"unknown covers mode {mode!r}")
    return covers_def(ctx, c, fv, ctx.c, ctx.fresh_features("provided set"))


def tcf(ctx: EncodingContext) -> Node:
    """forall c [ AND_f formula_prov(f) => formula_req(f) ]."""
    return forall(ctx.c, and_([implies(formula_prov(ctx, f), formula_req(ctx, f))
                               for f in ctx.model.features]))


def _spec(ctx, F):
    if isinstance(F, str):
        return ctx.model.spec(F)
    return F


def _arch(ctx, C):
    if isinstance(C, str):
        return ctx.model.arch(C)
    return C


def encode_property(ctx: EncodingContext, query: Query) -> QbfFormula:
    """The closed formula whose truth decides the query."""
    k, a = query.kind, query.args
    m = ctx.model
    P, Fp = ctx.c, ctx.f  # the primed tuples c' and f'

    def X():
        return ctx.fresh_components("X")

    if k == "implements":
        body = f_implements(ctx, _arch(ctx, a[0]), a[1])
    elif k == "covers":
        body = covers_formula(ctx, _arch(ctx, a[0]), _spec(ctx, a[1]), query.mode)
    elif k == "realizes":
        body = f_realizes(ctx, _arch(ctx, a[0]), _spec(ctx, a[1]))
    elif k == "tcf":
        body = tcf(ctx)
    elif k == "complete":
        x, g = X(), ctx.fresh_features("g")
        body = forall(Fp, implies(c_f_predicate(ctx), exists(P, and_(
            c_i_predicate(ctx), covers_def(ctx, P, Fp, x, g)))))
    elif k == "sound":
        x, g = X(), ctx.fresh_features("g")
        body = forall(P, implies(c_i_predicate(ctx), exists(Fp, and_(
            c_f_predicate(ctx), covers_def(ctx, P, Fp, x, g)))))
    elif k == "existentially_explicit":
        F = _spec(ctx, a[0])
        body = exists(P, and_(c_i_predicate(ctx), f_realizes(ctx, P, F, X())))
    elif k == "universally_explicit":
        F = _spec(ctx, a[0])
        x, g = X(), ctx.fresh_features("g")
        ee = exists(P, and_(c_i_predicate(ctx), f_realizes(ctx, P, F, x)))
        ue = forall(P, implies(and_(c_i_predicate(ctx), covers_def(ctx, P, F, x, g)),
                               f_realizes(ctx, P, F, x)))
        body = and_(ee, ue)
    elif k == "unique_implementation":
        F = _spec(ctx, a[0])
        x, g, d = X(), ctx.fresh_features("g"), ctx.fresh_components("d")
        # c' scopes over the uniqueness part so that d' = c' refers to the witness
        body = exists(P, and_(
            c_i_predicate(ctx), covers_def(ctx, P, F, x, g),
            forall(d, implies(and_(c_i_predicate(ctx, d), covers_def(ctx, d, F, x, g)),
                              and_([iff(di, ci) for di, ci in zip(d, P)])))))
    elif k in ("common", "live", "dead"):
        e = a[0]
        if e in m.component_index:
            target = P[m.component_index[e]]
        elif e in m.feature_index:
            target = Fp[m.feature_index[e]]
        else:
            raise ModelError(f"unknown element: {e}")
        x, g = X(), ctx.fresh_features("g")
        prod = and_(c_i_predicate(ctx), c_f_predicate(ctx), covers_def(ctx, P, Fp, x, g))
        if k == "common":
            body = forall(P + Fp, implies(prod, target))
        elif k == "live":
            body = exists(P + Fp, and_(prod, target))
        else:
            body = forall(P + Fp, implies(prod, not_(target)))
    elif k == "superfluous":
        i = _component(ctx, a[0])
        x, g, d = X(), ctx.fresh_features("g"), ctx.fresh_components("d")
        body = forall(P + Fp, implies(
            and_(P[i], c_i_predicate(ctx), c_f_predicate(ctx), covers_def(ctx, P, Fp, x, g)),
            exists(d, and_(not_(d[i]), c_i_predicate(ctx, d), covers_def(ctx, d, Fp, x, g)))))
    elif k == "redundant":
        i = _component(ctx, a[0])
        x, d = X(), ctx.fresh_components("d")
        same = and_([iff(f_implements(ctx, P, f, x), f_implements(ctx, d, f, x))
                     for f in m.features])
        body = forall(P, implies(and_(P[i], c_i_predicate(ctx)), exists(d, and_(
            not_(d[i]), and_([implies(dj, cj) for dj, cj in zip(d, P)]),
            c_i_predicate(ctx, d), same))))
    elif k == "critical":
        i = _component(ctx, a[0])
        body = forall(P, implies(and_(c_i_predicate(ctx), f_implements(ctx, P, _feature(ctx, a[1]), X())),
                                 P[i]))
    elif k == "extends":
        F, F2 = fvec(ctx, _spec(ctx, a[0])), fvec(ctx, _spec(ctx, a[1]))
        proper = bool(a[2]) if len(a) > 2 else False
        body = and_([implies(x, y) for x, y in zip(F, F2)])
        if proper:
            body = and_(body, or_([and_(y, not_(x)) for x, y in zip(F, F2)]))
    elif k == "extendable":
        F = fvec(ctx, _spec(ctx, a[0]))
        body = exists(Fp, and_(c_f_predicate(ctx), and_([implies(x, y) for x, y in zip(F, Fp)]),
                               or_([and_(y, not_(x)) for x, y in zip(F, Fp)])))
    else:
        raise EncodingError(f"unknown query kind {k!r}")
    return QbfFormula(body)


def _component(ctx, c: str) -> int:
    if c not in ctx.model.component_index:
        raise ModelError(f"unknown component: {c}")
    return ctx.model.component_index[c]
