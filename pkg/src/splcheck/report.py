"""Analysis orchestration over both engines, verdict reports and relation tables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import semantics as sem
from .canonize import is_canonical, is_internally_consistent, is_non_redundant
from .encoder import EncodingContext, Query, encode_property
from .model import ModelError, SplModel
from .qbf import as_formula, prenex, tseitin
from .solver import (CapacityError, ExternalConfig, SolverConfig, SolverDisagreement,
                     solve, solve_external, solve_formula)

ENGINES = ("semantic", "qbf")

_IN_SCOPE_ONLY = {"existentially_explicit", "universally_explicit", "unique_implementation"}


@dataclass
class EngineOptions:
    engines: tuple = ENGINES
    covers_mode: str = "definition"
    solver: SolverConfig = field(default_factory=SolverConfig)
    solver_cmd: str | None = None
    external: ExternalConfig = field(default_factory=ExternalConfig)
    verify: bool = False
    allow_raw: bool = False


def query_key(q: Query) -> str:
    parts = [q.kind] + [a if isinstance(a, str) else str(a) for a in q.args]
    if q.kind == "covers":
        parts.append(q.mode)
    return ".".join(parts)


def analysis_queries(m: SplModel) -> list:
    """Every SPL-level, specification-level and element-level analysis, in a fixed order."""
    qs = [Query("complete"), Query("sound"), Query("tcf")]
    for s in m.scope:
        for k in ("existentially_explicit", "universally_explicit", "unique_implementation",
                  "extendable"):
            qs.append(Query(k, (s.name,)))
    for e in m.features + m.components:
        for k in ("common", "live", "dead"):
            qs.append(Query(k, (e,)))
    for c in m.components:
        qs.append(Query("superfluous", (c,)))
        qs.append(Query("redundant", (c,)))
    for c in m.components:
        for f in m.features:
            qs.append(Query("critical", (c, f)))
    return qs


def relation_queries(m: SplModel, covers_mode: str = "definition") -> list:
    qs = []
    for a in m.platform:
        for f in m.features:
            qs.append(Query("implements", (a.name, f)))
        for s in m.scope:
            qs.append(Query("realizes", (a.name, s.name)))
            qs.append(Query("covers", (a.name, s.name), covers_mode))
    return qs


def semantic_verdict(m: SplModel, q: Query) -> bool:
    k, a = q.kind, q.args

    def spec(x):
        return m.spec(x) if isinstance(x, str) else x

    def arch(x):
        return m.arch(x) if isinstance(x, str) else x

    if k == "complete":
        return sem.is_complete(m)
    if k == "sound":
        return sem.is_sound(m)
    if k == "tcf":
        return is_internally_consistent(m.trace)
    if k == "existentially_explicit":
        return sem.is_existentially_explicit(m, spec(a[0]))
    if k == "universally_explicit":
        return sem.is_universally_explicit(m, spec(a[0]))
    if k == "unique_implementation":
        return sem.has_unique_implementation(m, spec(a[0]))
    if k == "extendable":
        return sem.is_extendable(m, spec(a[0]))
    if k == "common":
        return sem.is_common(m, a[0])
    if k == "live":
        return sem.is_live(m, a[0])
    if k == "dead":
        return sem.is_dead(m, a[0])
    if k == "superfluous":
        return sem.is_superfluous(m, a[0])
    if k == "redundant":
        return sem.is_redundant(m, a[0])
    if k == "critical":
        return sem.is_critical(m, a[0], a[1])
    if k == "implements":
        return sem.implements(m, arch(a[0]), a[1])
    if k == "realizes":
        return sem.realizes(m, arch(a[0]), spec(a[1]))
    if k == "covers":
        return sem.covers(m, arch(a[0]), spec(a[1]), q.mode)
    if k == "extends":
        return sem.extends(spec(a[0]), spec(a[1]), bool(a[2]) if len(a) > 2 else False)
    raise ModelError(f"unknown query kind {k!r}")


def qbf_verdict(m: SplModel, q: Query, opts: EngineOptions | None = None) -> bool:
    opts = opts or EngineOptions()
    if q.kind in _IN_SCOPE_ONLY:
        # explicitness and uniqueness are defined for scope members only
        F = m.spec(q.args[0]) if isinstance(q.args[0], str) else q.args[0]
        sem._in_scope(m, F)
    f = as_formula(encode_property(EncodingContext(m, opts.allow_raw), q))
    if not opts.solver_cmd:
        return solve_formula(f, opts.solver).verdict
    counted = len(f.bound_vars())
    if counted > opts.solver.max_vars:
        raise CapacityError(f"{counted} quantified variables exceed the cap of {opts.solver.max_vars}")
    c = tseitin(prenex(f))
    return solve_external(c, opts.solver_cmd, opts.external, opts.verify, opts.solver).verdict


@dataclass
class VerdictRow:
    key: str
    label: str
    verdicts: dict  # engine -> bool

    @property
    def agree(self) -> bool:
        return len(set(self.verdicts.values())) <= 1

    @property
    def verdict(self) -> bool:
        return next(iter(self.verdicts.values()))


@dataclass
class AnalysisReport:
    model_id: str
    engines: tuple
    covers_mode: str
    canonized: bool
    canonization_steps: int
    rows: list = field(default_factory=list)
    products: list = field(default_factory=list)  # (spec name, arch name)
    statuses: list = field(default_factory=list)  # ElementStatus
    witnesses: dict = field(default_factory=dict)

    @property
    def disagreement(self) -> bool:
        return any(not r.agree for r in self.rows)

    def verdict(self, key: str) -> bool:
        for r in self.rows:
            if r.key == key:
                return r.verdict
        raise KeyError(key)

    def selected(self, kind: str) -> list:
        """Argument lists of the queries of one kind that hold."""
        out = []
        for r in self.rows:
            head, *args = r.key.split(".")
            if head == kind and r.verdict:
                out.append(".".join(args))
        return out

    def to_flat(self) -> dict:
        d = {
            "model": self.model_id,
            "engines": ",".join(self.engines),
            "covers_mode": self.covers_mode,
            "canonized": self.canonized,
            "canonization_steps": self.canonization_steps,
            "products.count": len(self.products),
            "products": ",".join(f"{s}/{a}" for s, a in self.products),
        }
        for st in self.statuses:
            d[f"status.{st.element}"] = st.status + (" (vacuous)" if st.vacuous else "")
        for r in self.rows:
            for eng, v in r.verdicts.items():
                d[f"verdict.{r.key}.{eng}"] = v
            d[f"agree.{r.key}"] = r.agree
        d.update({f"witness.{k}": v for k, v in self.witnesses.items()})
        d["disagreement"] = self.disagreement
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_flat(), indent=2) + "\n"

    def to_text(self) -> str:
        out = [f"model: {self.model_id}",
               f"engines: {', '.join(self.engines)}",
               f"covers mode: {self.covers_mode}",
               f"canonized: {'yes' if self.canonized else 'no'} ({self.canonization_steps} steps)",
               "", f"products ({len(self.products)}):"]
        out += [f"  <{s}, {a}>" for s, a in self.products]
        out += ["", "element status:"]
        for st in self.statuses:
            out.append(f"  {st.element}: {st.status}" + (" (vacuous: no products)" if st.vacuous else ""))
        out += ["", "verdicts:"]
        width = max((len(r.label) for r in self.rows), default=0)
        for r in self.rows:
            vs = "  ".join(f"{e}={str(v).lower()}" for e, v in r.verdicts.items())
            flag = "" if r.agree else "  DISAGREEMENT"
            out.append(f"  {r.label:<{width}}  {vs}{flag}")
        if self.witnesses:
            out += ["", "witnesses:"]
            out += [f"  {k}: {v}" for k, v in self.witnesses.items()]
        out += ["", f"disagreement: {'yes' if self.disagreement else 'no'}"]
        return "\n".join(out) + "\n"


def _witnesses(m: SplModel) -> dict:
    w = {}
    for s in m.scope:
        w[f"covering.{s.name}"] = ",".join(a.name for a in sem.covering_architectures(m, s))
        w[f"realizing.{s.name}"] = ",".join(a.name for a in sem.realizing_architectures(m, s))
        w[f"emerging.{s.name}"] = format_emerging(m, sem.emerging(m, s))
    return w


def format_emerging(m: SplModel, recs) -> str:
    return "; ".join(f"{r.arch.name}: "
                     + (", ".join(f for f in m.features if f in r.emerging) or "(none)")
                     for r in recs)


def analyze(m: SplModel, opts: EngineOptions | None = None, model_id: str = "model",
            canonized: bool = False, canonization_steps: int = 0) -> AnalysisReport:
    opts = opts or EngineOptions()
    rep = AnalysisReport(model_id, tuple(opts.engines), opts.covers_mode, canonized,
                         canonization_steps)
    rep.products = [(p.spec.name, p.arch.name) for p in sem.products(m)]
    rep.statuses = [sem.element_status(m, e) for e in m.features + m.components]
    for q in analysis_queries(m):
        verdicts = {}
        for eng in opts.engines:
            verdicts[eng] = semantic_verdict(m, q) if eng == "semantic" else qbf_verdict(m, q, opts)
        rep.rows.append(VerdictRow(query_key(q), q.label(), verdicts))
    rep.witnesses = _witnesses(m)
    return rep


# ---- relation tables ----

TABLES = ("implements", "realizes", "covers")


def relation_matrix(m: SplModel, which: str, engine: str = "semantic",
                    opts: EngineOptions | None = None) -> list:
    """Rows (features or specifications) by architecture columns of booleans."""
    opts = opts or EngineOptions()
    if which not in TABLES:
        raise ValueError(f"unknown table {which!r}")
    rows = m.features if which == "implements" else [s.name for s in m.scope]
    out = []
    for r in rows:
        line = []
        for a in m.platform:
            q = Query(which, (a.name, r), opts.covers_mode)
            line.append(semantic_verdict(m, q) if engine == "semantic" else qbf_verdict(m, q, opts))
        out.append(line)
    return out


def render_table(m: SplModel, which: str, matrix) -> str:
    """Architectures as columns, rows in declaration order, "1" where the relation holds."""
    rows = m.features if which == "implements" else [s.name for s in m.scope]
    cols = [a.name for a in m.platform]
    lw = max([len(which)] + [len(r) for r in rows])
    lines = [(f"{which:<{lw}}" + "".join(f" {c}" for c in cols)).rstrip()]
    for r, vals in zip(rows, matrix):
        cells = "".join(f" {('1' if v else ''):<{len(c)}}" for c, v in zip(cols, vals))
        lines.append((f"{r:<{lw}}" + cells).rstrip())
    return "\n".join(lines) + "\n"


def canonical_checks(m: SplModel) -> dict:
    return {"canonical": is_canonical(m.trace),
            "non_redundant": is_non_redundant(m.trace),
            "internally_consistent": is_internally_consistent(m.trace)}


def raw_solve(c, opts: EngineOptions):
    if opts.solver_cmd:
        return solve_external(c, opts.solver_cmd, opts.external, opts.verify, opts.solver)
    return solve(c, opts.solver)


__all__ = ["EngineOptions", "AnalysisReport", "VerdictRow", "analysis_queries",
           "relation_queries", "semantic_verdict", "qbf_verdict", "analyze", "relation_matrix",
           "render_table", "format_emerging", "canonical_checks", "query_key", "raw_solve",
           "TABLES", "ENGINES", "SolverDisagreement"]
