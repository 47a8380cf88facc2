"""splcheck command line.

Exit status: 0 success, 1 engine disagreement, 2 input error,
3 resource cap exceeded or external solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import semantics as sem
from .canonize import canonize_model
from .encoder import EncodingContext, EncodingError, Query, encode_property
from .model import (ModelError, NamedSet, ParseError, SplModel, UniverseMismatch, load_model,
                    serialize_model)
from .qbf import QbfError, QdimacsError, as_formula, emit_qdimacs, parse_qdimacs, prenex, tseitin
from .report import (TABLES, EngineOptions, analyze, canonical_checks, format_emerging,
                     qbf_verdict, raw_solve, relation_matrix, render_table, semantic_verdict)
from .solver import (CapacityError, SolverConfig, SolverDisagreement, SolverProcessError,
                     load_config)

EXIT_OK, EXIT_DISAGREE, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


# property name -> (query kind or None, argument kinds)
PROPERTIES = {
    "complete": ("complete", ()),
    "sound": ("sound", ()),
    "tcf": ("tcf", ()),
    "existentially-explicit": ("existentially_explicit", ("spec",)),
    "universally-explicit": ("universally_explicit", ("spec",)),
    "unique-implementation": ("unique_implementation", ("spec",)),
    "extendable": ("extendable", ("spec",)),
    "extends": ("extends", ("spec", "spec")),
    "common": ("common", ("element",)),
    "live": ("live", ("element",)),
    "dead": ("dead", ("element",)),
    "superfluous": ("superfluous", ("component",)),
    "redundant": ("redundant", ("component",)),
    "critical": ("critical", ("component", "feature")),
    "implements": ("implements", ("arch", "feature")),
    "realizes": ("realizes", ("arch", "spec")),
    "covers": ("covers", ("arch", "spec")),
    # set-valued or structural; evaluated directly
    "emerging": (None, ("spec",)),
    "products": (None, ()),
    "status": (None, ("element",)),
    "canonical": (None, ()),
    "non-redundant": (None, ()),
    "internally-consistent": (None, ()),
}


def _engines(name: str) -> tuple:
    return {"semantic": ("semantic",), "qbf": ("qbf",), "both": ("semantic", "qbf")}[name]


def _options(args) -> EngineOptions:
    opts = EngineOptions(engines=_engines(getattr(args, "engine", "both")),
                         covers_mode=getattr(args, "covers_mode", "definition"),
                         solver_cmd=getattr(args, "solver_cmd", None),
                         verify=getattr(args, "verify", False),
                         allow_raw=getattr(args, "allow_raw", False))
    if getattr(args, "config", None):
        opts.external = load_config(args.config)
    cfg = SolverConfig()
    if getattr(args, "max_qbf_vars", None) is not None:
        cfg.max_vars = args.max_qbf_vars
    if getattr(args, "timeout_ms", None) is not None:
        cfg.timeout_s = args.timeout_ms / 1000.0
        opts.external.timeout_s = cfg.timeout_s
    opts.solver = cfg
    return opts


def _load(args):
    """Load the model and canonize it unless told not to; returns (model, trace or None)."""
    m = load_model(args.model)
    if getattr(args, "no_canonize", False):
        return m, None
    m2, trace = canonize_model(m, getattr(args, "strict_paper_canonization", False))
    return m2, trace


def _spec_arg(m: SplModel, text: str) -> NamedSet:
    """A scope entry name, or a comma-separated feature list ("" or "-" for the empty set)."""
    names = {s.name: s for s in m.scope}
    if text in names:
        return names[text]
    ids = frozenset(x.strip() for x in text.split(",") if x.strip() and x.strip() != "-")
    bad = ids - set(m.features)
    if bad:
        raise ModelError(f"unknown specification or feature: {sorted(bad)[0]}")
    return NamedSet("{" + ",".join(f for f in m.features if f in ids) + "}", ids)


def _arch_arg(m: SplModel, text: str) -> NamedSet:
    names = {a.name: a for a in m.platform}
    if text in names:
        return names[text]
    ids = frozenset(x.strip() for x in text.split(",") if x.strip() and x.strip() != "-")
    bad = ids - set(m.components)
    if bad:
        raise ModelError(f"unknown architecture or component: {sorted(bad)[0]}")
    return NamedSet("{" + ",".join(c for c in m.components if c in ids) + "}", ids)


def _build_query(m: SplModel, prop: str, raw: list, covers_mode: str, proper: bool):
    if prop not in PROPERTIES:
        raise UsageError(f"unknown property {prop!r}; choose from {', '.join(PROPERTIES)}")
    kind, kinds = PROPERTIES[prop]
    if len(raw) != len(kinds):
        raise UsageError(f"{prop} takes {len(kinds)} argument(s), got {len(raw)}")
    vals = []
    for k, text in zip(kinds, raw):
        if k == "spec":
            vals.append(_spec_arg(m, text))
        elif k == "arch":
            vals.append(_arch_arg(m, text))
        elif k == "feature":
            if text not in m.feature_index:
                raise ModelError(f"unknown feature: {text}")
            vals.append(text)
        elif k == "component":
            if text not in m.component_index:
                raise ModelError(f"unknown component: {text}")
            vals.append(text)
        else:
            if text not in m.feature_index and text not in m.component_index:
                raise ModelError(f"unknown element: {text}")
            vals.append(text)
    if kind == "extends":
        vals.append(proper)
    if kind is None:
        return None, vals
    return Query(kind, tuple(vals), covers_mode), vals


def _emit(args, text: str):
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---- commands ----

def cmd_analyze(args) -> int:
    m, trace = _load(args)
    opts = _options(args)
    rep = analyze(m, opts, model_id=os.path.basename(args.model), canonized=trace is not None,
                  canonization_steps=len(trace) if trace else 0)
    _emit(args, rep.to_json() if args.format == "json" else rep.to_text())
    return EXIT_DISAGREE if rep.disagreement else EXIT_OK


def cmd_canonize(args) -> int:
    m = load_model(args.model)
    m2, trace = canonize_model(m, args.strict_paper_canonization)
    _emit(args, serialize_model(m2))
    if args.trace:
        for st in trace:
            print(st.describe(), file=sys.stderr)
        print(f"{len(trace)} steps", file=sys.stderr)
    return EXIT_OK


def cmd_table(args) -> int:
    m, _ = _load(args)
    opts = _options(args)
    mats = {e: relation_matrix(m, args.which, e, opts) for e in opts.engines}
    first = next(iter(mats.values()))
    text = render_table(m, args.which, first)
    if args.which == "covers":
        text = f"# covers mode: {opts.covers_mode}\n" + text
    _emit(args, text)
    if any(mat != first for mat in mats.values()):
        print("engines disagree on this table", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


def _tf(v: bool) -> str:
    return "true" if v else "false"


def cmd_query(args) -> int:
    m, _ = _load(args)
    opts = _options(args)
    q, vals = _build_query(m, args.property, args.args, opts.covers_mode, args.proper)
    lines = []
    rc = EXIT_OK
    if q is None:
        p = args.property
        if p == "emerging":
            sem._in_scope(m, vals[0])
            recs = sem.emerging(m, vals[0])
            lines += format_emerging(m, recs).split("; ") if recs else ["(none)"]
        elif p == "products":
            lines += [f"<{x.spec.name}, {x.arch.name}>" for x in sem.products(m)]
        elif p == "status":
            st = sem.element_status(m, vals[0])
            lines.append(st.status + (" (vacuous: no products)" if st.vacuous else ""))
        else:
            lines.append(_tf(canonical_checks(m)[p.replace("-", "_")]))
        _emit(args, "\n".join(lines) + "\n")
        return rc
    label = " ".join([args.property] + list(args.args))
    if args.explain and "qbf" in opts.engines:
        f = encode_property(EncodingContext(m, opts.allow_raw), q)
        lines.append(f"formula: {f.as_node()!r}")
    verdicts = {}
    for eng in opts.engines:
        verdicts[eng] = semantic_verdict(m, q) if eng == "semantic" else qbf_verdict(m, q, opts)
    if len(set(verdicts.values())) > 1:
        lines.append(f"{label}: DISAGREEMENT " + " ".join(f"{e}={_tf(v)}" for e, v in verdicts.items()))
        rc = EXIT_DISAGREE
    else:
        v = next(iter(verdicts.values()))
        lines.append(f"{label}: {_tf(v)}")
        if q.kind == "covers":
            lines.append(f"covers mode: {q.mode}")
        lines += _witness_lines(m, q)
    _emit(args, "\n".join(lines) + "\n")
    return rc


def _witness_lines(m: SplModel, q: Query) -> list:
    k, a = q.kind, q.args
    if k == "unique_implementation":
        return ["covering: " + (", ".join(x.name for x in sem.covering_architectures(m, a[0])) or "(none)")]
    if k in ("existentially_explicit", "universally_explicit"):
        return ["realizing: " + (", ".join(x.name for x in sem.realizing_architectures(m, a[0])) or "(none)")]
    if k in ("realizes", "covers"):
        prov = sem.provided_by(m, a[0])
        return ["provided: " + (", ".join(f for f in m.features if f in prov) or "(none)")]
    if k == "critical":
        imps = [x.name for x in m.platform if sem.implements(m, x, a[1])]
        return ["implementing: " + (", ".join(imps) or "(none)")]
    return []


def cmd_encode(args) -> int:
    m, _ = _load(args)
    q, _vals = _build_query(m, args.property, args.args, args.covers_mode, args.proper)
    if q is None:
        raise UsageError(f"{args.property} has no formula encoding")
    ctx = EncodingContext(m, args.allow_raw)
    f = as_formula(encode_property(ctx, q))
    p = prenex(f)
    c = tseitin(p)
    comments = [f"query: {' '.join([args.property] + list(args.args))}"]
    if q.kind == "covers":
        comments.append(f"covers mode: {q.mode}")
    comments += ctx.legend_lines(p, c.num_vars)
    _emit(args, emit_qdimacs(c, comments))
    return EXIT_OK


def cmd_solve(args) -> int:
    with open(args.instance, encoding="utf-8") as fh:
        c = parse_qdimacs(fh.read())
    opts = _options(args)
    res = raw_solve(c, opts)
    _emit(args, f"{_tf(res.verdict)}\n")
    st = res.stats
    print(f"engine={res.engine} clauses={st.clauses} variables={st.variables} "
          f"expansions={st.expansions} elapsed={st.elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


# ---- parser ----

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--engine", choices=("semantic", "qbf", "both"), default="both")
    common.add_argument("--no-canonize", action="store_true")
    common.add_argument("--strict-paper-canonization", action="store_true",
                        help="rule 3 removes the smaller req set, as literally stated")
    common.add_argument("--covers-mode", choices=("definition", "lemma"), default="definition")
    common.add_argument("--solver-cmd", help="external QDIMACS solver command; {} is the file path")
    common.add_argument("--config", help="INI file with [solver] exit_true, exit_false, timeout_s")
    common.add_argument("--verify", action="store_true",
                        help="cross-check external verdicts with the internal solver")
    common.add_argument("--timeout-ms", type=int)
    common.add_argument("--max-qbf-vars", type=int)
    common.add_argument("--allow-raw", action="store_true",
                        help="encode a non-canonical model as is")
    common.add_argument("-o", "--output")

    p = argparse.ArgumentParser(prog="splcheck", description="Product line analysis via QBF")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="run every analysis")
    a.add_argument("model")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("canonize", help="write the canonized model")
    c.add_argument("model")
    c.add_argument("--strict-paper-canonization", action="store_true")
    c.add_argument("--trace", action="store_true", help="print the rewrite steps to stderr")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_canonize)

    t = sub.add_parser("table", parents=[common], help="print a relation matrix")
    t.add_argument("model")
    t.add_argument("which", choices=TABLES)
    t.set_defaults(func=cmd_table)

    for name, func, hlp in (("query", cmd_query, "decide one property"),
                            ("encode", cmd_encode, "emit the QDIMACS encoding of a property")):
        q = sub.add_parser(name, parents=[common], help=hlp)
        q.add_argument("model")
        q.add_argument("property")
        q.add_argument("args", nargs="*")
        q.add_argument("--proper", action="store_true", help="extends: require a proper superset")
        if name == "query":
            q.add_argument("--explain", action="store_true", help="print the generated formula")
        q.set_defaults(func=func)

    s = sub.add_parser("solve", parents=[common], help="decide a QDIMACS instance")
    s.add_argument("instance")
    s.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverDisagreement as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DISAGREE
    except (CapacityError, SolverProcessError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ParseError, QdimacsError, ModelError, UniverseMismatch, EncodingError, QbfError,
            UsageError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
