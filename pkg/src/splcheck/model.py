"""SPL data model, the line-oriented model file format and subset vectors."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import AbstractSet, Iterable, Mapping, Sequence, Union

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
SECTIONS = ("features", "components", "scope", "platform", "prov", "req")


class _Bottom:
    """Marker for an unimplementable feature (distinct from an empty set of sets)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()

ComponentSet = frozenset
# An alternatives entry is either BOTTOM or an ordered tuple of distinct component sets.
Alternatives = Union[_Bottom, tuple]


class ModelError(ValueError):
    """Invalid model content."""


class ParseError(ModelError):
    """Model file error carrying a 1-based line and column."""

    def __init__(self, kind: str, message: str, line: int, column: int = 1):
        self.kind = kind
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {kind}: {message}")


class UniverseMismatch(ValueError):
    pass


@dataclass(frozen=True)
class NamedSet:
    """A named specification (feature set) or architecture (component set)."""

    name: str
    members: frozenset

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, item):
        return item in self.members


def members(x) -> frozenset:
    """Member set of a NamedSet or any iterable of names."""
    if isinstance(x, NamedSet):
        return x.members
    return frozenset(x)


@dataclass(frozen=True)
class Traceability:
    prov: Mapping[str, Alternatives]
    req: Mapping[str, Alternatives]

    def __post_init__(self):
        object.__setattr__(self, "prov", MappingProxyType(
            {f: _norm_alts(a) for f, a in self.prov.items()}))
        object.__setattr__(self, "req", MappingProxyType(
            {f: _norm_alts(a) for f, a in self.req.items()}))

    def replace(self, feature: str, prov=None, req=None) -> "Traceability":
        p = dict(self.prov)
        r = dict(self.req)
        if prov is not None:
            p[feature] = prov
        if req is not None:
            r[feature] = req
        return Traceability(p, r)


def _norm_alts(a) -> Alternatives:
    if a is BOTTOM:
        return BOTTOM
    out = []
    for s in a:
        s = frozenset(s)
        if s not in out:
            out.append(s)
    return tuple(out)


@dataclass(frozen=True)
class SplModel:
    features: tuple
    components: tuple
    scope: tuple = ()
    platform: tuple = ()
    trace: Traceability = field(default_factory=lambda: Traceability({}, {}))

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "scope", tuple(self.scope))
        object.__setattr__(self, "platform", tuple(self.platform))
        # fill in defaults: missing prov is Bottom, missing req is "no requirements"
        # an empty prov has no file syntax and behaves exactly like Bottom
        prov = {f: self.trace.prov.get(f, BOTTOM) or BOTTOM for f in self.features}
        req = {f: self.trace.req.get(f, ()) for f in self.features}
        extra = (set(self.trace.prov) | set(self.trace.req)) - set(self.features)
        if extra:
            raise ModelError(f"unknown feature in traceability: {sorted(extra)[0]}")
        object.__setattr__(self, "trace", Traceability(prov, req))
        self._validate()

    def _validate(self):
        _check_unique(self.features, "feature")
        _check_unique(self.components, "component")
        both = set(self.features) & set(self.components)
        if both:
            raise ModelError(f"identifier used as both feature and component: {sorted(both)[0]}")
        fset, cset = set(self.features), set(self.components)
        for kind, entries, universe in (("scope", self.scope, fset), ("platform", self.platform, cset)):
            seen = set()
            for e in entries:
                if not isinstance(e, NamedSet):
                    raise ModelError(f"{kind} entries must be NamedSet")
                bad = e.members - universe
                if bad:
                    raise ModelError(f"unknown identifier in {kind} entry {e.name}: {sorted(bad)[0]}")
                if e.members in seen:
                    raise ModelError(f"duplicate {kind} entry: {e.name}")
                seen.add(e.members)
        _check_unique([e.name for e in self.scope + self.platform], "set name")
        for table in (self.trace.prov, self.trace.req):
            for f, alts in table.items():
                if alts is BOTTOM:
                    continue
                for s in alts:
                    bad = s - cset
                    if bad:
                        raise ModelError(f"unknown identifier in traceability of {f}: {sorted(bad)[0]}")

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def m(self) -> int:
        return len(self.features)

    @cached_property
    def component_index(self) -> dict:
        return {c: i for i, c in enumerate(self.components)}

    @cached_property
    def feature_index(self) -> dict:
        return {f: i for i, f in enumerate(self.features)}

    def prov(self, f: str) -> Alternatives:
        return self.trace.prov[f]

    def req(self, f: str) -> Alternatives:
        return self.trace.req[f]

    def spec(self, name: str) -> NamedSet:
        for s in self.scope:
            if s.name == name:
                return s
        raise KeyError(f"no specification named {name!r}")

    def arch(self, name: str) -> NamedSet:
        for a in self.platform:
            if a.name == name:
                return a
        raise KeyError(f"no architecture named {name!r}")

    def with_trace(self, trace: Traceability) -> "SplModel":
        return SplModel(self.features, self.components, self.scope, self.platform, trace)


def _check_unique(names: Iterable[str], what: str):
    seen = set()
    for n in names:
        if not IDENT.match(n):
            raise ModelError(f"bad {what} identifier: {n!r}")
        if n in seen:
            raise ModelError(f"duplicate {what}: {n}")
        seen.add(n)


# ---- bit vectors ----

@dataclass(frozen=True)
class PropVector:
    bits: tuple
    universe_kind: str

    def __iter__(self):
        return iter(self.bits)

    def __len__(self):
        return len(self.bits)


def prop_vector(s: AbstractSet[str], universe: Sequence[str], kind: str = "component") -> PropVector:
    """Indicator tuple of s against the ordered universe."""
    s = members(s)
    extra = s - set(universe)
    if extra:
        raise ModelError(f"identifier outside universe: {sorted(extra)[0]}")
    return PropVector(tuple(1 if u in s else 0 for u in universe), kind)


def set_of(v: PropVector, universe: Sequence[str]) -> frozenset:
    if len(v.bits) != len(universe):
        raise UniverseMismatch("vector length differs from universe size")
    return frozenset(u for u, b in zip(universe, v.bits) if b)


def subset(a: PropVector, b: PropVector) -> bool:
    if a.universe_kind != b.universe_kind or len(a.bits) != len(b.bits):
        raise UniverseMismatch("vectors index different universes")
    return all(y or not x for x, y in zip(a.bits, b.bits))


# ---- file format ----

def _split_ids(text: str, line: int, col0: int) -> list:
    """Split a comma separated id list, returning (id, column) pairs."""
    out = []
    if not text.strip():
        return out
    pos = 0
    for part in text.split(","):
        stripped = part.strip()
        col = col0 + pos + (len(part) - len(part.lstrip()))
        if not IDENT.match(stripped):
            raise ParseError("syntax error", f"expected identifier, got {stripped!r}", line, col)
        out.append((stripped, col))
        pos += len(part) + 1
    return out


def parse_model(text: str) -> SplModel:
    """Parse a model document; universes keep declaration order."""
    section = None
    seen_sections = set()
    features, components = [], []
    decl = {}  # name -> (kind, line, col)
    raw_sets = {"scope": [], "platform": []}
    raw_trace = {"prov": [], "req": []}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        col0 = indent + 1
        if body.startswith("["):
            m = re.fullmatch(r"\[\s*([a-z]+)\s*\]", body)
            if not m or m.group(1) not in SECTIONS:
                raise ParseError("syntax error", f"unknown section header {body}", lineno, col0)
            section = m.group(1)
            if section in seen_sections:
                raise ParseError("duplicate identifier", f"section [{section}] repeated", lineno, col0)
            seen_sections.add(section)
            continue
        if section is None:
            raise ParseError("syntax error", "content before first section header", lineno, col0)
        if section in ("features", "components"):
            if not IDENT.match(body):
                raise ParseError("syntax error", f"expected identifier, got {body!r}", lineno, col0)
            if body in decl:
                raise ParseError("duplicate identifier", body, lineno, col0)
            decl[body] = (section, lineno, col0)
            (features if section == "features" else components).append(body)
        elif section in ("scope", "platform"):
            if ":" not in body:
                raise ParseError("syntax error", "expected 'NAME: id, ...'", lineno, col0)
            name, rest = body.split(":", 1)
            name = name.strip()
            if not IDENT.match(name):
                raise ParseError("syntax error", f"bad set name {name!r}", lineno, col0)
            ids = _split_ids(rest, lineno, col0 + body.index(":") + 1)
            raw_sets[section].append((name, ids, lineno, col0))
        else:
            if "<-" not in body:
                raise ParseError("syntax error", "expected 'feature <- comp, ...'", lineno, col0)
            lhs, rhs = body.split("<-", 1)
            feat = lhs.strip()
            if not IDENT.match(feat):
                raise ParseError("syntax error", f"bad feature identifier {feat!r}", lineno, col0)
            rhs_col = col0 + body.index("<-") + 2
            if rhs.strip() == "!":
                raw_trace[section].append((feat, BOTTOM, lineno, col0))
            else:
                raw_trace[section].append((feat, _split_ids(rhs, lineno, rhs_col), lineno, col0))

    fset, cset = set(features), set(components)
    scope, platform = [], []
    names = {}
    for kind, target, universe in (("scope", scope, fset), ("platform", platform, cset)):
        seen = {}
        for name, ids, lineno, col in raw_sets[kind]:
            if name in decl or name in names:
                raise ParseError("duplicate identifier", name, lineno, col)
            names[name] = lineno
            mem = set()
            for i, c in ids:
                if i not in universe:
                    raise ParseError("unknown identifier", i, lineno, c)
                if i in mem:
                    raise ParseError("duplicate identifier", f"{i} repeated in {name}", lineno, c)
                mem.add(i)
            key = frozenset(mem)
            if key in seen:
                raise ParseError("duplicate entry", f"{kind} entry {name} equals {seen[key]}", lineno, col)
            seen[key] = name
            target.append(NamedSet(name, key))

    trace = {}
    for kind in ("prov", "req"):
        table = {}
        for feat, ids, lineno, col in raw_trace[kind]:
            if feat not in fset:
                raise ParseError("unknown identifier", feat, lineno, col)
            cur = table.get(feat)
            if ids is BOTTOM:
                if cur is not None:
                    raise ParseError("duplicate entry", f"{kind}({feat}) already has entries", lineno, col)
                table[feat] = BOTTOM
                continue
            if cur is BOTTOM:
                raise ParseError("duplicate entry", f"{kind}({feat}) already declared unimplementable", lineno, col)
            mem = set()
            for i, c in ids:
                if i not in cset:
                    raise ParseError("unknown identifier", i, lineno, c)
                mem.add(i)
            key = frozenset(mem)
            cur = table.setdefault(feat, [])
            if key in cur:
                raise ParseError("duplicate entry", f"{kind}({feat}) repeats an alternative", lineno, col)
            cur.append(key)
        trace[kind] = {f: (v if v is BOTTOM else tuple(v)) for f, v in table.items()}

    return SplModel(tuple(features), tuple(components), tuple(scope), tuple(platform),
                    Traceability(trace["prov"], trace["req"]))


def _fmt_set(s: frozenset, universe: Sequence[str]) -> str:
    return ", ".join(u for u in universe if u in s)


def serialize_model(m: SplModel) -> str:
    out = ["[features]", *m.features, "", "[components]", *m.components, "", "[scope]"]
    for s in m.scope:
        out.append(f"{s.name}: {_fmt_set(s.members, m.features)}".rstrip())
    out += ["", "[platform]"]
    for a in m.platform:
        out.append(f"{a.name}: {_fmt_set(a.members, m.components)}".rstrip())
    for kind, table in (("prov", m.trace.prov), ("req", m.trace.req)):
        out += ["", f"[{kind}]"]
        for f in m.features:
            alts = table[f]
            if alts is BOTTOM:
                out.append(f"{f} <- !")
            else:
                for s in alts:
                    out.append(f"{f} <- {_fmt_set(s, m.components)}".rstrip())
    return "\n".join(out) + "\n"


def load_model(path) -> SplModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())
