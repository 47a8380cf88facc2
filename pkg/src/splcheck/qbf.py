"""Quantified boolean formulas: AST, simplification, prenex form, Tseitin CNF, QDIMACS.

AST nodes are hash-consed: structurally equal nodes are the same object,
so equality and hashing are identity based and cheap.
"""

from __future__ import annotations

import itertools
import threading
import warnings
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

FORALL, EXISTS = "a", "e"


class QbfError(ValueError):
    pass


class ShadowingError(QbfError):
    pass


class QdimacsError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


# ---- AST ----

_table = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Node:
    __slots__ = ("__weakref__", "_free", "_size", "_hq")

    def _init(self):
        self._free = None
        self._size = None
        self._hq = None

    @classmethod
    def _make(cls, key, *fields):
        with _lock:
            node = _table.get(key)
            if node is None:
                node = object.__new__(cls)
                node._init()
                node._set(*fields)
                _table[key] = node
            return node

    def __reduce__(self):
        return (type(self), self._fields())

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


class Const(Node):
    __slots__ = ("value",)

    def __new__(cls, value: bool):
        return cls._make((Const, bool(value)), bool(value))

    def _set(self, value):
        self.value = value

    def _fields(self):
        return (self.value,)

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


class Var(Node):
    """Propositional variable; identity is the index alone.

    The tag is display metadata.  A non-empty tag given at construction
    replaces the tag of the shared node.
    """
    __slots__ = ("index", "tag")

    def __new__(cls, index: int, tag: str = ""):
        if not isinstance(index, int) or index <= 0:
            raise QbfError(f"variable index must be a positive integer, got {index!r}")
        v = cls._make((Var, index), index, tag)
        if tag and v.tag != tag:
            v.tag = tag
        return v

    def _set(self, index, tag):
        self.index = index
        self.tag = tag

    def _fields(self):
        return (self.index, self.tag)

    def __repr__(self):
        return f"x{self.index}"


class Not(Node):
    __slots__ = ("arg",)

    def __new__(cls, arg: Node):
        return cls._make((Not, arg), arg)

    def _set(self, arg):
        self.arg = arg

    def _fields(self):
        return (self.arg,)

    def __repr__(self):
        return f"~{self.arg!r}"


class And(Node):
    __slots__ = ("args",)

    def __new__(cls, args: Iterable[Node]):
        args = tuple(args)
        return cls._make((And, args), args)

    def _set(self, args):
        self.args = args

    def _fields(self):
        return (self.args,)

    def __repr__(self):
        return "(" + " & ".join(map(repr, self.args)) + ")"


class Or(Node):
    __slots__ = ("args",)

    def __new__(cls, args: Iterable[Node]):
        args = tuple(args)
        return cls._make((Or, args), args)

    def _set(self, args):
        self.args = args

    def _fields(self):
        return (self.args,)

    def __repr__(self):
        return "(" + " | ".join(map(repr, self.args)) + ")"


class Implies(Node):
    __slots__ = ("a", "b")

    def __new__(cls, a: Node, b: Node):
        return cls._make((Implies, a, b), a, b)

    def _set(self, a, b):
        self.a = a
        self.b = b

    def _fields(self):
        return (self.a, self.b)

    def __repr__(self):
        return f"({self.a!r} -> {self.b!r})"


class Iff(Node):
    __slots__ = ("a", "b")

    def __new__(cls, a: Node, b: Node):
        return cls._make((Iff, a, b), a, b)

    def _set(self, a, b):
        self.a = a
        self.b = b

    def _fields(self):
        return (self.a, self.b)

    def __repr__(self):
        return f"({self.a!r} <-> {self.b!r})"


class Quant(Node):
    __slots__ = ("kind", "vars", "body")

    def __new__(cls, kind: str, vars: Iterable[Var], body: Node):
        if kind not in (FORALL, EXISTS):
            raise QbfError(f"bad quantifier kind {kind!r}")
        vars = tuple(vars)
        return cls._make((Quant, kind, vars, body), kind, vars, body)

    def _set(self, kind, vars, body):
        self.kind = kind
        self.vars = vars
        self.body = body

    def _fields(self):
        return (self.kind, self.vars, self.body)

    def __repr__(self):
        q = "A" if self.kind == FORALL else "E"
        return f"{q}{','.join(map(repr, self.vars))}.{self.body!r}"


def children(n: Node) -> tuple:
    if isinstance(n, (And, Or)):
        return n.args
    if isinstance(n, Not):
        return (n.arg,)
    if isinstance(n, (Implies, Iff)):
        return (n.a, n.b)
    if isinstance(n, Quant):
        return (n.body,)
    return ()


def free_vars(n: Node) -> frozenset:
    """Free variables, cached on the (shared) node."""
    if n._free is None:
        if isinstance(n, Var):
            n._free = frozenset((n,))
        elif isinstance(n, Quant):
            n._free = free_vars(n.body) - frozenset(n.vars)
        else:
            acc = frozenset()
            for c in children(n):
                acc |= free_vars(c)
            n._free = acc
    return n._free


def node_count(n: Node) -> int:
    """Size of the AST counted as a tree."""
    if n._size is None:
        n._size = 1 + sum(node_count(c) for c in children(n))
    return n._size


def has_quantifier(n: Node) -> bool:
    if n._hq is None:
        n._hq = isinstance(n, Quant) or any(has_quantifier(c) for c in children(n))
    return n._hq


def all_vars(n: Node) -> set:
    """Every variable occurring in n, bound or free."""
    out, stack, seen = set(), [n], set()
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, Var):
            out.add(x)
        elif isinstance(x, Quant):
            out.update(x.vars)
        stack.extend(children(x))
    return out


# ---- smart constructors (constant folding) ----

def not_(x: Node) -> Node:
    if isinstance(x, Const):
        return FALSE if x.value else TRUE
    if isinstance(x, Not):
        return x.arg
    return Not(x)


def _nary(cls, unit: Const, zero: Const, xs) -> Node:
    out, seen = [], set()
    for x in xs:
        if isinstance(x, cls):
            parts = x.args
        else:
            parts = (x,)
        for p in parts:
            if p is zero:
                return zero
            if p is unit or p in seen:
                continue
            if not_(p) in seen:
                return zero
            seen.add(p)
            out.append(p)
    if not out:
        return unit
    if len(out) == 1:
        return out[0]
    return cls(out)


def and_(*xs) -> Node:
    if len(xs) == 1 and not isinstance(xs[0], Node):
        xs = tuple(xs[0])
    return _nary(And, TRUE, FALSE, xs)


def or_(*xs) -> Node:
    if len(xs) == 1 and not isinstance(xs[0], Node):
        xs = tuple(xs[0])
    return _nary(Or, FALSE, TRUE, xs)


def implies(a: Node, b: Node) -> Node:
    if a is TRUE:
        return b
    if a is FALSE or b is TRUE or a is b:
        return TRUE
    if b is FALSE:
        return not_(a)
    return Implies(a, b)


def iff(a: Node, b: Node) -> Node:
    if a is b:
        return TRUE
    if isinstance(a, Const):
        return b if a.value else not_(b)
    if isinstance(b, Const):
        return a if b.value else not_(a)
    if not_(a) is b:
        return FALSE
    return Iff(a, b)


def quant(kind: str, vars: Sequence[Var], body: Node) -> Node:
    vars = tuple(vars)
    if isinstance(body, Const) or not vars:
        return body
    return Quant(kind, vars, body)


def forall(vars, body):
    return quant(FORALL, vars, body)


def exists(vars, body):
    return quant(EXISTS, vars, body)


def lit(v: Var, value) -> Node:
    """v if value is true else not v."""
    return v if value else Not(v)


# ---- formulas ----

@dataclass(frozen=True)
class Block:
    kind: str
    vars: tuple

    def __post_init__(self):
        if self.kind not in (FORALL, EXISTS):
            raise QbfError(f"bad quantifier kind {self.kind!r}")
        object.__setattr__(self, "vars", tuple(self.vars))
        if not self.vars:
            raise QbfError("empty quantifier block")


@dataclass(frozen=True)
class QbfFormula:
    """A body (which may itself contain quantifiers) under a quantifier prefix."""

    body: Node
    prefix: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))

    def as_node(self) -> Node:
        n = self.body
        for b in reversed(self.prefix):
            n = Quant(b.kind, b.vars, n)
        return n

    def free_vars(self) -> frozenset:
        return free_vars(self.as_node())

    def bound_vars(self) -> set:
        """Every variable bound by the prefix or by a quantifier in the body."""
        return {v for b in self.prefix for v in b.vars} | _bound_anywhere(self.body)

    def is_prenex(self) -> bool:
        return not has_quantifier(self.body)

    def is_closed(self) -> bool:
        return not self.free_vars()


def as_formula(f) -> QbfFormula:
    if isinstance(f, QbfFormula):
        return f
    if isinstance(f, Node):
        return QbfFormula(f)
    raise TypeError(f"not a formula: {f!r}")


def _bound_anywhere(n: Node) -> set:
    out, stack, seen = set(), [n], set()
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, Quant):
            out.update(x.vars)
        stack.extend(children(x))
    return out


def rebuild(n: Node, leaf, memo=None) -> Node:
    """Bottom-up rebuild with the smart constructors; leaf maps Var -> Node."""
    if memo is None:
        memo = {}
    stack = [(n, False)]
    while stack:
        x, done = stack.pop()
        if x in memo:
            continue
        kids = children(x)
        if not done and kids:
            stack.append((x, True))
            stack.extend((c, False) for c in kids if c not in memo)
            continue
        if isinstance(x, Var):
            r = leaf(x)
        elif isinstance(x, Const):
            r = x
        elif isinstance(x, Not):
            r = not_(memo[x.arg])
        elif isinstance(x, And):
            r = and_([memo[c] for c in x.args])
        elif isinstance(x, Or):
            r = or_([memo[c] for c in x.args])
        elif isinstance(x, Implies):
            r = implies(memo[x.a], memo[x.b])
        elif isinstance(x, Iff):
            r = iff(memo[x.a], memo[x.b])
        else:
            r = quant(x.kind, tuple(leaf(v) for v in x.vars), memo[x.body])
        memo[x] = r
    return memo[n]


def simplify(f):
    """Constant folding and flattening throughout."""
    if isinstance(f, QbfFormula):
        return QbfFormula(simplify(f.body), f.prefix)
    return rebuild(f, lambda v: v)


def substitute(f, assignment: Mapping[Var, object]):
    """Replace free variables by constants and fold."""
    if not assignment:
        return f
    if isinstance(f, QbfFormula):
        bound = f.bound_vars()
    else:
        bound = _bound_anywhere(f)
    clash = [v for v in assignment if v in bound]
    if clash:
        raise QbfError(f"cannot substitute bound variable {clash[0]!r}")
    consts = {v: (TRUE if val else FALSE) for v, val in assignment.items()}
    body = f.body if isinstance(f, QbfFormula) else f
    out = rebuild(body, lambda v: consts.get(v, v))
    if isinstance(f, QbfFormula):
        return QbfFormula(out, f.prefix)
    return out


def rename(n: Node, mapping: Mapping[Var, Var]) -> Node:
    if not mapping:
        return n
    return rebuild(n, lambda v: mapping.get(v, v))


def evaluate(f, env: Mapping[Var, object] | None = None) -> bool:
    """Truth value by full expansion of every quantifier."""
    env = dict(env or {})
    f = as_formula(f)
    return _eval(f.as_node(), env)


def _eval(n: Node, env: dict) -> bool:
    if isinstance(n, Const):
        return n.value
    if isinstance(n, Var):
        if n not in env:
            raise QbfError(f"unassigned free variable {n!r}")
        return bool(env[n])
    if isinstance(n, Not):
        return not _eval(n.arg, env)
    if isinstance(n, And):
        return all(_eval(c, env) for c in n.args)
    if isinstance(n, Or):
        return any(_eval(c, env) for c in n.args)
    if isinstance(n, Implies):
        return (not _eval(n.a, env)) or _eval(n.b, env)
    if isinstance(n, Iff):
        return _eval(n.a, env) == _eval(n.b, env)
    vs = n.vars
    saved = {v: env[v] for v in vs if v in env}
    results = []
    try:
        for bits in itertools.product((False, True), repeat=len(vs)):
            env.update(zip(vs, bits))
            r = _eval(n.body, env)
            if n.kind == EXISTS and r:
                return True
            if n.kind == FORALL and not r:
                return False
            results.append(r)
        return n.kind == FORALL
    finally:
        for v in vs:
            env.pop(v, None)
        env.update(saved)


# ---- prenex ----

class _Fresh:
    def __init__(self, start: int):
        self.next = start

    def __call__(self, like: Var) -> Var:
        v = Var(self.next, like.tag + "'" if like.tag else "")
        self.next += 1
        return v


def _flip(blocks):
    return [(FORALL if k == EXISTS else EXISTS, vs) for k, vs in blocks]


def _rename_side(blocks, matrix, mapping):
    if not mapping:
        return blocks, matrix
    blocks = [(k, [mapping.get(v, v) for v in vs]) for k, vs in blocks]
    return blocks, rename(matrix, mapping)


def _merge(A, B, op, fresh):
    """Interleave two prenex prefixes for A op B, renaming apart where needed."""
    PA, MA = A
    PB, MB = B
    if not PA and not PB:
        return [], (MA, MB)
    bound_a = {v for _, vs in PA for v in vs}
    bound_b = {v for _, vs in PB for v in vs}
    free_a = free_vars(MA) - bound_a
    free_b = free_vars(MB) - bound_b
    ren_a = {v: fresh(v) for v in sorted(bound_a & free_b, key=lambda v: v.index)}
    PA, MA = _rename_side(PA, MA, ren_a)
    ren_b = {v: fresh(v) for v in sorted(bound_b & free_a, key=lambda v: v.index)}
    PB, MB = _rename_side(PB, MB, ren_b)
    bound_a = {v for _, vs in PA for v in vs}

    share = FORALL if op == "and" else EXISTS
    plan = []  # (kind, a_block or None, b_block or None)
    i = j = 0
    while i < len(PA) or j < len(PB):
        if j >= len(PB):
            plan.append((PA[i][0], PA[i][1], None))
            i += 1
        elif i >= len(PA):
            plan.append((PB[j][0], None, PB[j][1]))
            j += 1
        elif PA[i][0] == PB[j][0]:
            plan.append((PA[i][0], PA[i][1], PB[j][1]))
            i += 1
            j += 1
        elif len(PA) - i >= len(PB) - j:
            plan.append((PA[i][0], PA[i][1], None))
            i += 1
        else:
            plan.append((PB[j][0], None, PB[j][1]))
            j += 1

    # a variable bound on both sides may stay shared only when both binders
    # were unified into one block of the distributing kind
    shared_ok = set()
    for kind, a, b in plan:
        if a is not None and b is not None and kind == share:
            shared_ok |= set(a) & set(b)
    clash = sorted((bound_a & {v for _, vs in PB for v in vs}) - shared_ok, key=lambda v: v.index)
    ren = {v: fresh(v) for v in clash}
    if ren:
        plan = [(k, a, None if b is None else [ren.get(v, v) for v in b]) for k, a, b in plan]
        MB = rename(MB, ren)

    out = []
    for kind, a, b in plan:
        vs = list(a or []) + [v for v in (b or []) if v not in (a or [])]
        if out and out[-1][0] == kind:
            out[-1][1].extend(v for v in vs if v not in out[-1][1])
        else:
            out.append((kind, vs))
    return out, (MA, MB)


def _pnx(n: Node, path: frozenset, fresh):
    if not has_quantifier(n):
        return [], n
    if isinstance(n, Not):
        b, m = _pnx(n.arg, path, fresh)
        return _flip(b), not_(m)
    if isinstance(n, Implies):
        pa, ma = _pnx(n.a, path, fresh)
        pb, mb = _pnx(n.b, path, fresh)
        blocks, (ma, mb) = _merge((_flip(pa), ma), (pb, mb), "or", fresh)
        return blocks, implies(ma, mb)
    if isinstance(n, Iff):
        return _pnx(And((Implies(n.a, n.b), Implies(n.b, n.a))), path, fresh)
    if isinstance(n, (And, Or)):
        op = "and" if isinstance(n, And) else "or"
        build = and_ if op == "and" else or_
        acc_blocks, acc = _pnx(n.args[0], path, fresh)
        parts = [acc]
        for c in n.args[1:]:
            pc, mc = _pnx(c, path, fresh)
            acc_blocks, (ma, mc) = _merge((acc_blocks, build(parts)), (pc, mc), op, fresh)
            parts = [ma, mc]
        return acc_blocks, build(parts)
    if isinstance(n, Quant):
        again = [v for v in n.vars if v in path]
        if again:
            raise ShadowingError(f"variable {again[0]!r} bound twice on one path")
        b, m = _pnx(n.body, path | frozenset(n.vars), fresh)
        vs = list(dict.fromkeys(n.vars))
        if b and b[0][0] == n.kind:
            b[0] = (n.kind, vs + [v for v in b[0][1] if v not in vs])
        else:
            b.insert(0, (n.kind, vs))
        return b, m
    raise QbfError(f"unexpected node {n!r}")


def max_index(f) -> int:
    f = as_formula(f)
    vs = all_vars(f.as_node())
    return max((v.index for v in vs), default=0)


def prenex(f) -> QbfFormula:
    """Move every quantifier into a single prefix, renaming apart on conflicts."""
    f = as_formula(f)
    node = f.as_node()
    fresh = _Fresh(max_index(f) + 1)
    blocks, matrix = _pnx(node, frozenset(), fresh)
    out = []
    for k, vs in blocks:
        if not vs:
            continue
        if out and out[-1].kind == k:
            out[-1] = Block(k, out[-1].vars + tuple(v for v in vs if v not in out[-1].vars))
        else:
            out.append(Block(k, tuple(vs)))
    return QbfFormula(matrix, tuple(out))


def close(f: QbfFormula) -> QbfFormula:
    """Bind leftover free variables in an outermost existential block (with a warning)."""
    free = sorted(f.free_vars(), key=lambda v: v.index)
    if not free:
        return f
    warnings.warn(f"closing {len(free)} free variable(s) existentially", stacklevel=2)
    if f.prefix and f.prefix[0].kind == EXISTS:
        return QbfFormula(f.body, (Block(EXISTS, tuple(free) + f.prefix[0].vars),) + f.prefix[1:])
    return QbfFormula(f.body, (Block(EXISTS, tuple(free)),) + f.prefix)


# ---- CNF ----

@dataclass(frozen=True)
class CnfInstance:
    num_vars: int
    clauses: tuple
    prefix: tuple = ()
    comments: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        object.__setattr__(self, "prefix", tuple((k, tuple(vs)) for k, vs in self.prefix))
        self.validate()

    def validate(self):
        n = self.num_vars
        if not isinstance(n, int) or n < 0:
            raise QbfError("num_vars must be a non-negative integer")
        seen = set()
        last = None
        for k, vs in self.prefix:
            if k not in (FORALL, EXISTS):
                raise QbfError(f"bad quantifier kind {k!r}")
            if not vs:
                raise QbfError("empty quantifier block")
            if k == last:
                raise QbfError("adjacent quantifier blocks of the same kind")
            last = k
            for v in vs:
                if not 1 <= v <= n:
                    raise QbfError(f"prefix variable {v} out of range")
                if v in seen:
                    raise QbfError(f"variable {v} quantified twice")
                seen.add(v)
        for c in self.clauses:
            if not c and self.clauses != ((),):
                raise QbfError("empty clause outside the canonical FALSE instance")
            s = set()
            for l in c:
                if l == 0 or abs(l) > n:
                    raise QbfError(f"literal {l} out of range")
                if -l in s:
                    raise QbfError(f"tautological clause {c}")
                s.add(l)

    @property
    def is_false_instance(self) -> bool:
        return self.clauses == ((),)


def _clean(clause) -> tuple | None:
    out = []
    s = set()
    for l in clause:
        if -l in s:
            return None
        if l not in s:
            s.add(l)
            out.append(l)
    return tuple(out)


def _is_literal(n: Node) -> bool:
    return isinstance(n, Var) or (isinstance(n, Not) and isinstance(n.arg, Var))


def tseitin(f) -> CnfInstance:
    """Full biconditional Tseitin encoding of a closed prenex formula.

    Auxiliary variables are numbered after every formula variable and join an
    innermost existential block.
    """
    f = as_formula(f)
    if not f.is_prenex():
        raise QbfError("tseitin needs a prenex formula")
    if not f.is_closed():
        raise QbfError("tseitin needs a closed formula")
    body = simplify(f.body)
    top = max_index(f)
    prefix = [(b.kind, [v.index for v in b.vars]) for b in f.prefix]
    if body is TRUE:
        return CnfInstance(top, (), _norm_prefix(prefix))
    if body is FALSE:
        return CnfInstance(top, ((),), _norm_prefix(prefix))

    clauses = []
    memo = {}
    counter = [top]

    def new_aux() -> int:
        counter[0] += 1
        return counter[0]

    def litof(n: Node) -> int:
        if isinstance(n, Var):
            return n.index
        if isinstance(n, Not):
            return -litof(n.arg)
        got = memo.get(n)
        if got is not None:
            return got
        if isinstance(n, And):
            ls = [litof(c) for c in n.args]
            t = new_aux()
            for l in ls:
                clauses.append((-t, l))
            clauses.append((t,) + tuple(-l for l in ls))
        elif isinstance(n, Or):
            ls = [litof(c) for c in n.args]
            t = new_aux()
            clauses.append((-t,) + tuple(ls))
            for l in ls:
                clauses.append((t, -l))
        elif isinstance(n, Implies):
            la, lb = litof(n.a), litof(n.b)
            t = new_aux()
            clauses.extend([(-t, -la, lb), (t, la), (t, -lb)])
        elif isinstance(n, Iff):
            la, lb = litof(n.a), litof(n.b)
            t = new_aux()
            clauses.extend([(-t, -la, lb), (-t, la, -lb), (t, la, lb), (t, -la, -lb)])
        else:
            raise QbfError(f"unexpected node in matrix: {n!r}")
        memo[n] = t
        return t

    conj = body.args if isinstance(body, And) else (body,)
    for c in conj:
        if isinstance(c, Or):
            clauses.append(tuple(litof(x) for x in c.args))
        elif isinstance(c, Implies):
            clauses.append((-litof(c.a), litof(c.b)))
        elif isinstance(c, Not) and isinstance(c.arg, And):
            clauses.append(tuple(-litof(x) for x in c.arg.args))
        elif isinstance(c, Not) and isinstance(c.arg, Or):
            clauses.extend((-litof(x),) for x in c.arg.args)
        elif isinstance(c, Not) and isinstance(c.arg, Implies):
            clauses += [(litof(c.arg.a),), (-litof(c.arg.b),)]
        else:
            clauses.append((litof(c),))

    out = []
    for c in clauses:
        c = _clean(c)
        if c is not None:
            out.append(c)
    aux = list(range(top + 1, counter[0] + 1))
    if aux:
        if prefix and prefix[-1][0] == EXISTS:
            prefix[-1] = (EXISTS, prefix[-1][1] + aux)
        else:
            prefix.append((EXISTS, aux))
    return CnfInstance(counter[0], tuple(out), _norm_prefix(prefix))


def _norm_prefix(prefix) -> tuple:
    out = []
    for k, vs in prefix:
        if not vs:
            continue
        if out and out[-1][0] == k:
            out[-1] = (k, out[-1][1] + tuple(vs))
        else:
            out.append((k, tuple(vs)))
    return tuple(out)


def instance_formula(c: CnfInstance) -> QbfFormula:
    """The prenex formula a CNF instance denotes (free matrix variables stay free)."""
    body = and_([or_([lit(Var(abs(l)), l > 0) for l in cl]) for cl in c.clauses])
    prefix = tuple(Block(k, tuple(Var(v) for v in vs)) for k, vs in c.prefix)
    return QbfFormula(body, prefix)


def negate(c: CnfInstance) -> CnfInstance:
    """The instance for the negated formula: flip every block, negate the matrix, re-encode."""
    f = instance_formula(c)
    flipped = tuple(Block(FORALL if b.kind == EXISTS else EXISTS, b.vars) for b in f.prefix)
    mentioned = {abs(l) for cl in c.clauses for l in cl} - {v for _, vs in c.prefix for v in vs}
    if mentioned:
        # free variables were implicitly existential outermost
        flipped = (Block(FORALL, tuple(Var(v) for v in sorted(mentioned))),) + flipped
    neg = tseitin(prenex(QbfFormula(not_(f.body), _merge_adjacent(flipped))))
    if neg.num_vars < c.num_vars:
        neg = CnfInstance(c.num_vars, neg.clauses, neg.prefix)
    return neg


def _merge_adjacent(blocks) -> tuple:
    out = []
    for b in blocks:
        if out and out[-1].kind == b.kind:
            out[-1] = Block(b.kind, out[-1].vars + b.vars)
        else:
            out.append(b)
    return tuple(out)


# ---- QDIMACS ----

def emit_qdimacs(c: CnfInstance, comments: Sequence[str] = ()) -> str:
    lines = [("c " + s).rstrip() if s else "c" for s in comments]
    lines.append(f"p cnf {c.num_vars} {len(c.clauses)}")
    for k, vs in c.prefix:
        lines.append(" ".join([k, *map(str, vs), "0"]))
    for cl in c.clauses:
        lines.append(" ".join([*map(str, cl), "0"]))
    return "\n".join(lines) + "\n"


def parse_qdimacs(text: str) -> CnfInstance:
    comments = []
    header = None
    prefix = []
    clauses = []
    pending = []
    pending_line = 0
    seen = set()
    lines = text.splitlines()
    for no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c") and (len(line) == 1 or line[1].isspace()):
            comments.append(line[2:] if len(line) > 2 else "")
            continue
        tok = line.split()
        if header is None:
            if tok[0] != "p":
                raise QdimacsError("missing problem line", no)
            if len(tok) != 4 or tok[1] != "cnf" or not tok[2].isdigit() or not tok[3].isdigit():
                raise QdimacsError(f"malformed problem line {line!r}", no)
            header = (int(tok[2]), int(tok[3]), no)
            continue
        if tok[0] == "p":
            raise QdimacsError("second problem line", no)
        nv = header[0]
        if tok[0] in (FORALL, EXISTS):
            if clauses or pending:
                raise QdimacsError("quantifier line after the matrix started", no)
            if tok[-1] != "0":
                raise QdimacsError("prefix line does not end with 0", no)
            vs = []
            for t in tok[1:-1]:
                v = _int(t, no)
                if not 1 <= v <= nv:
                    raise QdimacsError(f"literal out of range: {v}", no)
                if v in seen:
                    raise QdimacsError(f"variable {v} quantified twice", no)
                seen.add(v)
                vs.append(v)
            if not vs:
                raise QdimacsError("empty quantifier block", no)
            if prefix and prefix[-1][0] == tok[0]:
                raise QdimacsError("adjacent quantifier blocks of the same kind", no)
            prefix.append((tok[0], tuple(vs)))
            continue
        for t in tok:
            v = _int(t, no)
            if v == 0:
                if len({abs(x) for x in pending}) != len(set(pending)):
                    raise QdimacsError("tautological clause", pending_line or no)
                clauses.append(tuple(pending))
                pending = []
                pending_line = 0
                continue
            if abs(v) > nv:
                raise QdimacsError(f"literal out of range: {v}", no)
            if not pending:
                pending_line = no
            if v not in pending:
                pending.append(v)
    if header is None:
        raise QdimacsError("missing problem line", len(lines) or 1)
    if pending:
        raise QdimacsError("unterminated clause", pending_line)
    if len(clauses) != header[1]:
        raise QdimacsError(f"count mismatch: header declares {header[1]} clauses, matrix has {len(clauses)}",
                           header[2])
    if any(not c for c in clauses) and clauses != [()]:
        raise QdimacsError("empty clause outside the canonical FALSE instance", header[2])
    return CnfInstance(header[0], tuple(clauses), tuple(prefix), comments=tuple(comments))


def _int(t: str, no: int) -> int:
    try:
        return int(t)
    except ValueError:
        raise QdimacsError(f"expected an integer, got {t!r}", no) from None
