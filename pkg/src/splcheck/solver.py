"""Expansion-based QBF solver for CNF instances, and an external solver bridge.

The internal solver branches over the prefix outermost-in (ascending index
inside a block) with unit propagation, universal reduction, elimination of
innermost existential variables whose resolvents are all tautological, and
a bounded memo keyed on the residual clause set.
"""

from __future__ import annotations

import configparser
import os
import shlex
import subprocess
import sys
import tempfile
import time
from collections import OrderedDict
from dataclasses import dataclass, field

from .qbf import EXISTS, FORALL, CnfInstance, as_formula, emit_qdimacs, prenex, tseitin


class CapacityError(RuntimeError):
    """A configured resource cap was exceeded; no verdict is given."""


class SolverProcessError(RuntimeError):
    """The external solver failed or produced no recognisable answer."""


class SolverDisagreement(RuntimeError):
    pass


@dataclass
class SolverConfig:
    max_vars: int = 64
    timeout_s: float = 30.0
    memo_size: int = 1 << 20


@dataclass
class SolveStats:
    expansions: int = 0
    clauses: int = 0
    variables: int = 0
    elapsed: float = 0.0
    memo_hits: int = 0


@dataclass
class SolveResult:
    verdict: bool
    stats: SolveStats = field(default_factory=SolveStats)
    engine: str = "internal"


def counted_vars(c: CnfInstance) -> int:
    """Quantified variables counted against the cap.

    Variables of the innermost existential block (which holds the Tseitin
    auxiliaries) are not counted; the rest is every prefix variable that
    occurs in the matrix.
    """
    occurring = {abs(l) for cl in c.clauses for l in cl}
    blocks = list(c.prefix)
    if blocks and blocks[-1][0] == EXISTS:
        blocks = blocks[:-1]
    return sum(1 for _, vs in blocks for v in vs if v in occurring)


class _Search:
    def __init__(self, c: CnfInstance, config: SolverConfig):
        n = self.num_vars = c.num_vars
        self.level = [0] * (n + 1)
        self.univ = [False] * (n + 1)
        occurring = {abs(l) for cl in c.clauses for l in cl}
        quantified = {v for _, vs in c.prefix for v in vs}
        offset = 1 if occurring - quantified else 0
        # free matrix variables are existential and outermost
        for v in occurring - quantified:
            self.level[v] = 0
        last = len(c.prefix) - 1 + offset
        for i, (k, vs) in enumerate(c.prefix):
            for v in vs:
                self.level[v] = i + offset
                self.univ[v] = k == FORALL
        self.innermost_e = None
        if c.prefix and c.prefix[-1][0] == EXISTS:
            self.innermost_e = last
        elif not c.prefix:
            self.innermost_e = 0
        self.is_inner = [self.innermost_e is not None and self.level[v] == self.innermost_e
                         and not self.univ[v] for v in range(n + 1)]
        self.inner_lits = {}
        self.first = {}
        self.stride = n + 1
        self.memo = OrderedDict()
        self.memo_size = config.memo_size
        self.deadline = time.monotonic() + config.timeout_s
        self.timeout_s = config.timeout_s
        self.stats = SolveStats()

    # -- clause operations --

    def _inner(self, cl):
        ls = self.inner_lits[cl] = tuple(l for l in cl if self.is_inner[abs(l)])
        return ls

    def _first(self, cl):
        """Rank of the outermost variable of a clause (level-major, then index)."""
        if len(self.first) > self.memo_size:
            self.first.clear()
        r = self.first[cl] = min(self.level[abs(l)] * self.stride + abs(l) for l in cl)
        return r

    def reduce(self, clause):
        """Universal reduction; returns () for a conflict."""
        level, univ = self.level, self.univ
        emax = -1
        for l in clause:
            v = l if l > 0 else -l
            if not univ[v] and level[v] > emax:
                emax = level[v]
        if emax < 0:
            return ()
        if all(not univ[abs(l)] or level[abs(l)] < emax for l in clause):
            return clause
        return tuple(l for l in clause if not univ[abs(l)] or level[abs(l)] < emax)

    def assign(self, clauses, lit, units=None, removed=None):
        """Clauses under lit := true, or None on conflict.

        New unit literals are appended to `units`, satisfied clauses to `removed`.
        """
        out = []
        neg = -lit
        for cl in clauses:
            if lit in cl:
                if removed is not None:
                    removed.append(cl)
                continue
            if neg in cl:
                cl = self.reduce(tuple(x for x in cl if x != neg))
                if not cl:
                    return None
                if units is not None and len(cl) == 1:
                    units.append(cl[0])
            out.append(cl)
        return out

    def propagate(self, clauses, removed=None):
        units = [cl[0] for cl in clauses if len(cl) == 1]
        done = set()
        while units:
            u = units.pop()
            if u in done:
                continue
            done.add(u)
            clauses = self.assign(clauses, u, units, removed)
            if clauses is None:
                return None
        return clauses

    def eliminate(self, clauses, removed=None):
        """Drop innermost existential variables that are pure or whose resolvents are all tautologies.

        `removed` lists the clauses dropped since the last closed state; only
        their variables can have become eliminable.  None means check all.
        """
        inner = self.innermost_e
        if inner is None:
            return clauses
        cache = self.inner_lits
        if len(cache) > self.memo_size:
            cache.clear()
        occ = {}
        for idx, cl in enumerate(clauses):
            ls = cache.get(cl)
            if ls is None:
                ls = cache[cl] = tuple(l for l in cl if self.is_inner[abs(l)])
            for l in ls:
                o = occ.get(l)
                if o is None:
                    occ[l] = [idx]
                else:
                    o.append(idx)
        if not occ:
            return clauses
        alive = [True] * len(clauses)
        if removed is None:
            seeds = {abs(l) for l in occ}
        else:
            seeds = {abs(l) for cl in removed for l in cache.get(cl) or self._inner(cl)}
            seeds &= {abs(l) for l in occ}
        queue = sorted(seeds, reverse=True)
        queued = set(queue)
        dropped = False
        while queue:
            v = queue.pop()
            queued.discard(v)
            p = [i for i in occ.get(v, ()) if alive[i]]
            q = [i for i in occ.get(-v, ()) if alive[i]]
            if p and q and not _blocked(clauses, v, p, q):
                continue
            if not p and not q:
                continue
            dropped = True
            for idx in p + q:
                alive[idx] = False
                for l in cache[clauses[idx]]:
                    w = l if l > 0 else -l
                    if w != v and w not in queued:
                        queue.append(w)
                        queued.add(w)
        if not dropped:
            return clauses
        return [cl for cl, keep in zip(clauses, alive) if keep]

    # -- search --

    def run(self, clauses) -> bool:
        clauses = [self.reduce(cl) for cl in clauses]
        if any(not cl for cl in clauses):
            return False
        return self.solve(clauses)

    def solve(self, clauses, removed=None) -> bool:
        clauses = self.propagate(clauses, removed)
        if clauses is None:
            return False
        clauses = self.eliminate(clauses, removed)
        if not clauses:
            return True
        parts = _components(clauses, self.num_vars)
        if len(parts) > 1:
            # variable-disjoint parts are independent closed subproblems
            parts.sort(key=len)
            return all(self.solve(p, []) for p in parts)
        key = frozenset(clauses)
        memo = self.memo
        hit = memo.get(key)
        if hit is not None:
            memo.move_to_end(key)
            self.stats.memo_hits += 1
            return hit
        self.stats.expansions += 1
        if self.stats.expansions & 255 == 1 and time.monotonic() > self.deadline:
            raise CapacityError(f"time limit of {self.timeout_s:g} s exceeded")
        first = self.first
        best = min(first[cl] if cl in first else self._first(cl) for cl in clauses)
        v = best % self.stride
        if self.univ[v]:
            res = True
            for val in (-v, v):
                rem = []
                sub = self.assign(clauses, val, removed=rem)
                if sub is None or not self.solve(sub, rem):
                    res = False
                    break
        else:
            res = False
            for val in (v, -v):
                rem = []
                sub = self.assign(clauses, val, removed=rem)
                if sub is not None and self.solve(sub, rem):
                    res = True
                    break
        memo[key] = res
        if len(memo) > self.memo_size:
            memo.popitem(last=False)
        return res


def _blocked(clauses, v, p, q):
    if len(p) * len(q) > 256:
        return False
    for i in p:
        neg = {-x for x in clauses[i] if x != v}
        for j in q:
            if neg.isdisjoint(clauses[j]):
                return False
    return True


def _components(clauses, num_vars):
    parent = list(range(num_vars + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = x = parent[parent[x]]
        return x

    for cl in clauses:
        r = find(abs(cl[0]))
        for l in cl[1:]:
            t = find(abs(l))
            if t != r:
                parent[t] = r
    groups = {}
    for cl in clauses:
        groups.setdefault(find(abs(cl[0])), []).append(cl)
    return list(groups.values())


def solve(c: CnfInstance, config: SolverConfig | None = None,
          counted: int | None = None) -> SolveResult:
    """Decide a closed QBF instance with the internal solver.

    `counted` overrides the number of variables checked against the cap
    (solve_formula passes the quantified variables of the source formula).
    """
    config = config or SolverConfig()
    start = time.perf_counter()
    if counted is None:
        counted = counted_vars(c)
    if counted > config.max_vars:
        raise CapacityError(f"{counted} quantified variables exceed the cap of {config.max_vars}")
    stats = None
    if c.is_false_instance:
        verdict = False
        stats = SolveStats()
    else:
        search = _Search(c, config)
        limit = sys.getrecursionlimit()
        need = 4 * c.num_vars + 200
        if need > limit:
            sys.setrecursionlimit(need)
        try:
            verdict = search.run(list(c.clauses))
        finally:
            if need > limit:
                sys.setrecursionlimit(limit)
        stats = search.stats
    stats.clauses = len(c.clauses)
    stats.variables = counted
    stats.elapsed = time.perf_counter() - start
    return SolveResult(verdict, stats, "internal")


def solve_formula(f, config: SolverConfig | None = None) -> SolveResult:
    """solve(tseitin(prenex(f))), with the cap applied to the distinct quantified variables of f.

    Prenexing renames quantifier copies apart, so counting its output would
    charge one logical tuple many times over.
    """
    f = as_formula(f)
    config = config or SolverConfig()
    counted = len(f.bound_vars())
    if counted > config.max_vars:
        raise CapacityError(f"{counted} quantified variables exceed the cap of {config.max_vars}")
    return solve(tseitin(prenex(f)), config, counted=counted)


# ---- external bridge ----

@dataclass
class ExternalConfig:
    exit_true: int = 10
    exit_false: int = 20
    timeout_s: float = 30.0


def load_config(path) -> ExternalConfig:
    """Read `[solver]` keys exit_true / exit_false / timeout_s from an INI file."""
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    cfg = ExternalConfig()
    if cp.has_section("solver"):
        sec = cp["solver"]
        cfg.exit_true = sec.getint("exit_true", cfg.exit_true)
        cfg.exit_false = sec.getint("exit_false", cfg.exit_false)
        cfg.timeout_s = sec.getfloat("timeout_s", cfg.timeout_s)
    return cfg


def _parse_output(text: str):
    for line in text.splitlines():
        tok = line.strip().split()
        if len(tok) >= 3 and tok[0] == "s" and tok[1] == "cnf" and tok[2] in ("0", "1"):
            return tok[2] == "1"
    words = {w.strip().upper() for w in text.split()}
    if words & {"TRUE", "SAT", "SATISFIABLE"} and not words & {"FALSE", "UNSAT", "UNSATISFIABLE"}:
        return True
    if words & {"FALSE", "UNSAT", "UNSATISFIABLE"} and not words & {"TRUE", "SAT", "SATISFIABLE"}:
        return False
    return None


def solve_external(c: CnfInstance, solver_command: str, config: ExternalConfig | None = None,
                   verify: bool = False, internal: SolverConfig | None = None) -> SolveResult:
    """Run an external QDIMACS solver on a temporary file.

    The path replaces a `{}` placeholder in the command or is appended.
    Exit codes map to verdicts per the config, otherwise the standard
    `s cnf 0|1` line or a TRUE/FALSE word on stdout is used.
    """
    config = config or ExternalConfig()
    argv = shlex.split(solver_command)
    if not argv:
        raise SolverProcessError("empty solver command")
    fd, path = tempfile.mkstemp(suffix=".qdimacs")
    start = time.perf_counter()
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(emit_qdimacs(c))
        if any("{}" in a for a in argv):
            argv = [a.replace("{}", path) for a in argv]
        else:
            argv = argv + [path]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=config.timeout_s)
        except FileNotFoundError as e:
            raise SolverProcessError(f"process failure: {e}") from e
        except subprocess.TimeoutExpired:
            raise CapacityError(f"external solver exceeded {config.timeout_s:g} s")
        except OSError as e:
            raise SolverProcessError(f"process failure: {e}") from e
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass
    if proc.returncode == config.exit_true:
        verdict = True
    elif proc.returncode == config.exit_false:
        verdict = False
    else:
        verdict = _parse_output(proc.stdout)
        if verdict is None:
            raise SolverProcessError(
                f"unparseable output from {argv[0]} (exit status {proc.returncode})")
    stats = SolveStats(clauses=len(c.clauses), elapsed=time.perf_counter() - start)
    result = SolveResult(verdict, stats, f"external({os.path.basename(argv[0])})")
    if verify:
        ref = solve(c, internal)
        if ref.verdict != verdict:
            raise SolverDisagreement(
                f"external solver says {verdict}, internal solver says {ref.verdict}")
    return result
