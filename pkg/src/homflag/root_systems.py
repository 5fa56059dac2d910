"""Abstract root systems, equal-rank subsystems, and Condition (A).

Roots are tuples of Python ints in the standard realizations (A_n in
R^{n+1}, B/C/D_n in R^n, G2 inside the sum-zero plane of R^3).  F4 is stored
with all coordinates doubled so the spin roots (+-e1+-e2+-e3+-e4)/2 stay
integral; membership tests, sums and differences are unaffected by the
common scale.  All arithmetic is exact.

Condition (A) for a pair (g, h) with rk h = rk g: for every two roots
alpha, beta of m with alpha != +-beta, alpha+beta or alpha-beta is a root
of g.  The positive classification list is Wallach's.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidRank, UnsupportedType

Root = tuple


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _neg(a):
    return tuple(-x for x in a)


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _roots_a(n):
    e = lambda i: tuple(1 if k == i else 0 for k in range(n + 1))
    roots = [_sub(e(i), e(j)) for i in range(n + 1) for j in range(n + 1) if i != j]
    simple = [_sub(e(i), e(i + 1)) for i in range(n)]
    return roots, simple


def _roots_bcd(n, family):
    e = lambda i: tuple(1 if k == i else 0 for k in range(n))
    roots = []
    for i in range(n):
        for j in range(i + 1, n):
            for si in (1, -1):
                for sj in (1, -1):
                    roots.append(tuple(si * a + sj * b for a, b in zip(e(i), e(j))))
    simple = [_sub(e(i), e(i + 1)) for i in range(n - 1)]
    if family == "B":
        roots += [e(i) for i in range(n)] + [_neg(e(i)) for i in range(n)]
        simple.append(e(n - 1))
    elif family == "C":
        roots += [tuple(2 * x for x in e(i)) for i in range(n)]
        roots += [tuple(-2 * x for x in e(i)) for i in range(n)]
        simple.append(tuple(2 * x for x in e(n - 1)))
    else:  # D
        simple.append(_add(e(n - 2), e(n - 1)))
    return roots, simple


def _roots_g2():
    short = [(1, -1, 0), (0, 1, -1), (1, 0, -1)]
    long = [(2, -1, -1), (-1, 2, -1), (-1, -1, 2)]
    roots = []
    for r in short + long:
        roots += [r, _neg(r)]
    simple = [(1, -1, 0), (-2, 1, 1)]
    return roots, simple


def _roots_f4():
    # Doubled coordinates: long = +-2e_i +- 2e_j, short = +-2e_i and
    # +-e1 +- e2 +- e3 +- e4.
    roots = []
    for i in range(4):
        v = [0, 0, 0, 0]
        v[i] = 2
        roots += [tuple(v), _neg(tuple(v))]
        for j in range(i + 1, 4):
            for si in (1, -1):
                for sj in (1, -1):
                    w = [0, 0, 0, 0]
                    w[i], w[j] = 2 * si, 2 * sj
                    roots.append(tuple(w))
    for signs in itertools.product((1, -1), repeat=4):
        roots.append(signs)
    simple = [(0, 2, -2, 0), (0, 0, 2, -2), (0, 0, 0, 2), (1, -1, -1, -1)]
    return roots, simple


@dataclass(frozen=True)
class RootSystem:
    """A root system with exact integer coordinates."""

    family: str
    rank: int
    roots: frozenset
    simple_roots: tuple
    ambient_dim: int

    @property
    def label(self):
        return f"{self.family.lower()}{self.rank}" if self.family in "ABCD" \
            else self.family.lower()

    @property
    def extended_diagram(self):
        """Affine diagram: nodes = simple roots + lowest root, edge counts."""
        nodes = list(self.simple_roots) + [_neg(highest_root(
            self.roots, self.simple_roots))]
        k = len(nodes)
        adj = [[0] * k for _ in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                a, b = nodes[i], nodes[j]
                nij = (4 * _dot(a, b) * _dot(a, b)) // (_dot(a, a) * _dot(b, b))
                adj[i][j] = adj[j][i] = nij
        return tuple(nodes), tuple(tuple(r) for r in adj)


def build_root_system(family, rank):
    """Standard realization of a simple root system.

    Supported families: A (rank >= 1), B (>= 2), C (>= 2), D (>= 3),
    G2, F4.
    """
    fam = family.upper().rstrip("24") if family.upper() in ("G2", "F4") \
        else family.upper()
    if fam == "G":
        if rank != 2:
            raise InvalidRank("G2 has rank 2")
        roots, simple = _roots_g2()
        fam_out, dim = "G2", 3
    elif fam == "F":
        if rank != 4:
            raise InvalidRank("F4 has rank 4")
        roots, simple = _roots_f4()
        fam_out, dim = "F4", 4
    elif fam == "A":
        if rank < 1:
            raise InvalidRank("A_n requires n >= 1")
        roots, simple = _roots_a(rank)
        fam_out, dim = "A", rank + 1
    elif fam in ("B", "C"):
        if rank < 2:
            raise InvalidRank(f"{fam}_n requires n >= 2")
        roots, simple = _roots_bcd(rank, fam)
        fam_out, dim = fam, rank
    elif fam == "D":
        if rank < 3:
            raise InvalidRank("D_n requires n >= 3")
        roots, simple = _roots_bcd(rank, "D")
        fam_out, dim = "D", rank
    else:
        raise UnsupportedType(f"unsupported family {family!r}")
    return RootSystem(family=fam_out, rank=rank, roots=frozenset(roots),
                      simple_roots=tuple(simple), ambient_dim=dim)


def product(*systems):
    """Orthogonal juxtaposition of root systems (reducible algebra)."""
    dims = [rs.ambient_dim for rs in systems]
    total = sum(dims)
    roots, simple = [], []
    off = 0
    for rs, d in zip(systems, dims):
        pad = lambda r: (0,) * off + tuple(r) + (0,) * (total - off - d)
        roots += [pad(r) for r in rs.roots]
        simple += [pad(r) for r in rs.simple_roots]
        off += d
    label = "x".join(rs.label for rs in systems)
    return RootSystem(family=label, rank=sum(rs.rank for rs in systems),
                      roots=frozenset(roots), simple_roots=tuple(simple),
                      ambient_dim=total)


# ---------------------------------------------------------------------------
# Subsystem machinery (exact)
# ---------------------------------------------------------------------------

def closure(generators, ambient):
    """Smallest symmetric closed subset of ambient containing generators."""
    out = set()
    for g in generators:
        out.add(tuple(g))
        out.add(_neg(g))
    frontier = list(out)
    while frontier:
        fresh = []
        for a in frontier:
            for b in list(out):
                s = _add(a, b)
                if s in ambient and s not in out:
                    out.add(s)
                    out.add(_neg(s))
                    fresh.append(s)
                    fresh.append(_neg(s))
        frontier = fresh
    return frozenset(out)


def _generic_functional(dim):
    return tuple(4001 ** k for k in range(dim))


def simple_system(roots, dim):
    """Simple roots of a closed subsystem w.r.t. a fixed generic order."""
    if not roots:
        return ()
    phi = _generic_functional(dim)
    pos = sorted((r for r in roots if _dot(r, phi) > 0),
                 key=lambda r: _dot(r, phi))
    pos_set = set(pos)
    simple = []
    for r in pos:
        decomposable = any(
            _sub(r, s) in pos_set for s in pos if s != r and _dot(s, phi) < _dot(r, phi)
        )
        if not decomposable:
            simple.append(r)
    return tuple(simple)


def highest_root(roots, base):
    """Greedy ascent to the maximal root of an irreducible closed set."""
    roots = set(roots)
    theta = next(iter(base))
    changed = True
    while changed:
        changed = False
        for a in base:
            if _add(theta, a) in roots:
                theta = _add(theta, a)
                changed = True
    return theta


def _components(base):
    """Connected components of a simple-root set by non-orthogonality."""
    base = list(base)
    comps, unused = [], set(range(len(base)))
    while unused:
        stack = [unused.pop()]
        comp = {stack[0]}
        while stack:
            i = stack.pop()
            for j in list(unused):
                if _dot(base[i], base[j]) != 0:
                    unused.discard(j)
                    comp.add(j)
                    stack.append(j)
        comps.append(tuple(base[i] for i in sorted(comp)))
    return comps


def _int_rank(rows):
    """Exact rank of an integer matrix (fraction-free elimination)."""
    mat = [list(r) for r in rows]
    rank = 0
    cols = len(mat[0]) if mat else 0
    row = 0
    for col in range(cols):
        piv = next((r for r in range(row, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        for r in range(len(mat)):
            if r != row and mat[r][col] != 0:
                f1, f2 = mat[row][col], mat[r][col]
                mat[r] = [f1 * x - f2 * y for x, y in zip(mat[r], mat[row])]
        row += 1
        rank += 1
        if row == len(mat):
            break
    return rank


@dataclass(frozen=True)
class SubSystem:
    """A closed symmetric subset Delta_h with its torus corank.

    The subalgebra h consists of the full Cartan subalgebra, the root planes
    of Delta_h minus ``corank`` torus directions moved into m-side counting;
    concretely corank = rk g - lattice rank of Delta_h.
    """

    parent: RootSystem
    roots_h: frozenset
    corank: int

    @property
    def roots_m(self):
        return frozenset(self.parent.roots - self.roots_h)

    @property
    def dim_m(self):
        return len(self.roots_m)

    def validate(self):
        for a in self.roots_h:
            assert _neg(a) in self.roots_h, "not symmetric"
            for b in self.roots_h:
                s = _add(a, b)
                if s in self.parent.roots:
                    assert s in self.roots_h, "not closed"
        return True

    @property
    def signature(self):
        """Isometry invariant: sorted multiset of per-root pairing profiles."""
        rows = []
        for a in sorted(self.roots_h):
            prof = tuple(sorted(_dot(a, b) for b in self.roots_h))
            rows.append((_dot(a, a), prof))
        return (self.corank, tuple(sorted(rows)))

    @property
    def label(self):
        comps = _components(simple_system(self.roots_h, self.parent.ambient_dim))
        names = sorted((_component_label(c, self.roots_h) for c in comps),
                       key=lambda s: (-int(s[1:]), s[0]))
        if self.corank == 1:
            names.append("R")
        elif self.corank > 1:
            names.append(f"R^{self.corank}")
        return "+".join(names) if names else "0"


def _component_label(comp_base, ambient_h):
    sub = closure(comp_base, ambient_h)
    r = len(comp_base)
    n = len(sub)
    if r == 1:
        return "a1"
    lens = sorted(_dot(a, a) for a in sub)
    n_max = sum(1 for v in lens if v == lens[-1])
    if n == 12 and r == 2 and lens[0] != lens[-1]:
        return "g2"
    if n == 48 and r == 4:
        return "f4"
    if n == r * (r + 1):
        return f"a{r}"
    if n == 2 * r * (r - 1):
        return f"d{r}"
    if n == 2 * r * r:
        if r == 2:
            return "c2"  # b2 = c2; pick the symplectic name
        return f"c{r}" if n_max == 2 * r else f"b{r}"
    return f"?r{r}n{n}"


def equal_rank_subsystems(rs, max_corank):
    """All proper closed subsystems reachable by iterated extended-diagram
    node deletion (corank preserved) and simple-node deletion (corank +1),
    one representative per isometry signature.
    """
    if max_corank > rs.rank:
        raise InvalidRank("max_corank exceeds the rank")
    seen = {}
    queue = [frozenset(rs.roots)]
    visited = {frozenset(rs.roots)}
    while queue:
        cur = queue.pop()
        base = simple_system(cur, rs.ambient_dim)
        corank = rs.rank - _int_rank(base) if base else rs.rank
        if cur != rs.roots and corank <= max_corank:
            sub = SubSystem(parent=rs, roots_h=cur, corank=corank)
            seen.setdefault(sub.signature, sub)

        nxt = []
        # Borel-de Siebenthal: extend one component, delete one of its nodes.
        for comp in _components(base):
            comp_roots = closure(comp, cur)
            low = _neg(highest_root(comp_roots, comp))
            for node in comp:
                newbase = [b for b in base if b != node] + [low]
                nxt.append(closure(newbase, rs.roots))
        # Torus extension: delete a node outright.
        if corank < max_corank:
            for node in base:
                newbase = [b for b in base if b != node]
                nxt.append(closure(newbase, rs.roots) if newbase else frozenset())
        for cand in nxt:
            if cand not in visited:
                visited.add(cand)
                queue.append(cand)
    return sorted(seen.values(), key=lambda s: (s.corank, -len(s.roots_h),
                                                s.label))


# ---------------------------------------------------------------------------
# Condition (A)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionAReport:
    verdict: bool
    witness: tuple | None
    checked_pairs: int

    @property
    def vacuous(self):
        return self.checked_pairs == 0


def check_condition_a(sub):
    """Exhaustive pair check over the m-roots of a subsystem.

    verdict is True iff for every unordered pair of root classes
    {+-alpha}, {+-beta} with alpha != +-beta, alpha+beta or alpha-beta lies
    in the ambient system.  The predicate is invariant under negating either
    root, so one representative per class suffices.
    """
    ambient = sub.parent.roots
    phi = _generic_functional(sub.parent.ambient_dim)
    reps = sorted({r if _dot(r, phi) > 0 else _neg(r) for r in sub.roots_m})
    checked = 0
    witness = None
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            a, b = reps[i], reps[j]
            checked += 1
            if _add(a, b) not in ambient and _sub(a, b) not in ambient:
                if witness is None:
                    witness = (a, b)
    return ConditionAReport(verdict=witness is None, witness=witness,
                            checked_pairs=checked)


# ---------------------------------------------------------------------------
# Classification against Wallach's list
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassifiedPair:
    parent_label: str
    rank: int
    subsystem: SubSystem
    report: ConditionAReport

    @property
    def pair(self):
        return (self.parent_label, self.subsystem.label)


def wallach_pairs(max_rank):
    """The built-in golden list, restricted to rank <= max_rank.

    Pairs are in canonical label form; rank-1 factors print as a1 (a1 = b1 =
    c1) and the rank-2 B=C system prints as c2.
    """
    out = set()
    for n in range(2, max_rank + 1):
        out.add((f"a{n}", f"a{n - 1}+R" if n >= 3 else "a1+R"))
    for n in range(2, max_rank + 1):
        cn1 = "a1" if n == 2 else f"c{n - 1}"
        out.add((f"c{n}", f"{cn1}+a1"))
        out.add((f"c{n}", f"{cn1}+R"))
    if max_rank >= 2:
        out.add(("a2", "R^2"))
        out.add(("g2", "a2"))
    if max_rank >= 3:
        out.add(("c3", "a1+a1+a1"))
    if max_rank >= 4:
        out.add(("f4", "b4"))
        out.add(("f4", "d4"))
    return out


def _classify_types(max_rank):
    """Parent systems enumerated by classify.

    B-type parents are omitted on purpose: b2 = c2 duplicates the symplectic
    series, and for n >= 3 the only Condition-(A)-positive B-pair is the
    even-sphere symmetric pair (b_n, d_n), which Wallach's list files under
    the rank-one symmetric spaces rather than as a separate entry.  D-type
    parents are enumerated (from rank 4; d3 = a3) and contribute no
    positives.
    """
    types = [("A", n) for n in range(1, max_rank + 1)]
    types += [("C", n) for n in range(2, max_rank + 1)]
    types += [("D", n) for n in range(4, max_rank + 1)]
    if max_rank >= 2:
        types.append(("G2", 2))
    if max_rank >= 4:
        types.append(("F4", 4))
    return types


def classify(max_rank):
    """Condition (A) verdicts for every enumerated equal-rank subsystem.

    Returns the full table; the positive set (non-vacuous verdicts) is
    compared against wallach_pairs() by the caller.  Pairs whose m-roots
    admit no valid (alpha, beta) pair at all (e.g. (a1, R)) are verdict-true
    but vacuous and excluded from the positive set.
    """
    if max_rank < 1:
        raise InvalidRank("max_rank must be >= 1")
    rows = []
    for family, rank in _classify_types(max_rank):
        rs = build_root_system(family, rank)
        for sub in equal_rank_subsystems(rs, max_corank=rank):
            rows.append(ClassifiedPair(
                parent_label=rs.label, rank=rank, subsystem=sub,
                report=check_condition_a(sub)))
    return rows


def positive_pairs(rows):
    return {r.pair for r in rows
            if r.report.verdict and not r.report.vacuous}
