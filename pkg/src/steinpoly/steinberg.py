"""Apartment classes of the rational Steinberg module.

An apartment class [v_1, ..., v_d] is indexed by d independent lines in
Q^d (or in a subspace). The defining relations are: reordering by the
sign of the permutation, rescaling any entry by a nonzero scalar, the
(d+1)-term boundary relation, and vanishing on dependent tuples. The
canonical storage key is the lex-sorted tuple of canonical line points
with the sort sign folded into the coefficient.

flag_expand rewrites a class in the basis attached to a complete flag;
ash_rudolph_reduce rewrites an integral apartment as a sum of unimodular
ones (continued-fraction pivots in rank 2, residue/coresidue descent in
higher rank).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Iterable, Sequence

from .qlinalg import (
    Flag,
    Mat,
    Subspace,
    Vec,
    canonical_point,
    det,
    identity,
    inverse,
    qv,
    rank,
)

Point = tuple[int, ...]
ApKey = tuple[Point, ...]

ZERO = Fraction(0)


def _acc(d: dict, key, c: Fraction) -> None:
    v = d.get(key, ZERO) + c
    if v:
        d[key] = v
    else:
        d.pop(key, None)


def _sort_sign(points: Sequence[Point]) -> tuple[ApKey, int]:
    order = sorted(range(len(points)), key=lambda i: points[i])
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        # cycle length parity
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return tuple(points[i] for i in order), sign


def normalize_apartment(vectors: Sequence[Sequence], ambient: int | None = None):
    """Canonical (key, sign) for an apartment, or None when degenerate."""
    vecs = [qv(v) for v in vectors]
    if not vecs:
        raise ValueError("empty apartment")
    n = ambient if ambient is not None else len(vecs[0])
    if any(len(v) != n for v in vecs):
        raise ValueError("mixed vector lengths in apartment")
    if any(all(x == 0 for x in v) for v in vecs):
        return None
    points = [canonical_point(v) for v in vecs]
    k = len(points)
    if k > n:
        return None
    if k == n:
        if det(tuple(qv(p) for p in points)) == 0:
            return None
    elif rank(tuple(qv(p) for p in points)) < k:
        return None
    return _sort_sign(points)


class St:
    """Linear combination of apartment classes with rational coefficients."""

    __slots__ = ("ambient", "terms")

    def __init__(self, ambient: int, terms: dict[ApKey, Fraction] | None = None):
        self.ambient = ambient
        self.terms: dict[ApKey, Fraction] = dict(terms) if terms else {}

    @classmethod
    def zero(cls, ambient: int) -> "St":
        return cls(ambient)

    def add_term(self, key: ApKey, c: Fraction) -> None:
        _acc(self.terms, key, c)

    def __add__(self, other: "St") -> "St":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimensions differ")
        out = St(self.ambient, self.terms)
        for k, c in other.terms.items():
            _acc(out.terms, k, c)
        return out

    def __sub__(self, other: "St") -> "St":
        return self + (-1) * other

    def __rmul__(self, c) -> "St":
        c = Fraction(c)
        if c == 0:
            return St.zero(self.ambient)
        return St(self.ambient, {k: c * v for k, v in self.terms.items()})

    def __neg__(self) -> "St":
        return (-1) * self

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, St)
            and self.ambient == other.ambient
            and self.terms == other.terms
        )

    def __hash__(self):
        raise TypeError("St elements are mutable accumulators, not hashable")

    def __bool__(self) -> bool:
        return bool(self.terms)

    def items(self):
        return self.terms.items()

    def map_apartments(self, fn) -> "St":
        """Sum fn(key) weighted by coefficients; fn returns an St."""
        out: St | None = None
        for key, c in self.terms.items():
            piece = c * fn(key)
            out = piece if out is None else out + piece
        return out if out is not None else St.zero(self.ambient)

    def __repr__(self) -> str:
        if not self.terms:
            return "St(0)"
        bits = [f"{c}*{list(map(list, k))}" for k, c in sorted(self.terms.items())]
        return "St(" + " + ".join(bits) + ")"


def make_apartment(vectors: Sequence[Sequence], ambient: int | None = None) -> St:
    vecs = list(vectors)
    n = ambient if ambient is not None else len(qv(vecs[0]))
    norm = normalize_apartment(vecs, n)
    out = St.zero(n)
    if norm is not None:
        key, sign = norm
        out.add_term(key, Fraction(sign))
    return out


def st_multiply(a: St, b: St) -> St:
    """Concatenation product; supports must be independent termwise."""
    if a.ambient != b.ambient:
        raise ValueError("ambient dimensions differ")
    out = St.zero(a.ambient)
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            piece = make_apartment(ka + kb, a.ambient)
            for key, s in piece.terms.items():
                out.add_term(key, ca * cb * s)
    return out


def block_embed(x: St, offset: int, total: int) -> St:
    """Reinterpret x inside Q^total with coordinates shifted by offset."""
    out = St.zero(total)
    for key, c in x.terms.items():
        new_key = tuple(
            (0,) * offset + p + (0,) * (total - offset - len(p)) for p in key
        )
        out.add_term(new_key, c)
    return out


# ---------------------------------------------------------------- flag basis


@lru_cache(maxsize=None)
def _flag_expand_apartment(key: ApKey, flag: Flag) -> tuple[tuple[ApKey, int], ...]:
    d = len(key)
    from itertools import permutations

    results: dict[ApKey, Fraction] = {}
    w = [qv(p) for p in key]

    # Suffix spans and their flag cuts depend only on the index subset,
    # not on the visiting order, so share them across permutations.
    span_of: dict[frozenset, Subspace] = {frozenset(): Subspace.zero(len(w[0]))}

    def span_set(ix: frozenset) -> Subspace:
        got = span_of.get(ix)
        if got is None:
            i = next(iter(ix))
            got = span_set(ix - {i}).add(Subspace.span([w[i]]))
            span_of[ix] = got
        return got

    line_of: dict[tuple[int, frozenset], Point | None] = {}

    def cut_line(i: int, ix: frozenset) -> Point | None:
        kk = (i, ix)
        if kk not in line_of:
            inter = flag[i - 1].intersect(span_set(ix))
            line_of[kk] = inter.line_point() if inter.dim == 1 else None
        return line_of[kk]

    for tau in permutations(range(d)):
        lines: list[Point] = []
        ok = True
        for i in range(1, d + 1):
            got = cut_line(i, frozenset(tau[i - 1 :]))
            if got is None:
                ok = False
                break
            lines.append(got)
        if not ok:
            continue
        sign = _perm_sign(tau)
        norm = normalize_apartment(lines)
        if norm is None:
            continue
        k2, s2 = norm
        _acc(results, k2, Fraction(sign * s2))
    return tuple(sorted((k, c) for k, c in results.items()))


def _perm_sign(tau: Sequence[int]) -> int:
    sign = 1
    for i in range(len(tau)):
        for j in range(i + 1, len(tau)):
            if tau[i] > tau[j]:
                sign = -sign
    return sign


def flag_expand(x: St, flag: Flag | None = None) -> St:
    """Rewrite x in the basis of apartments adapted to the flag.

    The default flag is the standard coordinate flag. Basis apartments
    are exactly those whose first i entries span the i-th flag step, so
    the expansion is idempotent and a zero test for the module.
    """
    if flag is None:
        flag = Flag.standard(x.ambient)
    if len(flag) != x.ambient:
        raise ValueError("flag length must match the ambient dimension")
    out = St.zero(x.ambient)
    for key, c in x.terms.items():
        if len(key) != x.ambient:
            raise ValueError("flag expansion needs full-length apartments")
        for k2, c2 in _flag_expand_apartment(key, flag):
            out.add_term(k2, c * c2)
    return out


def is_zero(x: St) -> bool:
    return not flag_expand(x).terms


# ------------------------------------------------------------------ residue


def _pivot_chart(p_can: Point):
    """Drop-pivot linear chart on Q^n / <p>, per the echelon convention."""
    j = next(i for i, x in enumerate(p_can) if x != 0)
    pj = Fraction(p_can[j])

    def chart(v: Vec) -> Vec:
        f = v[j] / pj
        w = tuple(x - f * Fraction(pc) for x, pc in zip(v, p_can))
        return w[:j] + w[j + 1 :]

    return chart


def residue(x: St, p: Sequence) -> St:
    """Boundary component of x at the line through p.

    Keeps only apartments with an entry on the line, removes that entry
    with the sign of its slot, and pushes the rest to the quotient in
    the drop-pivot chart of the line.
    """
    p_can = canonical_point(qv(p))
    if len(p_can) != x.ambient:
        raise ValueError("point length does not match ambient dimension")
    chart = _pivot_chart(p_can)
    out = St.zero(x.ambient - 1)
    for key, c in x.terms.items():
        for slot, pt in enumerate(key):
            if pt == p_can:
                rest = [chart(qv(q)) for q in key[:slot] + key[slot + 1 :]]
                if not rest:
                    out.add_term((), c)
                else:
                    piece = make_apartment(rest, x.ambient - 1)
                    for k2, s in piece.terms.items():
                        out.add_term(k2, c * s * (-1) ** slot)
                break
    return out


# --------------------------------------------------- Ash-Rudolph style reduction


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


@lru_cache(maxsize=None)
def _line_chart(p: Point) -> tuple[Mat, Mat]:
    """Unimodular U with U e_1 = p, plus T = U^{-1}; lattice-exact chart."""
    n = len(p)
    t_rows = [list(row) for row in identity(n)]
    w = [Fraction(x) for x in p]
    for i in range(n - 1, 0, -1):
        a, b = int(w[i - 1]), int(w[i])
        if b == 0:
            continue
        g, sa, sb = _xgcd(a, b)
        row_a, row_b = t_rows[i - 1], t_rows[i]
        new_a = [sa * x + sb * y for x, y in zip(row_a, row_b)]
        new_b = [
            Fraction(-b // g) * x + Fraction(a // g) * y for x, y in zip(row_a, row_b)
        ]
        t_rows[i - 1], t_rows[i] = new_a, new_b
        w[i - 1], w[i] = Fraction(g), Fraction(0)
    if w[0] == -1:
        t_rows[0] = [-x for x in t_rows[0]]
        w[0] = Fraction(1)
    assert w[0] == 1 and all(x == 0 for x in w[1:])
    t_mat = tuple(tuple(r) for r in t_rows)
    u_mat = inverse(t_mat)
    return u_mat, t_mat


def _chart_coords(t_mat: Mat, v: Point) -> tuple[Fraction, Vec]:
    img = tuple(
        sum((row[i] * v[i] for i in range(len(v))), start=ZERO) for row in t_mat
    )
    return img[0], img[1:]


def ash_rudolph_reduce(vectors: Sequence[Sequence]) -> St:
    """Express an integral apartment as a sum of unimodular apartments.

    The rank-2 case runs a continued-fraction style subdivision with a
    deterministic pivot (minimal child determinants, lexicographic tie
    break); higher rank peels boundary components at one line at a time
    and rebuilds the element from unimodular lifts, level by level.
    """
    vecs = [qv(v) for v in vectors]
    for v in vecs:
        for x in v:
            if x.denominator != 1:
                raise ValueError("ash_rudolph_reduce needs integral vectors")
    n = len(vecs[0])
    if len(vecs) != n:
        raise ValueError("apartment must have as many vectors as coordinates")
    start = make_apartment(vecs, n)
    return _ar_elem(start)


def _ar_elem(x: St) -> St:
    out = St.zero(x.ambient)
    for key, c in x.terms.items():
        for k2, c2 in _ar_apartment(key):
            out.add_term(k2, c * c2)
    return out


@lru_cache(maxsize=None)
def _ar_apartment(key: ApKey) -> tuple[tuple[ApKey, Fraction], ...]:
    d = len(key)
    mat = tuple(qv(p) for p in key)
    dd = int(det(mat))
    if d == 1 or abs(dd) == 1:
        return ((key, Fraction(1)),)
    if d == 2:
        terms = _ar_rank2(key, dd)
    else:
        terms = _ar_descent(key)
    return tuple(sorted(terms.items()))


def _ar_rank2(key: ApKey, dd: int) -> dict[ApKey, Fraction]:
    a, b = key
    absd = abs(dd)
    r = isqrt(absd)
    if r * r < absd:
        r += 1
    best = None
    for s in range(-r, r + 1):
        if s == 0 or abs(s) >= absd:
            continue
        for t in range(-r, r + 1):
            if t == 0 or abs(t) >= absd:
                continue
            num = tuple(t * ai + s * bi for ai, bi in zip(a, b))
            if any(x % dd for x in num):
                continue
            w = tuple(x // dd for x in num)
            cand = (max(abs(s), abs(t)), abs(s) + abs(t), w)
            if best is None or cand < best:
                best = cand
    assert best is not None, "no admissible pivot; determinant box too small"
    w = best[2]
    out: dict[ApKey, Fraction] = {}
    for child in (make_apartment((a, w)), make_apartment((w, b))):
        for ckey, cc in child.terms.items():
            for k2, c2 in _ar_apartment(ckey):
                _acc(out, k2, cc * c2)
    return out


def _ar_descent(key: ApKey) -> dict[ApKey, Fraction]:
    d = len(key)

    # boundary targets of the input, one per line with nonzero height
    targets: dict[Point, dict[ApKey, Fraction]] = {}
    for slot, p in enumerate(key):
        if p[-1] == 0:
            continue
        _, t_mat = _line_chart(p)
        rest = []
        for q in key[:slot] + key[slot + 1 :]:
            _, qc = _chart_coords(t_mat, q)
            rest.append(qc)
        piece = make_apartment(rest, d - 1)
        reduced = _ar_elem(piece)
        bucket = targets.setdefault(p, {})
        for k2, c2 in reduced.terms.items():
            _acc(bucket, k2, Fraction((-1) ** slot) * c2)

    x: dict[ApKey, Fraction] = {}
    processed: set[Point] = set()
    while True:
        live: set[Point] = {p for p in targets if p not in processed}
        for ap in x:
            for pt in ap:
                if pt[-1] != 0 and pt not in processed:
                    live.add(pt)
        if not live:
            break
        k_level = max(abs(p[-1]) for p in live)
        lines = sorted(p for p in live if abs(p[-1]) == k_level)
        for p_line in lines:
            processed.add(p_line)
            u_mat, t_mat = _line_chart(p_line)
            need: dict[ApKey, Fraction] = dict(targets.get(p_line, {}))
            for k2, c2 in _delta_line(x, p_line, t_mat).items():
                _acc(need, k2, -c2)
            if not need:
                continue
            step = p_line if p_line[-1] > 0 else tuple(-c for c in p_line)
            for q_ap, c in need.items():
                lifts = []
                for q in q_ap:
                    u0 = tuple(
                        int(sum(u_mat[r][i] * Fraction(qi) for i, qi in enumerate((0,) + q)))
                        for r in range(d)
                    )
                    shift = u0[-1] // k_level
                    lifts.append(tuple(a - shift * b for a, b in zip(u0, step)))
                piece = make_apartment((p_line,) + tuple(lifts), d)
                for k3, c3 in piece.terms.items():
                    _acc(x, k3, c * c3)
    return x


def _delta_line(x: dict[ApKey, Fraction], p: Point, t_mat: Mat) -> dict[ApKey, Fraction]:
    out: dict[ApKey, Fraction] = {}
    for ap, c in x.items():
        for slot, pt in enumerate(ap):
            if pt == p:
                rest = []
                for q in ap[:slot] + ap[slot + 1 :]:
                    _, qc = _chart_coords(t_mat, q)
                    rest.append(qc)
                piece = make_apartment(rest, len(p) - 1)
                for k2, c2 in piece.terms.items():
                    _acc(out, k2, c * c2 * (-1) ** slot)
                break
    return out
