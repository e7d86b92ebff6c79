"""Exact linear algebra over the rationals.

Vectors are tuples of Fraction, matrices are tuples of row vectors.
Everything here is exact, no floats. Subspaces are kept in reduced row
echelon form so that equality of subspaces is equality of the stored
rows, and downstream modules can use them as dict keys.
"""
from __future__ import annotations

import hashlib
import random
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Iterator, Sequence

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def qv(entries: Iterable) -> Vec:
    """Coerce an iterable of numbers or 'p/q' strings to a rational vector."""
    return tuple(Fraction(e) for e in entries)


def qm(rows: Iterable[Iterable]) -> Mat:
    return tuple(qv(r) for r in rows)


def vec_add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vec_sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vec_scale(c, a: Vec) -> Vec:
    c = Fraction(c)
    return tuple(c * x for x in a)


def vec_neg(a: Vec) -> Vec:
    return tuple(-x for x in a)


def vec_dot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b, strict=True)), start=ZERO)


def is_zero_vec(a: Vec) -> bool:
    return all(x == 0 for x in a)


def mat_vec(m: Mat, v: Vec) -> Vec:
    return tuple(vec_dot(row, v) for row in m)


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(tuple(vec_dot(row, col) for col in bt) for row in a)


def transpose(m: Mat) -> Mat:
    return tuple(zip(*m, strict=True)) if m else ()


def identity(n: int) -> Mat:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def _row_to_int(row: Sequence[Fraction]) -> tuple[list[int], int]:
    """Scale a rational row to integers; return (row, multiplier)."""
    m = lcm(*(f.denominator for f in row)) if row else 1
    return [int(f * m) for f in row], m


def _int_det(rows: list[list[int]]) -> int:
    """Fraction-free Bareiss determinant of a square integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # exact division is the Bareiss invariant
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def det(m: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant of a square rational matrix (Bareiss on a scaled copy)."""
    n = len(m)
    if n == 0:
        return ONE
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    scaled = []
    denom = 1
    for row in m:
        irow, mult = _row_to_int(row)
        scaled.append(irow)
        denom *= mult
    return Fraction(_int_det(scaled), denom)


def det_perm_expansion(m: Sequence[Sequence[Fraction]]) -> Fraction:
    """Leibniz-formula determinant. Exponential; only for cross-checks."""
    n = len(m)
    if n == 0:
        return ONE
    total = ZERO
    for perm, sign in _signed_permutations(n):
        prod = Fraction(sign)
        for i, j in enumerate(perm):
            prod *= m[i][j]
        total += prod
    return total


def _signed_permutations(n: int) -> Iterator[tuple[tuple[int, ...], int]]:
    def rec(rest: list[int]) -> Iterator[tuple[tuple[int, ...], int]]:
        if not rest:
            yield (), 1
            return
        for idx, first in enumerate(rest):
            sub = rest[:idx] + rest[idx + 1 :]
            for tail, s in rec(sub):
                yield (first,) + tail, s * (-1) ** idx

    yield from rec(list(range(n)))


def rref(rows: Sequence[Vec]) -> tuple[Mat, tuple[int, ...]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    work = [list(r) for r in rows]
    if not work:
        return (), ()
    ncols = len(work[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, len(work)):
            if work[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        pv = work[r][c]
        work[r] = [x / pv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    out = tuple(tuple(row) for row in work[:r])
    return out, tuple(pivots)


def rank(rows: Sequence[Vec]) -> int:
    return len(rref(rows)[0])


def inverse(m: Mat) -> Mat:
    """Inverse of a square rational matrix; raises on singular input."""
    n = len(m)
    aug = [list(m[i]) + [ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    reduced, pivots = rref(tuple(tuple(r) for r in aug))
    if pivots[:n] != tuple(range(n)) or len(reduced) != n:
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in reduced)


def solve(m: Mat, rhs: Vec) -> Vec | None:
    """One solution of m x = rhs (free variables set to 0), or None."""
    nrows = len(m)
    if nrows == 0:
        return () if all(x == 0 for x in rhs) else None
    ncols = len(m[0])
    aug = tuple(tuple(m[i]) + (rhs[i],) for i in range(nrows))
    reduced, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [ZERO] * ncols
    for row, p in zip(reduced, pivots):
        x[p] = row[-1]
    return tuple(x)


def nullspace(m: Mat) -> Mat:
    """Basis of the right kernel of m, one vector per free column."""
    if not m:
        return ()
    ncols = len(m[0])
    reduced, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * ncols
        v[fc] = ONE
        for row, p in zip(reduced, pivots):
            v[p] = -row[fc]
        basis.append(tuple(v))
    return tuple(basis)


def canonical_point(v: Sequence) -> tuple[int, ...]:
    """Projective normal form of a nonzero rational vector.

    Clears denominators, divides by the content, and flips the sign so
    the first nonzero entry is positive. The result is the canonical
    integer representative of the line through v.
    """
    w = qv(v)
    if is_zero_vec(w):
        raise ValueError("canonical_point of the zero vector")
    mult = lcm(*(f.denominator for f in w))
    ints = [int(f * mult) for f in w]
    g = gcd(*ints)
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


def dual_basis(basis: Sequence[Vec]) -> Mat:
    """Rows w^i with <w^i, w_j> = delta_ij for a square basis (w_j)."""
    m = qm(basis)
    return inverse(transpose(m))


def saturation_index(vectors: Sequence[Vec]) -> Fraction:
    """Index of the span lattice of the rows inside its saturation.

    For k independent integral rows this is the gcd of all k x k minors
    (the k-th determinantal divisor); rational rows are scaled to integers
    first and the index rescales accordingly, so the result is a positive
    rational. Raises on dependent rows.
    """
    rows = qm(vectors)
    if not rows:
        return ONE
    k = len(rows)
    d = len(rows[0])
    if k > d:
        raise ValueError("more vectors than the ambient dimension")
    scaled = []
    denom = 1
    for row in rows:
        irow, mult = _row_to_int(row)
        scaled.append(irow)
        denom *= mult
    g = 0
    for cols in _k_subsets(d, k):
        minor = _int_det([[scaled[i][c] for c in cols] for i in range(k)])
        g = gcd(g, minor)
    if g == 0:
        raise ValueError("saturation index of dependent vectors")
    return Fraction(g, denom)


def _k_subsets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    from itertools import combinations

    yield from combinations(range(n), k)


class Subspace:
    """A linear subspace of Q^n, stored as RREF rows (canonical)."""

    __slots__ = ("ambient", "rows")

    def __init__(self, ambient: int, rows: Mat):
        self.ambient = ambient
        self.rows = rows

    @classmethod
    def span(cls, vectors: Sequence[Sequence], ambient: int | None = None) -> "Subspace":
        vecs = qm(vectors)
        if ambient is None:
            if not vecs:
                raise ValueError("cannot infer ambient dimension of an empty span")
            ambient = len(vecs[0])
        for v in vecs:
            if len(v) != ambient:
                raise ValueError("vector length does not match ambient dimension")
        rows, _ = rref(vecs)
        return cls(ambient, rows)

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        return cls(ambient, identity(ambient))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains(self, v: Sequence) -> bool:
        w = qv(v)
        r = list(w)
        for row in self.rows:
            p = next(i for i, x in enumerate(row) if x == 1 and all(row[j] == 0 for j in range(i)))
            c = r[p]
            if c != 0:
                r = [x - c * y for x, y in zip(r, row)]
        return all(x == 0 for x in r)

    def contains_sub(self, other: "Subspace") -> bool:
        return all(self.contains(r) for r in other.rows)

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimensions differ")
        if not self.rows or not other.rows:
            return Subspace.zero(self.ambient)
        # kernel of [A^T | -B^T] gives the common combinations
        a, b = self.rows, other.rows
        stacked = tuple(
            tuple(a[i][c] for i in range(len(a))) + tuple(-b[j][c] for j in range(len(b)))
            for c in range(self.ambient)
        )
        combos = nullspace(stacked)
        vecs = []
        for combo in combos:
            v = [ZERO] * self.ambient
            for coef, row in zip(combo[: len(a)], a):
                v = [x + coef * y for x, y in zip(v, row)]
            vecs.append(tuple(v))
        return Subspace.span(vecs, self.ambient) if vecs else Subspace.zero(self.ambient)

    def add(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimensions differ")
        return Subspace.span(self.rows + other.rows, self.ambient)

    def local_coords(self, v: Sequence) -> Vec:
        """Coordinates of v in the RREF-row basis; raises if v is outside."""
        w = qv(v)
        pivots = tuple(next(i for i, x in enumerate(row) if x != 0) for row in self.rows)
        coeffs = tuple(w[p] for p in pivots)
        rebuilt = [ZERO] * self.ambient
        for c, row in zip(coeffs, self.rows):
            rebuilt = [x + c * y for x, y in zip(rebuilt, row)]
        if tuple(rebuilt) != w:
            raise ValueError("vector is not in the subspace")
        return coeffs

    def from_local(self, coeffs: Sequence) -> Vec:
        cs = qv(coeffs)
        if len(cs) != self.dim:
            raise ValueError("wrong number of coordinates")
        v = [ZERO] * self.ambient
        for c, row in zip(cs, self.rows):
            v = [x + c * y for x, y in zip(v, row)]
        return tuple(v)

    def line_point(self) -> tuple[int, ...]:
        if self.dim != 1:
            raise ValueError("line_point of a subspace that is not a line")
        return canonical_point(self.rows[0])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient == other.ambient
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.ambient, self.rows))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


class Flag:
    """A complete flag F_1 < F_2 < ... < F_k inside Q^n."""

    __slots__ = ("steps",)

    def __init__(self, steps: Sequence[Subspace]):
        steps = tuple(steps)
        for i, s in enumerate(steps):
            if s.dim != i + 1:
                raise ValueError("flag steps must have dimensions 1..k")
            if i and not s.contains_sub(steps[i - 1]):
                raise ValueError("flag steps must be nested")
        self.steps = steps

    @classmethod
    def from_basis(cls, vectors: Sequence[Sequence]) -> "Flag":
        vecs = qm(vectors)
        ambient = len(vecs[0])
        return cls(tuple(Subspace.span(vecs[: i + 1], ambient) for i in range(len(vecs))))

    @classmethod
    def standard(cls, k: int, ambient: int | None = None) -> "Flag":
        n = ambient if ambient is not None else k
        basis = [tuple(ONE if j == i else ZERO for j in range(n)) for i in range(k)]
        return cls.from_basis(basis)

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, i: int) -> Subspace:
        return self.steps[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Flag) and self.steps == other.steps

    def __hash__(self) -> int:
        return hash(self.steps)


def frac_to_str(f: Fraction) -> str:
    f = Fraction(f)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def frac_from_str(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s)
    raise ValueError(f"cannot parse rational from {s!r}")


def vec_to_json(v: Sequence[Fraction]) -> list[str]:
    return [frac_to_str(x) for x in v]


def vec_from_json(data: Sequence) -> Vec:
    return tuple(frac_from_str(x) for x in data)


def split_seed(seed: int, label: str) -> random.Random:
    """Deterministic child RNG for (seed, label); stable across runs."""
    h = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(h, "big"))
