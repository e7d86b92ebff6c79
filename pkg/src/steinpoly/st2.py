"""Tensor squares of apartment classes and their Lie-coalgebra structure.

Elements here are combinations [A] (x) [B] of pairs of apartments of the
same rank, optionally times a coordinate monomial recording a symmetric
power. The s-map embeds such a pair into bar words of lines; products
are slotwise concatenation; the coproduct splits the ambient space into
a piece of each tensor factor. The two distinguished generator families
L and I, their symbol recursions, duality, and the cyclic cobracket all
live here, together with the projected zero test for the quotient by
shuffle products (the "stable" quotient below, in which decomposables
vanish).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Callable, Sequence

from .barcplx import Bar, p_H_project, shuffle_span_reduce
from .qlinalg import (
    Flag,
    Subspace,
    Vec,
    canonical_point,
    inverse,
    qv,
    split_seed,
    transpose,
    vec_add,
    vec_dot,
    vec_sub,
)
from .steinberg import (
    ApKey,
    Point,
    St,
    _acc,
    _perm_sign,
    flag_expand,
    make_apartment,
    normalize_apartment,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def zero_exps(n: int) -> tuple[int, ...]:
    return (0,) * n


class St2:
    """Combination of apartment pairs [A] (x) [B] times sym monomials."""

    __slots__ = ("ambient", "terms")

    def __init__(self, ambient: int, terms=None):
        self.ambient = ambient
        self.terms: dict = dict(terms) if terms else {}

    @classmethod
    def zero(cls, ambient: int) -> "St2":
        return cls(ambient)

    def add_term(self, key_a: ApKey, key_b: ApKey, c, exps=None) -> None:
        if len(key_a) != len(key_b):
            raise ValueError("tensor factors must have equal rank")
        e = tuple(exps) if exps is not None else zero_exps(self.ambient)
        _acc(self.terms, (key_a, key_b, e), Fraction(c))

    def __add__(self, other: "St2") -> "St2":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimensions differ")
        out = St2(self.ambient, self.terms)
        for k, c in other.terms.items():
            _acc(out.terms, k, c)
        return out

    def __sub__(self, other: "St2") -> "St2":
        return self + (-1) * other

    def __rmul__(self, c) -> "St2":
        c = Fraction(c)
        if c == 0:
            return St2.zero(self.ambient)
        return St2(self.ambient, {k: c * v for k, v in self.terms.items()})

    def __neg__(self) -> "St2":
        return (-1) * self

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, St2)
            and self.ambient == other.ambient
            and self.terms == other.terms
        )

    def __bool__(self) -> bool:
        return bool(self.terms)

    def items(self):
        return self.terms.items()

    def __repr__(self) -> str:
        return f"St2({len(self.terms)} terms, ambient={self.ambient})"


def make_pair(vecs_a: Sequence, vecs_b: Sequence, ambient: int | None = None, c=1, exps=None) -> St2:
    va = [qv(v) for v in vecs_a]
    n = ambient if ambient is not None else len(va[0])
    out = St2.zero(n)
    na = normalize_apartment(vecs_a, n)
    nb = normalize_apartment(vecs_b, n)
    if na is None or nb is None:
        return out
    out.add_term(na[0], nb[0], Fraction(c) * na[1] * nb[1], exps)
    return out


def st2_product(x: St2, y: St2) -> St2:
    """Slotwise concatenation product on both tensor factors."""
    if x.ambient != y.ambient:
        raise ValueError("ambient dimensions differ")
    out = St2.zero(x.ambient)
    for (ka1, kb1, e1), c1 in x.terms.items():
        for (ka2, kb2, e2), c2 in y.terms.items():
            pa = make_apartment(ka1 + ka2, x.ambient)
            if not pa.terms:
                continue
            pb = make_apartment(kb1 + kb2, x.ambient)
            if not pb.terms:
                continue
            e = tuple(a + b for a, b in zip(e1, e2, strict=True))
            for ka, sa in pa.terms.items():
                for kb, sb in pb.terms.items():
                    _acc(out.terms, (ka, kb, e), c1 * c2 * sa * sb)
    return out


# ------------------------------------------------------------------- s-map


@lru_cache(maxsize=None)
def _s_pair(key_a: ApKey, key_b: ApKey) -> tuple[tuple[tuple[Point, ...], int], ...]:
    d = len(key_a)
    n = len(key_a[0])
    va = [qv(p) for p in key_a]
    vb = [qv(p) for p in key_b]

    span_a: dict[frozenset, Subspace] = {}
    span_b: dict[frozenset, Subspace] = {}

    def spa(fs: frozenset) -> Subspace:
        if fs not in span_a:
            span_a[fs] = Subspace.span([va[i] for i in fs], n)
        return span_a[fs]

    def spb(fs: frozenset) -> Subspace:
        if fs not in span_b:
            span_b[fs] = Subspace.span([vb[i] for i in fs], n)
        return span_b[fs]

    inter_cache: dict[tuple[frozenset, frozenset], Point | None] = {}

    def line_of(fa: frozenset, fb: frozenset) -> Point | None:
        key = (fa, fb)
        if key not in inter_cache:
            w = spa(fa).intersect(spb(fb))
            inter_cache[key] = w.line_point() if w.dim == 1 else None
        return inter_cache[key]

    words: dict[tuple[Point, ...], int] = {}
    for sigma in permutations(range(d)):
        sgn_s = _perm_sign(sigma)
        prefs = [frozenset(sigma[:i]) for i in range(1, d + 1)]
        for tau in permutations(range(d)):
            letters: list[Point] = []
            span = Subspace.zero(n)
            for i in range(1, d + 1):
                # entry i pairs the i-th front flag step with the
                # complementary-depth back step
                line = line_of(prefs[i - 1], frozenset(tau[i - 1 :]))
                if line is None:
                    break
                # only transverse flag pairs contribute; equivalently the
                # letters must stay independent
                grown = span.add(Subspace.span([qv(line)], n))
                if grown.dim == span.dim:
                    break
                span = grown
                letters.append(line)
            else:
                w = tuple(letters)
                words[w] = words.get(w, 0) + sgn_s * _perm_sign(tau)
    return tuple(sorted((w, c) for w, c in words.items() if c))


def embed_s(x: St2) -> Bar:
    """Bar-word expansion of a tensor of apartment pairs.

    Terms where the two flags are not in general position drop out; the
    result is a combination of words of d independent lines, carrying
    the sym exponents of the input along.
    """
    out = Bar.zero(x.ambient)
    for (ka, kb, exps), c in x.terms.items():
        for word, wc in _s_pair(ka, kb):
            out.add_word(word, c * wc, exps)
    return out


# --------------------------------------------------------------- coproduct


def _subset_front_sign(subset: tuple[int, ...], d: int) -> int:
    """Parity of the permutation listing subset ascending, then the rest."""
    listing = list(subset) + [i for i in range(d) if i not in subset]
    return _perm_sign(tuple(listing))


def st2_coproduct(x: St2) -> list[tuple[tuple[int, ...], tuple[int, ...], St2, St2]]:
    """Split terms across complementary spans of subsets of the two factors.

    Returns (I, J, left, right) with I indices into the first factor's
    entries and J into the second factor's; left lives on the span of
    the I-entries, right on the span of the J-entries, both written in
    ambient coordinates. Signs and coefficients are folded into left.
    Counit pieces (I or J empty) are included.
    """
    from itertools import combinations

    out: list[tuple[tuple[int, ...], tuple[int, ...], St2, St2]] = []
    n = x.ambient
    for (key_a, key_b, exps), c in x.terms.items():
        if any(exps):
            raise ValueError("coproduct is defined on the plain component")
        d = len(key_a)
        if d != n:
            raise ValueError("coproduct needs full-rank terms")
        va = [qv(p) for p in key_a]
        vb = [qv(p) for p in key_b]
        for k in range(d + 1):
            for i_set in combinations(range(d), k):
                a_i = Subspace.span([va[i] for i in i_set], n) if i_set else Subspace.zero(n)
                for j_set in combinations(range(d), d - k):
                    b_j = (
                        Subspace.span([vb[j] for j in j_set], n)
                        if j_set
                        else Subspace.zero(n)
                    )
                    if a_i.add(b_j).dim != d:
                        continue
                    j_comp = tuple(j for j in range(d) if j not in j_set)
                    i_comp = tuple(i for i in range(d) if i not in i_set)
                    sign = _subset_front_sign(i_set, d) * _subset_front_sign(j_comp, d)
                    # left: A-entries at I, against lines cut out of A_I
                    left_b_lines = []
                    ok = True
                    for j in j_comp:
                        cut = a_i.intersect(b_j.add(Subspace.span([vb[j]], n)))
                        if cut.dim != 1:
                            ok = False
                            break
                        left_b_lines.append(cut.line_point())
                    if not ok:
                        continue
                    right_a_lines = []
                    for i in i_comp:
                        cut = b_j.intersect(a_i.add(Subspace.span([va[i]], n)))
                        if cut.dim != 1:
                            ok = False
                            break
                        right_a_lines.append(cut.line_point())
                    if not ok:
                        continue
                    left = make_pair(
                        [va[i] for i in i_set],
                        left_b_lines,
                        n,
                        c=c * sign,
                        exps=zero_exps(n),
                    ) if i_set else _unit_st2(n, c * sign)
                    right = make_pair(
                        right_a_lines,
                        [vb[j] for j in j_set],
                        n,
                        exps=zero_exps(n),
                    ) if j_set else _unit_st2(n, 1)
                    if not left.terms or not right.terms:
                        continue
                    out.append((i_set, j_set, left, right))
    return out


def _unit_st2(n: int, c) -> St2:
    out = St2.zero(n)
    if c:
        _acc(out.terms, ((), (), zero_exps(n)), Fraction(c))
    return out


# ------------------------------------------------------------- generators


def make_L(vectors: Sequence, ambient: int | None = None, c=1, exps=None) -> St2:
    """Pair of the reversed-suffix-sum apartment against the reversed one."""
    vecs = [qv(v) for v in vectors]
    n = ambient if ambient is not None else len(vecs[0])
    sums = []
    acc = None
    for v in reversed(vecs):
        acc = v if acc is None else vec_add(acc, v)
        sums.append(acc)
    return make_pair(sums, list(reversed(vecs)), n, c=c, exps=exps)


def make_I(vectors: Sequence, ambient: int | None = None, c=1, exps=None) -> St2:
    """Companion generator: reversed tuple against consecutive differences."""
    vecs = [qv(v) for v in vectors]
    n = ambient if ambient is not None else len(vecs[0])
    d = len(vecs)
    second = [vecs[-1]]
    for j in range(d - 2, -1, -1):
        second.append(vec_sub(vecs[j], vecs[j + 1]))
    sign = (-1) ** d
    return make_pair(list(reversed(vecs)), second, n, c=Fraction(c) * sign, exps=exps)


def make_corr(vectors: Sequence, ambient: int | None = None, c=1) -> St2:
    """Correlator on d+1 vectors summing to zero; equals make_L of the tail."""
    vecs = [qv(v) for v in vectors]
    n = ambient if ambient is not None else len(vecs[0])
    total = vecs[0]
    for v in vecs[1:]:
        total = vec_add(total, v)
    if any(x != 0 for x in total):
        raise ValueError("correlator vectors must sum to zero")
    return make_L(vecs[1:], n, c=c)


def make_corr_colon(points: Sequence, ambient: int | None = None, c=1) -> St2:
    """Correlator in homogeneous arguments [u_0 : ... : u_d]."""
    pts = [qv(p) for p in points]
    n = ambient if ambient is not None else len(pts[0])
    d = len(pts) - 1
    diffs = [vec_sub(pts[i], pts[(i + 1) % (d + 1)]) for i in range(d + 1)]
    from .qlinalg import rank

    if rank(tuple(diffs[1:])) != d:
        raise ValueError("points are not affinely independent")
    return make_L(diffs[1:], n, c=c)


def dualize(x: St2) -> St2:
    """Swap the tensor factors and replace each apartment by its dual basis."""
    out = St2.zero(x.ambient)
    for (key_a, key_b, exps), c in x.terms.items():
        if len(key_a) != x.ambient:
            raise ValueError("duality needs full-rank terms")
        da = _dual_apartment(key_a)
        db = _dual_apartment(key_b)
        pa = make_apartment(db[0], x.ambient)
        pb = make_apartment(da[0], x.ambient)
        for ka, sa in pa.terms.items():
            for kb, sb in pb.terms.items():
                _acc(out.terms, (ka, kb, exps), c * sa * sb)
    return out


@lru_cache(maxsize=None)
def _dual_apartment(key: ApKey) -> tuple[tuple[Vec, ...]]:
    m = tuple(qv(p) for p in key)
    dual = inverse(transpose(m))
    return (dual,)


# ------------------------------------------------------- symbol recursions


@lru_cache(maxsize=None)
def _symbol_L(vecs: tuple[Vec, ...]) -> tuple[tuple[tuple[Point, ...], Fraction], ...]:
    d = len(vecs)
    if d == 1:
        return (((canonical_point(vecs[0]),), ONE),)
    out: dict = {}
    for word, c in _symbol_L(vecs[1:]):
        _acc(out, word + (canonical_point(vecs[0]),), c)
    for i in range(d - 1):
        merged = vecs[:i] + (vec_add(vecs[i], vecs[i + 1]),) + vecs[i + 2 :]
        tail_plus = canonical_point(vecs[i + 1])
        tail_minus = canonical_point(vecs[i])
        for word, c in _symbol_L(merged):
            _acc(out, word + (tail_plus,), c)
            _acc(out, word + (tail_minus,), -c)
    return tuple(sorted(out.items()))


@lru_cache(maxsize=None)
def _symbol_I(vecs: tuple[Vec, ...]) -> tuple[tuple[tuple[Point, ...], Fraction], ...]:
    d = len(vecs)
    if d == 1:
        return (((canonical_point(vecs[0]),), -ONE),)
    out: dict = {}
    for word, c in _symbol_I(vecs[:-1]):
        _acc(out, word + (canonical_point(vecs[-1]),), -c)
    for i in range(d - 1):
        drop_hi = vecs[: i + 1] + vecs[i + 2 :]
        drop_lo = vecs[:i] + vecs[i + 1 :]
        letter = canonical_point(vec_sub(vecs[i + 1], vecs[i]))
        for word, c in _symbol_I(drop_hi):
            _acc(out, word + (letter,), c)
        for word, c in _symbol_I(drop_lo):
            _acc(out, word + (letter,), -c)
    return tuple(sorted(out.items()))


def symbol_L(vectors: Sequence, ambient: int | None = None) -> Bar:
    """Bar-word symbol of the L generator, by the contraction recursion."""
    vecs = tuple(qv(v) for v in vectors)
    n = ambient if ambient is not None else len(vecs[0])
    out = Bar.zero(n)
    for word, c in _symbol_L(vecs):
        out.add_word(word, c)
    return out


def symbol_I(vectors: Sequence, ambient: int | None = None) -> Bar:
    """Bar-word symbol of the I generator, by the omission recursion."""
    vecs = tuple(qv(v) for v in vectors)
    n = ambient if ambient is not None else len(vecs[0])
    out = Bar.zero(n)
    for word, c in _symbol_I(vecs):
        out.add_word(word, c)
    return out


# ------------------------------------------------------------- zero tests


def st2_normal_form(x: St2) -> dict:
    """Canonical coordinates: flag-expand both factors of every term."""
    out: dict = {}
    for (key_a, key_b, exps), c in x.terms.items():
        if len(key_a) != x.ambient:
            raise ValueError("normal form needs full-rank terms")
        ea = flag_expand(St(x.ambient, {key_a: ONE}))
        eb = flag_expand(St(x.ambient, {key_b: ONE}))
        for ka, ca in ea.terms.items():
            for kb, cb in eb.terms.items():
                _acc(out, (ka, kb, exps), c * ca * cb)
    return out


def is_zero_st2(x: St2) -> bool:
    return not st2_normal_form(x)


def _h_functional(seed: int, dim: int, lines=(), label: str = "") -> Vec:
    """Seeded functional with small positive entries, avoiding the given lines.

    Any nonzero functional gives a faithful projection on the stable
    quotient; avoiding the occurring lines just keeps witnesses fat.
    """
    rng = split_seed(seed, f"h:{dim}:{label}")
    h = tuple(Fraction(rng.randint(1, 97)) for _ in range(dim))
    for _ in range(64):
        if all(vec_dot(h, qv(p)) != 0 for p in lines):
            break
        h = tuple(Fraction(rng.randint(1, 97)) for _ in range(dim))
    return h


def is_zero_st_infty(x: St2, seed: int = 0) -> bool:
    """Zero test in the quotient where shuffle products vanish.

    Projects the s-image along a seeded functional and reduces modulo
    the shuffle span; the projection is faithful on the quotient for
    any choice of functional, so the verdict does not depend on the
    seed.
    """
    words = embed_s(x)
    lines = {p for (word, _), _ in words.terms.items() for p in word}
    h = _h_functional(seed, x.ambient, lines=tuple(sorted(lines)))
    reduced = shuffle_span_reduce(p_H_project(words, h))
    return not reduced.terms


def st_infty_fingerprint(x: St2, w: Subspace, seed: int = 0) -> dict:
    """Canonical class coordinates of a tensor supported on the subspace w.

    Localizes to w's echelon basis, embeds via the s-map, projects along
    a functional derived from (seed, w), and shuffle-reduces. Equal
    classes give equal dictionaries regardless of presentation.
    """
    k = w.dim
    local = St2.zero(k)
    for (key_a, key_b, exps), c in x.terms.items():
        pa = make_apartment([w.local_coords(qv(p)) for p in key_a], k)
        pb = make_apartment([w.local_coords(qv(p)) for p in key_b], k)
        for ka, sa in pa.terms.items():
            for kb, sb in pb.terms.items():
                _acc(local.terms, (ka, kb, zero_exps(k)), c * sa * sb)
    words = embed_s(local)
    h = _h_functional(seed, k, label=repr(w.rows))
    reduced = shuffle_span_reduce(p_H_project(words, h))
    return dict(reduced.terms)


# -------------------------------------------------------------- cobracket


def cobracket_L(vectors: Sequence, ambient: int | None = None):
    """Cyclic cobracket terms of the L generator.

    Returns a list of (coeff, left_vectors, right_vectors); each side is
    to be read as an L generator on the span of its vectors, and the
    pair as a wedge.
    """
    vecs = [qv(v) for v in vectors]
    n = ambient if ambient is not None else len(vecs[0])
    d = len(vecs)
    v0 = vecs[0]
    for v in vecs[1:]:
        v0 = vec_add(v0, v)
    cyc = [tuple(-x for x in v0)] + [tuple(v) for v in vecs]  # v_0, v_1, ..., v_d
    terms = []
    for j in range(d + 1):
        for i in range(1, d):
            left = tuple(cyc[(j + t) % (d + 1)] for t in range(1, i + 1))
            right = tuple(cyc[(j + t) % (d + 1)] for t in range(i + 1, d + 1))
            terms.append((Fraction(-1), left, right))
    return terms


def _wedge_expand(acc: dict, c: Fraction, wa_rows, fpa: dict, wb_rows, fpb: dict) -> None:
    for ka, ca in fpa.items():
        for kb, cb in fpb.items():
            _acc(acc, (wa_rows, ka, wb_rows, kb), c * ca * cb)
            _acc(acc, (wb_rows, kb, wa_rows, ka), -c * ca * cb)


def cobracket_matches_coproduct(vectors: Sequence, seed: int = 0) -> bool:
    """Cross-check of the cyclic cobracket against the coproduct route.

    Expands both sides into fingerprint coordinates of their factors and
    compares exactly. The coproduct route antisymmetrizes every split
    and keeps only the splits where both sides are nontrivial.
    """
    vecs = [qv(v) for v in vectors]
    n = len(vecs[0])
    route_a: dict = {}
    for c, left, right in cobracket_L(vecs, n):
        wa = Subspace.span(left, n)
        wb = Subspace.span(right, n)
        la = make_L([wa.local_coords(qv(v)) for v in left], wa.dim)
        lb = make_L([wb.local_coords(qv(v)) for v in right], wb.dim)
        fpa = _fingerprint_local(la, wa, seed)
        fpb = _fingerprint_local(lb, wb, seed)
        _wedge_expand(route_a, c, wa.rows, fpa, wb.rows, fpb)

    route_b: dict = {}
    for i_set, j_set, left, right in st2_coproduct(make_L(vecs, n)):
        if not i_set or not j_set:
            continue
        wa = _support_subspace(left, n)
        wb = _support_subspace(right, n)
        fpa = st_infty_fingerprint(left, wa, seed)
        fpb = st_infty_fingerprint(right, wb, seed)
        _wedge_expand(route_b, ONE, wa.rows, fpa, wb.rows, fpb)
    return route_a == route_b


def _fingerprint_local(x_local: St2, w: Subspace, seed: int) -> dict:
    words = embed_s(x_local)
    h = _h_functional(seed, w.dim, label=repr(w.rows))
    reduced = shuffle_span_reduce(p_H_project(words, h))
    return dict(reduced.terms)


def _support_subspace(x: St2, n: int) -> Subspace:
    pts = []
    for (key_a, key_b, _), _c in x.terms.items():
        pts.extend(qv(p) for p in key_a)
    return Subspace.span(pts, n)


# ------------------------------------------------------ generic pair solve


def coxeter_to_basis(p_points: Sequence, q_points: Sequence) -> tuple[Vec, ...]:
    """Recover the parameterizing basis of a generic incident pair of flags.

    Given line representatives p_i, q_i with p_1 parallel to q_1 and
    q_i in the span of p_{i-1} and p_i, returns v_1..v_d with
    v_1 + ... + v_i on p_i and v_i on q_i. Raises with a diagnosis of
    the first failing incidence or genericity condition.
    """
    ps = [qv(p) for p in p_points]
    qs = [qv(q) for q in q_points]
    d = len(ps)
    n = len(ps[0])
    if canonical_point(ps[0]) != canonical_point(qs[0]):
        raise ValueError("first entries must span the same line")
    vs: list[Vec] = [qv(canonical_point(qs[0]))]
    partial = vs[0]
    for i in range(1, d):
        if canonical_point(ps[i]) == canonical_point(qs[i]):
            raise ValueError(f"pair is non-generic at slot {i + 1}: equal lines")
        # partial + alpha q_i = beta p_i
        cols = tuple((qs[i][r], -ps[i][r]) for r in range(n))
        rhs = tuple(-partial[r] for r in range(n))
        sol = None
        from .qlinalg import solve

        sol = solve(cols, rhs)
        if sol is None:
            raise ValueError(
                f"slot {i + 1} line of the second flag is outside the span of "
                f"the neighboring first-flag lines"
            )
        alpha, beta = sol
        if alpha == 0:
            raise ValueError(f"degenerate incidence at slot {i + 1}: zero component")
        v = tuple(alpha * x for x in qs[i])
        vs.append(v)
        partial = vec_add(partial, v)
        if all(x == 0 for x in partial):
            raise ValueError(f"partial sums collapse at slot {i + 1}")
    if normalize_apartment(vs, n) is None:
        raise ValueError("recovered vectors are dependent")
    return tuple(vs)


def span_solve(target: St2, family: Sequence[St2]):
    """Coefficients writing target in the span of the family, or None.

    Works in flag normal-form coordinates; free coefficients are set to
    zero, so the answer is deterministic.
    """
    t_nf = st2_normal_form(target)
    f_nfs = [st2_normal_form(f) for f in family]
    keys = sorted(set(t_nf) | {k for nf in f_nfs for k in nf})
    rows = tuple(tuple(nf.get(k, ZERO) for nf in f_nfs) for k in keys)
    rhs = tuple(t_nf.get(k, ZERO) for k in keys)
    from .qlinalg import solve

    return solve(rows, rhs)
