"""Formal multiple polylogarithms on split tori and their truncated symbols.

Arguments are monomials zeta * x_1^{a_1} ... x_d^{a_d} with an exact
root-of-unity phase in Q/Z and a rational exponent vector, so every
rewrite in this file is phase arithmetic plus lattice bookkeeping.  The
depth-one quotient has an explicit basis (primitive lexicographically
positive directions at a covering level), and the top component of the
reduced coproduct drives a recursion whose endpoint is a bar word with a
symmetric-power tail.  Solving back against Coxeter generators lands the
result in the Steinberg tensor square, giving two independent routes to
the truncated symbol; a third, coarser route goes through formal
iterated integrals and the full coproduct.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product as iproduct
from math import comb, factorial, gcd, lcm
from typing import Iterable, Sequence

from .barcplx import Bar, p_H_project, shuffle_span_reduce, shuffle_words
from .qlinalg import (
    Vec,
    canonical_point,
    det,
    frac_from_str,
    frac_to_str,
    mat_mul,
    mat_vec,
    qm,
    qv,
    rank,
    saturation_index,
    solve,
)
from .st2 import St2, _h_functional, embed_s, make_L, make_pair

ZERO = Fraction(0)
ONE = Fraction(1)


def _acc(d: dict, key, c: Fraction) -> None:
    v = d.get(key, ZERO) + c
    if v:
        d[key] = v
    else:
        d.pop(key, None)


# ---------------------------------------------------------------- monomials


class Monomial:
    """zeta * x^a with phase zeta = e^{2 pi i q}, q in Q/Z, and a in Q^d."""

    __slots__ = ("phase", "exps")

    def __init__(self, phase, exps: Sequence):
        self.phase = Fraction(phase) % 1
        self.exps = tuple(Fraction(e) for e in exps)

    @classmethod
    def unit(cls, j: int, d: int, phase=0) -> "Monomial":
        return cls(phase, [ONE if i == j else ZERO for i in range(d)])

    @property
    def ambient(self) -> int:
        return len(self.exps)

    def is_torsion(self) -> bool:
        return all(e == 0 for e in self.exps)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(
            self.phase + other.phase,
            [a + b for a, b in zip(self.exps, other.exps, strict=True)],
        )

    def __pow__(self, k: int) -> "Monomial":
        return Monomial(k * self.phase, [k * e for e in self.exps])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Monomial)
            and self.phase == other.phase
            and self.exps == other.exps
        )

    def __hash__(self) -> int:
        return hash((self.phase, self.exps))

    def __repr__(self) -> str:
        return f"Monomial({self.phase}, {self.exps})"

    def to_json(self) -> dict:
        return {"phase": frac_to_str(self.phase), "exp": [frac_to_str(e) for e in self.exps]}

    @classmethod
    def from_json(cls, data: dict) -> "Monomial":
        return cls(frac_from_str(data["phase"]), [frac_from_str(e) for e in data["exp"]])


def std_args(d: int) -> tuple[Monomial, ...]:
    """The coordinate arguments x_1, ..., x_d."""
    return tuple(Monomial.unit(j, d) for j in range(d))


# --------------------------------------------------------------- generators


class LiGen:
    """Li_{n_1..n_k} at monomial arguments with independent exponent vectors."""

    __slots__ = ("ns", "args")

    def __init__(self, ns: Sequence[int], args: Sequence[Monomial]):
        self.ns = tuple(int(n) for n in ns)
        self.args = tuple(args)
        if len(self.ns) != len(self.args) or not self.ns:
            raise ValueError("exponent tuple and argument tuple must match")
        if any(n < 1 for n in self.ns):
            raise ValueError("weights must be positive")
        vecs = [qv(a.exps) for a in self.args]
        if rank(vecs) != len(vecs):
            raise ValueError("argument exponent vectors are dependent")

    @property
    def depth(self) -> int:
        return len(self.ns)

    @property
    def weight(self) -> int:
        return sum(self.ns)

    @property
    def ambient(self) -> int:
        return self.args[0].ambient

    def key(self):
        return (self.ns, tuple((a.phase, a.exps) for a in self.args))

    def __eq__(self, other) -> bool:
        return isinstance(other, LiGen) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"LiGen({self.ns}, {list(self.args)})"


def std_li(*ns: int) -> LiGen:
    """Li_{n_1..n_k}(x_1,...,x_k) in ambient dimension k."""
    return LiGen(ns, std_args(len(ns)))


class PushedLi:
    """coeff * (A . Li_{n_1..n_k}) for A in GL_d(Q).

    The matrix is stored as its primitive integral representative; the
    positive rational scale acts through the weight character and is
    folded into the coefficient on construction, so equal actions get
    equal fields.
    """

    __slots__ = ("coeff", "matrix", "ns")

    def __init__(self, coeff, matrix: Sequence[Sequence], ns: Sequence[int]):
        self.ns = tuple(int(n) for n in ns)
        if any(n < 1 for n in self.ns) or not self.ns:
            raise ValueError("weights must be positive")
        a = qm(matrix)
        d = len(a)
        if any(len(row) != d for row in a):
            raise ValueError("matrix must be square")
        if len(self.ns) > d:
            raise ValueError("depth exceeds ambient dimension")
        if det(a) == 0:
            raise ValueError("matrix must be invertible")
        denom = lcm(*[e.denominator for row in a for e in row])
        ints = [[int(e * denom) for e in row] for row in a]
        content = gcd(*[abs(e) for row in ints for e in row])
        scale = Fraction(content, denom)  # a = scale * primitive, scale > 0
        self.matrix = tuple(tuple(e // content for e in row) for row in ints)
        n = sum(self.ns)
        self.coeff = Fraction(coeff) * scale ** (n - d)

    @property
    def depth(self) -> int:
        return len(self.ns)

    @property
    def weight(self) -> int:
        return sum(self.ns)

    @property
    def ambient(self) -> int:
        return len(self.matrix)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PushedLi)
            and self.coeff == other.coeff
            and self.matrix == other.matrix
            and self.ns == other.ns
        )

    def __hash__(self) -> int:
        return hash((self.coeff, self.matrix, self.ns))

    def __repr__(self) -> str:
        return f"PushedLi({self.coeff}, {self.matrix}, {self.ns})"

    def to_json(self) -> dict:
        return {
            "coeff": frac_to_str(self.coeff),
            "matrix": [[frac_to_str(Fraction(e)) for e in row] for row in self.matrix],
            "exponents": list(self.ns),
        }


def gl_act(a: Sequence[Sequence], x: PushedLi) -> PushedLi:
    """Left action by matrix composition; scale normalization is automatic."""
    return PushedLi(x.coeff, mat_mul(qm(a), qm(x.matrix)), x.ns)


def pushed_expand(p: PushedLi) -> list[tuple[Fraction, LiGen]]:
    """Root expansion of the action into honest generators.

    N-th roots of all d coordinates contribute N^d phase tuples; the
    l-th argument picks up phase sum_i A_{il} j_i / N on the exponent
    vector (column l)/N.
    """
    d = p.ambient
    k = p.depth
    n = p.weight
    nn = abs(int(det(qm(p.matrix))))
    pref = p.coeff * Fraction(nn) ** (n - d - 1)
    cols = [[Fraction(p.matrix[i][l], nn) for i in range(d)] for l in range(k)]
    out = []
    for js in iproduct(range(nn), repeat=d):
        args = []
        for l in range(k):
            phase = sum(Fraction(p.matrix[i][l] * js[i], nn) for i in range(d))
            args.append(Monomial(phase, cols[l]))
        out.append((pref, LiGen(p.ns, args)))
    return out


# ------------------------------------------------------ depth-one normal form


class DepthOneNF:
    """Weight-n depth-one classes on primitive lex-positive directions.

    Keys (phase, p) live at a covering level W: the class is the weight-n
    polylogarithm at e^{2 pi i phase} x^{p/W}.  Torsion arguments stay in
    a symbolic constants bucket and never touch the direction keys.
    """

    __slots__ = ("weight", "level", "terms", "constants")

    def __init__(self, weight: int, level: int, terms: dict, constants: dict):
        self.weight = weight
        self.level = level
        self.terms = terms
        self.constants = constants

    def is_zero(self) -> bool:
        return not self.terms and not self.constants

    def items(self) -> list[tuple[Fraction, Fraction, tuple[Fraction, ...]]]:
        """(coeff, phase, rational direction vector) triples."""
        w = self.level
        return [
            (c, phase, tuple(Fraction(e, w) for e in vec))
            for (phase, vec), c in sorted(self.terms.items())
        ]

    def as_monomials(self) -> list[tuple[Fraction, Monomial]]:
        out = [(c, Monomial(phase, vec)) for c, phase, vec in self.items()]
        out.extend(
            (c, Monomial(phase, [ZERO] * self._guess_dim()))
            for phase, c in sorted(self.constants.items())
        )
        return out

    def _guess_dim(self) -> int:
        for (_, vec) in self.terms:
            return len(vec)
        return 1

    def rescale(self, new_level: int) -> "DepthOneNF":
        if new_level % self.level:
            raise ValueError("covering levels must be nested")
        m = new_level // self.level
        if m == 1:
            return self
        out: dict = {}
        for (phase, vec), c in self.terms.items():
            # the same direction seen at level m*W is m*vec, then re-split
            for key, factor in _primitive_split(self.weight, phase, tuple(m * e for e in vec)):
                _acc(out, key, c * factor)
        return DepthOneNF(self.weight, new_level, out, dict(self.constants))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DepthOneNF) or self.weight != other.weight:
            return False
        w = lcm(self.level, other.level)
        a = self.rescale(w)
        b = other.rescale(w)
        return a.terms == b.terms and a.constants == b.constants

    def __repr__(self) -> str:
        return (
            f"DepthOneNF(weight={self.weight}, level={self.level}, "
            f"{len(self.terms)} keys, {len(self.constants)} constants)"
        )


def _primitive_split(n: int, phase: Fraction, vec: tuple[int, ...]):
    """Normalize one integral key: flip to lex-positive, split off content."""
    sign = ONE
    lead = next((e for e in vec if e), 0)
    if lead < 0:
        sign = Fraction((-1) ** (n - 1))
        vec = tuple(-e for e in vec)
        phase = (-phase) % 1
    m = gcd(*[abs(e) for e in vec])
    prim = tuple(e // m for e in vec)
    base = phase / m
    factor = sign * Fraction(m) ** (n - 1)
    return [(((base + Fraction(j, m)) % 1, prim), factor) for j in range(m)]


def depth1_nf(weight: int, items: Iterable[tuple]) -> DepthOneNF:
    """Normal form of a formal sum of weight-n depth-one polylogarithms.

    Inversion flips negative directions with (-1)^{n-1}; the distribution
    relation expands imprimitive directions over the canonical roots of
    the phase.  Torsion arguments go into the constants bucket.
    """
    items = [(Fraction(c), m) for c, m in items]
    level = 1
    for _, m in items:
        for e in m.exps:
            level = lcm(level, e.denominator)
    terms: dict = {}
    constants: dict = {}
    for c, m in items:
        if m.is_torsion():
            _acc(constants, m.phase, c)
            continue
        vec = tuple(int(e * level) for e in m.exps)
        for key, factor in _primitive_split(weight, m.phase, vec):
            _acc(terms, key, c * factor)
    return DepthOneNF(weight, level, terms, constants)


# --------------------------------------------------------- sigma and alpha


def _sym_poly(vectors: Sequence[Vec], weights: Sequence[int], d: int) -> dict:
    """Monomial expansion of prod v_i^{n_i - 1} / (n_i - 1)!."""
    poly = {(0,) * d: ONE}
    denom = 1
    for v, n in zip(vectors, weights, strict=True):
        denom *= factorial(n - 1)
        for _ in range(n - 1):
            poly = _poly_times_linear(poly, v)
    return {e: c / denom for e, c in poly.items()}


def _poly_times_linear(poly: dict, vec: Sequence) -> dict:
    out: dict = {}
    for exps, c in poly.items():
        for i, vi in enumerate(vec):
            if vi:
                key = exps[:i] + (exps[i] + 1,) + exps[i + 1 :]
                _acc(out, key, c * vi)
    return out


def sigma(factors: Sequence[DepthOneNF], ambient: int) -> Bar:
    """Section of the root-expansion embedding on depth-one tensors.

    Phases are forgotten, the direction tuple picks up its covolume
    factor, and the weights feed the symmetric tail.  Dependent tuples
    and constant slots contribute nothing.
    """
    out = Bar.zero(ambient)
    weights = [f.weight for f in factors]
    k = len(factors)
    for combo in iproduct(*[f.items() for f in factors]):
        coeff = ONE
        vecs = []
        for c, _phase, v in combo:
            coeff *= c
            vecs.append(qv(v))
        if rank(vecs) < k:
            continue
        covol = saturation_index(vecs)
        word = tuple(canonical_point(v) for v in vecs)
        for exps, pc in _sym_poly(vecs, weights, ambient).items():
            out.add_word(word, coeff * covol * pc, exps)
    return out


def alpha(vectors: Sequence[Sequence[int]], weights: Sequence[int]) -> list:
    """Root expansion of a bar word with symmetric tail into depth-one tensors.

    Integral direction vectors only; N is the index of their span lattice
    in its saturation, and all d coordinates acquire N-th roots, giving
    N^d phase tuples of coefficient N^{n-d-1}.
    """
    vecs = [qv(v) for v in vectors]
    if any(e.denominator != 1 for v in vecs for e in v):
        raise ValueError("alpha expects integral vectors")
    d = len(vecs[0])
    n = sum(weights)
    nn = int(saturation_index(vecs))
    pref = Fraction(nn) ** (n - d - 1)
    out = []
    for js in iproduct(range(nn), repeat=d):
        slots = tuple(
            Monomial(
                sum(Fraction(int(v[i]) * js[i], nn) for i in range(d)),
                [Fraction(int(e), nn) for e in v],
            )
            for v in vecs
        )
        out.append((pref, slots))
    return out


# ------------------------------------------------- top coproduct component


def delta_top(g: LiGen) -> list:
    """Top component of the reduced coproduct, right factors depth one.

    Returns (LiGen of depth k-1, DepthOneNF) pairs with distinct left
    generators.  The head drops the first slot; the merged-argument
    families carry binomial weights, with signs fixed against the
    weight-(2,1) display.
    """
    k = g.depth
    if k < 2:
        raise ValueError("depth-one generators have no top component")
    ns = g.ns
    args = g.args
    buckets: dict = {}
    order: list = []

    def push(left: LiGen, c: Fraction, weight: int, arg: Monomial) -> None:
        key = left.key()
        if key not in buckets:
            buckets[key] = (left, weight, [])
            order.append(key)
        buckets[key][2].append((c, arg))

    push(LiGen(ns[1:], args[1:]), ONE, ns[0], args[0])
    for i in range(k - 1):
        merged = args[i] * args[i + 1]
        rest_ns = ns[:i] + ns[i + 2 :]
        rest_args = args[:i] + (merged,) + args[i + 2 :]
        for a in range(ns[i + 1]):
            npr = ns[i + 1] - a
            c2 = -Fraction((-1) ** (npr - 1)) * comb(ns[i] + npr - 2, ns[i] - 1)
            left = LiGen(rest_ns[:i] + (a + 1,) + rest_ns[i:], rest_args)
            push(left, c2, ns[i] + npr - 1, args[i])
        for b in range(ns[i]):
            npp = ns[i] - b
            c3 = Fraction((-1) ** (npp - 1)) * comb(npp + ns[i + 1] - 2, ns[i + 1] - 1)
            left = LiGen(rest_ns[:i] + (b + 1,) + rest_ns[i:], rest_args)
            push(left, c3, npp + ns[i + 1] - 1, args[i + 1])
    out = []
    for key in order:
        left, weight, items = buckets[key]
        nf = depth1_nf(weight, items)
        if not nf.is_zero():
            out.append((left, nf))
    return out


def _nf_of_gen(g: LiGen) -> DepthOneNF:
    return depth1_nf(g.ns[0], [(ONE, g.args[0])])


def _iterated_top(g: LiGen) -> list:
    """Slot tuples of the fully iterated top coproduct, first split last."""
    if g.depth == 1:
        return [(_nf_of_gen(g),)]
    out = []
    for left, right in delta_top(g):
        for slots in _iterated_top(left):
            out.append(slots + (right,))
    return out


def recursion_symbol_bar(g) -> Bar:
    """Bar-word symbol through the iterated top coproduct and sigma."""
    if isinstance(g, PushedLi):
        out = Bar.zero(g.ambient)
        for c, gen in pushed_expand(g):
            out = out + c * recursion_symbol_bar(gen)
        return out
    out = Bar.zero(g.ambient)
    for slots in _iterated_top(g):
        out = out + sigma(slots, g.ambient)
    return out


# -------------------------------------------------- formal iterated integrals


class FormalII:
    """Formal iterated integral with monomial entries; None marks a zero."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence):
        self.entries = tuple(entries)
        if len(self.entries) < 2:
            raise ValueError("need at least two endpoints")
        for e in self.entries:
            if e is not None and not isinstance(e, Monomial):
                raise TypeError("entries are Monomial or None")

    @property
    def weight(self) -> int:
        return len(self.entries) - 2

    @property
    def start(self):
        return self.entries[0]

    @property
    def end(self):
        return self.entries[-1]

    @property
    def middles(self) -> tuple:
        return self.entries[1:-1]

    def __eq__(self, other):
        return isinstance(other, FormalII) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        body = ", ".join("0" if e is None else repr(e) for e in self.entries)
        return f"II({body})"


def li_to_ii(g: LiGen) -> dict:
    """Rewrite a polylogarithm generator as one formal iterated integral.

    The argument string is 1, cumulative products of the arguments, with
    weight-fixing zeros between; the coefficient is (-1)^depth.
    """
    d = g.ambient
    prods = []
    acc = Monomial(0, (0,) * d)
    for a in g.args:
        acc = acc * a
        prods.append(acc)
    entries: list = [None, Monomial(0, (0,) * d)]
    for i, n in enumerate(g.ns):
        entries.extend([None] * (n - 1))
        if i < g.depth - 1:
            entries.append(prods[i])
    entries.append(prods[-1])
    return {FormalII(entries): Fraction(-1) ** g.depth}


def ii_shuffle(u: FormalII, v: FormalII) -> dict:
    """Shuffle product of two integrals over a common path."""
    if u.start != v.start or u.end != v.end:
        raise ValueError("shuffle needs matching endpoints")
    out: dict = {}
    for mids in shuffle_words(u.middles, v.middles):
        _acc(out, FormalII((u.start,) + mids + (u.end,)), ONE)
    return out


def ii_path_compose(ii: FormalII, cut) -> list:
    """Splittings of the path at an intermediate point."""
    mids = ii.middles
    out = []
    for j in range(len(mids) + 1):
        out.append(
            (
                FormalII((ii.start,) + mids[:j] + (cut,)),
                FormalII((cut,) + mids[j:] + (ii.end,)),
            )
        )
    return out


def ii_reverse(ii: FormalII) -> tuple:
    return Fraction(-1) ** ii.weight, FormalII(tuple(reversed(ii.entries)))


def goncharov_coproduct(ii: FormalII) -> list:
    """All (subsequence integral, gap integrals) pairs of the coproduct."""
    x = ii.entries
    n = ii.weight
    out = []
    for r in range(n + 1):
        for idx in combinations(range(1, n + 1), r):
            seq = (0,) + idx + (n + 1,)
            left = FormalII((x[0],) + tuple(x[i] for i in idx) + (x[n + 1],))
            gaps = tuple(
                FormalII(x[seq[p] : seq[p + 1] + 1]) for p in range(len(seq) - 1)
            )
            out.append((left, gaps))
    return out


def _nonzero_middles(ii: FormalII) -> int:
    return sum(1 for e in ii.middles if e is not None)


def divergent_reduce(ii: FormalII) -> DepthOneNF:
    """Depth-one normal form of an integral with a single nonzero middle.

    I(z1; 0^j, z2, 0^l; z3) contributes the weight-(j+l+1) arguments
    z3/z2 and z1/z2 with opposite signs and a binomial prefactor; a zero
    endpoint just drops its term.
    """
    mids = ii.middles
    pos = [i for i, e in enumerate(mids) if e is not None]
    if len(pos) != 1:
        raise ValueError("expected exactly one nonzero middle entry")
    j = pos[0]
    l = len(mids) - 1 - j
    z2 = mids[j]
    w = j + l + 1
    c = Fraction(-1) ** (j + 1) * comb(j + l, j)
    items = []
    if ii.end is not None:
        items.append((c, ii.end * z2 ** (-1)))
    if ii.start is not None:
        items.append((-c, ii.start * z2 ** (-1)))
    return depth1_nf(w, items)


def goncharov_symbol_bar(g: LiGen) -> Bar:
    """Bar-word symbol through the full iterated-integral coproduct.

    Independent of the top-component recursion; depth at most two.  Terms
    whose factors are not single-row integrals of positive weight carry
    no reduced-word content and are dropped.
    """
    d = g.ambient
    if g.depth == 1:
        return sigma((_nf_of_gen(g),), d)
    if g.depth != 2:
        raise ValueError("iterated-integral route covers depth <= 2")
    out = Bar.zero(d)
    for ii, c0 in li_to_ii(g).items():
        for left, gaps in goncharov_coproduct(ii):
            if left.weight == 0:
                continue
            positive = [gp for gp in gaps if gp.weight > 0]
            if len(positive) != 1:
                continue
            gap = positive[0]
            if _nonzero_middles(left) != 1 or _nonzero_middles(gap) != 1:
                continue
            nf_left = divergent_reduce(left)
            nf_gap = divergent_reduce(gap)
            out = out + c0 * sigma((nf_left, nf_gap), d)
    return out


# ----------------------------------------------------------- group actions


def _monomial_image(a, exps: tuple) -> dict:
    """Image of a symmetric-tail monomial under a matrix on the variables."""
    if not exps:
        return {(): ONE}
    d = len(exps)
    poly = {(0,) * d: ONE}
    for j, e in enumerate(exps):
        col = [a[i][j] for i in range(d)]
        for _ in range(e):
            poly = _poly_times_linear(poly, col)
    return poly


def bar_gl_act(a, x: Bar) -> Bar:
    """Diagonal action on bar words: letters and tail variables together."""
    am = qm(a)
    out = Bar.zero(x.ambient)
    for (word, exps), c in x.terms.items():
        new_word = tuple(canonical_point(mat_vec(am, qv(p))) for p in word)
        for new_exps, pc in _monomial_image(am, exps).items():
            out.add_word(new_word, c * pc, new_exps)
    return out


def st2_gl_act(a, x: St2) -> St2:
    """Diagonal action on apartment pairs with symmetric tails."""
    am = qm(a)
    d = x.ambient
    out = St2.zero(d)
    for (key_a, key_b, exps), c in x.terms.items():
        va = [mat_vec(am, qv(p)) for p in key_a]
        vb = [mat_vec(am, qv(p)) for p in key_b]
        for new_exps, pc in _monomial_image(am, exps).items():
            out = out + make_pair(va, vb, d, c * pc, new_exps)
    return out


# -------------------------------------------------------- truncated symbol


def truncated_symbol_closed(ns: Sequence[int], ambient: int | None = None) -> St2:
    """Closed form of the truncated symbol on a standard generator.

    L on the first k coordinate vectors, tail e_i^{n_i - 1} / (n_i - 1)!.
    """
    ns = tuple(int(n) for n in ns)
    k = len(ns)
    d = k if ambient is None else ambient
    if k > d:
        raise ValueError("depth exceeds ambient dimension")
    vecs = [tuple(ONE if j == i else ZERO for j in range(d)) for i in range(k)]
    exps = tuple(n - 1 for n in ns) + (0,) * (d - k)
    c = ONE
    for n in ns:
        c /= factorial(n - 1)
    return make_L(vecs, d, c=c, exps=exps)


def _bar_slice_to_st2(slice_terms: dict, exps: tuple, ambient: int) -> St2:
    """Solve a bar-word slice back into the Steinberg tensor square.

    Candidates are L generators on each word read right to left; the
    result is guarded by re-embedding, so failure raises instead of
    returning a wrong element.
    """
    cands: dict = {}
    for word in slice_terms:
        vecs = tuple(qv(p) for p in reversed(word))
        cand = make_L(vecs, ambient, exps=exps)
        key = tuple(sorted(cand.terms))
        if key not in cands:
            cands[key] = cand
    family = list(cands.values())
    fam_bars = [embed_s(c) for c in family]
    words = set(slice_terms)
    for fb in fam_bars:
        words.update(w for (w, _) in fb.terms)
    rows = []
    rhs = []
    for w in sorted(words):
        rows.append([fb.terms.get((w, exps), ZERO) for fb in fam_bars])
        rhs.append(slice_terms.get(w, ZERO))
    coeffs = solve(qm(rows), qv(rhs)) if family else None
    if coeffs is None:
        raise ArithmeticError("bar slice not in the L-generator span")
    out = St2.zero(ambient)
    for c, cand in zip(coeffs, family):
        if c:
            out = out + c * cand
    check = embed_s(out)
    want = {(w, exps): c for w, c in slice_terms.items()}
    if check.terms != want:
        raise ArithmeticError("solve-back failed to reproduce the bar slice")
    return out


def truncated_symbol(g) -> St2:
    """Truncated symbol in the Steinberg tensor square.

    Standard generators go through the coproduct recursion and a
    solve-back; pushforwards act on the closed form by their matrix.
    """
    if isinstance(g, PushedLi):
        base = truncated_symbol_closed(g.ns, g.ambient)
        return g.coeff * st2_gl_act(g.matrix, base)
    bar = recursion_symbol_bar(g)
    d = g.ambient
    slices: dict = {}
    for (word, exps), c in bar.terms.items():
        slices.setdefault(exps, {})[word] = c
    out = St2.zero(d)
    for exps in sorted(slices):
        out = out + _bar_slice_to_st2(slices[exps], exps, d)
    return out


# --------------------------------------------------------- identity checking


def bar_infty_reduce(x: Bar, seed: int = 0) -> Bar:
    """Canonical remainder of a bar element in the stable quotient.

    Projects along a seeded functional transverse to every letter, then
    reduces modulo the shuffle span; empty output certifies zero.
    """
    lines = sorted({p for (word, _exps) in x.terms for p in word})
    h = _h_functional(seed, x.ambient, lines=tuple(lines))
    return shuffle_span_reduce(p_H_project(x, h))


def li_identity_residual(terms: Sequence, seed: int = 0) -> Bar:
    """Stable-quotient residual of a polylogarithm identity.

    Terms are (coefficient, pushforward generator) pairs or
    ("product", weight) markers.  Product markers and generators of
    depth below the ambient dimension die in the quotient and only
    take part in the weight check.
    """
    weight = None
    ambient = None
    pairs = []
    for t in terms:
        if t and t[0] == "product":
            w = int(t[1])
            if weight is None:
                weight = w
            elif weight != w:
                raise ValueError("mixed weights in identity")
            continue
        c, p = t
        if not isinstance(p, PushedLi):
            raise TypeError("expected a pushforward generator")
        if weight is None:
            weight = p.weight
        elif weight != p.weight:
            raise ValueError("mixed weights in identity")
        if ambient is None:
            ambient = p.ambient
        elif ambient != p.ambient:
            raise ValueError("mixed ambient dimensions in identity")
        pairs.append((Fraction(c), p))
    if ambient is None:
        return Bar.zero(1)
    total = Bar.zero(ambient)
    for c, p in pairs:
        if p.depth < ambient:
            continue
        total = total + c * embed_s(truncated_symbol(p))
    return bar_infty_reduce(total, seed)


def verify_li_identity(terms: Sequence, seed: int = 0) -> bool:
    return not li_identity_residual(terms, seed).terms


def identity_terms_from_json(data) -> list:
    """Identity term list from its JSON form.

    Entries carry "coeff" plus either "matrix" and "exponents" for a
    pushforward generator or "product" with the weight split.
    """
    if not isinstance(data, list):
        raise ValueError("identity file must hold a list of terms")
    out = []
    for entry in data:
        c = frac_from_str(entry["coeff"])
        if "product" in entry:
            out.append(("product", sum(int(w) for w in entry["product"])))
            continue
        matrix = [[frac_from_str(str(e)) for e in row] for row in entry["matrix"]]
        ns = tuple(int(n) for n in entry["exponents"])
        out.append((c, PushedLi(ONE, matrix, ns)))
    return out


def identity_terms_to_json(terms: Sequence) -> list:
    out = []
    for t in terms:
        if t and t[0] == "product":
            out.append({"coeff": "1", "product": [int(t[1])]})
            continue
        c, p = t
        entry = p.to_json()
        entry["coeff"] = frac_to_str(Fraction(c) * frac_from_str(entry["coeff"]))
        out.append(entry)
    return out
