"""Bar-complex words over the algebra of apartment classes.

A word is an ordered tuple of letters. Letters of the basic words are
lines (canonical integer points of the ambient space); the differential
merges adjacent letters into classes on higher-dimensional subspaces,
so merged letters carry a subspace together with a flag-normalized
class in that subspace's local coordinates. Merged letters only appear
in differential outputs; the projection and shuffle-reduction operators
work on all-lines words and refuse mixed input.

Each term may carry an exponent tuple (a coordinate monomial of the
ambient space) recording a symmetric-power factor; the bar operators
leave it untouched.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .qlinalg import Flag, Subspace, Vec, canonical_point, qv, vec_dot
from .steinberg import St, _acc, flag_expand, make_apartment, normalize_apartment

Point = tuple[int, ...]
Letter = tuple  # ('L', point) or ('S', rows, terms)
Word = tuple[Point, ...]

ZERO = Fraction(0)


def line_letter(v: Sequence) -> Point:
    return canonical_point(qv(v))


class Bar:
    """Combination of bar words, with an optional symmetric-power exponent.

    terms:  {(word_of_points, exps): coeff} for all-lines words
    mixed:  {(word_of_letters, exps): coeff} for words with merged letters
    """

    __slots__ = ("ambient", "terms", "mixed")

    def __init__(self, ambient: int, terms=None, mixed=None):
        self.ambient = ambient
        self.terms: dict = dict(terms) if terms else {}
        self.mixed: dict = dict(mixed) if mixed else {}

    @classmethod
    def zero(cls, ambient: int) -> "Bar":
        return cls(ambient)

    def add_word(self, word: Word, c, exps: tuple[int, ...] = ()) -> None:
        _acc(self.terms, (tuple(word), tuple(exps)), Fraction(c))

    def add_mixed(self, letters: tuple, c, exps: tuple[int, ...] = ()) -> None:
        _acc(self.mixed, (tuple(letters), tuple(exps)), Fraction(c))

    def __add__(self, other: "Bar") -> "Bar":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimensions differ")
        out = Bar(self.ambient, self.terms, self.mixed)
        for k, c in other.terms.items():
            _acc(out.terms, k, c)
        for k, c in other.mixed.items():
            _acc(out.mixed, k, c)
        return out

    def __sub__(self, other: "Bar") -> "Bar":
        return self + (-1) * other

    def __rmul__(self, c) -> "Bar":
        c = Fraction(c)
        if c == 0:
            return Bar.zero(self.ambient)
        return Bar(
            self.ambient,
            {k: c * v for k, v in self.terms.items()},
            {k: c * v for k, v in self.mixed.items()},
        )

    def __neg__(self) -> "Bar":
        return (-1) * self

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Bar)
            and self.ambient == other.ambient
            and self.terms == other.terms
            and self.mixed == other.mixed
        )

    def __bool__(self) -> bool:
        return bool(self.terms) or bool(self.mixed)

    def __repr__(self) -> str:
        n = len(self.terms) + len(self.mixed)
        return f"Bar({n} terms, ambient={self.ambient})"


def bar_word(points: Sequence[Sequence], ambient: int | None = None, c=1, exps=()) -> Bar:
    pts = [line_letter(p) for p in points]
    n = ambient if ambient is not None else len(pts[0])
    out = Bar.zero(n)
    out.add_word(tuple(pts), Fraction(c), tuple(exps))
    return out


# ----------------------------------------------------------------- letters


def _letter_subspace(letter: Letter, ambient: int) -> Subspace:
    if letter[0] == "L":
        return Subspace.span([qv(letter[1])], ambient)
    return Subspace(ambient, letter[1])


def _letter_ambient_terms(letter: Letter, ambient: int) -> dict:
    """Letter as {apartment key in ambient coords: coeff}."""
    if letter[0] == "L":
        return {(letter[1],): Fraction(1)}
    w = Subspace(ambient, letter[1])
    pts = [w.from_local(qv(q)) for q in letter[2]]
    return dict(make_apartment(pts, ambient).terms)


def _expand_letters(w: Subspace, ambient_terms: dict) -> list[tuple[Letter, Fraction]]:
    """Flag-basis letters of a class supported on w, with coefficients.

    A merged letter must be a single basis element, not a whole class:
    words are multilinear in their letters, so classes have to expand
    for cross-term cancellation to happen.
    """
    k = w.dim
    local = St.zero(k)
    for key, c in ambient_terms.items():
        pts = [w.local_coords(qv(p)) for p in key]
        piece = make_apartment(pts, k)
        for k2, s in piece.terms.items():
            local.add_term(k2, c * s)
    local = flag_expand(local, Flag.standard(k))
    return [(("S", w.rows, key), c) for key, c in sorted(local.terms.items())]


def _merge_letters(a: Letter, b: Letter, ambient: int) -> list[tuple[Letter, Fraction]]:
    wa = _letter_subspace(a, ambient)
    wb = _letter_subspace(b, ambient)
    ta = _letter_ambient_terms(a, ambient)
    tb = _letter_ambient_terms(b, ambient)
    prod: dict = {}
    for ka, ca in ta.items():
        for kb, cb in tb.items():
            piece = make_apartment(ka + kb, ambient)
            for k2, s in piece.terms.items():
                _acc(prod, k2, ca * cb * s)
    if not prod:
        return []
    return _expand_letters(wa.add(wb), prod)


def bar_differential(x: Bar) -> Bar:
    """Sum of adjacent-letter merges with alternating signs."""
    out = Bar.zero(x.ambient)
    items = [
        (tuple(("L", p) for p in word), exps, c) for (word, exps), c in x.terms.items()
    ] + [(letters, exps, c) for (letters, exps), c in x.mixed.items()]
    for letters, exps, c in items:
        m = len(letters)
        for j in range(m - 1):
            for merged, mc in _merge_letters(letters[j], letters[j + 1], x.ambient):
                new_word = letters[:j] + (merged,) + letters[j + 2 :]
                out.add_mixed(new_word, c * mc * (-1) ** j, exps)
    return out


def is_zero_bar(x: Bar) -> bool:
    return not x.terms and not x.mixed


# ---------------------------------------------------------------- shuffles


def _require_lines(x: Bar, op: str) -> None:
    if x.mixed:
        raise ValueError(f"{op} is only defined on all-lines words")


def shuffle_words(u: Word, v: Word) -> Iterable[Word]:
    """All interleavings of u and v preserving the internal orders."""
    lu, lv = len(u), len(v)
    for positions in combinations(range(lu + lv), lu):
        pos_set = set(positions)
        word: list = []
        iu = iv = 0
        for t in range(lu + lv):
            if t in pos_set:
                word.append(u[iu])
                iu += 1
            else:
                word.append(v[iv])
                iv += 1
        yield tuple(word)


def bar_shuffle(x: Bar, y: Bar) -> Bar:
    """Shuffle product; letters of each word pair must stay independent."""
    _require_lines(x, "bar_shuffle")
    _require_lines(y, "bar_shuffle")
    if x.ambient != y.ambient:
        raise ValueError("ambient dimensions differ")
    out = Bar.zero(x.ambient)
    for (u, e1), cu in x.terms.items():
        for (v, e2), cv in y.terms.items():
            joint = u + v
            if normalize_apartment(joint, x.ambient) is None:
                raise ValueError("bar_shuffle with overlapping supports")
            exps = _mul_exps(e1, e2)
            for word in shuffle_words(u, v):
                out.add_word(word, cu * cv, exps)
    return out


def _mul_exps(e1: tuple, e2: tuple) -> tuple:
    if not e1:
        return e2
    if not e2:
        return e1
    return tuple(a + b for a, b in zip(e1, e2, strict=True))


def deconcat(x: Bar) -> list[tuple[Bar, Bar]]:
    """All splits word = prefix . suffix, including the empty ends."""
    _require_lines(x, "deconcat")
    out = []
    for (word, exps), c in x.terms.items():
        for k in range(len(word) + 1):
            left = Bar.zero(x.ambient)
            right = Bar.zero(x.ambient)
            left.add_word(word[:k], c, exps)
            right.add_word(word[k:], Fraction(1), exps)
            out.append((left, right))
    return out


def p_H_project(x: Bar, h: Sequence) -> Bar:
    """Keep words all of whose lines pair nontrivially with h."""
    _require_lines(x, "p_H_project")
    hv = qv(h)
    if len(hv) != x.ambient:
        raise ValueError("functional length does not match ambient dimension")
    out = Bar.zero(x.ambient)
    for (word, exps), c in x.terms.items():
        if all(vec_dot(hv, qv(p)) != 0 for p in word):
            out.add_word(word, c, exps)
    return out


# ------------------------------------------------- shuffle-span reduction


@lru_cache(maxsize=None)
def _shuffle_reducer(multiset: tuple[Point, ...]):
    """RREF rows of the shuffle span on words with the given letters.

    Returns (columns, rows) where columns is the lex-ordered tuple of
    words and rows are reduced generator vectors with pivot map.
    """
    letters = list(multiset)
    n = len(letters)
    words = sorted(set(permutations(letters)))
    col_index = {w: i for i, w in enumerate(words)}
    rows: list[list[Fraction]] = []
    seen_splits = set()
    for r in range(1, n):
        for idx in combinations(range(n), r):
            left = tuple(sorted(letters[i] for i in idx))
            rest = [letters[i] for i in range(n) if i not in idx]
            right = tuple(sorted(rest))
            if (left, right) in seen_splits:
                continue
            seen_splits.add((left, right))
            for u in sorted(set(permutations(left))):
                for v in sorted(set(permutations(right))):
                    vec = [ZERO] * len(words)
                    for w in shuffle_words(u, v):
                        vec[col_index[w]] += 1
                    rows.append(vec)
    # gaussian elimination with lex-first pivots
    reduced: list[tuple[int, list[Fraction]]] = []  # (pivot, row)
    for vec in rows:
        for p, rrow in reduced:
            if vec[p] != 0:
                f = vec[p]
                vec = [a - f * b for a, b in zip(vec, rrow)]
        pivot = next((i for i, a in enumerate(vec) if a != 0), None)
        if pivot is None:
            continue
        pv = vec[pivot]
        vec = [a / pv for a in vec]
        for _, rrow in reduced:
            if rrow[pivot] != 0:
                f = rrow[pivot]
                rrow[:] = [a - f * b for a, b in zip(rrow, vec)]
        reduced.append((pivot, vec))
    reduced.sort(key=lambda pr: pr[0])
    return tuple(words), tuple((p, tuple(r)) for p, r in reduced)


def shuffle_span_reduce(x: Bar) -> Bar:
    """Canonical remainder of x modulo the shuffle ideal, per letter multiset.

    The output is zero exactly when x is a combination of shuffle
    products, so this is the workhorse zero test for the quotient by
    decomposables.
    """
    _require_lines(x, "shuffle_span_reduce")
    groups: dict = {}
    for (word, exps), c in x.terms.items():
        key = (tuple(sorted(word)), exps)
        groups.setdefault(key, {})[word] = groups.setdefault(key, {}).get(word, ZERO) + c
    out = Bar.zero(x.ambient)
    for (multiset, exps), wordmap in groups.items():
        if len(multiset) <= 1:
            for w, c in wordmap.items():
                if c:
                    out.add_word(w, c, exps)
            continue
        words, rows = _shuffle_reducer(multiset)
        vec = [wordmap.get(w, ZERO) for w in words]
        for p, rrow in rows:
            if vec[p] != 0:
                f = vec[p]
                vec = [a - f * b for a, b in zip(vec, rrow)]
        for w, a in zip(words, vec):
            if a:
                out.add_word(w, a, exps)
    return out
