"""Rational-function and lattice-sum realizations of apartment classes.

An apartment [v_1..v_d] acts on a point z as det of the dual basis over
the product of the dual linear forms at z; this turns exact identities
between combinations of apartments into identities of rational
functions, checkable at random integer points. The same cones carry
generating-function coefficients, giving the quasi-shuffle and
Bernoulli checks at the lattice level.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .qlinalg import (
    Vec,
    det,
    inverse,
    qv,
    rank,
    solve,
    split_seed,
    transpose,
    vec_dot,
)
from .st2 import St2
from .steinberg import ApKey, St, make_apartment

ZERO = Fraction(0)
ONE = Fraction(1)


class PoleError(ArithmeticError):
    """Raised when an evaluation point sits on one of the pole hyperplanes."""


def cone_to_steinberg(generators: Sequence, ambient: int | None = None) -> St:
    """Apartment class of a simplicial cone, oriented by the sign of det.

    Lower-dimensional cones map to zero.
    """
    gens = [qv(g) for g in generators]
    n = ambient if ambient is not None else len(gens[0])
    if len(gens) != n or rank(tuple(gens)) != n:
        return St.zero(n)
    d = det(tuple(gens))
    sign = 1 if d > 0 else -1
    return sign * make_apartment(gens, n)


@lru_cache(maxsize=None)
def _dual_data(key: ApKey) -> tuple[tuple[Vec, ...], Fraction]:
    pts = tuple(qv(p) for p in key)
    dual = inverse(transpose(pts))
    return dual, ONE / det(pts)


def _poly_mul(p: dict, form: Vec, power: int) -> dict:
    """Multiply a monomial dict by (sum_i form[i] X_i)^power."""
    for _ in range(power):
        nxt: dict = {}
        for mono, c in p.items():
            for i, a in enumerate(form):
                if a == 0:
                    continue
                m2 = list(mono)
                m2[i] += 1
                key = tuple(m2)
                nxt[key] = nxt.get(key, ZERO) + c * a
        p = nxt
    return p


def rho_term(key: ApKey, exps: Sequence[int], z: Sequence) -> Fraction:
    """Evaluate one apartment times an ambient coordinate monomial.

    The monomial is re-expanded in the apartment basis; a basis monomial
    prod v_i^{k_i} contributes prod k_i! * det over the dual forms at z
    raised to k_i + 1.
    """
    zv = qv(z)
    d = len(key)
    dual, ddet = _dual_data(key)
    pairings = [vec_dot(u, zv) for u in dual]
    if any(p == 0 for p in pairings):
        raise PoleError(f"evaluation point on a pole hyperplane of {key}")
    # coordinates of e_j in the apartment basis are the j-th entries of
    # the dual vectors
    mono_dict: dict = {(0,) * d: ONE}
    for j, m in enumerate(exps):
        if m == 0:
            continue
        form = tuple(dual[i][j] for i in range(d))
        mono_dict = _poly_mul(mono_dict, form, m)
    total = ZERO
    for mono, c in mono_dict.items():
        val = ddet * c
        for i, k in enumerate(mono):
            val *= Fraction(math.factorial(k)) / pairings[i] ** (k + 1)
        total += val
    return total


def rho_st(x: St, z: Sequence) -> Fraction:
    total = ZERO
    zeros = (0,) * x.ambient
    for key, c in x.terms.items():
        total += c * rho_term(key, zeros, z)
    return total


def _draw_point(rng, n: int) -> tuple:
    return tuple(Fraction(rng.randint(1, 10_000)) for _ in range(n))


def st_equality_oracle(x: St, y: St, seed: int = 0, points: int = 5) -> bool:
    """Compare two combinations of apartments as rational functions.

    Evaluates the difference at seeded random integer points, resampling
    off the pole locus. Exact arithmetic: agreement at the sampled
    points with disagreement elsewhere would need the difference to be
    a nonzero function vanishing there, which retrying several points
    makes implausible; identity of classes implies agreement always.
    """
    if x.ambient != y.ambient:
        return False
    diff = x - y
    if not diff.terms:
        return True
    rng = split_seed(seed, "st-oracle")
    done = 0
    attempts = 0
    while done < points:
        attempts += 1
        if attempts > 50 * points:
            raise RuntimeError("could not find pole-free evaluation points")
        z = _draw_point(rng, x.ambient)
        try:
            if rho_st(diff, z) != 0:
                return False
        except PoleError:
            continue
        done += 1
    return True


def st2_equality_oracle(x: St2, y: St2, seed: int = 0, points: int = 5) -> bool:
    """Tensor version: evaluate the two factors at independent points.

    Works one sym-monomial coordinate at a time, so elements carrying
    different exponents never mix.
    """
    if x.ambient != y.ambient:
        return False
    diff = x - y
    if not diff.terms:
        return True
    rng = split_seed(seed, "st2-oracle")
    zeros = (0,) * x.ambient
    done = 0
    attempts = 0
    while done < points:
        attempts += 1
        if attempts > 50 * points:
            raise RuntimeError("could not find pole-free evaluation points")
        z = _draw_point(rng, x.ambient)
        zp = _draw_point(rng, x.ambient)
        by_exps: dict = {}
        try:
            for (ka, kb, exps), c in diff.terms.items():
                v = c * rho_term(ka, zeros, z) * rho_term(kb, zeros, zp)
                by_exps[exps] = by_exps.get(exps, ZERO) + v
        except PoleError:
            continue
        if any(v != 0 for v in by_exps.values()):
            return False
        done += 1
    return True


# ------------------------------------------------------------ lattice side


def fourier_coefficient(
    generators: Sequence, forms: Sequence, ns: Sequence[int], nu: Sequence
) -> Fraction:
    """Coefficient of a cone piece at a lattice point.

    Membership is in the open cone (all barycentric coordinates along
    the generators strictly positive); the value is the product of the
    pairings with the given forms, raised to -n_j. Points outside the
    open cone contribute zero.
    """
    gens = [qv(g) for g in generators]
    nuv = qv(nu)
    n = len(nuv)
    cols = tuple(tuple(g[r] for g in gens) for r in range(n))
    lam = solve(cols, nuv)
    if lam is None:
        return ZERO
    # solve() gives one solution; independent generators make it unique
    if any(l <= 0 for l in lam):
        return ZERO
    recon = tuple(
        sum(lam[j] * gens[j][r] for j in range(len(gens))) for r in range(n)
    )
    if recon != tuple(nuv):
        return ZERO
    val = ONE
    for u, m in zip(forms, ns, strict=True):
        p = vec_dot(qv(u), nuv)
        if p == 0:
            raise PoleError("lattice point pairs to zero with a form")
        val *= p ** (-m)
    return val


def truncated_fourier_sum(
    generators: Sequence, forms: Sequence, ns: Sequence[int], x: Sequence, m_max: int
) -> complex:
    """Partial exponential sum over the open cone's lattice points.

    Runs the generator multiples over 1..m_max each; the phase at nu is
    exp(2 pi i <x, nu>) with <x, nu> reduced mod 1 exactly first.
    """
    gens = [qv(g) for g in generators]
    xv = qv(x)
    d = len(gens)
    total = 0j
    from itertools import product as iproduct

    for lam in iproduct(range(1, m_max + 1), repeat=d):
        nu = tuple(
            sum(lam[j] * gens[j][r] for j in range(d)) for r in range(len(xv))
        )
        coeff = ONE
        for u, m in zip(forms, ns, strict=True):
            coeff *= vec_dot(qv(u), nu) ** (-m)
        phase = vec_dot(xv, nu)
        frac = phase - math.floor(phase)
        total += float(coeff) * cmath.exp(2j * math.pi * float(frac))
    return total


def bernoulli_reference(n: int, x) -> complex:
    """-(2 pi i)^n / n! times the periodic Bernoulli polynomial at x."""
    import mpmath

    xf = Fraction(x)
    frac = xf - math.floor(xf)
    bn = mpmath.bernpoly(n, mpmath.mpf(frac.numerator) / frac.denominator)
    val = -((2j * mpmath.pi) ** n) / mpmath.factorial(n) * bn
    return complex(val)


def coefficient_shuffle_check(box: int = 25) -> bool:
    """Exact per-point check of the diagonal decomposition of a product.

    The first-quadrant product cone splits into the two open triangles
    and the diagonal ray; coefficients 1/(a b) must match piecewise for
    every lattice point of the box.
    """
    e1, e2, diag = (1, 0), (0, 1), (1, 1)
    forms = (e1, e2)
    ns = (1, 1)
    for a in range(1, box + 1):
        for b in range(1, box + 1):
            nu = (a, b)
            want = Fraction(1, a * b)
            got = (
                fourier_coefficient([e1, diag], forms, ns, nu)
                + fourier_coefficient([e2, diag], forms, ns, nu)
                + fourier_coefficient([diag], forms, ns, nu)
            )
            if got != want:
                return False
    return True


def homogeneity_check(
    generators: Sequence, forms: Sequence, ns: Sequence[int], nu: Sequence, scale: int
) -> bool:
    """Coefficients scale by the total weight under dilation of the point."""
    base = fourier_coefficient(generators, forms, ns, nu)
    dil = fourier_coefficient(
        generators, forms, ns, tuple(scale * q for q in qv(nu))
    )
    return dil == Fraction(scale) ** (-sum(ns)) * base
