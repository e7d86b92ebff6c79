"""Command line for reductions, symbols, verification suites, and studies.

Every command reads and writes plain JSON or CSV, records the seed in
its output, and is byte-reproducible for fixed seed and inputs.  Exit
codes: 0 pass, 1 mathematical failure, 2 malformed input.
"""
import argparse
import io
import json
import sys
from fractions import Fraction
from itertools import combinations

from .barcplx import Bar
from .cones import (
    bernoulli_reference,
    coefficient_shuffle_check,
    st_equality_oracle,
    truncated_fourier_sum,
)
from .mpl import identity_terms_from_json, li_identity_residual
from .qlinalg import det, frac_from_str, frac_to_str, qm, qv, rank, split_seed
from .st2 import (
    St2,
    cobracket_matches_coproduct,
    dualize,
    is_zero_st_infty,
    make_I,
    make_L,
    st2_normal_form,
    st2_product,
    symbol_I,
    symbol_L,
)
from .steinberg import ash_rudolph_reduce, flag_expand, make_apartment

ONE = Fraction(1)


class InputError(Exception):
    """Malformed file or arguments; maps to exit code 2."""


# ----------------------------------------------------------- serialization


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _frac(value) -> Fraction:
    try:
        return frac_from_str(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {value!r}") from exc


def _vec(data) -> tuple:
    if not isinstance(data, (list, tuple)) or not data:
        raise InputError(f"bad vector {data!r}")
    return tuple(_frac(e) for e in data)


def _vec_json(v) -> list:
    return [frac_to_str(Fraction(e)) for e in v]


def _st_from_json(data):
    try:
        dim = int(data["dim"])
        terms = data["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("element needs 'dim' and 'terms'") from exc
    out = None
    for entry in terms:
        try:
            vecs = [_vec(v) for v in entry["apartment"]]
            c = _frac(entry.get("coeff", "1"))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad term {entry!r}") from exc
        if len(vecs) != dim:
            raise InputError(f"apartment needs {dim} vectors, got {len(vecs)}")
        if rank([qv(v) for v in vecs]) < dim:
            raise InputError(f"degenerate apartment {entry['apartment']!r}")
        piece = c * make_apartment(vecs, dim)
        out = piece if out is None else out + piece
    if out is None:
        raise InputError("element has no terms")
    return out


def _st_to_json(x) -> list:
    rows = []
    for key, c in sorted(x.terms.items()):
        rows.append({"apartment": [_vec_json(p) for p in key], "coeff": frac_to_str(c)})
    return rows


def _bar_to_json(x: Bar) -> list:
    rows = []
    for (word, exps), c in sorted(x.terms.items()):
        rows.append(
            {
                "coeff": frac_to_str(c),
                "exp": [int(e) for e in exps],
                "word": [_vec_json(p) for p in word],
            }
        )
    return rows


def _st2_nf_to_json(nf: dict, limit: int = 8) -> list:
    rows = []
    for (key_a, key_b, exps), c in sorted(nf.items())[:limit]:
        rows.append(
            {
                "coeff": frac_to_str(c),
                "exp": [int(e) for e in exps],
                "pair": [
                    [_vec_json(p) for p in key_a],
                    [_vec_json(p) for p in key_b],
                ],
            }
        )
    return rows


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, out_path) -> None:
    _emit(json.dumps(obj, sort_keys=True, indent=2) + "\n", out_path)


# ----------------------------------------------------------------- reduce


def cmd_reduce(args) -> int:
    x = _st_from_json(_load_json(args.file))
    nf = flag_expand(x)
    report = {
        "seed": args.seed,
        "dim": x.ambient,
        "zero": not nf.terms,
        "terms": _st_to_json(nf),
    }
    _emit_json(report, args.out)
    return 0


# ----------------------------------------------------------------- symbol


def cmd_symbol(args) -> int:
    vecs = [tuple(_frac(e) for e in text.split(",")) for text in args.vectors]
    dims = {len(v) for v in vecs}
    if len(dims) != 1:
        raise InputError("vectors have mixed lengths")
    ambient = args.dim or dims.pop()
    try:
        bar = (symbol_L if args.kind == "L" else symbol_I)(vecs, ambient)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = {
        "seed": args.seed,
        "ambient": ambient,
        "kind": args.kind,
        "terms": _bar_to_json(bar),
    }
    _emit_json(report, args.out)
    return 0


# ----------------------------------------------------------------- verify


def _rand_basis(rng, n: int, bound: int = 3) -> list:
    while True:
        vecs = [
            tuple(rng.randint(-bound, bound) for _ in range(n)) for _ in range(n)
        ]
        if rank([qv(v) for v in vecs]) == n:
            return vecs


def _case_perturbation(case, ambient: int):
    pert = case.get("perturb")
    if pert is None:
        return None, None
    vecs = [_vec(v) for v in pert.get("vectors", ())]
    c = _frac(pert.get("coeff", "1"))
    if len(vecs) != ambient or rank([qv(v) for v in vecs]) < ambient:
        raise InputError(f"perturbation needs an {ambient}-basis")
    return vecs, c


def _suite_shuffle(basis, n, seed, points, extra):
    vecs = [qv(v) for v in basis]
    for d1 in range(1, n):
        for make in (make_L, make_I):
            lhs = st2_product(make(vecs[:d1], n), make(vecs[d1:], n))
            rhs = St2.zero(n)
            for pos in combinations(range(n), d1):
                arranged = [None] * n
                rest = [i for i in range(n) if i not in pos]
                for k, p in enumerate(pos):
                    arranged[p] = vecs[k]
                for k, p in enumerate(rest):
                    arranged[p] = vecs[d1 + k]
                rhs = rhs + make(arranged, n)
            residual = lhs - rhs
            if extra is not None:
                residual = residual + extra
            nf = st2_normal_form(residual)
            if nf:
                return {
                    "relation": f"{make.__name__} split {d1}",
                    "residual": _st2_nf_to_json(nf),
                }
    return None


def _suite_dihedral(basis, n, seed, points, extra):
    vecs = [qv(v) for v in basis]
    total = tuple(sum(v[i] for v in vecs) for i in range(n))
    v0 = tuple(-e for e in total)
    L = make_L(vecs, n)
    I = make_I(vecs, n)
    checks = [
        ("rotation", L - make_L(vecs[1:] + [v0], n)),
        ("negation", L - make_L([tuple(-e for e in v) for v in vecs], n)),
        ("L reversal", L - make_L(list(reversed(vecs)), n, c=(-1) ** (n + 1))),
        ("I reversal", I - make_I(list(reversed(vecs)), n, c=(-1) ** (n + 1))),
    ]
    for name, residual in checks:
        if extra is not None:
            residual = residual + extra
        if not is_zero_st_infty(residual, seed=seed):
            return {"relation": name}
    return None


def _suite_cobracket(basis, n, seed, points, extra):
    if extra is not None:
        return {"relation": "perturbations not meaningful for cobracket"}
    if not cobracket_matches_coproduct([qv(v) for v in basis], seed=seed):
        return {"relation": "cobracket vs antisymmetrized coproduct"}
    return None


def _suite_duality(basis, n, seed, points, extra):
    from .qlinalg import inverse, transpose

    vecs = tuple(qv(v) for v in basis)
    dual = inverse(transpose(vecs))
    checks = [
        ("L to I", dualize(make_L(vecs, n)) - make_I(list(reversed(dual)), n, c=(-1) ** n)),
        ("involution", dualize(dualize(make_L(vecs, n))) - make_L(vecs, n)),
    ]
    for name, residual in checks:
        if extra is not None:
            residual = residual + extra
        nf = st2_normal_form(residual)
        if nf:
            return {"relation": name, "residual": _st2_nf_to_json(nf)}
    return None


def _suite_ashrudolph(basis, n, seed, points, extra):
    x = make_apartment([qv(v) for v in basis], n)
    red = ash_rudolph_reduce([qv(v) for v in basis])
    if extra is not None:
        red = red + extra
    for key in red.terms:
        d = det(qm([list(p) for p in key]))
        if abs(d) != 1:
            return {"relation": "unimodularity", "apartment": [_vec_json(p) for p in key]}
    if not st_equality_oracle(x, red, seed=seed, points=points):
        return {"relation": "evaluation mismatch", "terms": _st_to_json(red)[:8]}
    return None


_SUITES = {
    "shuffle": (_suite_shuffle, "st2"),
    "dihedral": (_suite_dihedral, "st2"),
    "cobracket": (_suite_cobracket, "none"),
    "duality": (_suite_duality, "st2"),
    "ashrudolph": (_suite_ashrudolph, "st"),
}


def cmd_verify(args) -> int:
    if args.suite not in _SUITES:
        raise InputError(f"unknown suite {args.suite!r}")
    run, pert_kind = _SUITES[args.suite]
    n = args.dim
    if args.file:
        data = _load_json(args.file)
        if not isinstance(data, dict) or "cases" not in data:
            raise InputError("fixture needs a 'cases' list")
        cases = []
        for entry in data["cases"]:
            basis = [_vec(v) for v in entry["basis"]]
            if len(basis) != len(basis[0]):
                raise InputError("case basis must be square")
            if rank([qv(v) for v in basis]) < len(basis):
                raise InputError(f"case basis is degenerate: {entry['basis']!r}")
            cases.append((basis, entry))
        if cases:
            n = len(cases[0][0])
    else:
        rng = split_seed(args.seed, f"verify-{args.suite}")
        cases = [(_rand_basis(rng, n), {}) for _ in range(args.cases)]
    failures = []
    for i, (basis, entry) in enumerate(cases):
        pvecs, pc = _case_perturbation(entry, len(basis))
        extra = None
        if pvecs is not None:
            if pert_kind == "st2":
                extra = pc * make_L(pvecs, len(basis))
            elif pert_kind == "st":
                extra = pc * make_apartment(pvecs, len(basis))
            else:
                raise InputError(f"suite {args.suite} takes no perturbation")
        witness = run(basis, len(basis), args.seed, args.oracle_points, extra)
        if witness is not None:
            failures.append(
                {"case": i, "basis": [_vec_json(v) for v in basis], "witness": witness}
            )
    report = {
        "seed": args.seed,
        "suite": args.suite,
        "dim": n,
        "cases": len(cases),
        "failures": failures,
        "verdict": "FAIL" if failures else "PASS",
    }
    _emit_json(report, args.out)
    return 1 if failures else 0


# --------------------------------------------------------------------- st


def cmd_st(args) -> int:
    data = _load_json(args.file)
    try:
        terms = identity_terms_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad identity file: {exc}") from exc
    try:
        residual = li_identity_residual(terms, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    weights = set()
    for t in terms:
        weights.add(t[1] if t[0] == "product" else t[1].weight)
    report = {
        "seed": args.seed,
        "terms": len(terms),
        "weight": max(weights) if weights else None,
        "verdict": "PASS" if not residual.terms else "FAIL",
    }
    if residual.terms:
        report["residual"] = _bar_to_json(residual)
    _emit_json(report, args.out)
    return 0 if not residual.terms else 1


# ---------------------------------------------------------------- fourier


def _study_bernoulli(cfg, box, seed):
    weights = [int(n) for n in cfg.get("weights", [1, 2, 3])]
    points = [_frac(x) for x in cfg.get("points", ["1/3", "1/5", "2/7"])]
    m_max = int(box or cfg.get("m_max", 10000))
    tol = cfg.get("tolerance")
    rows = []
    ok = True
    for n in weights:
        for x in points:
            # symmetric truncation over both rays; the form stays (1,)
            # so odd weights pick up the sign of the negative ray
            val = truncated_fourier_sum([(1,)], [(1,)], [n], (x,), m_max)
            val += truncated_fourier_sum([(-1,)], [(1,)], [n], (x,), m_max)
            ref = bernoulli_reference(n, x)
            err = abs(val - ref)
            status = ""
            if tol is not None:
                status = "pass" if err <= float(tol) else "fail"
                ok = ok and status == "pass"
            rows.append(
                [
                    str(n),
                    frac_to_str(x),
                    str(m_max),
                    f"{val.real:.12e}",
                    f"{val.imag:.12e}",
                    f"{ref.real:.12e}",
                    f"{ref.imag:.12e}",
                    f"{err:.12e}",
                    status,
                ]
            )
    header = ["n", "x", "m_max", "sum_re", "sum_im", "ref_re", "ref_im", "abs_err", "status"]
    return header, rows, ok


def _study_shuffle(cfg, box, seed):
    size = int(box or cfg.get("box", 25))
    good = coefficient_shuffle_check(size)
    return ["box", "status"], [[str(size), "pass" if good else "fail"]], good


def _study_cone(cfg, box, seed):
    try:
        gens = [_vec(g) for g in cfg["generators"]]
        forms = [_vec(u) for u in cfg["forms"]]
        ns = [int(n) for n in cfg["exponents"]]
        points = [[_frac(e) for e in p] for p in cfg["points"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"cone study needs generators/forms/exponents/points: {exc}")
    m_max = int(box or cfg.get("m_max", 50))
    rows = []
    for p in points:
        val = truncated_fourier_sum(gens, forms, ns, p, m_max)
        rows.append(
            [
                " ".join(frac_to_str(e) for e in p),
                str(m_max),
                f"{val.real:.12e}",
                f"{val.imag:.12e}",
            ]
        )
    return ["x", "m_max", "sum_re", "sum_im"], rows, True


def cmd_fourier(args) -> int:
    cfg = _load_json(args.file)
    if not isinstance(cfg, dict) or "study" not in cfg:
        raise InputError("config needs a 'study' field")
    studies = {
        "bernoulli": _study_bernoulli,
        "shuffle": _study_shuffle,
        "cone": _study_cone,
    }
    if cfg["study"] not in studies:
        raise InputError(f"unknown study {cfg['study']!r}")
    header, rows, ok = studies[cfg["study"]](cfg, args.box, args.seed)
    buf = io.StringIO()
    buf.write(f"# seed={args.seed}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(row) + "\n")
    _emit(buf.getvalue(), args.out)
    return 0 if ok else 1


# ------------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinpoly",
        description="Exact computations with apartment classes and polylogarithm symbols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed, recorded in the output")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("reduce", help="flag-basis normal form of an element")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("symbol", help="bar-word expansion of a generator")
    p.add_argument("--kind", choices=("L", "I"), required=True)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("vectors", nargs="+", help="comma-separated coordinates")
    common(p)
    p.set_defaults(func=cmd_symbol)

    p = sub.add_parser("verify", help="run a relation suite")
    p.add_argument("suite", choices=sorted(_SUITES))
    p.add_argument("file", nargs="?", default=None, help="optional fixture of cases")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--cases", type=int, default=12)
    p.add_argument("--oracle-points", type=int, default=5, dest="oracle_points")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("st", help="verify a polylogarithm identity file")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_st)

    p = sub.add_parser("fourier", help="truncated Fourier studies, CSV output")
    p.add_argument("file", help="study configuration")
    p.add_argument("--box", type=int, default=None, help="override the summation box")
    common(p)
    p.set_defaults(func=cmd_fourier)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
