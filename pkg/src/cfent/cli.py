"""Command-line interface: ``cfent verify | solve | entropy | curves | fock-check``.

Exit codes: 0 pass, 1 check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import algebra, entanglement as ent, realization as rz
from .fock import FockBasis, ModeConfig, ResourceLimitError, StructureFunction

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
CURVES = ("s2", "purity", "equi-entropy-contour", "entropy-K", "entropy-trW", "pair-3mode")


class InputError(Exception):
    pass


# --- matrix files -----------------------------------------------------------

def matrix_to_json(m: np.ndarray, label: str | None = None, chi2: float | None = None) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    out = {"rows": int(m.shape[0]), "cols": int(m.shape[1]),
           "data": [[float(z.real), float(z.imag)] for z in m.ravel()]}
    if label is not None:
        out["label"] = label
    if chi2 is not None:
        out["chi2"] = float(chi2)
    return out


def matrix_from_json(obj, source: str = "<input>") -> np.ndarray:
    if not isinstance(obj, dict):
        raise InputError(f"{source}: top level must be an object with rows, cols, data")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise InputError(f"{source}: missing field '{key}'")
    rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    for key, val in (("rows", rows), ("cols", cols)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise InputError(f"{source}: field '{key}' must be a positive integer")
    if not isinstance(data, list):
        raise InputError(f"{source}: field 'data' must be a list of [re, im] pairs")
    if len(data) != rows * cols:
        raise InputError(f"{source}: field 'data' has {len(data)} entries, expected rows*cols = {rows * cols}")
    vals = []
    for i, pair in enumerate(data):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise InputError(f"{source}: field 'data[{i}]' must be a [re, im] pair of numbers")
        if not all(math.isfinite(x) for x in pair):
            raise InputError(f"{source}: field 'data[{i}]' is not finite")
        vals.append(complex(pair[0], pair[1]))
    return np.array(vals, dtype=complex).reshape(rows, cols)


def _file_chi2(obj, source: str) -> float | None:
    val = obj.get("chi2") if isinstance(obj, dict) else None
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise InputError(f"{source}: field 'chi2' must be a finite number")
    return float(val)


def read_matrix_file(path: str) -> tuple[np.ndarray, float | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}") from None
    return matrix_from_json(obj, path), _file_chi2(obj, path)


def read_matrix(path: str) -> np.ndarray:
    return read_matrix_file(path)[0]


def write_matrix(path: Path, m: np.ndarray, label: str | None = None,
                 chi2: float | None = None) -> None:
    path.write_text(json.dumps(matrix_to_json(m, label, chi2), indent=1) + "\n")


def _file_chi2_of(paths) -> float | None:
    """chi(2) recorded in the files, if any; conflicting values are an input error."""
    vals = {read_matrix_file(p)[1] for p in paths} - {None}
    if len(vals) > 1:
        raise InputError(f"files record conflicting 'chi2' values {sorted(vals)}")
    return vals.pop() if vals else None


def _read_all(paths) -> list[np.ndarray]:
    mats = [read_matrix(p) for p in paths]
    if len({m.shape for m in mats}) > 1:
        raise InputError("matrices have inconsistent shapes: "
                         + ", ".join(f"{p} {m.shape}" for p, m in zip(paths, mats)))
    return mats


# --- output helpers ---------------------------------------------------------

def _emit(rows: list[tuple[str, object]], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps({k: v for k, v in rows}, indent=1) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in rows:
            w.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
    else:
        for k, v in rows:
            if isinstance(v, float):
                v = f"{v:.10g}"
            elif isinstance(v, list):
                v = " ".join(f"{x:.10g}" if isinstance(x, float) else str(x) for x in v)
            out.write(f"{k:<22s} {v}\n")


def _fmt_report(prefix: str, rep: rz.RealizationReport) -> list[tuple[str, object]]:
    rows = [(f"{prefix}{k}", float(v)) for k, v in rep.residuals.items()]
    rows.append((f"{prefix}tolerance", rep.tolerance))
    rows.append((f"{prefix}result", "PASS" if rep.passed else "FAIL"))
    return rows


def _structure(args, n_max: int) -> StructureFunction:
    if getattr(args, "q", None) is not None:
        return StructureFunction.q_deformed(args.q, n_max)
    return StructureFunction.from_chi2(args.chi2, n_max)


def _fock_rows(phis, args) -> tuple[list, bool]:
    nb, nf = phis[0].shape
    basis = FockBasis(ModeConfig(nb, nf, args.cutoff))
    chi = _structure(args, args.cutoff)
    depth = nf if args.depth is None else args.depth
    weak = algebra.realization_weak_residual(phis, basis, chi, depth=depth)
    square = max(algebra.strict_independence_residual([p], basis, chi) for p in phis)
    ok = weak < args.tol and square < args.tol
    return [("fock_cutoff", args.cutoff), ("fock_depth", depth),
            ("fock_weak_residual", weak), ("fock_square_residual", square),
            ("fock_result", "PASS" if ok else "FAIL")], ok


# --- subcommands ------------------------------------------------------------

def cmd_verify(args) -> int:
    phis = _read_all(args.files)
    phis = [algebra.as_structural(p) for p in phis]
    if args.chi2 is None:
        found = _file_chi2_of(args.files)
        args.chi2 = 2.0 if found is None else found
    rep = rz.check(phis, args.chi2, args.tol)
    rows = [("modes", len(phis)), ("shape", list(phis[0].shape)), ("chi2", args.chi2)]
    rows += _fmt_report("", rep)
    ok = rep.passed
    if args.fock:
        frows, fok = _fock_rows(phis, args)
        rows += frows
        ok = ok and fok
    _emit(rows, args.format)
    return EXIT_PASS if ok else EXIT_FAIL


def _mode_rows(i: int, phi: np.ndarray) -> list[tuple[str, object]]:
    s = ent.schmidt(phi)
    return [(f"phi{i}_schmidt", [float(x) for x in s.lambdas]),
            (f"phi{i}_entropy", ent.entropy(s)),
            (f"phi{i}_purity", ent.purity(s))]


def cmd_solve(args) -> int:
    rng = np.random.default_rng(args.seed)
    try:
        sample = rz.sample_family(args.family, rng, chi2=args.chi2, variant=args.variant,
                                  theta=args.theta, theta1=args.theta1, theta2=args.theta2,
                                  ordered=not args.full_range)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, phi in enumerate(sample.phis, start=1):
        p = out / f"phi{i}.json"
        write_matrix(p, phi, f"{sample.tag} mode {i}", sample.chi2)
        paths.append(str(p))
    rep = sample.report(args.tol)
    rows = [("family", sample.tag), ("variant", sample.variant or "-"),
            ("chi2", sample.chi2), ("seed", args.seed), ("files", paths)]
    for i, phi in enumerate(sample.phis, start=1):
        rows += _mode_rows(i, phi)
    rows += _fmt_report("", rep)
    _emit(rows, args.format)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_entropy(args) -> int:
    rows = []
    for path in args.files:
        phi = read_matrix(path)
        s = ent.schmidt(phi)
        norm = float(np.sum(s.lambdas**2))
        if abs(norm - 1.0) > 1e-9:
            raise InputError(f"{path}: field 'data' is not normalized (sum |phi|^2 = {norm:.6g})")
        rows += [("file", path), ("schmidt", [float(x) for x in s.lambdas]),
                 ("entropy", ent.entropy(s)), ("purity", ent.purity(s))]
    _emit(rows, args.format)
    return EXIT_PASS


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 2:
        raise InputError("field 'steps' must be >= 2")
    return np.linspace(lo, hi, n)


def curve_rows(args) -> tuple[list[str], list[list[float]]]:
    c = args.curve
    half = np.pi / 2
    if c in ("s2", "purity"):
        lo = 0.0 if args.start is None else args.start
        hi = half if args.stop is None else args.stop
        xs = _grid(lo, hi, args.steps)
        fn = ent.s2 if c == "s2" else ent.purity_theta
        return ["theta", "entropy" if c == "s2" else "purity"], [[x, float(fn(x))] for x in xs]
    if c == "entropy-trW":
        lo = 0.0 if args.start is None else args.start
        hi = 2.0 if args.stop is None else args.stop
        if lo < 0 or hi > 2:
            raise InputError("field 'start/stop' must lie in [0, 2] for entropy-trW")
        return ["tr_w", "entropy"], [[x, ent.entropy_trW(x)] for x in _grid(lo, hi, args.steps)]
    if c == "equi-entropy-contour":
        # mode-1 entropy of lambda = (c1 c2, c1 s2, s1) over (theta1, theta2)
        g = _grid(0.0, half, args.steps)
        h = _grid(0.0, half, args.steps2 or args.steps)
        rows = [[t1, t2, float(ent.s2(t1) + np.cos(t1) ** 2 * ent.s2(t2))]
                for t1 in g for t2 in h]
        return ["theta1", "theta2", "entropy"], rows
    if c == "entropy-K":
        g = _grid(0.0, half, args.steps)
        h = _grid(0.0, 2 * np.pi, args.steps2 or args.steps)
        rows = []
        for t in g:
            for gp in h:
                if abs(np.cos(gp)) < 1e-12 or np.cos(t) ** 2 < 1e-12:
                    continue
                k = ent.k_parameter(t, gp)
                if abs(k) > 0.5:
                    continue
                rows.append([t, gp, k, ent.entropy_K(t, gp)])
        return ["theta1_2", "gamma_prime", "K", "entropy"], rows
    if c == "pair-3mode":
        g = _grid(0.0, half, args.steps)
        h = _grid(0.0, 2 * np.pi, args.steps2 or args.steps)
        rows = []
        for t22 in g:
            for gp in h:
                try:
                    s1, s2_, t12 = ent.entropy_pair_3mode(args.theta1, args.theta2, t22, gp)
                except ent.DomainError:
                    continue
                rows.append([t22, gp, t12, s1, s2_])
        return ["theta2_2", "gamma_prime", "theta1_2", "entropy1", "entropy2"], rows
    raise InputError(f"unknown curve {c!r}")


def _flag_line(args) -> str:
    keys = sorted(k for k in vars(args) if k not in ("func", "out", "command"))
    return "# cfent curves " + " ".join(f"--{k.replace('_', '-')}={getattr(args, k)}" for k in keys)


def cmd_curves(args) -> int:
    header, rows = curve_rows(args)
    buf = io.StringIO()
    buf.write(_flag_line(args) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x) + 0.0) for x in r])
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.out).write_text(buf.getvalue())
        print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_PASS


def cmd_fock_check(args) -> int:
    if args.chi2 is None:
        found = _file_chi2_of(args.files) if args.files else None
        args.chi2 = 2.0 if found is None else found
    if args.files:
        phis = [algebra.as_structural(p) for p in _read_all(args.files)]
        source = "files"
    else:
        chi2 = (1.0 + args.q) if args.q is not None else args.chi2
        fam_chi2 = chi2 if args.family.startswith("deformed") else None
        try:
            sample = rz.sample_family(args.family, np.random.default_rng(args.seed), chi2=fam_chi2)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        phis = sample.phis
        source = sample.tag
    nb, nf = phis[0].shape
    basis = FockBasis(ModeConfig(nb, nf, args.cutoff))
    chi = _structure(args, args.cutoff)
    anti = max(algebra.verify_anticommutator_expansion(x, y, chi, basis) for x in phis for y in phis)
    nested = algebra.verify_nested_identities(phis, chi, basis)
    rows = [("source", source), ("shape", [nb, nf]), ("chi", [float(x) for x in chi.values]),
            ("cutoff", args.cutoff), ("anticommutator_expansion", anti),
            ("nested_expansions", nested)]
    ok = anti < 1e-12 and nested < 1e-12
    frows, fok = _fock_rows(phis, args)
    rows += frows
    ok = ok and fok
    rows.append(("result", "PASS" if ok else "FAIL"))
    _emit(rows, args.format)
    return EXIT_PASS if ok else EXIT_FAIL


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=rz.DEFAULT_TOL, help="pass tolerance (default 1e-10)")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text",
                        help="report format on stdout")

    fock = argparse.ArgumentParser(add_help=False)
    fock.add_argument("--chi2", type=float, default=None,
                      help="chi(2), chi(n) = n elsewhere (default: value recorded in the files, else 2)")
    fock.add_argument("--cutoff", type=int, default=3, help="boson occupation cutoff (default 3)")
    fock.add_argument("--depth", type=int, default=None,
                      help="generated-state depth for weak equality (default: number of fermion modes)")

    v = sub.add_parser("verify", parents=[common, fock], help="check realization conditions")
    v.add_argument("files", nargs="+", help="matrix JSON files, one per composite mode")
    v.add_argument("--fock", action="store_true", help="also check weak equalities on a truncated Fock space")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", parents=[common], help="sample a solution family")
    s.add_argument("--family", required=True, choices=rz.FAMILY_TAGS)
    s.add_argument("--variant", default=None, help="sub-family of the three-mode families")
    s.add_argument("--chi2", type=float, default=None, help="chi(2) for deformed families")
    s.add_argument("--theta", type=float, default=None, help="two-mode angle, lambda = (cos, sin)")
    s.add_argument("--theta1", type=float, default=None, help="three-mode angle theta1")
    s.add_argument("--theta2", type=float, default=None, help="three-mode angle theta2")
    s.add_argument("--full-range", action="store_true", help="allow theta in [0, pi/2] (unordered lambdas)")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--out", default=".", help="directory for phi1.json, phi2.json")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("entropy", parents=[common], help="Schmidt coefficients, entropy, purity")
    e.add_argument("files", nargs="+")
    e.set_defaults(func=cmd_entropy)

    c = sub.add_parser("curves", help="figure data as CSV")
    c.add_argument("curve", choices=CURVES)
    c.add_argument("--steps", type=int, default=181, help="grid points along the first axis (default 181)")
    c.add_argument("--steps2", type=int, default=None, help="grid points along the second axis")
    c.add_argument("--start", type=float, default=None)
    c.add_argument("--stop", type=float, default=None)
    c.add_argument("--theta1", type=float, default=np.pi / 4, help="pair-3mode: theta1 of mode 1")
    c.add_argument("--theta2", type=float, default=np.pi / 4, help="pair-3mode: theta2 of mode 1")
    c.add_argument("--seed", type=int, default=42, help="recorded in the header; curves are deterministic")
    c.add_argument("--out", default=None, help="output path (default stdout)")
    c.set_defaults(func=cmd_curves)

    f = sub.add_parser("fock-check", parents=[common, fock],
                       help="composite-algebra identity suite on a truncated Fock space")
    f.add_argument("files", nargs="*", help="matrix files (default: sample --family)")
    f.add_argument("--q", type=float, default=None, help="use chi(n) = (1 - q^n)/(1 - q) instead of --chi2")
    f.add_argument("--family", default="two-mode-distinct", choices=rz.FAMILY_TAGS)
    f.add_argument("--seed", type=int, default=42)
    f.set_defaults(func=cmd_fock_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ResourceLimitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
