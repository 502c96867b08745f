"""Command-line surface: read density matrices from JSON files, run the
decomposition and its diagnostics, emit structured results.

File schema (version 1):

    {"schema_version": 1,
     "matrix": [[[re, im], ...4 pairs...], ...4 rows...],
     "label": "optional name"}

Exit codes: 0 success, 2 validation error, 3 no admissible solution,
4 failed verification (or oracle mismatch).  stdout carries only the
structured record; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .bsa import (
    Decomposition,
    NoAdmissibleSolution,
    Path,
    Witnesses,
    compute,
    entanglement_measure,
    verify_theorem1,
)
from .qstate import (
    DensityMatrix,
    InvalidDensityMatrix,
    NotEntangled,
    PureState,
    concurrence_mixed,
    random_density,
)
from .solver import Admissibility, SolverConfig, ls_oracle
from .spectra import spectral_report

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_SOLUTION = 3
EXIT_VERDICT = 4


class ValidationError(Exception):
    """File or schema problem, reported with the offending field."""


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

def _complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _matrix_to_json(m: np.ndarray) -> list:
    return [[_complex_to_pair(m[i, j]) for j in range(4)] for i in range(4)]


def _vector_to_json(v: np.ndarray) -> list:
    return [_complex_to_pair(z) for z in v]


def _pair_to_complex(pair, where: str) -> complex:
    if (
        not isinstance(pair, (list, tuple))
        or len(pair) != 2
        or not all(isinstance(x, (int, float)) for x in pair)
    ):
        raise ValidationError(f"{where}: expected a [re, im] number pair")
    return complex(pair[0], pair[1])


def _matrix_from_json(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != 4:
        raise ValidationError(f"{where}: expected 4 rows")
    out = np.empty((4, 4), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 4:
            raise ValidationError(f"{where}[{i}]: expected 4 entries")
        for j, pair in enumerate(row):
            out[i, j] = _pair_to_complex(pair, f"{where}[{i}][{j}]")
    return out


def _vector_from_json(entries, where: str) -> np.ndarray:
    if not isinstance(entries, list) or len(entries) != 4:
        raise ValidationError(f"{where}: expected 4 amplitude pairs")
    return np.array([_pair_to_complex(p, f"{where}[{i}]") for i, p in enumerate(entries)])


def _read_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}") from exc


def load_matrix_file(path: str) -> tuple[DensityMatrix, str]:
    """Parse a matrix file into a density matrix plus its label."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(
            f"schema_version: expected {SCHEMA_VERSION}, got {data.get('schema_version')!r}"
        )
    if "matrix" not in data:
        raise ValidationError("matrix: field missing")
    mat = _matrix_from_json(data["matrix"], "matrix")
    try:
        rho = DensityMatrix(mat)
    except (InvalidDensityMatrix, ValueError) as exc:
        raise ValidationError(f"matrix: {exc}") from exc
    label = data.get("label", path if path != "-" else "stdin")
    if not isinstance(label, str):
        raise ValidationError("label: expected a string")
    return rho, label


def matrix_file_dict(rho: DensityMatrix, label: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "matrix": _matrix_to_json(rho.mat),
        "label": label,
    }


def result_record(rho: DensityMatrix, dec: Decomposition, label: str,
                  timings_ms: dict, tol: float) -> dict:
    report = verify_theorem1(rho, dec, tol=tol)
    wit = dec.witnesses
    return {
        "schema_version": SCHEMA_VERSION,
        "input_label": label,
        "lambda": dec.lam,
        "psi": _vector_to_json(dec.psi.amp) if dec.psi is not None else None,
        "rho_s": _matrix_to_json(dec.rho_s.mat),
        "rho_s_placeholder": dec.rho_s_placeholder,
        "path": dec.path.value,
        "witnesses": {
            "phi": _vector_to_json(wit.phi.amp) if wit.phi is not None else None,
            "phi_tilde": _vector_to_json(wit.phi_tilde.amp) if wit.phi_tilde is not None else None,
            "alpha": wit.alpha,
            "nu": wit.nu,
        },
        "concurrence": concurrence_mixed(rho),
        "entanglement_measure": entanglement_measure(dec),
        "verification": report.__dict__.copy(),
        "timings_ms": timings_ms,
    }


def decomposition_from_record(data: dict) -> Decomposition:
    """Rebuild a decomposition from a serialized result record."""
    if not isinstance(data, dict):
        raise ValidationError("record: top level must be an object")
    for key in ("lambda", "rho_s", "path"):
        if key not in data:
            raise ValidationError(f"{key}: field missing")
    try:
        path = Path(data["path"])
    except ValueError as exc:
        raise ValidationError(f"path: unknown value {data['path']!r}") from exc
    lam = data["lambda"]
    if not isinstance(lam, (int, float)):
        raise ValidationError("lambda: expected a number")
    try:
        rho_s = DensityMatrix(_matrix_from_json(data["rho_s"], "rho_s"))
    except (InvalidDensityMatrix, ValueError) as exc:
        raise ValidationError(f"rho_s: {exc}") from exc
    psi = None
    if data.get("psi") is not None:
        psi = PureState(_vector_from_json(data["psi"], "psi"))
    wit = data.get("witnesses") or {}
    phi = wit.get("phi")
    phi_tilde = wit.get("phi_tilde")
    witnesses = Witnesses(
        phi=PureState(_vector_from_json(phi, "witnesses.phi")) if phi is not None else None,
        phi_tilde=PureState(_vector_from_json(phi_tilde, "witnesses.phi_tilde"))
        if phi_tilde is not None else None,
        alpha=wit.get("alpha"),
        nu=wit.get("nu"),
    )
    return Decomposition(
        lam=float(lam),
        psi=psi,
        rho_s=rho_s,
        path=path,
        witnesses=witnesses,
        rho_s_placeholder=bool(data.get("rho_s_placeholder", False)),
    )


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------

def _emit(record: dict, args) -> None:
    if args.format == "json":
        text = json.dumps(record, indent=2)
    else:
        text = "\n".join(_table_lines(record))
    out_path = getattr(args, "out", None)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _table_lines(record: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, val in record.items():
        if isinstance(val, dict):
            lines.append(f"{prefix}{key}:")
            lines.extend(_table_lines(val, prefix + "  "))
        elif isinstance(val, list):
            lines.append(f"{prefix}{key}: {json.dumps(val)}")
        else:
            lines.append(f"{prefix}{key}: {val}")
    return lines


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        n_starts=args.starts,
        seed=args.seed,
        admissibility=Admissibility(psd_slack=args.tol_psd),
    )


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_compute(args) -> int:
    rho, label = load_matrix_file(args.input)
    t0 = time.perf_counter()
    try:
        dec = compute(rho, _solver_config(args))
    except NoAdmissibleSolution as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    t1 = time.perf_counter()
    record = result_record(
        rho, dec, label,
        timings_ms={"compute": (t1 - t0) * 1e3}, tol=args.tol_eig,
    )
    record["timings_ms"]["verify"] = (time.perf_counter() - t1) * 1e3
    _emit(record, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    rho, _ = load_matrix_file(args.input)
    dec = decomposition_from_record(_read_json(args.record))
    report = verify_theorem1(rho, dec, tol=args.tol_eig)
    _emit(report.__dict__.copy(), args)
    return EXIT_OK if report.verdict else EXIT_VERDICT


def cmd_concurrence(args) -> int:
    rho, label = load_matrix_file(args.input)
    _emit({"input_label": label, "concurrence": concurrence_mixed(rho)}, args)
    return EXIT_OK


def cmd_spectra(args) -> int:
    rho, label = load_matrix_file(args.input)
    rep = spectral_report(rho)
    record = {
        "input_label": label,
        "c": list(map(float, rep.c)),
        "d": list(map(float, rep.d)),
        "gamma": rep.gamma,
        "phi4": _vector_to_json(rep.phi4.amp),
        "degenerate_gamma": rep.degenerate_gamma,
        "trace_residuals": list(map(float, rep.trace_residuals)),
        "sign_diagnostics": list(map(float, rep.sign_diagnostics)),
        "delta": list(map(float, rep.delta)),
    }
    _emit(record, args)
    return EXIT_OK


def cmd_random(args) -> int:
    try:
        rho = random_density(args.rank, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    label = args.label or f"random-rank{args.rank}-seed{args.seed}"
    _emit(matrix_file_dict(rho, label), args)
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    rho, label = load_matrix_file(args.input)
    cfg = _solver_config(args)
    try:
        dec = compute(rho, cfg)
        lam_oracle, _ = ls_oracle(rho, cfg)
    except NoAdmissibleSolution as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except NotEntangled as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    diff = abs(dec.lam - lam_oracle)
    _emit(
        {
            "input_label": label,
            "lambda_algebraic": dec.lam,
            "lambda_oracle": lam_oracle,
            "abs_difference": diff,
        },
        args,
    )
    return EXIT_OK if diff <= args.tol else EXIT_VERDICT


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the record here instead of stdout")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--tol-psd", dest="tol_psd", type=float, default=1e-10,
                   help="PSD slack for admissibility checks")
    p.add_argument("--tol-eig", dest="tol_eig", type=float, default=1e-8,
                   help="residual tolerance for verification")
    p.add_argument("--starts", type=int, default=64, help="multi-start count")
    p.add_argument("--seed", type=int, default=0, help="deterministic seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bsa2q",
        description="Best separable approximation of two-qubit density matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="decompose a density matrix")
    p.add_argument("input", help="matrix file path, or - for stdin")
    _add_common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="verify a stored decomposition")
    p.add_argument("input", help="matrix file path, or - for stdin")
    p.add_argument("record", help="result record path")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("concurrence", help="concurrence of a state")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("spectra", help="companion-spectra report")
    p.add_argument("input")
    _add_common(p)
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("random", help="emit a seeded random density matrix")
    p.add_argument("--rank", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--label")
    _add_common(p)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("oracle-compare", help="algebraic weight vs search oracle")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=1e-4,
                   help="maximum allowed |lambda difference|")
    _add_common(p)
    p.set_defaults(func=cmd_oracle_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
