"""Command-line front end: solve, compile, inspect, verify, sweep.

All outputs are deterministic: floats are serialized with their shortest
round-trip decimal (Python repr), JSON keys are emitted in a fixed order,
CSV uses a header row, comma separator and LF line endings, and files are
written atomically.  Exit codes: 0 pass, 1 quantitative failure or resource
policy stop, 2 malformed input.

A compiled artifact is stored as parameters only (no matrices); commands
that consume a params file rebuild the artifact deterministically from the
embedded target document.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .bound_state import BoundChainParams, SolverError, exact_overlap, solve_params
from .gadget import (
    GadgetArtifact,
    LocalTerm,
    PolicyError,
    TargetHamiltonian,
    compile_gadget,
    default_strength,
    normalize_target,
)
from .operator_core import SiteSystem, SpectralGapError, eigh, hermiticity_defect
from .perturbation import (
    DEFAULT_SERIES_ORDER,
    DEFAULT_Z_GRID,
    SeriesDivergenceError,
    band_defect,
    check_low_energy_approximation,
    find_band_window,
    series_error_bound,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

PARAMS_FORMAT = "onescale-params-v1"
REPORT_FORMAT = "onescale-report-v1"


class SchemaError(ValueError):
    """Input document violates the target or params schema."""


# ---------------------------------------------------------------------------
# target / params documents
# ---------------------------------------------------------------------------

def target_from_doc(doc) -> TargetHamiltonian:
    """Validate a target document and build the TargetHamiltonian."""
    if not isinstance(doc, dict):
        raise SchemaError("target document must be a JSON object")
    sites = doc.get("sites")
    if not isinstance(sites, list) or not sites or not all(
            isinstance(s, int) and s >= 2 for s in sites):
        raise SchemaError('"sites" must be a non-empty list of integers >= 2')
    terms_doc = doc.get("terms")
    if not isinstance(terms_doc, list) or not terms_doc:
        raise SchemaError('"terms" must be a non-empty list')
    system = SiteSystem(tuple(sites))
    terms = []
    for k, td in enumerate(terms_doc):
        where = f"terms[{k}]"
        if not isinstance(td, dict):
            raise SchemaError(f"{where} must be an object")
        name = td.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaError(f'{where}: "name" must be a non-empty string')
        support = td.get("support")
        if not isinstance(support, list) or not support or not all(
                isinstance(s, int) for s in support):
            raise SchemaError(f'{where}: "support" must be a list of integers')
        if len(set(support)) != len(support):
            raise SchemaError(f'{where}: "support" indices must be distinct')
        if any(s < 0 or s >= len(sites) for s in support):
            raise SchemaError(f'{where}: "support" index outside 0..{len(sites) - 1}')
        coeff = td.get("coefficient")
        if not isinstance(coeff, (int, float)) or isinstance(coeff, bool):
            raise SchemaError(f'{where}: "coefficient" must be a real number')
        if coeff == 0:
            raise SchemaError(f'{where}: "coefficient" must be nonzero')
        mat = td.get("matrix")
        if not isinstance(mat, dict):
            raise SchemaError(f'{where}: "matrix" must be an object')
        dim = mat.get("dim")
        if not isinstance(dim, int) or dim < 2:
            raise SchemaError(f'{where}: "matrix.dim" must be an integer >= 2')
        expected = math.prod(sites[s] for s in support)
        if dim != expected:
            raise SchemaError(
                f'{where}: "matrix.dim" = {dim} but the support spans dimension {expected}')
        for part in ("re", "im"):
            vals = mat.get(part)
            if not isinstance(vals, list) or len(vals) != dim * dim or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
                raise SchemaError(
                    f'{where}: "matrix.{part}" must be a list of {dim * dim} reals')
        block = (np.array(mat["re"], dtype=float)
                 + 1j * np.array(mat["im"], dtype=float)).reshape(dim, dim)
        defect = hermiticity_defect(block)
        if defect > 1e-12:
            raise SchemaError(f"{where}: matrix hermiticity defect {defect:.3e} > 1e-12")
        if not np.any(block.imag):
            block = block.real
        terms.append(LocalTerm(name=name, support=tuple(support),
                               coefficient=float(coeff), block=block))
    try:
        return TargetHamiltonian(system=system, terms=tuple(terms))
    except ValueError as err:
        raise SchemaError(str(err)) from err


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise SchemaError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise SchemaError(f"{path} is not valid JSON: {err}") from err


def params_doc(artifact: GadgetArtifact, target_doc, c_override, dim_cap: int):
    return {
        "format": PARAMS_FORMAT,
        "mode": artifact.mode,
        "delta": float(artifact.delta),
        "m": int(artifact.m),
        "c": float(artifact.c),
        "c_override": None if c_override is None else float(c_override),
        "dim_cap": int(dim_cap),
        "r_scale": float(artifact.r_scale),
        "normalization": float(artifact.target.normalization),
        "n_terms": int(artifact.n_terms),
        "t_max": int(artifact.t_max),
        "chain_length": int(artifact.chain_length),
        "dimension": int(artifact.system.total_dim),
        "terms": [
            {
                "name": term.name,
                "support": [int(s) for s in term.support],
                "r_prime": float(term.coefficient),
                "b": float(chain.b),
                "t_couple": int(chain.t_couple),
                "clock_shift": float(spec.ground_energy),
            }
            for term, chain, spec in zip(artifact.target.terms, artifact.chains,
                                         artifact.spectra)
        ],
        "target": target_doc,
    }


def rebuild_artifact(doc) -> GadgetArtifact:
    """Recompile the artifact recorded in a params document.

    The whole pipeline is deterministic, so recompiling from the embedded
    target reproduces the stored chain parameters; they are cross-checked
    against the file as a guard.
    """
    if not isinstance(doc, dict) or doc.get("format") != PARAMS_FORMAT:
        raise SchemaError(f'params file must carry "format": "{PARAMS_FORMAT}"')
    target = target_from_doc(doc.get("target"))
    artifact = compile_gadget(
        target,
        delta=float(doc["delta"]),
        mode=str(doc["mode"]),
        m=int(doc["m"]),
        c_override=doc.get("c_override"),
        dim_cap=int(doc.get("dim_cap", 2 ** 20)),
    )
    stored = doc.get("terms", [])
    if len(stored) != artifact.n_terms:
        raise SchemaError("params file term count does not match the target")
    for td, chain in zip(stored, artifact.chains):
        if abs(float(td["b"]) - chain.b) > 1e-9 or int(td["t_couple"]) != chain.t_couple:
            raise SchemaError(
                f'params file chain ({td["b"]}, {td["t_couple"]}) does not reproduce '
                f"({chain.b}, {chain.t_couple}); the file is stale")
    return artifact


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def _fin(x: float):
    """JSON-safe float: None for non-finite values."""
    x = float(x)
    return x if math.isfinite(x) else None


def _floats(arr):
    return [float(v) for v in np.asarray(arr).ravel()]


def dumps_doc(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                         for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve_params(args) -> int:
    if args.b_min >= args.b_max:
        raise SchemaError("--b-min must be below --b-max")
    params = solve_params(args.r, m=args.m, b_interval=(args.b_min, args.b_max))
    achieved = exact_overlap(params, params.t_couple).exact
    doc = {
        "b": float(params.b),
        "T": int(params.t_couple),
        "M": int(params.m),
        "achieved_overlap": float(achieved),
    }
    sys.stdout.write(dumps_doc(doc))
    return EXIT_OK


def cmd_compile(args) -> int:
    target_doc = load_json(args.target)
    target = target_from_doc(target_doc)
    artifact = compile_gadget(target, delta=args.delta, mode=args.mode, m=args.m,
                              c_override=args.c_override, dim_cap=args.dim_cap)
    doc = params_doc(artifact, target_doc, args.c_override, args.dim_cap)
    atomic_write(args.output, dumps_doc(doc))
    sys.stdout.write(
        f"compiled {artifact.n_terms} terms: C={artifact.c!r}, t_max={artifact.t_max}, "
        f"chain_length={artifact.chain_length}, dimension={artifact.system.total_dim}\n")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    artifact = rebuild_artifact(load_json(args.params))
    dec = eigh(artifact.simulator)
    window = find_band_window(dec.eigenvalues, artifact.c / 4.0)
    k = args.k if args.k is not None else (window.size if window else artifact.d_sys)
    dim = artifact.system.total_dim
    if k > dim:
        sys.stderr.write(f"warning: --k {k} clipped to dimension {dim}\n")
        k = dim
    # the predicted low band has exactly d_sys eigenvalues; rows beyond it
    # (clock excitations) carry no prediction
    heff = np.sort(artifact.effective_eigenvalues())
    rows = []
    for i in range(k):
        sim = float(dec.eigenvalues[i])
        if i < len(heff):
            eff = float(heff[i])
            rows.append([i, sim, eff, sim - eff])
        else:
            rows.append([i, sim, None, None])
    text = csv_text(["index", "simulator_eigenvalue", "heff_eigenvalue", "deviation"], rows)
    if args.output:
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _self_energy_section(verdict, z_grid, order) -> dict:
    per_z = []
    for rep in verdict.self_energy:
        per_z.append({
            "z": float(np.real(rep.z)),
            "exact_vs_series": _fin(rep.exact_vs_series),
            "series_tail": _fin(rep.series_tail),
            "exact_vs_closed": _fin(rep.exact_vs_closed),
            "shift_l1": _fin(rep.shift_l1),
            "restriction_gap": _fin(rep.restriction_gap),
            "heff_defect": _fin(rep.heff_defect),
        })
    return {
        "z_grid": [float(z) for z in z_grid],
        "order": int(order),
        "per_z": per_z,
        "sup_defect": _fin(verdict.sup_sigma_defect),
    }


def report_doc(artifact: GadgetArtifact, verdict, z_grid, order) -> dict:
    budget = verdict.budget
    eta_max = 0.0
    for i in range(artifact.n_terms):
        for z in z_grid:
            eta_max = max(eta_max, abs(artifact.eta(i, z)))
    band = verdict.band
    pert1 = verdict.pert1
    return {
        "format": REPORT_FORMAT,
        "params": {
            "mode": artifact.mode,
            "delta": float(artifact.delta),
            "m": int(artifact.m),
            "c": float(artifact.c),
            "t_max": int(artifact.t_max),
            "chain_length": int(artifact.chain_length),
            "n_terms": int(artifact.n_terms),
            "r_scale": float(artifact.r_scale),
            "terms": [
                {"name": t.name, "b": float(ch.b), "t_couple": int(ch.t_couple),
                 "r_prime": float(t.coefficient)}
                for t, ch in zip(artifact.target.terms, artifact.chains)
            ],
        },
        "band": {
            "exists": bool(verdict.band is not None),
            "a": None if band is None else _fin(band.a),
            "b": None if band is None else _fin(band.b),
            "width": None if band is None else _fin(band.width),
            "size": None if band is None else int(band.size),
            "expected_size": int(artifact.d_sys),
        },
        "error_budget": {
            "epsilon": _fin(budget.epsilon),
            "epsilon_prime": _fin(budget.epsilon_prime),
            "eta_bound": _fin(budget.eta_bound),
            "eta_measured_max": _fin(eta_max),
            "lambda_plus": _fin(budget.lambda_plus),
            "pert2_rhs": _fin(budget.pert2_rhs),
            "heff_norm": _fin(budget.heff_norm),
            "v_norm": _fin(budget.v_norm),
            "w_eff": _fin(budget.w_eff),
            "divergent": list(budget.divergent),
        },
        "self_energy": _self_energy_section(verdict, z_grid, order),
        "eigenvalues": {
            "simulator_band": [] if pert1 is None else _floats(pert1.simulator_band),
            "heff": [] if pert1 is None else _floats(pert1.heff_eigenvalues),
            "deviations": [] if pert1 is None else _floats(pert1.deviations),
            "max_deviation": None if pert1 is None else _fin(pert1.max_deviation),
            "uniform_shift": None if pert1 is None else _fin(pert1.uniform_shift),
            "max_deviation_shifted": None if pert1 is None else _fin(pert1.max_deviation_shifted),
        },
        "defect": {
            "raw": _fin(verdict.defect_raw),
            "shift_removed": _fin(verdict.defect_shift_removed),
            "scaled_raw": _fin(verdict.defect_scaled_raw),
        },
        "verdict": {
            "pass": bool(verdict.passed),
            "tolerance": _fin(verdict.tolerance),
            "tolerance_source": verdict.tolerance_source,
            "epsilon_used": _fin(verdict.epsilon_used),
            "epsilon_source": verdict.epsilon_source,
            "reasons": list(verdict.reasons),
        },
    }


def cmd_verify(args) -> int:
    artifact = rebuild_artifact(load_json(args.params))
    z_grid = tuple(float(v) for v in args.z_grid.split(","))
    verdict = check_low_energy_approximation(artifact, tol=args.tol, z_grid=z_grid,
                                             order=args.order)
    doc = report_doc(artifact, verdict, z_grid, args.order)
    text = dumps_doc(doc)
    if args.output:
        atomic_write(args.output, text)
    sys.stdout.write(text)
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    target_doc = load_json(args.target)
    target = target_from_doc(target_doc)
    normalized = normalize_target(target)
    n = normalized.n_terms
    points = []
    if args.delta_list:
        for d in (float(v) for v in args.delta_list.split(",")):
            points.append((d, None))
    if args.c_mults:
        base = default_strength(n, args.delta)
        for mult in (float(v) for v in args.c_mults.split(",")):
            points.append((args.delta, mult * base))
    if not points:
        raise SchemaError("sweep needs --delta-list and/or --c-mults")
    points.sort(key=lambda p: p[1] if p[1] is not None else default_strength(n, p[0]))

    rows = []
    for delta, c_override in points:
        c = c_override if c_override is not None else default_strength(n, delta)
        try:
            artifact = compile_gadget(normalized, delta=delta, mode="tile-free",
                                      m=args.m, c_override=c_override,
                                      dim_cap=args.dim_cap)
            dec = eigh(artifact.simulator)
            measured = band_defect(artifact, dec)
            if measured.window is None:
                raise SpectralGapError("no band window of width C/4")
            if measured.window.size != artifact.d_sys:
                raise SpectralGapError(
                    f"band dimension {measured.window.size} != {artifact.d_sys}")
            budget = series_error_bound(artifact, strict=False)
            rows.append([float(artifact.c), float(budget.epsilon),
                         float(budget.epsilon_prime), float(measured.raw),
                         float(budget.pert2_rhs), "ok"])
        except Exception as err:  # per-point failure: record and continue
            rows.append([float(c), None, None, None, None,
                         f"{type(err).__name__}: {err}"])
    rows.sort(key=lambda r: r[0])
    text = csv_text(["C", "epsilon", "epsilon_prime", "measured_defect",
                     "pert2_bound", "status"], rows)
    atomic_write(args.output, text)
    sys.stdout.write(f"wrote {len(rows)} sweep rows to {args.output}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onescale",
        description="Compile local Hamiltonians with varying coupling strengths "
                    "into a single-strong-scale simulator and verify its low band.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-params",
                       help="chain parameters achieving a target ground-state overlap")
    p.add_argument("--r", type=float, required=True, help="target overlap in (0, 1/100)")
    p.add_argument("--m", type=int, default=4, help="chain length multiplier (default 4)")
    p.add_argument("--b-min", type=float, default=1.0)
    p.add_argument("--b-max", type=float, default=3.0)
    p.set_defaults(func=cmd_solve_params)

    p = sub.add_parser("compile", help="compile a target file into a params file")
    p.add_argument("target", help="target Hamiltonian JSON file")
    p.add_argument("--delta", type=float, required=True,
                   help="strength exponent: C = 4 N^(2+delta)")
    p.add_argument("--mode", choices=["tile-free", "tiled"], default="tile-free")
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--c-override", type=float, default=None,
                   help="replace the compiled strength constant")
    p.add_argument("--dim-cap", type=int, default=2 ** 20)
    p.add_argument("-o", "--output", required=True, help="params JSON output path")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("spectrum", help="CSV of the lowest simulator and H_eff eigenvalues")
    p.add_argument("params", help="params JSON file")
    p.add_argument("--k", type=int, default=None, help="row count (default: band size)")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="full verification report; exit 0 iff pass")
    p.add_argument("params", help="params JSON file")
    p.add_argument("--z-grid", default=",".join(repr(z) for z in DEFAULT_Z_GRID))
    p.add_argument("--order", type=int, default=DEFAULT_SERIES_ORDER)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("-o", "--output", default=None, help="also write the report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="defect vs strength constant, CSV output")
    p.add_argument("target", help="target Hamiltonian JSON file")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--delta-list", default=None)
    p.add_argument("--c-mults", default=None,
                   help="multipliers of the base C at --delta")
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--dim-cap", type=int, default=2 ** 20)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INPUT
    except ValueError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INPUT
    except PolicyError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_FAIL
    except (SolverError, SpectralGapError, SeriesDivergenceError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_FAIL
    except np.linalg.LinAlgError as err:
        sys.stderr.write(f"error: eigensolver failure: {err}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
