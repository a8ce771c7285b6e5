"""Command-line interface: rate tables, Monte Carlo sweeps, and validation runs.

Subcommands
-----------
rates
    One row of closed-form rate quantities for a single parameter set.
chi
    Monte Carlo orientation-factor estimates over a (D_A, D_B) mobility grid.
lens
    Capacitance profile c(s) of the two-cap contact lens on a uniform grid
    over [0, 2], plus the validation integral of c(s) s ds.
bdsim
    Direct Brownian-dynamics estimates of k0/k_smol over an (N_A, N_B) grid,
    with the asymptotic and saturating predictions alongside for comparison.
validate-zero-rotation
    Cross-check of the Brownian-dynamics integrator against the lens
    reduction for non-rotating molecules.

Conventions
-----------
- ``--format csv`` (default) writes a header plus one row per result, floats
  at 17 significant digits; each row is flushed as its grid point completes,
  so partial output from an interrupted sweep is well formed.  ``--format
  json`` writes one document at the end holding the same values at full
  precision.
- ``--out PATH`` sends rows to a file and writes a reproducibility manifest
  to ``PATH.manifest.json``; without it rows go to stdout.  Commands with a
  summary (the lens integral) print it to stdout with ``--out``, to stderr
  otherwise, and embed it in JSON documents.
- Every Monte Carlo draw is a pure function of (seed, global trial index),
  so outputs are byte-identical across reruns and thread counts.  Grid point
  ``i`` of a sweep uses trial indices ``[i*M, (i+1)*M)`` under the shared
  seed; internal side runs (the chi column of ``bdsim``, the lens phase of
  ``validate-zero-rotation``) use tagged sub-seeds and cannot collide with
  the primary streams.
- Exit codes: 0 success; 2 invalid flags or parameter values; 3 a numerical
  budget was exhausted (a diagnosed failure — budget hits surface as labeled
  rows or errors, never as silent data).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time

import numpy as np

from . import __version__, rates
from .backend import available_backends
from .bdsim import BdConfig, simulate_k0
from .core import DiagnosticsError, ModelParams, SingularGeometryError, derive_constants
from .kmc3d import LensSpec, integral_from_profile, lens_capacitance, lens_profile, zero_rotation_k0
from .kmc5d import KmcConfig, estimate_chi
from .manifest import RunManifest, sha256_file, write_manifest
from .rng import split_seed
from .special import z_quantile

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIAGNOSTICS = 3

# Orientation factor chi in the small-mobility limit (D_A = D_B -> 0 at unit
# cap-size factors), the reference point for the lens-integral consistency
# ratio: (integral / 4) / REFERENCE_CHI_SMALL_D is expected close to 1.
REFERENCE_CHI_SMALL_D = 0.1459

# Trial count for the internal chi side run behind the bdsim prediction
# columns (about a percent of relative error; the columns are informative,
# not the measurement itself).
_CHI_SIDE_TRIALS = 200_000

# Tags for tagged sub-seeds (arbitrary but fixed; must stay distinct).
_TAG_CHI_SIDE = 1
_TAG_LENS_PHASE = 2

_RATES_COLUMNS = [
    "eps", "n_a", "n_b", "a_a", "a_b", "r", "dtr", "d_a", "d_b",
    "lambda_a", "lambda_b", "k_smol", "k_smol_molar", "chi_qc", "chi_berg",
    "k_geo", "k_geo_dim", "k_bar_a", "k_bar_a_dim",
    "k0_bar", "k0_bar_dim", "k0_bar_molar", "kappa",
]
_CHI_COLUMNS = [
    "d_a", "d_b", "trials", "hits", "chi", "ci_lo", "ci_hi", "chi_qc", "rel_err_qc",
]
_LENS_COLUMNS = ["s", "trials", "c", "ci_lo", "ci_hi"]
_BDSIM_COLUMNS = [
    "n_a", "n_b", "trials", "bound", "escaped", "k0_over_ksmol", "ci_lo",
    "ci_hi", "chi_mc", "pred_asymptotic", "pred_saturating", "status",
]
_VALIDATE_COLUMNS = [
    "eps", "r0", "r_inf", "grid_n", "lens_trials", "integral", "p_pred",
    "bd_trials", "bound", "escaped", "p_meas", "ci_lo", "ci_hi", "z_abs",
    "status",
]


def _int_list(text: str) -> list[int]:
    """Comma-separated integer list for grid flags."""
    try:
        items = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from None
    if not items:
        raise argparse.ArgumentTypeError("expected at least one value")
    return items


def _float_list(text: str) -> list[float]:
    """Comma-separated float list for grid flags."""
    try:
        items = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        ) from None
    if not items:
        raise argparse.ArgumentTypeError("expected at least one value")
    return items


def build_parser() -> argparse.ArgumentParser:
    """Construct the patchbind argument parser."""
    io_parent = argparse.ArgumentParser(add_help=False)
    io_parent.add_argument(
        "--format", choices=("csv", "json"), default="csv",
        help="output format (default: csv)",
    )
    io_parent.add_argument(
        "--out", metavar="PATH", default=None,
        help="write rows to PATH (and a manifest to PATH.manifest.json) "
             "instead of stdout",
    )

    run_parent = argparse.ArgumentParser(add_help=False)
    run_parent.add_argument("--seed", type=int, default=0, help="64-bit generator seed")
    run_parent.add_argument(
        "--threads", type=int, default=1,
        help="worker threads (results are identical for any value)",
    )
    run_parent.add_argument(
        "--backend", choices=tuple(available_backends()), default=None,
        help="force a compute backend (default: best available)",
    )

    parser = argparse.ArgumentParser(
        prog="patchbind",
        description="Binding rate constants for orientationally constrained "
                    "(patchy) molecule pairs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "rates", parents=[io_parent],
        help="closed-form rate table for one parameter set",
    )
    _add_molecule_flags(p)

    p = sub.add_parser(
        "chi", parents=[io_parent, run_parent],
        help="Monte Carlo orientation factor over a (D_A, D_B) grid",
    )
    _add_molecule_flags(p, drot_lists=True, orientation=False)
    p.add_argument(
        "--trials", type=int, default=100_000,
        help="Monte Carlo trials per grid point (default: %(default)s)",
    )
    p.add_argument(
        "--rho-inf", type=float, default=1e5,
        help="escape radius of the 5D walk (default: %(default)s)",
    )

    p = sub.add_parser(
        "lens", parents=[io_parent, run_parent],
        help="lens capacitance profile c(s) and its validation integral",
    )
    p.add_argument(
        "--grid-n", type=int, default=101,
        help="uniform grid points over s in [0, 2] (default: %(default)s)",
    )
    p.add_argument(
        "--trials", type=int, default=10_000,
        help="Monte Carlo trials per grid point (default: %(default)s)",
    )
    p.add_argument(
        "--rho-inf", type=float, default=1e5,
        help="escape radius of the 3D walk (default: %(default)s)",
    )

    p = sub.add_parser(
        "bdsim", parents=[io_parent, run_parent],
        help="Brownian-dynamics k0/k_smol over an (N_A, N_B) grid",
    )
    _add_molecule_flags(p, n_lists=True)
    p.add_argument(
        "--trials", type=int, default=2_000,
        help="Brownian-dynamics trials per grid point (default: %(default)s)",
    )
    _add_bd_flags(p)

    p = sub.add_parser(
        "validate-zero-rotation", parents=[io_parent, run_parent],
        help="check the Brownian integrator against the lens reduction "
             "for non-rotating molecules",
    )
    p.add_argument("--eps", type=float, default=10.0 ** -1.5, help="cap angular size")
    p.add_argument("--r-a", type=float, default=0.5, help="radius of molecule A")
    p.add_argument("--r-b", type=float, default=0.5, help="radius of molecule B")
    p.add_argument("--dtr-a", type=float, default=0.5, help="translational diffusivity of A")
    p.add_argument("--dtr-b", type=float, default=0.5, help="translational diffusivity of B")
    p.add_argument(
        "--trials", type=int, default=20_000,
        help="Brownian-dynamics trials (default: %(default)s)",
    )
    _add_bd_flags(p)
    p.add_argument(
        "--grid-n", type=int, default=201,
        help="lens-profile grid points (default: %(default)s)",
    )
    p.add_argument(
        "--lens-trials", type=int, default=20_000,
        help="Monte Carlo trials per lens grid point (default: %(default)s)",
    )
    p.add_argument(
        "--rho-inf", type=float, default=1e5,
        help="escape radius of the lens walk (default: %(default)s)",
    )
    return parser


def _add_molecule_flags(
    p: argparse.ArgumentParser,
    n_lists: bool = False,
    drot_lists: bool = False,
    orientation: bool = True,
) -> None:
    """Physical parameter flags shared by the molecule-pair commands.

    ``n_lists``/``drot_lists`` turn the cap-count / rotational-diffusivity
    flags into comma-separated grids for sweep commands; ``orientation``
    drops the flags irrelevant to a command (the chi sweep fixes no caps).
    """
    if orientation:
        p.add_argument("--eps", type=float, default=10.0 ** -1.5, help="cap angular size")
        if n_lists:
            p.add_argument(
                "--na", type=_int_list, default=[1], metavar="N[,N...]",
                help="cap counts on molecule A (comma list sweeps a grid)",
            )
            p.add_argument(
                "--nb", type=_int_list, default=[1], metavar="N[,N...]",
                help="cap counts on molecule B (comma list sweeps a grid)",
            )
        else:
            p.add_argument("--na", type=int, default=1, help="cap count on molecule A")
            p.add_argument("--nb", type=int, default=1, help="cap count on molecule B")
    p.add_argument("--a-a", type=float, default=1.0, help="cap-size factor of A")
    p.add_argument("--a-b", type=float, default=1.0, help="cap-size factor of B")
    p.add_argument("--r-a", type=float, default=0.5, help="radius of molecule A")
    p.add_argument("--r-b", type=float, default=0.5, help="radius of molecule B")
    p.add_argument("--dtr-a", type=float, default=0.5, help="translational diffusivity of A")
    p.add_argument("--dtr-b", type=float, default=0.5, help="translational diffusivity of B")
    if drot_lists:
        p.add_argument(
            "--drot-a", type=_float_list, default=[0.0], metavar="D[,D...]",
            help="rotational diffusivities of A (comma list sweeps a grid)",
        )
        p.add_argument(
            "--drot-b", type=_float_list, default=[0.0], metavar="D[,D...]",
            help="rotational diffusivities of B (comma list sweeps a grid)",
        )
    else:
        p.add_argument("--drot-a", type=float, default=0.0, help="rotational diffusivity of A")
        p.add_argument("--drot-b", type=float, default=0.0, help="rotational diffusivity of B")
    p.add_argument("--dsurf-a", type=float, default=0.0, help="in-surface cap diffusivity of A")
    p.add_argument("--dsurf-b", type=float, default=0.0, help="in-surface cap diffusivity of B")


def _add_bd_flags(p: argparse.ArgumentParser) -> None:
    """Brownian-dynamics run geometry and step sizes."""
    p.add_argument(
        "--r0", type=float, default=None,
        help="start separation (default: 1.1 R)",
    )
    p.add_argument(
        "--r-inf", type=float, default=None,
        help="escape separation (default: 10 R)",
    )
    p.add_argument(
        "--dt-big", type=float, default=1e-3,
        help="far-field time step (default: %(default)s)",
    )
    p.add_argument(
        "--dt-small", type=float, default=1e-8,
        help="near-contact time step (default: %(default)s)",
    )


class _Emitter:
    """Row sink handling both output formats.

    CSV writes the header up front and flushes every row (long sweeps yield
    well-formed partial files); JSON accumulates rows and writes a single
    document, embedding the summary, in :meth:`finish`.
    """

    def __init__(self, command: str, columns: list[str], fmt: str, out_path: str | None):
        self.command = command
        self.columns = columns
        self.fmt = fmt
        self.rows_written = 0
        self._owns = out_path is not None
        self._fh = open(out_path, "w", newline="") if out_path else sys.stdout
        self._rows: list[dict] = []
        if fmt == "csv":
            self._writer = csv.writer(self._fh, lineterminator="\n")
            self._writer.writerow(columns)
            self._fh.flush()

    @staticmethod
    def _coerce(value):
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, np.floating):
            return float(value)
        return value

    @staticmethod
    def _csv_cell(value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return "%.17g" % value
        return str(value)

    def row(self, values: dict) -> None:
        """Emit one row; unknown keys are a programming error."""
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f"row keys not in schema: {sorted(unknown)}")
        record = {c: self._coerce(values.get(c)) for c in self.columns}
        if self.fmt == "csv":
            self._writer.writerow([self._csv_cell(record[c]) for c in self.columns])
            self._fh.flush()
        else:
            self._rows.append(record)
        self.rows_written += 1

    def finish(self, summary: dict | None) -> None:
        """Write any trailing document content and release the file."""
        if self.fmt == "json":
            doc: dict = {
                "command": self.command,
                "version": __version__,
                "columns": self.columns,
                "rows": self._rows,
            }
            if summary is not None:
                doc["summary"] = summary
            json.dump(doc, self._fh, indent=2)
            self._fh.write("\n")
            self._fh.flush()
        self.close()

    def close(self) -> None:
        if self._owns and not self._fh.closed:
            self._fh.close()


def _params_from(args: argparse.Namespace, **overrides) -> ModelParams:
    """Build ModelParams from parsed flags, with per-point overrides."""
    fields = dict(
        R_A=args.r_a,
        R_B=args.r_b,
        Dtr_A=args.dtr_a,
        Dtr_B=args.dtr_b,
        Drot_A=getattr(args, "drot_a", 0.0),
        Drot_B=getattr(args, "drot_b", 0.0),
        Dsurf_A=getattr(args, "dsurf_a", 0.0),
        Dsurf_B=getattr(args, "dsurf_b", 0.0),
        eps=getattr(args, "eps", 10.0 ** -1.5),
        a_A=getattr(args, "a_a", 1.0),
        a_B=getattr(args, "a_b", 1.0),
        N_A=getattr(args, "na", 1),
        N_B=getattr(args, "nb", 1),
    )
    fields.update(overrides)
    return ModelParams(**fields)


def _cmd_rates(args: argparse.Namespace, emit: _Emitter):
    p = _params_from(args)
    R, Dtr = p.R, p.Dtr
    d_a = R * R * p.Deff_A / Dtr
    d_b = R * R * p.Deff_B / Dtr
    lam_a = math.sqrt(1.0 + d_a)
    lam_b = math.sqrt(1.0 + d_b)
    ksmol = rates.k_smol(Dtr, R)
    cqc = rates.chi_qc(lam_a, lam_b, p.a_A, p.a_B)
    cberg = rates.chi_berg(lam_a, lam_b, p.a_A, p.a_B)
    kgeo = rates.k_geo(p.eps, p.N_A, p.N_B, p.a_A, p.a_B)
    kbar_a = rates.k_bar_A(p.eps, p.N_A, p.a_A, lam_a)
    # The closed-form table uses the quasi-chemical chi; run `chi` for the
    # Monte Carlo value.
    k0_bar = rates.k0_saturating(p.eps, p.N_A, p.N_B, lam_a, lam_b, p.a_A, p.a_B, cqc)
    kappa = rates.trapping_rate(k0_bar, Dtr, R)
    emit.row({
        "eps": p.eps, "n_a": p.N_A, "n_b": p.N_B, "a_a": p.a_A, "a_b": p.a_B,
        "r": R, "dtr": Dtr, "d_a": d_a, "d_b": d_b,
        "lambda_a": lam_a, "lambda_b": lam_b,
        "k_smol": ksmol, "k_smol_molar": rates.molar_convert(ksmol),
        "chi_qc": cqc, "chi_berg": cberg,
        "k_geo": kgeo, "k_geo_dim": kgeo * ksmol,
        "k_bar_a": kbar_a, "k_bar_a_dim": kbar_a * ksmol,
        "k0_bar": k0_bar, "k0_bar_dim": k0_bar * ksmol,
        "k0_bar_molar": rates.molar_convert(k0_bar * ksmol),
        "kappa": kappa,
    })
    return None, {}, EXIT_OK


def _cmd_chi(args: argparse.Namespace, emit: _Emitter):
    points = list(itertools.product(args.drot_a, args.drot_b))
    trials = args.trials
    for i, (da, db) in enumerate(points):
        p = _params_from(args, Drot_A=da, Drot_B=db)
        d = derive_constants(p)
        cfg = KmcConfig(trials=trials, seed=args.seed, rho_inf=args.rho_inf)
        res = estimate_chi(
            d, cfg, threads=args.threads, backend=args.backend,
            trial_offset=i * trials,
        )
        cqc = rates.chi_qc(d.lambda_A, d.lambda_B, p.a_A, p.a_B)
        rel = (cqc - res.chi) / res.chi if res.chi > 0 else None
        emit.row({
            "d_a": d.D_A, "d_b": d.D_B, "trials": res.trials, "hits": res.hits,
            "chi": res.chi, "ci_lo": res.ci_lo, "ci_hi": res.ci_hi,
            "chi_qc": cqc, "rel_err_qc": rel,
        })
    counts = {
        "grid_points": len(points),
        "trials_per_point": trials,
        "total_trials": len(points) * trials,
    }
    return None, counts, EXIT_OK


def _cmd_lens(args: argparse.Namespace, emit: _Emitter):
    if args.grid_n < 2:
        raise ValueError("--grid-n must be >= 2")
    trials = args.trials
    svals = np.linspace(0.0, 2.0, args.grid_n)
    cvals = np.zeros(args.grid_n)
    sampled = 0
    for i, s in enumerate(svals):
        s = float(s)
        if s >= 2.0:
            # Exact zero-capacitance endpoint: the lens has closed.
            emit.row({"s": s, "trials": 0, "c": 0.0, "ci_lo": 0.0, "ci_hi": 0.0})
            continue
        est = lens_capacitance(
            LensSpec(s), trials, rho_inf=args.rho_inf, seed=args.seed,
            threads=args.threads, backend=args.backend,
            trial_offset=i * trials,
        )
        cvals[i] = est.point
        sampled += 1
        emit.row({
            "s": s, "trials": est.trials, "c": est.point,
            "ci_lo": est.lo, "ci_hi": est.hi,
        })
    integral = integral_from_profile(svals, cvals)
    summary = {
        "integral": integral,
        "quarter_integral_over_reference_chi": (integral / 4.0) / REFERENCE_CHI_SMALL_D,
    }
    counts = {
        "grid_points": args.grid_n,
        "trials_per_point": trials,
        "total_trials": sampled * trials,
    }
    return summary, counts, EXIT_OK


def _cmd_bdsim(args: argparse.Namespace, emit: _Emitter):
    combos = list(itertools.product(args.na, args.nb))
    trials = args.trials

    # One chi side run covers every combo: the mobility groups do not depend
    # on cap counts.  A tagged sub-seed keeps it off the primary streams.
    chi_mc = None
    derived = None
    try:
        derived = derive_constants(_params_from(args, N_A=combos[0][0], N_B=combos[0][1]))
        side_cfg = KmcConfig(
            trials=_CHI_SIDE_TRIALS, seed=split_seed(args.seed, _TAG_CHI_SIDE)
        )
        chi_mc = estimate_chi(
            derived, side_cfg, threads=args.threads, backend=args.backend
        ).chi
    except SingularGeometryError:
        pass  # non-rotating pair: no asymptotic prediction exists

    failures = 0
    for i, (na, nb) in enumerate(combos):
        p = _params_from(args, N_A=na, N_B=nb)
        cfg = BdConfig(
            trials=trials, seed=args.seed, R0=args.r0, R_inf=args.r_inf,
            dt_big=args.dt_big, dt_small=args.dt_small,
        )
        try:
            res = simulate_k0(
                p, cfg, threads=args.threads, backend=args.backend,
                trial_offset=i * trials,
            )
        except DiagnosticsError:
            failures += 1
            emit.row({
                "n_a": na, "n_b": nb, "trials": trials,
                "status": "step-budget-exhausted",
            })
            continue
        pred_a = pred_s = None
        if chi_mc is not None and chi_mc > 0:
            pred_a = rates.k0_asymptotic(p.eps, na, nb, chi_mc)
            pred_s = rates.k0_saturating(
                p.eps, na, nb, derived.lambda_A, derived.lambda_B,
                p.a_A, p.a_B, chi_mc,
            )
        emit.row({
            "n_a": na, "n_b": nb, "trials": res.trials,
            "bound": res.bound, "escaped": res.escaped,
            "k0_over_ksmol": res.estimate.point,
            "ci_lo": res.estimate.lo, "ci_hi": res.estimate.hi,
            "chi_mc": chi_mc, "pred_asymptotic": pred_a,
            "pred_saturating": pred_s, "status": "ok",
        })
    counts = {
        "grid_points": len(combos),
        "trials_per_point": trials,
        "total_trials": len(combos) * trials,
        "chi_side_trials": _CHI_SIDE_TRIALS if chi_mc is not None else 0,
    }
    return None, counts, EXIT_DIAGNOSTICS if failures else EXIT_OK


def _cmd_validate_zero_rotation(args: argparse.Namespace, emit: _Emitter):
    if args.grid_n < 2:
        raise ValueError("--grid-n must be >= 2")
    # Lens phase on a tagged sub-seed.
    svals, ests = lens_profile(
        args.grid_n, args.lens_trials,
        seed=split_seed(args.seed, _TAG_LENS_PHASE),
        rho_inf=args.rho_inf, threads=args.threads, backend=args.backend,
    )
    integral = integral_from_profile(svals, np.array([e.point for e in ests]))

    # Brownian-dynamics phase: single caps, no orientational motion.
    p = _params_from(args, Drot_A=0.0, Drot_B=0.0, Dsurf_A=0.0, Dsurf_B=0.0,
                     a_A=1.0, a_B=1.0, N_A=1, N_B=1)
    cfg = BdConfig(
        trials=args.trials, seed=args.seed, R0=args.r0, R_inf=args.r_inf,
        dt_big=args.dt_big, dt_small=args.dt_small,
    )
    res = simulate_k0(p, cfg, threads=args.threads, backend=args.backend)
    R0, R_inf = cfg.resolve_radii(p.R)

    # The rate estimator already inverts the finite-R_inf splitting
    # probability, so scaling its normalized rate C/R by R/R0 gives the
    # capture probability from R0 in an unbounded domain — directly
    # comparable to the lens prediction, independent of R_inf.
    p_pred = zero_rotation_k0(args.eps, R0, integral)
    scale = p.R / R0
    p_meas = res.estimate.point * scale
    lo = res.estimate.lo * scale
    hi = res.estimate.hi * scale
    se = (hi - lo) / (2.0 * z_quantile(res.estimate.alpha))
    z_abs = abs(p_meas - p_pred) / se if se > 0 else math.inf
    emit.row({
        "eps": args.eps, "r0": R0, "r_inf": R_inf,
        "grid_n": args.grid_n, "lens_trials": args.lens_trials,
        "integral": integral, "p_pred": p_pred,
        "bd_trials": res.trials, "bound": res.bound, "escaped": res.escaped,
        "p_meas": p_meas, "ci_lo": lo, "ci_hi": hi,
        "z_abs": z_abs,
        "status": "consistent" if z_abs <= 3.0 else "inconsistent",
    })
    counts = {
        "bd_trials": args.trials,
        "lens_grid_points": args.grid_n,
        "lens_trials_per_point": args.lens_trials,
        "lens_total_trials": (args.grid_n - 1) * args.lens_trials,
    }
    return None, counts, EXIT_OK


_COMMANDS = {
    "rates": (_RATES_COLUMNS, _cmd_rates),
    "chi": (_CHI_COLUMNS, _cmd_chi),
    "lens": (_LENS_COLUMNS, _cmd_lens),
    "bdsim": (_BDSIM_COLUMNS, _cmd_bdsim),
    "validate-zero-rotation": (_VALIDATE_COLUMNS, _cmd_validate_zero_rotation),
}


def _strip_out_flag(tokens: list[str]) -> list[str]:
    """Drop --out and its value: manifests store the output-independent argv."""
    kept: list[str] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "--out":
            i += 2
            continue
        if tok.startswith("--out="):
            i += 1
            continue
        kept.append(tok)
        i += 1
    return kept


def _resolved_params(args: argparse.Namespace) -> dict:
    """Full resolved parameter set for the manifest (flags after defaulting)."""
    skip = {"command", "out", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code) if exc.code is not None else EXIT_OK

    columns, handler = _COMMANDS[args.command]
    out_path = args.out
    started = time.perf_counter()

    manifest = None
    if out_path is not None:
        manifest = RunManifest(
            command=args.command,
            argv=_strip_out_flag(list(argv)),
            params=_resolved_params(args),
            seed=getattr(args, "seed", 0),
            version=__version__,
            output_format=args.format,
            output_path=str(out_path),
        )
        # Written up front marked incomplete so interrupted runs are
        # recognizable; rewritten with the checksum on success.
        try:
            write_manifest(out_path + ".manifest.json", manifest)
        except OSError as exc:
            print(f"error: cannot write manifest: {exc}", file=sys.stderr)
            return EXIT_USAGE

    try:
        emit = _Emitter(args.command, columns, args.format, out_path)
    except OSError as exc:
        print(f"error: cannot open output: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        summary, counts, code = handler(args, emit)
        emit.finish(summary)
    except DiagnosticsError as exc:
        emit.close()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except (ValueError, OverflowError) as exc:
        emit.close()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if summary is not None and args.format != "json":
        stream = sys.stdout if out_path is not None else sys.stderr
        for key, value in summary.items():
            print(f"{key} = {value!r}", file=stream)

    if manifest is not None:
        manifest.trial_counts = counts
        manifest.wall_clock_s = time.perf_counter() - started
        manifest.output_sha256 = sha256_file(out_path)
        manifest.complete = True
        write_manifest(out_path + ".manifest.json", manifest)

    return code


if __name__ == "__main__":
    sys.exit(main())
