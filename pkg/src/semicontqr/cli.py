"""Command-line surface: generate, fit, predict, simstudy, bands, compare.

Data files are comma-separated UTF-8 with header ``x,y`` (the positivity
indicator is derived as z = 1 when y > 0) or ``x,z,y``.  Fit summaries
are JSON; everything else is CSV so figures can be drawn by any external
tool.  All randomness flows from ``--seed``; when the flag is absent a
seed is drawn from OS entropy and echoed to stdout as ``seed=<value>``
so the run can be reproduced.  The environment variable
``SEMICONT_QR_LOG`` (error, warn, info, debug) controls diagnostics.
"""

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from .bootstrap import bands_to_csv, bootstrap_bands
from .binary import BinaryFit
from .copulas import CopulaSpec, tau_to_theta, theta_to_tau
from .errors import DataError, DomainError, SemicontQrError
from .margins import EmpiricalCdf, SmoothedCdf
from .positive import PositiveFit
from .simulate import (
    Dataset,
    ProposedSpec,
    SimReport,
    ZilqrSpec,
    dgp_catalog,
    generate,
    run_cell,
)
from .two_part import TwoPartFit, fit_two_part, predict_quantile, region_tags
from .zilqr import ZilqrModel, fit_linquant

_log = logging.getLogger("semicontqr.cli")

FAMILIES = ("gaussian", "clayton", "frank", "independence")
DGP_NAMES = ("gc", "gf", "cf", "ll1", "ll2")
PREDICT_COLUMNS = ("x", "tau", "qhat", "region", "pi0")
COMPARE_COLUMNS = ("x", "tau", "proposed", "zilqr", "direct", "occurrence")
FIT_KEYS = (
    "p0_hat", "theta1", "theta2", "family_c", "family_d", "delta", "n",
    "bandwidth_y", "bandwidth_x", "loglik_binary", "loglik_positive",
)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _configure_logging() -> None:
    name = os.environ.get("SEMICONT_QR_LOG", "error").strip().lower()
    level = _LOG_LEVELS.get(name, logging.ERROR)
    root = logging.getLogger("semicontqr")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(level)


# ---------------------------------------------------------------------------
# data files


def read_dataset(path) -> Dataset:
    """Parse an x,y or x,z,y CSV; malformed rows name their line number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header == ["x", "y"]:
            has_z = False
        elif header == ["x", "z", "y"]:
            has_z = True
        else:
            raise DataError(
                f"{path}: line 1: expected header 'x,y' or 'x,z,y', got "
                f"{','.join(header)!r}"
            )
        xs, zs, ys = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: line {lineno}: expected {len(header)} fields, "
                    f"got {len(row)}"
                )
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}: non-numeric field"
                ) from None
            if not all(np.isfinite(vals)):
                raise DataError(f"{path}: line {lineno}: non-finite value")
            yv = vals[-1]
            if yv < 0.0:
                raise DataError(f"{path}: line {lineno}: negative response y={yv}")
            if has_z:
                zv = vals[1]
                if zv not in (0.0, 1.0):
                    raise DataError(
                        f"{path}: line {lineno}: z must be 0 or 1, got {row[1]}"
                    )
                if zv != float(yv > 0.0):
                    raise DataError(
                        f"{path}: line {lineno}: z={int(zv)} contradicts y={yv}"
                    )
            xs.append(vals[0])
            zs.append(float(yv > 0.0))
            ys.append(yv)
    if not xs:
        raise DataError(f"{path}: no data rows")
    return Dataset(
        x=np.asarray(xs), z=np.asarray(zs, dtype=np.int64), y=np.asarray(ys)
    )


def write_dataset(path, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "z", "y"])
        for i in range(data.x.shape[0]):
            writer.writerow(
                [repr(float(data.x[i])), int(data.z[i]), repr(float(data.y[i]))]
            )


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"could not parse {what} list {text!r}") from None
    if not vals:
        raise DomainError(f"empty {what} list")
    return vals


def _parse_ints(text: str, what: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"could not parse {what} list {text!r}") from None
    if not vals:
        raise DomainError(f"empty {what} list")
    return vals


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy)
    print(f"seed={seed}")
    return seed


def _x_grid(args, x: np.ndarray) -> np.ndarray:
    """Prediction grid: --grid N spans the observed x range; absent -> data x."""
    if args.grid:
        if args.grid < 2:
            raise DomainError(f"grid needs at least 2 points, got {args.grid}")
        return np.linspace(float(x.min()), float(x.max()), args.grid)
    return x


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    dgp = dgp_catalog(args.dgp, p0=args.p0)
    if args.theta1 is not None or args.theta2 is not None:
        if dgp.kind != "copula":
            raise DomainError(f"DGP {dgp.name!r} has no copula parameters")
        t1, t2 = dgp.theta1, dgp.theta2
        if args.theta1 is not None:
            t1 = (tau_to_theta(dgp.family_c, args.theta1)
                  if args.param_scale == "kendall" else args.theta1)
        if args.theta2 is not None:
            t2 = (tau_to_theta(dgp.family_d, args.theta2)
                  if args.param_scale == "kendall" else args.theta2)
        dgp = dataclasses.replace(dgp, theta1=t1, theta2=t2)
    seed = _resolve_seed(args)
    data = generate(dgp, args.n, seed)
    write_dataset(args.out, data)
    return 0


def cmd_fit(args) -> int:
    data = read_dataset(args.input)
    fit = fit_two_part(
        data.x, data.y, args.copula_c, args.copula_d,
        delta=args.delta, bw_rule=args.bw_rule,
    )
    doc = {
        "p0_hat": fit.binary.p0_hat,
        "theta1": fit.binary.copula.theta,
        "theta2": fit.positive.copula.theta,
        "family_c": fit.binary.copula.family,
        "family_d": fit.positive.copula.family,
        "delta": fit.delta,
        "n": fit.n,
        "bandwidth_y": fit.positive.fy_pos.bandwidth,
        "bandwidth_x": fit.positive.fx_pos.bandwidth,
        "loglik_binary": fit.binary.loglik,
        "loglik_positive": fit.positive.loglik,
    }
    if args.seed is not None:
        doc["seed"] = args.seed
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    if args.param_scale == "kendall":
        k1 = theta_to_tau(doc["family_c"], doc["theta1"])
        k2 = theta_to_tau(doc["family_d"], doc["theta2"])
        print(f"kendall_tau1={k1!r} kendall_tau2={k2!r}")
    return 0


def rebuild_fit(doc: dict, data: Dataset) -> TwoPartFit:
    """Reassemble a fitted model from its JSON summary plus the data file.

    Stored parameters and bandwidths are reused as-is (no re-estimation),
    so predictions agree exactly with the fitting run.
    """
    missing = [k for k in FIT_KEYS if k not in doc]
    if missing:
        raise DataError(f"fit summary missing keys: {', '.join(missing)}")
    if int(doc["n"]) != data.x.shape[0]:
        raise DataError(
            f"fit summary describes n={doc['n']} rows but data file has "
            f"{data.x.shape[0]}"
        )
    binary = BinaryFit(
        copula=CopulaSpec(doc["family_c"], float(doc["theta1"])),
        p0_hat=float(doc["p0_hat"]),
        fx_hat=EmpiricalCdf(data.x, rescale=True),
        loglik=float(doc["loglik_binary"]),
    )
    pos = data.y > 0.0
    x_pos = data.x[pos]
    y_pos = data.y[pos]
    positive = PositiveFit(
        copula=CopulaSpec(doc["family_d"], float(doc["theta2"])),
        fy_pos=SmoothedCdf(y_pos, float(doc["bandwidth_y"])),
        fx_pos=SmoothedCdf(x_pos, float(doc["bandwidth_x"])),
        m=int(pos.sum()),
        loglik=float(doc["loglik_positive"]),
    )
    return TwoPartFit(
        binary=binary, positive=positive, n=data.x.shape[0],
        delta=float(doc["delta"]),
    )


def cmd_predict(args) -> int:
    with open(args.fit) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.fit}: invalid JSON: {exc}") from None
    data = read_dataset(args.input)
    fit = rebuild_fit(doc, data)
    taus = _parse_floats(args.tau, "tau")
    grid = _x_grid(args, data.x)
    pi0_vals = np.atleast_1d(fit.binary.pi0(grid))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICT_COLUMNS)
        for tau in taus:
            qhat = predict_quantile(fit, tau, grid)
            tags = region_tags(fit, tau, grid)
            for g in range(grid.shape[0]):
                writer.writerow([
                    repr(float(grid[g])), repr(tau), repr(float(qhat[g])),
                    tags[g], repr(float(pi0_vals[g])),
                ])
    return 0


def cmd_simstudy(args) -> int:
    names = [s.strip().lower() for s in args.cells.split(",") if s.strip()]
    unknown = [s for s in names if s not in DGP_NAMES]
    if unknown:
        raise DomainError(f"unknown DGP name(s): {', '.join(unknown)}")
    n_list = _parse_ints(args.n, "n")
    p0_list = _parse_floats(args.p0, "p0")
    tau_list = _parse_floats(args.tau, "tau")
    seed = _resolve_seed(args)

    cells = []
    for name in names:
        if name in ("ll1", "ll2"):
            cells.extend((name, None, n) for n in n_list)
        else:
            cells.extend((name, p0, n) for p0 in p0_list for n in n_list)
    cell_seeds = np.random.SeedSequence(seed).generate_state(len(cells), np.uint64)

    estimators = [ProposedSpec(delta=args.delta), ZilqrSpec()]
    report = SimReport(rows=[])
    failures = []
    for k, (name, p0, n) in enumerate(cells):
        dgp = dgp_catalog(name, p0=p0)
        try:
            part = run_cell(
                dgp, n, tau_list, estimators, R=args.r, G=args.g,
                seed=int(cell_seeds[k]), jobs=args.jobs,
            )
        except SemicontQrError as exc:
            failures.append(
                f"cell dgp={name} n={n} p0={p0}: {type(exc).__name__}: {exc}"
            )
            continue
        report.rows.extend(part.rows)

    report.to_csv(args.out)
    if failures:
        sidecar = f"{args.out}.log"
        with open(sidecar, "w") as fh:
            fh.write("\n".join(failures) + "\n")
        print(
            f"semicontqr: {len(failures)} of {len(cells)} cells failed; "
            f"see {sidecar}",
            file=sys.stderr,
        )
    return 0 if report.rows else 1


def cmd_bands(args) -> int:
    data = read_dataset(args.input)
    taus = _parse_floats(args.tau, "tau")
    grid = _x_grid(args, data.x)
    seed = _resolve_seed(args)
    bands = bootstrap_bands(
        data.x, data.y, args.copula_c, args.copula_d, taus, grid,
        B=args.b, level=args.level, seed=seed, delta=args.delta,
        jobs=args.jobs,
    )
    bands_to_csv(bands, args.out)
    return 0


def cmd_compare(args) -> int:
    data = read_dataset(args.input)
    taus = _parse_floats(args.tau, "tau")
    grid = _x_grid(args, data.x)

    proposed_fit = fit_two_part(
        data.x, data.y, args.copula_c, args.copula_d, delta=args.delta
    )
    occurrence = 1.0 - np.atleast_1d(proposed_fit.binary.pi0(grid))
    try:
        zilqr_model = ZilqrModel(data.x, data.z.astype(np.float64), data.y)
    except SemicontQrError as exc:
        zilqr_model = None
        _log.warning("ZILQR baseline unavailable: %s", exc)

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPARE_COLUMNS)
        for tau in taus:
            qhat = predict_quantile(proposed_fit, tau, grid)
            if zilqr_model is not None:
                zvals = np.atleast_1d(zilqr_model.predict(tau, grid))
            direct = fit_linquant(data.x, data.y, tau)
            dvals = direct.beta0 + direct.beta1 * grid
            for g in range(grid.shape[0]):
                writer.writerow([
                    repr(float(grid[g])), repr(tau), repr(float(qhat[g])),
                    "" if zilqr_model is None else repr(float(zvals[g])),
                    repr(float(dvals[g])), repr(float(occurrence[g])),
                ])
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_data_in(p) -> None:
    p.add_argument("--in", dest="input", required=True,
                   help="input data CSV (header x,y or x,z,y)")


def _add_fit_params(p) -> None:
    p.add_argument("--copula-c", required=True, choices=FAMILIES,
                   help="occurrence-part copula family")
    p.add_argument("--copula-d", required=True, choices=FAMILIES,
                   help="positive-part copula family")
    p.add_argument("--delta", type=float, default=0.25,
                   help="band-width exponent: interpolation band spans "
                        "n**-delta above pi0 (default 0.25)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semicontqr",
        description="Two-part copula quantile regression for semicontinuous data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a synthetic dataset")
    p.add_argument("--dgp", required=True, choices=DGP_NAMES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p0", type=float, default=None,
                   help="zero mass (copula DGPs only)")
    p.add_argument("--theta1", type=float, default=None,
                   help="override the occurrence dependence parameter")
    p.add_argument("--theta2", type=float, default=None,
                   help="override the positive-part dependence parameter")
    p.add_argument("--param-scale", choices=("native", "kendall"),
                   default="native",
                   help="scale on which --theta1/--theta2 are read")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit the two-part copula model")
    _add_data_in(p)
    _add_fit_params(p)
    p.add_argument("--bw-rule", choices=("normal-reference", "cross-validation"),
                   default="normal-reference",
                   help="bandwidth rule for the smoothed margins")
    p.add_argument("--param-scale", choices=("native", "kendall"),
                   default="native",
                   help="kendall: also echo rank-correlation estimates")
    p.add_argument("--seed", type=int, default=None,
                   help="provenance seed recorded in the summary")
    p.add_argument("--out", required=True, help="fit summary JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="conditional quantiles from a fit summary")
    p.add_argument("--fit", required=True, help="fit summary JSON")
    _add_data_in(p)
    p.add_argument("--tau", required=True, help="comma-separated quantile levels")
    p.add_argument("--grid", type=int, default=0,
                   help="evaluate on N equispaced x points (default: data x)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simstudy", help="Monte Carlo IMSE/IBIAS2/IVAR tables")
    p.add_argument("--cells", required=True,
                   help="comma-separated DGP names (gc,gf,cf,ll1,ll2)")
    p.add_argument("--n", required=True, help="comma-separated sample sizes")
    p.add_argument("--p0", default="0.1,0.2,0.4",
                   help="comma-separated zero masses (copula DGPs)")
    p.add_argument("--tau", default="0.5,0.7,0.9",
                   help="comma-separated quantile levels")
    p.add_argument("--r", type=int, default=500, help="replications per cell")
    p.add_argument("--g", type=int, default=91, help="x-grid points")
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simstudy)

    p = sub.add_parser("bands", help="pairs-bootstrap pointwise bands")
    _add_data_in(p)
    _add_fit_params(p)
    p.add_argument("--tau", required=True, help="comma-separated quantile levels")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--b", type=int, default=300, help="bootstrap replicates")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser(
        "compare",
        help="proposed vs ZILQR vs direct linear QR on a shared grid",
    )
    _add_data_in(p)
    _add_fit_params(p)
    p.add_argument("--tau", required=True, help="comma-separated quantile levels")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SemicontQrError as exc:
        print(f"semicontqr: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"semicontqr: error: OSError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
