"""Command-line interface: run / analyze / linear / heat-decay.

All CSV output is RFC-4180 (CRLF line endings, '.' decimal point) with 17
significant digits.  Exit codes: 0 success, 2 validation error, 3 vacuum
abort.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import tempfile

import numpy as np

from .besov import DataError, besov_norm_from_blocks
from .config import ConfigError, parse_config_file
from .grid import Grid, GridError
from .linear import (
    LinearEnergyParams,
    mode_eigenvalues,
    rate_floor,
    regime_classify,
)
from .lp import LPDecomp
from .model import VacuumError, conserved_quantities
from .operators import ParameterError
from .simulation import (
    DecaySpec,
    decay_fit,
    default_norm_columns,
    fractional_heat_trace,
    run,
)
from .snapshot import SnapshotError, read_snapshot, write_snapshot

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VACUUM = 3


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(path, header, rows):
    """Atomic CSV write (temp file + rename); '-' writes to stdout."""

    def emit(fh):
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

    if path == "-":
        emit(sys.stdout)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cmd_run(args) -> int:
    config = parse_config_file(args.config)
    params = config.model_params()
    print(
        f"run: dim={config.dim} n={config.n} L={_fmt(config.L)} "
        f"alpha={_fmt(params.alpha)} kappa={_fmt(params.kappa)} "
        f"gamma={_fmt(params.gamma)} mu={_fmt(params.mu)} lambda={_fmt(params.lam)} "
        f"ic={config.ic} amplitude={_fmt(config.amplitude)} seed={config.seed}"
    )
    store = config.snapshot_path is not None
    trace, states = run(config, store_states=store)
    _write_csv(args.output, trace.columns, trace.rows)
    if store and states:
        write_snapshot(config.snapshot_path, states[-1], params)
    if config.decay_window is not None:
        try:
            exponent, r2 = decay_fit(
                trace.t,
                trace.column(config.decay_column),
                config.decay_window,
                kind=config.decay_kind,
            )
            print(f"decay fit [{config.decay_column}]: exponent={_fmt(exponent)} r2={_fmt(r2)}")
        except ValueError as exc:
            print(f"decay fit skipped: {exc}", file=sys.stderr)
    if trace.status == "vacuum":
        print("vacuum abort: partial trace written", file=sys.stderr)
        return EXIT_VACUUM
    return EXIT_OK


def _cmd_analyze(args) -> int:
    rows = []
    header = None
    for path in args.snapshots:
        state, params = read_snapshot(path)
        st = state.to_representation("sigma_u", params)
        grid = st.grid
        lp = LPDecomp.for_grid(grid)
        js = np.array(lp.j_range)
        ep = LinearEnergyParams.from_model(params)
        sig_mf = st.scalar.mean_free()
        u_mf = st.u.mean_free()
        bn_sig = lp.block_norms(sig_mf)
        bn_u = lp.block_norms(u_mf)
        mass, mom = conserved_quantities(st, params)
        row = {"t": st.t, "min_rho": st.min_rho(params), "mass": mass}
        for i in range(grid.dim):
            row[f"mom_{i + 1}"] = mom[i]
        row["l2_sigma"] = sig_mf.l2()
        row["l2_u"] = u_mf.l2()
        for name, target, spec in default_norm_columns(params, grid.dim, ep.j0):
            bn = bn_u if target == "u" else bn_sig
            row[name] = besov_norm_from_blocks(js, bn, spec)
        if header is None:
            header = list(row.keys())
        rows.append([row[c] for c in header])
    _write_csv(args.output, header, rows)
    return EXIT_OK


def _cmd_linear(args) -> int:
    ep = LinearEnergyParams(alpha=args.alpha, lam=args.lam, mu=args.mu)
    if not (1.0 < ep.alpha < 2.0):
        raise ParameterError(f"alpha must lie in (1, 2), got {ep.alpha}")
    if ep.lam <= 0 or ep.mu <= 0:
        raise ParameterError("lambda and mu must be > 0")
    if args.xi:
        xis = [float(x) for x in args.xi]
    else:
        xis = list(
            np.logspace(np.log10(args.xi_min), np.log10(args.xi_max), args.xi_count)
        )
    rows = []
    for xi in xis:
        if xi <= 0:
            raise ParameterError(f"|xi| must be > 0, got {xi}")
        fast, slow = mode_eigenvalues(xi, ep)
        rows.append(
            [
                xi,
                fast.real,
                slow.real,
                abs(slow.imag),
                regime_classify(xi, ep),
                rate_floor(xi, ep),
            ]
        )
    _write_csv(
        args.output, ["|xi|", "re_fast", "re_slow", "im", "regime", "rate_floor"], rows
    )
    return EXIT_OK


def _cmd_heat_decay(args) -> int:
    grid = Grid(args.dim, args.n, args.L)
    spec = DecaySpec(s0=args.s0, s1=args.s1, alpha=args.alpha, dim=args.dim)
    times = np.linspace(args.t_a, args.t_b, args.samples)
    trace = fractional_heat_trace(
        grid, args.alpha, args.mu, args.profile, times, s0=args.s0, s1=args.s1,
        width=args.width,
    )
    note = "periodic-box surrogate; window must end before the lowest-mode timescale"
    rows = []
    window = (args.t_a, args.t_b)
    exp_l2, r2_l2 = decay_fit(trace.t, trace.column("l2"), window)
    rows.append(
        [args.alpha, args.s0, args.s1, args.t_a, args.t_b, "l2", exp_l2,
         -args.dim / (2.0 * args.alpha), r2_l2, note]
    )
    exp_b, r2_b = decay_fit(trace.t, trace.column("b_s1"), window)
    # a Gaussian's flat spectrum acts like the s0 = N/2 envelope
    s0_eff = args.dim / 2.0 if args.profile == "gaussian" else args.s0
    rows.append(
        [args.alpha, args.s0, args.s1, args.t_a, args.t_b, "b_s1", exp_b,
         -(args.s1 + s0_eff) / args.alpha, r2_b, note]
    )
    _write_csv(
        args.output,
        ["alpha", "s0", "s1", "t_a", "t_b", "norm", "exponent", "target", "r2", "note"],
        rows,
    )
    print(f"l2 exponent={_fmt(exp_l2)}; b_s1 exponent={_fmt(exp_b)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="euleralign",
        description="Pseudospectral toolkit for the fractional Euler-alignment system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full nonlinear simulation from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output", required=True, help="trace CSV path ('-' = stdout)")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="recompute norms on stored snapshots")
    p_an.add_argument("snapshots", nargs="+")
    p_an.add_argument("--output", required=True)
    p_an.set_defaults(func=_cmd_analyze)

    p_lin = sub.add_parser("linear", help="eigenvalue / decay-rate tables")
    p_lin.add_argument("--alpha", type=float, required=True)
    p_lin.add_argument("--lambda", dest="lam", type=float, required=True)
    p_lin.add_argument("--mu", type=float, required=True)
    p_lin.add_argument("--xi", action="append", help="frequency magnitude (repeatable)")
    p_lin.add_argument("--xi-min", type=float, default=2.0**-6)
    p_lin.add_argument("--xi-max", type=float, default=2.0**10)
    p_lin.add_argument("--xi-count", type=int, default=200)
    p_lin.add_argument("--output", default="-")
    p_lin.set_defaults(func=_cmd_linear)

    p_hd = sub.add_parser("heat-decay", help="fractional-heat decay-exponent experiment")
    p_hd.add_argument("--dim", type=int, default=1)
    p_hd.add_argument("--n", type=int, default=8192)
    p_hd.add_argument("--L", type=float, default=512.0 * np.pi)
    p_hd.add_argument("--alpha", type=float, default=1.5)
    p_hd.add_argument("--mu", type=float, default=1.0)
    p_hd.add_argument("--profile", choices=["gaussian", "power"], default="gaussian")
    p_hd.add_argument("--width", type=float, default=1.0)
    p_hd.add_argument("--s0", type=float, default=0.25)
    p_hd.add_argument("--s1", type=float, default=0.0)
    p_hd.add_argument("--t-a", type=float, default=20.0)
    p_hd.add_argument("--t-b", type=float, default=200.0)
    p_hd.add_argument("--samples", type=int, default=200)
    p_hd.add_argument("--output", default="-")
    p_hd.set_defaults(func=_cmd_heat_decay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VacuumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VACUUM
    except (ConfigError, ParameterError, GridError, SnapshotError, DataError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
