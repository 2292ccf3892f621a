"""Command-line front end.

Exit codes: 0 success / all checks pass, 1 validation failure,
2 usage or configuration error.  Reports embed the schema version, the
full config echo and the library version so a run can be reproduced from
its own output file.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .ambient import sff_lambdas
from .errors import BergmanLabError, ConfigError
from .experiments import (ExperimentConfig, _setup, k_sweep_bergman,
                          ratio_experiment, validate)
from .geometry import MetricPotential, build_grid
from .hermitian import save_matrix
from .reports import (canonical_json, write_field_csv, write_report,
                      write_samples_csv, write_table_csv)


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit, so run() owns codes."""

    def error(self, message):
        raise ConfigError(message)


def _parse_k_list(text):
    text = text.strip()
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--k-list wants 'lo:hi' or 'k1,k2,...', got {text!r}")


def _parse_grid(text):
    parts = text.replace("x", ",").split(",")
    try:
        parts = [int(v) for v in parts]
    except ValueError:
        parts = []
    if len(parts) != 2:
        raise ConfigError(f"--grid wants 'n_theta,n_angle' or 'NxM', got {text!r}")
    return tuple(parts)


def build_parser():
    p = _Parser(prog="bergman-lab",
                description="Bergman density / Fubini-Study map experiments on P^1")
    p.add_argument("--version", action="version", version=f"bergman-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, k_default=None):
        sp.add_argument("--config", type=Path, default=None,
                        help="TOML file with ExperimentConfig keys; flags override")
        sp.add_argument("--k", type=int, default=k_default)
        sp.add_argument("--k-list", type=str, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--sigma", type=float, default=None)
        sp.add_argument("--epsilon", type=float, default=None)
        sp.add_argument("--grid", type=str, default=None)
        sp.add_argument("--metric", choices=("fs", "perturbed"), default=None)
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--deterministic-reduction", action="store_true",
                        default=None)

    for name, helptext in (
            ("gram", "Hilbert-map Gram matrix for one k"),
            ("bergman", "Bergman density statistics for one or more k"),
            ("ratio", "Monte-Carlo injectivity-ratio experiment"),
            ("sweep", "Bergman density decay sweep over k"),
            ("sff", "second-fundamental-form eigenvalue statistics"),
            ("validate", "run the identity battery")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        if name == "ratio":
            sp.add_argument("--samples-csv", type=Path, default=None,
                            help="per-sample table destination (default: next to --out)")
    return p


def _config_from_args(args) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file is not valid TOML: {exc}") from exc

    if args.metric == "fs":
        if args.epsilon not in (None, 0.0):
            raise ConfigError("--metric fs contradicts --epsilon; "
                              "use --metric perturbed")
        data["epsilon"] = 0.0
    elif args.metric == "perturbed":
        data["epsilon"] = args.epsilon if args.epsilon is not None else 0.05
    elif args.epsilon is not None:
        data["epsilon"] = args.epsilon

    if args.k is not None and args.k_list is not None:
        raise ConfigError("give --k or --k-list, not both")
    if args.k is not None:
        data["k_list"] = (args.k,)
    elif args.k_list is not None:
        data["k_list"] = _parse_k_list(args.k_list)
    if args.samples is not None:
        data["samples_per_k"] = args.samples
    if args.seed is not None:
        data["seed"] = args.seed
    if args.sigma is not None:
        data["sigma"] = args.sigma
    if args.grid is not None:
        data["grid"] = _parse_grid(args.grid)
    if args.threads is not None:
        data["threads"] = args.threads
    if args.deterministic_reduction:
        data["deterministic_reduction"] = True
    return ExperimentConfig.from_dict(data)


def _cmd_gram(args, cfg):
    k = cfg.k_list[0]
    potential = MetricPotential(cfg.epsilon)
    grid = build_grid("P1", cfg.grid, potential)
    H, _, _ = _setup(potential, k, grid)
    diag = ", ".join(f"{v:.12g}" for v in np.diagonal(H.M).real)
    print(f"k={k} metric={potential.name} gram diag: [{diag}]")
    if args.out:
        if args.format == "csv":
            save_matrix(args.out, H.M, fmt="csv")
        else:
            report = {"kind": "gram", "config": cfg.echo_dict(), "k": k,
                      "diag": [float(v) for v in np.diagonal(H.M).real],
                      "matrix_re": H.M.real.tolist(),
                      "matrix_im": H.M.imag.tolist()}
            write_report(args.out, report)
    return 0


def _cmd_bergman(args, cfg):
    potential = MetricPotential(cfg.epsilon)
    grid = build_grid("P1", cfg.grid, potential)
    rows = []
    last_ctx = None
    for k in cfg.k_list:
        _, _, ctx = _setup(potential, k, grid)
        dev = float(np.max(np.abs(ctx.rho - 1.0)))
        mass = grid.integrate(ctx.rho)
        rows.append({"k": k, "max_rho_dev": dev, "rho_mass": mass})
        print(f"k={k} max|rho-1|={dev:.6e} mass={mass:.12f}")
        last_ctx = ctx
    if args.out:
        if args.format == "csv":
            write_field_csv(args.out, grid, {"rho": last_ctx.rho})
        else:
            write_report(args.out, {"kind": "bergman", "config": cfg.echo_dict(),
                                    "per_k": rows})
    return 0


def _cmd_ratio(args, cfg):
    report, samples = ratio_experiment(cfg)
    for row in report["per_k"]:
        print(f"k={row['k']} sup_ratio={row['sup_ratio']:.6f} "
              f"mean={row['mean_ratio']:.6f} max|rho-1|={row['max_rho_dev']:.3e} "
              f"min_sff={row['min_sff']:.4f}")
    slope = report["slope_sup_ratio"]
    if slope is not None:
        print(f"fitted slope of log sup_ratio vs log k: {slope:+.4f}")
    if args.out:
        write_report(args.out, report)
        csv_path = args.samples_csv or args.out.with_suffix(".samples.csv")
        write_samples_csv(csv_path, samples)
    elif args.samples_csv:
        write_samples_csv(args.samples_csv, samples)
    return 0


def _cmd_sweep(args, cfg):
    report = k_sweep_bergman(cfg)
    for row in report["per_k"]:
        print(f"k={row['k']} max|rho-1|={row['max_rho_dev']:.6e} "
              f"k*dev={row['k_times_dev']:.6f} "
              f"metric_dev={row['max_metric_dev']:.3e}")
    print(f"decay exponent (1/k-extrapolated): {report['decay_exponent']:+.4f}; "
          f"windowed log-log slope: {report['loglog_slope']:+.4f}")
    if args.out:
        write_report(args.out, report)
    return 0


def _cmd_sff(args, cfg):
    potential = MetricPotential(cfg.epsilon)
    grid = build_grid("P1", cfg.grid, potential)
    rows = []
    for k in cfg.k_list:
        _, _, ctx = _setup(potential, k, grid)
        lams = sff_lambdas(ctx)
        rows.append({"k": k, "min_lambda": float(np.min(lams)),
                     "max_lambda": float(np.max(lams))})
        print(f"k={k} min_lambda={rows[-1]['min_lambda']:.8f} "
              f"max_lambda={rows[-1]['max_lambda']:.8f}")
    if args.out:
        if args.format == "csv":
            write_table_csv(args.out, rows, ("k", "min_lambda", "max_lambda"))
        else:
            write_report(args.out, {"kind": "sff", "config": cfg.echo_dict(),
                                    "per_k": rows})
    return 0


def _cmd_validate(args, cfg):
    report = validate(cfg)
    for chk in report["checks"]:
        status = "ok  " if chk["pass"] else "FAIL"
        print(f"{status} {chk['check']}: defect {chk['max_defect']:.3e} "
              f"(tol {chk['tol']:.0e})")
    if args.out:
        write_report(args.out, report)
    if not report["pass"]:
        print(f"first failure: {report['first_failure']}")
        return 1
    print("all identity checks passed")
    return 0


_COMMANDS = {
    "gram": _cmd_gram,
    "bergman": _cmd_bergman,
    "ratio": _cmd_ratio,
    "sweep": _cmd_sweep,
    "sff": _cmd_sff,
    "validate": _cmd_validate,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except BergmanLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
