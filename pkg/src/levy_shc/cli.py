"""Command-line runner: ``levy-shc COMMAND --config FILE [options]``.

Exit codes: 0 success, 1 some rows flagged as under-resolved (rows are still
written), 2 errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

from . import catalogue as cat
from . import heat_content as hc
from .asymptotics import limit_constant, mean_sup_stable
from .config import ConfigError, ExperimentConfig, load_config
from .plot import plot_csv
from .validation import run_invariants

COMMANDS = ("scan", "halfspace", "ball", "outer-ball", "gaps", "interior", "mean-sup", "corollary", "validate",
            "plot")


def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


class CsvSink:
    """Writes the header at once and rows either immediately (flush=row) or at the end."""

    def __init__(self, path: str | None, header, flush: str = "end") -> None:
        self.path, self.header, self.flush = path, list(header), flush
        self.lines = [",".join(self.header)]
        self.fh = None
        if path and flush == "row":
            self.fh = open(path, "w", newline="")
            self.fh.write(self.lines[0] + "\n")
            self.fh.flush()

    def add(self, values) -> None:
        line = ",".join(fmt(v) for v in values)
        self.lines.append(line)
        if self.fh:
            self.fh.write(line + "\n")
            self.fh.flush()

    def close(self) -> None:
        text = "\n".join(self.lines) + "\n"
        if self.fh:
            self.fh.close()
        elif self.path:
            with open(self.path, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _scaled_paths(cfg: ExperimentConfig, mult: float) -> int:
    return max(int(round(cfg.n_paths * mult)), 2)


def _integration_depth(cfg: ExperimentConfig) -> float:
    return cfg.integration_depth if cfg.integration_depth is not None else cfg.ball_radius / 2


INTEGRAL_HEADER = ("t", "psi_inv", "value", "se", "fine", "coarse", "doubled_nodes", "target", "rel_gap", "n_paths",
                   "n_steps", "flagged")


def _integral_values(row: hc.IntegralRow, target: float) -> list:
    return [row.t, row.psi_inv, row.value, row.se, row.fine, row.coarse, row.doubled_nodes, target,
            (row.value - target) / target, row.n_paths, row.n_steps, row.flagged]


def run_command(cmd: str, cfg: ExperimentConfig, out: str | None, workers: int, mult: float) -> int:
    """Run one experiment command; returns the exit code."""
    n = _scaled_paths(cfg, mult)
    common = dict(k=cfg.k, gamma=cfg.gamma, seed=cfg.seed, workers=workers)
    flagged = False
    if cmd == "scan":
        rep = hc.run_theorem_scan(cfg.spec, cfg.domain, cfg.t_grid, n, layer_a=cfg.layer_depth,
                                  boundary_fraction=cfg.boundary_fraction, tol=cfg.tolerance, **common)
        sink = CsvSink(out, hc.CSV_FIELDS, cfg.flush)
        for r in rep.rows:
            sink.add(r.csv_values())
        sink.close()
        flagged = rep.any_flagged
    elif cmd in ("halfspace", "ball", "outer-ball"):
        a = _integration_depth(cfg)
        target = limit_constant(cfg.spec.rv_index).value
        if cmd == "halfspace":
            rows = hc.halfspace_limit_experiment(cfg.spec.with_dimension(1), a, cfg.t_grid, n, tol=cfg.tolerance,
                                                 **common)
        else:
            rows = [r.rows["ball" if cmd == "ball" else "outer_ball"] for r in
                    hc.sandwich_experiment(cfg.spec, cfg.ball_radius, a, cfg.t_grid, n, tol=cfg.tolerance,
                                           **common)]
        sink = CsvSink(out, INTEGRAL_HEADER, cfg.flush)
        for r in rows:
            sink.add(_integral_values(r, target))
        sink.close()
        flagged = any(r.flagged for r in rows)
    elif cmd == "gaps":
        a = _integration_depth(cfg)
        target = limit_constant(cfg.spec.rv_index).value
        rows = hc.cancellation_gap(cfg.spec, cfg.ball_radius, a, cfg.t_grid, n, tol=cfg.tolerance, **common)
        sink = CsvSink(out, ("t", "ball", "halfspace", "outer_ball", "gap_inner", "gap_inner_se", "gap_outer",
                             "gap_outer_se", "target", "ordered", "n_paths", "n_steps", "flagged"), cfg.flush)
        for r in rows:
            rr = r.rows
            f = any(x.flagged for x in rr.values())
            flagged |= f
            sink.add([r.t, rr["ball"].value, rr["halfspace"].value, rr["outer_ball"].value, r.gap_inner,
                      r.gap_inner_se, r.gap_outer, r.gap_outer_se, target, r.ordered, rr["ball"].n_paths,
                      rr["ball"].n_steps, f])
        sink.close()
    elif cmd == "interior":
        a = cfg.interior_depth if cfg.interior_depth is not None else cfg.domain.R / 2
        rows = hc.interior_loss_experiment(cfg.spec, cfg.domain, a, cfg.t_grid, n, **common)
        sink = CsvSink(out, ("t", "loss", "loss_se", "ratio", "ratio_se", "n_paths", "n_steps"), cfg.flush)
        for r in rows:
            sink.add([r.t, r.loss, r.loss_se, r.ratio, r.ratio_se, r.n_paths, r.n_steps])
        sink.close()
    elif cmd == "mean-sup":
        sink = CsvSink(out, ("alpha", "value", "se", "method"), cfg.flush)
        for alpha in cfg.alphas:
            v = mean_sup_stable(alpha, max(int(round(cfg.mean_sup_paths * mult)), 2), cfg.seed, workers)
            sink.add([v.alpha, v.value, v.se])
            sink.lines[-1] += "," + v.method
        sink.close()
    elif cmd == "corollary":
        if cfg.spec.kind != "truncated":
            raise ConfigError("corollary needs a truncated process (kind = truncated, base = ...)")
        rep = hc.corollary_experiment(cfg.spec.base, cfg.spec.cutoff, cfg.domain, cfg.t_grid, n,
                                      layer_a=cfg.layer_depth, boundary_fraction=cfg.boundary_fraction,
                                      tol=cfg.tolerance, **common)
        sink = CsvSink(out, ("t", "psi_inv", "base_scaled", "base_se", "trunc_scaled", "trunc_se", "diff", "diff_se",
                             "target", "n_paths", "n_steps", "flagged"), cfg.flush)
        for rb, rt, d, se in zip(rep.base.rows, rep.truncated.rows, rep.diff, rep.diff_se):
            f = rb.flagged or rt.flagged
            flagged |= f
            sink.add([rb.t, rb.psi_inv, rb.scaled_loss, rb.scaled_se, rt.scaled_loss, rt.scaled_se, float(d),
                      float(se), rb.target, rb.n_paths, rb.n_steps, f])
        sink.close()
    else:
        raise ValueError(f"unknown command {cmd!r}")
    return 1 if flagged else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levy-shc", description="Small-time heat content of isotropic Lévy processes.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", nargs="?", help="CSV to render (plot only)")
    ap.add_argument("--config", help="experiment configuration file")
    ap.add_argument("--out", help="CSV output path (default: [output] csv, else stdout)")
    ap.add_argument("--svg", help="SVG output path (plot, or a chart next to the CSV)")
    ap.add_argument("--seed", type=int, help="override the configured seed")
    ap.add_argument("--workers", type=int, default=1, help="worker threads; results do not depend on it")
    ap.add_argument("--budget-multiplier", type=float, default=1.0, help="scale every path budget")
    ap.add_argument("--series", help="comma-separated CSV columns to plot")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.workers < 1 or not args.budget_multiplier > 0 or not math.isfinite(args.budget_multiplier):
            raise ConfigError("--workers must be >= 1 and --budget-multiplier > 0")
        if args.command == "plot":
            src = args.input or args.out
            if not src or not args.svg:
                raise ConfigError("plot needs an input CSV and --svg PATH")
            plot_csv(src, args.svg, args.series.split(",") if args.series else None)
            return 0
        if args.command == "validate":
            checks = run_invariants(args.seed or 0)
            for c in checks:
                print(c.line())
            return 0 if all(c.ok for c in checks) else 1
        if not args.config:
            raise ConfigError(f"{args.command} needs --config PATH")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        out = args.out or cfg.csv
        code = run_command(args.command, cfg, out, args.workers, args.budget_multiplier)
        svg = args.svg or cfg.svg
        if svg and out:
            plot_csv(out, svg)
        return code
    except (ConfigError, cat.InvalidSpecError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # sampler failures and the like
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
