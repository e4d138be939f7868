"""Command-line front end and Monte Carlo experiments.

Subcommands::

    chancert bounds-dist  --channel-dim 4 --rank 6 --rank 10 --samples 1000 --out bounds.csv
    chancert trunc-error  --channel-dim 4 --rank 2 --rank 16 --samples 1000 --out error.csv
    chancert certify      standard.json candidate.json --method vqfe --m 6

Every sample draws from its own random stream keyed by ``(seed, rank,
sample_index)``, so output does not depend on the number of workers.
"""

import argparse
import contextlib
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .certify import ShotConfig, ssfb_certify, vqfe_certify
from .channels import as_channel, load_device
from .fidelity import bounds_report
from .randchan import random_choi, spawn_rng
from .vqsd import OptimizerConfig

log = logging.getLogger(__name__)

PAIRINGS = ("independent_pairs", "fixed_standard")
DEFAULT_SAMPLES = 1000
LARGE_RUN = 10_000

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2, 3
_EXIT_CODES = {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}


@dataclass
class ExperimentConfig:
    channel_dim: int = 4
    ranks: tuple = (6, 10)
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    pairing: str = "independent_pairs"
    out_path: str = "-"
    workers: int = 1

    def __post_init__(self):
        self.ranks = tuple(int(r) for r in self.ranks)
        if self.channel_dim < 2:
            raise ValueError("channel_dim must be at least 2")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not self.ranks:
            raise ValueError("at least one rank is required")
        bad = [r for r in self.ranks if not 1 <= r <= self.dim]
        if bad:
            raise ValueError(f"ranks {bad} outside 1..{self.dim}")
        if self.pairing not in PAIRINGS:
            raise ValueError(f"pairing must be one of {PAIRINGS}")

    @property
    def dim(self):
        return self.channel_dim**2


def _draw_pair(cfg, rank, index):
    n = cfg.channel_dim
    if cfg.pairing == "fixed_standard":
        J0 = random_choi(n, rank, spawn_rng(cfg.seed, rank))
        J1 = random_choi(n, rank, spawn_rng(cfg.seed, rank, index))
    else:
        rng = spawn_rng(cfg.seed, rank, index)
        J0 = random_choi(n, rank, rng)
        J1 = random_choi(n, rank, rng)
    return J0.mat, J1.mat


def _pair_row(args):
    cfg, rank, index = args
    J0, J1 = _draw_pair(cfg, rank, index)
    rep = bounds_report(J0, J1)
    lowers = [tb.lower for tb in rep.spectrum]
    uppers = [tb.upper for tb in rep.spectrum]
    return [index, rank, rep.sub, rep.sup, rep.f_root, rep.f_sq, *lowers, *uppers]


def _map(fn, tasks, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(fn, tasks, chunksize=32)
    else:
        yield from map(fn, tasks)


def bounds_header(dim):
    return (["seed_index", "rank", "E", "G", "F_root", "F_sq"]
            + [f"lower_{m}" for m in range(1, dim + 1)]
            + [f"upper_{m}" for m in range(1, dim + 1)])


def bounds_distribution_rows(cfg):
    """Yield one row per sampled pair, ordered by rank then sample index."""
    if cfg.samples >= LARGE_RUN:
        log.warning("%d samples per rank; expect a long run", cfg.samples)
    tasks = ((cfg, r, i) for r in cfg.ranks for i in range(cfg.samples))
    yield from _map(_pair_row, tasks, cfg.workers)


def truncation_error_table(cfg):
    """Mean and standard error of ``F - lower_m`` for each rank and ``m``."""
    rows = []
    for r in cfg.ranks:
        tasks = ((cfg, r, i) for i in range(cfg.samples))
        errors = np.array([
            [row[4] - lower for lower in row[6:6 + cfg.dim]]
            for row in _map(_pair_row, tasks, cfg.workers)
        ])
        mean = errors.mean(axis=0)
        if cfg.samples > 1:
            sem = errors.std(axis=0, ddof=1) / np.sqrt(cfg.samples)
        else:
            sem = np.zeros(cfg.dim)
        rows.extend([r, m + 1, mean[m], sem[m]] for m in range(cfg.dim))
    return rows


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(value)
    return format(float(value), ".17g")


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_csv(path, header, rows):
    with _open_out(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run_bounds_distribution(cfg):
    _write_csv(cfg.out_path, bounds_header(cfg.dim), bounds_distribution_rows(cfg))
    return cfg.out_path


def run_truncation_error(cfg):
    _write_csv(cfg.out_path, ["rank", "m", "mean_error", "std_error"], truncation_error_table(cfg))
    return cfg.out_path


def run_certify(standard_path, candidate_path, method="ssfb", *, m=None, shots=None,
                seed=0, threshold=0.99, exact_diag=False, layers=None, restarts=5,
                max_iters=2000, tol=1e-8):
    """Certify one device file against another; returns the report."""
    phi0 = as_channel(load_device(standard_path))
    psi = as_channel(load_device(candidate_path))
    if method == "ssfb":
        cfg = ShotConfig(shots or 1, seed, "sampled" if shots else "exact")
        return ssfb_certify(phi0, psi, cfg, threshold)
    if method == "vqfe":
        opt = OptimizerConfig(max_iters, tol, restarts, seed=seed)
        m = m or phi0.dim_in**2
        return vqfe_certify(phi0, psi, m, opt, layers, exact_diag, threshold)
    raise ValueError(f"unknown method {method!r}")


def _default_seed():
    return int(os.environ.get("CHANCERT_SEED", 0))


def _experiment_args(p):
    p.add_argument("--channel-dim", type=int, default=4)
    p.add_argument("--rank", type=int, action="append", dest="ranks")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pairing", choices=PAIRINGS, default="independent_pairs")
    p.add_argument("--out", default="-")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="chancert", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _experiment_args(sub.add_parser("bounds-dist", help="per-pair bound values as CSV"))
    _experiment_args(sub.add_parser("trunc-error", help="mean truncated-fidelity error as CSV"))

    c = sub.add_parser("certify", help="certify a candidate device against a standard")
    c.add_argument("standard")
    c.add_argument("candidate")
    c.add_argument("--method", choices=("ssfb", "vqfe"), default="ssfb")
    c.add_argument("--m", type=int, default=None)
    c.add_argument("--shots", type=int, default=None,
                   help="sample measurement outcomes (default: exact expectation values)")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--exact-diag", action="store_true")
    c.add_argument("--threshold", type=float, default=0.99)
    c.add_argument("--layers", type=int, default=None)
    c.add_argument("--restarts", type=int, default=5)
    c.add_argument("--max-iters", type=int, default=2000)
    c.add_argument("--tol", type=float, default=1e-8)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would read as "inconclusive"
        return EXIT_ERROR if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        if args.command == "certify":
            report = run_certify(
                args.standard, args.candidate, args.method, m=args.m, shots=args.shots,
                seed=seed, threshold=args.threshold, exact_diag=args.exact_diag,
                layers=args.layers, restarts=args.restarts, max_iters=args.max_iters,
                tol=args.tol)
            if report.diagnostics and not report.diagnostics.get("converged", True):
                print(f"warning: diagonalization did not converge: {report.diagnostics}",
                      file=sys.stderr)
            print(json.dumps(report.to_dict(), indent=2))
            return _EXIT_CODES[report.verdict]
        cfg = ExperimentConfig(
            channel_dim=args.channel_dim, ranks=args.ranks or (6, 10), samples=args.samples,
            seed=seed, pairing=args.pairing, out_path=args.out, workers=args.workers)
        if args.command == "bounds-dist":
            run_bounds_distribution(cfg)
        else:
            run_truncation_error(cfg)
        return 0
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"chancert: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
