"""``hetphase`` command-line interface.

Every command writes UTF-8 CSV: a ``#`` metadata line holding the full
configuration as JSON, a header line, then rows in grid/index order.
Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import HetphaseError
from .heterodyne import HeterodyneModel, density_closed, density_series, sample
from .phase import GAUSSIAN_GUARD, optimize_signal_split, phase_density_gaussian, phase_distribution

COMMANDS = ("density", "phase-dist", "sample", "sensitivity", "optimize", "verify")
EXIT_USAGE = 1
EXIT_NUMERIC = 2
VERIFY_BUDGET_SECONDS = 60.0
SERIES_TOL = 1e-10


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    lam: float | None = None
    w_re: float = 0.0
    w_im: float = 0.0
    eta: float = 1.0
    nbar: float | None = None
    nbar_min: float = 10.0
    nbar_max: float = 1e4
    nbar_points: int = 16
    grid_points: int = 1024
    count: int | None = None
    seed: int = 1
    precision: int = 12
    workers: int = 1
    out_path: str | None = None

    @property
    def w(self) -> complex:
        return complex(self.w_re, self.w_im)

    def model(self) -> HeterodyneModel:
        return HeterodyneModel.make(self.lam, self.w, self.eta)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        needs_model = self.command in ("density", "phase-dist", "sample")
        if needs_model and self.lam is None:
            raise UsageError(f"{self.command} requires --lambda")
        if self.lam is not None and not (0.0 <= self.lam < 1.0):
            raise UsageError("--lambda must lie in [0, 1)")
        if not (0.0 < self.eta <= 1.0):
            raise UsageError("--eta must lie in (0, 1]")
        if not (math.isfinite(self.w_re) and math.isfinite(self.w_im)):
            raise UsageError("--w-re/--w-im must be finite")
        if self.grid_points < 2:
            raise UsageError("--grid-points must be >= 2")
        if self.precision < 1 or self.precision > 17:
            raise UsageError("--precision must lie in 1..17")
        if not (0 <= self.seed < 2 ** 64):
            raise UsageError("--seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise UsageError("--workers must be >= 1")
        if self.command == "sample" and (self.count is None or self.count < 1):
            raise UsageError("sample requires --count >= 1")
        if self.command == "optimize" and (self.nbar is None or not self.nbar > 0):
            raise UsageError("optimize requires --nbar > 0")
        if self.command == "sensitivity":
            if not (0 < self.nbar_min <= self.nbar_max) or self.nbar_points < 1:
                raise UsageError("invalid --nbar-min/--nbar-max/--nbar-points range")
            if self.nbar_points == 1 and self.nbar_min != self.nbar_max:
                raise UsageError("a single --nbar-points needs --nbar-min == --nbar-max")


class CsvWriter:
    def __init__(self, stream, precision: int):
        self.stream = stream
        self.precision = precision

    def fmt(self, v) -> str:
        if v is None:
            return ""
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return f"{float(v):.{self.precision}g}"

    def meta(self, cfg: RunConfig) -> None:
        d = asdict(cfg)
        d.pop("out_path")
        d.pop("workers")
        self.stream.write("# hetphase " + json.dumps(d, sort_keys=True) + "\n")

    def comment(self, text: str) -> None:
        self.stream.write(f"# {text}\n")

    def header(self, *cols: str) -> None:
        self.stream.write(",".join(cols) + "\n")

    def row(self, *vals) -> None:
        self.stream.write(",".join(self.fmt(v) for v in vals) + "\n")


def run_density(cfg: RunConfig, out: CsvWriter) -> None:
    model = cfg.model()
    d = math.sqrt(model.var)
    m = cfg.grid_points
    offsets = (np.arange(m) - (m - 1) / 2.0) * (8.0 * d / (m - 1))
    re = cfg.w_re + offsets
    im = cfg.w_im + offsets
    z = re[:, None] + 1j * im[None, :]
    closed = density_closed(z, model)
    series = density_series(z, model, tol=SERIES_TOL) if model.eta == 1.0 else None
    out.meta(cfg)
    out.header("re_z", "im_z", "density_closed", "density_series")
    for i in range(m):
        for j in range(m):
            out.row(re[i], im[j], closed[i, j], None if series is None else series[i, j])


def run_phase_dist(cfg: RunConfig, out: CsvWriter) -> None:
    model = cfg.model()
    dist = phase_distribution(model, cfg.grid_points)
    try:
        gauss = phase_density_gaussian(dist.grid, model)
    except HetphaseError:
        gauss = None
    out.meta(cfg)
    out.header("phi", "p_exact", "p_gaussian")
    for k, phi in enumerate(dist.grid):
        out.row(phi, dist.density[k], None if gauss is None else gauss[k])
    out.comment(f"integral={out.fmt(dist.integral)} gaussian_guard={GAUSSIAN_GUARD}")


def run_sample(cfg: RunConfig, out: CsvWriter) -> None:
    batch = sample(cfg.model(), cfg.count, cfg.seed, workers=cfg.workers)
    z = batch.outcomes
    arg = np.angle(z)
    out.meta(cfg)
    out.header("index", "re_z", "im_z", "arg_z")
    for k in range(batch.count):
        out.row(k, z[k].real, z[k].imag, arg[k])


_SENS_COLS = ("nbar", "w_sq_opt", "lambda_opt", "gain", "delta_phi_gauss", "delta_phi_exact", "product")


def _sens_row(out: CsvWriter, r) -> None:
    out.row(r.nbar, r.w_sq_opt, r.lambda_opt, r.gain, r.delta_phi_gauss, r.delta_phi_exact, r.product)


def run_sensitivity(cfg: RunConfig, out: CsvWriter) -> None:
    nbars = np.geomspace(cfg.nbar_min, cfg.nbar_max, cfg.nbar_points)
    results = [optimize_signal_split(float(n), cfg.eta) for n in nbars]
    out.meta(cfg)
    out.header(*_SENS_COLS)
    for r in results:
        _sens_row(out, r)


def run_optimize(cfg: RunConfig, out: CsvWriter) -> None:
    r = optimize_signal_split(cfg.nbar, cfg.eta)
    out.meta(cfg)
    out.header(*_SENS_COLS)
    _sens_row(out, r)


def run_verify(cfg: RunConfig, out: CsvWriter, perturbation: float = 0.0) -> bool:
    from .verify import run_all

    t0 = time.perf_counter()
    results = run_all(perturbation=perturbation)
    elapsed = time.perf_counter() - t0
    for r in results:
        out.stream.write(r.line() + "\n")
    ok = all(r.passed for r in results)
    out.stream.write(f"{'ALL PASS' if ok else 'FAILURES'} in {elapsed:.1f}s\n")
    if elapsed > VERIFY_BUDGET_SECONDS:
        print(f"warning: verification took {elapsed:.1f}s (budget {VERIFY_BUDGET_SECONDS:.0f}s)",
              file=sys.stderr)
    return ok


_RUNNERS = {
    "density": run_density,
    "phase-dist": run_phase_dist,
    "sample": run_sample,
    "sensitivity": run_sensitivity,
    "optimize": run_optimize,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hetphase", description="Two-mode heterodyne phase detection simulator")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--lambda", dest="lam", type=float, help="twin-beam parameter in [0, 1)")
    p.add_argument("--w-re", type=float, default=0.0, help="signal amplitude, real part")
    p.add_argument("--w-im", type=float, default=0.0, help="signal amplitude, imaginary part")
    p.add_argument("--eta", type=float, default=1.0, help="detector quantum efficiency")
    p.add_argument("--nbar", type=float, help="mean photon budget (optimize)")
    p.add_argument("--nbar-min", type=float, default=10.0)
    p.add_argument("--nbar-max", type=float, default=1e4)
    p.add_argument("--nbar-points", type=int, default=16, help="log-spaced sweep points")
    p.add_argument("--grid-points", type=int, default=1024,
                   help="phase grid size; points per side for density")
    p.add_argument("--count", type=int, help="number of Monte Carlo samples")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--precision", type=int, default=12, help="significant digits")
    p.add_argument("--workers", type=int, default=1, help="sampling threads (output unchanged)")
    p.add_argument("--out", dest="out_path", help="output file (default stdout)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--perturb-variance", type=float, default=0.0, help=argparse.SUPPRESS)
    return p


@contextlib.contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help/--version exit 0; argparse errors exit with EXIT_USAGE
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    perturb = args.perturb_variance
    fields = vars(args)
    fields.pop("perturb_variance")
    cfg = RunConfig(**fields)
    try:
        cfg.validate()
    except UsageError as e:
        print(f"hetphase: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    # render fully before touching the output so failures never leave partial CSV
    buf = io.StringIO()
    out = CsvWriter(buf, cfg.precision)
    try:
        if cfg.command == "verify":
            ok = run_verify(cfg, out, perturbation=perturb)
        else:
            _RUNNERS[cfg.command](cfg, out)
            ok = True
    except ArithmeticError as e:
        print(f"hetphase: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"hetphase: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        with _open_out(cfg.out_path) as fh:
            fh.write(buf.getvalue())
    except OSError as e:
        print(f"hetphase: cannot write output: {e}", file=sys.stderr)
        return EXIT_USAGE
    return 0 if ok else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
