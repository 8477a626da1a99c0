"""Command line entry point.

Exit status: 0 success, 2 invalid input, 3 file errors, 4 numerical failure.
Failures print ``hydrowind: error [<category>]: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as hio
from ._version import __version__
from .config import RunConfig, config_hash, load_config, serialize_config
from .errors import ArtifactError, ConfigurationError, HydrowindError, NumericalSetupError, StepError

EXIT_CODES = {"io": 3, "numerical-setup": 4, "step": 4}

log = logging.getLogger("hydrowind")


def _exit_code(category: str) -> int:
    return EXIT_CODES.get(category, 2)


class _Context:
    def __init__(self, args):
        self.args = args
        self.quiet = args.quiet
        self.out = Path(args.out)
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ArtifactError(f"cannot create output directory {self.out}: {exc}") from exc
        self.cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
        if getattr(args, "seed", None) is not None:
            self.cfg = replace(self.cfg, noise=replace(self.cfg.noise, seed=args.seed))
        if getattr(args, "paths", None) is not None:
            self.cfg = replace(self.cfg, paths=args.paths)

    def say(self, text):
        if not self.quiet:
            print(text)

    def provenance(self, **extra):
        prov = {"command": self.args.command, "version": __version__, "config_hash": config_hash(self.cfg),
                "seed": self.cfg.noise.seed}
        prov.update(extra)
        return prov

    def save_config(self):
        path = self.out / "config.ini"
        try:
            path.write_text(serialize_config(self.cfg), encoding="utf-8")
        except OSError as exc:
            raise ArtifactError(f"cannot write {path}: {exc}") from exc


def cmd_simulate(ctx: _Context) -> int:
    from .integrator import run_path

    ctx.save_config()
    sim = ctx.cfg.to_simulation()
    status = 0
    for pid in range(sim.paths):
        rec = run_path(sim, pid)
        path = ctx.out / f"trajectory_{pid:04d}.csv"
        hio.write_trajectory(path, rec, ctx.provenance(path_key=f"({pid} << 64) | {sim.noise.seed}"))
        for i, ((t, v), (_, p)) in enumerate(zip(rec.snapshots, rec.pressures)):
            hio.write_snapshot(ctx.out / f"v_{pid:04d}_{i:05d}.hwnd", v)
            hio.write_snapshot(ctx.out / f"ps_{pid:04d}_{i:05d}.hwnd", p)
        ctx.say(f"path {pid}: {rec.status} t_end={rec.times[-1]:.6g} H1={rec.series('H1')[-1]:.6e} -> {path}")
        if rec.status != "ok":
            print(f"hydrowind: error [step]: path {pid}: {rec.message}", file=sys.stderr)
            status = _exit_code("step")
    return status


def cmd_ensemble(ctx: _Context) -> int:
    from .integrator import run_ensemble

    ctx.save_config()
    sim = ctx.cfg.to_simulation()
    ens = run_ensemble(sim, noise_only=ctx.args.noise_only)
    prov = ctx.provenance(noise_only=ctx.args.noise_only)
    hio.write_ensemble(ctx.out / "ensemble.csv", ens, prov)
    if ens.ito is not None:
        hio.write_ito(ctx.out / "ito_interior.csv", ens.ito, prov)
        hio.write_ito(ctx.out / "ito_boundary.csv", ens.ito_boundary, prov)
        for name, rep in (("interior", ens.ito), ("boundary", ens.ito_boundary)):
            ctx.say(f"{name}: {rep.fraction_within:.4f} of variance z-scores within 3, "
                    f"{rep.mean_fraction_within:.4f} of mean z-scores within 3")
    ctx.say(f"{ens.paths} paths, {len(ens.failures)} failures -> {ctx.out / 'ensemble.csv'}")
    if ens.failures:
        for pid, status, msg in ens.failures:
            print(f"hydrowind: error [step]: path {pid} {status}: {msg}", file=sys.stderr)
        return _exit_code("step")
    return 0


def cmd_neumann_verify(ctx: _Context) -> int:
    from .oracle import neumann_convergence

    sizes = tuple(int(s) for s in ctx.args.sizes.split(","))
    regimes = ("NN", "DN") if ctx.args.regime == "both" else (ctx.args.regime,)
    rows = []
    for bc in regimes:
        table, orders = neumann_convergence(bc, sizes, h=ctx.args.depth, alpha=ctx.cfg.noise.neumann_alpha)
        for r in table:
            rows.append((bc, r.n, "%d %d %d" % r.mode, r.error, r.nodal_error, orders[r.mode]))
            ctx.say(f"{bc} nz={r.n:3d} mode={r.mode} error={r.error:.3e} order={orders[r.mode]:.3f}")
    hio.write_csv(ctx.out / "neumann_verify.csv",
                  ("regime", "nz", "mode", "rel_error", "nodal_rel_error", "observed_order"), rows,
                  ctx.provenance(sizes=ctx.args.sizes, depth=ctx.args.depth))
    return 0


def cmd_convergence(ctx: _Context) -> int:
    """Temporal refinement of the configured run with the noise switched off."""
    from .diagnostics import sobolev_norm
    from .integrator import run_path
    from .noise import NoiseSpec

    base = ctx.cfg.to_simulation()
    base = replace(base, noise=NoiseSpec(seed=base.noise.seed))
    finals, dts = [], []
    for level in range(ctx.args.levels):
        dt = base.dt / 2**level
        rec = run_path(replace(base, dt=dt, output_every=2**62))
        if rec.status != "ok":
            raise StepError(f"refinement level {level}: {rec.message}")
        finals.append(rec.final_v)
        dts.append(dt)
    ref = finals[-1]
    errs = [sobolev_norm(f - ref, 1) for f in finals[:-1]]
    rows = []
    for i, (dt, f) in enumerate(zip(dts, finals)):
        err = errs[i] if i < len(errs) else float("nan")
        order = np.log2(errs[i - 1] / errs[i]) if 0 < i < len(errs) and errs[i] > 0 else float("nan")
        rows.append((dt, sobolev_norm(f, 1), err, order))
        ctx.say(f"dt={dt:.4e} H1={rows[-1][1]:.6e} err_vs_finest={err:.3e} order={order:.3f}")
    hio.write_csv(ctx.out / "convergence.csv", ("dt", "H1_final", "H1_err_vs_finest", "observed_order"), rows,
                  ctx.provenance(levels=ctx.args.levels))
    return 0


def cmd_norms(ctx: _Context) -> int:
    from .diagnostics import NormRequest, sobolev_norm, weighted_time_norm

    req = NormRequest(s=ctx.args.s, mu=ctx.args.mu, q=ctx.args.q)
    rows = []
    for path in ctx.args.trajectory:
        _, cols = hio.read_trajectory(path)
        for name, values in cols.items():
            if name == "t":
                continue
            val = weighted_time_norm(cols["t"], values, req.mu, req.q)
            rows.append((str(path), name, req.mu, req.q, val))
            ctx.say(f"{path} {name}: ||t^(1-mu) u||_Lq = {val:.12e}")
    for path in ctx.args.snapshot:
        f = hio.read_snapshot(path)
        if not hasattr(f, "basis"):
            raise ConfigurationError(f"{path} holds a surface field; Sobolev norms need a volume field")
        val = sobolev_norm(f, req.s)
        rows.append((str(path), f"H^{req.s:g}", float("nan"), float("nan"), val))
        ctx.say(f"{path} H^{req.s:g} = {val:.12e}")
    hio.write_csv(ctx.out / "norms.csv", ("source", "quantity", "mu", "q", "value"), rows,
                  ctx.provenance(s=req.s, mu=req.mu, q=req.q))
    return 0


def cmd_spectrum(ctx: _Context) -> int:
    from .stokes import build_operator

    handle = build_operator(ctx.cfg.grid)
    g = ctx.cfg.grid
    kx = np.fft.fftfreq(g.nx, 1.0 / g.nx).astype(int)
    ky = np.fft.fftfreq(g.ny, 1.0 / g.ny).astype(int)
    rows = [(kx[ix], ky[iy], branch, j, lam) for ix, iy, branch, j, lam in handle.spectrum_rows()]
    hio.write_csv(ctx.out / "spectrum.csv", ("k_x", "k_y", "branch", "m", "lambda"), rows, ctx.provenance())
    ctx.say(f"{len(rows)} eigenvalues -> {ctx.out / 'spectrum.csv'}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "neumann-verify": cmd_neumann_verify,
    "convergence": cmd_convergence,
    "norms": cmd_norms,
    "spectrum": cmd_spectrum,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--seed", type=int, help="override the noise seed")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--paths", type=int, help="override the number of paths")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")
    p = argparse.ArgumentParser(prog="hydrowind", description="Spectral hydrostatic Stokes/primitive-equation runs.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate the configured paths")
    e = sub.add_parser("ensemble", parents=[common], help="ensemble statistics")
    e.add_argument("--noise-only", action="store_true", help="sample the noise only and compare with predictions")
    n = sub.add_parser("neumann-verify", parents=[common], help="Neumann map versus the finite-difference oracle")
    n.add_argument("--regime", choices=("NN", "DN", "both"), default="both", help="boundary regime(s) to check")
    n.add_argument("--sizes", default="8,16,32", help="comma-separated oracle resolutions")
    n.add_argument("--depth", type=float, default=0.5, help="layer depth h")
    c = sub.add_parser("convergence", parents=[common], help="time-step refinement without noise")
    c.add_argument("--levels", type=int, default=4, help="number of halvings of dt")
    m = sub.add_parser("norms", parents=[common], help="norms of saved trajectories and snapshots")
    m.add_argument("trajectory", nargs="*", type=Path, help="trajectory CSV files")
    m.add_argument("--snapshot", action="append", default=[], type=Path, help="snapshot file (repeatable)")
    m.add_argument("--s", type=float, default=1.0, help="Sobolev index for snapshots")
    m.add_argument("--mu", type=float, default=1.0, help="time weight exponent, t^(1-mu)")
    m.add_argument("--q", type=float, default=2.0, help="time integrability exponent")
    sub.add_parser("spectrum", parents=[common], help="dump the Stokes eigenvalues")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        ctx = _Context(args)
        return COMMANDS[args.command](ctx)
    except HydrowindError as exc:
        print(f"hydrowind: error [{exc.category}]: {exc}", file=sys.stderr)
        return _exit_code(exc.category)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"hydrowind: error [numerical-setup]: {exc}", file=sys.stderr)
        return _exit_code(NumericalSetupError.category)


if __name__ == "__main__":
    sys.exit(main())
