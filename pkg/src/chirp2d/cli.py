"""``chirp2d`` command line: synth, fit, avar, mc and demo.

Every command reads an optional JSON config (``--config``) and command-line
flags override its keys. Config keys::

    model       list of {"A", "B", "alpha", "beta", "gamma", "delta"}
    M, N        grid size
    noise       {"sigma": float, "kernel": "iid" | "ma" | "demo" | [[j, k, a], ...]}
    seed        noise seed (synth, demo) or base seed (mc)
    method      "alse" | "lse"         (fit, avar)
    methods     ["alse", "lse"]        (mc)
    p           components to extract  (fit, avar)
    grid        "coarse" | "full"
    replicates  Monte Carlo replicates (mc)
    init        "grid" | "truth"       (mc)
    threads     worker processes       (mc)

``--preset`` loads a named configuration instead: ``table1`` .. ``table16``
reproduce the simulation set-ups (single component for 1-8, two components
for 9-16; iid noise for 1-4 and 9-12, moving-average noise otherwise) and
``demo`` the texture example.

Exit codes: 0 success (non-converged fits included), 1 usage error, 2 I/O
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import avar, noise_c
from .estimate import GridConfig, OptConfig, sequential_fit
from .io import GridFormatError, read_grid_csv, write_grid_csv, write_pgm
from .model import (
    DEMO_KERNEL,
    IID_KERNEL,
    MA_KERNEL,
    ChirpComponent,
    ChirpModel,
    ModelError,
    NoiseSpec,
    generate_noise,
    synthesize,
)
from .objective import SingularGramError
from .simulate import SCHEMA_VERSION, AllReplicatesFailed, McConfig, run_mc

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

KERNELS = {"iid": IID_KERNEL, "ma": MA_KERNEL, "demo": DEMO_KERNEL}

SINGLE = [{"A": 2.0, "B": 3.0, "alpha": 1.5, "beta": 0.5, "gamma": 2.5, "delta": 0.75}]
DOUBLE = [
    {"A": 5.0, "B": 4.0, "alpha": 2.1, "beta": 0.1, "gamma": 1.25, "delta": 0.25},
    {"A": 3.0, "B": 2.0, "alpha": 1.5, "beta": 0.5, "gamma": 1.75, "delta": 0.75},
]


def _presets() -> dict[str, dict]:
    out = {}
    sizes = (25, 50, 75, 100)
    for i, (model, kernel) in enumerate(((SINGLE, "iid"), (SINGLE, "ma"), (DOUBLE, "iid"), (DOUBLE, "ma"))):
        for j, size in enumerate(sizes):
            out[f"table{4 * i + j + 1}"] = {
                "model": model,
                "M": size,
                "N": size,
                "noise": {"sigma": 0.1, "kernel": kernel},
                "p": len(model),
            }
    out["demo"] = {
        "model": [{"A": 6.0, "B": 6.0, "alpha": 2.75, "beta": 0.05, "gamma": 2.5, "delta": 0.075}],
        "M": 100,
        "N": 100,
        "noise": {"sigma": math.sqrt(2.0), "kernel": "demo"},
        "p": 1,
    }
    return out


PRESETS = _presets()


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# config handling


def _load_config(args) -> dict:
    cfg: dict = {}
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(sorted(PRESETS))}")
        cfg.update(json.loads(json.dumps(PRESETS[args.preset])))
    if getattr(args, "config", None):
        try:
            with open(args.config) as f:
                cfg.update(json.load(f))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    for key in ("seed", "method", "p", "grid", "replicates", "init", "M", "N"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "sigma", None) is not None:
        cfg.setdefault("noise", {})["sigma"] = args.sigma
    if getattr(args, "methods", None):
        cfg["methods"] = args.methods
    return cfg


def _model(cfg: dict) -> ChirpModel:
    if "model" not in cfg:
        raise UsageError("no model given (use --preset or a config with a 'model' list)")
    try:
        comps = [ChirpComponent(**{k: float(v) for k, v in c.items()}) for c in cfg["model"]]
        return ChirpModel(comps, unordered=bool(cfg.get("unordered", False)))
    except TypeError as exc:
        raise UsageError(f"bad model entry: {exc}") from None


def _noise(cfg: dict, seed: int = 0) -> NoiseSpec:
    spec = cfg.get("noise", {})
    kernel = spec.get("kernel", "iid")
    if isinstance(kernel, str):
        if kernel not in KERNELS:
            raise UsageError(f"unknown kernel {kernel!r}; choose from {', '.join(KERNELS)} or give [[j, k, a], ...]")
        kernel = KERNELS[kernel]
    else:
        kernel = {(int(j), int(k)): float(a) for j, k, a in kernel}
    return NoiseSpec(float(spec.get("sigma", 0.0)), kernel, seed)


def _size(cfg: dict) -> tuple[int, int]:
    try:
        return int(cfg["M"]), int(cfg["N"])
    except KeyError as exc:
        raise UsageError(f"missing grid size {exc.args[0]}") from None


def _gridcfg(cfg: dict) -> GridConfig:
    grid = cfg.get("grid", "coarse")
    if grid not in ("coarse", "full"):
        raise UsageError(f"grid must be 'coarse' or 'full', got {grid!r}")
    return GridConfig(strategy="full" if grid == "full" else "coarse_to_fine")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return int(args.threads)
    env = os.environ.get("CHIRP2D_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"CHIRP2D_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    model = _model(cfg)
    M, N = _size(cfg)
    noise = _noise(cfg, int(cfg.get("seed", 0)))
    y = synthesize(model, M, N) + generate_noise(noise, M, N)
    out = _outdir(args)
    write_grid_csv(out / "data.csv", y)
    if args.pgm:
        write_pgm(out / "data.pgm", y)
    print(f"M={M} N={N} energy={float(np.sum(y * y)):.6g} -> {out / 'data.csv'}")
    return EXIT_OK


def _fit(y, cfg: dict):
    method = cfg.get("method", "lse")
    if method not in ("alse", "lse"):
        raise UsageError(f"method must be 'alse' or 'lse', got {method!r}")
    p = int(cfg.get("p", 1))
    if p < 1:
        raise UsageError(f"p must be >= 1, got {p}")
    t0 = time.perf_counter()
    fits = sequential_fit(y, p, method, _gridcfg(cfg), OptConfig())
    return method, p, fits, time.perf_counter() - t0


def _reconstruct(fits, M: int, N: int) -> np.ndarray:
    return sum(synthesize(f.component, M, N) for f in fits)


def cmd_fit(args) -> int:
    cfg = _load_config(args)
    y = read_grid_csv(args.input)
    M, N = y.shape
    method, p, fits, elapsed = _fit(y, cfg)
    out = _outdir(args)
    fitted = _reconstruct(fits, M, N)
    residual = y - fitted
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit_report",
        "input": str(args.input),
        "M": M,
        "N": N,
        "method": method,
        "p": p,
        "grid": cfg.get("grid", "coarse"),
        "fits": [f.to_dict() for f in fits],
        "residual_energy": float(np.sum(residual * residual)),
        "input_energy": float(np.sum(y * y)),
        "wall_time_s": elapsed,
    }
    _write_json(out / "fit.json", report)
    if args.residual:
        write_grid_csv(out / "residual.csv", residual)
    if args.pgm:
        write_pgm(out / "fitted.pgm", fitted)
    for k, f in enumerate(fits, 1):
        c = f.component
        flag = "" if f.converged else " (not converged)"
        print(
            f"{method} component {k}: A={c.A:.6f} B={c.B:.6f} alpha={c.alpha:.6f} "
            f"beta={c.beta:.6f} gamma={c.gamma:.6f} delta={c.delta:.6f}{flag}"
        )
    return EXIT_OK


def cmd_avar(args) -> int:
    cfg = _load_config(args)
    noise = _noise(cfg)
    c = noise_c(noise) if noise.kernel else 1.0
    if args.input:
        # plug-in report at fitted amplitudes with sigma^2 = Q / (MN)
        y = read_grid_csv(args.input)
        M, N = y.shape
        method, p, fits, _ = _fit(y, cfg)
        resid = y - _reconstruct(fits, M, N)
        sigma = math.sqrt(float(np.sum(resid * resid)) / (M * N) / c)
        amps = [(f.component.A, f.component.B) for f in fits]
        source = "fitted"
    else:
        model = _model(cfg)
        M, N = _size(cfg)
        sigma = noise.sigma
        amps = [(comp.A, comp.B) for comp in model]
        source = "true"
    reports = [avar(A, B, sigma, c, M, N, k + 1) for k, (A, B) in enumerate(amps)]
    out = _outdir(args)
    _write_json(
        out / "avar.json",
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "avar_report",
            "amplitudes": source,
            "components": [r.to_dict() for r in reports],
        },
    )
    lines = ["component,parameter,avar"]
    for r in reports:
        for name, v in r.to_dict()["per_param"].items():
            lines.append(f"{r.component_index},{name},{v!r}")
            print(f"component {r.component_index} {name:>5}: {v:.2E}")
    (out / "avar.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = _load_config(args)
    model = _model(cfg)
    M, N = _size(cfg)
    mc = McConfig(
        model=model,
        noise=_noise(cfg),
        M=M,
        N=N,
        replicates=int(cfg.get("replicates", 200)),
        methods=tuple(cfg.get("methods", ("alse", "lse"))),
        sequential=True,
        base_seed=int(cfg.get("seed", 0)),
        gridcfg=_gridcfg(cfg),
        init=cfg.get("init", "grid"),
        workers=_threads(args),
    )
    report = run_mc(mc)
    out = _outdir(args)
    (out / "mc.csv").write_text(report.to_csv())
    (out / "mc.json").write_text(report.to_json() + "\n")
    for (method, k), cell in sorted(report.cells.items()):
        print(f"{method} component {k + 1}: used {cell.n_used}, failed {cell.failures}")
        for name, b, m, v in zip(("A", "B", "alpha", "beta", "gamma", "delta"), cell.bias, cell.mse, cell.avar):
            print(f"  {name:>5}  bias {b: .3E}  mse {m:.3E}  avar {v:.3E}")
    return EXIT_OK


def cmd_demo(args) -> int:
    cfg = _load_config(args) if (args.config or args.preset) else {}
    base = json.loads(json.dumps(PRESETS["demo"]))
    base.update(cfg)
    if args.seed is not None:
        base["seed"] = args.seed
    model = _model(base)
    M, N = _size(base)
    noise = _noise(base, int(base.get("seed", 0)))
    truth = synthesize(model, M, N)
    y = truth + generate_noise(noise, M, N)
    out = _outdir(args)
    lo, hi = float(truth.min()), float(truth.max())
    write_pgm(out / "true.pgm", truth, lo, hi)
    write_pgm(out / "noisy.pgm", y)
    write_grid_csv(out / "noisy.csv", y)
    fits = {}
    for method in ("lse", "alse"):
        res = sequential_fit(y, model.p, method, _gridcfg(base), OptConfig())
        write_pgm(out / f"{method}.pgm", _reconstruct(res, M, N), lo, hi)
        fits[method] = [f.to_dict() for f in res]
        c = res[0].component
        print(
            f"{method}: A={c.A:.6f} B={c.B:.6f} alpha={c.alpha:.6f} beta={c.beta:.6f} "
            f"gamma={c.gamma:.6f} delta={c.delta:.6f}"
        )
    _write_json(
        out / "demo.json",
        {
            "schema_version": SCHEMA_VERSION,
            "kind": "demo_report",
            "truth": [comp.to_dict() for comp in model],
            "M": M,
            "N": N,
            "seed": int(base.get("seed", 0)),
            "fits": fits,
        },
    )
    print(f"wrote true.pgm, noisy.pgm, lse.pgm, alse.pgm to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chirp2d", description="Two-dimensional chirp parameter estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_default):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--preset", help="named configuration (table1..table16, demo)")
        p.add_argument("--out", default=out_default, help="output directory (default: %(default)s)")
        p.add_argument("--threads", type=int, help="worker processes (default: $CHIRP2D_THREADS or all cores)")
        return p

    p = common(sub.add_parser("synth", help="synthesize a noisy grid"), "synth_out")
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--pgm", action="store_true", help="also write data.pgm")
    p.set_defaults(func=cmd_synth)

    p = common(sub.add_parser("fit", help="fit p components to a grid CSV"), "fit_out")
    p.add_argument("input", help="grid CSV (first line 'M,N')")
    p.add_argument("--method", choices=("alse", "lse"))
    p.add_argument("--p", type=int)
    p.add_argument("--grid", choices=("full", "coarse"))
    p.add_argument("--residual", action="store_true", help="write residual.csv")
    p.add_argument("--pgm", action="store_true", help="write the reconstructed signal as fitted.pgm")
    p.set_defaults(func=cmd_fit)

    p = common(sub.add_parser("avar", help="asymptotic variances"), "avar_out")
    p.add_argument("--input", help="grid CSV: report at fitted amplitudes with estimated sigma^2")
    p.add_argument("--method", choices=("alse", "lse"))
    p.add_argument("--p", type=int)
    p.add_argument("--grid", choices=("full", "coarse"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.set_defaults(func=cmd_avar)

    p = common(sub.add_parser("mc", help="Monte Carlo table"), "mc_out")
    p.add_argument("--seed", type=int, help="base seed; replicate r uses seed + r")
    p.add_argument("--sigma", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--method", dest="methods", action="append", choices=("alse", "lse"),
                   help="repeat to select several (default: both)")
    p.add_argument("--grid", choices=("full", "coarse"))
    p.add_argument("--init", choices=("grid", "truth"))
    p.set_defaults(func=cmd_mc)

    p = common(sub.add_parser("demo", help="texture demo: synth, fit, reconstruct"), "demo_out")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", choices=("full", "coarse"))
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ModelError) as exc:
        print(f"chirp2d: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GridFormatError as exc:
        print(f"chirp2d: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"chirp2d: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SingularGramError, AllReplicatesFailed, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"chirp2d: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"chirp2d: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
