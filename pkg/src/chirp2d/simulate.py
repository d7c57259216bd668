"""Monte Carlo harness: repeated synthesize, corrupt and fit cycles.

Replicate ``r`` draws its noise from seed ``base_seed + r``; fits inside a
replicate never consume random numbers, so a report depends only on the
configuration and never on worker count or scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .asymptotics import avar, noise_c
from .estimate import FitResult, GridConfig, OptConfig, grid_init, sequential_fit
from .model import PARAM_NAMES, ChirpModel, NoiseSpec, generate_noise, synthesize
from .objective import SingularGramError

__all__ = ["McConfig", "CellStats", "McReport", "AllReplicatesFailed", "summarize", "run_mc", "run_replicate"]

SCHEMA_VERSION = 1


class AllReplicatesFailed(RuntimeError):
    """Every replicate failed for some method and component."""


@dataclass(frozen=True)
class McConfig:
    model: ChirpModel
    noise: NoiseSpec
    M: int
    N: int
    replicates: int = 200
    methods: tuple[str, ...] = ("alse", "lse")
    sequential: bool = True
    base_seed: int = 0
    gridcfg: GridConfig = field(default_factory=GridConfig)
    optcfg: OptConfig = field(default_factory=OptConfig)
    init: Literal["grid", "truth"] = "grid"
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        methods = tuple(self.methods)
        if not methods or any(m not in ("alse", "lse") for m in methods) or len(set(methods)) != len(methods):
            raise ValueError(f"methods must be a non-empty subset of ('alse', 'lse'), got {self.methods!r}")
        object.__setattr__(self, "methods", methods)
        if not self.sequential and self.model.p > 1:
            raise ValueError("multi-component models are fitted sequentially; set sequential=True")
        if self.init not in ("grid", "truth"):
            raise ValueError(f"init must be 'grid' or 'truth', got {self.init!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def echo(self) -> dict:
        return {
            "model": [c.to_dict() for c in self.model],
            "noise": {
                "sigma": self.noise.sigma,
                "kernel": [[j, k, a] for (j, k), a in sorted(self.noise.kernel.items())],
            },
            "M": self.M,
            "N": self.N,
            "replicates": self.replicates,
            "methods": list(self.methods),
            "sequential": self.sequential,
            "base_seed": self.base_seed,
            "init": self.init,
            "grid": {
                "strategy": self.gridcfg.strategy,
                "strides": list(self.gridcfg.strides) if self.gridcfg.strides else None,
                "levels": self.gridcfg.levels,
                "window": self.gridcfg.window,
            },
            "opt": {
                "max_iters": self.optcfg.max_iters,
                "xtol": self.optcfg.xtol,
                "ftol": self.optcfg.ftol,
                "restarts": self.optcfg.restarts,
            },
        }


@dataclass(frozen=True)
class CellStats:
    """Aggregates for one method and component, in ``(A, B, alpha, beta, gamma, delta)`` order."""

    truth: np.ndarray
    avg: np.ndarray
    bias: np.ndarray
    mse: np.ndarray
    avar: np.ndarray
    n_used: int
    failures: int

    def to_dict(self) -> dict:
        out = {"n_used": self.n_used, "failures": self.failures}
        for key in ("truth", "avg", "bias", "mse", "avar"):
            out[key] = dict(zip(PARAM_NAMES, (float(v) for v in getattr(self, key))))
        return out


def summarize(estimates: Sequence[Sequence[float]], truth: Sequence[float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-parameter ``(avg, bias, mse)`` of a set of estimates."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise ValueError("no estimates to summarize")
    t = np.asarray(truth, dtype=float)
    if est.ndim != 2 or est.shape[1] != t.shape[0]:
        raise ValueError(f"estimates of shape {est.shape} do not match truth of length {t.shape[0]}")
    avg = est.mean(axis=0)
    return avg, avg - t, np.mean((est - t) ** 2, axis=0)


def run_replicate(cfg: McConfig, r: int) -> dict[str, list[tuple[np.ndarray, bool]]]:
    """Fit every configured method on replicate ``r``.

    Returns, per method, one ``(estimate, converged)`` pair per component.
    A fit that raises is recorded as non-converged with NaN estimates.
    """
    M, N, p = cfg.M, cfg.N, cfg.model.p
    y = synthesize(cfg.model, M, N) + generate_noise(cfg.noise.with_seed(cfg.base_seed + r), M, N)
    if cfg.init == "truth":
        inits: list = [c.nonlinear for c in cfg.model]
    else:
        # the step-1 grid search is shared by all methods
        inits = [grid_init(y, cfg.gridcfg)]
    out = {}
    for method in cfg.methods:
        try:
            fits: list[FitResult] = sequential_fit(y, p, method, cfg.gridcfg, cfg.optcfg, inits=inits)
            out[method] = [(f.component.as_array(), f.converged) for f in fits]
        except (SingularGramError, ValueError, FloatingPointError):
            out[method] = [(np.full(6, np.nan), False)] * p
    return out


def _replicate_task(args):
    cfg, r = args
    return run_replicate(cfg, r)


@dataclass(frozen=True)
class McReport:
    config: McConfig
    cells: dict[tuple[str, int], CellStats]
    wall_time: float

    @property
    def failures(self) -> dict[str, int]:
        return {f"{m}:{k + 1}": c.failures for (m, k), c in self.cells.items()}

    def cell(self, method: str, component: int = 1) -> CellStats:
        """Stats for ``method`` and 1-based ``component``."""
        return self.cells[(method, component - 1)]

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "kind": "mc_report",
            "config": self.config.echo(),
            "cells": [
                {"method": m, "component": k + 1, **c.to_dict()} for (m, k), c in sorted(self.cells.items())
            ],
            "failures": self.failures,
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time
        return out

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """Table layout: rows True/Avg/Bias/MSE/AVar, one column per method, component and parameter."""
        keys = [(m, k) for m in self.config.methods for k in range(self.config.model.p)]
        header = ["sigma", "stat"] + [f"{m}:{name}{k + 1}" for m, k in keys for name in PARAM_NAMES]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        sigma = repr(self.config.noise.sigma)
        for label, attr in (("True", "truth"), ("Avg", "avg"), ("Bias", "bias"), ("MSE", "mse"), ("AVar", "avar")):
            row = [sigma, label]
            for key in keys:
                row += [repr(float(v)) for v in getattr(self.cells[key], attr)]
            w.writerow(row)
        return buf.getvalue()


def run_mc(cfg: McConfig) -> McReport:
    """Run all replicates and aggregate per method and component.

    Non-converged fits are counted as failures and left out of the
    aggregates. Raises :class:`AllReplicatesFailed` when a cell has no
    usable replicate.
    """
    t0 = time.perf_counter()
    tasks = [(cfg, r) for r in range(cfg.replicates)]
    if cfg.workers > 1 and cfg.replicates > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_replicate_task, tasks, chunksize=max(1, cfg.replicates // (4 * cfg.workers))))
    else:
        results = [_replicate_task(t) for t in tasks]

    c = noise_c(cfg.noise) if cfg.noise.kernel else 1.0
    cells = {}
    for method in cfg.methods:
        for k, comp in enumerate(cfg.model):
            pairs = [res[method][k] for res in results]
            ok = [est for est, conv in pairs if conv]
            failures = len(pairs) - len(ok)
            if not ok:
                raise AllReplicatesFailed(f"all {len(pairs)} replicates failed for {method}, component {k + 1}")
            truth = comp.as_array()
            avg, bias, mse = summarize(ok, truth)
            var = avar(comp.A, comp.B, cfg.noise.sigma, c if c > 0 else 1.0, cfg.M, cfg.N, k + 1).per_param
            cells[(method, k)] = CellStats(truth, avg, bias, mse, var, len(ok), failures)
    return McReport(cfg, cells, time.perf_counter() - t0)
