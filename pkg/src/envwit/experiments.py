"""Analytic scans and seeded Monte-Carlo sweeps.

Sharding: trials are cut into fixed-size chunks and chunk ``c`` draws from
``RngStream(seed, tag * 2**32 + c)``.  Worker count only decides which
process evaluates a chunk, so results are identical for any ``workers``.
Sweeps that target a number of *retained* (e.g. NPT) states concatenate
per-sample outcomes in chunk order and truncate at the target.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import binomtest

from . import kernels
from .ensembles import RngStream, bures_density_batch, hs_density_batch, pseudo_pure_batch
from .matcore import DEFAULT_TOL, BipartiteDims, Tolerance, partial_transpose
from .pncp import generalized_choi, theta_params, witness_via_choi
from .states import BellDiagonalCoords, amplitude_damped, bell, bell_diagonal, density_from_pure, max_entangled
from .witness import _adjoint_in_basis, expectation, family_delta, family_witness

__all__ = [
    "DetectionStats",
    "SweepConfig",
    "bell_mixture_scan",
    "amplitude_scan",
    "fig3_sweep",
    "table1_qutrit",
    "fig4_theta_sweep",
    "bell_tetrahedron_report",
    "write_csv",
    "format_csv",
    "write_sidecar",
    "parse_grid",
]

_TAG_FIG3, _TAG_TABLE1, _TAG_FIG4 = 3, 7, 4
_QUBITS = BipartiteDims(2, 2)
_QUTRITS = BipartiteDims(3, 3)


@dataclass(frozen=True)
class DetectionStats:
    trials: int
    hits: int
    fraction: float
    wilson_low: float
    wilson_high: float

    @classmethod
    def from_counts(cls, hits: int, trials: int) -> "DetectionStats":
        hits, trials = int(hits), int(trials)
        if trials == 0:
            return cls(0, 0, 0.0, 0.0, 1.0)
        ci = binomtest(hits, trials).proportion_ci(confidence_level=0.95, method="wilson")
        return cls(trials, hits, hits / trials, float(ci.low), float(ci.high))

    @property
    def sigma(self) -> float:
        if self.trials == 0:
            return float("inf")
        f = self.fraction
        return float(np.sqrt(max(f * (1 - f), 1e-300) / self.trials))


@dataclass
class SweepConfig:
    seed: int = 0
    trials: int = 100_000
    grid: list[float] = field(default_factory=lambda: [0.5])
    epsilon: float = 0.03
    ensemble: str = "hs"
    workers: int = 1
    chunk_size: int = 20_000
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not len(self.grid):
            raise ValueError("grid must be non-empty")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.ensemble not in ("hs", "bures"):
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        self.grid = [float(g) for g in self.grid]
        self.workers = max(1, int(self.workers))

    def record(self) -> dict:
        d = asdict(self)
        d["tol"] = {"eig_tol": self.tol.eig_tol, "det_tol": self.tol.det_tol}
        d["backend"] = kernels.BACKEND
        return d


def parse_grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive, like linspace) or comma-separated values."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("grid count must be >= 1")
        return np.linspace(start, stop, count).tolist()
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty grid")
    return vals


# ---------------------------------------------------------------- analytic


def bell_mixture_scan(grid: Iterable[float]) -> list[dict]:
    """``rho = x psi+ + (1-x) psi-`` against ``W+-`` and ``F1``."""
    psi_p = density_from_pure(bell("psi+")).mat
    psi_m = density_from_pure(bell("psi-")).mat
    w_plus = partial_transpose(density_from_pure(bell("phi+")).mat, _QUBITS)
    w_minus = partial_transpose(density_from_pure(bell("phi-")).mat, _QUBITS)
    rows = []
    for x in grid:
        x = float(x)
        if not 0 <= x <= 1:
            raise ValueError(f"mixing weight {x} outside [0, 1]")
        rho = x * psi_p + (1 - x) * psi_m
        rows.append({
            "x": x,
            "trW_plus": expectation(w_plus, rho),
            "trW_minus": expectation(w_minus, rho),
            "F1": family_delta(rho, 1).det,
        })
    return rows


def amplitude_scan(grid: Iterable[float]) -> list[dict]:
    rows = []
    for g in grid:
        rho = amplitude_damped(float(g))
        rows.append({
            "gamma": float(g),
            "F2": family_delta(rho, 2).det,
            "min_pt_eigenvalue": float(np.linalg.eigvalsh(partial_transpose(rho.mat, _QUBITS))[0]),
        })
    return rows


_WEDGE = ("psi-", "phi-", "phi+", "psi+")  # lambda_i = <b_i| rho^Gamma |b_i>


def bell_tetrahedron_report(coords: BellDiagonalCoords, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Partial-transpose spectrum, octahedron membership and the
    factorized nonlinear witnesses of a Bell-diagonal state."""
    rho = bell_diagonal(coords, tol)
    pt = partial_transpose(rho.mat, _QUBITS)
    spectrum = np.linalg.eigvalsh(pt)
    lam = []
    tr_w = []
    for kind in _WEDGE:
        v = bell(kind).amplitudes
        lam.append(float(np.real(v.conj() @ pt @ v)))
        w = partial_transpose(np.outer(v, v.conj()), _QUBITS)
        tr_w.append(expectation(w, rho))
    return {
        "p": list(coords.p),
        "xyz": list(coords.xyz),
        "lambda": lam,
        "pt_spectrum": spectrum.tolist(),
        "in_octahedron": bool(min(lam) >= -tol.eig_tol),
        "F1": family_delta(rho, 1).det,
        "F2": family_delta(rho, 2).det,
        "tr_W": tr_w,
    }


# ------------------------------------------------------------- harness


def _call(packed):
    fn, args = packed
    return fn(*args)


def _run(fn: Callable, arglist: Sequence[tuple], workers: int) -> list:
    if workers <= 1 or len(arglist) <= 1:
        return [fn(*a) for a in arglist]
    with ProcessPoolExecutor(max_workers=min(workers, len(arglist))) as ex:
        return list(ex.map(_call, [(fn, a) for a in arglist]))


def _collect_retained(fn: Callable, extra: tuple, cfg: SweepConfig, tag: int, max_chunks: int = 100_000):
    """Run chunks in order until ``cfg.trials`` retained samples exist.

    ``fn(seed, stream_id, n, *extra)`` returns ``(raw_count, per_sample_arrays)``
    where every array's first axis runs over retained samples.
    """
    parts, raw, have, c = [], 0, 0, 0
    while have < cfg.trials:
        if c >= max_chunks:
            raise RuntimeError("retention rate too low to reach the requested trial count")
        batch = list(range(c, min(c + cfg.workers, max_chunks)))
        out = _run(fn, [(cfg.seed, tag * 2**32 + b, cfg.chunk_size) + extra for b in batch], cfg.workers)
        for n_raw, arrays in out:
            if have >= cfg.trials:
                break
            parts.append(arrays)
            raw += n_raw
            have += arrays[0].shape[0]
        c = batch[-1] + 1
    cat = [np.concatenate([p[i] for p in parts])[: cfg.trials] for i in range(len(parts[0]))]
    return raw, cat


def _any_minor_violation(deltas: np.ndarray, tol: Tolerance) -> np.ndarray:
    table, sizes, _ = kernels.subset_table(deltas.shape[-1])
    minors = kernels.minors_batch(np.ascontiguousarray(deltas), table, sizes)
    return (minors < -tol.det_tol).any(axis=1)


# ------------------------------------------------------------- amplitude sweep


def _fig3_chunk(seed, stream_id, n, grid, eig_tol, det_tol):
    tol = Tolerance(eig_tol, det_tol)
    rhos = hs_density_batch(n, _QUBITS, RngStream(seed, stream_id))
    npt = kernels.pt_min_eig(rhos, 2, 2) < -tol.eig_tol
    r = np.ascontiguousarray(rhos[npt])
    deltas = kernels.delta_t_batch(r, 2, 2)
    nonlinear = kernels.sym_det(deltas) < -tol.det_tol
    minor = _any_minor_violation(deltas, tol)
    linear = np.empty((r.shape[0], len(grid)), dtype=bool)
    for g, a in enumerate(grid):
        w = np.ascontiguousarray(family_witness(1, a).mat)
        linear[:, g] = kernels.expectation_batch(w, r) < -tol.det_tol
    return n, (nonlinear, linear, minor)


def fig3_sweep(cfg: SweepConfig) -> list[dict]:
    """Linear ``W1(a)`` vs ``F1`` on Hilbert-Schmidt two-qubit NPT states.

    ``cfg.trials`` counts retained NPT states; the same states are scored
    for every ``a`` in ``cfg.grid``.
    """
    for a in cfg.grid:
        if not 0 <= a <= 1:
            raise ValueError(f"amplitude a={a} outside [0, 1]")
    raw, (nonlinear, linear, minor) = _collect_retained(
        _fig3_chunk, (tuple(cfg.grid), cfg.tol.eig_tol, cfg.tol.det_tol), cfg, _TAG_FIG3
    )
    n = nonlinear.shape[0]
    nl = DetectionStats.from_counts(nonlinear.sum(), n)
    rows = []
    for g, a in enumerate(cfg.grid):
        lin = DetectionStats.from_counts(linear[:, g].sum(), n)
        rows.append({
            "a": a,
            "trials": n,
            "raw_draws": raw,
            "hits_linear": lin.hits,
            "frac_linear": lin.fraction,
            "linear_wilson_low": lin.wilson_low,
            "linear_wilson_high": lin.wilson_high,
            "hits_nonlinear": nl.hits,
            "frac_nonlinear": nl.fraction,
            "nonlinear_wilson_low": nl.wilson_low,
            "nonlinear_wilson_high": nl.wilson_high,
            "dominance_violations": int(np.sum(linear[:, g] & ~minor)),
        })
    return rows


# ------------------------------------------------------------- qutrit ensembles


def _table1_chunk(seed, stream_id, n, ensemble, eig_tol, det_tol):
    tol = Tolerance(eig_tol, det_tol)
    stream = RngStream(seed, stream_id)
    if ensemble == "hs":
        rhos = hs_density_batch(n, _QUTRITS, stream)
    else:
        rhos = bures_density_batch(n, _QUTRITS, stream)
    npt = kernels.pt_min_eig(rhos, 3, 3) < -tol.eig_tol
    r = np.ascontiguousarray(rhos[npt])
    v = max_entangled(3).amplitudes
    w = np.ascontiguousarray(partial_transpose(np.outer(v, v.conj()), _QUTRITS))
    linear = kernels.expectation_batch(w, r) < -tol.det_tol
    deltas = kernels.delta_t_batch(r, 3, 3)
    nonlinear = kernels.sym_det(deltas) < -tol.det_tol
    minor = _any_minor_violation(deltas, tol)
    return n, (linear, nonlinear, minor)


def table1_qutrit(cfg: SweepConfig) -> list[dict]:
    """Detection percentages of ``|phi3+><phi3+|^Gamma`` and ``det Delta_T``
    among ``cfg.trials`` two-qutrit NPT states of ``cfg.ensemble``."""
    raw, (linear, nonlinear, minor) = _collect_retained(
        _table1_chunk, (cfg.ensemble, cfg.tol.eig_tol, cfg.tol.det_tol), cfg, _TAG_TABLE1
    )
    n = linear.shape[0]
    lin = DetectionStats.from_counts(linear.sum(), n)
    nl = DetectionStats.from_counts(nonlinear.sum(), n)
    mi = DetectionStats.from_counts(minor.sum(), n)
    return [{
        "ensemble": cfg.ensemble,
        "trials": n,
        "raw_draws": raw,
        "hits_linear": lin.hits,
        "frac_linear_pct": 100 * lin.fraction,
        "linear_wilson_low_pct": 100 * lin.wilson_low,
        "linear_wilson_high_pct": 100 * lin.wilson_high,
        "hits_nonlinear": nl.hits,
        "frac_nonlinear_pct": 100 * nl.fraction,
        "nonlinear_wilson_low_pct": 100 * nl.wilson_low,
        "nonlinear_wilson_high_pct": 100 * nl.wilson_high,
        "frac_minor_pct": 100 * mi.fraction,
        "dominance_violations": int(np.sum(linear & ~minor)),
    }]


# ------------------------------------------------------------- theta sweep


def _fig4_chunk(seed, stream_id, n, grid, epsilon, eig_tol, det_tol):
    tol = Tolerance(eig_tol, det_tol)
    rhos, _ = pseudo_pure_batch(n, RngStream(seed, stream_id))
    rhos = np.ascontiguousarray(rhos)
    phi = max_entangled(3)
    counts = np.zeros((len(grid), 6), dtype=np.int64)
    for g, theta in enumerate(grid):
        lam = generalized_choi(theta_params(theta))
        w = np.ascontiguousarray(witness_via_choi(lam, phi).mat)
        adj = np.ascontiguousarray(_adjoint_in_basis(lam, np.eye(3, dtype=complex)))
        tr = kernels.expectation_batch(w, rhos)
        deltas = kernels.delta_lambda_batch(rhos, adj, 3, 3)
        deltas = 0.5 * (deltas + np.swapaxes(deltas, 1, 2))
        lin = tr < -tol.det_tol
        nl = kernels.sym_det(deltas) < -tol.det_tol
        minor = _any_minor_violation(deltas, tol)
        keep = tr < epsilon
        counts[g] = (
            keep.sum(),
            (lin & keep).sum(),
            (nl & keep).sum(),
            lin.sum(),
            nl.sum(),
            (lin & ~minor).sum(),
        )
    return counts


def fig4_theta_sweep(cfg: SweepConfig) -> list[dict]:
    """Linear ``W[theta]`` vs ``det Delta`` of the same map on pseudo-pure
    two-qutrit states.

    States with ``tr(W rho) >= epsilon`` are filtered out; fractions are
    reported over the retained set and, unfiltered, over all draws.
    """
    n_chunks = -(-cfg.trials // cfg.chunk_size)
    sizes = [min(cfg.chunk_size, cfg.trials - c * cfg.chunk_size) for c in range(n_chunks)]
    args = [
        (cfg.seed, _TAG_FIG4 * 2**32 + c, sizes[c], tuple(cfg.grid), cfg.epsilon, cfg.tol.eig_tol, cfg.tol.det_tol)
        for c in range(n_chunks)
    ]
    counts = sum(_run(_fig4_chunk, args, cfg.workers))
    rows = []
    for g, theta in enumerate(cfg.grid):
        kept, lin_k, nl_k, lin_all, nl_all, dom = (int(v) for v in counts[g])
        p = theta_params(theta)
        lin = DetectionStats.from_counts(lin_k, kept)
        nl = DetectionStats.from_counts(nl_k, kept)
        rows.append({
            "theta": theta,
            "a": p.a,
            "b": p.b,
            "c": p.c,
            "trials": cfg.trials,
            "retained": kept,
            "frac_linear": lin.fraction,
            "linear_wilson_low": lin.wilson_low,
            "linear_wilson_high": lin.wilson_high,
            "frac_nonlinear": nl.fraction,
            "nonlinear_wilson_low": nl.wilson_low,
            "nonlinear_wilson_high": nl.wilson_high,
            "frac_linear_all": lin_all / cfg.trials,
            "frac_nonlinear_all": nl_all / cfg.trials,
            "dominance_violations": dom,
        })
    return rows


# ------------------------------------------------------------- output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def format_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0].keys())
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def write_csv(rows: Sequence[dict], path: str | Path) -> None:
    Path(path).write_text(format_csv(rows))


def write_sidecar(path: str | Path, command: str, config: dict) -> Path:
    side = Path(f"{path}.config.json")
    record = {
        "command": command,
        "config": config,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "pid": os.getpid(),
    }
    side.write_text(json.dumps(record, indent=2, default=str))
    return side
