"""Fast invariant checks shipped with the package (``envwit selftest``)."""

from __future__ import annotations

from typing import Callable, TextIO

import numpy as np

from . import kernels
from .ensembles import RngStream, hs_density, random_separable
from .experiments import amplitude_scan, bell_mixture_scan
from .matcore import BipartiteDims
from .measure import delta_from_expectations
from .pncp import ChoiParams, adjoint, generalized_choi, reduction_map, theta_params, transposition_map, validate_pncp, witness_via_choi
from .states import SchmidtWeights, max_entangled
from .witness import (
    choi_closed_form_witness,
    delta_choi,
    delta_lambda,
    delta_t,
    expectation,
    map_family_witness,
    minor_hierarchy,
)

_Q2, _Q3 = BipartiteDims(2, 2), BipartiteDims(3, 3)


def _random_unitary(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _quadratic_identity() -> float:
    rng = RngStream(11).generator()
    worst = 0.0
    for d in (2, 3):
        maps = [transposition_map(d), reduction_map(d)]
        if d == 3:
            maps += [generalized_choi(theta_params(t)) for t in (0.0, np.pi / 2, np.pi)]
        for lam in maps:
            for _ in range(20):
                rho = hs_density(BipartiteDims(d, d), rng)
                p = SchmidtWeights(rng.dirichlet(np.ones(d)))
                e, e2 = _random_unitary(d, rng), _random_unitary(d, rng)
                w = map_family_witness(p, lam, e, e2)
                dl = delta_lambda(rho, lam, e, e2)
                worst = max(worst, abs(expectation(w, rho) - dl.quadratic_form(p)))
    return worst


def _separable_positivity() -> float:
    rng = RngStream(12).generator()
    worst = 0.0
    maps = [reduction_map(3)] + [generalized_choi(theta_params(t)) for t in (0.0, np.pi / 2, np.pi)]
    for _ in range(100):
        rho = random_separable(_Q3, 4, rng)
        worst = min(worst, delta_t(rho).min_eigenvalue)
        for lam in maps:
            worst = min(worst, delta_lambda(rho, lam).min_eigenvalue)
    return worst


def _map_consistency() -> float:
    rng = RngStream(13).generator()
    worst = 0.0
    for _ in range(20):
        rho = hs_density(_Q3, rng)
        worst = max(worst, np.abs(delta_lambda(rho, transposition_map(3)).entries - delta_t(rho).entries).max())
        params = ChoiParams(*rng.uniform(0, 2, 3))
        adj = adjoint(generalized_choi(params))
        worst = max(worst, np.abs(delta_lambda(rho, adj).entries - delta_choi(rho, params).entries).max())
        wc = witness_via_choi(generalized_choi(params), max_entangled(3)).mat
        worst = max(worst, np.abs(wc - choi_closed_form_witness(params).mat).max())
    return worst


def _backend_agreement() -> float:
    nb = kernels.numba_impl()
    if nb is None:
        return 0.0
    rng = RngStream(14).generator()
    rhos = np.stack([hs_density(_Q3, rng).mat for _ in range(50)])
    ref = kernels.numpy_impl
    worst = 0.0
    for name in ("pt_min_eig", "delta_t_batch"):
        worst = max(worst, np.abs(getattr(nb, name)(rhos, 3, 3) - getattr(ref, name)(rhos, 3, 3)).max())
    d = ref.delta_t_batch(rhos, 3, 3)
    worst = max(worst, np.abs(nb.sym_det(d) - ref.sym_det(d)).max())
    return worst


def _measurement() -> float:
    rng = RngStream(15).generator()
    worst = 0.0
    for _ in range(50):
        rho = hs_density(_Q2, rng)
        worst = max(worst, np.abs(delta_from_expectations(rho).entries - delta_t(rho).entries).max())
    return worst


def _analytic_scans() -> float:
    worst = 0.0
    for r in bell_mixture_scan(np.linspace(0, 1, 11)):
        x = r["x"]
        worst = max(worst, abs(r["trW_plus"] - (x - 0.5)), abs(r["trW_minus"] - (0.5 - x)),
                    abs(r["F1"] + (2 * x - 1) ** 2 / 4))
    for r in amplitude_scan(np.linspace(0, 1, 11)):
        worst = max(worst, abs(r["F2"] - (r["gamma"] - 1) / 4))
    return worst


def _boundary_maps() -> float:
    worst = 0.0
    for t in np.linspace(0, 2 * np.pi, 25):
        p = theta_params(t)
        rep = validate_pncp(p)
        if not (rep.valid and rep.optimal):
            return np.inf
        worst = max(worst, abs(p.a + p.b + p.c - 2))
    worst = max(worst, np.abs(generalized_choi(ChoiParams(0, 1, 1)).coeffs - reduction_map(3).coeffs).max())
    return worst


def _separable_not_detected() -> float:
    rng = RngStream(16).generator()
    hits = 0
    for _ in range(100):
        rho = random_separable(_Q2, 3, rng)
        hits += minor_hierarchy(delta_t(rho)).detected
    return float(hits)


CHECKS: list[tuple[str, Callable[[], float], str, float]] = [
    ("quadratic identity", _quadratic_identity, "max", 1e-10),
    ("separable Delta positivity", _separable_positivity, "min", -1e-9),
    ("map consistency", _map_consistency, "max", 1e-12),
    ("backend agreement", _backend_agreement, "max", 1e-10),
    ("measurement reconstruction", _measurement, "max", 1e-10),
    ("analytic scans", _analytic_scans, "max", 1e-12),
    ("theta boundary maps", _boundary_maps, "max", 1e-12),
    ("separable states undetected", _separable_not_detected, "max", 0.0),
]


def run(out: TextIO | None = None) -> bool:
    ok = True
    for name, fn, kind, bound in CHECKS:
        try:
            val = fn()
            passed = val <= bound if kind == "max" else val >= bound
        except Exception as exc:  # report and keep going
            val, passed = float("nan"), False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        if out is not None:
            out.write(f"{'PASS' if passed else 'FAIL'}  {name}: {val:.3e}\n")
    return ok
