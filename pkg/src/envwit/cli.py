"""Command-line entry point.

Exit codes: 0 no detection / success, 2 entanglement certified, 1 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import experiments as ex
from .errors import EnvwitError
from .matcore import DEFAULT_TOL, BipartiteDims, Tolerance, partial_transpose
from .measure import measurement_plan
from .pncp import generalized_choi, theta_params, validate_pncp
from .states import BellDiagonalCoords, read_density_json
from .witness import delta_lambda, delta_t, family_delta, minor_hierarchy

EXIT_OK, EXIT_INPUT, EXIT_CERTIFIED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _grid(s: str) -> list[float]:
    try:
        return ex.parse_grid(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _tol(args) -> Tolerance:
    return Tolerance(args.eig_tol, args.det_tol)


def _delta_record(delta, tol: Tolerance) -> dict:
    v = minor_hierarchy(delta, tol)
    return {
        "provenance": delta.provenance,
        "entries": delta.entries.tolist(),
        "det": delta.det,
        "min_eigenvalue": v.min_eigenvalue,
        "psd": v.psd,
        "violating_minors": [{"indices": list(s), "value": val} for s, val in v.violating_minors],
        "detected": v.detected,
    }


def certify_report(rho, thetas: Sequence[float] = (), tol: Tolerance = DEFAULT_TOL) -> dict:
    dims = rho.dims
    pt_min = float(np.linalg.eigvalsh(partial_transpose(rho.mat, dims))[0])
    report: dict = {
        "dims": [dims.d_a, dims.d_b],
        "ppt": {"min_pt_eigenvalue": pt_min, "ppt": pt_min >= -tol.eig_tol},
        "families": {},
        "choi": [],
        "measurement_plans": {},
    }
    if dims == BipartiteDims(2, 2):
        for fam in range(1, 7):
            rec = _delta_record(family_delta(rho, fam), tol)
            report["families"][f"family{fam}"] = rec
            if rec["detected"]:
                report["measurement_plans"][f"family{fam}"] = measurement_plan(fam).to_dict()
    else:
        report["families"]["computational"] = _delta_record(delta_t(rho), tol)
    if thetas:
        if dims != BipartiteDims(3, 3):
            raise EnvwitError("Choi-map Delta needs a two-qutrit state")
        for t in thetas:
            p = theta_params(t)
            rep = validate_pncp(p, tol)
            rec = _delta_record(delta_lambda(rho, generalized_choi(p)), tol)
            rec.update({"theta": t, "a": p.a, "b": p.b, "c": p.c, "indecomposable": rep.indecomposable})
            report["choi"].append(rec)
    detected = [n for n, r in report["families"].items() if r["detected"]]
    detected += [f"choi(theta={r['theta']:g})" for r in report["choi"] if r["detected"]]
    report["detected_by"] = detected
    report["certified"] = bool(detected) or not report["ppt"]["ppt"]
    return report


def _emit(rows, args, command: str, config: dict) -> None:
    text = ex.format_csv(rows)
    if args.output == "-":
        sys.stdout.write(text)
        return
    path = args.output or f"{command}.csv"
    with open(path, "w") as fh:
        fh.write(text)
    ex.write_sidecar(path, command, config)
    print(f"wrote {len(rows)} rows to {path}", file=sys.stderr)


def _sweep_config(args, **extra) -> ex.SweepConfig:
    return ex.SweepConfig(
        seed=args.seed,
        trials=args.trials,
        workers=args.workers,
        chunk_size=args.chunk_size,
        tol=_tol(args),
        **extra,
    )


def _cmd_certify(args) -> int:
    rho = read_density_json(args.input)
    report = certify_report(rho, args.theta or (), _tol(args))
    text = json.dumps(report, indent=2)
    if args.output and args.output != "-":
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_CERTIFIED if report["certified"] else EXIT_OK


def _cmd_scan_bell(args) -> int:
    rows = ex.bell_mixture_scan(args.grid)
    _emit(rows, args, "scan-bell", {"grid": args.grid})
    return EXIT_OK


def _cmd_scan_amplitude(args) -> int:
    rows = ex.amplitude_scan(args.grid)
    _emit(rows, args, "scan-amplitude", {"grid": args.grid})
    return EXIT_OK


def _cmd_sweep_a(args) -> int:
    cfg = _sweep_config(args, grid=args.grid)
    _emit(ex.fig3_sweep(cfg), args, "sweep-a", cfg.record())
    return EXIT_OK


def _cmd_table1(args) -> int:
    rows = []
    ensembles = ["hs", "bures"] if args.ensemble == "both" else [args.ensemble]
    for ens in ensembles:
        cfg = _sweep_config(args, ensemble=ens)
        rows += ex.table1_qutrit(cfg)
    rec = cfg.record()
    rec["ensemble"] = args.ensemble
    _emit(rows, args, "table1", rec)
    return EXIT_OK


def _cmd_sweep_theta(args) -> int:
    cfg = _sweep_config(args, grid=args.grid, epsilon=args.epsilon)
    _emit(ex.fig4_theta_sweep(cfg), args, "sweep-theta", cfg.record())
    return EXIT_OK


def _cmd_tetrahedron(args) -> int:
    report = ex.bell_tetrahedron_report(BellDiagonalCoords(tuple(args.p)), _tol(args))
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from . import selftest

    return EXIT_OK if selftest.run(sys.stdout) else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="envwit", description="Nonlinear entanglement witnesses from envelopes of linear families.")
    tol = _Parser(add_help=False)
    tol.add_argument("--eig-tol", type=float, default=DEFAULT_TOL.eig_tol)
    tol.add_argument("--det-tol", type=float, default=DEFAULT_TOL.det_tol)
    out = _Parser(add_help=False)
    out.add_argument("-o", "--output", help="output path; '-' for stdout (no sidecar)")
    mc = _Parser(add_help=False)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--trials", type=_positive_int, default=100_000)
    mc.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    mc.add_argument("--chunk-size", type=_positive_int, default=20_000)

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", parents=[tol, out], help="run all witnesses on a density-matrix JSON file")
    p.add_argument("input")
    p.add_argument("--theta", type=float, action="append", help="Choi-map angle (repeatable, two qutrits)")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("scan-bell", parents=[out], help="psi+/psi- mixture scan")
    p.add_argument("--grid", type=_grid, default=ex.parse_grid("0:1:11"))
    p.set_defaults(func=_cmd_scan_bell)

    p = sub.add_parser("scan-amplitude", parents=[out], help="amplitude-damped phi+ scan")
    p.add_argument("--grid", type=_grid, default=ex.parse_grid("0:1:21"))
    p.set_defaults(func=_cmd_scan_amplitude)

    p = sub.add_parser("sweep-a", parents=[tol, out, mc], help="W1(a) vs F1 on random two-qubit NPT states")
    p.add_argument("--grid", type=_grid, default=ex.parse_grid("0.05:0.95:19"))
    p.set_defaults(func=_cmd_sweep_a)

    p = sub.add_parser("table1", parents=[tol, out, mc], help="two-qutrit detection percentages")
    p.add_argument("--ensemble", choices=["hs", "bures", "both"], default="both")
    p.set_defaults(func=_cmd_table1, trials=1_000_000)

    p = sub.add_parser("sweep-theta", parents=[tol, out, mc], help="generalized Choi maps on pseudo-pure qutrit states")
    p.add_argument("--grid", type=_grid, default=ex.parse_grid(f"0:{2 * np.pi!r}:25"))
    p.add_argument("--epsilon", type=float, default=0.03)
    p.set_defaults(func=_cmd_sweep_theta)

    p = sub.add_parser("tetrahedron", parents=[tol], help="Bell-diagonal diagnostics for weights p0..p3")
    p.add_argument("p", type=float, nargs=4)
    p.set_defaults(func=_cmd_tetrahedron)

    p = sub.add_parser("selftest", help="run the bundled invariant checks")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EnvwitError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"envwit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
