"""Command line entry point.

    chemowave verify-wave  [--scenario FILE] [--out DIR]
    chemowave simulate     [--scenario FILE] [--out DIR] [--diag-every N] [--force-inadmissible]
    chemowave convergence  [--scenario FILE] [--out DIR] [--levels N] [--dx0 DX]
    chemowave sweep        [--scenario FILE] [--out DIR] --axis NAME --values V1,V2,... [--jobs N]

Time series go to CSV, scalar summaries to JSON.  The exit status is 0 only
when every gate of the subcommand passed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from chemowave.diagnostics import perturbation, write_csv
from chemowave.cole_hopf import reconstruct_c
from chemowave.ibvp_solver import make_grid, run
from chemowave.scenarios import Scenario, around_budget, load_scenario, make_scenario, smallness_report
from chemowave.verify import exact_wave_ladder, wave_property_suite

logger = logging.getLogger("chemowave")

SWEEP_AXES = ("beta", "delta", "k", "amp_phi", "amp_psi")
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INADMISSIBLE = 3


def _scenario(args) -> Scenario:
    return load_scenario(args.scenario) if args.scenario else make_scenario()


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n")


def cmd_verify_wave(args) -> int:
    sc = _scenario(args)
    checks = wave_property_suite(sc.mp, sc.wp, seed=args.seed)
    passed = all(c.passed for c in checks)
    _write_json(args.out / "verify_wave.json", {
        "passed": passed,
        "wave": {"s": sc.wp.s, "u_minus": sc.wp.u_minus, "v_minus": sc.wp.v_minus,
                 "eta_minus": sc.wp.eta_minus},
        "checks": [c.as_dict() for c in checks],
    })
    for c in checks:
        logger.info("%-20s %s  value=%.3g limit=%.3g", c.name, "PASS" if c.passed else "FAIL",
                    c.value, c.limit)
    return 0 if passed else EXIT_FAIL


def _final_state(res, sc: Scenario) -> np.ndarray:
    st = res.state
    p = perturbation(st.u, st.v, st.t, res.wave)
    c = st.c if st.c is not None else reconstruct_c(p.psi, res.wave.C(st.t), sc.mp.mu)
    return np.column_stack([res.wave.x, st.u, st.v, c])


def simulate(sc: Scenario, out: Path, diag_every: int | None = None, force: bool = False) -> dict:
    x = sc.grid.coordinates()
    report = smallness_report(sc.pert, sc.eta, sc.wp, sc.mp, x, sc.eps0)
    summary = {"smallness": report.as_dict(), "around_budget": around_budget(sc.eta)}
    if not report.admissible and not force:
        summary["gates"] = {"admissible": False}
        return summary
    grid = make_grid(sc)
    res = run(sc, grid, diag_every=diag_every)
    write_csv(res.records, out / "diagnostics.csv")
    np.savetxt(out / "final_state.csv", _final_state(res, sc), delimiter=",",
               header="x,u,v,c", comments="", fmt="%.17g")
    first, last = res.records[0], res.records[-1]
    summary.update(
        alpha=res.alpha,
        dt=grid.dt,
        nx=grid.nx,
        t_final=last.t,
        sup_u_err_initial=first.sup_u_err,
        sup_u_err_final=last.sup_u_err,
        sup_v_err_final=last.sup_v_err,
        sup_c_err_final=last.sup_c_err,
        negative_undershoots=res.negative_undershoots,
        error=res.error,
        gates={
            "admissible": report.admissible or force,
            "completed": res.error is None,
            "finite": all(r.is_finite() for r in res.records),
        },
    )
    return summary


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    summary = simulate(sc, args.out, args.diag_every, args.force_inadmissible)
    _write_json(args.out / "summary.json", summary)
    gates = summary["gates"]
    if not gates["admissible"]:
        logger.error("scenario violates the smallness hypotheses (eps0=%g); rerun with "
                     "--force-inadmissible to explore it", sc.eps0)
        return EXIT_INADMISSIBLE
    logger.info("alpha=%.6g  sup_u_err %.3e -> %.3e", summary["alpha"],
                summary["sup_u_err_initial"], summary["sup_u_err_final"])
    return 0 if all(gates.values()) else EXIT_FAIL


def cmd_convergence(args) -> int:
    sc = _scenario(args)
    if args.dx_list:
        dxs = [float(v) for v in args.dx_list.split(",") if v.strip()]
    else:
        if args.levels < 3:
            raise ValueError("at least 3 levels are needed")
        dxs = [args.dx0 / 2**k for k in range(args.levels)]
    ladder = exact_wave_ladder(sc, dxs)
    rep = ladder.report
    passed = 1.7 <= rep.order <= 2.3 and rep.quality != "non-monotone"
    payload = ladder.as_dict()
    payload["passed"] = passed
    _write_json(args.out / "convergence.json", payload)
    logger.info("observed order %.3f (%s)", rep.order, rep.quality)
    return 0 if passed else EXIT_FAIL


def sweep_row(sc: Scenario, axis: str, value: float) -> dict:
    """One independent run of a sweep; failures are reported in the row."""
    row = {"axis": axis, "value": value}
    try:
        sub = sc.with_value(axis, value)
        res = run(sub, make_grid(sub))
        delta = around_budget(sub.eta)
        first, last = res.records[0], res.records[-1]
        denom = first.E + math.exp(-sub.wp.s * sub.beta / sub.mp.D) + delta
        row.update(
            alpha=res.alpha,
            around_budget=delta,
            sup_u_err_initial=first.sup_u_err,
            sup_u_err_final=last.sup_u_err,
            sup_v_err_final=last.sup_v_err,
            sup_c_err_final=last.sup_c_err,
            energy_ratio=max(r.E + r.D_int for r in res.records) / denom,
            error=res.error or "",
        )
    except Exception as exc:  # recorded per row; the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


SWEEP_COLUMNS = ("axis", "value", "alpha", "around_budget", "sup_u_err_initial", "sup_u_err_final",
                 "sup_v_err_final", "sup_c_err_final", "energy_ratio", "error")


def run_sweep(sc: Scenario, axis: str, values, jobs: int = 1) -> list[dict]:
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    values = sorted(float(v) for v in values)
    if not values:
        raise ValueError("empty value list")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, [sc] * len(values), [axis] * len(values), values))
    else:
        rows = [sweep_row(sc, axis, v) for v in values]
    return rows


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    values = [v for v in (args.values or "").split(",") if v.strip()]
    rows = run_sweep(sc, args.axis, values, args.jobs)
    with open(args.out / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, restval="")
        writer.writeheader()
        writer.writerows(rows)
    failed = [r for r in rows if r.get("error")]
    for r in failed:
        logger.error("%s=%g failed: %s", r["axis"], r["value"], r["error"])
    return EXIT_FAIL if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemowave", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", type=Path, help="scenario file (defaults to the built-in desk config)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        return p

    p = common(sub.add_parser("verify-wave", help="closed-form wave property suite"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_wave)

    p = common(sub.add_parser("simulate", help="run one scenario"))
    p.add_argument("--diag-every", type=int, default=None, help="steps between diagnostic records")
    p.add_argument("--force-inadmissible", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("convergence", help="exact-wave refinement ladder"))
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--dx0", type=float, default=0.2)
    p.add_argument("--dx-list", default=None, help="explicit comma-separated dx values")
    p.set_defaults(func=cmd_convergence)

    p = common(sub.add_parser("sweep", help="independent runs over one parameter"))
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
