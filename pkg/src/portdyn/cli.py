"""Command-line front end: validation, analysis, co-design, sweep.

Four subcommands drive the pipeline and write plain CSV/text artifacts
(plot-tool agnostic, no binary formats):

* ``validate-cube``: cube cell clamped at one corner, port-assembled
  modal data against the monolithic FE oracle plus the reference
  frequency table; writes ``modes.csv`` and ``freqresp.csv``.
* ``analyze``: builds the open-loop spacecraft plant at the configured
  section size and uncertainty point, runs the two-stage reduction and
  writes ``reduction.csv``, ``orders.txt``, ``mass.txt``.
* ``codesign``: nested swarm/compass optimization; writes
  ``pso_log.csv``, ``best.csv`` and the reusable ``design.csv``.
* ``worstcase``: dense joint-angle sweep of a saved design; writes
  ``sweep.csv``.

Exit codes: 0 success, 1 usage or configuration error, 2 tolerance
failure, 3 numerical failure.  Every float is emitted with 9
significant digits; the first line of each CSV is a versioned comment
(``# portdyn <name> v1``).  All commands honor ``--threads`` with
bit-identical numerical output for any thread count.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from portdyn.codesign import pso_codesign, worst_case_sweep
from portdyn.config import (
    ConfigError,
    codesign_config,
    load_config,
    spacecraft_config,
    uncertain_sample,
)
from portdyn.mechanisms import (
    CubeSpec,
    cube,
    cube_graph,
    monolithic_fem_oracle,
    oracle_base_frf,
    port_modal_data,
)
from portdyn.spacecraft import assemble_open_loop, reduce_open_loop
from portdyn.ss import invert_channels
from portdyn.truss import truss_beam_spec, truss_mass

__all__ = ["main"]

CSV_VERSION = "v1"

# reference clamped-corner frequencies (rad/s), external FE solution
REFERENCE_CUBE_FREQS = (
    16.77, 17.51, 34.37, 43.66, 70.36, 97.26, 112.83, 117.91,
)
_FREQ_TOL = 0.03
_PART_TOL = 0.10


class ToleranceFailure(Exception):
    """A validation check exceeded its tolerance."""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def _write_csv(path: Path, name: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# portdyn {name} {CSV_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _diag_response(model, rows, cols):
    """Closure evaluating C(jwI-A)^-1 B + D via one diagonalization."""
    lam, V = np.linalg.eig(model.A)
    Bv = np.linalg.solve(V, model.B[:, cols])
    Cv = model.C[rows] @ V
    D = model.D[np.ix_(np.arange(model.C.shape[0])[rows], np.arange(model.B.shape[1])[cols])]

    def g(w):
        return (Cv / (1j * w - lam)) @ Bv + D

    return g


# ---------------------------------------------------------------------------
# validate-cube
# ---------------------------------------------------------------------------


def cmd_validate_cube(args) -> int:
    cfg = load_config(args.config)
    n_elem = args.n_elem if args.n_elem else cfg["beam"]["n_elem"]
    h = cfg["cube"]["h"]
    side = cfg["cube"]["side"]
    spec = truss_beam_spec(h, n_elem=n_elem)
    cs = CubeSpec(side, side, side, spec)

    model = cube(cs)
    clamped_n1 = invert_channels(model, range(6, 24))
    omega_p, part_p = port_modal_data(clamped_n1, n_modes=8)
    oracle = monolithic_fem_oracle(cube_graph(cs, clamped=("N1",)))
    omega_o = oracle.omega[:8]
    part_o = oracle.participation[:8]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dofs = ("T1", "T2", "T3", "R1", "R2", "R3")
    header = (
        ["mode", "omega_port", "omega_oracle"]
        + [f"part_port_{d}" for d in dofs]
        + [f"part_oracle_{d}" for d in dofs]
    )
    rows = []
    for k in range(8):
        rows.append(
            [k + 1, omega_p[k], omega_o[k]] + list(part_p[k]) + list(part_o[k])
        )
    _write_csv(out / "modes.csv", "modes", header, rows)

    grid = np.logspace(0.0, np.log10(200.0), 200)
    g_port = _diag_response(clamped_n1, slice(0, 3), slice(0, 3))
    g_oracle = oracle_base_frf(cube_graph(cs, clamped=("N1",)), grid, xi=spec.xi)
    rows = []
    for i, w in enumerate(grid):
        gp = np.abs(np.diag(g_port(w)))
        go = np.abs(np.diag(g_oracle[i])[:3])
        rows.append([w] + list(gp) + list(go))
    header = (
        ["omega"]
        + [f"port_T{i + 1}" for i in range(3)]
        + [f"oracle_T{i + 1}" for i in range(3)]
    )
    _write_csv(out / "freqresp.csv", "freqresp", header, rows)

    dev = np.abs(omega_p - np.asarray(REFERENCE_CUBE_FREQS)) / np.asarray(
        REFERENCE_CUBE_FREQS
    )
    if dev.max() > _FREQ_TOL:
        raise ToleranceFailure(
            f"frequency deviation {dev.max():.4f} exceeds {_FREQ_TOL}"
        )
    for k in range(8):
        a, b = part_p[k], part_o[k]
        if a @ b < 0:
            a = -a
        err = np.max(np.abs(a - b)) / np.max(np.abs(b))
        if err > _PART_TOL:
            raise ToleranceFailure(
                f"mode {k + 1}: participation mismatch {err:.4f} exceeds {_PART_TOL}"
            )
    return 0


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    h = cfg["truss"]["h"]
    sc = spacecraft_config(cfg, n_elem=args.n_elem)
    sample = uncertain_sample(cfg)

    ps = assemble_open_loop(h, sample, sc)
    red = reduce_open_loop(ps.model)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n_out = ps.model.C.shape[0]
    n_in = ps.model.B.shape[1]
    g = _diag_response(ps.model, slice(0, n_out), slice(0, n_in))
    g_low = _diag_response(red.g_low, slice(0, n_out), slice(0, n_in))
    g_r = _diag_response(red.g_r, slice(0, n_out), slice(0, n_in))
    grid = np.logspace(np.log10(0.01), np.log10(500.0), 200)
    rows = []
    for w in grid:
        G = g(w)
        rows.append(
            [
                w,
                np.linalg.svd(G, compute_uv=False)[0],
                np.linalg.svd(G - g_low(w), compute_uv=False)[0],
                np.linalg.svd(G - g_r(w), compute_uv=False)[0],
            ]
        )
    _write_csv(
        out / "reduction.csv",
        "reduction",
        ["omega", "sig_g", "sig_g_minus_glow", "sig_g_minus_gr"],
        rows,
    )
    with open(out / "orders.txt", "w") as fh:
        fh.write(f"order_full {ps.model.A.shape[0]}\n")
        fh.write(f"order_low {red.g_low.A.shape[0]}\n")
        fh.write(f"order_reduced {red.g_r.A.shape[0]}\n")
        fh.write(f"removed_near_zero {red.n_low_removed}\n")
        fh.write(f"removed_high {red.n_high_removed}\n")
    with open(out / "mass.txt", "w") as fh:
        fh.write(f"truss_mass_kg {_fmt(truss_mass(h))}\n")
        fh.write(f"total_mass_kg {_fmt(ps.total_mass)}\n")
    return 0


# ---------------------------------------------------------------------------
# codesign / worstcase
# ---------------------------------------------------------------------------


_DESIGN_HEADER = ["theta_hat"] + [f"k{i}{j}" for i in range(4) for j in range(8)]


def save_design(path: Path, theta: float, k_pma: np.ndarray) -> None:
    _write_csv(
        path, "design", _DESIGN_HEADER,
        [[theta] + list(np.asarray(k_pma, dtype=float).ravel())],
    )


def load_design(path) -> tuple[float, np.ndarray]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rd = list(csv.reader(lines))
    if len(rd) != 2 or rd[0] != _DESIGN_HEADER:
        raise ConfigError(f"{path}: not a design file")
    vals = [float(v) for v in rd[1]]
    return vals[0], np.array(vals[1:], dtype=float).reshape(4, 8)


def cmd_codesign(args) -> int:
    cfg = load_config(args.config)
    ccfg = codesign_config(
        cfg,
        threads=args.threads,
        seed=args.seed,
        preset=args.preset,
        n_elem=args.n_elem,
    )
    log = pso_codesign(ccfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "pso_log.csv",
        "pso_log",
        ["iteration", "particle", "h", "j_c", "z_c", "f", "feasible"],
        [
            [r.iteration, r.particle, r.h, r.j_c, r.z_c, r.f, r.feasible]
            for r in log.records
        ],
    )
    _write_csv(
        out / "best.csv",
        "best",
        ["iteration", "best_f"],
        [[i, f] for i, f in enumerate(log.best_f_per_iter)],
    )
    save_design(out / "design.csv", log.best_h, log.best_k)
    return 0


def cmd_worstcase(args) -> int:
    cfg = load_config(args.config)
    theta, k_pma = load_design(args.design)
    ccfg = codesign_config(
        cfg, threads=args.threads, seed=args.seed, n_elem=args.n_elem
    )
    report = worst_case_sweep(
        theta,
        k_pma,
        ccfg,
        n_tau=cfg["sweep"]["n_tau"],
        polish_evals=cfg["sweep"]["polish_evals"],
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = [
        "tau", "theta_deg",
        "sup_rpe", "inf_rpe", "sup_effort", "inf_effort",
        "crit_freq_rpe", "crit_freq_effort",
        "crit_dmass_rpe", "crit_dinertia_rpe", "crit_dfreq_rpe",
        "crit_dmass_effort", "crit_dinertia_effort", "crit_dfreq_effort",
        "nominal_rpe", "nominal_effort",
    ]
    rows = []
    for r in report.rows:
        rows.append(
            [
                r.tau, r.theta_deg,
                r.sup_point, r.inf_point, r.sup_effort, r.inf_effort,
                r.crit_freq_point, r.crit_freq_effort,
                *r.crit_delta_point, *r.crit_delta_effort,
                r.nominal_point, r.nominal_effort,
            ]
        )
    _write_csv(Path(args.out) / "sweep.csv", "sweep", header, rows)
    if report.sup_effort > 1.0:
        raise ToleranceFailure(
            f"worst-case effort gain {report.sup_effort:.4f} exceeds 1"
        )
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, metavar="PATH",
                        help="JSON run configuration (defaults if omitted)")
    common.add_argument("--out", default=".", metavar="DIR",
                        help="output directory (created if missing)")
    common.add_argument("--threads", type=int, default=1, metavar="N")
    common.add_argument("--seed", type=int, default=None, metavar="S")
    common.add_argument("--preset", choices=("desk", "paper"), default=None)
    common.add_argument("--n-elem", type=int, default=None, metavar="K",
                        help="beam elements per edge (overrides config)")

    p = argparse.ArgumentParser(
        prog="portdyn",
        description="port-based spacecraft structural dynamics pipeline",
    )
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate-cube", parents=[common]).set_defaults(
        fn=cmd_validate_cube
    )
    sub.add_parser("analyze", parents=[common]).set_defaults(fn=cmd_analyze)
    sub.add_parser("codesign", parents=[common]).set_defaults(fn=cmd_codesign)
    wc = sub.add_parser("worstcase", parents=[common])
    wc.add_argument("--design", required=True, metavar="PATH",
                    help="design.csv written by the codesign command")
    wc.set_defaults(fn=cmd_worstcase)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ToleranceFailure as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, ValueError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
