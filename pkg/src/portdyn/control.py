"""Attitude and micro-vibration control layers with pointing weights.

Two loops close around the reduced open-loop plant of
:mod:`portdyn.spacecraft`:

* an attitude controller on the hub angular accelerations, a PD over a
  double integrator per axis, gains set from the total inertia so the
  rigid closed-loop poles sit at ``omega_acs`` with damping ``xi_acs``;
* an active damping loop from the eight instrument-corner acceleration
  measurements through a static 4x8 gain and a wash-out filter to the
  four proof-mass actuator forces.  The wash-out both integrates the
  measured acceleration into a rate-like signal and kills the DC
  component so the actuators never fight a constant bias.

Performance is judged on two worst-case transfer norms from the
normalized drive-joint disturbances: the relative pointing error of the
antenna boresight, weighted by the windowed-difference filter over the
exposure time, and the normalized actuator effort.  The pointing weight
acts on an angle; the plant outputs angular acceleration, so the filter
is realized divided by s^2 (same transfer, one extra origin pole per
channel that is cancelled by the closed loop's blocking zero at DC and
is stripped before computing norms).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from portdyn.spacecraft import (
    PlantSample,
    SpacecraftConfig,
    UncertainSample,
    assemble_open_loop,
    reduce_open_loop,
)
from portdyn.ss import (
    StateSpaceModel,
    hinf_norm,
    interconnect,
    port_labels,
    reduce_model,
)

__all__ = [
    "ControlSpec",
    "PerformanceSpec",
    "acs_controller",
    "pma_filter",
    "rpe_weight",
    "rpe_filter",
    "assemble_closed_loop",
    "closed_loop_norms",
    "perf_indices",
    "prepare_plant",
]


@dataclass(frozen=True)
class ControlSpec:
    """Loop-shaping constants and the actuator feedback gain."""

    omega_acs: float = 0.1
    xi_acs: float = 0.7
    omega_pma: float = 0.5
    xi_pma: float = 0.7
    k_pma: np.ndarray = field(default_factory=lambda: np.zeros((4, 8)))

    def __post_init__(self):
        if not np.isclose(self.omega_pma, 5.0 * self.omega_acs):
            raise ValueError("wash-out corner must sit at 5x the attitude bandwidth")
        k = np.asarray(self.k_pma, dtype=float)
        if k.shape != (4, 8) or not np.all(np.isfinite(k)):
            raise ValueError("k_pma must be a finite 4x8 matrix")


@dataclass(frozen=True)
class PerformanceSpec:
    """Pointing requirement and actuator sizing constants."""

    eps_max: float = 50e-6     # rad, relative pointing error bound
    t_delta: float = 3e-3      # s, exposure window
    p_max: float = 0.3820      # N m, drive-joint disturbance level
    u_max: float = 15.0        # N, actuator force rating
    gamma_u: float = 1.0       # weight on the normalized effort channel

    def __post_init__(self):
        for name in ("eps_max", "t_delta", "p_max", "u_max", "gamma_u"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"PerformanceSpec.{name} must be positive")


def acs_controller(
    j_tot: np.ndarray, spec: ControlSpec = ControlSpec()
) -> StateSpaceModel:
    """Attitude controller: hub acceleration in, hub wrench out.

    Only the three angular channels act; per axis the torque is
    -(k_p + k_v s)/s^2 times the measured angular acceleration with
    k_p = omega^2 J_ii and k_v = 2 xi omega J_ii, which places the
    rigid-axis closed-loop poles at (omega_acs, xi_acs).  Six states.
    """
    j_tot = np.asarray(j_tot, dtype=float)
    if j_tot.shape != (3, 3):
        raise ValueError("j_tot must be 3x3")
    jd = np.diag(j_tot)
    if np.any(jd <= 0.0):
        raise ValueError("j_tot must have positive diagonal")
    k_p = spec.omega_acs**2 * jd
    k_v = 2.0 * spec.xi_acs * spec.omega_acs * jd

    # per axis: x1' = x2 (integrated rate), x2' = a (rate); torque
    # output -(k_p x1 + k_v x2)
    A = np.zeros((6, 6))
    B = np.zeros((6, 6))
    C = np.zeros((6, 6))
    for i in range(3):
        A[2 * i, 2 * i + 1] = 1.0
        B[2 * i + 1, 3 + i] = 1.0
        C[3 + i, 2 * i] = -k_p[i]
        C[3 + i, 2 * i + 1] = -k_v[i]
    return StateSpaceModel(
        A, B, C, np.zeros((6, 6)),
        tuple(port_labels("a:P1", 6)),
        tuple(port_labels("W:P1", 6)),
    )


def pma_filter(spec: ControlSpec = ControlSpec()) -> StateSpaceModel:
    """Wash-out s/(s^2 + 2 xi w s + w^2) on each of the four channels."""
    w, xi = spec.omega_pma, spec.xi_pma
    a = np.array([[0.0, 1.0], [-w * w, -2.0 * xi * w]])
    b = np.array([[0.0], [1.0]])
    c = np.array([[0.0, 1.0]])
    A = sla.block_diag(*[a] * 4)
    B = sla.block_diag(*[b] * 4)
    C = sla.block_diag(*[c] * 4)
    return StateSpaceModel(
        A, B, C, np.zeros((4, 4)),
        tuple(port_labels("v", 4)),
        tuple(port_labels("u", 4)),
    )


def rpe_weight(spec: PerformanceSpec = PerformanceSpec()) -> StateSpaceModel:
    """Pointing-error weight on the boresight angle, 2x2 diagonal.

    Per channel  eps^-1 * td s (td s + sqrt(12)) / ((td s)^2 + 6 td s
    + 12): zero at DC, high-frequency gain exactly 1/eps_max.
    """
    td, eps = spec.t_delta, spec.eps_max
    s12 = np.sqrt(12.0)
    a = np.array([[0.0, 1.0], [-12.0 / td**2, -6.0 / td]])
    b = np.array([[0.0], [1.0]])
    c = np.array([[-12.0 / td**2, (s12 - 6.0) / td]]) / eps
    d = np.array([[1.0 / eps]])
    A = sla.block_diag(a, a)
    B = sla.block_diag(b, b)
    C = sla.block_diag(c, c)
    D = sla.block_diag(d, d)
    return StateSpaceModel(
        A, B, C, D,
        tuple(port_labels("ang", 2)),
        tuple(port_labels("rpe", 2)),
    )


def rpe_filter(spec: PerformanceSpec = PerformanceSpec()) -> StateSpaceModel:
    """The same pointing weight divided by s^2, fed by angular acceleration.

    Transfer per channel  eps^-1 * td (td s + sqrt(12)) / (s ((td s)^2
    + 6 td s + 12)): identical to ``rpe_weight`` acting on the angle.
    The origin pole is cancelled in closed loop by the attitude loop's
    blocking zero; strip it (``reduce_model`` with a small
    ``omega_low``) before computing norms.
    """
    td, eps = spec.t_delta, spec.eps_max
    s12 = np.sqrt(12.0)
    # (s + sqrt(12)/td) / (s^3 + (6/td) s^2 + (12/td^2) s) per channel
    a = np.array(
        [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, -12.0 / td**2, -6.0 / td]]
    )
    b = np.array([[0.0], [0.0], [1.0]])
    c = np.array([[s12 / td, 1.0, 0.0]]) / eps
    A = sla.block_diag(a, a)
    B = sla.block_diag(b, b)
    C = sla.block_diag(c, c)
    return StateSpaceModel(
        A, B, C, np.zeros((2, 2)),
        tuple(port_labels("acc", 2)),
        tuple(port_labels("rpe", 2)),
    )


def assemble_closed_loop(
    plant: StateSpaceModel,
    j_tot: np.ndarray,
    control: ControlSpec = ControlSpec(),
    perf: PerformanceSpec = PerformanceSpec(),
) -> StateSpaceModel:
    """Both loops closed, external channels p (2) -> (rpe (2), eff (4)).

    ``plant`` is an open-loop model with the channel layout of
    ``assemble_open_loop`` (usually reduced first).  Disturbance inputs
    are normalized by the disturbance level p_max, the actuator efforts
    by gamma_u / u_max, and the boresight output runs through the
    pointing weight.
    """
    acs = acs_controller(j_tot, control)
    wash = pma_filter(control)
    weight = rpe_filter(perf)
    P, ACS, WASH, WT = range(4)
    k = np.asarray(control.k_pma, dtype=float)
    links = [
        ((P, "a:P1"), (ACS, "a:P1"), 1.0),
        ((ACS, "W:P1"), (P, "W:P1"), 1.0),
        ((P, "acc:meas"), (WASH, "v"), k),
        ((WASH, "u"), (P, "u:PMA"), 1.0),
        ((P, "LOS"), (WT, "acc"), 1.0),
    ]
    inputs = [
        ("p[0]", [((P, "p:SP1"), perf.p_max)]),
        ("p[1]", [((P, "p:SP2"), perf.p_max)]),
    ]
    outputs = [
        ("rpe", [((WT, "rpe"), 1.0)]),
        ("eff", [((WASH, "u"), perf.gamma_u / perf.u_max)]),
    ]
    return interconnect([plant, acs, wash, weight], links, inputs, outputs)


def _modal_grid_sups(cl: StateSpaceModel, blocks) -> list[tuple[float, float]]:
    """Peak gain and peak frequency per output block, one eig for all.

    Adaptive log grid seeded with the pole frequencies, three local
    zoom rounds around each block's running peak.  Cheaper than the
    Hamiltonian bisection by orders of magnitude on wide-band models
    and shared across output blocks, at grid accuracy (~1e-4 after the
    zooms).
    """
    lam, V = np.linalg.eig(cl.A)
    Bv = np.linalg.solve(V, cl.B)
    Cv = cl.C @ V

    def sig(block, ws):
        out = np.zeros(ws.size)
        for i, w in enumerate(ws):
            resp = (Cv[block] / (1j * w - lam)) @ Bv + cl.D[block]
            out[i] = np.linalg.svd(resp, compute_uv=False)[0]
        return out

    wf = np.abs(lam.imag)
    wf = wf[wf > 1e-6]
    base = np.logspace(-3, np.log10(max(wf.max() * 2.0, 10.0)), 300)
    grid = np.unique(np.concatenate([base, wf]))
    results = []
    for block in blocks:
        s = sig(block, grid)
        w_pk, s_pk = grid[s.argmax()], s.max()
        for _ in range(3):
            local = np.linspace(w_pk * 0.9, w_pk * 1.1, 11)
            sl = sig(block, local)
            if sl.max() > s_pk:
                s_pk, w_pk = sl.max(), local[sl.argmax()]
        results.append((float(s_pk), float(w_pk)))
    return results


def closed_loop_norms(
    plant: StateSpaceModel,
    j_tot: np.ndarray,
    control: ControlSpec = ControlSpec(),
    perf: PerformanceSpec = PerformanceSpec(),
    stability_margin: float = 0.0,
    method: str = "bisection",
) -> tuple[float, float]:
    """H-infinity norms (pointing, effort) of one closed-loop sample.

    Returns (inf, inf) when the closure is unstable or ill posed.  The
    two exactly-cancelled origin poles of the pointing weight are
    stripped before the norm computation.  ``method="grid"`` switches
    to a shared-diagonalization adaptive-grid peak search, much faster
    on large plants (uncertainty sweeps over the unreduced band).
    """
    try:
        cl = assemble_closed_loop(plant, j_tot, control, perf)
    except ValueError:
        return np.inf, np.inf
    cl, _ = reduce_model(cl, omega_low=1e-3)
    if not cl.is_stable(stability_margin):
        return np.inf, np.inf
    rpe = cl.output_port("rpe")
    eff = cl.output_port("eff")
    if method == "grid":
        (j, _), (z, _) = _modal_grid_sups(cl, [rpe, eff])
        return j, z
    sub_rpe = StateSpaceModel(
        cl.A, cl.B, cl.C[rpe], cl.D[rpe],
        cl.input_labels, cl.output_labels[rpe],
    )
    sub_eff = StateSpaceModel(
        cl.A, cl.B, cl.C[eff], cl.D[eff],
        cl.input_labels, cl.output_labels[eff],
    )
    return hinf_norm(sub_rpe), hinf_norm(sub_eff)


def perf_indices(
    h: float,
    control: ControlSpec,
    samples,
    config: SpacecraftConfig = SpacecraftConfig(),
    perf: PerformanceSpec = PerformanceSpec(),
    plants=None,
) -> tuple[float, float]:
    """Worst-case (pointing, effort) norms over an uncertainty sample set.

    ``plants`` may carry prebuilt ``(reduced plant, j_tot)`` pairs
    matching ``samples`` to avoid reassembly; otherwise each sample is
    assembled and reduced here.  An unstable sample makes both indices
    infinite (the optimizer's penalty branch then fires).
    """
    samples = list(samples)
    if not samples:
        raise ValueError("empty uncertainty sample set")
    if plants is None:
        plants = [prepare_plant(h, s, config) for s in samples]
    j_c = 0.0
    z_c = 0.0
    for g_r, j_tot in plants:
        j, z = closed_loop_norms(g_r, j_tot, control, perf)
        j_c = max(j_c, j)
        z_c = max(z_c, z)
    return j_c, z_c


def prepare_plant(
    h: float,
    sample: UncertainSample,
    config: SpacecraftConfig = SpacecraftConfig(),
    truss: StateSpaceModel | None = None,
) -> tuple[StateSpaceModel, np.ndarray]:
    """Build and reduce one open-loop sample: (G_r, total inertia).

    Pass a prebuilt (ideally pre-reduced) ``truss`` when evaluating
    many samples at the same section size; see ``assemble_open_loop``.
    """
    ps = assemble_open_loop(h, sample, config, truss=truss)
    red = reduce_open_loop(ps.model)
    return red.g_r, ps.inertia
