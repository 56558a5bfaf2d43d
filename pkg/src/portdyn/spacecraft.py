"""Spacecraft plant: hub, solar panels, drive joints, antenna, actuators.

The flexible support truss of :mod:`portdyn.truss` is mounted under a
rigid hub and carries a rigid antenna plus four proof-mass actuators at
its two instrument corners.  Two flexible solar panels attach to the hub
through single-axis drive joints.  Everything is written in the
acceleration-twist / wrench port convention of :mod:`portdyn.ss`, so the
free-floating rigid motion is purely algebraic (wrench in, acceleration
out through the inverse rigid mass matrix) and contributes no poles.

Frames and geometry (hub frame, origin at the hub center of mass P1):
the truss frame maps into the hub frame by a half-turn about the
(1,1,0)/sqrt(2) axis followed by a translation, so that the four base
corners N1..N4 land on the mounting points P2..P5 of the hub deck at
z = +1 and the tower extends toward -z.  The antenna boresight is the
hub z axis; pointing performance is measured by the angular
accelerations of the antenna node N20 about x (elevation) and y
(azimuth).

The open-loop plant `G` of ``assemble_open_loop`` has 12 inputs,

    p:SP1 (1), p:SP2 (1)    drive-joint disturbance torques,
    W:P1 (6)                wrench at the hub center of mass,
    u:PMA (4)               actuator forces, order N17-x, N17-y,
                            N20-x, N20-y,

and 20 outputs,

    LOS (2)                 angular accelerations of N20 about x, y,
    x:PMA (4)               proof-mass strokes, same actuator order,
    a:P1 (6)                acceleration twist of the hub CoG,
    acc:meas (8)            linear then angular accelerations at N17
                            along/about x, y, then the same four at N20.

Uncertain parameters follow the mechanical data tables: hub mass and
I_yy at +-20%, first panel mode at +-20%, and the joint angle theta
parametrized by tau with theta = 4*atan(tau).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from portdyn.frames import FrameRotation, rigid_mass_matrix, rod_mass_matrix, transport
from portdyn.ss import (
    ReductionReport,
    StateSpaceModel,
    interconnect,
    invert_channels,
    port_labels,
    reduce_model,
    relabel_ports,
    rotate_ports,
    static_model,
)
from portdyn.truss import TRUSS_NODES, build_ttruss, truss_beam_spec, truss_graph

__all__ = [
    "PanelConfig",
    "PmaConfig",
    "SpacecraftConfig",
    "UncertainSample",
    "PlantSample",
    "OpenLoopReduction",
    "rigid_body_multiport",
    "solar_panel_model",
    "sadm_panel",
    "pma_model",
    "assemble_open_loop",
    "reduce_open_loop",
    "total_mass_matrix",
    "TRUSS_TO_HUB_ROTATION",
    "TRUSS_TO_HUB_OFFSET",
]


# half turn about (1,1,0)/sqrt(2): swaps x and y, flips z.  Maps the
# truss base square onto the hub deck with N1->P2, N2->P3, N3->P4,
# N4->P5 (mounting-point table) and sends the tower toward -z.
TRUSS_TO_HUB_ROTATION = FrameRotation(
    np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
)
TRUSS_TO_HUB_OFFSET = np.array([-0.5, -0.5, 1.0])


def truss_node_hub(name: str) -> np.ndarray:
    """Coordinates of a truss node expressed in the hub frame."""
    p = np.asarray(TRUSS_NODES[name], dtype=float)
    return TRUSS_TO_HUB_ROTATION.R @ p + TRUSS_TO_HUB_OFFSET


@dataclass(frozen=True)
class PanelConfig:
    """One solar panel: rigid data plus three cantilever modes.

    ``inertia_g`` and ``r_og`` are in the panel frame (origin at the
    attachment point O, CoG toward -y when the joint angle is zero);
    ``participation`` has one row per mode, mapping the 6-component
    root acceleration to modal forcing.
    """

    mass: float = 80.0
    inertia_g: np.ndarray = field(
        default_factory=lambda: np.array(
            [[80.0, 0.0, -0.1], [0.0, 20.0, 22.0], [-0.1, 22.0, 100.0]]
        )
    )
    r_og: np.ndarray = field(default_factory=lambda: np.array([0.0, -2.0, 0.03]))
    omega: np.ndarray = field(default_factory=lambda: np.array([2.51, 3.77, 9.42]))
    xi: float = 0.003
    participation: np.ndarray = field(
        default_factory=lambda: np.array(
            [
                [-0.002, -1.5, -5.0, 14.0, 0.02, -0.01],
                [5.0, 1.0, -0.1, 0.0, 2.0, 15.0],
                [0.3, 0.002, 0.03, -0.02, 3.2, -0.2],
            ]
        )
    )


@dataclass(frozen=True)
class PmaConfig:
    """Proof-mass actuator: rigid casing plus a 1-DOF spring-mass-damper.

    All vectors are in the actuator frame (attachment point at the
    origin, stroke along ``axis``); ``inertia_g`` is the casing inertia
    at the CoG.
    """

    casing_mass: float = 0.5
    inertia_g: np.ndarray = field(
        default_factory=lambda: np.diag([5e-3, 5e-3, 1.6e-4])
    )
    r_og: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.05, 0.0]))
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    proof_mass: float = 0.1
    stiffness: float = 10.0
    damping: float = 1.4

    @property
    def total_mass(self) -> float:
        return self.casing_mass + self.proof_mass


@dataclass(frozen=True)
class SpacecraftConfig:
    """Full plant data: hub, panels, drive joints, antenna, actuators.

    The drive-joint stiffness and friction (``k_joint``, ``f_joint``)
    are design defaults, not table data: 500 N m/rad and 1 N m s/rad
    keep the joint modes above the attitude-control band.  Results are
    sensitive to them; override in the config file if better values are
    known.
    """

    hub_mass: float = 800.0
    hub_inertia: np.ndarray = field(
        default_factory=lambda: np.diag([1000.0, 1000.0, 200.0])
    )
    points: dict = field(
        default_factory=lambda: {
            "P1": np.zeros(3),
            "P2": np.array([-0.5, -0.5, 1.0]),
            "P3": np.array([0.5, -0.5, 1.0]),
            "P4": np.array([0.5, 0.5, 1.0]),
            "P5": np.array([-0.5, 0.5, 1.0]),
            "P6": np.array([1.0, 0.0, 0.0]),
            "P7": np.array([-1.0, 0.0, 0.0]),
        }
    )
    panel: PanelConfig = field(default_factory=PanelConfig)
    k_joint: float = 500.0
    f_joint: float = 1.0
    antenna_mass: float = 20.0
    antenna_inertia: np.ndarray = field(
        default_factory=lambda: np.diag([1.32, 1.32, 2.5])
    )
    pma: PmaConfig = field(default_factory=PmaConfig)
    n_elem: int = 5


@dataclass(frozen=True)
class UncertainSample:
    """One point of the uncertain-parameter box.

    ``delta_mass``, ``delta_inertia_yy`` scale the hub mass and I_yy by
    1 + 0.2*delta; ``delta_panel_freq`` scales the first panel mode the
    same way; ``tau`` parametrizes the joint angle, theta = 4*atan(tau),
    so tau = +-1 is a half turn either way.
    """

    delta_mass: float = 0.0
    delta_inertia_yy: float = 0.0
    delta_panel_freq: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        for name in ("delta_mass", "delta_inertia_yy", "delta_panel_freq", "tau"):
            v = getattr(self, name)
            if not (-1.0 <= v <= 1.0):
                raise ValueError(f"UncertainSample.{name} = {v} outside [-1, 1]")

    @property
    def theta(self) -> float:
        return 4.0 * np.arctan(self.tau)


def rigid_body_multiport(mass, inertia_g, cog, points: dict) -> StateSpaceModel:
    """Static multi-port rigid body: wrenches in, accelerations out.

    ``points`` maps port names to coordinates; every point gets a
    6-wide wrench input ``W:{name}`` and a 6-wide acceleration output
    ``a:{name}``.  The feedthrough is tau_i M_G^-1 tau_j^T, symmetric
    by construction.
    """
    inertia_g = np.asarray(inertia_g, dtype=float)
    cog = np.asarray(cog, dtype=float)
    mg = sla.block_diag(mass * np.eye(3), inertia_g)
    try:
        mg_inv = np.linalg.inv(mg)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular rigid mass matrix") from exc
    names = list(points)
    taus = [transport(cog - np.asarray(points[n], dtype=float)) for n in names]
    k = len(names)
    d = np.zeros((6 * k, 6 * k))
    for i in range(k):
        for j in range(k):
            d[6 * i : 6 * i + 6, 6 * j : 6 * j + 6] = taus[i] @ mg_inv @ taus[j].T
    in_labels = [lab for n in names for lab in port_labels(f"W:{n}", 6)]
    out_labels = [lab for n in names for lab in port_labels(f"a:{n}", 6)]
    return static_model(d, in_labels, out_labels)


def solar_panel_model(
    config: PanelConfig,
    delta_freq: float = 0.0,
    node: str = "SP",
) -> StateSpaceModel:
    """Single-port flexible panel clamped at its attachment point.

    Input ``a:{node}`` is the imposed root acceleration twist, output
    ``W:{node}`` the wrench the panel applies back on its support, both
    in the panel frame.  Three modal oscillators with the configured
    participation rows ride on top of the rigid mass transported to the
    root; the first frequency is scaled by 1 + 0.2*delta_freq.
    """
    omega = np.array(config.omega, dtype=float)
    omega[0] *= 1.0 + 0.2 * delta_freq
    L = np.asarray(config.participation, dtype=float)
    nm = omega.size
    if L.shape != (nm, 6):
        raise ValueError("participation must have one 6-wide row per mode")
    m0 = rigid_mass_matrix(config.mass, config.inertia_g, config.r_og)

    om2 = np.diag(omega**2)
    dmp = np.diag(2.0 * config.xi * omega)
    A = np.block([[np.zeros((nm, nm)), np.eye(nm)], [-om2, -dmp]])
    B = np.vstack([np.zeros((nm, 6)), -L])
    cacc = np.hstack([-om2, -dmp])  # eta_dd = cacc x - L a
    C = -L.T @ cacc
    D = L.T @ L - m0
    return StateSpaceModel(
        A, B, C, D,
        tuple(port_labels(f"a:{node}", 6)),
        tuple(port_labels(f"W:{node}", 6)),
    )


def sadm_panel(
    config: SpacecraftConfig,
    node: str,
    base_frame: FrameRotation,
    theta: float = 0.0,
    delta_freq: float = 0.0,
    k_joint: float | None = None,
    f_joint: float | None = None,
) -> StateSpaceModel:
    """Panel behind its single-axis drive joint, in the parent frame.

    The joint rotates about the panel-frame x axis; the panel frame is
    ``base_frame`` composed with that rotation by ``theta``.  The extra
    relative-rotation DOF is introduced by augmenting the panel port
    with a scalar hinge-acceleration channel, inverting it (so the
    hinge torque becomes the input), and closing it over a double
    integrator carrying the joint stiffness and friction.  The
    disturbance torque enters the same channel.

    Ports: inputs ``a:{node}`` (6, support acceleration) and
    ``p:{node}`` (1, disturbance torque); outputs ``W:{node}`` (6,
    wrench on the support) and ``theta:{node}`` (1, relative angle).
    At DC a constant disturbance gives theta = p / k_joint.
    """
    k = config.k_joint if k_joint is None else k_joint
    f = config.f_joint if f_joint is None else f_joint
    frame = FrameRotation(base_frame.R @ FrameRotation.about_x(theta).R)
    panel = rotate_ports(
        solar_panel_model(config.panel, delta_freq, node), frame.R6
    )
    axis = base_frame.R @ np.array([1.0, 0.0, 0.0])
    J = np.concatenate([np.zeros(3), axis])

    # augment: root acceleration = a_support + J * theta_dd, and expose
    # the axis component of the support wrench as a scalar output
    A, B, C, D = panel.A, panel.B, panel.C, panel.D
    B_aug = np.hstack([B, (B @ J)[:, None]])
    C_aug = np.vstack([C, J @ C])
    D_aug = np.block(
        [[D, (D @ J)[:, None]], [(J @ D)[None, :], np.array([[J @ D @ J]])]]
    )
    aug = StateSpaceModel(
        A, B_aug, C_aug, D_aug,
        panel.input_labels + ("hinge_acc",),
        panel.output_labels + ("hinge_torque",),
    )
    # torque-driven hinge: impose the axis wrench component, read the
    # relative acceleration
    hinge = invert_channels(aug, [6])

    # double integrator; outputs the spring/damper torque and the angle
    integ = StateSpaceModel(
        A=np.array([[0.0, 1.0], [0.0, 0.0]]),
        B=np.array([[0.0], [1.0]]),
        C=np.array([[k, f], [1.0, 0.0]]),
        D=np.zeros((2, 1)),
        input_labels=("hinge_acc",),
        output_labels=("torque_sd", "theta"),
    )
    # the panel pushes torque J.W on its support; the joint imposes
    # J.W = k*theta + f*theta_dot - p so that the torque acting on the
    # panel is the disturbance minus the spring/damper reaction
    return interconnect(
        [hinge, integ],
        links=[
            ((0, "hinge_acc"), (1, "hinge_acc"), 1.0),
            ((1, "torque_sd"), (0, "hinge_torque"), 1.0),
        ],
        inputs=[
            (f"a:{node}", [((0, f"a:{node}"), 1.0)]),
            (f"p:{node}", [((0, "hinge_torque"), -1.0)]),
        ],
        outputs=[
            (f"W:{node}", [((0, f"W:{node}"), 1.0)]),
            (f"theta:{node}", [((1, "theta"), 1.0)]),
        ],
    )


def pma_model(
    config: PmaConfig,
    frame: FrameRotation = FrameRotation.identity(),
    node: str = "P",
) -> StateSpaceModel:
    """Proof-mass actuator attached at ``node``, 7 by 7 port model.

    Channels (in the parent frame, via ``frame``): input ``a:{node}``
    (6, imposed attachment acceleration) and ``u:{node}`` (1, force on
    the proof mass along the stroke axis); output ``W:{node}`` (6,
    wrench the actuator applies on its support) and ``x:{node}`` (1,
    proof-mass stroke).  States are the stroke and its rate.
    """
    R = frame.R
    v = R @ np.asarray(config.axis, dtype=float)
    r_og = R @ np.asarray(config.r_og, dtype=float)
    inertia = R @ np.asarray(config.inertia_g, dtype=float) @ R.T
    m = config.proof_mass
    tau_gp = transport(-r_og)  # acceleration at the CoG from the attachment
    mg = sla.block_diag(config.total_mass * np.eye(3), inertia)
    vw = np.concatenate([v, np.zeros(3)])

    # stroke dynamics: m (v . a_G + x_dd) = -k x - d x_d + u
    row_a = -vw @ tau_gp  # coefficient of a_P in x_dd
    A = np.array([[0.0, 1.0], [-config.stiffness / m, -config.damping / m]])
    B = np.zeros((2, 7))
    B[1, :6] = row_a
    B[1, 6] = 1.0 / m
    # x_dd as a function of states and inputs, for the reaction wrench
    xdd_x = A[1]
    xdd_u = B[1]
    w_x = -m * np.outer(tau_gp.T @ vw, xdd_x)
    w_u = -m * np.outer(tau_gp.T @ vw, xdd_u)
    w_u[:, :6] += -tau_gp.T @ mg @ tau_gp
    C = np.vstack([w_x, [1.0, 0.0]])
    D = np.vstack([w_u, np.zeros(7)])
    return StateSpaceModel(
        A, B, C, D,
        tuple(port_labels(f"a:{node}", 6)) + (f"u:{node}",),
        tuple(port_labels(f"W:{node}", 6)) + (f"x:{node}",),
    )


# actuator stations: (truss node, stroke direction, rotation of the
# actuator frame that brings its axis onto that direction)
_PMA_STATIONS = (
    ("N17", "x", FrameRotation.about_z(-np.pi / 2)),
    ("N17", "y", FrameRotation.identity()),
    ("N20", "x", FrameRotation.about_z(-np.pi / 2)),
    ("N20", "y", FrameRotation.identity()),
)


@dataclass(frozen=True)
class PlantSample:
    """Open-loop plant built for one (h, uncertainty) point."""

    model: StateSpaceModel
    h: float
    sample: UncertainSample
    mass_matrix: np.ndarray      # 6x6 rigid mass of everything at P1
    total_mass: float
    inertia: np.ndarray          # 3x3 rotational block of mass_matrix


def total_mass_matrix(
    h: float, sample: UncertainSample, config: SpacecraftConfig
) -> np.ndarray:
    """Geometric 6x6 rigid mass matrix of the whole spacecraft at P1."""
    hub_inertia = np.array(config.hub_inertia, dtype=float)
    hub_inertia[1, 1] *= 1.0 + 0.2 * sample.delta_inertia_yy
    m = rigid_mass_matrix(
        config.hub_mass * (1.0 + 0.2 * sample.delta_mass), hub_inertia, np.zeros(3)
    )
    # truss rods, mapped into the hub frame
    for na, nb, spec in truss_graph(h, config.n_elem).edges:
        m += rod_mass_matrix(
            truss_node_hub(na), truss_node_hub(nb), spec.mass, at=np.zeros(3)
        )
    # panels at the current joint angle
    for point, base in (
        ("P6", FrameRotation.identity()),
        ("P7", FrameRotation.about_z(np.pi)),
    ):
        R = base.R @ FrameRotation.about_x(sample.theta).R
        g = config.points[point] + R @ config.panel.r_og
        m += rigid_mass_matrix(
            config.panel.mass, R @ config.panel.inertia_g @ R.T, g
        )
    m += rigid_mass_matrix(
        config.antenna_mass, config.antenna_inertia, truss_node_hub("N20")
    )
    for node, _, rot in _PMA_STATIONS:
        g = truss_node_hub(node) + rot.R @ config.pma.r_og
        m += rigid_mass_matrix(
            config.pma.total_mass, rot.R @ config.pma.inertia_g @ rot.R.T, g
        )
    return m


def assemble_open_loop(
    h: float,
    sample: UncertainSample = UncertainSample(),
    config: SpacecraftConfig = SpacecraftConfig(),
    truss: StateSpaceModel | None = None,
) -> PlantSample:
    """Open-loop plant G for one design/uncertainty point.

    12 inputs (p:SP1, p:SP2, W:P1, u:PMA) and 20 outputs (LOS, x:PMA,
    a:P1, acc:meas); see the module docstring for channel conventions.

    ``truss`` optionally supplies a prebuilt six-port truss model (in
    the truss frame).  The rigid hub always imposes rigid-compatible
    base accelerations, so the truss's near-zero loop-closure poles are
    never excited here; passing a truss with those poles already
    stripped reproduces the assembled response to ~1e-10 while making
    repeated-sample studies (optimization, uncertainty sweeps) cheap.
    """
    hub_inertia = np.array(config.hub_inertia, dtype=float)
    hub_inertia[1, 1] *= 1.0 + 0.2 * sample.delta_inertia_yy
    hub = rigid_body_multiport(
        config.hub_mass * (1.0 + 0.2 * sample.delta_mass),
        hub_inertia,
        np.zeros(3),
        config.points,
    )
    if truss is None:
        truss = build_ttruss(h, config.n_elem)
    truss = rotate_ports(truss, TRUSS_TO_HUB_ROTATION.R6)
    panel1 = sadm_panel(
        config, "SP1", FrameRotation.identity(), sample.theta, sample.delta_panel_freq
    )
    panel2 = sadm_panel(
        config, "SP2", FrameRotation.about_z(np.pi), sample.theta,
        sample.delta_panel_freq,
    )
    ant_m0 = rigid_mass_matrix(
        config.antenna_mass, config.antenna_inertia, np.zeros(3)
    )
    antenna = static_model(
        -ant_m0, port_labels("a:ANT", 6), port_labels("W:ANT", 6)
    )
    pmas = [
        pma_model(config.pma, rot, f"{node}{ax}") for node, ax, rot in _PMA_STATIONS
    ]

    models = [hub, truss, panel1, panel2, antenna] + pmas
    HUB, TRUSS, SP1, SP2, ANT = range(5)
    PMA0 = 5

    links = []
    for hub_pt, tr_node in (("P2", "N1"), ("P3", "N2"), ("P4", "N3"), ("P5", "N4")):
        links.append(((HUB, f"a:{hub_pt}"), (TRUSS, f"a:{tr_node}"), 1.0))
        links.append(((TRUSS, f"W:{tr_node}"), (HUB, f"W:{hub_pt}"), 1.0))
    links.append(((HUB, "a:P6"), (SP1, "a:SP1"), 1.0))
    links.append(((SP1, "W:SP1"), (HUB, "W:P6"), 1.0))
    links.append(((HUB, "a:P7"), (SP2, "a:SP2"), 1.0))
    links.append(((SP2, "W:SP2"), (HUB, "W:P7"), 1.0))
    links.append(((TRUSS, "a:N20"), (ANT, "a:ANT"), 1.0))
    links.append(((ANT, "W:ANT"), (TRUSS, "W:N20"), 1.0))
    for i, (node, ax, _) in enumerate(_PMA_STATIONS):
        links.append(((TRUSS, f"a:{node}"), (PMA0 + i, f"a:{node}{ax}"), 1.0))
        links.append(((PMA0 + i, f"W:{node}{ax}"), (TRUSS, f"W:{node}"), 1.0))

    inputs = [
        ("p:SP1", [((SP1, "p:SP1"), 1.0)]),
        ("p:SP2", [((SP2, "p:SP2"), 1.0)]),
        ("W:P1", [((HUB, "W:P1"), 1.0)]),
    ]
    for i, (node, ax, _) in enumerate(_PMA_STATIONS):
        inputs.append((f"u:PMA[{i}]", [((PMA0 + i, f"u:{node}{ax}"), 1.0)]))

    outputs = [
        ("LOS[0]", [((TRUSS, "a:N20[3]"), 1.0)]),
        ("LOS[1]", [((TRUSS, "a:N20[4]"), 1.0)]),
    ]
    for i, (node, ax, _) in enumerate(_PMA_STATIONS):
        outputs.append((f"x:PMA[{i}]", [((PMA0 + i, f"x:{node}{ax}"), 1.0)]))
    outputs.append(("a:P1", [((HUB, "a:P1"), 1.0)]))
    meas = [("N17", 0), ("N17", 1), ("N17", 3), ("N17", 4),
            ("N20", 0), ("N20", 1), ("N20", 3), ("N20", 4)]
    for i, (node, comp) in enumerate(meas):
        outputs.append((f"acc:meas[{i}]", [((TRUSS, f"a:{node}[{comp}]"), 1.0)]))

    model = interconnect(models, links, inputs, outputs)
    mass = total_mass_matrix(h, sample, config)
    return PlantSample(
        model=model,
        h=h,
        sample=sample,
        mass_matrix=mass,
        total_mass=float(mass[0, 0]),
        inertia=mass[3:, 3:].copy(),
    )


@dataclass(frozen=True)
class OpenLoopReduction:
    """Two-stage reduction of the open-loop plant."""

    g_low: StateSpaceModel     # spurious near-zero loop poles removed
    g_r: StateSpaceModel       # additionally truncated above omega_high
    n_low_removed: int
    n_high_removed: int


def reduce_open_loop(
    model: StateSpaceModel,
    omega_low: float = 0.01,
    omega_high: float = 500.0,
) -> OpenLoopReduction:
    """Strip the near-zero loop-closure poles, then the band above.

    The first stage removes the poles with magnitude below
    ``omega_low`` (12 per kinematic loop of the truss, residue-free in
    every external channel of the assembled spacecraft); the second
    truncates everything above ``omega_high``.
    """
    g_low, rep1 = reduce_model(model, omega_low=omega_low)
    g_r, rep2 = reduce_model(g_low, omega_high=omega_high)
    return OpenLoopReduction(
        g_low=g_low,
        g_r=g_r,
        n_low_removed=rep1.n_low_removed,
        n_high_removed=rep2.n_high_removed,
    )
