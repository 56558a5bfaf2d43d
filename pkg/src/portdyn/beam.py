"""Euler-Bernoulli finite-element beam and its double-port model.

The beam is discretized with classical 12-DOF elements: linear axial and
torsional interpolation, cubic Hermite bending in both transverse planes.
DOF order per node is [u_x, u_y, u_z, theta_x, theta_y, theta_z] in the
body frame, with the beam axis along local x (base node P at x=0, tip
node C at x=l).

From the clamped-P mesh we extract the standard modal data (frequencies,
mass-normalized shapes, participation toward rigid base motion, rigid
mass transported to P) and realize the double-port dynamics

    eta_dd + 2 Xi Omega eta_d + Omega^2 eta = Phi_C^T W_C - L a_P
    a_C = Phi_C eta_dd + tau_CP a_P
    W_P = -(M0_P a_P + L^T eta_dd) + tau_CP^T W_C

with conjugate channel pairs at the tip C (wrench in, acceleration out)
and at the base P (acceleration in, wrench out).  Modal damping is
2 xi omega_k per mode.  Torsion uses G = E/(2(1+nu)); for a solid square
section the Saint-Venant torsion constant is roughly 2.25*(h/2)^4, which
is the default when J_t is not given (torsional modes sit far above the
band of interest, so this choice is insensitive).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from portdyn.frames import FrameRotation, transport
from portdyn.ss import StateSpaceModel, port_labels

__all__ = [
    "BeamSpec",
    "ClampedFreeModes",
    "beam_fe_matrices",
    "clamped_free_modes",
    "double_port_beam",
]


@dataclass(frozen=True)
class BeamSpec:
    """Geometric and material data of one uniform beam."""

    l: float
    S: float
    rho: float
    E: float
    nu: float
    I_y: float
    I_z: float
    xi: float
    J_t: float | None = None
    n_elem: int = 5

    def __post_init__(self):
        for name in ("l", "S", "rho", "E", "nu", "I_y", "I_z", "xi"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"BeamSpec.{name} must be strictly positive")
        if not (0.0 < self.xi <= 0.1):
            raise ValueError("BeamSpec.xi must lie in (0, 0.1]")
        if self.n_elem < 2:
            raise ValueError("BeamSpec.n_elem must be at least 2")
        if self.J_t is not None and self.J_t <= 0.0:
            raise ValueError("BeamSpec.J_t must be strictly positive")

    @property
    def torsion_constant(self) -> float:
        if self.J_t is not None:
            return self.J_t
        h = np.sqrt(self.S)
        return 2.25 * (0.5 * h) ** 4

    @property
    def shear_modulus(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def mass(self) -> float:
        return self.rho * self.S * self.l

    def with_length(self, l: float) -> "BeamSpec":
        return BeamSpec(l, self.S, self.rho, self.E, self.nu, self.I_y,
                        self.I_z, self.xi, self.J_t, self.n_elem)


def _element_matrices(spec: BeamSpec, le: float) -> tuple[np.ndarray, np.ndarray]:
    """12x12 consistent element mass and stiffness in the body frame."""
    E, rho, S = spec.E, spec.rho, spec.S
    G = spec.shear_modulus
    Jt = spec.torsion_constant
    Ip = spec.I_y + spec.I_z
    L = le
    K = np.zeros((12, 12))
    M = np.zeros((12, 12))

    def put(mat, dofs, block):
        mat[np.ix_(dofs, dofs)] += block

    # axial: u_x at nodes a, b
    ka = E * S / L * np.array([[1.0, -1.0], [-1.0, 1.0]])
    ma = rho * S * L / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    put(K, [0, 6], ka)
    put(M, [0, 6], ma)

    # torsion: theta_x
    kt = G * Jt / L * np.array([[1.0, -1.0], [-1.0, 1.0]])
    mt = rho * Ip * L / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    put(K, [3, 9], kt)
    put(M, [3, 9], mt)

    # bending in x-y plane: (u_y, theta_z)
    kb = np.array(
        [
            [12.0, 6.0 * L, -12.0, 6.0 * L],
            [6.0 * L, 4.0 * L**2, -6.0 * L, 2.0 * L**2],
            [-12.0, -6.0 * L, 12.0, -6.0 * L],
            [6.0 * L, 2.0 * L**2, -6.0 * L, 4.0 * L**2],
        ]
    )
    mb = np.array(
        [
            [156.0, 22.0 * L, 54.0, -13.0 * L],
            [22.0 * L, 4.0 * L**2, 13.0 * L, -3.0 * L**2],
            [54.0, 13.0 * L, 156.0, -22.0 * L],
            [-13.0 * L, -3.0 * L**2, -22.0 * L, 4.0 * L**2],
        ]
    )
    put(K, [1, 5, 7, 11], E * spec.I_z / L**3 * kb)
    put(M, [1, 5, 7, 11], rho * S * L / 420.0 * mb)

    # bending in x-z plane: (u_z, theta_y); rotation sign flips vs x-y
    flip = np.diag([1.0, -1.0, 1.0, -1.0])
    put(K, [2, 4, 8, 10], E * spec.I_y / L**3 * (flip @ kb @ flip))
    put(M, [2, 4, 8, 10], rho * S * L / 420.0 * (flip @ mb @ flip))
    return M, K


def beam_fe_matrices(spec: BeamSpec) -> tuple[np.ndarray, np.ndarray]:
    """Assembled consistent mass and stiffness, (n_elem+1)*6 DOF each.

    Node 0 is the base P, node n_elem the tip C; K has exactly the six
    rigid-body null directions.
    """
    ne = spec.n_elem
    le = spec.l / ne
    Me, Ke = _element_matrices(spec, le)
    ndof = 6 * (ne + 1)
    M = np.zeros((ndof, ndof))
    K = np.zeros((ndof, ndof))
    for e in range(ne):
        sl = slice(6 * e, 6 * e + 12)
        M[sl, sl] += Me
        K[sl, sl] += Ke
    return M, K


@dataclass(frozen=True)
class ClampedFreeModes:
    """Modal data of the beam clamped at P, free elsewhere."""

    omega: np.ndarray          # ascending natural frequencies, rad/s
    Phi: np.ndarray            # mass-normalized shapes over free DOFs
    L_P: np.ndarray            # participation toward rigid base motion at P
    M0_P: np.ndarray           # 6x6 rigid mass matrix at P
    Phi_C: np.ndarray          # shape rows at the tip node C
    tau_CP: np.ndarray         # 6x6 rigid transport, acc at P -> acc at C

    def __post_init__(self):
        if np.any(np.diff(self.omega) < 0):
            raise ValueError("frequencies must be ascending")


def clamped_free_modes(spec: BeamSpec) -> ClampedFreeModes:
    M, K = beam_fe_matrices(spec)
    base = np.arange(6)
    free = np.arange(6, M.shape[0])
    M_ff = M[np.ix_(free, free)]
    M_fP = M[np.ix_(free, base)]
    M_PP = M[np.ix_(base, base)]
    K_ff = K[np.ix_(free, free)]
    K_fP = K[np.ix_(free, base)]

    # static transport of imposed base motion; equals the rigid transport
    # exactly because rigid motion is stress-free
    T = -sla.solve(K_ff, K_fP, assume_a="sym")
    try:
        w2, Phi = sla.eigh(K_ff, M_ff)
    except sla.LinAlgError as exc:
        raise RuntimeError("modal extraction failed") from exc
    w2 = np.maximum(w2, 0.0)
    omega = np.sqrt(w2)

    L_P = Phi.T @ (M_ff @ T + M_fP)
    M0 = M_PP + M[np.ix_(base, free)] @ T + T.T @ M_fP + T.T @ M_ff @ T
    M0 = 0.5 * (M0 + M0.T)
    tip = slice(M_ff.shape[0] - 6, M_ff.shape[0])
    return ClampedFreeModes(
        omega=omega,
        Phi=Phi,
        L_P=L_P,
        M0_P=M0,
        Phi_C=Phi[tip, :],
        tau_CP=transport(np.array([-spec.l, 0.0, 0.0])),
    )


def double_port_beam(
    spec: BeamSpec,
    frame: FrameRotation,
    P: str,
    C: str,
) -> StateSpaceModel:
    """Double-port beam model with channels expressed in the parent frame.

    Input ports: ``W:{C}`` (wrench applied at the tip, 6) then ``a:{P}``
    (imposed acceleration twist at the base, 6).  Output ports: ``a:{C}``
    (tip acceleration twist) then ``W:{P}`` (wrench the beam applies to
    whatever imposes the base motion).  All four ports are rotated from
    the body frame by ``frame``.
    """
    if P == C:
        raise ValueError("P and C must be distinct node names")
    modes = clamped_free_modes(spec)
    nm = modes.omega.size
    Om2 = np.diag(modes.omega**2)
    Dmp = np.diag(2.0 * spec.xi * modes.omega)
    PhiC = modes.Phi_C
    L_P = modes.L_P
    tau = modes.tau_CP

    A = np.block([[np.zeros((nm, nm)), np.eye(nm)], [-Om2, -Dmp]])
    B = np.vstack(
        [np.zeros((nm, 12)), np.hstack([PhiC.T, -L_P])]
    )
    # eta_dd = [-Om2, -Dmp] x + [PhiC.T, -L_P] u
    Cacc = np.hstack([-Om2, -Dmp])
    C_mat = np.vstack([PhiC @ Cacc, -L_P.T @ Cacc])
    D_mat = np.vstack(
        [
            np.hstack([PhiC @ PhiC.T, tau - PhiC @ L_P]),
            np.hstack([tau.T - L_P.T @ PhiC.T, L_P.T @ L_P - modes.M0_P]),
        ]
    )
    R6 = frame.R6
    Rin = sla.block_diag(R6.T, R6.T)
    Rout = sla.block_diag(R6, R6)
    labels_in = tuple(port_labels(f"W:{C}", 6) + port_labels(f"a:{P}", 6))
    labels_out = tuple(port_labels(f"a:{C}", 6) + port_labels(f"W:{P}", 6))
    return StateSpaceModel(
        A, B @ Rin, Rout @ C_mat, Rout @ D_mat @ Rin, labels_in, labels_out
    )
