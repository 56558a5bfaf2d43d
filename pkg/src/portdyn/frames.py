"""Rotations, rigid kinematic transports and rigid mass matrices.

Conventions used throughout the package:

- a 6-vector "twist" stacks linear quantities on top of angular ones,
  e.g. an acceleration twist is ``[a; wdot]`` and a wrench is ``[F; M]``;
- the kinematic transport ``tau(r_XY)`` with ``r_XY = p_Y - p_X`` maps the
  acceleration twist at Y to the one at X (rigid link), and its transpose
  maps a wrench applied at X to the equivalent wrench at Y:

      acc_X = tau(r_XY) @ acc_Y
      W_Y   = tau(r_XY).T @ W_X
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def skew(r) -> np.ndarray:
    """Skew-symmetric cross-product matrix: skew(r) @ v == np.cross(r, v)."""
    x, y, z = np.asarray(r, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def transport(r_xy) -> np.ndarray:
    """6x6 rigid kinematic model between two points of the same body.

    ``r_xy`` is the vector from point X to point Y.  ``transport(r_xy)``
    maps the acceleration twist at Y to the acceleration twist at X.
    """
    t = np.eye(6)
    t[:3, 3:] = skew(r_xy)
    return t


@dataclass(frozen=True)
class FrameRotation:
    """Proper rotation taking local-frame components to parent-frame ones."""

    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if R.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-10):
            raise ValueError("rotation matrix is not orthonormal")
        if np.linalg.det(R) < 0.0:
            raise ValueError("rotation matrix must have det +1")
        object.__setattr__(self, "R", R)

    @property
    def R6(self) -> np.ndarray:
        """Block-diagonal twice-3x3 form acting on 6-vector twists/wrenches."""
        out = np.zeros((6, 6))
        out[:3, :3] = self.R
        out[3:, 3:] = self.R
        return out

    @staticmethod
    def identity() -> "FrameRotation":
        return FrameRotation(np.eye(3))

    @staticmethod
    def about_x(angle: float) -> "FrameRotation":
        c, s = np.cos(angle), np.sin(angle)
        return FrameRotation(np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]]))

    @staticmethod
    def about_y(angle: float) -> "FrameRotation":
        c, s = np.cos(angle), np.sin(angle)
        return FrameRotation(np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]]))

    @staticmethod
    def about_z(angle: float) -> "FrameRotation":
        c, s = np.cos(angle), np.sin(angle)
        return FrameRotation(np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]]))

    @staticmethod
    def align_x(direction) -> "FrameRotation":
        """Rotation whose first column is the unit vector along ``direction``.

        The remaining axes are picked deterministically: y = z_glob x x
        unless the direction is (anti)parallel to the global z axis.
        """
        x = np.asarray(direction, dtype=float)
        n = np.linalg.norm(x)
        if n == 0.0:
            raise ValueError("zero direction")
        x = x / n
        ref = np.array([0.0, 0.0, 1.0])
        if abs(x @ ref) > 1.0 - 1e-9:
            ref = np.array([0.0, 1.0, 0.0])
        y = np.cross(ref, x)
        y /= np.linalg.norm(y)
        z = np.cross(x, y)
        return FrameRotation(np.column_stack([x, y, z]))


def rigid_mass_matrix(mass: float, inertia_g, r_pg) -> np.ndarray:
    """6x6 rigid mass matrix of a body expressed at point P.

    ``inertia_g`` is the 3x3 inertia at the center of mass G and ``r_pg``
    the vector from P to G.  Satisfies  W_P = -M0_P @ acc_P  for a free
    rigid body under imposed base acceleration.
    """
    inertia_g = np.asarray(inertia_g, dtype=float)
    c = skew(r_pg)
    m0 = np.zeros((6, 6))
    m0[:3, :3] = mass * np.eye(3)
    m0[:3, 3:] = -mass * c
    m0[3:, :3] = mass * c
    m0[3:, 3:] = inertia_g - mass * c @ c
    return m0


def rod_mass_matrix(p_a, p_b, mass: float, at=None) -> np.ndarray:
    """6x6 rigid mass matrix of a slender uniform rod, expressed at ``at``.

    The rod runs from ``p_a`` to ``p_b``; ``at`` defaults to ``p_a``.
    Transverse inertia about the center is m*l^2/12, axial inertia zero.
    """
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    if at is None:
        at = p_a
    at = np.asarray(at, dtype=float)
    d = p_b - p_a
    length = np.linalg.norm(d)
    u = d / length
    # inertia at CoG: (m l^2 / 12) * (I - u u^T)
    i_g = (mass * length**2 / 12.0) * (np.eye(3) - np.outer(u, u))
    g = 0.5 * (p_a + p_b)
    return rigid_mass_matrix(mass, i_g, g - at)
