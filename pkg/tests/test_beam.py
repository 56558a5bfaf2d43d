"""Finite-element beam and its double-port state-space model."""

import numpy as np
import pytest

from portdyn.beam import (
    BeamSpec,
    beam_fe_matrices,
    clamped_free_modes,
    double_port_beam,
)
from portdyn.frames import FrameRotation, rod_mass_matrix, transport
from portdyn.ss import dc_gain

STEEL = dict(rho=7800.0, E=210e9, nu=0.3)


def make_spec(l=2.0, h=0.02, n_elem=5, xi=0.001):
    return BeamSpec(
        l=l, S=h * h, I_y=h**4 / 12.0, I_z=h**4 / 12.0,
        xi=xi, n_elem=n_elem, **STEEL,
    )


class TestBeamSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            make_spec(l=-1.0)
        with pytest.raises(ValueError):
            make_spec(n_elem=1)
        with pytest.raises(ValueError):
            make_spec(xi=0.5)

    def test_mass(self):
        sp = make_spec()
        assert sp.mass == pytest.approx(sp.rho * sp.S * sp.l, rel=1e-14)


class TestFeMatrices:
    def test_rigid_body_nullspace(self):
        sp = make_spec(n_elem=3)
        M, K = beam_fe_matrices(sp)
        w = np.linalg.eigvalsh(K)
        # rigid eigenvalues sit at round-off (~1e-8), the first elastic
        # one at ~1.6e3
        assert np.sum(np.abs(w) < 1.0) == 6

    def test_total_mass(self):
        sp = make_spec(n_elem=4)
        M, _ = beam_fe_matrices(sp)
        # translate the whole beam: kinetic energy reads the full mass
        ndof = M.shape[0]
        ux = np.zeros(ndof)
        ux[0::6] = 1.0
        assert ux @ M @ ux == pytest.approx(sp.mass, rel=1e-12)


class TestClampedFreeModes:
    def test_first_bending_frequency(self):
        # (beta l)^2 sqrt(EI/(rho S l^4)) with beta1 l = 1.8751041
        sp = make_spec(n_elem=20)
        modes = clamped_free_modes(sp)
        w1 = 1.8751041**2 * np.sqrt(
            sp.E * sp.I_z / (sp.rho * sp.S * sp.l**4)
        )
        # first two modes are the bending pair (y and z are identical)
        assert modes.omega[0] == pytest.approx(w1, rel=2e-4)
        assert modes.omega[1] == pytest.approx(w1, rel=2e-4)

    def test_tip_compliance_analytic(self):
        # Hermite cubics represent the exact static solution, so the
        # condensed tip compliance is l^3/(3 E I) at any mesh
        sp = make_spec(n_elem=2)
        modes = clamped_free_modes(sp)
        phi_tip_z = modes.Phi_C[2]
        compliance = phi_tip_z @ np.diag(1.0 / modes.omega**2) @ phi_tip_z
        expect = sp.l**3 / (3.0 * sp.E * sp.I_z)
        assert compliance == pytest.approx(expect, rel=1e-10)

    def test_rigid_mass_at_base(self):
        sp = make_spec(n_elem=6)
        modes = clamped_free_modes(sp)
        # FE consistent mass condensed statically equals the slender-rod
        # rigid matrix at the base (rotary inertia of the section is
        # neglected in the rod formula; tolerance covers it)
        rod = rod_mass_matrix(
            np.zeros(3), np.array([sp.l, 0.0, 0.0]), sp.mass, at=np.zeros(3)
        )
        # the rod formula has no torsional inertia; skip the [3,3] entry
        diff = modes.M0_P - rod
        diff[3, 3] = 0.0
        assert np.max(np.abs(diff)) < 1e-8 * sp.mass


class TestDoublePortBeam:
    def test_port_layout(self):
        sp = make_spec()
        g = double_port_beam(sp, FrameRotation.identity(), "P", "C")
        assert g.input_labels[:6] == tuple(f"W:C[{i}]" for i in range(6))
        assert g.output_labels[6:] == tuple(f"W:P[{i}]" for i in range(6))
        assert g.n == 2 * clamped_free_modes(sp).omega.size

    def test_dc_reaction_is_rigid_mass(self):
        sp = make_spec()
        g = double_port_beam(sp, FrameRotation.identity(), "P", "C")
        d = dc_gain(g)
        react = d[6:, 6:]  # a:P -> W:P
        assert np.allclose(react, -clamped_free_modes(sp).M0_P, atol=1e-8)

    def test_dc_tip_acc_is_rigid_transport(self):
        sp = make_spec()
        g = double_port_beam(sp, FrameRotation.identity(), "P", "C")
        d = dc_gain(g)
        tau = transport(np.array([-sp.l, 0.0, 0.0]))
        assert np.allclose(d[:6, 6:], tau, atol=1e-9)

    def test_rotation_covariance(self):
        sp = make_spec()
        rot = FrameRotation.about_z(0.7)
        g0 = double_port_beam(sp, FrameRotation.identity(), "P", "C")
        g1 = double_port_beam(sp, rot, "P", "C")
        R6 = rot.R6
        import scipy.linalg as sla

        T = sla.block_diag(R6, R6)
        assert np.allclose(g1.D, T @ g0.D @ T.T, atol=1e-9)

    def test_stable(self):
        g = double_port_beam(make_spec(), FrameRotation.identity(), "P", "C")
        assert g.is_stable()
