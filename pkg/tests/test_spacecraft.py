"""Assembled spacecraft plant: components, DC physics, reduction."""

import numpy as np
import pytest

from portdyn.frames import FrameRotation, transport
from portdyn.spacecraft import (
    PmaConfig,
    SpacecraftConfig,
    UncertainSample,
    assemble_open_loop,
    pma_model,
    reduce_open_loop,
    rigid_body_multiport,
    sadm_panel,
    solar_panel_model,
    total_mass_matrix,
    truss_node_hub,
)
from portdyn.ss import dc_gain, freq_response, reduce_model
from portdyn.truss import build_ttruss

CONFIG = SpacecraftConfig(n_elem=2)


@pytest.fixture(scope="module")
def nominal_plant():
    return assemble_open_loop(0.03, UncertainSample(), CONFIG)


class TestUncertainSample:
    def test_box_validation(self):
        with pytest.raises(ValueError):
            UncertainSample(delta_mass=1.5)
        with pytest.raises(ValueError):
            UncertainSample(tau=-2.0)

    def test_joint_angle_map(self):
        assert UncertainSample(tau=0.0).theta == 0.0
        assert UncertainSample(tau=1.0).theta == pytest.approx(np.pi)
        assert UncertainSample(tau=-1.0).theta == pytest.approx(-np.pi)


class TestRigidBody:
    def test_collocated_block_is_transported_inverse(self):
        pts = {"P": np.array([0.3, -0.2, 0.5]), "Q": np.zeros(3)}
        inertia = np.diag([4.0, 5.0, 6.0])
        g = rigid_body_multiport(10.0, inertia, np.array([0.1, 0.0, 0.0]), pts)
        import scipy.linalg as sla

        mg = sla.block_diag(10.0 * np.eye(3), inertia)
        tau = transport(np.array([0.1, 0.0, 0.0]) - pts["P"])
        assert np.allclose(g.D[:6, :6], tau @ np.linalg.inv(mg) @ tau.T)

    def test_symmetry(self):
        pts = {"A": np.zeros(3), "B": np.array([1.0, 2.0, 3.0])}
        g = rigid_body_multiport(2.0, np.eye(3), np.zeros(3), pts)
        assert np.allclose(g.D, g.D.T, atol=1e-12)


class TestSolarPanel:
    def test_dc_reaction_is_rigid_mass(self):
        g = solar_panel_model(CONFIG.panel)
        from portdyn.frames import rigid_mass_matrix

        m0 = rigid_mass_matrix(
            CONFIG.panel.mass, CONFIG.panel.inertia_g, CONFIG.panel.r_og
        )
        assert np.allclose(dc_gain(g), -m0, atol=1e-8)

    def test_frequency_shift(self):
        g0 = solar_panel_model(CONFIG.panel, delta_freq=0.0)
        g1 = solar_panel_model(CONFIG.panel, delta_freq=1.0)
        w0 = np.sort(np.abs(g0.poles().imag))[-1:]
        w1 = np.sort(np.abs(g1.poles().imag))
        # only the first mode moves, by +20%
        assert np.min(np.abs(g1.poles()[np.abs(g1.poles().imag) < 4.0].imag)).real \
            == pytest.approx(1.2 * CONFIG.panel.omega[0], rel=1e-3)
        assert w1[-1] == pytest.approx(w0[-1], rel=1e-9)


class TestSadmPanel:
    def test_dc_disturbance_deflection(self):
        g = sadm_panel(CONFIG, "SP1", FrameRotation.identity())
        d = dc_gain(g)
        ip = g.input_port("p:SP1")
        ot = g.output_port("theta:SP1")
        assert d[ot, ip][0, 0] == pytest.approx(1.0 / CONFIG.k_joint, rel=1e-9)

    def test_stable_and_free_hinge_limit(self):
        g = sadm_panel(CONFIG, "SP1", FrameRotation.identity())
        assert g.is_stable()
        soft = sadm_panel(
            CONFIG, "SP1", FrameRotation.identity(), k_joint=1e-6, f_joint=1e-6
        )
        # hinge pole collapses toward the origin when the joint releases
        assert np.min(np.abs(soft.poles())) < 1e-2


class TestPma:
    def test_dc_stroke_per_force(self):
        g = pma_model(PmaConfig())
        d = dc_gain(g)
        # stroke output, force input: 1/k = 0.1 m/N
        assert d[6, 6] == pytest.approx(0.1, rel=1e-9)

    def test_proof_mass_pole(self):
        g = pma_model(PmaConfig())
        lam = g.poles()
        assert np.allclose(np.abs(lam), 10.0, rtol=1e-12)

    def test_dc_reaction_carries_total_mass(self):
        g = pma_model(PmaConfig())
        d = dc_gain(g)
        # uniform y acceleration: reaction -m_total along the stroke axis
        a = np.zeros(7)
        a[1] = 1.0
        w = d @ a
        assert w[1] == pytest.approx(-PmaConfig().total_mass, rel=1e-9)


class TestAssembledPlant:
    def test_channel_layout(self, nominal_plant):
        g = nominal_plant.model
        assert len(g.input_labels) == 12
        assert len(g.output_labels) == 20
        assert g.input_labels[0] == "p:SP1[0]"
        assert g.output_labels[0].startswith("LOS[0]")

    def test_total_mass_reference(self, nominal_plant):
        assert nominal_plant.total_mass == pytest.approx(1165.51, rel=1e-4)
        assert nominal_plant.mass_matrix[0, 0] == pytest.approx(
            nominal_plant.total_mass, rel=1e-9
        )

    def test_near_zero_pole_count(self, nominal_plant):
        lam = nominal_plant.model.poles()
        assert np.sum(np.abs(lam) < 1e-2) == 540

    def test_dc_force_response_is_rigid(self, nominal_plant):
        red = reduce_open_loop(nominal_plant.model)
        d = dc_gain(red.g_low)
        iw = nominal_plant.model.input_port("W:P1")
        oa = nominal_plant.model.output_port("a:P1")
        dc = d[oa, iw]
        expect = np.linalg.inv(nominal_plant.mass_matrix)
        assert np.max(np.abs(dc - expect)) < 1e-4 * np.max(np.abs(expect))

    def test_geometric_mass_matrix_matches(self, nominal_plant):
        m = total_mass_matrix(0.03, UncertainSample(), CONFIG)
        assert np.allclose(m, nominal_plant.mass_matrix, atol=1e-9)

    def test_panel_angle_symmetry(self):
        # the two panels are mounted back to back: flipping both joints
        # by a half turn reproduces the same plant
        a = assemble_open_loop(0.03, UncertainSample(tau=1.0), CONFIG)
        b = assemble_open_loop(0.03, UncertainSample(tau=-1.0), CONFIG)
        w = [0.8, 4.0]
        ra = freq_response(reduce_model(a.model, omega_low=1e-2)[0], w).values
        rb = freq_response(reduce_model(b.model, omega_low=1e-2)[0], w).values
        assert np.max(np.abs(ra - rb)) < 1e-5 * np.max(np.abs(ra))

    def test_prebuilt_truss_equivalent(self, nominal_plant):
        tr, _ = reduce_model(build_ttruss(0.03, 2), omega_low=1e-2)
        fast = assemble_open_loop(0.03, UncertainSample(), CONFIG, truss=tr)
        assert np.sum(np.abs(fast.model.poles()) < 1e-2) == 0
        w = [1.5, 12.0]
        r0 = freq_response(
            reduce_model(nominal_plant.model, omega_low=1e-2)[0], w
        ).values
        r1 = freq_response(fast.model, w).values
        assert np.max(np.abs(r0 - r1)) < 1e-7 * np.max(np.abs(r0))

    def test_reduction_band_limit(self, nominal_plant):
        red = reduce_open_loop(nominal_plant.model)
        assert red.n_low_removed == 540
        lam = red.g_r.poles()
        assert np.max(np.abs(lam)) <= 500.0
        assert red.g_r.is_stable()

    def test_hub_node_map(self):
        # truss frame maps into the hub by a half turn about (1,1,0)
        assert np.allclose(truss_node_hub("N1"), [-0.5, -0.5, 1.0])
        assert np.allclose(truss_node_hub("N17"), [-1.5, -0.5, -2.0])
        assert np.allclose(truss_node_hub("N20"), [1.5, -0.5, -2.0])
