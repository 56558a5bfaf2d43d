"""State-space algebra: interconnection, inversion, reduction, norms."""

import numpy as np
import pytest

from portdyn.ss import (
    StateSpaceModel,
    dc_gain,
    freq_response,
    hinf_norm,
    interconnect,
    invert_channels,
    modal_realization,
    port_labels,
    reduce_model,
    relabel_ports,
    static_model,
)


def second_order(omega, zeta, gain=1.0):
    A = np.array([[0.0, 1.0], [-omega**2, -2.0 * zeta * omega]])
    B = np.array([[0.0], [gain * omega**2]])
    C = np.array([[1.0, 0.0]])
    D = np.zeros((1, 1))
    return StateSpaceModel(A, B, C, D, ("u",), ("y",))


def random_stable(rng, n_modes=4, m=2, p=2):
    """Random damped modal system."""
    om = rng.uniform(0.5, 50.0, n_modes)
    ze = rng.uniform(0.05, 0.8, n_modes)
    blocks = []
    for w, z in zip(om, ze):
        blocks.append(np.array([[0.0, 1.0], [-w * w, -2 * z * w]]))
    import scipy.linalg as sla

    A = sla.block_diag(*blocks)
    B = rng.standard_normal((2 * n_modes, m))
    C = rng.standard_normal((p, 2 * n_modes))
    D = 0.1 * rng.standard_normal((p, m))
    ins = tuple(f"u[{i}]" for i in range(m))
    outs = tuple(f"y[{i}]" for i in range(p))
    return StateSpaceModel(A, B, C, D, ins, outs)


class TestHinfNorm:
    def test_second_order_peak_analytic(self):
        # peak of w0^2/(s^2+2 zeta w0 s + w0^2) is 1/(2 zeta sqrt(1-zeta^2))
        zeta = 0.5
        g = second_order(3.0, zeta)
        expect = 1.0 / (2.0 * zeta * np.sqrt(1.0 - zeta**2))
        assert hinf_norm(g, tol=1e-8) == pytest.approx(expect, rel=1e-6)

    def test_static_gain_only(self):
        g = static_model(np.array([[3.0, 4.0]]), ("u[0]", "u[1]"), ("y",))
        assert hinf_norm(g) == pytest.approx(5.0, rel=1e-12)

    def test_unstable_raises(self):
        A = np.array([[0.1]])
        g = StateSpaceModel(A, np.eye(1), np.eye(1), np.zeros((1, 1)), ("u",), ("y",))
        with pytest.raises(ValueError):
            hinf_norm(g)

    def test_bisection_grid_agreement(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            g = random_stable(rng)
            nb = hinf_norm(g, tol=1e-6)
            ng = hinf_norm(g, method="grid")
            assert abs(nb - ng) <= 1e-3 * nb


class TestInterconnect:
    def test_series_spring(self):
        # force through a static gain into a second-order plant
        g = second_order(2.0, 0.1)
        amp = static_model(np.array([[3.0]]), ("cmd",), ("force",))
        cl = interconnect(
            [amp, g],
            [((0, "force"), (1, "u"), 1.0)],
            [("cmd", [((0, "cmd"), 1.0)])],
            [("y", [((1, "y"), 1.0)])],
        )
        assert dc_gain(cl)[0, 0] == pytest.approx(3.0, rel=1e-12)

    def test_feedback_shifts_poles(self):
        g = second_order(2.0, 0.1)
        cl = interconnect(
            [g],
            [((0, "y"), (0, "u"), -3.0)],
            [("r", [((0, "u"), 1.0)])],
            [("y", [((0, "y"), 1.0)])],
        )
        # stiffness scales by 1 + 3: poles move from 2 to 4 rad/s
        assert np.max(np.abs(cl.poles())) == pytest.approx(4.0, rel=1e-12)

    def test_single_label_entry(self):
        g = random_stable(np.random.default_rng(0), m=2, p=2)
        cl = interconnect(
            [g],
            [],
            [("u", [((0, "u"), 1.0)])],
            [("pick", [((0, "y[1]"), 1.0)])],
        )
        assert cl.output_labels == ("pick[0]",)
        assert np.allclose(cl.C, g.C[1:2])

    def test_unknown_port_rejected(self):
        g = second_order(1.0, 0.5)
        with pytest.raises(ValueError):
            interconnect([g], [((0, "nope"), (0, "u"), 1.0)], [], [])


class TestInvertChannels:
    def test_involution(self):
        g = random_stable(np.random.default_rng(3), n_modes=3, m=2, p=2)
        # make the feedthrough invertible on channel 0
        g = StateSpaceModel(
            g.A, g.B, g.C, g.D + np.eye(2), g.input_labels, g.output_labels
        )
        gi = invert_channels(invert_channels(g, [0]), [0])
        w = 2.7
        r0 = freq_response(g, [w]).values[0]
        r1 = freq_response(gi, [w]).values[0]
        assert np.allclose(r0, r1, atol=1e-9 * np.abs(r0).max())

    def test_swaps_boundary_condition(self):
        # mass-spring with acceleration output (nonzero feedthrough);
        # the inverse transfer must be the exact reciprocal
        m, c, k = 2.0, 0.3, 8.0
        A = np.array([[0.0, 1.0], [-k / m, -c / m]])
        B = np.array([[0.0], [1.0 / m]])
        C = np.array([[-k / m, -c / m]])
        D = np.array([[1.0 / m]])
        g = StateSpaceModel(A, B, C, D, ("u",), ("acc",))
        gi = invert_channels(g, [0])
        w = 1.7
        r = freq_response(g, [w]).values[0, 0, 0]
        ri = freq_response(gi, [w]).values[0, 0, 0]
        assert r * ri == pytest.approx(1.0, rel=1e-10)


class TestReduceModel:
    def test_high_truncation_counts(self):
        rng = np.random.default_rng(11)
        g = random_stable(rng, n_modes=6)
        cut = sorted(np.abs(g.poles()))[7] * 1.001
        gr, rep = reduce_model(g, omega_high=cut)
        assert rep.n_high_removed == 4
        assert gr.n == 8
        assert rep.n_kept == 8

    def test_residualize_preserves_dc(self):
        rng = np.random.default_rng(12)
        g = random_stable(rng, n_modes=6)
        gr, _ = reduce_model(g, omega_high=10.0, residualize=True)
        assert np.allclose(dc_gain(gr), dc_gain(g), atol=1e-9)

    def test_kept_dynamics_match(self):
        rng = np.random.default_rng(13)
        g = random_stable(rng, n_modes=5)
        gr, _ = reduce_model(g, omega_high=np.inf)
        w = np.logspace(-1, 2, 40)
        r0 = freq_response(g, w).values
        r1 = freq_response(gr, w).values
        assert np.max(np.abs(r0 - r1)) < 1e-8 * np.max(np.abs(r0))

    def test_labels_survive(self):
        g = random_stable(np.random.default_rng(1))
        gr, _ = reduce_model(g, omega_high=20.0)
        assert gr.input_labels == g.input_labels
        assert gr.output_labels == g.output_labels


def test_modal_realization_diagonalizes():
    g = random_stable(np.random.default_rng(5))
    gm = modal_realization(g)
    # block structure: no coupling outside 2x2 diagonal blocks
    A = np.abs(gm.A.copy())
    for k in range(0, A.shape[0], 2):
        A[k : k + 2, k : k + 2] = 0.0
    assert np.max(A) < 1e-8
    w = 3.3
    assert np.allclose(
        freq_response(g, [w]).values, freq_response(gm, [w]).values, atol=1e-8
    )


def test_relabel_and_port_labels():
    g = second_order(1.0, 0.5)
    g2 = relabel_ports(g, {"u": "force", "y": "pos"})
    assert g2.input_labels == ("force",)
    assert port_labels("a:N1", 2) == ["a:N1[0]", "a:N1[1]"]
