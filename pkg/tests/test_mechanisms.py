"""Mechanism assemblies against the monolithic finite-element oracle."""

import numpy as np
import pytest

from portdyn.beam import BeamSpec
from portdyn.mechanisms import (
    CubeSpec,
    cube,
    cube_graph,
    l_chain,
    l_chain_graph,
    monolithic_fem_oracle,
    oracle_base_frf,
    port_modal_data,
    rigid_mass_oracle,
    square,
    square_graph,
    triangle,
    triangle_graph,
)
from portdyn.ss import dc_gain, invert_channels, reduce_model

ALU = dict(rho=2700.0, E=70e9, nu=0.35)


def make_spec(l=1.0, h=0.03, n_elem=3, xi=1e-6):
    # near-zero damping so port poles and undamped oracle frequencies
    # can be compared at tight tolerance
    return BeamSpec(
        l=l, S=h * h, I_y=h**4 / 12.0, I_z=h**4 / 12.0,
        xi=xi, n_elem=n_elem, **ALU,
    )


def port_frequencies(model, n, cutoff=1.0):
    lam = model.poles()
    w = np.sort(np.abs(lam[lam.imag > cutoff]))
    assert w.size >= n
    return w[:n]


def assert_freqs_match(model, oracle, n, rtol=1e-6):
    w = port_frequencies(model, n)
    assert np.allclose(w, oracle.omega[:n], rtol=rtol)


class TestLChain:
    def test_oracle_equivalence(self):
        s1, s2 = make_spec(), make_spec(l=1.5)
        g = l_chain(s1, s2, np.pi / 3)
        orc = monolithic_fem_oracle(l_chain_graph(s1, s2, np.pi / 3))
        assert_freqs_match(g, orc, 8)
        gl, _ = reduce_model(g, omega_low=1.0)
        d = dc_gain(gl)
        rows = np.r_[0:6, 12:18]
        dc = d[np.ix_(rows, rows)]
        assert np.allclose(dc, orc.dc_map, rtol=1e-6, atol=1e-9)

    def test_ground_loop_near_zero_poles(self):
        # both ends clamped closes one loop through ground: 12 poles
        s1, s2 = make_spec(), make_spec(l=1.5)
        g = l_chain(s1, s2, np.pi / 3)
        lam = g.poles()
        assert np.sum(np.abs(lam) < 1.0) == 12
        assert l_chain_graph(s1, s2, np.pi / 3).loop_count == 1


class TestTriangle:
    def test_oracle_equivalence(self):
        specs = (make_spec(), make_spec(l=np.sqrt(2.0)), make_spec())
        g = triangle(specs)
        orc = monolithic_fem_oracle(triangle_graph(specs))
        assert_freqs_match(g, orc, 8)

    def test_one_loop_twelve_near_zero(self):
        specs = (make_spec(), make_spec(l=np.sqrt(2.0)), make_spec())
        g = triangle(specs)
        lam = g.poles()
        assert np.sum(np.abs(lam) < 1.0) == 12
        assert triangle_graph(specs).loop_count == 1


class TestSquare:
    def test_oracle_equivalence(self):
        specs = (make_spec(), make_spec(l=np.sqrt(2.0)), make_spec(),
                 make_spec(), make_spec())
        g = square(specs)
        orc = monolithic_fem_oracle(square_graph(specs))
        assert_freqs_match(g, orc, 8)
        gl, _ = reduce_model(g, omega_low=1.0)
        d = dc_gain(gl)
        assert np.allclose(d[:6, :6], orc.dc_map, rtol=1e-6, atol=1e-9)

    def test_two_loops(self):
        specs = (make_spec(), make_spec(l=np.sqrt(2.0)), make_spec(),
                 make_spec(), make_spec())
        assert square_graph(specs).loop_count == 2


@pytest.fixture(scope="module")
def cell():
    spec = make_spec(n_elem=2)
    cs = CubeSpec(1.0, 1.0, 1.0, spec)
    return cs, cube(cs)


class TestCube:
    def test_oracle_equivalence_coarse(self, cell):
        cs, g = cell
        orc = monolithic_fem_oracle(cube_graph(cs))
        assert_freqs_match(g, orc, 10)
        gl, _ = reduce_model(g, omega_low=1.0)
        d = dc_gain(gl)
        assert np.allclose(d[:24, :24], orc.dc_map, rtol=1e-6, atol=1e-8)

    def test_near_zero_count(self, cell):
        cs, g = cell
        # 13 edges, 8 nodes, 4 clamped: 9 independent loops, 12 poles each
        lam = g.poles()
        assert cube_graph(cs).loop_count == 9
        assert np.sum(np.abs(lam) < 1.0) == 108

    def test_port_modal_data_matches_oracle(self, cell):
        cs, g = cell
        clamped_n1 = invert_channels(g, range(6, 24))
        omega, L = port_modal_data(clamped_n1, n_modes=6)
        orc = monolithic_fem_oracle(cube_graph(cs, clamped=("N1",)))
        assert np.allclose(omega, orc.omega[:6], rtol=1e-6)
        for k in range(6):
            a, b = L[k], orc.participation[k]
            if a @ b < 0:
                a = -a
            assert np.max(np.abs(a - b)) < 1e-4 * np.max(np.abs(b))

    def test_oracle_frf_matches_port_response(self, cell):
        cs, g = cell
        clamped_n1 = invert_channels(g, range(6, 24))
        # stay away from resonances: at xi = 1e-6 a one-ppm frequency
        # offset between the two routes dominates the peak response
        ws = np.array([2.0, 25.0, 75.0])
        frf = oracle_base_frf(cube_graph(cs, clamped=("N1",)), ws, xi=1e-6)
        lam, V = np.linalg.eig(clamped_n1.A)
        Bv = np.linalg.solve(V, clamped_n1.B[:, :6])
        Cv = clamped_n1.C[:6] @ V
        for i, w in enumerate(ws):
            gp = (Cv / (1j * w - lam)) @ Bv + clamped_n1.D[:6, :6]
            assert np.linalg.norm(gp - frf[i]) < 1e-4 * np.linalg.norm(gp)


def test_rigid_mass_oracle_properties():
    spec = make_spec(n_elem=2)
    cs = CubeSpec(1.0, 1.0, 1.0, spec)
    graph = cube_graph(cs)
    m = rigid_mass_oracle(graph, "N1")
    assert np.allclose(m, m.T, atol=1e-12)
    total = 13 * 0.0
    total = sum(sp.mass for _, _, sp in graph.edges)
    assert m[0, 0] == pytest.approx(total, rel=1e-12)


def test_graph_rejects_bad_edge_length():
    from portdyn.mechanisms import MechanismGraph

    sp = make_spec(l=2.0)
    with pytest.raises(ValueError):
        MechanismGraph(
            nodes={"A": (0, 0, 0), "B": (1, 0, 0)},
            edges=(("A", "B", sp),),
            clamped=("A",),
        )
