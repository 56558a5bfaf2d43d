"""Structure/control co-optimization: objective, inner search, PSO, sweep."""

import numpy as np
import pytest

from portdyn.codesign import (
    CodesignConfig,
    inner_synthesis,
    objective,
    pso_codesign,
    synthesis_samples,
    worst_case_sweep,
)
from portdyn.spacecraft import SpacecraftConfig
from portdyn.truss import truss_mass


class TestObjective:
    def test_reference_points(self):
        # thickest truss at the pointing target scores exactly 1
        assert objective(0.03, 0.9) == pytest.approx(1.0, rel=1e-12)
        # thinnest truss with a blown requirement lands in the penalty
        assert objective(0.015, 2.5) == pytest.approx(10.25, rel=1e-12)
        assert objective(0.015, np.inf) == pytest.approx(10.25, rel=1e-12)

    def test_reference_design_point(self):
        # a 93.55 kg truss at J_c = 0.9011 scores about 0.512
        h = 0.03 * np.sqrt(93.55 / truss_mass(0.03))
        assert objective(h, 0.9011) == pytest.approx(0.5120, abs=5e-4)

    def test_monotone_in_mass(self):
        assert objective(0.02, 0.9) < objective(0.025, 0.9)


class TestSamples:
    def test_sizes(self):
        assert len(synthesis_samples(nominal_only=True)) == 1
        full = synthesis_samples()
        assert len(full) == 27
        # no duplicates in the vertex enumeration
        seen = {(s.delta_mass, s.delta_inertia_yy, s.delta_panel_freq, s.tau)
                for s in full}
        assert len(seen) == 27

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CodesignConfig(n_particles=0)
        with pytest.raises(ValueError):
            CodesignConfig(h_bounds=(0.03, 0.015))
        with pytest.raises(ValueError):
            CodesignConfig(threads=0)


def quad_evaluator(k):
    """Analytic stand-in for the norm evaluator: a smooth bowl.

    J is a quadratic centered off the origin, Z grows with the gain
    norm so the effort constraint becomes active away from the center.
    """
    j = 0.5 + 0.01 * np.sum((k - 0.3) ** 2)
    z = 0.02 * np.linalg.norm(k)
    return j, z


class TestInnerSynthesis:
    def test_descends_on_smooth_bowl(self):
        warm = np.zeros((4, 8))
        res = inner_synthesis(quad_evaluator, warm, budget=400)
        j_warm, _ = quad_evaluator(warm)
        assert res.feasible
        assert res.j_c < j_warm
        assert res.n_eval <= 400

    def test_budget_zero_returns_warm_start(self):
        warm = np.full((4, 8), 0.7)
        res = inner_synthesis(quad_evaluator, warm, budget=0)
        assert np.array_equal(res.k_pma, warm)
        assert np.isnan(res.j_c) and not res.feasible
        assert res.n_eval == 0

    def test_budget_respected(self):
        calls = []

        def counting(k):
            calls.append(1)
            return quad_evaluator(k)

        inner_synthesis(counting, np.zeros((4, 8)), budget=17)
        assert len(calls) == 17

    def test_all_unstable_raises(self):
        def hopeless(k):
            return np.inf, np.inf

        with pytest.raises(RuntimeError):
            inner_synthesis(hopeless, np.zeros((4, 8)), budget=10)

    def test_unstable_warm_start_recovers_via_zero_gain(self):
        def picky(k):
            if np.max(np.abs(k)) > 0.4:
                return np.inf, np.inf
            return quad_evaluator(k)

        res = inner_synthesis(picky, np.full((4, 8), -1.0), budget=200)
        assert res.feasible
        assert np.max(np.abs(res.k_pma)) <= 0.4 + 1e-12

    def test_infeasible_effort_flagged(self):
        def heavy_effort(k):
            j, _ = quad_evaluator(k)
            return j, 5.0  # effort bound can never be met

        res = inner_synthesis(heavy_effort, np.zeros((4, 8)), budget=50)
        assert not res.feasible
        assert np.isfinite(res.j_c)

    def test_bad_warm_shape(self):
        with pytest.raises(ValueError):
            inner_synthesis(quad_evaluator, np.zeros((3, 8)), budget=5)


@pytest.fixture(scope="module")
def tiny_config():
    return CodesignConfig(
        n_particles=2,
        n_iter=1,
        inner_budget=2,
        nominal_only=True,
        fixed_h=0.03,
        seed=3,
        spacecraft=SpacecraftConfig(n_elem=2),
    )


class TestPso:
    def test_log_structure_and_monotone_best(self, tiny_config):
        log = pso_codesign(tiny_config)
        assert len(log.records) == 2
        assert len(log.best_f_per_iter) == 1
        assert np.isfinite(log.best_f)
        assert log.best_h == pytest.approx(0.03)
        assert log.best_k.shape == (4, 8)

    def test_thread_count_does_not_change_result(self, tiny_config):
        import dataclasses

        a = pso_codesign(tiny_config)
        b = pso_codesign(dataclasses.replace(tiny_config, threads=2))
        assert a.best_f == b.best_f
        assert np.array_equal(a.best_k, b.best_k)
        ra = [(r.particle, r.h, r.f) for r in a.records]
        rb = [(r.particle, r.h, r.f) for r in b.records]
        assert ra == rb

    def test_seed_changes_free_h_draw(self):
        cfg = CodesignConfig(
            n_particles=2, n_iter=1, inner_budget=0, nominal_only=True,
            seed=0, spacecraft=SpacecraftConfig(n_elem=2),
        )
        import dataclasses

        a = pso_codesign(cfg)
        b = pso_codesign(dataclasses.replace(cfg, seed=1))
        assert [r.h for r in a.records] != [r.h for r in b.records]


class TestWorstCaseSweep:
    def test_small_sweep_properties(self):
        cfg = CodesignConfig(
            nominal_only=True, spacecraft=SpacecraftConfig(n_elem=2)
        )
        rep = worst_case_sweep(
            0.03, np.zeros((4, 8)), config=cfg, n_tau=2, polish_evals=0
        )
        assert len(rep.rows) == 2
        taus = [r.tau for r in rep.rows]
        assert taus == sorted(taus)
        for r in rep.rows:
            # the vertex sup can only sit above the nominal response
            assert r.sup_point >= r.nominal_point - 1e-12
            assert r.sup_effort >= r.nominal_effort - 1e-12
            assert np.isfinite(r.sup_point)
        assert rep.sup_point == pytest.approx(
            max(r.sup_point for r in rep.rows)
        )
        assert rep.crit_tau in taus
