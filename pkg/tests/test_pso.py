import numpy as np
import pytest

from dynblockade.pso import Bounds, PsoConfig, init_swarm, optimize, step

from _objectives import sometimes_nan, sphere

BOX3 = Bounds(lo=np.full(3, -5.0), hi=np.full(3, 5.0))


class TestBounds:
    def test_validation(self):
        with pytest.raises(ValueError):
            Bounds(lo=np.array([0.0, 1.0]), hi=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            Bounds(lo=np.array([0.0]), hi=np.array([1.0, 2.0]))

    def test_span(self):
        b = Bounds(lo=np.array([0.0, -1.0]), hi=np.array([2.0, 3.0]))
        np.testing.assert_array_equal(b.span, [2.0, 4.0])
        assert b.dim == 2


class TestConfig:
    def test_default_hyperparameters(self):
        cfg = PsoConfig()
        assert cfg.n_particles == 20
        assert cfg.n_iters == 50
        assert cfg.w == 0.5
        assert cfg.f1 == 1.5
        assert cfg.f2 == 1.5

    def test_validation(self):
        with pytest.raises(ValueError):
            PsoConfig(n_particles=0)
        with pytest.raises(ValueError):
            PsoConfig(n_iters=-1)
        with pytest.raises(ValueError):
            PsoConfig(v_max_frac=0.0)


class TestInit:
    def test_counts_and_containment(self):
        calls = []

        def counting(x):
            calls.append(x.copy())
            return sphere(x)

        swarm = init_swarm(BOX3, PsoConfig(seed=5), counting)
        assert len(calls) == 20
        assert swarm.n_evals == 20
        assert np.all(swarm.positions >= BOX3.lo)
        assert np.all(swarm.positions <= BOX3.hi)
        assert np.all(swarm.velocities == 0.0)

    def test_constant_fitness(self):
        swarm = init_swarm(BOX3, PsoConfig(seed=5), lambda x: 7.25)
        assert swarm.global_best_fit == 7.25
        np.testing.assert_array_equal(swarm.personal_best_pos, swarm.positions)

    def test_reproducible_positions(self):
        a = init_swarm(BOX3, PsoConfig(seed=11), sphere)
        b = init_swarm(BOX3, PsoConfig(seed=11), sphere)
        np.testing.assert_array_equal(a.positions, b.positions)


class TestStep:
    def test_converged_swarm_is_fixed_point(self):
        cfg = PsoConfig(n_particles=4, seed=0)
        swarm = init_swarm(BOX3, cfg, sphere)
        g = swarm.global_best_pos.copy()
        swarm.positions[:] = g
        swarm.velocities[:] = 0.0
        swarm.personal_best_pos[:] = g
        swarm.personal_best_fit[:] = sphere(g)
        swarm.global_best_fit = sphere(g)
        step(swarm, BOX3, cfg, sphere)
        np.testing.assert_array_equal(swarm.positions, np.broadcast_to(g, swarm.positions.shape))
        np.testing.assert_array_equal(swarm.velocities, 0.0)

    def test_containment_and_velocity_clamp(self):
        cfg = PsoConfig(n_particles=10, seed=3)
        rng = np.random.default_rng(0)

        def jumpy(x):
            return float(rng.uniform(-1, 1))  # adversarial: bests move around

        swarm = init_swarm(BOX3, cfg, jumpy)
        v_max = cfg.v_max_frac * BOX3.span
        for _ in range(25):
            step(swarm, BOX3, cfg, jumpy)
            assert np.all(swarm.positions >= BOX3.lo)
            assert np.all(swarm.positions <= BOX3.hi)
            assert np.all(np.abs(swarm.velocities) <= v_max + 1e-12)

    def test_ties_keep_incumbent(self):
        cfg = PsoConfig(n_particles=5, seed=2)
        swarm = init_swarm(BOX3, cfg, lambda x: 1.0)
        pbest_before = swarm.personal_best_pos.copy()
        gbest_before = swarm.global_best_pos.copy()
        step(swarm, BOX3, cfg, lambda x: 1.0)
        np.testing.assert_array_equal(swarm.personal_best_pos, pbest_before)
        np.testing.assert_array_equal(swarm.global_best_pos, gbest_before)

    def test_nonfinite_fitness_never_wins(self):
        cfg = PsoConfig(n_particles=8, n_iters=10, seed=4)
        res = optimize(BOX3, cfg, sometimes_nan)
        assert np.isfinite(res.best_fit)
        assert res.best_pos[0] <= 0


class TestOptimize:
    def test_sphere_reference_run(self):
        # plain PSO at these settings comfortably solves the 3-d sphere
        for seed in (1, 2, 3):
            res = optimize(BOX3, PsoConfig(seed=seed), sphere)
            assert res.best_fit < 1e-3
            assert len(res.history) == 51
            assert np.all(np.diff(res.history) <= 0.0)
            assert res.n_evals == 20 * 51

    def test_known_point_recovery(self):
        target = np.array([1.2, -3.4, 0.7])

        def dist2(x):
            return float(np.sum((x - target) ** 2))

        res = optimize(BOX3, PsoConfig(seed=1), dist2)
        assert np.max(np.abs(res.best_pos - target)) < 1e-4

    def test_zero_iterations(self):
        cfg = PsoConfig(n_particles=1, n_iters=0, seed=6)
        res = optimize(BOX3, cfg, sphere)
        assert len(res.history) == 1
        assert res.n_evals == 1
        swarm = init_swarm(BOX3, cfg, sphere)
        assert res.best_fit == swarm.global_best_fit

    def test_bitwise_determinism(self):
        r1 = optimize(BOX3, PsoConfig(seed=9), sphere)
        r2 = optimize(BOX3, PsoConfig(seed=9), sphere)
        np.testing.assert_array_equal(r1.history, r2.history)
        np.testing.assert_array_equal(r1.best_pos, r2.best_pos)

    def test_parallel_matches_serial_bitwise(self):
        serial = optimize(BOX3, PsoConfig(seed=12, n_iters=8), sphere)
        parallel = optimize(BOX3, PsoConfig(seed=12, n_iters=8), sphere, workers=2)
        np.testing.assert_array_equal(serial.history, parallel.history)
        np.testing.assert_array_equal(serial.best_pos, parallel.best_pos)

    def test_affine_rescaling_covariance(self):
        # stretching one dimension maps the whole trajectory affinely
        scale, shift = 100.0, 3.0
        box = Bounds(lo=np.array([-5.0, -5.0, -5.0]), hi=np.array([5.0, 5.0, 5.0]))
        stretched = Bounds(
            lo=np.array([-5.0, -5.0 * scale + shift, -5.0]),
            hi=np.array([5.0, 5.0 * scale + shift, 5.0]),
        )

        def f_plain(x):
            return sphere(x)

        def f_stretched(x):
            y = x.copy()
            y[1] = (y[1] - shift) / scale
            return sphere(y)

        r1 = optimize(box, PsoConfig(seed=21, n_iters=30), f_plain)
        r2 = optimize(stretched, PsoConfig(seed=21, n_iters=30), f_stretched)
        np.testing.assert_allclose(r2.history, r1.history, rtol=1e-9)
        expected = r1.best_pos.copy()
        expected[1] = expected[1] * scale + shift
        np.testing.assert_allclose(r2.best_pos, expected, rtol=1e-9, atol=1e-9)
