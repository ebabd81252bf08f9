import math

import numpy as np
import pytest

from dynblockade.fock import (
    IntegrationError,
    SystemParams,
    build_operators,
    default_horizon,
    evolve,
    fock_population,
    g2,
    hamiltonian,
    lindblad_rhs,
    mean_photon,
    vacuum_state,
)
from dynblockade.pulses import GaussianTrain, RectTrain

FIG1_SYSTEM = SystemParams(delta=0.5, u=0.05, gamma=1.0, fock_dim=10)
FIG1_PULSE = GaussianTrain(eps_p=0.1, a_param=5.27, period=5.0)


def coherent_density_matrix(alpha: float, dim: int) -> np.ndarray:
    amps = np.array(
        [math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n)) for n in range(dim)],
        dtype=complex,
    )
    return np.outer(amps, amps.conj())


def random_density_matrix(dim: int, rng) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    for _ in range(3):
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        rho += rng.uniform(0.1, 1.0) * np.outer(psi, psi.conj())
    return rho / np.trace(rho).real


class TestOperators:
    def test_two_level_annihilation(self):
        a, adag, number = build_operators(2)
        np.testing.assert_array_equal(a, [[0, 1], [0, 0]])
        np.testing.assert_array_equal(adag, a.conj().T)

    def test_sqrt_matrix_elements(self):
        a, _, _ = build_operators(3)
        assert a[1, 2] == pytest.approx(math.sqrt(2))

    def test_number_is_diagonal_count(self):
        for dim in (3, 7, 12):
            _, _, number = build_operators(dim)
            np.testing.assert_allclose(number, np.diag(np.arange(dim)), atol=1e-14)

    def test_truncated_commutator(self):
        # [a, adag] = 1 except the last diagonal entry, which truncation
        # turns into 1 - dim
        for dim in (2, 5, 10):
            a, adag, _ = build_operators(dim)
            comm = a @ adag - adag @ a
            expected = np.ones(dim)
            expected[-1] = 1 - dim
            np.testing.assert_allclose(comm, np.diag(expected), atol=1e-12)

    def test_too_small_dimension(self):
        with pytest.raises(ValueError):
            build_operators(1)


class TestHamiltonian:
    def test_all_zero(self):
        p = SystemParams(delta=0.0, u=0.0, fock_dim=4)
        np.testing.assert_array_equal(hamiltonian(p, 0.0), np.zeros((4, 4)))

    def test_kerr_diagonal(self):
        # n(n-1) ladder: entry for |2> is 2*delta + 2*u
        p = SystemParams(delta=1.0, u=0.05, fock_dim=3)
        h = hamiltonian(p, 0.0)
        np.testing.assert_allclose(np.diag(h).real, [0.0, 1.0, 2.1], atol=1e-14)

    def test_drive_coupling(self):
        p = SystemParams(delta=0.0, u=0.0, fock_dim=3)
        h = hamiltonian(p, 0.1)
        assert h[0, 1] == pytest.approx(0.1)
        np.testing.assert_allclose(h, h.conj().T, atol=1e-14)

    def test_nonfinite_drive(self):
        p = SystemParams(delta=0.0, u=0.0, fock_dim=3)
        with pytest.raises(ValueError):
            hamiltonian(p, math.inf)


class TestLindbladRhs:
    def test_vacuum_fixed_point(self):
        rho = vacuum_state(5)
        rhs = lindblad_rhs(rho, np.zeros((5, 5)), gamma=1.0)
        np.testing.assert_allclose(rhs, 0.0, atol=1e-15)

    def test_single_photon_decay(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 1] = 1.0
        rhs = lindblad_rhs(rho, np.zeros((4, 4)), gamma=1.0)
        assert rhs[1, 1].real == pytest.approx(-1.0)
        assert rhs[0, 0].real == pytest.approx(1.0)

    def test_traceless(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            rho = random_density_matrix(6, rng)
            h = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
            h = 0.5 * (h + h.conj().T)
            rhs = lindblad_rhs(rho, h, gamma=1.3)
            assert abs(np.trace(rhs)) < 1e-12
            np.testing.assert_allclose(rhs, rhs.conj().T, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            lindblad_rhs(np.eye(4), np.eye(5), gamma=1.0)


class TestObservables:
    def test_mean_photon_fock_states(self):
        assert mean_photon(vacuum_state(5)) == 0.0
        rho = np.zeros((5, 5), dtype=complex)
        rho[2, 2] = 1.0
        assert mean_photon(rho) == pytest.approx(2.0)

    def test_mean_photon_coherent(self):
        rho = coherent_density_matrix(0.1, 10)
        # Poisson sum over the truncated basis (tail mass ~1e-16)
        ns = np.arange(10)
        pn = np.exp(-0.01) * 0.01**ns / np.array([math.factorial(n) for n in ns])
        assert mean_photon(rho) == pytest.approx(float((ns * pn).sum()), abs=1e-12)
        assert mean_photon(rho) == pytest.approx(0.01, abs=1e-8)

    def test_mean_photon_clamps_roundoff(self):
        rho = vacuum_state(4)
        rho[1, 1] = -5e-13  # round-off scale negative population
        assert mean_photon(rho) == 0.0

    def test_g2_fock_states(self):
        rho = np.zeros((5, 5), dtype=complex)
        rho[1, 1] = 1.0
        assert g2(rho) == 0.0
        rho[1, 1] = 0.0
        rho[2, 2] = 1.0
        assert g2(rho) == pytest.approx(0.5)

    def test_g2_coherent(self):
        assert g2(coherent_density_matrix(0.1, 10)) == pytest.approx(1.0, abs=1e-6)

    def test_g2_floor_marker(self):
        assert math.isnan(g2(vacuum_state(5)))
        with pytest.raises(ValueError):
            g2(vacuum_state(5), n_floor=0.0)

    def test_fock_population(self):
        rho = vacuum_state(6)
        assert fock_population(rho, 0) == 1.0
        assert fock_population(rho, 1) == 0.0
        with pytest.raises(IndexError):
            fock_population(rho, 6)
        with pytest.raises(IndexError):
            fock_population(rho, -1)


class TestSystemParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            SystemParams(delta=0.0, u=0.0, gamma=0.0)
        with pytest.raises(ValueError):
            SystemParams(delta=0.0, u=0.0, fock_dim=2)

    def test_default_horizon(self):
        assert default_horizon(FIG1_PULSE) == 50.0
        assert default_horizon(GaussianTrain(eps_p=0.1, a_param=1.0, period=2.0)) == 30.0


class TestEvolve:
    def test_zero_drive_stays_vacuum(self):
        pulse = GaussianTrain(eps_p=0.0, a_param=5.27, period=5.0)
        tr = evolve(FIG1_SYSTEM, pulse, t_end=10.0)
        assert np.all(tr.n <= 1e-10)
        assert np.all(tr.p1 <= 1e-10)
        assert np.all(tr.p2 <= 1e-10)
        assert np.all(np.isnan(tr.g2))
        assert np.all(tr.drive == 0.0)

    def test_trajectory_shape_and_grid(self):
        tr = evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=2.0, dt_out=0.01)
        assert len(tr.times) == 201
        assert np.all(np.diff(tr.times) > 0)
        for arr in (tr.drive, tr.n, tr.g2, tr.p0, tr.p1, tr.p2):
            assert arr.shape == tr.times.shape
        assert np.all(tr.n >= 0.0)
        assert np.all((tr.p0 >= 0) & (tr.p0 <= 1))
        assert np.all(tr.p0 + tr.p1 + tr.p2 <= 1 + 1e-6)

    def test_window_sampling_matches_full_run(self):
        full = evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=12.0)
        window = evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=12.0, t_sample_start=6.0)
        i = np.searchsorted(full.times, window.times[0])
        np.testing.assert_allclose(window.n, full.n[i:], rtol=0, atol=1e-15)
        np.testing.assert_allclose(window.p2, full.p2[i:], rtol=0, atol=1e-15)

    def test_store_states(self):
        tr = evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=1.0, store_states=True)
        assert tr.states is not None
        assert tr.states.shape == (len(tr.times), 10, 10)
        np.testing.assert_allclose(
            np.einsum("tii->t", tr.states).real, 1.0, atol=1e-6
        )

    def test_coherent_oracle_u_zero(self):
        # a linearly driven damped mode stays coherent: g2 = 1, Poisson P_k
        p = SystemParams(delta=0.5, u=0.0, gamma=1.0, fock_dim=10)
        tr = evolve(p, FIG1_PULSE, t_end=30.0)
        m = tr.n > 1e-6
        assert np.max(np.abs(tr.g2[m] - 1.0)) < 1e-3
        lam = tr.n[m]
        pois0 = np.exp(-lam)
        assert np.max(np.abs(tr.p0[m] - pois0)) < 1e-4
        assert np.max(np.abs(tr.p1[m] - pois0 * lam)) < 1e-4
        assert np.max(np.abs(tr.p2[m] - pois0 * lam**2 / 2)) < 1e-4

    def test_weak_drive_scaling(self):
        # halving eps_p quarters n(t) pointwise while n << 1
        tr1 = evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=30.0)
        half = GaussianTrain(eps_p=0.05, a_param=5.27, period=5.0)
        tr2 = evolve(FIG1_SYSTEM, half, t_end=30.0)
        m = tr1.n > 1e-9
        ratio = tr1.n[m] / tr2.n[m]
        assert np.max(np.abs(ratio / 4.0 - 1.0)) < 0.02

    def test_minimum_rides_the_rising_edge(self):
        # the photon-number minimum falls after the drive starts climbing
        # and before it peaks (peaks sit at integer multiples of the period)
        tr = evolve(FIG1_SYSTEM, FIG1_PULSE, t_sample_start=25.0)
        t_min = tr.times[np.argmin(tr.n)]
        phase = t_min % FIG1_PULSE.period
        assert FIG1_PULSE.period / 2 < phase < FIG1_PULSE.period
        from dynblockade.pulses import gaussian_envelope

        h = 1e-4
        slope = gaussian_envelope(FIG1_PULSE, t_min + h) - gaussian_envelope(FIG1_PULSE, t_min - h)
        assert slope > 0.0

    def test_rect_drive_runs_clean(self):
        p = SystemParams(delta=0.617, u=0.05, gamma=1.0, fock_dim=10)
        pulse = RectTrain(eps_m=0.465, t_r=0.468, t_w=0.372, t_f=0.016, period=4.365)
        tr = evolve(p, pulse, t_end=20.0)
        assert np.nanmax(tr.g2) > 0
        assert np.max(tr.n) > 1e-3

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=-1.0)
        with pytest.raises(ValueError):
            evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=1.0, dt_out=0.0)
        with pytest.raises(ValueError):
            evolve(FIG1_SYSTEM, FIG1_PULSE, t_end=1.0, t_sample_start=2.0)

    def test_integration_error_type(self):
        err = IntegrationError("boom", t=1.5)
        assert "1.5" in str(err)
        assert err.t == 1.5


class TestTrajectoryCsv:
    def test_round_trip(self, tmp_path):
        pulse = GaussianTrain(eps_p=0.0, a_param=5.27, period=5.0)
        tr = evolve(FIG1_SYSTEM, pulse, t_end=1.0, dt_out=0.1)
        path = tmp_path / "traj.csv"
        tr.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,eps,n,g2,P0,P1,P2"
        # undefined g2 must serialize as an empty field
        assert lines[1].split(",")[3] == ""
        data = np.genfromtxt(path, delimiter=",", names=True)
        np.testing.assert_allclose(data["t"], tr.times)
        np.testing.assert_allclose(data["P0"], tr.p0)
        assert np.all(np.isnan(data["g2"]))
