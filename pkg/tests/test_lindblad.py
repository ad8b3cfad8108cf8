import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tlrsim.lindblad import (
    Apply,
    Evolve,
    IntegrationError,
    LindbladTerm,
    Liouvillian,
    MonteCarloError,
    QuasiStaticNoise,
    build_liouvillian,
    monte_carlo_quasistatic,
    monte_carlo_scalar,
    propagate_expm,
    propagate_rk4,
    propagate_schedule,
    propagator,
    quasistatic_sigma,
    substream_rng,
    trace_distance,
    unvec,
    vec,
)
from tlrsim.qcore import DensityMatrix, HilbertSpace, Operator, annihilation, embed


def qubit_tools():
    lower = annihilation(2, "q")
    space = lower.space
    return space, lower


def plus_state(space):
    return DensityMatrix(space, np.full((2, 2), 0.5, dtype=complex))


class TestVectorization:
    def test_column_stacking_order(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(vec(m), [1.0, 3.0, 2.0, 4.0])
        assert np.array_equal(unvec(vec(m)), m)

    def test_sandwich_identity(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        lhs = np.kron(b.T, a) @ vec(rho)
        assert np.allclose(unvec(lhs), a @ rho @ b, atol=1e-12)

    def test_unvec_rejects_non_square(self):
        with pytest.raises(ValueError):
            unvec(np.arange(5.0))


class TestAmplitudeDamping:
    # Canonical rate gamma empties the excited state as exp(-gamma t)
    # and shrinks coherence as exp(-gamma t / 2).

    def setup_method(self):
        self.space, lower = qubit_tools()
        self.liou = Liouvillian(self.space, terms=(LindbladTerm(lower, 2.0),))

    def test_population_decay_expm(self):
        rho0 = self.space.basis_state([1]).to_density_matrix()
        final = propagate_expm(self.liou, rho0, 0.7)
        assert final.population(1) == pytest.approx(math.exp(-1.4), abs=1e-12)
        assert final.population(0) == pytest.approx(1 - math.exp(-1.4), abs=1e-12)

    def test_population_decay_rk4(self):
        rho0 = self.space.basis_state([1]).to_density_matrix()
        final = propagate_rk4(self.liou, rho0, 0.7)
        assert final.population(1) == pytest.approx(math.exp(-1.4), abs=1e-8)

    def test_coherence_half_rate(self):
        final = propagate_expm(self.liou, plus_state(self.space), 0.7)
        assert abs(final.matrix[0, 1]) == pytest.approx(0.5 * math.exp(-0.7), abs=1e-12)


class TestPureDephasing:
    def test_projector_pair_rate(self):
        # Jumps |0><0| and |1><1| at rate gamma each: coherence decays at
        # exactly gamma while populations stay put.
        space, _ = qubit_tools()
        p0 = Operator(space, np.diag([1.0, 0.0]).astype(complex))
        p1 = Operator(space, np.diag([0.0, 1.0]).astype(complex))
        gamma = 3.0
        liou = Liouvillian(
            space, terms=(LindbladTerm(p0, gamma), LindbladTerm(p1, gamma))
        )
        final = propagate_expm(liou, plus_state(space), 0.4)
        assert abs(final.matrix[0, 1]) == pytest.approx(0.5 * math.exp(-1.2), abs=1e-12)
        assert final.population(0) == pytest.approx(0.5, abs=1e-12)
        assert final.population(1) == pytest.approx(0.5, abs=1e-12)


class TestUnitaryLimit:
    def test_rabi_oscillation(self):
        space, lower = qubit_tools()
        g = 1.3
        h = (lower + lower.dag()) * g
        liou = Liouvillian(space, hamiltonian=h)
        rho0 = space.basis_state([0]).to_density_matrix()
        t = 0.3 / g
        final = propagate_expm(liou, rho0, t)
        assert final.population(1) == pytest.approx(math.sin(0.3) ** 2, abs=1e-12)
        assert final.purity() == pytest.approx(1.0, abs=1e-10)


def transfer_like_generator():
    """Two coupled rails with loss and collective dephasing, real scales."""
    lower = annihilation(2, "a")
    space = HilbertSpace([("a", 2), ("b", 2)])
    a = embed(lower, space, "a")
    b = embed(annihilation(2, "b"), space, "b")
    j_ex = 1.217e8
    h = (a.dag() @ b + b.dag() @ a) * j_ex
    kappa = 6.283e4
    gamma_c = 7.75e4
    cross = a.dag() @ b + a @ b.dag()
    terms = (
        LindbladTerm(a, kappa),
        LindbladTerm(b, kappa),
        LindbladTerm(cross, gamma_c),
    )
    return Liouvillian(space, hamiltonian=h, terms=terms), space


class TestIntegratorCrossCheck:
    def test_expm_vs_rk4_on_transfer_generator(self):
        liou, space = transfer_like_generator()
        rho0 = space.basis_state([1, 0]).to_density_matrix()
        t = 1.29e-8
        via_expm = propagate_expm(liou, rho0, t)
        via_rk4 = propagate_rk4(liou, rho0, t)
        assert trace_distance(via_expm, via_rk4) <= 1e-6

    def test_rk4_fourth_order_convergence(self):
        liou, space = transfer_like_generator()
        rho0 = space.basis_state([1, 0]).to_density_matrix()
        t = 1.29e-8
        reference = propagate_expm(liou, rho0, t)
        coarse = propagate_rk4(liou, rho0, t, initial_steps=40)
        fine = propagate_rk4(liou, rho0, t, initial_steps=80)
        ratio = trace_distance(reference, coarse) / trace_distance(reference, fine)
        assert 8.0 <= ratio <= 32.0

    def test_semigroup_property(self):
        liou, _ = transfer_like_generator()
        p1 = propagator(liou, 4.0e-9)
        p2 = propagator(liou, 9.0e-9)
        p12 = propagator(liou, 1.3e-8)
        assert np.linalg.norm(p2 @ p1 - p12, ord=np.inf) <= 1e-9


class TestRk4StepControl:
    def setup_method(self):
        self.space, lower = qubit_tools()
        # strongly damped qubit: gamma t = 1000 is far past steady state
        self.liou = Liouvillian(self.space, terms=(LindbladTerm(lower, 1.0e6),))
        self.rho0 = self.space.basis_state([1]).to_density_matrix()

    def test_auto_halving_recovers_from_coarse_start(self):
        final = propagate_rk4(self.liou, self.rho0, 1.0e-3, initial_steps=4)
        assert final.population(0) == pytest.approx(1.0, abs=1e-9)

    def test_halving_budget_exhaustion_raises(self):
        with pytest.raises(IntegrationError):
            propagate_rk4(
                self.liou, self.rho0, 1.0e-3, initial_steps=1, max_halvings=2
            )

    def test_step_cap_raises(self):
        with pytest.raises(IntegrationError):
            propagate_rk4(self.liou, self.rho0, 1.0e-3, initial_steps=3_000_000)


class TestLiouvillianValidation:
    def test_non_hermitian_hamiltonian_rejected(self):
        space, lower = qubit_tools()
        with pytest.raises(ValueError):
            Liouvillian(space, hamiltonian=lower)

    def test_space_mismatch_rejected(self):
        space, _ = qubit_tools()
        other = annihilation(2, "r")
        with pytest.raises(ValueError):
            Liouvillian(space, terms=(LindbladTerm(other, 1.0),))

    def test_negative_rate_rejected(self):
        _, lower = qubit_tools()
        with pytest.raises(ValueError):
            LindbladTerm(lower, -0.1)


class TestSchedule:
    def test_apply_then_evolve_matches_manual(self):
        space, lower = qubit_tools()
        x_gate = Operator(space, np.array([[0, 1], [1, 0]], dtype=complex))
        liou = Liouvillian(space, terms=(LindbladTerm(lower, 2.0),))
        rho0 = space.basis_state([0]).to_density_matrix()
        final = propagate_schedule(
            [Apply(x_gate), Evolve(liou, 0.7), Apply(x_gate)], rho0
        )
        # flip, decay, flip back: ground population is now exp(-1.4)
        assert final.population(0) == pytest.approx(math.exp(-1.4), abs=1e-12)

    def test_rk4_method_agrees(self):
        space, lower = qubit_tools()
        liou = Liouvillian(space, terms=(LindbladTerm(lower, 2.0),))
        rho0 = space.basis_state([1]).to_density_matrix()
        a = propagate_schedule([Evolve(liou, 0.7)], rho0, method="expm")
        b = propagate_schedule([Evolve(liou, 0.7)], rho0, method="rk4")
        assert trace_distance(a, b) <= 1e-7

    def test_non_unitary_apply_rejected(self):
        _, lower = qubit_tools()
        with pytest.raises(ValueError):
            Apply(lower)

    def test_unknown_method_rejected(self):
        space, _ = qubit_tools()
        rho0 = space.basis_state([0]).to_density_matrix()
        with pytest.raises(ValueError):
            propagate_schedule([], rho0, method="euler")


class TestTraceDistance:
    def test_orthogonal_pure_states(self):
        space, _ = qubit_tools()
        zero = space.basis_state([0]).to_density_matrix()
        one = space.basis_state([1]).to_density_matrix()
        assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-12)
        assert trace_distance(zero, zero) == pytest.approx(0.0, abs=1e-14)


class TestSubstreams:
    def test_same_key_same_stream(self):
        a = substream_rng(42, 3, 7).standard_normal(5)
        b = substream_rng(42, 3, 7).standard_normal(5)
        assert np.array_equal(a, b)

    def test_distinct_keys_distinct_streams(self):
        a = substream_rng(42, 3, 7).standard_normal(5)
        b = substream_rng(42, 3, 8).standard_normal(5)
        c = substream_rng(43, 3, 7).standard_normal(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestScalarMonteCarlo:
    def test_bitwise_reproducible(self):
        noise = QuasiStaticNoise(mean=0.0, std=1.0, sample_count=64, seed=11)
        r1 = monte_carlo_scalar(math.cos, noise, point_index=2)
        r2 = monte_carlo_scalar(math.cos, noise, point_index=2)
        assert np.array_equal(r1.values, r2.values)
        assert r1.mean == r2.mean
        r3 = monte_carlo_scalar(math.cos, noise, point_index=3)
        assert not np.array_equal(r1.values, r3.values)

    def test_sample_prefix_stable_under_count(self):
        # growing the sample budget must not reshuffle earlier draws
        small = monte_carlo_scalar(
            math.cos, QuasiStaticNoise(0.0, 1.0, sample_count=16, seed=5)
        )
        large = monte_carlo_scalar(
            math.cos, QuasiStaticNoise(0.0, 1.0, sample_count=32, seed=5)
        )
        assert np.array_equal(large.values[:16], small.values)

    def test_gaussian_dephasing_against_analytic(self):
        # E[cos(delta t)] over delta ~ N(0, sigma^2) is exp(-sigma^2 t^2 / 2).
        sigma, t = 0.8, 1.25
        noise = QuasiStaticNoise(mean=0.0, std=sigma, sample_count=1000, seed=2024)
        result = monte_carlo_scalar(lambda d: math.cos(d * t), noise)
        exact = math.exp(-0.5 * sigma * sigma * t * t)
        assert abs(result.mean - exact) <= 3.0 * result.std_error

    def test_values_frozen(self):
        result = monte_carlo_scalar(
            math.cos, QuasiStaticNoise(0.0, 1.0, sample_count=4, seed=1)
        )
        with pytest.raises(ValueError):
            result.values[0] = 99.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            QuasiStaticNoise(0.0, 1.0, sample_count=0)

    def test_failure_reports_index_and_value(self):
        def broken(value):
            raise RuntimeError("boom")

        noise = QuasiStaticNoise(mean=0.5, std=0.0, label="tilt", sample_count=3, seed=9)
        with pytest.raises(MonteCarloError, match=r"sample 0 \(tilt=0\.5\)"):
            monte_carlo_scalar(broken, noise)


class TestStateMonteCarlo:
    def setup_method(self):
        self.space, self.lower = qubit_tools()
        self.rho0 = plus_state(self.space)

    def model(self, detuning):
        # quasi-static frequency offset rotating the qubit coherence
        h = Operator(self.space, np.diag([0.0, detuning]).astype(complex))
        return Liouvillian(self.space, hamiltonian=h)

    def test_zero_std_matches_deterministic_run(self):
        noise = QuasiStaticNoise(mean=0.7, std=0.0, sample_count=5, seed=3)
        result = monte_carlo_quasistatic(self.model, noise, self.rho0, duration=1.1)
        direct = propagate_expm(self.model(0.7), self.rho0, 1.1)
        assert trace_distance(result.mean_state, direct) <= 1e-12

    def test_mean_state_dephases_like_gaussian(self):
        sigma, t = 0.9, 1.3
        noise = QuasiStaticNoise(mean=0.0, std=sigma, sample_count=400, seed=21)
        result = monte_carlo_quasistatic(self.model, noise, self.rho0, duration=t)
        # ensemble-averaged coherence magnitude shrinks toward the
        # Gaussian free-induction value, populations untouched
        coherence = abs(result.mean_state.matrix[0, 1])
        exact = 0.5 * math.exp(-0.5 * sigma * sigma * t * t)
        assert coherence == pytest.approx(exact, abs=0.05)
        assert result.mean_state.population(0) == pytest.approx(0.5, abs=1e-12)

    def test_observable_stats_recorded(self):
        noise = QuasiStaticNoise(mean=0.0, std=0.4, sample_count=32, seed=8)
        result = monte_carlo_quasistatic(
            self.model,
            noise,
            self.rho0,
            duration=1.0,
            observables={"coherence": lambda s: abs(s.matrix[0, 1])},
        )
        stat = result.observables["coherence"]
        assert stat.values.shape == (32,)
        assert stat.mean == pytest.approx(float(stat.values.mean()), rel=1e-12)
        assert result.sample_count == 32

    def test_schedule_model_supported(self):
        noise = QuasiStaticNoise(mean=0.4, std=0.0, sample_count=2, seed=1)

        def schedule_model(value):
            return [Evolve(self.model(value), 0.5), Evolve(self.model(value), 0.5)]

        result = monte_carlo_quasistatic(schedule_model, noise, self.rho0)
        direct = propagate_expm(self.model(0.4), self.rho0, 1.0)
        assert trace_distance(result.mean_state, direct) <= 1e-12

    def test_missing_duration_reported(self):
        noise = QuasiStaticNoise(mean=0.0, std=0.0, sample_count=1, seed=1)
        with pytest.raises(MonteCarloError, match="duration"):
            monte_carlo_quasistatic(self.model, noise, self.rho0)


class TestBuildLiouvillian:
    def test_infers_space_from_hamiltonian(self):
        space, lower = qubit_tools()
        h = (lower + lower.dag()) * 2.0
        liou = build_liouvillian(h, [LindbladTerm(lower, 0.5)])
        assert liou.space == space
        assert len(liou.terms) == 1


class TestQuasistaticSigma:
    def test_formula(self):
        g, delta, gamma2, t = 1.2369159e9, 1.2566371e10, 6.2831853e6, 1.2901917e-8
        expected = (delta / g) * math.sqrt(2.0 * gamma2 / t)
        assert quasistatic_sigma(g, delta, gamma2, t) == pytest.approx(expected, rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            quasistatic_sigma(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            quasistatic_sigma(1.0, 1.0, -1.0, 1.0)


@st.composite
def random_liouvillian_and_state(draw):
    dim = draw(st.sampled_from([2, 3]))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.default_rng(seed)
    space = HilbertSpace([("s", dim)])
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = Operator(space, 0.5 * (raw + raw.conj().T))
    jump = Operator(space, rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    rate = draw(st.floats(min_value=0.0, max_value=2.0))
    liou = Liouvillian(space, hamiltonian=h, terms=(LindbladTerm(jump, rate),))
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    rho = np.outer(amps, amps.conj())
    rho = rho / np.trace(rho).real
    duration = draw(st.floats(min_value=0.0, max_value=1.0))
    return liou, DensityMatrix(space, rho), duration


@settings(deadline=None, max_examples=40)
@given(random_liouvillian_and_state())
def test_evolution_preserves_state_validity(case):
    liou, rho0, duration = case
    final = propagate_expm(liou, rho0, duration)
    # DensityMatrix construction already enforces trace, hermiticity and
    # positivity tolerances; check purity stays physical on top.
    assert final.purity() <= 1.0 + 1e-9
    assert abs(np.trace(final.matrix) - 1.0) <= 1e-9


@settings(deadline=None, max_examples=15)
@given(random_liouvillian_and_state())
def test_integrators_agree_on_random_generators(case):
    liou, rho0, duration = case
    a = propagate_expm(liou, rho0, duration)
    b = propagate_rk4(liou, rho0, duration)
    assert trace_distance(a, b) <= 1e-6
