"""Solvers: schedules, run logs, mirror descent and the kernel method."""

import math

import numpy as np
import pytest

from zosaddle.core import (BlockPoint, ConfigurationError, NoiseModel,
                           NOISELESS, ProblemMetadata, ProblemSpec)
from zosaddle.geometry import DomainSpec, GeometrySetup
from zosaddle.kernels import build_legendre_kernel
from zosaddle.solvers import (LogRow, RunLog, constant_schedule,
                              derive_schedule, kernel_thm_schedule,
                              regularize, run_kernel_zospg, run_zoopmd,
                              theorem_envelope_kernel)


def quadratic_problem():
    return ProblemSpec(
        n_x=1, n_y=1,
        clean_value=lambda z: float(z.x[0] ** 2 - z.y[0] ** 2),
        true_grad=lambda z: np.array([2 * z.x[0], 2 * z.y[0]]),
        metadata=ProblemMetadata(M=4.0, L=2.0))


class TestSchedules:
    def test_constant(self):
        s = constant_schedule(0.1, 0.2)
        assert s.gamma(0) == 0.1 and s.tau(999) == 0.2
        with pytest.raises(ConfigurationError):
            constant_schedule(0.0, 0.2)

    def test_nonsmooth_cc_plugin(self):
        # q=2, n=4, M=Omega=sigma=1, N=16: gamma = 1/16, tau = 1
        s = derive_schedule("nonsmooth_cc", n=4, q=2, M=1, sigma=1, omega=1,
                            N=16)
        assert s.gamma(0) == pytest.approx(1 / 16)
        assert s.tau(0) == pytest.approx(1.0)

    def test_kernel_scsc_plugin(self):
        kernel = build_legendre_kernel(3.0)
        s = derive_schedule("kernel_scsc", n=2, mu=1.0, L=1.0, sigma=1.0,
                            kernel=kernel)
        base = (3 * kernel.kappa * 1 * 2
                / (2 * (3 - 1) * (kernel.kappa_beta * 1) ** 2)) ** (1 / 6)
        assert s.tau(1) == pytest.approx(base)
        assert s.gamma(4) == pytest.approx(2.0 / 4.0)

    def test_tau_power_law_ratio(self):
        kernel = build_legendre_kernel(3.0)
        s = kernel_thm_schedule(kernel, n=3, mu=0.5, L=1.0, sigma=0.2)
        beta = kernel.beta
        assert s.tau(1) / s.tau(4) == pytest.approx(4 ** (1 / (2 * beta)))

    def test_larger_budget_shrinks_gamma(self):
        for case in ("nonsmooth_cc", "residual_cc", "smooth_cc"):
            s1 = derive_schedule(case, n=4, q=2, M=1, sigma=1, omega=1, N=100)
            s2 = derive_schedule(case, n=4, q=2, M=1, sigma=1, omega=1, N=200)
            assert s2.gamma(0) < s1.gamma(0)

    def test_scsc_shifted_index(self):
        s = derive_schedule("nonsmooth_scsc", n=2, M=1, mu=2.0, sigma=1, N=10)
        assert s.gamma(0) == pytest.approx(1 / 2.0)   # finite at k = 0
        assert s.gamma(9) == pytest.approx(1 / 20.0)

    def test_missing_constant_named(self):
        with pytest.raises(ConfigurationError, match="M"):
            derive_schedule("nonsmooth_cc", n=4, q=2, sigma=1, omega=1, N=16)
        with pytest.raises(ConfigurationError):
            derive_schedule("kernel_scsc", n=2, mu=1, L=1, sigma=1)

    def test_unknown_case(self):
        with pytest.raises(ConfigurationError):
            derive_schedule("bogus", n=1)

    def test_theta_multipliers(self):
        s1 = derive_schedule("nonsmooth_cc", n=4, q=2, M=1, sigma=1, omega=1,
                             N=16)
        s2 = derive_schedule("nonsmooth_cc", n=4, q=2, M=1, sigma=1, omega=1,
                             N=16, theta_gamma=2.0, theta_tau=0.5)
        assert s2.gamma(0) == pytest.approx(2 * s1.gamma(0))
        assert s2.tau(0) == pytest.approx(0.5 * s1.tau(0))


class TestRunLog:
    def test_csv_layout(self):
        log = RunLog(header={"method": "demo", "seed": 1})
        log.add(LogRow(k=0, oracle_calls=2, gap=0.5, f_value=1.0,
                       gamma_k=0.1, tau_k=0.01))
        log.add(LogRow(k=1, oracle_calls=4, gap=0.4, f_value=0.9,
                       gamma_k=0.1, tau_k=0.01))
        text = log.to_csv_string()
        lines = text.splitlines()
        assert lines[0] == "# method = demo"
        assert lines[1] == "# seed = 1"
        assert lines[2] == "k,oracle_calls,gap,f_value,gamma_k,tau_k"
        assert lines[3].startswith("0,2,0.5,1,")

    def test_monotone_rows_enforced(self):
        log = RunLog()
        log.add(LogRow(k=0, oracle_calls=2, gap=0.5, f_value=1.0,
                       gamma_k=0.1, tau_k=0.01))
        with pytest.raises(ValueError):
            log.add(LogRow(k=0, oracle_calls=4, gap=0.4, f_value=0.9,
                           gamma_k=0.1, tau_k=0.01))
        with pytest.raises(ValueError):
            log.add(LogRow(k=1, oracle_calls=2, gap=0.4, f_value=0.9,
                           gamma_k=0.1, tau_k=0.01))

    def test_save_and_final_gap(self, tmp_path):
        log = RunLog(header={"a": 1})
        log.add(LogRow(k=0, oracle_calls=1, gap=0.25, f_value=0.0,
                       gamma_k=0.1, tau_k=0.01))
        path = tmp_path / "log.csv"
        log.save(path)
        assert path.read_text().startswith("# a = 1\n")
        assert log.final_gap() == 0.25


class TestRunZoopmd:
    def setup_method(self):
        self.problem = quadratic_problem()
        self.domain = DomainSpec.box([-1.0, -1.0], [1.0, 1.0], 1, 1)
        self.geometry = GeometrySetup.euclidean(self.domain)

    def test_zero_iterations_returns_start(self):
        sched = constant_schedule(0.05, 1e-3)
        _, z_bar = run_zoopmd(self.problem, NOISELESS, self.geometry,
                              "standard", sched, 0, seed=0)
        np.testing.assert_allclose(z_bar.z,
                                   self.domain.start_point().z, atol=1e-15)

    def test_quadratic_box_convergence(self):
        sched = constant_schedule(0.05, 1e-3)
        _, z_bar = run_zoopmd(self.problem, NOISELESS, self.geometry,
                              "standard", sched, 2000, seed=42)
        assert np.linalg.norm(z_bar.z) < 0.1

    def test_oracle_budget_standard(self):
        sched = constant_schedule(0.01, 0.01)
        N = 37
        log, _ = run_zoopmd(self.problem, NOISELESS, self.geometry,
                            "standard", sched, N, seed=1, log_every=1)
        assert log.rows[-1].oracle_calls == 2 * (N + 1)

    def test_oracle_budget_residual(self):
        N = 37
        sched = constant_schedule(1e-5, 0.01)
        log, _ = run_zoopmd(self.problem, NOISELESS, self.geometry,
                            "residual", sched, N, seed=1, log_every=1)
        assert log.rows[-1].oracle_calls == N + 2

    def test_determinism(self):
        sched = constant_schedule(0.02, 0.01)
        noise = NoiseModel(sigma=0.1)
        log1, z1 = run_zoopmd(self.problem, noise, self.geometry, "standard",
                              sched, 50, seed=9)
        log2, z2 = run_zoopmd(self.problem, noise, self.geometry, "standard",
                              sched, 50, seed=9)
        assert log1.to_csv_string() == log2.to_csv_string()
        np.testing.assert_array_equal(z1.z, z2.z)

    def test_averaging_and_feasibility(self):
        # recover the iterates from the running averages reported to gap_fn
        # and confirm the streamed average and feasibility
        averages = []
        sched = constant_schedule(0.05, 0.01)
        noise = NoiseModel(sigma=0.05)
        N = 60
        _, z_bar = run_zoopmd(self.problem, noise, self.geometry, "standard",
                              sched, N, seed=3,
                              gap_fn=lambda zb: averages.append(zb.z.copy()) or 0.0)
        assert len(averages) == N + 1
        iterates = [averages[0]]
        for k in range(1, N + 1):
            iterates.append((k + 1) * averages[k] - k * averages[k - 1])
        for it in iterates:
            assert self.domain.contains(BlockPoint.from_concat(it, 1, 1),
                                        tol=1e-7)
        recomputed = np.mean(iterates, axis=0)
        assert np.max(np.abs(recomputed - z_bar.z)) <= 1e-12

    def test_residual_requires_euclidean(self):
        dom = DomainSpec.simplex_pair(2, 2)
        geo = GeometrySetup.entropy_simplex_pair(dom)
        prob = ProblemSpec(n_x=2, n_y=2, clean_value=lambda z: 0.0,
                           metadata=ProblemMetadata(M=1.0))
        with pytest.raises(ConfigurationError):
            run_zoopmd(prob, NOISELESS, geo, "residual",
                       constant_schedule(1e-5, 0.01), 5, seed=0)

    def test_residual_stability_guard(self):
        # alpha = 6 gamma^2 n^2 M^2 / tau^2 >= 1 must be rejected
        with pytest.raises(ConfigurationError, match="alpha"):
            run_zoopmd(self.problem, NOISELESS, self.geometry, "residual",
                       constant_schedule(0.5, 0.01), 5, seed=0)

    def test_unknown_estimator(self):
        with pytest.raises(ConfigurationError):
            run_zoopmd(self.problem, NOISELESS, self.geometry, "bogus",
                       constant_schedule(0.1, 0.01), 5, seed=0)

    def test_tau_exceeding_neighborhood_rejected(self):
        prob = ProblemSpec(n_x=1, n_y=1, clean_value=lambda z: 0.0,
                           neighborhood_radius=0.05)
        with pytest.raises(ConfigurationError):
            run_zoopmd(prob, NOISELESS, self.geometry, "standard",
                       constant_schedule(0.1, 0.2), 5, seed=0)


class TestRunKernelZospg:
    def setup_method(self):
        self.saddle_problem = ProblemSpec(
            n_x=1, n_y=1,
            clean_value=lambda z: float(0.5 * z.x[0] ** 2 - 0.5 * z.y[0] ** 2
                                        + z.x[0] * z.y[0]),
            metadata=ProblemMetadata(M=4.0, L=2.0, mu=1.0, beta=3.0,
                                     L_beta=2.0))
        self.domain = DomainSpec.ball([0.4, 0.4], 1.0, 1, 1)
        self.kernel = build_legendre_kernel(3.0)
        self.noise = NoiseModel(sigma=0.1)

    def test_single_step_average(self):
        # N=1: the average equals the single post-step iterate
        captured = []
        log, z_bar = run_kernel_zospg(
            self.saddle_problem, self.noise, self.kernel, mu=1.0, N=1,
            seed=0, domain=self.domain,
            gap_fn=lambda zb: captured.append(zb.z.copy()) or 0.0)
        assert len(captured) == 1
        np.testing.assert_array_equal(z_bar.z, captured[0])
        assert not np.allclose(z_bar.z, self.domain.start_point().z)

    def test_oracle_budget(self):
        N = 25
        log, _ = run_kernel_zospg(self.saddle_problem, self.noise,
                                  self.kernel, mu=1.0, N=N, seed=1,
                                  domain=self.domain, log_every=1)
        assert log.rows[-1].oracle_calls == 2 * N

    def test_default_schedule_matches_theorem(self):
        log, _ = run_kernel_zospg(self.saddle_problem, self.noise,
                                  self.kernel, mu=1.0, N=4, seed=0,
                                  domain=self.domain, log_every=1)
        taus = [row.tau_k for row in log.rows]
        assert taus[0] / taus[3] == pytest.approx(4 ** (1 / 6))
        gammas = [row.gamma_k for row in log.rows]
        assert gammas[0] == pytest.approx(2.0)       # 2/(mu*1)
        assert gammas[3] == pytest.approx(0.5)       # 2/(mu*4)

    def test_requires_positive_mu(self):
        with pytest.raises(ConfigurationError):
            run_kernel_zospg(self.saddle_problem, self.noise, self.kernel,
                             mu=0.0, N=5, seed=0, domain=self.domain)

    def test_feasibility_of_averages(self):
        feasible = []
        run_kernel_zospg(
            self.saddle_problem, self.noise, self.kernel, mu=1.0, N=50,
            seed=2, domain=self.domain,
            gap_fn=lambda zb: feasible.append(self.domain.contains(zb, 1e-9))
            or 0.0)
        assert all(feasible)

    def test_determinism(self):
        a, _ = run_kernel_zospg(self.saddle_problem, self.noise, self.kernel,
                                mu=1.0, N=30, seed=5, domain=self.domain)
        b, _ = run_kernel_zospg(self.saddle_problem, self.noise, self.kernel,
                                mu=1.0, N=30, seed=5, domain=self.domain)
        assert a.to_csv_string() == b.to_csv_string()


class TestRegularize:
    def test_anchor_value_unchanged(self):
        prob = quadratic_problem()
        z0 = BlockPoint(np.array([0.3]), np.array([-0.2]))
        reg = regularize(prob, mu=2.0, z0=z0)
        assert reg.value(z0) == pytest.approx(prob.value(z0))

    def test_symmetric_penalty_cancels(self):
        prob = ProblemSpec(n_x=1, n_y=1, clean_value=lambda z: 0.0)
        z0 = BlockPoint(np.array([0.0]), np.array([0.0]))
        reg = regularize(prob, mu=2.0, z0=z0)
        z = BlockPoint(np.array([1.0]), np.array([1.0]))
        assert reg.value(z) == pytest.approx(0.0)

    def test_hand_value(self):
        # phi = xy, mu=1, z0=0, z=(2, 3): 6 + 2 - 4.5 = 3.5
        prob = ProblemSpec(n_x=1, n_y=1,
                           clean_value=lambda z: float(z.x[0] * z.y[0]))
        z0 = BlockPoint(np.array([0.0]), np.array([0.0]))
        reg = regularize(prob, mu=1.0, z0=z0)
        z = BlockPoint(np.array([2.0]), np.array([3.0]))
        assert reg.value(z) == pytest.approx(3.5)

    def test_metadata_updated(self):
        prob = quadratic_problem()
        z0 = BlockPoint(np.array([0.0]), np.array([0.0]))
        reg = regularize(prob, mu=0.5, z0=z0)
        assert reg.metadata.mu == 0.5
        assert reg.metadata.L == pytest.approx(prob.metadata.L + 0.5)

    def test_gradient_wrapped(self):
        prob = quadratic_problem()
        z0 = BlockPoint(np.array([0.0]), np.array([0.0]))
        reg = regularize(prob, mu=1.0, z0=z0)
        z = BlockPoint(np.array([1.0]), np.array([2.0]))
        # block gradient gains (mu*x, mu*y) since the y-block carries -grad_y
        np.testing.assert_allclose(reg.grad(z),
                                   prob.grad(z) + np.array([1.0, 2.0]))

    def test_invalid_mu(self):
        with pytest.raises(ConfigurationError):
            regularize(quadratic_problem(), 0.0,
                       BlockPoint(np.array([0.0]), np.array([0.0])))


class TestEnvelope:
    def test_formula_value(self):
        # direct recomputation of the bound from its definition
        n, beta, kappa, kb = 2, 3.0, 3.0, 0.6
        L, sigma, mu, G, N = 2.0, 0.1, 1.0, 4.0, 1000
        A1 = 3 * beta * (kappa * sigma ** 2) ** ((beta - 1) / beta) \
            * (kb * L) ** (2 / beta)
        A2 = 9 * kappa * G ** 2
        expected = (n ** (2 - 1 / beta) * A1 / N ** ((beta - 1) / beta)
                    + A2 * n * (1 + math.log(N)) / N) / mu
        got = theorem_envelope_kernel(n=n, beta=beta, kappa=kappa,
                                      kappa_beta=kb, L=L, sigma=sigma, mu=mu,
                                      G=G, N=N)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_decreasing_in_budget(self):
        kwargs = dict(n=2, beta=3.0, kappa=3.0, kappa_beta=0.6, L=2.0,
                      sigma=0.1, mu=1.0, G=4.0)
        vals = [theorem_envelope_kernel(N=N, **kwargs)
                for N in (10**2, 10**3, 10**4)]
        assert vals[0] > vals[1] > vals[2]
