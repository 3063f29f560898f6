import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skeptic.correlation import CorrelationMatrix, psd_repair, skeptic_kendall_matrix, skeptic_spearman_matrix
from skeptic.errors import ConvergenceError, InfeasibleError, InputError, PreconditionError
from skeptic.graph import GraphSpec
from skeptic.solvers import SolverConfig, clime, glasso, graphical_dantzig, neighborhood_lasso, solve
from skeptic.solvers.glasso import glasso_kkt_residual, glasso_objective
from skeptic.solvers.lasso import lasso_kkt_residual, solve_lasso_gram
from skeptic.solvers.lp import min_feasible_delta, solve_dantzig_lp

cvxopt = pytest.importorskip("cvxopt")
cvxopt.solvers.options["show_progress"] = False
cvxopt.solvers.options["glpk"] = {"msg_lev": "GLP_MSG_OFF"}


def cvxopt_dantzig(A, b, delta):
    """Oracle LP (GLPK simplex) with variables (theta, t): min sum t, -t <= theta <= t, |b - A theta| <= delta."""
    A = np.atleast_2d(np.asarray(A, float))
    m, p = A.shape
    I, Z = np.eye(p), np.zeros((m, p))
    G = np.vstack([
        np.hstack([I, -I]),
        np.hstack([-I, -I]),
        np.hstack([A, Z]),
        np.hstack([-A, Z]),
    ])
    h = np.concatenate([np.zeros(2 * p), b + delta, delta - b])
    c = np.concatenate([np.zeros(p), np.ones(p)])
    sol = cvxopt.solvers.lp(cvxopt.matrix(c), cvxopt.matrix(G), cvxopt.matrix(h), solver="glpk")
    assert sol["status"] == "optimal"
    return np.array(sol["x"]).ravel()[:p]


def prox_grad_glasso(S, lam, iters=20000):
    """Oracle: proximal gradient on the penalized log-likelihood with backtracking."""
    d = S.shape[0]
    omega = np.diag(1.0 / np.diag(S))
    f = lambda W: np.sum(S * W) - np.linalg.slogdet(W)[1]

    def prox(W, t):
        out = np.sign(W) * np.maximum(np.abs(W) - t * lam, 0.0)
        out[np.diag_indices(d)] = np.diag(W)
        return out

    step = 1.0
    for _ in range(iters):
        grad = S - np.linalg.inv(omega)
        while True:
            cand = prox(omega - step * grad, step)
            if np.linalg.eigvalsh(cand)[0] > 0:
                diff = cand - omega
                if f(cand) <= f(omega) + np.sum(grad * diff) + np.sum(diff**2) / (2 * step):
                    break
            step /= 2
        if np.max(np.abs(cand - omega)) < 1e-14:
            omega = cand
            break
        omega = cand
        step *= 1.5
    return omega


def chain_sigma(d, r=0.4):
    omega = np.eye(d)
    for j in range(d - 1):
        omega[j, j + 1] = omega[j + 1, j] = -r
    sigma = np.linalg.inv(omega)
    dd = np.sqrt(np.diag(sigma))
    return sigma / np.outer(dd, dd)


class TestGlasso:
    def test_identity(self):
        for lam in (0.0, 0.1, 1.0):
            est = glasso(np.eye(5), lam)
            np.testing.assert_allclose(est.omega, np.eye(5), atol=1e-12)
            assert len(est.edge_set) == 0

    def test_lambda_above_max_gives_diagonal(self):
        S = chain_sigma(4)
        lam = np.max(np.abs(S - np.eye(4))) + 1e-3
        est = glasso(S, lam)
        np.testing.assert_allclose(est.omega, np.eye(4), atol=1e-9)

    def test_matches_proximal_gradient_oracle(self):
        S = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]])
        for lam in (0.05, 0.2):
            est = glasso(S, lam)
            ref = prox_grad_glasso(S, lam)
            assert abs(glasso_objective(S, est.omega, lam) - glasso_objective(S, ref, lam)) <= 1e-6
            np.testing.assert_allclose(est.omega, ref, atol=1e-5)

    def test_kkt_and_symmetry(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((200, 12)) @ rng.standard_normal((12, 12))
        S = skeptic_kendall_matrix(X)
        S = psd_repair(S)
        est = glasso(S, 0.1)
        assert est.residual <= 1e-6
        assert glasso_kkt_residual(S.entries, est.omega, 0.1) <= 1e-6
        np.testing.assert_array_equal(est.omega, est.omega.T)
        assert np.linalg.eigvalsh(est.omega)[0] > 0

    def test_agrees_with_sklearn(self):
        sk = pytest.importorskip("sklearn.covariance")
        rng = np.random.default_rng(1)
        X = rng.standard_normal((300, 8)) @ np.linalg.cholesky(chain_sigma(8)).T
        S = np.corrcoef(X, rowvar=False)
        ours = glasso(S, 0.1)
        _, ref = sk.graphical_lasso(S, alpha=0.1, tol=1e-10, max_iter=1000)
        diff = abs(glasso_objective(S, ours.omega, 0.1) - glasso_objective(S, ref, 0.1))
        assert diff <= 1e-6

    def test_rejects_indefinite(self):
        S = np.array([[1.0, 1.02], [1.02, 1.0]])
        with pytest.raises(PreconditionError):
            glasso(S, 0.1)

    def test_iteration_cap_reports_last_iterate(self):
        S = chain_sigma(10)
        with pytest.raises(ConvergenceError) as err:
            glasso(S, 0.01, SolverConfig(max_sweeps=1, max_iterations=1, convergence_tol=1e-12))
        assert err.value.last_iterate is not None

    def test_warm_start_same_answer(self):
        S = chain_sigma(10)
        cold = glasso(S, 0.05)
        warm = glasso(S, 0.05, init=glasso(S, 0.2))
        np.testing.assert_allclose(warm.omega, cold.omega, atol=1e-5)


class TestDantzigLp:
    def test_example_identity_design(self):
        theta = solve_dantzig_lp(np.eye(2), [1.0, 0.3], 0.2)
        np.testing.assert_allclose(theta, [0.8, 0.1], atol=1e-10)

    def test_against_cvxopt(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            m = int(rng.integers(2, 8))
            S = chain_sigma(m + 1)
            A, b = S[1:, 1:], S[1:, 0]
            delta = float(rng.uniform(0.02, 0.3))
            ours, info = solve_dantzig_lp(A, b, delta, with_info=True)
            ref = cvxopt_dantzig(A, b, delta)
            assert abs(np.abs(ours).sum() - np.abs(ref).sum()) <= 1e-8
            assert info["gap"] <= 1e-8
            assert np.max(np.abs(b - A @ ours)) <= delta + 1e-9

    def test_infeasible_reports_minimum(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        b = np.array([1.0, -1.0])
        assert min_feasible_delta(A, b) == pytest.approx(1.0, abs=1e-9)
        with pytest.raises(InfeasibleError) as err:
            solve_dantzig_lp(A, b, 0.5)
        assert err.value.min_feasible == pytest.approx(1.0, abs=1e-9)


class TestClime:
    def test_scalar(self):
        for delta in (0.1, 0.5):
            est = clime(np.array([[1.0]]), delta)
            assert est.omega[0, 0] == pytest.approx(1 - delta, abs=1e-10)

    def test_identity(self):
        est = clime(np.eye(4), 0.1)
        np.testing.assert_allclose(est.omega, 0.9 * np.eye(4), atol=1e-10)

    def test_two_by_two_against_cvxopt(self):
        S = np.array([[1.0, 0.5], [0.5, 1.0]])
        delta = 0.1
        est = clime(S, delta)
        for j in range(2):
            ref = cvxopt_dantzig(S, np.eye(2)[:, j], delta)
            assert np.abs(est.state[:, j]).sum() == pytest.approx(np.abs(ref).sum(), abs=1e-8)
        assert np.max(np.abs(S @ est.state - np.eye(2))) <= delta + 1e-9
        np.testing.assert_array_equal(est.omega, est.omega.T)

    def test_infeasible_names_column(self):
        S = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(InfeasibleError) as err:
            clime(S, 0.1)
        assert err.value.column == 0
        assert err.value.min_feasible == pytest.approx(0.5, abs=1e-8)


class TestGraphicalDantzig:
    def test_identity(self):
        est = graphical_dantzig(np.eye(3), 0.1)
        np.testing.assert_allclose(est.omega, np.eye(3), atol=1e-12)

    def test_chain_against_oracle(self):
        S = chain_sigma(3)
        delta = 0.05
        est = graphical_dantzig(S, delta)
        ref = np.zeros((3, 3))
        for j in range(3):
            idx = [k for k in range(3) if k != j]
            A, b = S[np.ix_(idx, idx)], S[idx, j]
            theta = cvxopt_dantzig(A, b, delta)
            w = 1 / (1 - 2 * theta @ b + theta @ A @ theta)
            ref[j, j] = w
            ref[idx, j] = -w * theta
        np.testing.assert_allclose(est.omega, (ref + ref.T) / 2, atol=1e-6)
        assert est.edge_set == GraphSpec(3, {(0, 1), (1, 2)})


class TestLasso:
    def test_soft_threshold_example(self):
        theta = solve_lasso_gram(np.eye(2), [1.0, 0.3], 0.5)
        np.testing.assert_allclose(theta, [0.5, 0.0], atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.5))
    def test_kkt_holds(self, seed, lam):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(1, 8))
        M = rng.standard_normal((3 * p, p))
        G = M.T @ M / (3 * p) + 0.1 * np.eye(p)
        c = rng.standard_normal(p)
        theta = solve_lasso_gram(G, c, lam)
        assert lasso_kkt_residual(G, c, theta, lam) <= 1e-6

    def test_neighborhood_recovers_chain(self):
        S = chain_sigma(6)
        for rule in ("AND", "OR"):
            est = neighborhood_lasso(S, 0.05, rule=rule)
            assert est.edge_set == GraphSpec(6, {(j, j + 1) for j in range(5)})

    def test_and_or_differ(self):
        # node 2 selects 0 but node 0 does not select 2
        S = np.array([[1.0, 0.3, 0.0], [0.3, 1.0, 0.8], [0.0, 0.8, 1.0]])
        and_e = neighborhood_lasso(S, 0.15, rule="AND").edge_set
        or_e = neighborhood_lasso(S, 0.15, rule="OR").edge_set
        assert and_e.edges == {(0, 1), (1, 2)}
        assert or_e.edges == {(0, 1), (0, 2), (1, 2)}

    def test_bad_rule(self):
        with pytest.raises(InputError):
            neighborhood_lasso(np.eye(3), 0.1, rule="XOR")


class TestCrossSolver:
    def test_supports_agree_on_chain(self):
        S = chain_sigma(5)
        truth = GraphSpec(5, {(j, j + 1) for j in range(4)})
        params = {"glasso": 0.1, "clime": 0.05, "gdantzig": 0.05, "neighborhood_lasso": 0.05}
        for name, lam in params.items():
            assert solve(S, name, lam).edge_set == truth, name

    def test_plug_in_indifference(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((100, 5)) @ np.linalg.cholesky(chain_sigma(5)).T
        S_rho = psd_repair(skeptic_spearman_matrix(X))
        arr = np.array(S_rho.entries)
        relabeled = CorrelationMatrix(arr, "pearson")
        for name in ("glasso", "clime", "gdantzig", "neighborhood_lasso"):
            a = solve(S_rho, name, 0.1)
            b = solve(relabeled, name, 0.1)
            np.testing.assert_array_equal(a.omega, b.omega)

    def test_glasso_sparsity_monotone(self):
        S = psd_repair(np.corrcoef(np.random.default_rng(4).standard_normal((60, 15)), rowvar=False))
        counts = [len(glasso(S, lam).edge_set) for lam in np.geomspace(0.5, 0.02, 12)]
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    def test_unknown_solver(self):
        with pytest.raises(InputError):
            solve(np.eye(2), "bogus", 0.1)

    def test_diagnostics_fields(self):
        d = glasso(np.eye(3), 0.1).diagnostics()
        for key in ("solver", "lambda", "d", "edge_count", "iterations", "final_residual"):
            assert key in d
