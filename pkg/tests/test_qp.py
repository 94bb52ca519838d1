"""Tests for the friction-pyramid QP."""

import numpy as np
import pytest
from scipy.optimize import minimize

from leapstack.control.qp import PyramidQp, SolverStatus, constraint_rows, project_pyramid

MU = 0.6
FMAX = 500.0


def feasible(f: np.ndarray, mu: float = MU, fmax: float = FMAX, tol: float = 1e-9) -> bool:
    rows, bounds = constraint_rows(mu, fmax)
    return bool(np.all(f.reshape(-1, 3) @ rows.T - bounds <= tol))


def reference_objective(h: np.ndarray, c: np.ndarray, n: int) -> float:
    """Objective of an SLSQP solve of the same problem."""
    rows, bounds = constraint_rows(MU, FMAX)
    full_rows = np.kron(np.eye(n), rows)
    full_bounds = np.tile(bounds, n)
    x0 = np.tile([0.0, 0.0, 10.0], n)
    result = minimize(
        lambda f: 0.5 * f @ h @ f + c @ f,
        x0,
        jac=lambda f: h @ f + c,
        constraints=[{"type": "ineq", "fun": lambda f: full_bounds - full_rows @ f}],
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 500},
    )
    return float(result.fun)


class TestProjectPyramid:
    """Tests for the Euclidean pyramid projection."""

    def test_interior_unchanged(self):
        """Test a feasible point is returned as is."""
        p = np.array([10.0, -5.0, 100.0])
        assert project_pyramid(p, MU, FMAX).tolist() == p.tolist()

    def test_below_apex(self):
        """Test a point below the apex projects to zero."""
        assert project_pyramid(np.array([0.0, 0.0, -5.0]), MU, FMAX).tolist() == [0.0, 0.0, 0.0]

    def test_normal_force_cap(self):
        """Test the cap face."""
        assert project_pyramid(np.array([0.0, 0.0, 900.0]), MU, FMAX)[2] == FMAX

    def test_outside_point_is_closest_feasible(self):
        """Test the projection beats sampled feasible points."""
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = rng.normal(0.0, 50.0, 3)
            proj = project_pyramid(p, MU, FMAX)
            assert feasible(proj)
            dist = np.linalg.norm(p - proj)
            samples = rng.uniform(-1.0, 1.0, (200, 3)) * [MU, MU, 1.0]
            samples[:, 2] = np.abs(samples[:, 2]) * 200.0
            samples[:, :2] *= samples[:, 2:3]
            others = np.linalg.norm(samples - p, axis=1)
            assert dist <= others.min() + 1e-9

    def test_idempotent(self):
        """Test projecting twice changes nothing."""
        p = project_pyramid(np.array([80.0, 30.0, 100.0]), MU, FMAX)
        assert project_pyramid(p, MU, FMAX) == pytest.approx(p, abs=1e-12)


class TestPyramidQp:
    """Tests for PyramidQp.solve."""

    def test_feasible_unconstrained_minimum(self):
        """Test an interior minimizer is returned without iterating."""
        target = np.array([1.0, 0.0, 50.0])
        result = PyramidQp(np.eye(3), -target, MU, FMAX).solve()
        assert result.ok
        assert result.iterations == 0
        assert result.forces[0] == pytest.approx(target)

    def test_identity_hessian_is_projection(self):
        """Test with H = I the solution is the projection of the target."""
        target = np.array([10.0, 4.0, 5.0])
        result = PyramidQp(np.eye(3), -target, MU, FMAX).solve()
        assert result.status == SolverStatus.OK
        assert result.forces[0] == pytest.approx(project_pyramid(target, MU, FMAX), abs=1e-6)

    def test_objective_non_increasing(self):
        """Test the accepted objective never increases."""
        rng = np.random.default_rng(5)
        m = rng.normal(size=(6, 6))
        h = m @ m.T + 0.1 * np.eye(6)
        c = rng.normal(0.0, 50.0, 6)
        result = PyramidQp(h, c, MU, FMAX).solve()
        history = np.array(result.objective_history)
        assert np.all(np.diff(history) <= 1e-9)

    def test_matches_reference_solver(self):
        """Test optimal objectives against SLSQP on random problems."""
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = rng.normal(size=(6, 6))
            h = m @ m.T + 0.5 * np.eye(6)
            c = rng.normal(0.0, 20.0, 6)
            qp = PyramidQp(h, c, MU, FMAX, max_iterations=500)
            result = qp.solve()
            assert feasible(result.forces.ravel(), tol=1e-7)
            ours = qp.objective(result.forces.ravel())
            reference = reference_objective(h, c, 2)
            assert ours <= reference + 1e-5 * max(1.0, abs(reference))

    def test_invalid_dimensions(self):
        """Test non-3n problems are rejected."""
        with pytest.raises(ValueError):
            PyramidQp(np.eye(4), np.zeros(4), MU, FMAX)
