"""
Small dense QP over a product of friction pyramids.

Problem:

    minimize    ½ fᵀ H f + cᵀ f
    subject to  0 <= f_z,i <= F,  |f_x,i| <= μ f_z,i,  |f_y,i| <= μ f_z,i

for n feet (3n variables), H positive definite.

Solution strategy:
1. Unconstrained minimizer; accepted directly if it is feasible.
2. Monotone FISTA (accelerated projected gradient) using the exact
   Euclidean projection onto each pyramid. The objective of the returned
   iterate never increases.
3. Active-set polish: the constraints active at the current iterate are
   treated as equalities and the KKT system is solved exactly. Feet at the
   pyramid apex are fixed to zero and verified with a normal-cone test.
   Multipliers must be non-negative and every constraint satisfied.

The stationarity residual is the norm of the gradient mapping
L·‖f − Π(f − ∇/L)‖, which is zero exactly at the constrained optimum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum, auto

import numpy as np

from leapstack.models.state import FloatArray

logger = logging.getLogger(__name__)


class SolverStatus(Enum):
    """Outcome of a force-distribution solve."""

    OK = auto()
    """Converged; constraints satisfied and residual below tolerance."""

    NO_STANCE_FEET = auto()
    """No foot in contact; zero forces returned."""

    NOT_CONVERGED = auto()
    """Iteration limit reached; best feasible iterate returned."""


@dataclass(frozen=True, eq=False)
class QpResult:
    """
    Force-distribution solve result.

    Attributes:
        forces: nx3 forces (one row per foot in the problem).
        status: Solver outcome.
        iterations: Projected-gradient iterations used.
        residual: Gradient-mapping stationarity residual.
        polished: Whether the active-set polish produced the answer.
        objective_history: Objective of the accepted iterate after each
            iteration, starting with the initial point.
    """

    forces: FloatArray
    status: SolverStatus
    iterations: int
    residual: float
    polished: bool = False
    objective_history: tuple[float, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.status == SolverStatus.OK


def project_pyramid(point: FloatArray, mu: float, max_normal_force: float) -> FloatArray:
    """
    Exact Euclidean projection onto {0 <= z <= F, |x| <= μz, |y| <= μz}.

    For fixed z the optimal tangential components are clips of the input;
    the remaining one-dimensional problem in z is convex and piecewise
    quadratic with breakpoints |x0|/μ and |y0|/μ.
    """
    x0, y0, z0 = (float(v) for v in point)
    mags = sorted((abs(x0), abs(y0)))
    breaks = [m / mu for m in mags]

    def cost(z: float) -> float:
        return (z - z0) ** 2 + sum(max(m - mu * z, 0.0) ** 2 for m in mags)

    # (interval, magnitudes still exceeding μz inside it)
    pieces = (
        (0.0, breaks[0], mags),
        (breaks[0], breaks[1], mags[1:]),
        (breaks[1], math.inf, []),
    )
    best_z, best_cost = 0.0, math.inf
    for lo, hi, active in pieces:
        if hi < lo:
            continue
        z = (z0 + mu * sum(active)) / (1.0 + mu * mu * len(active))
        z = min(max(z, lo), hi)
        value = cost(z)
        if value < best_cost:
            best_z, best_cost = z, value

    z = min(best_z, max_normal_force)
    limit = mu * z
    return np.array([min(max(x0, -limit), limit), min(max(y0, -limit), limit), z])


def constraint_rows(mu: float, max_normal_force: float) -> tuple[FloatArray, FloatArray]:
    """
    Per-foot inequality rows C f <= d.

    Row order: -f_z <= 0, f_z <= F, ±f_x - μ f_z <= 0, ±f_y - μ f_z <= 0.
    """
    rows = np.array(
        [
            [0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, -mu],
            [-1.0, 0.0, -mu],
            [0.0, 1.0, -mu],
            [0.0, -1.0, -mu],
        ]
    )
    bounds = np.array([0.0, max_normal_force, 0.0, 0.0, 0.0, 0.0])
    return rows, bounds


class PyramidQp:
    """
    Solver for one problem instance.

    Args:
        hessian: 3n x 3n positive definite matrix H.
        linear: 3n vector c.
        mu: Friction coefficient.
        max_normal_force: Per-foot normal force cap F.
        max_iterations: Projected-gradient iteration limit.
        tolerance: Residual accepted as converged.
        polish_rounds: Active-set changes allowed per polish attempt.
        polish_every: Iterations between polish attempts.
    """

    def __init__(
        self,
        hessian: FloatArray,
        linear: FloatArray,
        mu: float,
        max_normal_force: float,
        max_iterations: int = 200,
        tolerance: float = 1e-6,
        polish_rounds: int = 8,
        polish_every: int = 10,
    ) -> None:
        self._h = np.asarray(hessian, dtype=np.float64)
        self._c = np.asarray(linear, dtype=np.float64)
        n_vars = self._c.shape[0]
        if n_vars % 3 != 0 or self._h.shape != (n_vars, n_vars):
            raise ValueError("QP dimensions must be 3n")
        self._n = n_vars // 3
        self._mu = mu
        self._fmax = max_normal_force
        self._max_iterations = max_iterations
        self._tolerance = tolerance
        self._polish_rounds = polish_rounds
        self._polish_every = max(1, polish_every)
        self._lipschitz = float(np.max(np.linalg.eigvalsh(self._h)))
        self._rows, self._bounds = constraint_rows(mu, max_normal_force)
        self._rays = np.array(
            [[sx * mu, sy * mu, 1.0] for sx in (-1.0, 1.0) for sy in (-1.0, 1.0)]
        )

    def objective(self, f: FloatArray) -> float:
        return float(0.5 * f @ self._h @ f + self._c @ f)

    def gradient(self, f: FloatArray) -> FloatArray:
        return np.asarray(self._h @ f + self._c)

    def project(self, f: FloatArray) -> FloatArray:
        """Project a stacked 3n force vector onto the pyramids."""
        blocks = np.asarray(f, dtype=np.float64).reshape(self._n, 3)
        return np.concatenate([project_pyramid(b, self._mu, self._fmax) for b in blocks])

    def residual(self, f: FloatArray) -> float:
        """Gradient-mapping stationarity residual."""
        step = self.project(f - self.gradient(f) / self._lipschitz)
        return float(self._lipschitz * np.linalg.norm(f - step))

    def max_violation(self, f: FloatArray) -> float:
        blocks = np.asarray(f).reshape(self._n, 3)
        return float(np.max(blocks @ self._rows.T - self._bounds))

    def solve(self) -> QpResult:
        """Run the fast path, accelerated projected gradient and polish."""
        unconstrained = np.linalg.solve(self._h, -self._c)
        if self.max_violation(unconstrained) <= 1e-12 * max(1.0, np.max(np.abs(unconstrained))):
            return self._result(unconstrained, 0, polished=False, history=[])

        x = self.project(unconstrained)
        x_prev = x.copy()
        y = x.copy()
        t = 1.0
        value = self.objective(x)
        history = [value]
        polished = self._polish(x)
        if polished is not None:
            return self._result(polished, 0, polished=True, history=history)

        step = 1.0 / self._lipschitz
        k = 0
        for k in range(1, self._max_iterations + 1):
            z = self.project(y - step * self.gradient(y))
            z_value = self.objective(z)
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            x_prev = x
            if z_value <= value:
                x, value = z, z_value
            y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev)
            t = t_next
            history.append(value)

            if k % self._polish_every == 0 or k == self._max_iterations:
                polished = self._polish(x)
                if polished is not None:
                    return self._result(polished, k, polished=True, history=history)
            if self.residual(x) <= self._tolerance:
                break

        result = self._result(x, k, polished=False, history=history)
        if not result.ok:
            logger.debug(
                "Force QP not converged after %d iterations (residual %.3e)",
                k,
                result.residual,
            )
        return result

    def _result(
        self, f: FloatArray, iterations: int, *, polished: bool, history: list[float]
    ) -> QpResult:
        residual = self.residual(f)
        status = SolverStatus.OK if residual <= self._tolerance else SolverStatus.NOT_CONVERGED
        return QpResult(
            forces=np.asarray(f).reshape(self._n, 3).copy(),
            status=status,
            iterations=iterations,
            residual=residual,
            polished=polished,
            objective_history=tuple(history),
        )

    def _polish(self, f: FloatArray) -> FloatArray | None:
        """
        Solve the KKT system on the active set identified at f.

        Returns:
            The exact optimum if the active set is verified, else None.
        """
        blocks = np.asarray(f).reshape(self._n, 3)
        scale = max(1.0, float(np.max(np.abs(blocks))))
        tol = 1e-9 * scale
        apex = {i for i in range(self._n) if blocks[i, 2] <= tol}
        active: set[tuple[int, int]] = set()
        for i in range(self._n):
            if i in apex:
                continue
            slack = self._bounds - self._rows @ blocks[i]
            active.update((i, r) for r in range(1, 6) if slack[r] <= tol)

        for _ in range(self._polish_rounds + 1):
            solution = self._solve_kkt(apex, active)
            if solution is None:
                return None
            candidate, multipliers = solution

            if multipliers:
                worst_row, worst = min(multipliers.items(), key=lambda kv: kv[1])
                if worst < -1e-10 * scale:
                    active.discard(worst_row)
                    continue

            cand_blocks = candidate.reshape(self._n, 3)
            violations = [
                (float(self._rows[r] @ cand_blocks[i] - self._bounds[r]), i, r)
                for i in range(self._n)
                if i not in apex
                for r in range(6)
            ]
            if violations:
                amount, foot, row = max(violations)
                if amount > 1e-9 * scale:
                    if row == 0:
                        apex.add(foot)
                        active = {(i, r) for (i, r) in active if i != foot}
                    else:
                        active.add((foot, row))
                    continue

            grad = self.gradient(candidate).reshape(self._n, 3)
            released = [i for i in apex if np.min(self._rays @ grad[i]) < -1e-10 * scale]
            if released:
                apex.discard(released[0])
                continue
            return candidate
        return None

    def _solve_kkt(
        self, apex: set[int], active: set[tuple[int, int]]
    ) -> tuple[FloatArray, dict[tuple[int, int], float]] | None:
        free = [3 * i + j for i in range(self._n) if i not in apex for j in range(3)]
        candidate = np.zeros(3 * self._n)
        if not free:
            return candidate, {}
        index = {v: k for k, v in enumerate(free)}
        rows = sorted(active)
        m = len(free)
        kkt = np.zeros((m + len(rows), m + len(rows)))
        rhs = np.zeros(m + len(rows))
        kkt[:m, :m] = self._h[np.ix_(free, free)]
        rhs[:m] = -self._c[free]
        for k, (foot, row) in enumerate(rows):
            for j in range(3):
                coeff = self._rows[row, j]
                kkt[m + k, index[3 * foot + j]] = coeff
                kkt[index[3 * foot + j], m + k] = coeff
            rhs[m + k] = self._bounds[row]
        try:
            solution = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(solution)):
            return None
        candidate[free] = solution[:m]
        return candidate, {row: float(solution[m + k]) for k, row in enumerate(rows)}
