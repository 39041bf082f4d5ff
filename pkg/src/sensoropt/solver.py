"""Relaxed placement solver: log-barrier interior point with Newton steps.

The relaxed problem minimizes the Monte-Carlo objective over the box
[0, 1]^n subject to a fixed sensor budget (an equality on the sum of the
weights).  The 2n box constraints go into a logarithmic barrier; each
barrier subproblem is solved by equality-constrained Newton steps with
backtracking line search.  Rounding and an enumeration-based repair of
ambiguous entries turn the relaxed optimum into a certified binary
configuration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .fim import (
    CountingEvaluator,
    ElementaryFimSet,
    check_sensor_vector,
    mc_objective,
    preflight_check,
)

_ARMIJO_SLOPE = 0.01
_BACKTRACK = 0.5
_BOUNDARY_FRACTION = 0.99
_MAX_BACKTRACKS = 60


@dataclass
class SolverOptions:
    """Interior-point controls.

    ``tolerance`` bounds both the barrier duality-gap estimate and the
    stationarity residual of the returned point.  ``ambiguity_threshold``
    marks relaxed weights in (eta, 1 - eta) as ambiguous during repair.
    """

    tolerance: float = 1e-6
    max_outer_iterations: int = 100
    max_newton_iterations: int = 50
    barrier_t0: float = 2.0
    barrier_multiplier: float = 10.0
    # Coordinates genuinely pinned to a bound sit within ~1e-8 of it at
    # the final barrier stage, while fractional coordinates can come out
    # anywhere in between, including 0.99+; the threshold below separates
    # the two regimes so the repair enumerates every fractional entry.
    ambiguity_threshold: float = 1e-3
    enumeration_cap: int = 1_000_000

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if not 0 < self.ambiguity_threshold < 0.5:
            raise ValueError(
                f"ambiguity_threshold must be in (0, 0.5), got {self.ambiguity_threshold}"
            )
        if self.barrier_t0 <= 0 or self.barrier_multiplier <= 1:
            raise ValueError("barrier parameters must satisfy t0 > 0, multiplier > 1")


@dataclass(frozen=True)
class IterationRecord:
    """One Newton step: objective values are in 'larger is better' orientation."""

    iteration: int
    barrier_t: float
    objective_value: float
    newton_decrement: float
    step_size: float
    step_norm: float


class ConvergenceError(RuntimeError):
    """Solver failed to converge; carries the iteration trace."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass
class RelaxedSolution:
    """Optimum of the relaxed problem with solve statistics."""

    z_star: np.ndarray
    objective_relaxed: float  # expected log-determinant, larger is better
    iterations: int
    objective_evaluations: int
    gradient_evaluations: int
    hessian_evaluations: int
    converged: bool
    kkt_residual: float
    trace: list[IterationRecord] = field(default_factory=list)


@dataclass
class BinaryPlacement:
    """Binary configuration derived from a relaxed optimum."""

    delta: np.ndarray  # 0/1 ints, shape (n_dof,)
    objective_binary: float
    certified_optimal: bool
    gap: float  # objective_relaxed - objective_binary, >= 0 up to roundoff
    ambiguous_indices: tuple[int, ...] = ()
    objective_evaluations: int = 0

    @property
    def stories(self) -> tuple[int, ...]:
        """Instrumented stories, 1-based."""
        return tuple(int(i) + 1 for i in np.flatnonzero(self.delta))


def _barrier_value(z: np.ndarray) -> float:
    return float(-np.sum(np.log(z)) - np.sum(np.log(1.0 - z)))


def solve_relaxed(
    fimset: ElementaryFimSet,
    budget: int,
    options: SolverOptions | None = None,
    z0: np.ndarray | None = None,
    callback=None,
) -> RelaxedSolution:
    """Solve the relaxed placement problem to the requested tolerance.

    Parameters
    ----------
    fimset : ElementaryFimSet
    budget : int
        Number of sensors; 1 <= budget <= n_dof.
    options : SolverOptions, optional
    z0 : ndarray, optional
        Strictly interior feasible start; defaults to the uniform point
        ``budget / n_dof``.  The converged objective value does not depend
        on the start.
    callback : callable, optional
        Called with the iterate after every accepted Newton step.

    Raises
    ------
    ConvergenceError
        If the iteration limits are exhausted; the trace is attached.
    """
    options = options or SolverOptions()
    n = fimset.n_dof
    if not 1 <= budget <= n:
        raise ValueError(f"budget must satisfy 1 <= budget <= {n}, got {budget}")
    preflight_check(fimset)

    evaluator = CountingEvaluator(fimset)
    if budget == n:
        # The feasible set is the single point of all ones.
        z = np.ones(n)
        value = -evaluator.objective(z)
        return RelaxedSolution(
            z_star=z,
            objective_relaxed=value,
            iterations=0,
            objective_evaluations=evaluator.n_objective,
            gradient_evaluations=0,
            hessian_evaluations=0,
            converged=True,
            kkt_residual=0.0,
            trace=[],
        )

    if z0 is None:
        z = np.full(n, budget / n)
    else:
        z = check_sensor_vector(z0, n, budget=budget).astype(float).copy()
        if np.any(z <= 0) or np.any(z >= 1):
            raise ValueError("z0 must be strictly interior to the box")

    ones = np.ones(n)
    m_ineq = 2 * n
    t = options.barrier_t0
    h_val = evaluator.objective(z)

    trace: list[IterationRecord] = []
    iteration = 0
    kkt_residual = math.inf
    converged = False

    for _outer in range(options.max_outer_iterations):
        for _inner in range(options.max_newton_iterations):
            grad_h, hess_h = evaluator.gradient_hessian(z)
            grad_phi = -1.0 / z + 1.0 / (1.0 - z)
            hess_phi = 1.0 / z**2 + 1.0 / (1.0 - z) ** 2
            grad_t = t * grad_h + grad_phi
            hess_t = t * hess_h
            hess_t[np.diag_indices_from(hess_t)] += hess_phi

            # Equality-constrained Newton step by block elimination:
            # solve H dz = -(g + w 1) with 1^T dz = 0.
            try:
                factor = cho_factor(hess_t, lower=True)
            except np.linalg.LinAlgError:
                ridge = 1e-12 * np.trace(hess_t) / n
                hess_t[np.diag_indices_from(hess_t)] += ridge
                factor = cho_factor(hess_t, lower=True)
            hinv_g = cho_solve(factor, grad_t)
            hinv_1 = cho_solve(factor, ones)
            w = -float(ones @ hinv_g) / float(ones @ hinv_1)
            dz = -(hinv_g + w * hinv_1)

            decrement_sq = max(float(-grad_t @ dz), 0.0)
            nu = w / t

            if decrement_sq / 2.0 <= 1e-9 * t:
                if m_ineq / t >= options.tolerance:
                    break
                # Final stage: center until the optimality certificate
                # itself passes, with a floor guarding against stalling
                # at the limits of double precision.
                station, comp = kkt_certificate(z, grad_h, nu)[:2]
                if max(station, comp) <= 0.5 * options.tolerance:
                    break
                if decrement_sq / 2.0 <= 1e-13 * t:
                    break

            # Fraction-to-boundary cap keeps the iterate strictly interior.
            step = 1.0
            negative = dz < 0
            if np.any(negative):
                step = min(step, _BOUNDARY_FRACTION * np.min(z[negative] / -dz[negative]))
            positive = dz > 0
            if np.any(positive):
                step = min(
                    step, _BOUNDARY_FRACTION * np.min((1.0 - z[positive]) / dz[positive])
                )

            psi_now = t * h_val + _barrier_value(z)
            slope = float(grad_t @ dz)
            accepted = False
            for _bt in range(_MAX_BACKTRACKS):
                z_trial = z + step * dz
                h_trial = evaluator.objective(z_trial)
                psi_trial = t * h_trial + _barrier_value(z_trial)
                if psi_trial <= psi_now + _ARMIJO_SLOPE * step * slope:
                    accepted = True
                    break
                step *= _BACKTRACK
            if not accepted:
                raise ConvergenceError(
                    f"line search failed at barrier parameter {t:.3g}", trace
                )

            z = z_trial
            # Remove accumulated roundoff in the budget equality.
            z = z + (budget - z.sum()) / n
            h_val = h_trial
            iteration += 1
            trace.append(
                IterationRecord(
                    iteration=iteration,
                    barrier_t=t,
                    objective_value=-h_val,
                    newton_decrement=decrement_sq / 2.0,
                    step_size=step,
                    step_norm=float(np.max(np.abs(step * dz))),
                )
            )
            if callback is not None:
                callback(z.copy())
        else:
            raise ConvergenceError(
                f"Newton iterations exhausted at barrier parameter {t:.3g}", trace
            )

        if m_ineq / t < options.tolerance:
            # Split the stationarity residual into nonnegative bound
            # multipliers; stationarity is then exact and the certificate
            # reduces to complementary slackness, which shrinks like 1/t.
            station, comp, _, _ = kkt_certificate(z, grad_h, nu)
            kkt_residual = max(station, comp)
            if kkt_residual < options.tolerance:
                converged = True
                break
        t *= options.barrier_multiplier
    else:
        raise ConvergenceError("barrier stages exhausted without convergence", trace)
    return RelaxedSolution(
        z_star=z,
        objective_relaxed=-h_val,
        iterations=iteration,
        objective_evaluations=evaluator.n_objective,
        gradient_evaluations=evaluator.n_gradient,
        hessian_evaluations=evaluator.n_hessian,
        converged=converged,
        kkt_residual=kkt_residual,
        trace=trace,
    )


def kkt_certificate(z: np.ndarray, grad: np.ndarray, nu: float):
    """Optimality certificate at an interior point with equality multiplier nu.

    The bound multipliers absorb the signed stationarity residual,
    ``lam_lo = max(grad + nu, 0)`` and ``lam_hi = max(-(grad + nu), 0)``,
    so the stationarity norm is zero up to roundoff and optimality is
    quantified by the complementary-slackness residual.

    Returns
    -------
    (stationarity, complementarity, lam_lo, lam_hi)
        ``stationarity`` is the max-norm of
        ``grad + nu - lam_lo + lam_hi``; ``complementarity`` is the
        largest of ``lam_lo * z`` and ``lam_hi * (1 - z)``.
    """
    signed = grad + nu
    lam_lo = np.maximum(signed, 0.0)
    lam_hi = np.maximum(-signed, 0.0)
    stationarity = float(np.max(np.abs(signed - lam_lo + lam_hi)))
    complementarity = float(max(np.max(lam_lo * z), np.max(lam_hi * (1.0 - z))))
    return stationarity, complementarity, lam_lo, lam_hi


def _top_k_indices(z: np.ndarray, k: int) -> np.ndarray:
    # Stable sort on -z: ties resolve to the lower story index.
    order = np.argsort(-z, kind="stable")
    return np.sort(order[:k])


def round_solution(
    z_star: np.ndarray,
    fimset: ElementaryFimSet,
    budget: int,
    objective_relaxed: float | None = None,
) -> BinaryPlacement:
    """Round a relaxed optimum to the highest-weight binary configuration.

    The ``budget`` largest entries become 1 (ties to the lower story) and
    the binary objective is recomputed exactly.  The result is certified
    only when the relaxed optimum was already essentially binary, which
    shows up as a vanishing rounding gap.
    """
    z = check_sensor_vector(z_star, fimset.n_dof, budget=budget)
    evals = 0
    if objective_relaxed is None:
        objective_relaxed = -mc_objective(z, fimset)
        evals += 1
    delta = np.zeros(fimset.n_dof, dtype=int)
    delta[_top_k_indices(z, budget)] = 1
    value = -mc_objective(delta.astype(float), fimset)
    evals += 1
    gap = objective_relaxed - value
    certified = gap <= 1e-8 * max(abs(objective_relaxed), 1.0)
    return BinaryPlacement(
        delta=delta,
        objective_binary=value,
        certified_optimal=certified,
        gap=gap,
        ambiguous_indices=(),
        objective_evaluations=evals,
    )


def certify_or_repair(
    z_star: np.ndarray,
    fimset: ElementaryFimSet,
    budget: int,
    options: SolverOptions | None = None,
    objective_relaxed: float | None = None,
) -> BinaryPlacement:
    """Certify a rounded solution or repair it by enumerating ambiguous entries.

    Entries of the relaxed optimum inside (eta, 1 - eta) are ambiguous.
    Holding the unambiguous ones fixed, all ways of spending the remaining
    budget among the ambiguous stories are enumerated and the best kept.
    The result is certified when the enumeration was exhaustive (an empty
    ambiguous set counts) or the relaxed optimum was already binary; if the
    enumeration would exceed the cap, the plain rounding is returned
    uncertified.
    """
    options = options or SolverOptions()
    z = check_sensor_vector(z_star, fimset.n_dof, budget=budget)
    if objective_relaxed is None:
        objective_relaxed = -mc_objective(z, fimset)

    eta = options.ambiguity_threshold
    ambiguous = np.flatnonzero((z > eta) & (z < 1.0 - eta))
    fixed_on = np.flatnonzero(z >= 1.0 - eta)
    remaining = budget - fixed_on.size

    def _fallback() -> BinaryPlacement:
        rounded = round_solution(z, fimset, budget, objective_relaxed)
        rounded.certified_optimal = False
        rounded.ambiguous_indices = tuple(int(i) for i in ambiguous)
        return rounded

    if remaining < 0 or remaining > ambiguous.size:
        return _fallback()
    if math.comb(ambiguous.size, remaining) > options.enumeration_cap:
        return _fallback()

    base = np.zeros(fimset.n_dof, dtype=int)
    base[fixed_on] = 1
    best_delta = None
    best_value = -math.inf
    evals = 0
    for combo in itertools.combinations(ambiguous.tolist(), remaining):
        delta = base.copy()
        delta[list(combo)] = 1
        value = -mc_objective(delta.astype(float), fimset)
        evals += 1
        if value > best_value:
            best_value = value
            best_delta = delta
    gap = objective_relaxed - best_value
    return BinaryPlacement(
        delta=best_delta,
        objective_binary=best_value,
        certified_optimal=True,
        gap=gap,
        ambiguous_indices=tuple(int(i) for i in ambiguous),
        objective_evaluations=evals,
    )
