"""Baseline placement strategies and information-gain comparison.

Everything here scores configurations by the expected log-determinant
(larger is better), the negation of the solver's minimization objective.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .fim import (
    CountingEvaluator,
    ElementaryFimSet,
    SingularInformationError,
    check_sensor_vector,
    mc_objective,
    regularization_scale,
)

LN2 = math.log(2.0)


@dataclass
class GreedyResult:
    delta: np.ndarray
    objective_value: float
    n_evaluations: int
    picks: tuple[int, ...]  # story indices in placement order, 1-based
    regularized: bool  # a candidate needed the ridge fallback


@dataclass
class ExhaustiveResult:
    delta: np.ndarray
    objective_value: float
    n_evaluations: int


@dataclass
class ComparisonRow:
    label: str
    stories: tuple[int, ...]
    objective_value: float
    bits_gain: float
    n_evaluations: int


@dataclass
class ComparisonReport:
    reference_label: str
    rows: list[ComparisonRow] = field(default_factory=list)

    def row(self, label: str) -> ComparisonRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)


def greedy_forward(fimset: ElementaryFimSet, budget: int) -> GreedyResult:
    """Forward sequential placement: grow the configuration one sensor at a time.

    Each round scores every vacant story by the information gain of adding
    it to the current configuration, recomputing the current
    configuration's value alongside each candidate (the first candidate of
    a round reuses the value cached from the previous selection).  Ties go
    to the lower story.  The evaluation counter therefore totals
    ``budget * (2 * n_dof - budget)`` kernel calls.

    The empty starting configuration is scored through a ridge fallback,
    a constant that cancels out of every within-round comparison.  A ridge
    fallback on a *candidate* configuration marks the result as
    regularized; its final value is then recomputed without the ridge.
    """
    n = fimset.n_dof
    if not 1 <= budget <= n:
        raise ValueError(f"budget must satisfy 1 <= budget <= {n}, got {budget}")
    evaluator = CountingEvaluator(fimset)
    eps = regularization_scale(fimset)

    def value_of(delta: np.ndarray) -> tuple[float, bool]:
        try:
            return -evaluator.objective(delta.astype(float)), False
        except SingularInformationError:
            return -evaluator.objective_regularized(delta.astype(float), eps), True

    delta = np.zeros(n, dtype=int)
    # Value of the empty configuration under the ridge, by definition
    # rather than evaluation: every sample contributes log det(eps * I).
    base_value = fimset.n_params * math.log(eps)
    regularized = False
    picks: list[int] = []
    for _round in range(budget):
        best_gain = -math.inf
        best_story = -1
        best_value = -math.inf
        first = True
        for i in range(n):
            if delta[i]:
                continue
            if not first:
                base_value, _ = value_of(delta)
            first = False
            delta[i] = 1
            cand_value, cand_reg = value_of(delta)
            delta[i] = 0
            regularized = regularized or cand_reg
            gain = cand_value - base_value
            if gain > best_gain:
                best_gain = gain
                best_story = i
                best_value = cand_value
        delta[best_story] = 1
        picks.append(best_story + 1)
        base_value = best_value

    final_value = -mc_objective(delta.astype(float), fimset)
    return GreedyResult(
        delta=delta,
        objective_value=final_value,
        n_evaluations=evaluator.n_objective,
        picks=tuple(picks),
        regularized=regularized,
    )


def exhaustive(fimset: ElementaryFimSet, budget: int, cap: int = 1_000_000) -> ExhaustiveResult:
    """Exact combinatorial optimum by enumerating every configuration.

    Refuses when the number of configurations exceeds ``cap``.  Ties go to
    the lexicographically smallest configuration.
    """
    n = fimset.n_dof
    if not 1 <= budget <= n:
        raise ValueError(f"budget must satisfy 1 <= budget <= {n}, got {budget}")
    count = math.comb(n, budget)
    if count > cap:
        raise ValueError(
            f"exhaustive search over {count} configurations exceeds the cap of {cap}"
        )
    best_value = -math.inf
    best_delta = None
    for combo in itertools.combinations(range(n), budget):
        delta = np.zeros(n, dtype=int)
        delta[list(combo)] = 1
        value = -mc_objective(delta.astype(float), fimset)
        if value > best_value:
            best_value = value
            best_delta = delta
    return ExhaustiveResult(delta=best_delta, objective_value=best_value, n_evaluations=count)


def fixed_configs(n_dof: int = 50, budget: int = 20) -> dict[str, np.ndarray]:
    """Reference layouts: bottom block, top block, and evenly spaced.

    ``low`` instruments stories 1..budget, ``high`` the top ``budget``
    stories, and ``common`` stories ``ceil(k * n_dof / budget)`` for
    k = 1..budget (evenly spaced, rounded up).
    """
    if not 1 <= budget <= n_dof:
        raise ValueError(f"budget must satisfy 1 <= budget <= {n_dof}, got {budget}")
    low = np.zeros(n_dof, dtype=int)
    low[:budget] = 1
    high = np.zeros(n_dof, dtype=int)
    high[n_dof - budget:] = 1
    common = np.zeros(n_dof, dtype=int)
    for k in range(1, budget + 1):
        common[math.ceil(k * n_dof / budget) - 1] = 1
    if common.sum() != budget:
        raise ValueError("evenly spaced layout collapsed; budget too large for n_dof")
    return {"low": low, "high": high, "common": common}


def compare(
    configs: list[tuple[str, np.ndarray]],
    fimset: ElementaryFimSet,
    reference_label: str | None = None,
    evaluation_counts: dict[str, int] | None = None,
) -> ComparisonReport:
    """Score labeled binary configurations and express gaps in bits.

    ``bits_gain`` of a row is ``(V_ref - V) / ln 2`` where ``V_ref`` is the
    reference row's value (the first row by default): the number of bits
    of information the reference placement gains over that configuration.
    """
    if not configs:
        raise ValueError("no configurations to compare")
    evaluation_counts = evaluation_counts or {}
    values = {}
    for label, delta in configs:
        delta = check_sensor_vector(delta, fimset.n_dof, binary=True)
        try:
            values[label] = -mc_objective(np.asarray(delta, dtype=float), fimset)
        except SingularInformationError as exc:
            raise SingularInformationError(
                f"configuration {label!r} is singular: {exc}",
                sample_index=exc.sample_index,
                label=label,
            ) from exc
    reference_label = reference_label or configs[0][0]
    if reference_label not in values:
        raise ValueError(f"reference label {reference_label!r} not among configurations")
    v_ref = values[reference_label]
    report = ComparisonReport(reference_label=reference_label)
    for label, delta in configs:
        delta = np.asarray(delta, dtype=int)
        report.rows.append(
            ComparisonRow(
                label=label,
                stories=tuple(int(i) + 1 for i in np.flatnonzero(delta)),
                objective_value=values[label],
                bits_gain=(v_ref - values[label]) / LN2,
                n_evaluations=evaluation_counts.get(label, 1),
            )
        )
    return report
