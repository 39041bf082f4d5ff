"""Run configuration: strict JSON schema with full-file validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .priors import PriorSpec, default_prior
from .solver import SolverOptions

BASELINE_LABELS = ("greedy", "exhaustive", "low", "high", "common")

_TOP_KEYS = {
    "n_dof", "budget", "n_steps", "dt", "n_samples", "seed",
    "prior", "solver", "baselines", "output_dir",
}
_SOLVER_KEYS = {
    "tolerance", "max_outer_iterations", "max_newton_iterations",
    "barrier_t0", "barrier_multiplier", "ambiguity_threshold", "enumeration_cap",
}
_PRIOR_ENTRY_KEYS = {"dist", "mean", "std"}
_PARAM_NAMES = ("omega0", "alpha", "beta", "omega", "a0")


class ConfigError(ValueError):
    """Invalid run configuration; ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(violations))
        self.violations = violations


@dataclass
class RunConfig:
    n_dof: int
    budget: int
    n_steps: int
    dt: float
    n_samples: int
    seed: int
    prior: PriorSpec = field(default_factory=default_prior)
    solver: SolverOptions = field(default_factory=SolverOptions)
    baselines: tuple[str, ...] = ("greedy", "low", "high", "common")
    output_dir: str | None = None

    def to_dict(self) -> dict:
        """Resolved configuration echo; re-validating it reproduces the run."""
        opts = self.solver
        return {
            "n_dof": self.n_dof,
            "budget": self.budget,
            "n_steps": self.n_steps,
            "dt": self.dt,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "prior": self.prior.to_dict(),
            "solver": {
                "tolerance": opts.tolerance,
                "max_outer_iterations": opts.max_outer_iterations,
                "max_newton_iterations": opts.max_newton_iterations,
                "barrier_t0": opts.barrier_t0,
                "barrier_multiplier": opts.barrier_multiplier,
                "ambiguity_threshold": opts.ambiguity_threshold,
                "enumeration_cap": opts.enumeration_cap,
            },
            "baselines": list(self.baselines),
            "output_dir": self.output_dir,
        }


def _check_int(raw, key, violations, minimum=None):
    value = raw.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        violations.append(f"{key}: expected an integer, got {value!r}")
        return None
    if minimum is not None and value < minimum:
        violations.append(f"{key}: must be >= {minimum}, got {value}")
        return None
    return value


def _check_number(raw, key, violations, positive=False):
    value = raw.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        violations.append(f"{key}: expected a number, got {value!r}")
        return None
    if positive and value <= 0:
        violations.append(f"{key}: must be positive, got {value}")
        return None
    return float(value)


def validate_config(raw: dict) -> RunConfig:
    """Validate a raw configuration mapping, reporting every violation at once.

    Unknown keys anywhere in the document are rejected so typos cannot
    silently fall back to defaults.
    """
    if not isinstance(raw, dict):
        raise ConfigError([f"configuration must be a mapping, got {type(raw).__name__}"])
    violations: list[str] = []

    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        violations.append(f"unknown keys: {unknown}")
    for key in ("n_dof", "budget", "n_steps", "dt", "n_samples", "seed"):
        if key not in raw:
            violations.append(f"missing required key: {key}")

    n_dof = _check_int(raw, "n_dof", violations, minimum=1) if "n_dof" in raw else None
    budget = _check_int(raw, "budget", violations, minimum=1) if "budget" in raw else None
    n_steps = _check_int(raw, "n_steps", violations, minimum=1) if "n_steps" in raw else None
    n_samples = (
        _check_int(raw, "n_samples", violations, minimum=1) if "n_samples" in raw else None
    )
    seed = _check_int(raw, "seed", violations) if "seed" in raw else None
    dt = _check_number(raw, "dt", violations, positive=True) if "dt" in raw else None

    if n_dof is not None and budget is not None and budget > n_dof:
        violations.append(f"budget: infeasible, {budget} sensors for {n_dof} stories")

    prior = default_prior()
    if "prior" in raw:
        if not isinstance(raw["prior"], dict):
            violations.append("prior: expected a mapping of parameter name to marginal")
        else:
            unknown = sorted(set(raw["prior"]) - set(_PARAM_NAMES))
            if unknown:
                violations.append(f"prior: unknown parameters {unknown}")
            bad_entry = False
            for name, entry in raw["prior"].items():
                if name not in _PARAM_NAMES:
                    continue
                if not isinstance(entry, dict):
                    violations.append(f"prior.{name}: expected a mapping")
                    bad_entry = True
                    continue
                extra = sorted(set(entry) - _PRIOR_ENTRY_KEYS)
                missing = sorted(_PRIOR_ENTRY_KEYS - set(entry))
                if extra:
                    violations.append(f"prior.{name}: unknown keys {extra}")
                    bad_entry = True
                if missing:
                    violations.append(f"prior.{name}: missing keys {missing}")
                    bad_entry = True
            if not bad_entry and not unknown:
                try:
                    prior = PriorSpec.from_dict(raw["prior"])
                except (ValueError, TypeError) as exc:
                    violations.append(f"prior: {exc}")

    solver = SolverOptions()
    if "solver" in raw:
        if not isinstance(raw["solver"], dict):
            violations.append("solver: expected a mapping")
        else:
            unknown = sorted(set(raw["solver"]) - _SOLVER_KEYS)
            if unknown:
                violations.append(f"solver: unknown keys {unknown}")
            else:
                try:
                    solver = SolverOptions(**raw["solver"])
                except (ValueError, TypeError) as exc:
                    violations.append(f"solver: {exc}")

    baselines: tuple[str, ...] = ("greedy", "low", "high", "common")
    if "baselines" in raw:
        entries = raw["baselines"]
        if not isinstance(entries, (list, tuple)) or not all(
            isinstance(b, str) for b in entries
        ):
            violations.append("baselines: expected a list of labels")
        else:
            bad = sorted(set(entries) - set(BASELINE_LABELS))
            if bad:
                violations.append(
                    f"baselines: unknown labels {bad}; allowed: {list(BASELINE_LABELS)}"
                )
            else:
                baselines = tuple(entries)

    output_dir = raw.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        violations.append(f"output_dir: expected a string, got {output_dir!r}")

    if violations:
        raise ConfigError(violations)
    return RunConfig(
        n_dof=n_dof,
        budget=budget,
        n_steps=n_steps,
        dt=dt,
        n_samples=n_samples,
        seed=seed,
        prior=prior,
        solver=solver,
        baselines=baselines,
        output_dir=output_dir,
    )


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"not valid JSON: {exc}"]) from exc
    return validate_config(raw)
