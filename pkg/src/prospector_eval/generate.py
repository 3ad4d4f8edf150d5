"""Random network generation.

Two samplers, one per evidence-relation class:

* associated — draw three base-rate targets uniformly from
  (margin, 1 - margin), draw eight cells uniformly and normalize, then
  rescale by iterative proportional fitting until all three one-dimensional
  margins hit their targets.  The fit moves margins without destroying the
  random association structure, so evidence stays (generically) dependent.
* independent — draw the two evidence base rates uniformly from
  (margin, 1 - margin), form the product evidence-pair marginals, and split
  each of the four pair masses between its conclusion-false/true cells with
  an independent uniform fraction.  The product structure makes the
  evidence pair exactly independent; the conclusion base rate is whatever
  the fractions imply.

Determinism: network ``i`` of a batch draws all of its randomness from a
dedicated stream keyed by (seed, i, attempt), so batches are reproducible
and order-independent — evaluating or generating in parallel cannot change
the output.  Failed proportional fits are resampled with the attempt
counter bumped (bounded; the table records how many resamples it took).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import GenerationError, InvalidTableError, NoConvergenceError
from .table import MASK_C, MASK_E1, MASK_E2, JointTable, Provenance, compose_table

DEFAULT_BASE_RATE_MARGIN = 1e-3
DEFAULT_IPF_TOLERANCE = 1e-10
DEFAULT_IPF_MAX_ITERATIONS = 10000
DEFAULT_MAX_RESAMPLES = 10


@dataclass(frozen=True)
class MarginTargets:
    """Target one-dimensional margins for (E1, E2, C)."""

    t_e1: float
    t_e2: float
    t_c: float

    def __post_init__(self) -> None:
        for name, value in (("t_e1", self.t_e1), ("t_e2", self.t_e2), ("t_c", self.t_c)):
            if not 0.0 < float(value) < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {value!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t_e1, self.t_e2, self.t_c)


@dataclass(frozen=True)
class GenerationConfig:
    """Everything a batch of networks depends on."""

    count: int
    seed: int
    kind: Literal["independent", "associated"]
    base_rate_margin: float = DEFAULT_BASE_RATE_MARGIN
    ipf_tolerance: float = DEFAULT_IPF_TOLERANCE
    ipf_max_iterations: int = DEFAULT_IPF_MAX_ITERATIONS
    max_resamples: int = DEFAULT_MAX_RESAMPLES

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be positive, got {self.count}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.kind not in ("independent", "associated"):
            raise ValueError(f"kind must be 'independent' or 'associated', got {self.kind!r}")
        if not 0.0 < self.base_rate_margin < 0.5:
            raise ValueError("base_rate_margin must lie strictly between 0 and 0.5")
        if self.ipf_tolerance <= 0.0:
            raise ValueError("ipf_tolerance must be positive")
        if self.ipf_max_iterations < 1 or self.max_resamples < 1:
            raise ValueError("iteration and resample caps must be at least 1")


def _network_rng(seed: int, index: int, attempt: int) -> np.random.Generator:
    """The dedicated random stream for one network (one resample attempt)."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(index, attempt))
    )


def ipf_fit(
    table: JointTable,
    targets: MarginTargets,
    *,
    tolerance: float = DEFAULT_IPF_TOLERANCE,
    max_iterations: int = DEFAULT_IPF_MAX_ITERATIONS,
) -> JointTable:
    """Iteratively rescale cells until all three margins match the targets.

    Cycles E1, E2, C in a fixed order; convergence is checked before each
    cycle, so a table that already matches comes back (numerically)
    unchanged.  Requires strictly positive cells — proportional scaling can
    never move mass onto or off a zero.  Raises NoConvergenceError with the
    remaining deviation if the cap runs out.
    """
    q = table.as_array()
    if np.any(q <= 0.0):
        raise InvalidTableError(
            "proportional fitting requires strictly positive cells"
        )
    plan = tuple(zip(targets.as_tuple(), (MASK_E1, MASK_E2, MASK_C)))
    for _ in range(max_iterations):
        deviation = max(abs(float(q[mask].sum()) - t) for t, mask in plan)
        if deviation <= tolerance:
            q = q / q.sum()
            return JointTable(tuple(float(v) for v in q), kind=table.kind, provenance=table.provenance)
        for target, mask in plan:
            current = float(q[mask].sum())
            q[mask] *= target / current
            q[~mask] *= (1.0 - target) / (1.0 - current)
    deviation = max(abs(float(q[mask].sum()) - t) for t, mask in plan)
    raise NoConvergenceError(
        f"margins still off by {deviation:.3e} after {max_iterations} cycles",
        deviation=deviation,
        iterations=max_iterations,
    )


def generate_associated(config: GenerationConfig) -> list[JointTable]:
    """Generate ``config.count`` associated-evidence networks."""
    if config.kind != "associated":
        raise ValueError(f"config.kind is {config.kind!r}, expected 'associated'")
    eps = config.base_rate_margin
    tables = []
    for index in range(config.count):
        fitted = None
        for attempt in range(config.max_resamples):
            rng = _network_rng(config.seed, index, attempt)
            targets = rng.uniform(eps, 1.0 - eps, 3)
            raw = rng.uniform(0.0, 1.0, 8)
            total = raw.sum()
            if total <= 0.0 or np.any(raw <= 0.0):
                continue  # un-normalizable draw; try a fresh stream
            seed_table = JointTable(
                tuple(float(v) for v in raw / total),
                kind="associated",
                provenance=Provenance(seed=config.seed, index=index, resamples=attempt),
            )
            try:
                fitted = ipf_fit(
                    seed_table,
                    MarginTargets(*targets),
                    tolerance=config.ipf_tolerance,
                    max_iterations=config.ipf_max_iterations,
                )
            except NoConvergenceError:
                continue
            break
        if fitted is None:
            raise GenerationError(
                f"network {index} (seed {config.seed}): no converged fit "
                f"within {config.max_resamples} attempts"
            )
        tables.append(fitted)
    return tables


def generate_independent(config: GenerationConfig) -> list[JointTable]:
    """Generate ``config.count`` independent-evidence networks."""
    if config.kind != "independent":
        raise ValueError(f"config.kind is {config.kind!r}, expected 'independent'")
    eps = config.base_rate_margin
    tables = []
    for index in range(config.count):
        rng = _network_rng(config.seed, index, 0)
        p_e1, p_e2 = rng.uniform(eps, 1.0 - eps, 2)
        fractions = rng.uniform(0.0, 1.0, 4)
        marginals = (
            (1.0 - p_e1) * (1.0 - p_e2),
            (1.0 - p_e1) * p_e2,
            p_e1 * (1.0 - p_e2),
            p_e1 * p_e2,
        )
        tables.append(
            compose_table(
                marginals,
                tuple(float(f) for f in fractions),
                kind="independent",
                provenance=Provenance(seed=config.seed, index=index, resamples=0),
            )
        )
    return tables


def generate(config: GenerationConfig) -> list[JointTable]:
    """Dispatch on ``config.kind``."""
    if config.kind == "independent":
        return generate_independent(config)
    return generate_associated(config)
