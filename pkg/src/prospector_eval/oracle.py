"""Statistically correct updates: minimum cross-entropy projection.

Given a source table p and new evidence marginals, the correct updated
distribution q minimizes the directed divergence sum(q * log(q / p)) among
all distributions with the prescribed P'(E1) and P'(E2) — the conclusion
marginal is left free and lands wherever the projection puts it.

The minimizer has the form q = p * a^[e1] * b^[e2] (one multiplier per
constrained variable), so it is found by alternately rescaling the E1 and
E2 slices to their targets until both margins match — the classic
proportional-fitting iteration, which converges geometrically for interior
targets.  Targets of exactly 0 or 1 are handled first by exact
conditioning, which is the divergence-minimizing way to impose certainty.

Because the multipliers do not depend on C, every conditional
P(C | E1, E2) — and more generally every defined conditional odds ratio —
survives the update untouched; only the evidence-pair weights move.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleUpdateError, NoConvergenceError, NotIndependentError
from .table import (
    EVIDENCE_STATES,
    MASK_C,
    MASK_E1,
    MASK_E2,
    JointTable,
    base_rates,
    conditional_profile,
)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 10000


@dataclass(frozen=True)
class EvidenceUpdate:
    """New marginal probabilities for the two evidence variables."""

    p_new_e1: float
    p_new_e2: float

    def __post_init__(self) -> None:
        for name, value in (("p_new_e1", self.p_new_e1), ("p_new_e2", self.p_new_e2)):
            if not 0.0 <= float(value) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")

    def as_tuple(self) -> tuple[float, float]:
        return (self.p_new_e1, self.p_new_e2)


@dataclass(frozen=True)
class UpdatedTable:
    """Result of a minimum cross-entropy update."""

    table: JointTable
    marginal_deviation: tuple[float, float]
    iterations: int


def _condition(q: np.ndarray, mask: np.ndarray, target: float) -> np.ndarray:
    """Impose a certain evidence value by exact conditioning."""
    keep = mask if target == 1.0 else ~mask
    mass = float(q[keep].sum())
    if mass <= 0.0:
        raise InfeasibleUpdateError(
            f"target {target} requires conditioning on a zero-probability event"
        )
    return np.where(keep, q / mass, 0.0)


def mce_update(
    table: JointTable,
    update: EvidenceUpdate,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> UpdatedTable:
    """Project the table onto the prescribed evidence marginals.

    Zero cells stay zero, conditional odds ratios are preserved, and if the
    update equals the table's own base rates the cells come back unchanged.
    Raises InfeasibleUpdateError when a target is unreachable for the
    table's zero pattern and NoConvergenceError if the scaling loop hits
    ``max_iterations`` (it reports the remaining deviation).
    """
    u1, u2 = update.p_new_e1, update.p_new_e2
    q = table.as_array()

    for target, mask in ((u1, MASK_E1), (u2, MASK_E2)):
        if target == 0.0 or target == 1.0:
            q = _condition(q, mask, target)

    iterations = 0
    while True:
        m1 = float(q[MASK_E1].sum())
        m2 = float(q[MASK_E2].sum())
        if abs(m1 - u1) <= tolerance and abs(m2 - u2) <= tolerance:
            deviation = (abs(m1 - u1), abs(m2 - u2))
            break
        if iterations >= max_iterations:
            raise NoConvergenceError(
                f"marginal fitting did not converge within {max_iterations} cycles "
                f"(remaining deviation {max(abs(m1 - u1), abs(m2 - u2)):.3e})",
                deviation=max(abs(m1 - u1), abs(m2 - u2)),
                iterations=iterations,
            )
        for target, mask in ((u1, MASK_E1), (u2, MASK_E2)):
            if target == 0.0 or target == 1.0:
                continue  # already imposed by conditioning
            current = float(q[mask].sum())
            if current <= 0.0 or current >= 1.0:
                raise InfeasibleUpdateError(
                    f"marginal target {target} is unreachable: the event currently "
                    f"carries probability {current!r} and scaling cannot move mass "
                    "across a zero"
                )
            q[mask] *= target / current
            q[~mask] *= (1.0 - target) / (1.0 - current)
        iterations += 1

    projected = JointTable(tuple(float(v) for v in q), kind=table.kind, provenance=None)
    return UpdatedTable(table=projected, marginal_deviation=deviation, iterations=iterations)


def correct_posterior(
    table: JointTable,
    update: EvidenceUpdate,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> float:
    """P'(C) under the minimum cross-entropy update — the reference answer."""
    result = mce_update(table, update, tolerance=tolerance, max_iterations=max_iterations)
    return float(result.table.as_array()[MASK_C].sum())


def independent_closed_form(
    table: JointTable,
    update: EvidenceUpdate,
    *,
    independence_tol: float = 1e-9,
) -> float:
    """Closed-form P'(C) for independent-evidence tables.

    When the evidence pair factorizes, the projected evidence weights are
    just the products of the new marginals, so

        P'(C) = sum over (a, b) of P(C | E1=a, E2=b) * w1(a) * w2(b)

    with w_i(true) = P'(E_i).  Raises NotIndependentError if the table's
    evidence pair deviates from the product of its base rates by more than
    ``independence_tol``.
    """
    p_e1, p_e2, _ = base_rates(table)
    rate1 = {True: p_e1, False: 1.0 - p_e1}
    rate2 = {True: p_e2, False: 1.0 - p_e2}
    worst = max(
        abs(mass - rate1[a] * rate2[b])
        for (a, b), mass in zip(EVIDENCE_STATES, table.pair_marginals())
    )
    if worst > independence_tol:
        raise NotIndependentError(
            f"evidence pair deviates from independence by {worst!r}; "
            "the closed form only applies to independent tables"
        )
    profile = conditional_profile(table)
    w1 = {True: update.p_new_e1, False: 1.0 - update.p_new_e1}
    w2 = {True: update.p_new_e2, False: 1.0 - update.p_new_e2}
    return float(
        sum(
            q * w1[a] * w2[b]
            for (a, b), q in zip(EVIDENCE_STATES, profile.as_tuple())
        )
    )
