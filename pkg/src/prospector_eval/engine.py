"""PROSPECTOR-style belief propagation and evidence combination.

A single evidence-to-conclusion link updates the conclusion by linear
interpolation through three anchor points: certainly-false evidence maps to
P(C | not E), evidence at its base rate maps back to the prior P(C), and
certainly-true evidence maps to P(C | E).  In between the map is piecewise
linear with a knee at the base rate:

    p_new_e <= P(E):  P(C|not E) + (P(C) - P(C|not E)) * p_new_e / P(E)
    p_new_e >  P(E):  P(C) + (P(C|E) - P(C)) * (p_new_e - P(E)) / (1 - P(E))

Several pieces of evidence are combined under one of three rule sets:

* conjunctive  — the new evidence probabilities are fused by MIN and the
  result is propagated through the minimizing link;
* disjunctive  — likewise with MAX;
* independent  — each link is propagated separately, each posterior is
  converted to odds, divided by the prior odds to give an effective
  likelihood ratio, and the ratios multiply the prior odds.

Probabilities are clamped into [1e-12, 1 - 1e-12] before any odds
conversion so certain evidence stays finite; every clamp is flagged in the
returned trace.  Ties in MIN/MAX go to the lowest-indexed evidence (E1
first) and are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import DegenerateBaseRateError, EmptyEvidenceError
from .table import NetworkView

#: Bound used when converting probabilities to odds.
ODDS_CLAMP = 1e-12


class Rule(Enum):
    """Evidence-combination rule set."""

    CONJUNCTIVE = "conjunctive"
    DISJUNCTIVE = "disjunctive"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class LinkParams:
    """Parameters of one evidence-to-conclusion link."""

    p_c: float
    p_e: float
    p_c_given_e: float
    p_c_given_not_e: float

    def consistency_residual(self) -> float:
        """|P(C) - (P(C|E) P(E) + P(C|not E) (1 - P(E)))| — 0 for a real network."""
        mixed = self.p_c_given_e * self.p_e + self.p_c_given_not_e * (1.0 - self.p_e)
        return abs(self.p_c - mixed)

    def is_consistent(self, tol: float = 1e-9) -> bool:
        return self.consistency_residual() <= tol


def links_from_view(view: NetworkView) -> tuple[LinkParams, LinkParams]:
    """The two per-evidence links implied by a network view."""
    return tuple(
        LinkParams(
            p_c=view.p_c,
            p_e=view.p_e[i],
            p_c_given_e=view.p_c_given_e[i],
            p_c_given_not_e=view.p_c_given_not_e[i],
        )
        for i in range(2)
    )


def propagate(link: LinkParams, p_new_e: float) -> float:
    """Posterior conclusion probability for one link given P'(E) = p_new_e.

    Piecewise-linear through the anchors (0, P(C|not E)), (P(E), P(C)),
    (1, P(C|E)); the result is clamped into [0, 1] to absorb rounding on
    slightly inconsistent links.
    """
    if not 0.0 <= p_new_e <= 1.0:
        raise ValueError(f"new evidence probability must lie in [0, 1], got {p_new_e!r}")
    if not 0.0 < link.p_e < 1.0:
        raise DegenerateBaseRateError(
            f"link base rate must satisfy 0 < P(E) < 1, got {link.p_e!r}"
        )
    if p_new_e <= link.p_e:
        value = link.p_c_given_not_e + (link.p_c - link.p_c_given_not_e) * p_new_e / link.p_e
    else:
        value = link.p_c + (link.p_c_given_e - link.p_c) * (p_new_e - link.p_e) / (
            1.0 - link.p_e
        )
    return min(max(value, 0.0), 1.0)


def _check_probabilities(values: Sequence[float]) -> None:
    if len(values) == 0:
        raise EmptyEvidenceError("need at least one evidence value")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"probabilities must lie in [0, 1], got {v!r}")


def combine_and(values: Sequence[float]) -> float:
    """Fuzzy-AND of evidence probabilities: the minimum."""
    _check_probabilities(values)
    return min(values)


def combine_or(values: Sequence[float]) -> float:
    """Fuzzy-OR of evidence probabilities: the maximum."""
    _check_probabilities(values)
    return max(values)


def _clamp_unit(p: float) -> float:
    return min(max(p, ODDS_CLAMP), 1.0 - ODDS_CLAMP)


@dataclass(frozen=True)
class EvidenceTrace:
    """Per-evidence record of an inference.

    ``posterior`` is the raw propagated value; ``used_posterior`` is the
    value actually converted to odds (different only when clamping fired,
    which ``clamped`` flags).  ``p_new_e`` is None when the combination was
    fed posteriors directly rather than evidence updates.
    """

    index: int
    p_new_e: float | None
    posterior: float
    used_posterior: float
    odds: float
    likelihood_ratio: float
    clamped: bool


@dataclass(frozen=True)
class InferenceTrace:
    """Complete audit trail of one inference.

    Invariants (all checked in the test suite): every recorded odds value
    equals used/(1 - used) for its recorded used-probability; the combined
    odds equal prior_odds times the product of the likelihood ratios in
    evidence order; and combined_odds/(1 + combined_odds) reproduces
    ``probability`` within 1e-12 (exactly, for the independent rule).
    """

    rule: Rule
    prior: float
    used_prior: float
    prior_odds: float
    prior_clamped: bool
    evidence: tuple[EvidenceTrace, ...]
    combined_odds: float
    probability: float
    selected: int | None
    tie: bool


def _evidence_entry(
    index: int, p_new_e: float | None, posterior: float, prior_odds: float
) -> EvidenceTrace:
    used = _clamp_unit(posterior)
    odds = used / (1.0 - used)
    return EvidenceTrace(
        index=index,
        p_new_e=p_new_e,
        posterior=posterior,
        used_posterior=used,
        odds=odds,
        likelihood_ratio=odds / prior_odds,
        clamped=used != posterior,
    )


def combine_independent(
    posteriors: Sequence[float],
    p_c: float,
    *,
    p_new_e: Sequence[float] | None = None,
) -> tuple[float, InferenceTrace]:
    """Fuse per-link posteriors multiplicatively in odds space.

    Each posterior is turned into an effective likelihood ratio against the
    prior odds; the prior odds times the product of the ratios gives the
    combined odds, which convert back to a probability.  Requires a prior
    strictly inside (0, 1).
    """
    _check_probabilities(posteriors)
    if not 0.0 < p_c < 1.0:
        raise ValueError(f"prior must lie strictly inside (0, 1), got {p_c!r}")
    if p_new_e is not None and len(p_new_e) != len(posteriors):
        raise ValueError("p_new_e must match posteriors in length")

    used_prior = _clamp_unit(p_c)
    prior_odds = used_prior / (1.0 - used_prior)
    combined = prior_odds
    entries = []
    for i, posterior in enumerate(posteriors):
        entry = _evidence_entry(
            i, None if p_new_e is None else p_new_e[i], posterior, prior_odds
        )
        combined *= entry.likelihood_ratio
        entries.append(entry)
    probability = combined / (1.0 + combined)
    trace = InferenceTrace(
        rule=Rule.INDEPENDENT,
        prior=p_c,
        used_prior=used_prior,
        prior_odds=prior_odds,
        prior_clamped=used_prior != p_c,
        evidence=tuple(entries),
        combined_odds=combined,
        probability=probability,
        selected=None,
        tie=False,
    )
    return probability, trace


def infer_links(
    links: Sequence[LinkParams],
    rule: Rule,
    updates: Sequence[float],
    *,
    prior: float | None = None,
) -> tuple[float, InferenceTrace]:
    """Run one inference over any number of links (the two-evidence case is
    the canonical one, but nothing here is specific to k = 2)."""
    if len(links) == 0:
        raise EmptyEvidenceError("need at least one link")
    if len(links) != len(updates):
        raise ValueError("one update per link is required")
    _check_probabilities(updates)
    if prior is None:
        prior = links[0].p_c
    for link in links:
        if abs(link.p_c - prior) > 1e-9:
            raise ValueError("links disagree about the conclusion prior")

    if rule is Rule.INDEPENDENT:
        posteriors = [propagate(link, u) for link, u in zip(links, updates)]
        return combine_independent(posteriors, prior, p_new_e=updates)

    if rule is Rule.CONJUNCTIVE:
        fused = combine_and(updates)
    elif rule is Rule.DISJUNCTIVE:
        fused = combine_or(updates)
    else:
        raise ValueError(f"unknown rule: {rule!r}")
    selected = list(updates).index(fused)
    tie = sum(1 for u in updates if u == fused) > 1
    posterior = propagate(links[selected], fused)

    used_prior = _clamp_unit(prior)
    prior_odds = used_prior / (1.0 - used_prior)
    entry = _evidence_entry(selected, fused, posterior, prior_odds)
    trace = InferenceTrace(
        rule=rule,
        prior=prior,
        used_prior=used_prior,
        prior_odds=prior_odds,
        prior_clamped=used_prior != prior,
        evidence=(entry,),
        combined_odds=prior_odds * entry.likelihood_ratio,
        probability=posterior,
        selected=selected,
        tie=tie,
    )
    return posterior, trace


def infer(
    view: NetworkView, rule: Rule, update: tuple[float, float]
) -> tuple[float, InferenceTrace]:
    """Answer one two-evidence query: new evidence probabilities -> P'(C)."""
    return infer_links(links_from_view(view), rule, update, prior=view.p_c)
