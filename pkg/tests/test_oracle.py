import numpy as np
import pytest

import bruteforce as bf
from prospector_eval import (
    EvidenceUpdate,
    GenerationConfig,
    InfeasibleUpdateError,
    JointTable,
    NoConvergenceError,
    NotIndependentError,
    base_rates,
    conditional_profile,
    correct_posterior,
    generate_associated,
    generate_independent,
    independent_closed_form,
    mce_update,
)
from prospector_eval.table import MASK_E1, MASK_E2, cell_index


def random_table(rng) -> JointTable:
    raw = rng.uniform(0.01, 1.0, 8)
    return JointTable(tuple(raw / raw.sum()))


class TestEvidenceUpdate:
    def test_range_checked(self):
        with pytest.raises(ValueError):
            EvidenceUpdate(1.2, 0.5)
        with pytest.raises(ValueError):
            EvidenceUpdate(0.5, -0.1)

    def test_as_tuple(self):
        assert EvidenceUpdate(0.3, 0.8).as_tuple() == (0.3, 0.8)


class TestFixedPoint:
    def test_update_at_own_base_rates_returns_cells_unchanged(self, rng):
        """Margins already match, so not a single scaling cycle may run."""
        for _ in range(20):
            table = random_table(rng)
            p_e1, p_e2, _ = base_rates(table)
            result = mce_update(table, EvidenceUpdate(p_e1, p_e2))
            assert result.iterations == 0
            assert result.table.cells == table.cells


class TestCertainUpdates:
    def test_both_certain_is_exact_conditioning(self, case1, rng):
        profile = conditional_profile(case1)
        assert correct_posterior(case1, EvidenceUpdate(1.0, 1.0)) == pytest.approx(
            profile.q_tt, abs=1e-12
        )
        assert correct_posterior(case1, EvidenceUpdate(0.0, 0.0)) == pytest.approx(
            profile.q_ff, abs=1e-12
        )
        for _ in range(10):
            table = random_table(rng)
            profile = conditional_profile(table)
            assert correct_posterior(table, EvidenceUpdate(1.0, 0.0)) == pytest.approx(
                profile.q_tf, abs=1e-12
            )

    def test_case_study_1_certain_posterior(self, case1):
        assert correct_posterior(case1, EvidenceUpdate(1.0, 1.0)) == pytest.approx(
            0.9, abs=1e-12
        )

    def test_mixed_boundary_and_interior(self, rng):
        """u1 = 1 conditions away E1-false mass; u2 is then fit exactly."""
        for _ in range(10):
            table = random_table(rng)
            result = mce_update(table, EvidenceUpdate(1.0, 0.8))
            cells = result.table.as_array()
            assert float(cells[~MASK_E1].sum()) == 0.0
            assert float(cells[MASK_E2].sum()) == pytest.approx(0.8, abs=1e-10)


class TestAgainstBruteForce:
    """Spot checks against the scipy reference (the acceptance suite sweeps wider)."""

    @pytest.mark.parametrize("update", [(0.8, 0.2), (0.3, 0.7), (0.55, 0.95)])
    def test_matches_constrained_minimizer(self, rng, update):
        table = random_table(rng)
        ours = mce_update(table, EvidenceUpdate(*update)).table.as_array()
        reference = bf.brute_mce(table.as_array(), *update)
        assert float(np.max(np.abs(ours - reference))) <= 1e-6

    def test_minimality_against_feasible_perturbations(self, rng):
        """No nearby distribution with the same margins may score better."""
        table = random_table(rng)
        update = EvidenceUpdate(0.7, 0.3)
        solution = mce_update(table, update).table.as_array()
        source = table.as_array()
        for candidate in bf.feasible_perturbations(solution, rng, count=1000):
            assert bf.divergence_gap(candidate, solution, source) >= -1e-9


class TestInvariants:
    def test_marginals_hit_tolerance(self, rng):
        for _ in range(25):
            table = random_table(rng)
            u1, u2 = rng.uniform(0.02, 0.98, 2)
            result = mce_update(table, EvidenceUpdate(u1, u2))
            cells = result.table.as_array()
            assert abs(float(cells[MASK_E1].sum()) - u1) <= 1e-10
            assert abs(float(cells[MASK_E2].sum()) - u2) <= 1e-10
            assert result.marginal_deviation[0] <= 1e-10
            assert result.marginal_deviation[1] <= 1e-10

    def test_zero_cells_stay_zero(self):
        cells = [0.15, 0.0, 0.1, 0.15, 0.1, 0.2, 0.05, 0.25]
        table = JointTable(tuple(cells))
        updated = mce_update(table, EvidenceUpdate(0.4, 0.6)).table
        assert updated.cells[1] == 0.0
        assert all(v > 0.0 for i, v in enumerate(updated.cells) if i != 1)

    def test_conditional_odds_ratios_preserved(self, rng):
        """The scaling family can move margins but never association."""
        for _ in range(25):
            table = random_table(rng)
            u1, u2 = rng.uniform(0.02, 0.98, 2)
            updated = mce_update(table, EvidenceUpdate(u1, u2)).table
            for c in (False, True):
                def cross_ratio(t, c=c):
                    return (
                        t.cell(False, False, c) * t.cell(True, True, c)
                    ) / (t.cell(False, True, c) * t.cell(True, False, c))

                before = cross_ratio(table)
                after = cross_ratio(updated)
                assert after == pytest.approx(before, rel=1e-9)

    def test_conclusion_conditionals_survive_the_update(self, rng):
        table = random_table(rng)
        updated = mce_update(table, EvidenceUpdate(0.25, 0.65)).table
        assert conditional_profile(updated).as_tuple() == pytest.approx(
            conditional_profile(table).as_tuple(), abs=1e-12
        )


class TestClosedForm:
    def test_case_study_1_partial_updates(self, case1):
        """Mixture of the profile under (.8, .8): .74 by both routes."""
        update = EvidenceUpdate(0.8, 0.8)
        assert independent_closed_form(case1, update) == pytest.approx(0.74, abs=1e-12)
        assert correct_posterior(case1, update) == pytest.approx(0.74, abs=1e-12)

    def test_agrees_with_iterative_oracle_on_generated_tables(self, rng):
        config = GenerationConfig(count=15, seed=4213, kind="independent")
        for table in generate_independent(config):
            for u1, u2 in rng.uniform(0.0, 1.0, (4, 2)):
                update = EvidenceUpdate(float(u1), float(u2))
                assert independent_closed_form(table, update) == pytest.approx(
                    correct_posterior(table, update), abs=1e-9
                )

    def test_rejects_associated_tables(self):
        config = GenerationConfig(count=1, seed=77, kind="associated")
        table = generate_associated(config)[0]
        with pytest.raises(NotIndependentError):
            independent_closed_form(table, EvidenceUpdate(0.5, 0.5))


class TestInfeasibleAndNonConvergent:
    def make_e1_free_table(self) -> JointTable:
        """A table with no E1-true mass at all."""
        cells = [0.0] * 8
        cells[cell_index(False, False, False)] = 0.4
        cells[cell_index(False, True, False)] = 0.3
        cells[cell_index(False, True, True)] = 0.3
        return JointTable(tuple(cells))

    def test_certain_target_on_zero_mass_is_infeasible(self):
        table = self.make_e1_free_table()
        with pytest.raises(InfeasibleUpdateError):
            mce_update(table, EvidenceUpdate(1.0, 0.5))

    def test_interior_target_on_zero_mass_is_infeasible(self):
        table = self.make_e1_free_table()
        with pytest.raises(InfeasibleUpdateError):
            mce_update(table, EvidenceUpdate(0.5, 0.5))

    def test_zero_target_on_zero_mass_is_fine(self):
        table = self.make_e1_free_table()
        result = mce_update(table, EvidenceUpdate(0.0, 0.5))
        assert float(result.table.as_array()[MASK_E2].sum()) == pytest.approx(
            0.5, abs=1e-10
        )

    def test_iteration_cap_reports_deviation(self, rng):
        table = random_table(rng)
        with pytest.raises(NoConvergenceError) as excinfo:
            mce_update(table, EvidenceUpdate(0.9, 0.1), max_iterations=0)
        assert excinfo.value.deviation > 0.0
        assert excinfo.value.iterations == 0
