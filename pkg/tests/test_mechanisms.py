import numpy as np
import pytest

from skybid.bidding import BidProfile, UniformValuation
from skybid.errors import ValidationError
from skybid.mechanisms import (
    AuctionOutcome,
    MechanismConfig,
    analytic_inverse_virtual,
    analytic_myerson_revenue_batch,
    analytic_virtual_value,
    check_bb,
    check_ic_empirical,
    check_ir,
    run_analytic_myerson,
    run_fpa,
    run_spa,
    second_price_revenue_batch,
)

# first row of the five-drone bid sample table
ROW1 = (0.6802, 0.4398, 0.8589, 0.7860, 0.9420)
U01 = UniformValuation(0.0, 1.0)


def profile(values):
    return BidProfile.from_values(values)


class TestFpa:
    def test_sample_row(self):
        outcome = run_fpa(profile(ROW1))
        assert outcome.winner == 4
        assert outcome.payments[4] == 0.9420
        assert outcome.revenue == 0.9420

    def test_single_bidder(self):
        outcome = run_fpa(profile([0.3]))
        assert outcome.winner == 0 and outcome.revenue == 0.3

    def test_tie_breaks_low(self):
        assert run_fpa(profile([0.7, 0.7, 0.1])).winner == 0

    def test_winner_utility_zero_when_truthful(self):
        outcome = run_fpa(profile(ROW1))
        assert outcome.utilities[4] == 0.0


class TestSpa:
    def test_sample_row(self):
        outcome = run_spa(profile(ROW1))
        assert outcome.winner == 4
        assert outcome.payments[4] == 0.8589
        assert np.all(outcome.payments[:4] == 0.0)

    def test_second_price_quote(self):
        outcome = run_spa(profile([0.8408, 0.7832, 0.41, 0.22, 0.1]))
        assert outcome.payments[0] == 0.7832

    def test_all_equal_bids(self):
        outcome = run_spa(profile([0.5, 0.5, 0.5]))
        assert outcome.winner == 0
        assert outcome.revenue == 0.5
        assert outcome.utilities[0] == 0.0

    def test_single_bid_without_reserve_rejected(self):
        with pytest.raises(ValidationError):
            run_spa(profile([0.4]))

    def test_single_bid_with_reserve(self):
        outcome = run_spa(profile([0.4]), MechanismConfig(reserve=0.3))
        assert outcome.winner == 0 and outcome.revenue == 0.3

    def test_reserve_blocks_sale(self):
        outcome = run_spa(profile([0.4, 0.2]), MechanismConfig(reserve=0.5))
        assert outcome.winner is None and outcome.revenue == 0.0

    def test_reserve_floors_payment(self):
        outcome = run_spa(profile([0.9, 0.2]), MechanismConfig(reserve=0.5))
        assert outcome.payments[0] == 0.5

    def test_batch_matches_scalar(self, rng):
        values = rng.uniform(0, 1, (500, 5))
        batch = second_price_revenue_batch(values)
        for i in range(0, 500, 7):
            assert batch[i] == run_spa(profile(values[i])).revenue

    def test_expected_revenue_order_statistic(self):
        # E[second highest of n U(0,1)] = (n - 1) / (n + 1)
        values = np.random.default_rng(2).uniform(0, 1, (20000, 5))
        assert second_price_revenue_batch(values).mean() == pytest.approx(4 / 6, abs=0.02)


class TestAnalyticMyerson:
    @pytest.mark.parametrize(
        "v,dist,expected",
        [
            (0.5, U01, 0.0),
            (1.0, U01, 1.0),
            (0.5, UniformValuation(0.5, 1.0), 0.0),
        ],
    )
    def test_virtual_value(self, v, dist, expected):
        assert analytic_virtual_value(v, dist) == expected

    def test_outside_support_rejected(self):
        with pytest.raises(ValidationError):
            analytic_virtual_value(1.2, U01)

    def test_inverse(self):
        assert analytic_inverse_virtual(0.0, U01) == 0.5

    def test_second_virtual_sets_price(self):
        outcome = run_analytic_myerson(profile([0.9, 0.6]), U01)
        assert outcome.winner == 0
        assert outcome.payments[0] == pytest.approx(0.6)

    def test_all_below_reserve(self):
        outcome = run_analytic_myerson(profile([0.4, 0.3]), U01)
        assert outcome.winner is None and outcome.revenue == 0.0

    def test_reserve_binds(self):
        outcome = run_analytic_myerson(profile([0.9, 0.2]), U01)
        assert outcome.payments[0] == pytest.approx(0.5)

    def test_batch_matches_scalar(self, rng):
        values = rng.uniform(0, 1, (300, 4))
        batch = analytic_myerson_revenue_batch(values, U01)
        for i in range(0, 300, 11):
            assert batch[i] == pytest.approx(run_analytic_myerson(profile(values[i]), U01).revenue)

    def test_dominates_spa_on_binding_reserve(self, rng):
        values = rng.uniform(0, 1, (40000, 5))
        myerson = analytic_myerson_revenue_batch(values, U01)
        spa = second_price_revenue_batch(values)
        assert myerson.mean() > spa.mean()

    def test_equals_spa_when_reserve_not_binding(self, rng):
        # on U(0.5, 1) the reserve point coincides with the support minimum
        dist = UniformValuation(0.5, 1.0)
        values = rng.uniform(0.5, 1.0, (200, 5))
        for row in values:
            assert run_analytic_myerson(profile(row), dist).revenue == pytest.approx(
                run_spa(profile(row)).revenue
            )


class TestPropertyCheckers:
    def test_ir_holds_for_truthful_spa(self):
        outcome = run_spa(profile(ROW1))
        assert check_ir(outcome, ROW1)

    def test_ir_holds_for_truthful_fpa(self):
        assert check_ir(run_fpa(profile(ROW1)), ROW1)

    def test_ir_fails_when_loser_pays(self):
        outcome = AuctionOutcome(
            winner=0,
            allocation=np.array([1.0, 0.0]),
            payments=np.array([0.2, 0.3]),
            revenue=0.5,
            utilities=np.array([0.3, -0.3]),
        )
        assert not check_ir(outcome, [0.5, 0.4])

    def test_bb(self):
        outcome = run_spa(profile(ROW1))
        assert check_bb(outcome, list(ROW1))  # budget-capped bids
        assert not check_bb(outcome, [0.8588] * 5)  # 0.8589 payment over budget

    def test_bb_zero_payments(self):
        outcome = run_analytic_myerson(profile([0.4, 0.3]), U01)  # no sale
        assert check_bb(outcome, [0.0, 0.0])

    def test_truthful_outcomes_are_sane_for_every_mechanism(self, rng):
        mechanisms = (
            run_fpa,
            run_spa,
            lambda p: run_analytic_myerson(p, U01),
        )
        for _ in range(50):
            values = rng.uniform(0, 1, 5)
            for mech in mechanisms:
                outcome = mech(profile(values))
                assert outcome.allocation.sum() <= 1 + 1e-9
                losers = outcome.allocation == 0.0
                assert np.all(outcome.payments[losers] == 0.0)
                assert np.all(outcome.utilities[losers] == 0.0)
                assert check_ir(outcome, values)

    def test_allocation_sums_to_at_most_one(self):
        with pytest.raises(ValidationError):
            AuctionOutcome(
                winner=0,
                allocation=np.array([0.9, 0.9]),
                payments=np.zeros(2),
                revenue=0.0,
                utilities=np.zeros(2),
            )


class TestCsvExports:
    def test_outcome_export(self, tmp_path):
        from skybid.mechanisms import write_outcome_csv

        out = tmp_path / "outcome.csv"
        write_outcome_csv(out, profile(ROW1), run_spa(profile(ROW1)))
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "bidder,bid,allocation,payment,utility"
        assert len(lines) == 7  # header + 5 bidders + revenue footer
        assert lines[-1].startswith("revenue,")
        assert "0.8589" in lines[-1]

    def test_bid_samples_export(self, tmp_path):
        from skybid.bidding import write_bid_samples_csv

        out = tmp_path / "samples.csv"
        write_bid_samples_csv(out, [profile(ROW1), profile([0.4552, 0.5123, 0.7315, 0.76, 0.8045])])
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "no,drone_1,drone_2,drone_3,drone_4,drone_5"
        assert lines[1] == "1,0.6802,0.4398,0.8589,0.7860,0.9420"
        assert len(lines) == 3


GRID = tuple(i / 5 for i in range(1, 11))


class TestIncentiveChecks:
    def test_spa_is_truthful(self):
        report = check_ic_empirical(run_spa, profile(ROW1), ROW1, GRID)
        assert report.max_gain <= 1e-9
        assert report.ic_holds

    def test_fpa_rewards_shading(self):
        # shading to just above the runner-up (0.8589 / 0.9420 ~ 0.912)
        report = check_ic_empirical(run_fpa, profile(ROW1), ROW1, GRID + (0.92,))
        assert report.max_gain > 0.01
        assert not report.ic_holds

    def test_overbid_does_not_change_spa_payment(self):
        values = [0.8408, 0.7832, 0.41, 0.22, 0.1]
        base = profile(values)
        deviated = list(values)
        deviated[0] = 1.5 * values[0]
        outcome = run_spa(profile(deviated))
        assert outcome.winner == 0
        assert outcome.payments[0] == 0.7832
        report = check_ic_empirical(run_spa, base, values, (1.5,))
        assert report.per_bidder_gain[0] == pytest.approx(0.0, abs=1e-12)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValidationError):
            check_ic_empirical(run_spa, profile(ROW1), ROW1, ())
