from fractions import Fraction

import pytest

from iqdioph.asymptotics import (
    ConvergenceRow,
    ConvergenceTable,
    ExperimentPlan,
    fit_error_exponent,
    run_convergence,
    sample_thetas,
    table_to_csv,
)
from iqdioph.counting import ProblemSpec, count_solutions
from iqdioph.numberfield import QuadInt, field_new, ideal_from_generators, unit_ideal
from iqdioph.regions import ConstantPsi

F1 = field_new(1)
PSI_ONE = ConstantPsi(Fraction(1))


def make_plan(t_grid=(20.0, 80.0), theta_count=3, seed=99, ideal=None, v=None):
    spec = ProblemSpec(
        field=F1,
        m=1,
        n=2,
        psi=PSI_ONE,
        v=v or (QuadInt(0, 0),) * 3,
        ideal=ideal or unit_ideal(F1),
        T=None,
    )
    return ExperimentPlan(spec=spec, T_grid=t_grid, theta_count=theta_count, seed=seed)


class TestPlanValidation:
    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            make_plan(t_grid=(100.0, 10.0))
        with pytest.raises(ValueError):
            make_plan(t_grid=(10.0, 10.0))

    def test_grid_must_exceed_one(self):
        with pytest.raises(ValueError):
            make_plan(t_grid=(1.0, 10.0))

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            make_plan(t_grid=())

    def test_theta_count_positive(self):
        with pytest.raises(ValueError):
            make_plan(theta_count=0)


class TestRunConvergence:
    def test_single_row_table(self):
        plan = make_plan(t_grid=(2.0,), theta_count=1)
        table = run_convergence(plan)
        assert len(table.rows) == 1
        row = table.rows[0]
        assert row.ratio == pytest.approx(row.count / row.predicted)

    def test_row_count_and_summary_shape(self):
        plan = make_plan(t_grid=(5.0, 20.0, 60.0), theta_count=4)
        table = run_convergence(plan)
        assert len(table.rows) == 12
        assert len(table.summary) == 3

    def test_deterministic_tables(self):
        plan = make_plan(theta_count=3, seed=1234)
        t1 = run_convergence(plan)
        t2 = run_convergence(plan)
        assert t1 == t2
        assert table_to_csv(t1) == table_to_csv(t2)

    def test_rows_match_direct_counts(self):
        plan = make_plan(t_grid=(10.0, 40.0), theta_count=2, seed=5)
        table = run_convergence(plan)
        thetas = sample_thetas(plan)
        for row in table.rows:
            spec = ProblemSpec(
                field=F1, m=1, n=2, psi=PSI_ONE, v=plan.spec.v,
                ideal=plan.spec.ideal, T=row.T,
            )
            report = count_solutions(spec, thetas[row.theta_index])
            assert row.count == report.count
            assert row.predicted == pytest.approx(report.predicted, rel=1e-12)

    def test_median_absolute_error_shrinks_endpoint(self):
        plan = make_plan(t_grid=(20.0, 500.0), theta_count=5, seed=31)
        table = run_convergence(plan)
        first = abs(table.summary[0][1] - 1.0)
        last = abs(table.summary[-1][1] - 1.0)
        assert last <= first

    def test_ideal_scaling_of_prediction(self):
        onei = ideal_from_generators(F1, [QuadInt(1, 1)])
        base = run_convergence(make_plan(t_grid=(50.0,), theta_count=2, seed=77))
        scaled = run_convergence(
            make_plan(t_grid=(50.0,), theta_count=2, seed=77, ideal=onei)
        )
        for b_row, s_row in zip(base.rows, scaled.rows):
            assert s_row.predicted == pytest.approx(b_row.predicted / 8.0, rel=1e-12)


def synthetic_table(exponent: float | None) -> ConvergenceTable:
    rows = []
    for t_idx, pred in enumerate([100.0, 1000.0, 10000.0, 100000.0]):
        if exponent is None:
            count = int(pred)
            pred = float(int(pred))
        else:
            count = pred + pred ** exponent
        rows.append(
            ConvergenceRow(theta_index=0, T=10.0 ** (t_idx + 2), count=count,
                           predicted=pred, ratio=count / pred)
        )
    return ConvergenceTable(rows=tuple(rows), summary=())


class TestErrorExponent:
    def test_recovers_half(self):
        fits = fit_error_exponent(synthetic_table(0.5))
        assert len(fits) == 1
        assert not fits[0].degenerate
        assert fits[0].beta == pytest.approx(0.5, abs=1e-9)

    def test_recovers_other_exponents(self):
        for beta in (0.3, 0.7, 1.0):
            fits = fit_error_exponent(synthetic_table(beta))
            assert fits[0].beta == pytest.approx(beta, abs=1e-9)

    def test_exact_match_is_degenerate(self):
        fits = fit_error_exponent(synthetic_table(None))
        assert fits[0].degenerate
        assert fits[0].beta is None

    def test_too_few_points_is_degenerate(self):
        rows = (
            ConvergenceRow(theta_index=0, T=10.0, count=105, predicted=100.0, ratio=1.05),
            ConvergenceRow(theta_index=0, T=100.0, count=1010, predicted=1000.0, ratio=1.01),
        )
        fits = fit_error_exponent(ConvergenceTable(rows=rows, summary=()))
        assert fits[0].degenerate
