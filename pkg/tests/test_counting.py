import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from iqdioph.counting import (
    NumericFailure,
    ProblemSpec,
    Theta,
    _grid_shard,
    count_brute_force,
    count_for_grid,
    count_solutions,
    disc_lattice_count,
)
from iqdioph.numberfield import (
    QuadInt,
    field_new,
    ideal_from_generators,
    residues,
    unit_ideal,
)
from iqdioph.regions import ConstantPsi, PowerPsi, StepPsi

F1 = field_new(1)
PSI_ONE = ConstantPsi(Fraction(1))
ZERO3 = (QuadInt(0, 0),) * 3


def gaussian_spec(T, psi=PSI_ONE, v=ZERO3, ideal=None, m=1, n=2):
    return ProblemSpec(
        field=F1, m=m, n=n, psi=psi, v=v, ideal=ideal or unit_ideal(F1), T=T
    )


class TestFixture400:
    def test_enumerator(self):
        report = count_solutions(gaussian_spec(16.0), Theta.zero(1, 2))
        assert report.count == 400
        assert report.q_enumerated == 80
        assert report.ratio == pytest.approx(400 / report.predicted)

    def test_brute_force(self):
        assert count_brute_force(gaussian_spec(16.0), Theta.zero(1, 2)) == 400


class TestValidation:
    def test_t_at_most_one_rejected(self):
        with pytest.raises(ValueError):
            gaussian_spec(1.0)
        with pytest.raises(ValueError):
            gaussian_spec(0.5)

    def test_dimension_two_needs_override(self):
        with pytest.raises(ValueError):
            ProblemSpec(
                field=F1, m=1, n=1, psi=PSI_ONE, v=(QuadInt(0, 0),) * 2,
                ideal=unit_ideal(F1), T=10.0,
            )
        spec = ProblemSpec(
            field=F1, m=1, n=1, psi=PSI_ONE, v=(QuadInt(0, 0),) * 2,
            ideal=unit_ideal(F1), T=10.0, allow_dim2=True,
        )
        report = count_solutions(spec, Theta.zero(1, 1))
        assert not report.theorem_backed
        assert report.count == count_brute_force(spec, Theta.zero(1, 1))

    def test_residue_length_checked(self):
        with pytest.raises(ValueError):
            gaussian_spec(10.0, v=(QuadInt(0, 0),) * 2)

    def test_nonfinite_theta_rejected(self):
        with pytest.raises(NumericFailure):
            Theta(((complex(math.nan, 0.0), 0j),))

    def test_theta_shape_checked(self):
        with pytest.raises(ValueError):
            count_solutions(gaussian_spec(10.0), Theta.zero(2, 1))


class TestShellBoundary:
    def test_barely_open_shell(self):
        # at T = 1 + 1e-7 only the shell value u = 1 is admitted, and with
        # psi(1) = 1/2 the only admissible p is 0
        psi = ConstantPsi(Fraction(1, 2))
        spec = gaussian_spec(1.0000001, psi=psi)
        theta = Theta.zero(1, 2)
        report = count_solutions(spec, theta)
        assert report.count == count_brute_force(spec, theta)
        # q pairs with max norm exactly 1: (1+4)^2 - 1 = 24, p = 0 forced
        assert report.count == 24

    def test_exact_power_cutoff_excluded(self):
        # T = 16 and T slightly above must differ by the boundary shell u = 16
        theta = Theta.zero(1, 2)
        at = count_solutions(gaussian_spec(16.0), theta).count
        above = count_solutions(gaussian_spec(16.0 + 1e-9), theta).count
        assert at == 400
        assert above > at  # u = 16 (max norm 4) enters only for T > 16


class TestDiscLatticeCount:
    def test_unit_disc(self):
        assert disc_lattice_count(F1, unit_ideal(F1), QuadInt(0, 0), 0j, 1.0) == 5

    def test_zero_radius_at_translate(self):
        c = complex(3, 2)
        assert disc_lattice_count(F1, unit_ideal(F1), QuadInt(3, 2), c, 0.0) == 1

    def test_gauss_circle_scale(self):
        count = disc_lattice_count(F1, unit_ideal(F1), QuadInt(0, 0), 0j, 50.0)
        # independent integer-loop oracle
        expected = sum(
            1
            for a in range(-50, 51)
            for b in range(-50, 51)
            if a * a + b * b <= 2500
        )
        assert count == expected
        assert abs(count - math.pi * 2500) <= 0.02 * math.pi * 2500

    def test_translated_sublattice(self):
        onei = ideal_from_generators(F1, [QuadInt(1, 1)])
        # points of 1 + (1+i)Z[i] in the unit disc: odd-norm Gaussians
        count = disc_lattice_count(F1, onei, QuadInt(1, 0), 0j, 1.0)
        assert count == 4  # 1, -1, i, -i

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            disc_lattice_count(F1, unit_ideal(F1), QuadInt(0, 0), 0j, -1.0)
        with pytest.raises(ValueError):
            disc_lattice_count(F1, unit_ideal(F1), QuadInt(0, 0), 0j, math.inf)


PSIS = [
    PSI_ONE,
    ConstantPsi(Fraction(3, 2)),
    PowerPsi(Fraction(1), Fraction(1)),
    PowerPsi(Fraction(3, 2), Fraction(1, 2)),
    StepPsi(((Fraction(1), Fraction(2)), (Fraction(4), Fraction(3, 4)))),
]


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", range(5))
    def test_randomized_specs(self, seed):
        rng = np.random.default_rng(1000 + seed)
        for _ in range(6):
            d_val = int(rng.choice([1, 2, 3]))
            f = field_new(d_val)
            m = int(rng.integers(1, 3))
            n = 3 - m
            psi = PSIS[int(rng.integers(0, len(PSIS)))]
            pool = [unit_ideal(f), ideal_from_generators(f, [QuadInt(2, 0)])]
            if d_val == 1:
                pool.append(ideal_from_generators(f, [QuadInt(1, 1)]))
            ideal = pool[int(rng.integers(0, len(pool)))]
            v = tuple(
                QuadInt(int(rng.integers(-2, 3)), int(rng.integers(-2, 3)))
                for _ in range(3)
            )
            spec = ProblemSpec(
                field=f, m=m, n=n, psi=psi, v=v, ideal=ideal,
                T=float(rng.uniform(2, 60)),
            )
            theta = Theta.from_flat(list(rng.uniform(0, 1, 2 * m * n)), m, n)
            assert count_solutions(spec, theta).count == count_brute_force(spec, theta)

    def test_theta_zero_with_congruence(self):
        onei = ideal_from_generators(F1, [QuadInt(1, 1)])
        spec = gaussian_spec(16.0, ideal=onei)
        theta = Theta.zero(1, 2)
        assert count_solutions(spec, theta).count == count_brute_force(spec, theta)

    def test_unit_ideal_congruence_is_vacuous(self):
        # arbitrary v with I = O equals the unrestricted count
        theta = Theta.from_flat([0.3, 0.7, 0.1, 0.9], 1, 2)
        base = count_solutions(gaussian_spec(40.0), theta).count
        shifted = count_solutions(
            gaussian_spec(40.0, v=(QuadInt(5, -3), QuadInt(2, 2), QuadInt(-1, 7))),
            theta,
        ).count
        assert base == shifted


class TestStructuralInvariants:
    def test_monotone_in_cutoff(self):
        theta = Theta.from_flat([0.21, 0.43, 0.65, 0.87], 1, 2)
        counts = [
            count_solutions(gaussian_spec(t), theta).count
            for t in (5.0, 10.0, 25.0, 50.0, 100.0)
        ]
        assert all(b >= a for a, b in zip(counts, counts[1:]))

    def test_grid_matches_individual_counts(self):
        theta = Theta.from_flat([0.11, 0.52, 0.93, 0.34], 1, 2)
        spec = gaussian_spec(None)
        grid = count_for_grid(spec, theta, (5.0, 25.0, 80.0))
        for entry in grid:
            single = count_solutions(gaussian_spec(entry.T), theta)
            assert entry.count == single.count
            assert entry.q_enumerated == single.q_enumerated

    def test_congruence_partition(self):
        # counts over all residue classes of O/I in each coordinate sum to
        # the unconstrained count
        theta = Theta.from_flat([0.37, 0.58, 0.71, 0.13], 1, 2)
        onei = ideal_from_generators(F1, [QuadInt(1, 1)])
        total = 0
        reps = list(residues(onei))
        for combo in product(reps, repeat=3):
            spec = gaussian_spec(30.0, v=tuple(combo), ideal=onei)
            total += count_solutions(spec, theta).count
        assert total == count_solutions(gaussian_spec(30.0), theta).count

    def test_shard_merge_associative(self):
        theta = Theta.from_flat([0.45, 0.27, 0.62, 0.81], 1, 2)
        spec = gaussian_spec(None)
        grid = (10.0, 60.0)
        whole, whole_q = _grid_shard(spec, theta, grid, 0, 1)
        for n_shards in (2, 3, 5):
            parts = [_grid_shard(spec, theta, grid, s, n_shards) for s in range(n_shards)]
            merged = [sum(p[0][i] for p in parts) for i in range(len(grid))]
            merged_q = [sum(p[1][i] for p in parts) for i in range(len(grid))]
            assert merged == whole
            assert merged_q == whole_q

    def test_ideal_scaling_of_prediction(self):
        two = ideal_from_generators(F1, [QuadInt(1, 1)])
        r1 = count_solutions(gaussian_spec(50.0), Theta.zero(1, 2))
        r2 = count_solutions(gaussian_spec(50.0, ideal=two), Theta.zero(1, 2))
        assert r2.predicted == pytest.approx(r1.predicted / 8, rel=1e-12)
