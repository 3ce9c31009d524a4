import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iqdioph.numberfield import (
    OMEGA,
    ONE,
    FieldSpec,
    QuadInt,
    congruent,
    embed,
    field_new,
    ideal_contains,
    ideal_from_generators,
    mul,
    norm_inf,
    reduce_mod,
    regular_representation,
    residues,
    unit_ideal,
)

FIELDS = [field_new(D) for D in (1, 2, 3, 5, 7)]

small_ints = st.integers(min_value=-30, max_value=30)
elements = st.builds(QuadInt, small_ints, small_ints)
fields = st.sampled_from(FIELDS)


def trace_form_discriminant(f: FieldSpec) -> int:
    """Independent oracle: determinant of the trace pairing of {1, omega}."""
    om = f.omega_complex
    tr1 = 2.0
    tr_om = 2.0 * om.real
    tr_om2 = 2.0 * (om * om).real
    det = tr1 * tr_om2 - tr_om * tr_om
    return round(det)


class TestFieldNew:
    @pytest.mark.parametrize(
        "D,disc", [(1, -4), (2, -8), (3, -3), (5, -20), (7, -7), (11, -11), (6, -24)]
    )
    def test_discriminants(self, D, disc):
        f = field_new(D)
        assert f.discriminant == disc
        assert trace_form_discriminant(f) == disc

    def test_omega_values(self):
        assert field_new(1).omega_complex == 1j
        om3 = field_new(3).omega_complex
        assert om3.real == pytest.approx(0.5)
        assert om3.imag == pytest.approx(math.sqrt(3) / 2)

    @pytest.mark.parametrize("D", [0, -3, 4, 8, 9, 12, 18, 25])
    def test_rejects_bad_d(self, D):
        with pytest.raises(ValueError):
            field_new(D)


class TestEmbedAndNorm:
    def test_embed_examples(self):
        f = field_new(1)
        assert embed(f, ONE) == 1 + 0j
        assert embed(f, OMEGA) == 1j
        f3 = field_new(3)
        z = embed(f3, OMEGA)
        assert z.real == pytest.approx(0.5)
        assert z.imag == pytest.approx(math.sqrt(3) / 2)

    def test_norm_examples(self):
        f = field_new(1)
        assert norm_inf(f, QuadInt(1, 1)) == 2
        assert norm_inf(f, QuadInt(0, 0)) == 0
        assert norm_inf(field_new(3), OMEGA) == 1

    @given(fields, elements)
    def test_norm_matches_embedding(self, f, x):
        assert norm_inf(f, x) == pytest.approx(abs(embed(f, x)) ** 2, rel=1e-12, abs=1e-9)

    @given(fields, elements, elements)
    def test_norm_multiplicative(self, f, x, y):
        assert norm_inf(f, mul(f, x, y)) == norm_inf(f, x) * norm_inf(f, y)

    @given(fields, elements)
    def test_norm_zero_iff_zero(self, f, x):
        assert (norm_inf(f, x) == 0) == x.is_zero()

    @given(fields, elements, elements)
    def test_embed_is_ring_hom(self, f, x, y):
        lhs = embed(f, mul(f, x, y))
        rhs = embed(f, x) * embed(f, y)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


class TestRegularRepresentation:
    def test_identity(self):
        for f in FIELDS:
            assert regular_representation(f, ONE) == ((1, 0), (0, 1))

    def test_gaussian_unit(self):
        assert regular_representation(field_new(1), OMEGA) == ((0, 1), (-1, 0))

    @given(fields, elements, elements)
    def test_action_matches_multiplication(self, f, x, y):
        # the product computed by ring multiplication must agree with the
        # row-vector action of the representation matrix
        yt = regular_representation(f, y)
        xy = mul(f, x, y)
        acted = (
            x.a * yt[0][0] + x.b * yt[1][0],
            x.a * yt[0][1] + x.b * yt[1][1],
        )
        assert (xy.a, xy.b) == acted

    @given(fields, elements)
    def test_det_is_field_norm(self, f, y):
        (a, b), (c, d) = regular_representation(f, y)
        assert a * d - b * c == norm_inf(f, y)

    @given(fields, elements, elements)
    def test_multiplicative(self, f, x, y):
        xt = regular_representation(f, x)
        yt = regular_representation(f, y)
        prod = tuple(
            tuple(sum(xt[i][k] * yt[k][j] for k in range(2)) for j in range(2))
            for i in range(2)
        )
        assert prod == regular_representation(f, mul(f, x, y))


class TestIdeals:
    def test_norm_examples(self):
        f = field_new(1)
        assert ideal_from_generators(f, [QuadInt(2, 0)]).norm == 4
        assert ideal_from_generators(f, [QuadInt(1, 1)]).norm == 2
        for f in FIELDS:
            u = unit_ideal(f)
            assert u.norm == 1
            assert u.basis == ((1, 0), (0, 1))

    def test_rejects_zero_generators(self):
        f = field_new(1)
        with pytest.raises(ValueError):
            ideal_from_generators(f, [])
        with pytest.raises(ValueError):
            ideal_from_generators(f, [QuadInt(0, 0)])

    @given(fields, st.lists(elements, min_size=1, max_size=4))
    def test_generator_order_invariant(self, f, gens):
        if all(g.is_zero() for g in gens):
            gens = gens + [ONE]
        forward = ideal_from_generators(f, gens)
        backward = ideal_from_generators(f, list(reversed(gens)))
        assert forward == backward

    @given(fields, st.lists(elements, min_size=1, max_size=3))
    def test_closed_under_omega(self, f, gens):
        if all(g.is_zero() for g in gens):
            gens = gens + [ONE]
        ideal = ideal_from_generators(f, gens)
        for row in ideal.basis:
            x = QuadInt(row[0], row[1])
            assert ideal_contains(ideal, mul(f, x, OMEGA))
            assert ideal_contains(ideal, x)

    @pytest.mark.parametrize("D", [1, 2, 3])
    def test_coset_count_equals_norm(self, D):
        # brute-force coset enumeration over a box of representatives
        f = field_new(D)
        gens_pool = [
            [QuadInt(2, 0)],
            [QuadInt(1, 1)],
            [QuadInt(3, 1)],
            [QuadInt(2, 1), QuadInt(0, 2)],
            [QuadInt(5, 0)],
        ]
        for gens in gens_pool:
            ideal = ideal_from_generators(f, gens)
            if ideal.norm > 100:
                continue
            seen = {
                reduce_mod(ideal, QuadInt(a, b))
                for a in range(-12, 13)
                for b in range(-12, 13)
            }
            assert len(seen) == ideal.norm

    def test_residues_are_canonical(self):
        f = field_new(1)
        ideal = ideal_from_generators(f, [QuadInt(1, 1)])
        reps = list(residues(ideal))
        assert len(reps) == 2
        assert all(reduce_mod(ideal, r) == r for r in reps)


class TestCongruent:
    def test_examples(self):
        f = field_new(1)
        two = ideal_from_generators(f, [QuadInt(2, 0)])
        onei = ideal_from_generators(f, [QuadInt(1, 1)])
        assert congruent([QuadInt(3, 1)], [QuadInt(1, 1)], two)
        assert not congruent([QuadInt(1, 0)], [QuadInt(0, 0)], onei)

    def test_length_mismatch(self):
        f = field_new(1)
        with pytest.raises(ValueError):
            congruent([ONE], [ONE, ONE], unit_ideal(f))

    @given(fields, st.lists(elements, min_size=1, max_size=3))
    def test_reflexive(self, f, z):
        ideal = ideal_from_generators(f, [QuadInt(2, 1)])
        assert congruent(z, z, ideal)

    @given(fields, elements, elements, elements)
    @settings(max_examples=40)
    def test_symmetric_and_transitive(self, f, x, y, z):
        ideal = ideal_from_generators(f, [QuadInt(1, 2)])
        if congruent([x], [y], ideal):
            assert congruent([y], [x], ideal)
            if congruent([y], [z], ideal):
                assert congruent([x], [z], ideal)

    @given(fields, elements)
    def test_reduce_mod_is_congruent(self, f, x):
        ideal = ideal_from_generators(f, [QuadInt(3, 1)])
        r = reduce_mod(ideal, x)
        assert congruent([x], [r], ideal)
        (a, _), (_, d) = ideal.basis
        assert 0 <= r.a < a and 0 <= r.b < d
