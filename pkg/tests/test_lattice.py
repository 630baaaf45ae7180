import random
from fractions import Fraction

import pytest

from hmfcert.lattice import (
    DegenerateSplit,
    Lattice,
    NotCommuting,
    NotStable,
    Split,
    SupportViolation,
    bareiss_det,
    congruence_module,
    coordinate_split,
    disc_pairing,
    find_congruences,
    hnf,
    in_row_span,
    left_kernel,
    localized_module_nonzero,
    snf,
    snf_minors_oracle,
    split_indices,
    split_lattice,
)


class TestHnfSnf:
    def test_snf_examples(self):
        assert snf([[2, 0], [0, 3]]) == (1, 6)
        assert snf([[1, 0], [0, 1]]) == (1, 1)
        assert snf([[0, 5], [5, 0]]) == (5, 5)

    def test_hnf_positive_pivots(self):
        h = hnf([[-2, 1], [4, 7]])
        assert all(next(x for x in row if x) > 0 for row in h)

    def test_hnf_canonical_for_row_span(self):
        rng = random.Random(1)
        for _ in range(40):
            rows = [[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)]
            h1 = hnf(rows)
            # shuffle and unimodularly mix the rows: same span, same HNF
            mixed = [
                [a + 2 * b for a, b in zip(rows[0], rows[1])],
                rows[1],
                [a - b for a, b in zip(rows[2], rows[0])],
            ]
            assert hnf(mixed) == h1

    def test_snf_against_minors_oracle(self):
        rng = random.Random(2)
        for _ in range(60):
            nr = rng.randint(1, 6)
            nc = rng.randint(1, 6)
            m = [[rng.randint(-50, 50) for _ in range(nc)] for _ in range(nr)]
            assert snf(m) == snf_minors_oracle(m), m

    def test_snf_divisibility_chain(self):
        rng = random.Random(3)
        for _ in range(40):
            m = [[rng.randint(-30, 30) for _ in range(4)] for _ in range(4)]
            vals = [d for d in snf(m) if d != 0]
            for a, b in zip(vals, vals[1:]):
                assert b % a == 0

    def test_snf_edge_cases(self):
        assert snf([]) == ()
        assert snf([[0, 0], [0, 0]]) == (0, 0)
        assert snf([[0, 0, 0]]) == (0,)

    def test_bareiss_det(self):
        assert bareiss_det([[1, 2], [3, 4]]) == -2
        assert bareiss_det([[2]]) == 2
        rng = random.Random(4)
        for _ in range(30):
            m = [[rng.randint(-9, 9) for _ in range(4)] for _ in range(4)]
            # cofactor expansion oracle
            def det(mm):
                if len(mm) == 1:
                    return mm[0][0]
                return sum(
                    (-1) ** j * mm[0][j]
                    * det([row[:j] + row[j + 1:] for row in mm[1:]])
                    for j in range(len(mm))
                )
            assert bareiss_det(m) == det(m)

    def test_left_kernel(self):
        k = left_kernel([[2, 0], [1, 0], [0, 1]])
        assert len(k) == 1
        y = k[0]
        assert [y[0] * 2 + y[1] * 1, y[2]] == [0, 0]

    def test_in_row_span(self):
        basis = [[1, 1], [0, 5]]
        assert in_row_span([2, 7], basis)
        assert not in_row_span([0, 3], basis)


class TestSplitLattice:
    def test_identity_lattice(self):
        lat = Lattice(((1, 0), (0, 1)), 2)
        s = coordinate_split(2, 1)
        p = split_lattice(lat, s)
        assert p.l1 == ((1,),) and p.l1_proj == ((1,),)

    def test_glued_lattice(self):
        lat = Lattice(((1, 1), (0, 5)), 2)
        s = coordinate_split(2, 1)
        p = split_lattice(lat, s)
        assert p.l1 == ((5,),) and p.l1_denom == 1
        assert p.l1_proj == ((1,),)

    def test_already_split(self):
        lat = Lattice(((2, 0), (0, 3)), 2)
        s = coordinate_split(2, 1)
        p = split_lattice(lat, s)
        assert p.l1 == ((2,),) and p.l1_proj == ((2,),)

    def test_rejects_rank_deficient(self):
        lat = Lattice(((1, 1, 0),), 3)
        with pytest.raises(DegenerateSplit):
            split_lattice(lat, coordinate_split(3, 1))

    def test_oblique_split(self):
        lat = Lattice(((1, 0), (0, 1)), 2)
        s = Split(((Fraction(1), Fraction(1)),), ((Fraction(1), Fraction(-1)),))
        cm = congruence_module(lat, s, 2)
        assert cm.invariant_factors == (2,)


class TestCongruenceModule:
    def test_trivial(self):
        lat = Lattice(((1, 0), (0, 1)), 2)
        cm = congruence_module(lat, coordinate_split(2, 1), 5)
        assert cm.is_trivial

    def test_glued(self):
        lat = Lattice(((1, 1), (0, 5)), 2)
        cm = congruence_module(lat, coordinate_split(2, 1), 5)
        assert cm.invariant_factors == (5,)
        assert cm.three_way == ((5,), (5,), (5,))

    def test_four_dimensional(self):
        lat = Lattice(((1, 0, 1, 0), (0, 1, 0, 25), (0, 0, 5, 0), (0, 0, 0, 5)), 4)
        cm = congruence_module(lat, coordinate_split(4, 2), 5)
        assert cm.three_way[0] == cm.three_way[1] == cm.three_way[2]
        assert cm.invariant_factors == (5,)

    def test_p_locality(self):
        lat = Lattice(((1, 1), (0, 6)), 2)
        assert congruence_module(lat, coordinate_split(2, 1), 2).invariant_factors == (2,)
        assert congruence_module(lat, coordinate_split(2, 1), 3).invariant_factors == (3,)
        assert congruence_module(lat, coordinate_split(2, 1), 5).is_trivial

    def test_random_fusion_and_index_product(self):
        rng = random.Random(9)
        for _ in range(100):
            n = rng.randint(2, 5)
            d1 = rng.randint(1, n - 1)
            while True:
                rows = [[rng.randint(-8, 8) for _ in range(n)] for _ in range(n)]
                if bareiss_det(rows) != 0:
                    break
            lat = Lattice(tuple(tuple(r) for r in rows), n)
            s = coordinate_split(n, d1)
            for p in (2, 3, 5, 7):
                cm = congruence_module(lat, s, p)
                assert cm.three_way[0] == cm.three_way[1] == cm.three_way[2]
            inner, outer = split_indices(lat, s)
            full = 1
            for f in _quotient_all_primes(lat, s):
                full *= f
            assert inner * outer == full * full

    def test_order_squared_identity(self):
        lat = Lattice(((1, 1), (0, 5)), 2)
        s = coordinate_split(2, 1)
        inner, outer = split_indices(lat, s)
        cm = congruence_module(lat, s, 5)
        assert inner * outer == cm.order ** 2


def _quotient_all_primes(lat, s):
    """Invariant factors of L^1/L_1 over all primes (via the middle quotient)."""
    from hmfcert.lattice import _quotient_invariants, split_lattice as _sl

    pieces = _sl(lat, s)
    return _quotient_invariants(pieces.l1, pieces.l1_denom,
                                pieces.l1_proj, pieces.l1_proj_denom)


class TestDiscPairing:
    def test_two_by_two(self):
        res = disc_pairing([[0, 3], [-3, 0]], 1)
        assert res.determinant == 9

    def test_support_violation(self):
        with pytest.raises(SupportViolation):
            disc_pairing([[1, 0], [0, 1]], 1)

    def test_block_antidiagonal(self):
        a, b = Fraction(2), Fraction(7)
        size = 4
        gram = [[Fraction(0)] * size for _ in range(size)]
        # subsets of {0,1}: pairs ({} , {0,1}) and ({0}, {1})
        gram[0][3], gram[3][0] = a, -a
        gram[1][2], gram[2][1] = b, -b
        res = disc_pairing(gram, 2)
        assert res.determinant == a * a * b * b


class TestFindCongruences:
    def test_congruent_pair(self):
        lat = Lattice(((1, 1), (0, 5)), 2)
        s = coordinate_split(2, 1)
        res = find_congruences([((2, 0), (0, 7))], lat, s, 5)
        assert [(e1.values, e2.values) for e1, e2 in res.pairs] == [((2,), (7,))]
        assert not res.module.is_trivial

    def test_no_pair(self):
        lat = Lattice(((1, 0), (0, 1)), 2)
        res = find_congruences([((2, 0), (0, 3))], lat, coordinate_split(2, 1), 5)
        assert res.pairs == ()

    def test_pair_mod_seven(self):
        lat = Lattice(((1, 0), (0, 1)), 2)
        res = find_congruences([((2, 0), (0, 9))], lat, coordinate_split(2, 1), 7)
        assert [(e1.values, e2.values) for e1, e2 in res.pairs] == [((2,), (9,))]

    def test_not_commuting(self):
        lat = Lattice(((1, 0), (0, 1)), 2)
        with pytest.raises(NotCommuting):
            find_congruences([((1, 1), (0, 1)), ((1, 0), (1, 1))], lat,
                             coordinate_split(2, 1), 5)

    def test_not_stable(self):
        lat = Lattice(((1, 1), (0, 5)), 2)
        with pytest.raises(NotStableOrSplit):
            find_congruences([((1, 0), (1, 1))], lat, coordinate_split(2, 1), 5)

    def test_extension_needed_counts(self):
        # rotation-like operator with irrational eigenvalues on V1+V2... use
        # a 2x2 block with characteristic polynomial x^2 - 2 on one side
        lat = Lattice(((1, 0, 0), (0, 1, 0), (0, 0, 1)), 3)
        s = coordinate_split(3, 2)
        op = ((0, 2, 0), (1, 0, 0), (0, 0, 3))
        res = find_congruences([op], lat, s, 5)
        assert res.extension_needed1 == 2
        assert res.side2[0].values == (3,)


NotStableOrSplit = (NotStable, DegenerateSplit)


class TestLocalizedModuleOracle:
    def test_nonzero_when_glued(self):
        lat = Lattice(((1, 1), (0, 5)), 2)
        s = coordinate_split(2, 1)
        assert localized_module_nonzero([((2, 0), (0, 7))], lat, s, 5, (2,))

    def test_zero_when_split(self):
        lat = Lattice(((1, 0), (0, 1)), 2)
        s = coordinate_split(2, 1)
        assert not localized_module_nonzero([((2, 0), (0, 7))], lat, s, 5, (2,))

    def test_wrong_eigensystem_localizes_to_zero(self):
        # module is Z/5 but supported at theta = 2 mod 5; theta = 1 sees nothing
        lat = Lattice(((1, 1), (0, 5)), 2)
        s = coordinate_split(2, 1)
        assert not localized_module_nonzero([((2, 0), (0, 7))], lat, s, 5, (1,))
