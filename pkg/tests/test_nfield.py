import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmfcert.nfield import (
    CertifiedInteger,
    DyadicInterval,
    Indeterminate,
    NotSquarefree,
    NotTotallyPositive,
    NotTotallyReal,
    UnsupportedDegree,
    Zero,
    embed,
    embed_sign,
    fundamental_unit_quadratic,
    is_totally_positive,
    make_field,
    norm,
    orbit_reduce,
    symmetrized_difference_norm,
    symmetrized_norm,
    totally_positive_fundamental,
    trace,
)
from hmfcert.nfield import NotIrreducible


@pytest.fixture(scope="module")
def q5():
    return make_field([-5, 0, 1])


@pytest.fixture(scope="module")
def eps0(q5):
    return q5.element([Fraction(3, 2), Fraction(1, 2)])


class TestMakeField:
    def test_quadratic(self, q5):
        assert q5.degree == 2
        lo0, hi0 = q5.embeddings[0]
        lo1, hi1 = q5.embeddings[1]
        assert lo0 <= -2 <= hi0 and lo1 <= 2 <= hi1
        assert q5.galois == ((0, 1), (1, 0))

    def test_not_totally_real(self):
        with pytest.raises(NotTotallyReal):
            make_field([1, 0, 1])

    def test_reducible(self):
        with pytest.raises(NotIrreducible):
            make_field([-1, 0, 1])  # x^2 - 1

    def test_cyclic_cubic(self):
        f = make_field([-1, -3, 0, 1])
        assert f.degree == 3
        assert f.galois is not None and len(f.galois) == 3

    def test_non_galois_cubic_has_no_default(self):
        f = make_field([-2, -4, 0, 1])  # x^3 - 4x - 2, disc 148 not a square
        assert f.degree == 3
        assert f.galois is None

    def test_non_monic_rejected(self):
        with pytest.raises(ValueError):
            make_field([-5, 0, 2])


class TestArithmetic:
    def test_product_of_conjugates(self, q5):
        a = q5.element([Fraction(3, 2), Fraction(1, 2)])
        b = q5.element([Fraction(3, 2), Fraction(-1, 2)])
        assert a * b == q5.one

    def test_defining_relation(self, q5):
        th = q5.gen
        assert th * th == q5.element([5])

    def test_inverse(self, q5):
        a = q5.element([Fraction(1, 2), Fraction(1, 2)])
        assert a.inverse() == q5.element([Fraction(-1, 2), Fraction(1, 2)])
        assert a * a.inverse() == q5.one

    def test_pow_negative(self, q5, eps0):
        assert eps0 ** (-2) == (eps0 * eps0).inverse()

    def test_division_by_zero(self, q5):
        with pytest.raises(ZeroDivisionError):
            q5.zero.inverse()


class TestNormTrace:
    def test_norm_of_generator(self, q5):
        assert norm(q5.gen) == -5

    def test_norm_of_rational(self, q5):
        assert norm(q5.element([7])) == 49

    def test_norm_unit(self, q5, eps0):
        assert norm(eps0) == 1

    def test_trace_rational(self, q5):
        assert trace(q5.element([7])) == 14

    @given(st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9),
           st.integers(-9, 9))
    @settings(max_examples=60, deadline=None)
    def test_norm_multiplicative(self, a0, a1, b0, b1):
        f = make_field([-5, 0, 1])
        a = f.element([a0, a1])
        b = f.element([b0, b1])
        assert norm(a * b) == norm(a) * norm(b)
        assert trace(a + b) == trace(a) + trace(b)

    def test_norm_equals_product_of_embeddings(self, q5):
        a = q5.element([Fraction(7, 3), Fraction(-2, 5)])
        n = norm(a)
        for bits in (16, 48):
            iv0 = embed(a, 0, bits)
            iv1 = embed(a, 1, bits)
            prod = iv0 * iv1
            assert prod.lo <= n <= prod.hi


class TestEmbed:
    def test_sqrt5_digits(self, q5):
        iv = embed(q5.gen, 1, 20)
        assert iv.width <= Fraction(1, 2**20)
        assert iv.contains(Fraction(2236067977, 10**9))

    def test_rational_constant(self, q5):
        iv = embed(q5.element([3]), 0, 4)
        assert iv.lo == iv.hi == 3

    def test_negative_root(self, q5):
        iv = embed(q5.gen, 0, 10)
        assert iv.hi < -2 and iv.lo > -3

    def test_monotone_refinement(self, q5):
        a = q5.element([Fraction(1, 3), Fraction(2, 7)])
        prev = embed(a, 1, 8)
        for bits in (16, 32, 64):
            cur = embed(a, 1, bits)
            assert prev.lo <= cur.lo and cur.hi <= prev.hi
            prev = cur


class TestDyadicInterval:
    def test_outward_rounding_contains(self):
        q = Fraction(1, 3)
        iv = DyadicInterval.from_fraction(q, 10)
        assert iv.lo <= q <= iv.hi
        assert iv.width <= Fraction(2, 2**10)

    @given(st.fractions(min_value=-10, max_value=10),
           st.fractions(min_value=-10, max_value=10))
    @settings(max_examples=50, deadline=None)
    def test_product_contains_exact(self, x, y):
        ix = DyadicInterval.from_fraction(x, 12)
        iy = DyadicInterval.from_fraction(y, 12)
        prod = (ix * iy).round(12)
        assert prod.lo <= x * y <= prod.hi

    def test_radius_nonnegative(self):
        iv = DyadicInterval(Fraction(1, 4), Fraction(1, 2))
        assert iv.radius >= 0
        with pytest.raises(ValueError):
            DyadicInterval(Fraction(1), Fraction(0))

    def test_inverse_straddling_rejected(self):
        iv = DyadicInterval(Fraction(-1), Fraction(1))
        with pytest.raises(ZeroDivisionError):
            iv.inverse(8)


def brute_force_pell(D: int):
    """Smallest unit > 1 of the maximal order: direct search over y."""
    if D % 4 == 1:
        # (x + y sqrt(D))/2 with x = y mod 2, x^2 - D y^2 = +-4;
        # smaller x first so the fundamental solution is found, not a power
        for y in range(1, 20000):
            for target in (-4, 4):
                x2 = D * y * y + target
                if x2 > 0:
                    x = math.isqrt(x2)
                    if x * x == x2 and (x - y) % 2 == 0:
                        return Fraction(x, 2), Fraction(y, 2)
    else:
        for y in range(1, 20000):
            for target in (-1, 1):
                x2 = D * y * y + target
                if x2 > 0:
                    x = math.isqrt(x2)
                    if x * x == x2:
                        return Fraction(x), Fraction(y)
    raise AssertionError(f"no unit found for D={D}")


def squarefree_up_to(n):
    out = []
    for d in range(2, n + 1):
        if all(d % (f * f) != 0 for f in range(2, math.isqrt(d) + 1)):
            out.append(d)
    return out


class TestFundamentalUnit:
    @pytest.mark.parametrize("D,expected", [
        (5, (Fraction(1, 2), Fraction(1, 2))),
        (2, (Fraction(1), Fraction(1))),
        (13, (Fraction(3, 2), Fraction(1, 2))),
    ])
    def test_known_values(self, D, expected):
        u = fundamental_unit_quadratic(D)
        assert u.coeffs == expected

    def test_not_squarefree(self):
        with pytest.raises(NotSquarefree):
            fundamental_unit_quadratic(12)

    def test_pell_oracle_small(self):
        for D in squarefree_up_to(60):
            u = fundamental_unit_quadratic(D)
            assert u.coeffs == brute_force_pell(D), f"D={D}"
            assert abs(norm(u)) == 1

    def test_totally_positive_variant(self):
        u5 = fundamental_unit_quadratic(5)
        tp = totally_positive_fundamental(u5)
        assert tp.coeffs == (Fraction(3, 2), Fraction(1, 2))
        u3 = fundamental_unit_quadratic(3)  # norm +1, already totally positive
        assert totally_positive_fundamental(u3) == u3


class TestSymmetrizedNorm:
    def test_zero_exponents(self, eps0):
        assert isinstance(symmetrized_norm(eps0, (0, 0)), Zero)

    def test_norm_of_unit_minus_one(self, eps0):
        r = symmetrized_norm(eps0, (0, 1))
        assert isinstance(r, CertifiedInteger) and r.value == -1

    def test_eps_cubed_conjugate(self, eps0):
        r = symmetrized_norm(eps0, (3, 1))
        assert r.value == -5

    def test_requires_unit(self, q5):
        with pytest.raises(ValueError):
            symmetrized_norm(q5.gen, (1, 0))

    def test_rational_unit(self, q5):
        minus_one = q5.element([-1])
        r = symmetrized_norm(minus_one, (1, 0))
        assert r.value == 4  # (-2)^2 over the two group elements
        assert isinstance(symmetrized_norm(minus_one, (1, 1)), Zero)

    def test_cubic_interval_path(self):
        f = make_field([-1, -3, 0, 1])
        eps = f.gen * f.gen  # totally positive unit
        r = symmetrized_norm(eps, (1, 0, 0))
        assert isinstance(r, CertifiedInteger)
        # norm(eps - 1) computed independently: charpoly shift
        expected = norm(eps - f.one)
        assert r.value == int(expected)

    def test_indeterminate_below_first_rung(self):
        f = make_field([-1, -3, 0, 1])
        eps = f.gen * f.gen
        with pytest.raises(Indeterminate):
            symmetrized_norm(eps, (1, 0, 0), precision_cap=32)

    def test_sd_symmetrization_multiple(self):
        # non-Galois cubic: no galois data, S_3 symmetrization
        f = make_field([-2, -4, 0, 1])
        assert f.galois is None
        th = f.gen
        # find a unit: x^3 - 4x - 2 has norm(th) = 2, so use th^3/2 ... skip
        # instead check that a rational unit still certifies
        r = symmetrized_norm(f.element([-1]), (1, 0, 0))
        assert r.value == (-2) ** 6  # |S_3| = 6 factors

    def test_difference_form_sign_equal(self, q5, eps0):
        # exponent data for k = (4, 2): m = (0, 1), k0 = 4
        e_on = (3, 2)
        e_off = (0, -1)
        for mask, pj in [(0, (0, 1)), (1, (3, 1)), (2, (0, 2)), (3, (3, 2))]:
            subset = [t for t in range(2) if (mask >> t) & 1]
            v1 = symmetrized_norm(eps0, pj)
            v2 = symmetrized_difference_norm(eps0, e_on, e_off, subset)
            assert abs(v1.value) == abs(v2.value), mask


class TestOrbitReduce:
    def test_idempotent(self, q5, eps0):
        xi = q5.element([3, 1])
        red = orbit_reduce(xi, eps0)
        assert orbit_reduce(red, eps0) == red

    def test_orbit_equivalence(self, q5, eps0):
        xi = q5.element([3, 1])
        red = orbit_reduce(xi, eps0)
        sq = eps0 * eps0
        assert orbit_reduce(sq * sq * xi, eps0) == red
        assert orbit_reduce(xi * sq.inverse(), eps0) == red

    def test_explicit_value(self, q5, eps0):
        xi = q5.element([7, 3])  # equals 2 * eps0^2
        red = orbit_reduce(xi, eps0)
        assert red == q5.element([2])
        quot = xi * red.inverse()
        assert quot == eps0 * eps0

    def test_rejects_non_totally_positive(self, q5, eps0):
        with pytest.raises(NotTotallyPositive):
            orbit_reduce(q5.gen, eps0)

    def test_rejects_higher_degree(self):
        f = make_field([-1, -3, 0, 1])
        with pytest.raises(UnsupportedDegree):
            orbit_reduce(f.one, f.one + f.one)


class TestSigns:
    def test_embed_sign(self, q5):
        assert embed_sign(q5.gen, 0) == -1
        assert embed_sign(q5.gen, 1) == 1
        assert embed_sign(q5.zero, 0) == 0

    def test_totally_positive(self, q5, eps0):
        assert is_totally_positive(eps0)
        assert not is_totally_positive(q5.gen)


class TestFloatCrossCheck:
    """Certified integers against a plain floating-point evaluation."""

    def _float_product(self, fld, eps, e):
        import itertools
        roots = []
        for i in range(fld.degree):
            iv = embed(fld.gen, i, 60)
            roots.append(float(iv.center))
        group = fld.galois or tuple(itertools.permutations(range(fld.degree)))
        coeffs = [float(c) for c in eps.coeffs]

        def emb_val(i):
            x = roots[i]
            return sum(c * x**k for k, c in enumerate(coeffs))

        total = 1.0
        for g in group:
            f = 1.0
            for t, exp in enumerate(e):
                f *= emb_val(g[t]) ** exp
            total *= f - 1.0
        return total

    def test_quadratic_agreement(self, q5, eps0):
        import random
        rng = random.Random(17)
        for _ in range(40):
            e = (rng.randint(-4, 4), rng.randint(-4, 4))
            got = symmetrized_norm(eps0, e)
            approx = self._float_product(q5, eps0, e)
            if isinstance(got, Zero):
                assert abs(approx) < 1e-6
            else:
                assert abs(got.value - approx) < 1e-6 * max(1, abs(approx))

    def test_cubic_agreement(self):
        import random
        f = make_field([-1, -3, 0, 1])
        eps = f.gen * f.gen
        rng = random.Random(23)
        for _ in range(25):
            e = tuple(rng.randint(-3, 3) for _ in range(3))
            got = symmetrized_norm(eps, e)
            approx = self._float_product(f, eps, e)
            if isinstance(got, Zero):
                assert abs(approx) < 1e-6
            else:
                assert abs(got.value - approx) < 1e-5 * max(1, abs(approx))

    def test_non_galois_cubic_full_symmetrization(self):
        # S_3-symmetrized product: an integer multiple of the true norm,
        # cross-checked against the float evaluation
        f = make_field([-2, -4, 0, 1])
        assert f.galois is None
        eps = f.element([-5, -3, 0])
        from hmfcert.nfield import norm as _norm
        assert abs(_norm(eps)) == 1
        got = symmetrized_norm(eps, (2, 1, 0))
        assert isinstance(got, CertifiedInteger)
        approx = self._float_product(f, eps, (2, 1, 0))
        assert abs(got.value - approx) < 1e-4 * max(1, abs(approx))


class TestEmbedCacheOrder:
    def test_low_precision_after_high_still_contains(self, q5):
        f = make_field([-7, 0, 1])  # fresh field, fresh cache
        a = f.element([Fraction(2, 3), Fraction(5, 7)])
        hi = embed(a, 1, 64)
        lo = embed(a, 1, 8)
        assert lo.lo <= hi.lo and hi.hi <= lo.hi
        assert lo.width <= Fraction(1, 2**8)
