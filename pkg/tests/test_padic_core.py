import pytest
from hypothesis import given, settings, strategies as st

from padicstats.padic_core import (
    MixedModulus,
    NonUnitDivision,
    NonUnitLeadingCoefficient,
    PadicPoly,
    PadicScalar,
    SATURATED,
    SaturatedValue,
    berkowitz_charpoly,
    det_mod,
    discriminant,
    poly_eval,
    poly_from_roots,
    resultant,
    valuation,
)
from padicstats.matrix_lab import Rng


def test_valuation_examples():
    assert valuation(PadicScalar(3, 4, 18)) == 2
    assert valuation(PadicScalar(2, 5, 0)) is SATURATED
    assert valuation(PadicScalar(5, 3, 7)) == 0


def test_scalar_norm_and_unit_part():
    a = PadicScalar(3, 4, 18)
    assert a.norm() == pytest.approx(1 / 9)
    assert a.unit_part().value == 2
    with pytest.raises(SaturatedValue):
        PadicScalar(3, 4, 0).norm()


def test_scalar_arithmetic_and_errors():
    a = PadicScalar(5, 3, 7)
    b = PadicScalar(5, 3, 100)
    assert (a + b).value == 107
    assert (a * b).value == (700) % 125
    assert (-a).value == 125 - 7
    assert (a / a).value == 1
    with pytest.raises(NonUnitDivision):
        PadicScalar(5, 3, 5).inverse()
    with pytest.raises(MixedModulus):
        a + PadicScalar(5, 4, 7)
    with pytest.raises(MixedModulus):
        a + PadicScalar(7, 3, 7)


@given(
    p=st.sampled_from([2, 3, 5]),
    x=st.integers(min_value=0, max_value=10 ** 6),
    y=st.integers(min_value=0, max_value=10 ** 6),
)
@settings(max_examples=200, deadline=None)
def test_valuation_additivity(p, x, y):
    N = 8
    a = PadicScalar(p, N, x)
    b = PadicScalar(p, N, y)
    if a.is_saturated or b.is_saturated:
        return
    if a.valuation + b.valuation >= N:
        return
    assert (a * b).valuation == a.valuation + b.valuation


def test_poly_eval_examples():
    f = PadicPoly.from_ints(5, 2, (-1, 0, 1))
    assert poly_eval(f, PadicScalar(5, 2, 3)).value == 8
    g = PadicPoly.from_ints(2, 4, (0, 1))
    assert poly_eval(g, PadicScalar(2, 4, 0)).valuation is SATURATED
    h = PadicPoly.from_ints(3, 3, (-1, 1))
    assert poly_eval(h, PadicScalar(3, 3, 1)).value == 0
    with pytest.raises(MixedModulus):
        poly_eval(f, PadicScalar(5, 3, 1))


def test_poly_shape():
    f = PadicPoly.from_ints(3, 2, (1, 2, 9))  # leading 9 = 0 mod 9
    assert f.degree == 1
    assert not f.monic
    assert PadicPoly.from_ints(3, 2, (1, 2, 1)).monic
    z = PadicPoly.from_ints(3, 2, (0, 0))
    assert z.is_zero and z.degree == -1


def test_resultant_examples():
    p, N = 3, 4
    f = PadicPoly.from_ints(p, N, (0, 1))          # x
    g = PadicPoly.from_ints(p, N, (-1, 1))         # x - 1
    r = resultant(f, g)
    assert r.value == (-1) % 3 ** 4 and r.valuation == 0
    assert resultant(f, f).valuation is SATURATED
    h = PadicPoly.from_ints(p, N, (-3, 0, 1))      # x^2 - 3
    r = resultant(h, f)
    assert r.value == (-3) % 3 ** 4 and r.valuation == 1


def test_resultant_degenerate_degrees():
    p, N = 5, 3
    const = PadicPoly.from_ints(p, N, (2,))
    g = PadicPoly.from_ints(p, N, (1, 4, 1))
    assert resultant(const, g).value == pow(2, 2, 125)
    zero = PadicPoly.from_ints(p, N, ())
    assert resultant(zero, g).is_saturated


def test_discriminant_examples():
    # x^2 - c has discriminant 4c
    for p, c in ((7, 3), (5, 2), (3, 2)):
        f = PadicPoly.from_ints(p, 4, (-c, 0, 1))
        assert discriminant(f).value == (4 * c) % p ** 4
    # x^2 - x
    f = PadicPoly.from_ints(5, 3, (0, -1, 1))
    assert discriminant(f).value == 1
    # x(x-1)(x+1) = x^3 - x: expanding prod (r_i - r_j)^2 over roots
    # {0, 1, -1} gives ((0-1)(0+1)(1+1))^2 = 4
    f = PadicPoly.from_ints(5, 3, (0, -1, 0, 1))
    d = discriminant(f)
    assert d.value == 4 and d.valuation == 0
    with pytest.raises(NonUnitLeadingCoefficient):
        discriminant(PadicPoly.from_ints(5, 3, (1, 5)))


def _random_monic(gen, p, N, deg):
    coeffs = [int(x) for x in gen.integers(0, p ** N, size=deg)] + [1]
    return PadicPoly.from_ints(p, N, coeffs)


def test_resultant_multiplicativity_200_cases():
    gen = Rng(2024).generator()
    cases = 0
    while cases < 200:
        p = int(gen.choice([2, 3, 5]))
        N = int(gen.integers(2, 7))
        df, dg, dh = (int(x) for x in gen.integers(1, 5, size=3))
        f = _random_monic(gen, p, N, df)
        g = _random_monic(gen, p, N, dg)
        h = _random_monic(gen, p, N, dh)
        lhs = resultant(f * g, h)
        rhs = resultant(f, h) * resultant(g, h)
        assert lhs.value == rhs.value
        cases += 1


def test_resultant_shift_rule():
    # reducing f mod a monic h preserves the resultant up to the sign
    # (-1)^(deg change * deg h); the norm is always preserved, which is
    # what downstream valuation arguments rely on
    gen = Rng(77).generator()
    for _ in range(100):
        p = int(gen.choice([2, 3, 5]))
        N = int(gen.integers(2, 6))
        f = _random_monic(gen, p, N, int(gen.integers(1, 5)))
        g = _random_monic(gen, p, N, int(gen.integers(1, 3)))
        h = _random_monic(gen, p, N, int(gen.integers(1, 4)))
        shifted = f - g * h
        r1 = resultant(f, h)
        r2 = resultant(shifted, h)
        sign = (-1) ** ((shifted.degree - f.degree) * h.degree)
        assert r1.value == (sign * r2.value) % p ** N
        if r1.valuation is not SATURATED:
            assert r1.valuation == r2.valuation


def test_resultant_shift_rule_exact_when_degree_preserved():
    gen = Rng(78).generator()
    for _ in range(60):
        p = int(gen.choice([2, 3, 5]))
        N = int(gen.integers(2, 6))
        h = _random_monic(gen, p, N, int(gen.integers(1, 4)))
        g = _random_monic(gen, p, N, int(gen.integers(1, 3)))
        # choose f of strictly larger degree than g*h so subtraction
        # keeps the degree and the identity is exact
        f = _random_monic(gen, p, N, g.degree + h.degree + 1)
        assert resultant(f, h).value == resultant(f - g * h, h).value


def test_resultant_residue_power_rule():
    # monic f whose residue is a power of an irreducible F of degree d:
    # val Res(f, g) is a multiple of d when finite
    gen = Rng(31).generator()
    irreducibles = {
        2: ((1, 1, 1), 2),       # x^2+x+1 over F_2
        3: ((1, 0, 1), 2),       # x^2+1 over F_3
        5: ((2, 0, 1), 2),       # x^2+2 over F_5
    }
    for _ in range(100):
        p = int(gen.choice([2, 3, 5]))
        N = 6
        fcoeffs, d = irreducibles[p]
        base = PadicPoly.from_ints(p, N, fcoeffs)
        k = int(gen.integers(1, 3))
        f = base
        for _ in range(k - 1):
            f = f * base
        # perturb by p * (random of lower degree), keeping the residue
        pert = [int(x) * p for x in gen.integers(0, p ** (N - 1), size=f.degree)]
        f = f + PadicPoly.from_ints(p, N, pert)
        g = _random_monic(gen, p, N, int(gen.integers(1, 4)))
        if not g.residue():
            continue
        r = resultant(f, g)
        if r.valuation is SATURATED:
            continue
        assert r.valuation % d == 0


def test_divmod_monic():
    gen = Rng(5).generator()
    for _ in range(50):
        p = int(gen.choice([2, 3, 5]))
        N = int(gen.integers(2, 6))
        f = _random_monic(gen, p, N, int(gen.integers(1, 6)))
        h = _random_monic(gen, p, N, int(gen.integers(1, 4)))
        q, r = f.divmod_monic(h)
        assert (q * h + r).coeffs == f.coeffs
        assert r.degree < h.degree


def test_poly_from_roots_and_eval():
    f = poly_from_roots(7, 3, [1, 2, 4])
    for r in (1, 2, 4):
        assert f.evaluate_int(r) == 0
    assert f.monic and f.degree == 3


def test_det_mod_cofactor_oracle():
    def cofactor(rows, m):
        n = len(rows)
        if n == 1:
            return rows[0][0] % m
        tot = 0
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for r in rows[1:]]
            s = 1 if j % 2 == 0 else -1
            tot += s * rows[0][j] * cofactor(minor, m)
        return tot % m

    gen = Rng(11).generator()
    for _ in range(50):
        n = int(gen.integers(1, 5))
        m = int(gen.choice([8, 27, 125, 3 ** 5]))
        rows = [[int(x) for x in gen.integers(0, m, size=n)] for _ in range(n)]
        assert det_mod(rows, m) == cofactor(rows, m)


def test_berkowitz_charpoly_known():
    # det(xI - [[a, b], [c, d]]) = x^2 - (a+d) x + (ad - bc)
    m = 97
    coeffs = berkowitz_charpoly(
        [[2, 3], [5, 7]],
        add=lambda x, y: (x + y) % m,
        mul=lambda x, y: (x * y) % m,
        neg=lambda x: -x % m,
        zero=0,
        one=1,
    )
    assert coeffs == [1, (-9) % m, (14 - 15) % m]
