import random
from fractions import Fraction

import pytest

from dpmirror.core import (
    LaurentPoly,
    TExponentSeries as TES,
    complement_basis,
    dual_of,
    laurent_pow,
    primitive,
    unit_part_is_one,
    wedge,
)


def test_wedge_values():
    assert wedge((1, 0), (0, 1)) == 1
    assert wedge((1, 0), (1, 0)) == 0
    assert wedge((-1, -1), (1, 0)) == 1


def test_wedge_bilinear_antisymmetric():
    rng = random.Random(7)
    for _ in range(200):
        u, v, w = [(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(3)]
        a, b = rng.randint(-4, 4), rng.randint(-4, 4)
        assert wedge(u, v) == -wedge(v, u)
        lhs = wedge((a * u[0] + b * v[0], a * u[1] + b * v[1]), w)
        assert lhs == a * wedge(u, w) + b * wedge(v, w)


def test_primitive():
    assert primitive((4, 6)) == (2, 3)
    assert primitive((-3, 0)) == (-1, 0)
    v = primitive((10, -15))
    assert primitive(v) == v
    with pytest.raises(ValueError):
        primitive((0, 0))


def test_dual_of():
    assert dual_of((1, 0)) == (0, 1)
    assert dual_of((0, 1)) == (-1, 0)
    assert dual_of((-1, -1)) == (1, -1)
    rng = random.Random(3)
    for _ in range(50):
        n = (rng.randint(-6, 6), rng.randint(-6, 6))
        if n == (0, 0):
            continue
        m = dual_of(n)
        for _ in range(5):
            v = (rng.randint(-6, 6), rng.randint(-6, 6))
            assert m[0] * v[0] + m[1] * v[1] == wedge(n, v)


def test_complement_basis():
    rng = random.Random(11)
    for _ in range(100):
        v = (rng.randint(-12, 12), rng.randint(-12, 12))
        if v == (0, 0):
            continue
        n = primitive(v)
        g = complement_basis(n)
        assert wedge(n, g) == 1


def test_series_basics():
    s = TES({Fraction(1, 2): 1, Fraction(3, 2): -2})
    assert s.valuation() == Fraction(1, 2)
    assert (s - s).valuation() is None
    assert s.coefficient(Fraction(3, 2)) == -2
    z = TES({0: 1}) + TES({0: -1})
    assert not z


def test_series_valuation_additivity():
    rng = random.Random(19)
    for _ in range(200):
        def rand_series():
            n = rng.randint(1, 4)
            return TES({Fraction(rng.randint(0, 20), 8): rng.choice([-3, -1, 1, 2, 5]) for _ in range(n)})
        a, b = rand_series(), rand_series()
        if not a or not b:
            continue
        assert (a * b).valuation() == a.valuation() + b.valuation()


def x_var():
    return LaurentPoly({(1, 0): TES.one()})


def test_laurent_pow_binomial():
    f = LaurentPoly.one() + LaurentPoly({(1, 0): TES.t_power(Fraction(1, 2))})
    sq = laurent_pow(f, 2, 2)
    assert sq.coefficient((0, 0)) == TES.one()
    assert sq.coefficient((1, 0)) == TES.t_power(Fraction(1, 2), 2)
    assert sq.coefficient((2, 0)) == TES.t_power(1)


def test_laurent_pow_inverse_truncated():
    f = LaurentPoly.one() + LaurentPoly({(1, 0): TES.t_power(Fraction(1, 2))})
    inv = laurent_pow(f, -1, Fraction(3, 2))
    # geometric series up to and including valuation Theta
    assert inv.coefficient((0, 0)) == TES.one()
    assert inv.coefficient((1, 0)) == TES.t_power(Fraction(1, 2), -1)
    assert inv.coefficient((2, 0)) == TES.t_power(1)
    assert inv.coefficient((3, 0)) == TES.t_power(Fraction(3, 2), -1)
    prod = f.with_trunc(Fraction(3, 2)) * inv
    assert prod == LaurentPoly.one(Fraction(3, 2))


def test_laurent_pow_product_of_factors():
    c1, c2 = Fraction(1, 3), Fraction(2, 3)
    f1 = LaurentPoly.one() + LaurentPoly({(1, 0): TES.t_power(c1)})
    f2 = LaurentPoly.one() + LaurentPoly({(1, 0): TES.t_power(c2)})
    prod = laurent_pow(f1 * f2, 1, c1 + c2)
    assert prod.coefficient((1, 0)) == TES.t_power(c1) + TES.t_power(c2)
    assert prod.coefficient((2, 0)) == TES.t_power(c1 + c2)


def test_laurent_pow_unit_guard():
    bad = LaurentPoly({(0, 0): TES.t_power(0, 2)})
    with pytest.raises(ValueError):
        laurent_pow(bad, 2, 1)
    assert not unit_part_is_one(bad)


def test_pow_inverse_and_multiplicativity_random():
    rng = random.Random(23)
    for _ in range(40):
        theta = Fraction(rng.randint(2, 4))

        def rand_unit():
            f = LaurentPoly.one(theta)
            for _ in range(rng.randint(1, 3)):
                p = (rng.randint(-2, 2), rng.randint(-2, 2))
                e = Fraction(rng.randint(1, 8), 4)
                c = rng.choice([-2, -1, 1, 3])
                f = f + LaurentPoly({p: TES.t_power(e, c)}, theta)
            return f

        f, g = rand_unit(), rand_unit()
        e = rng.choice([-2, -1, 1, 2, 3])
        one = laurent_pow(f, 1, theta) * laurent_pow(f, -1, theta)
        assert one == LaurentPoly.one(theta)
        lhs = laurent_pow(f * g, e, theta)
        rhs = laurent_pow(f, e, theta) * laurent_pow(g, e, theta)
        assert lhs == rhs
