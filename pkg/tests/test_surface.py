import random
from fractions import Fraction

import pytest

from dpmirror.core import dual_of
from dpmirror.surface import (
    KahlerClass,
    ModelError,
    PRESETS,
    chern,
    default_omega,
    fiber_exponent,
    intersect,
    make_model,
    omega_pair,
    pl_kinks,
    validate_omega,
)


@pytest.fixture(params=PRESETS)
def model(request):
    return make_model(request.param)


def test_unknown_preset():
    with pytest.raises(ModelError):
        make_model("dP1")


def test_preset_shapes():
    p2 = make_model("P2")
    assert p2.rays == ((1, 0), (0, 1), (-1, -1))
    assert p2.blowups == (0, 0, 0)
    assert make_model("BlpP2").blowups == (1, 0, 0)
    assert make_model("dP3").blowups == (2, 2, 2)
    assert make_model("dP5").n == 5


def test_noether_and_degree(model):
    c1, c2 = chern(model)
    assert intersect(c1, c1) + c2 == 12
    expected = {"P2": (9, 3), "BlpP2": (8, 4), "dP5": (5, 7), "dP3": (3, 9)}
    assert (intersect(c1, c1), c2) == expected[model.name]


def test_pairing_examples():
    blp = make_model("BlpP2")
    e = blp.exceptional(0, 0)
    assert intersect(e, e) == -1
    d1 = blp.proper_transform(0)
    assert intersect(d1, d1) == 0
    p2 = make_model("P2")
    assert intersect(p2.dprime(0), p2.dprime(0)) == 1


def test_pairing_symmetric_random(model):
    rng = random.Random(5)
    def rand_class():
        cls = model.zero_class()
        for i in range(model.n):
            cls = cls + model.dprime(i, rng.randint(-2, 2))
            for j in range(model.blowups[i]):
                cls = cls + model.exceptional(i, j, rng.randint(-2, 2))
        return cls
    for _ in range(30):
        a, b = rand_class(), rand_class()
        assert intersect(a, b) == intersect(b, a)


def test_boundary_adjunction(model):
    # each boundary curve is rational: c1 . D_i = 2 + D_i^2
    c1, _ = chern(model)
    for i in range(model.n):
        di = model.proper_transform(i)
        assert intersect(c1, di) == 2 + intersect(di, di)


def test_exceptional_class_tables(model):
    c1, _ = chern(model)
    classes = model.exceptional_curve_classes()
    expected = {"P2": 0, "BlpP2": 1, "dP5": 10, "dP3": 27}[model.name]
    assert len(classes) == expected
    for cls in classes:
        assert intersect(cls, cls) == -1
        assert intersect(c1, cls) == 1  # K.X = -1


def test_validate_omega_examples():
    p2 = make_model("P2")
    assert validate_omega(p2, KahlerClass((1, 1, 1), ((), (), ()))).ok
    blp = make_model("BlpP2")
    boundary = KahlerClass((1, 1, 1), ((1,), (), ()))
    rep = validate_omega(blp, boundary)
    assert not rep.conditions["c_in_range"] and not rep.ok
    good = KahlerClass((1, 1, 1), ((Fraction(1, 3),), (), ()))
    assert validate_omega(blp, good).ok


def test_default_omegas_pass(model):
    assert validate_omega(model, default_omega(model)).ok


def test_fiber_exponent_examples():
    blp = make_model("BlpP2")
    om = default_omega(blp)
    assert fiber_exponent(blp, om, blp.zero_class()) == 0
    e = blp.exceptional(0, 0)
    assert fiber_exponent(blp, om, e) == om.lambdas[0] - om.cs[0][0]
    h = blp.dprime(1)  # pullback of a line missing the blown-up point
    assert fiber_exponent(blp, om, h) == sum(om.lambdas)


def test_omega_c1_blp_example():
    # gamma log t coefficient: omega . c1 = 2*l1 + 3*l2 + 3*l3 + c
    blp = make_model("BlpP2")
    lam = (Fraction(2), Fraction(3), Fraction(5))
    c = Fraction(1, 2)
    om = KahlerClass(lam, ((c,), (), ()))
    c1, _ = chern(blp)
    assert omega_pair(blp, om, c1) == 2 * lam[0] + 3 * lam[1] + 3 * lam[2] + c


def test_pl_kinks_examples(model):
    zero = model.zero_class()
    assert pl_kinks(model, zero) == (0,) * model.n
    if model.name == "P2":
        assert pl_kinks(model, model.dprime(0)) == (1, 1, 1)


def test_pl_kinks_match_pairing_random(model):
    rng = random.Random(13)
    for _ in range(100):
        l = model.zero_class()
        for i in range(model.n):
            l = l + model.dprime(i, rng.randint(-3, 3))
        ks = pl_kinks(model, l)
        total = (0, 0)
        for i, k in enumerate(ks):
            assert k == intersect(model.dprime(i), l)
            d = dual_of(model.rays[i])
            total = (total[0] + k * d[0], total[1] + k * d[1])
        assert total == (0, 0)


def test_pl_kinks_rejects_nontoric():
    blp = make_model("BlpP2")
    with pytest.raises(ModelError):
        pl_kinks(blp, blp.exceptional(0, 0))


def test_named_classes():
    blp = make_model("BlpP2")
    assert blp.named_class("E").same_class(blp.exceptional(0, 0))
    assert blp.named_class("D1").same_class(blp.dprime(0) - blp.exceptional(0, 0))
    assert blp.named_class("Dprime2").same_class(blp.dprime(1))
    # in Pic(BlpP2): D'1 = D'2 = D'3 (pullbacks of lines)
    assert blp.dprime(0).same_class(blp.dprime(1))
