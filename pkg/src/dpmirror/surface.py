"""Toric models of del Pezzo surfaces of degree >= 3 and their Picard algebra.

A model is a smooth complete fan in N = Z^2 (rays counterclockwise) together
with the number of non-toric blowups on each boundary component.  Divisor
classes are integer combinations of the total transforms D'_i and the
exceptional curves E_ij; the intersection pairing is the toric one on the D'
block, E_ij^2 = -1, and the two blocks are orthogonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .core import QQ, Vec, dual_of, vadd, vscale, wedge

PRESETS = ("P2", "BlpP2", "dP5", "dP3")

_PRESET_DATA = {
    "P2": (((1, 0), (0, 1), (-1, -1)), (0, 0, 0)),
    "BlpP2": (((1, 0), (0, 1), (-1, -1)), (1, 0, 0)),
    "dP5": (((1, 0), (0, 1), (-1, 0), (-1, -1), (0, -1)), (1, 1, 0, 0, 0)),
    "dP3": (((1, 0), (0, 1), (-1, -1)), (2, 2, 2)),
}


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ToricModel:
    """Fan rays (counterclockwise, primitive) plus blowup multiplicities."""

    name: str
    rays: tuple[Vec, ...]
    blowups: tuple[int, ...]
    selfints: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        n = len(self.rays)
        if n < 3 or len(self.blowups) != n:
            raise ModelError("need >= 3 rays and one blowup count per ray")
        s = []
        for i in range(n):
            ni, nj = self.rays[i], self.rays[(i + 1) % n]
            if wedge(ni, nj) != 1:
                raise ModelError(f"rays {i},{i+1} are not positively unimodular")
            prev, nxt, cur = self.rays[i - 1], self.rays[(i + 1) % n], self.rays[i]
            # fan relation n_{i-1} + n_{i+1} + s_i n_i = 0
            if cur[0]:
                si, rem = divmod(-(prev[0] + nxt[0]), cur[0])
            else:
                si, rem = divmod(-(prev[1] + nxt[1]), cur[1])
            if rem or vadd(vadd(prev, nxt), vscale(si, cur)) != (0, 0):
                raise ModelError(f"fan relation fails at ray {i}")
            s.append(si)
        object.__setattr__(self, "selfints", tuple(s))
        if self.degree() + self.c2() != 12:
            raise ModelError("Noether identity deg + c2 = 12 fails")

    @property
    def n(self) -> int:
        return len(self.rays)

    def c2(self) -> int:
        return self.n + sum(self.blowups)

    def degree(self) -> int:
        c1 = self.anticanonical()
        return intersect(c1, c1)

    def anticanonical(self) -> "DivisorClass":
        """c_1(Y) = sum of the proper transforms D_i."""
        out = DivisorClass.zero(self)
        for i in range(self.n):
            out = out + self.proper_transform(i)
        return out

    # -- class constructors --------------------------------------------------

    def dprime(self, i: int, coeff: int = 1) -> "DivisorClass":
        v = [0] * self.n
        v[i % self.n] = coeff
        return DivisorClass(self, tuple(v), _zero_exc(self))

    def exceptional(self, i: int, j: int, coeff: int = 1) -> "DivisorClass":
        i %= self.n
        if not (0 <= j < self.blowups[i]):
            raise ModelError(f"no exceptional divisor ({i},{j}) on this model")
        exc = [list(row) for row in _zero_exc(self)]
        exc[i][j] = coeff
        return DivisorClass(self, (0,) * self.n, tuple(tuple(r) for r in exc))

    def proper_transform(self, i: int) -> "DivisorClass":
        i %= self.n
        out = self.dprime(i)
        for j in range(self.blowups[i]):
            out = out - self.exceptional(i, j)
        return out

    def zero_class(self) -> "DivisorClass":
        return DivisorClass.zero(self)

    def named_class(self, name: str) -> "DivisorClass":
        """Resolve 'D1', 'Dprime1', 'E11', 'E' (single blowup), '0'."""
        name = name.strip()
        if name in ("0", "O"):
            return self.zero_class()
        if name == "E":
            pairs = [(i, j) for i in range(self.n) for j in range(self.blowups[i])]
            if len(pairs) != 1:
                raise ModelError("'E' is only unambiguous with a single blowup")
            return self.exceptional(*pairs[0])
        if name.startswith("Dprime"):
            return self.dprime(int(name[6:]) - 1)
        if name.startswith("D"):
            return self.proper_transform(int(name[1:]) - 1)
        if name.startswith("E"):
            ij = name[1:]
            return self.exceptional(int(ij[0]) - 1, int(ij[1]) - 1)
        raise ModelError(f"unknown divisor name {name!r}")

    def exceptional_curve_classes(self) -> list["DivisorClass"]:
        """All classes with X^2 = K.X = -1 (finite for these presets)."""
        return _minus_one_classes(self)

    def mori_generators(self) -> list["DivisorClass"]:
        """Generators of the effective cone used for ampleness tests."""
        classes = _minus_one_classes(self)
        if self.name == "P2":
            return [self.dprime(0)]
        if self.name == "BlpP2":
            return classes + [self.dprime(0) - self.exceptional(0, 0)]
        return classes


def _zero_exc(model: ToricModel) -> tuple[tuple[int, ...], ...]:
    return tuple((0,) * l for l in model.blowups)


def make_model(preset: str) -> ToricModel:
    if preset not in _PRESET_DATA:
        raise ModelError(f"unknown preset {preset!r}; choose from {PRESETS}")
    rays, blowups = _PRESET_DATA[preset]
    return ToricModel(preset, rays, blowups)


@dataclass(frozen=True)
class DivisorClass:
    """Integer class a_i D'_i + b_ij E_ij over a fixed model.

    The D' coordinates are redundant (linear equivalences of toric divisors),
    which the pairing respects; `same_class` tests equality up to them.
    """

    model: ToricModel
    toric_part: tuple[int, ...]
    exceptional_part: tuple[tuple[int, ...], ...]

    @classmethod
    def zero(cls, model: ToricModel) -> "DivisorClass":
        return cls(model, (0,) * model.n, _zero_exc(model))

    def _check(self, other: "DivisorClass") -> None:
        if self.model is not other.model and self.model != other.model:
            raise ModelError("divisor classes live on different models")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        toric = tuple(a + b for a, b in zip(self.toric_part, other.toric_part))
        exc = tuple(
            tuple(a + b for a, b in zip(r1, r2))
            for r1, r2 in zip(self.exceptional_part, other.exceptional_part)
        )
        return DivisorClass(self.model, toric, exc)

    def __neg__(self) -> "DivisorClass":
        return self.scale(-1)

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def scale(self, c: int) -> "DivisorClass":
        toric = tuple(c * a for a in self.toric_part)
        exc = tuple(tuple(c * b for b in row) for row in self.exceptional_part)
        return DivisorClass(self.model, toric, exc)

    def is_toric(self) -> bool:
        return all(all(b == 0 for b in row) for row in self.exceptional_part)

    def same_class(self, other: "DivisorClass") -> bool:
        d = self - other
        if any(any(row) for row in d.exceptional_part):
            return False
        return all(intersect(d, self.model.dprime(k)) == 0 for k in range(self.model.n))


def intersect(l1: DivisorClass, l2: DivisorClass):
    """Symmetric intersection pairing; exact integer/rational."""
    l1._check(l2)
    model = l1.model
    n = model.n
    total = 0
    for i in range(n):
        ai = l1.toric_part[i]
        if not ai:
            continue
        for j in range(n):
            bj = l2.toric_part[j]
            if not bj:
                continue
            total += ai * bj * _toric_pairing(model, i, j)
    for row1, row2 in zip(l1.exceptional_part, l2.exceptional_part):
        for b1, b2 in zip(row1, row2):
            total -= b1 * b2
    return total


def _toric_pairing(model: ToricModel, i: int, j: int) -> int:
    n = model.n
    if i == j:
        return model.selfints[i]
    if (i - j) % n == 1 or (j - i) % n == 1:
        return 1
    return 0


def _minus_one_classes(model: ToricModel) -> list[DivisorClass]:
    """Enumerate classes with X^2 = K.X = -1 for the four presets."""
    name = model.name
    out: list[DivisorClass] = []
    if name == "P2":
        return out
    if name == "BlpP2":
        return [model.exceptional(0, 0)]
    es = [model.exceptional(i, j) for i in range(model.n) for j in range(model.blowups[i])]
    if name == "dP3":
        h = model.dprime(0)
        out.extend(es)
        for e1, e2 in combinations(es, 2):
            out.append(h - e1 - e2)
        for skip in range(len(es)):
            cls = h.scale(2)
            for k, e in enumerate(es):
                if k != skip:
                    cls = cls - e
            out.append(cls)
        return out
    if name == "dP5":
        # pullback exceptional points of the toric model sit on rays 3 and 5
        e_toric = [model.dprime(2), model.dprime(4)]
        h = model.dprime(1) + model.dprime(2)
        es4 = e_toric + es
        out.extend(es4)
        for e1, e2 in combinations(es4, 2):
            out.append(h - e1 - e2)
        return out
    raise ModelError(f"no exceptional-class table for {name!r}")


@dataclass(frozen=True)
class KahlerClass:
    """Parameters lambda_i > 0 and per-ray exceptional parameters c_ij.

    Within each ray the c's must be strictly increasing: the label order is
    the wall-crossing order seen from outside, so prefix sums of c's are the
    minimal ones and the truncated-superpotential bookkeeping stays literal.
    """

    lambdas: tuple[Fraction, ...]
    cs: tuple[tuple[Fraction, ...], ...]

    def __init__(self, lambdas, cs):
        object.__setattr__(self, "lambdas", tuple(Fraction(x) for x in lambdas))
        object.__setattr__(self, "cs", tuple(tuple(Fraction(c) for c in row) for row in cs))
        for row in self.cs:
            if any(a >= b for a, b in zip(row, row[1:])):
                raise ModelError(
                    "c parameters must be strictly increasing within each ray "
                    "(relabel the exceptional divisors)"
                )

    def divisor_class(self, model: ToricModel):
        """omega as a rational combination: sum lambda_i D_i + sum c_ij E_ij."""
        toric = [Fraction(0)] * model.n
        exc = [[Fraction(0)] * l for l in model.blowups]
        for i in range(model.n):
            toric[i] += self.lambdas[i]
            for j in range(model.blowups[i]):
                exc[i][j] -= self.lambdas[i]  # proper transform part
                exc[i][j] += self.cs[i][j]
        return _RationalClass(model, tuple(toric), tuple(tuple(r) for r in exc))


@dataclass(frozen=True)
class _RationalClass:
    """Rational-coefficient divisor class; same pairing as DivisorClass."""

    model: ToricModel
    toric_part: tuple
    exceptional_part: tuple

    def _check(self, other) -> None:
        if self.model != other.model:
            raise ModelError("divisor classes live on different models")

    def pair(self, other) -> Fraction:
        total = Fraction(0)
        for i, ai in enumerate(self.toric_part):
            if not ai:
                continue
            for j, bj in enumerate(other.toric_part):
                if bj:
                    total += ai * bj * _toric_pairing(self.model, i, j)
        for row1, row2 in zip(self.exceptional_part, other.exceptional_part):
            for b1, b2 in zip(row1, row2):
                total -= Fraction(b1) * b2
        return total


def omega_pair(model: ToricModel, omega: KahlerClass, c: DivisorClass | _RationalClass) -> Fraction:
    return omega.divisor_class(model).pair(c)


def fiber_exponent(model: ToricModel, omega: KahlerClass, curve_class: DivisorClass) -> Fraction:
    """t-exponent contributed by a curve class on the omega fiber: omega . C."""
    return omega_pair(model, omega, curve_class)


def chern(model: ToricModel) -> tuple[DivisorClass, int]:
    """(c_1(Y) as the anticanonical cycle class, c_2(Y) as an integer)."""
    return model.anticanonical(), model.c2()


@dataclass
class OmegaReport:
    conditions: dict[str, bool]
    cone_check: bool

    @property
    def ok(self) -> bool:
        return self.cone_check and all(self.conditions.values())


def validate_omega(model: ToricModel, omega: KahlerClass) -> OmegaReport:
    """Check the five admissibility conditions plus the exceptional-cone test."""
    n = model.n
    lam, cs = omega.lambdas, omega.cs
    conds: dict[str, bool] = {}
    if len(lam) != n or any(len(cs[i]) != model.blowups[i] for i in range(n)) or len(cs) != n:
        raise ModelError("omega shape does not match the model")

    conds["lambda_positive"] = all(l > 0 for l in lam)

    # omega_b = sum lambda_i D_i (proper transforms)
    wb = _RationalClass(
        model,
        tuple(lam),
        tuple(tuple(Fraction(-lam[i]) for _ in range(model.blowups[i])) for i in range(n)),
    )
    ample = wb.pair(wb) > 0
    for gen in model.mori_generators():
        ample = ample and wb.pair(_as_rational(gen)) > 0
    conds["omega_b_ample"] = ample

    conds["c_distinct"] = all(len(set(row)) == len(row) for row in cs)
    conds["c_in_range"] = all(0 < c < lam[i] for i in range(n) for c in cs[i])

    cond5 = True
    for i in range(n):
        nxt = (i + 1) % n
        if model.blowups[nxt] == 0:
            continue  # vacuous without blowups on the next component
        lhs = omega_pair(model, omega, model.proper_transform(i))
        cond5 = cond5 and lhs > lam[nxt] - min(cs[nxt])
    conds["boundary_margin"] = cond5

    cone = True
    w = omega.divisor_class(model)
    for cls in model.exceptional_curve_classes():
        cone = cone and w.pair(_as_rational(cls)) >= 0
    return OmegaReport(conds, cone)


def _as_rational(cls: DivisorClass) -> _RationalClass:
    return _RationalClass(
        cls.model,
        tuple(Fraction(a) for a in cls.toric_part),
        tuple(tuple(Fraction(b) for b in row) for row in cls.exceptional_part),
    )


def default_omega(model: ToricModel) -> KahlerClass:
    """A validated parameter choice per preset, used by the CLI and tests."""
    name = model.name
    if name == "P2":
        om = KahlerClass((1, 1, 1), ((), (), ()))
    elif name == "BlpP2":
        om = KahlerClass((1, 1, 1), ((Fraction(1, 3),), (), ()))
    elif name == "dP5":
        om = KahlerClass((3, 2, 1, 2, 3), ((Fraction(3, 2),), (Fraction(1, 2),), (), (), ()))
    elif name == "dP3":
        c = (Fraction(3, 4), Fraction(7, 8))
        om = KahlerClass((1, 1, 1), (c, c, c))
    else:
        raise ModelError(f"no default omega for {name!r}")
    rep = validate_omega(model, om)
    assert rep.ok, rep
    return om


@dataclass(frozen=True)
class PLFunction:
    """Fan-piecewise-linear data: one rational value a_i per ray."""

    model: ToricModel
    values: tuple[Fraction, ...]

    def kinks(self) -> tuple[Fraction, ...]:
        """kappa_i = a_{i+1} + s_i a_i + a_{i-1} (gradient jump across ray i)."""
        n = self.model.n
        a, s = self.values, self.model.selfints
        return tuple(a[(i + 1) % n] + s[i] * a[i] + a[i - 1] for i in range(n))

    def kink_closure(self) -> tuple[Fraction, Fraction]:
        total = (Fraction(0), Fraction(0))
        for i, k in enumerate(self.kinks()):
            d = dual_of(self.model.rays[i])
            total = (total[0] + k * d[0], total[1] + k * d[1])
        return total


def pl_kinks(model: ToricModel, l_toric: DivisorClass) -> tuple[Fraction, ...]:
    """Kinks of phi_L for a purely toric class, cross-checked against D'_i . L."""
    if not l_toric.is_toric():
        raise ModelError("pl_kinks requires a purely toric class")
    phi = PLFunction(model, tuple(Fraction(a) for a in l_toric.toric_part))
    ks = phi.kinks()
    for i, k in enumerate(ks):
        assert k == intersect(model.dprime(i), l_toric), "kink / pairing mismatch"
    assert phi.kink_closure() == (0, 0), "kink closure fails"
    return ks
