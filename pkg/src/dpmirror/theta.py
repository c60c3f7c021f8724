"""Broken lines, theta-function expansions at the special chamber, and the
superpotential.

Tracing runs backward from the endpoint S: a broken line arriving with
exponent p either came straight from infinity (valid when p equals the
requested initial exponent) or bent at a wall crossed by the ray S + s*p,
s > 0.  At a bend from exponent p' to p = p' + k*mu the factor is the
z^{k*mu} coefficient of f^{<m, p'>}, which only depends on <m, p> because m
annihilates mu.  The accumulated t-valuation bounds the recursion depth, so
enumeration is finite at a fixed truncation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    LaurentPoly,
    TExponentSeries as TES,
    Vec,
    dot,
    primitive,
    vneg,
    vsub,
    wedge,
)
from .scatter import (
    ScatteringDiagram,
    Wall,
    _ray_parameter,
    complete,
    default_theta_order,
    initial_walls,
)
from .surface import KahlerClass, ToricModel

Point = tuple[Fraction, Fraction]


class GenericityError(ValueError):
    """The basepoint or a bend hits a wall intersection; move the basepoint."""


@dataclass(frozen=True)
class Segment:
    start: Point | None          # None on the unbounded initial domain
    end: Point
    exponent: Vec                # attached monomial exponent; velocity is its negative
    coeff: TES                   # attached coefficient (iota_e-fiber normalization)
    bend_wall: Wall | None = None  # wall at `start` where the previous bend happened


@dataclass(frozen=True)
class BrokenLine:
    initial_exponent: Vec
    endpoint: Point
    segments: tuple[Segment, ...]

    def final(self) -> tuple[Vec, TES]:
        last = self.segments[-1]
        return last.exponent, last.coeff

    def bend_points(self) -> list[tuple[Point, Wall]]:
        return [(s.start, s.bend_wall) for s in self.segments[1:]]

    def n_bends(self) -> int:
        return len(self.segments) - 1


def point_on_any_wall(diagram: ScatteringDiagram, x: Point) -> bool:
    return any(w.contains(x) for w in diagram.walls)


def in_special_chamber(diagram: ScatteringDiagram, x: Point) -> bool:
    """True when the straight segment from the origin to x crosses no wall
    (sufficient for membership in the chamber of the origin)."""
    if point_on_any_wall(diagram, x):
        return False
    for w in diagram.walls:
        den = wedge(x, w.direction)
        if den == 0:
            continue  # walls never pass through the origin here
        u = Fraction(wedge(w.base, w.direction), den)
        if 0 <= u <= 1:
            y = (u * x[0], u * x[1])
            s = _ray_parameter(vsub(y, w.base), w.direction)
            if w.kind == "line" or s >= 0:
                return False
    return True


def _backward_hit(x: Point, p: Vec, wall: Wall) -> Point | None:
    """Intersection of the ray {x + s*p : s > 0} with the wall support."""
    det = wedge(p, wall.direction)
    if det == 0:
        return None
    b = vsub(wall.base, x)
    s = Fraction(wedge(b, wall.direction), det)
    if s <= 0:
        return None
    y = (x[0] + s * p[0], x[1] + s * p[1])
    u = _ray_parameter(vsub(y, wall.base), wall.direction)
    if wall.kind == "ray" and u < 0:
        return None
    if wall.kind == "ray" and u == 0:
        raise GenericityError(f"trace hits the ray base {y}")
    return y


def _reachability_costs(diagram: ScatteringDiagram, q: Vec, budget: Fraction) -> dict[Vec, Fraction]:
    """Min total valuation needed to reach each exponent from q by adding
    wall-function monomials (lower bound for the bend cost of any prefix)."""
    gens: dict[Vec, Fraction] = {}
    for w in diagram.walls:
        for p, s in w.fn.terms.items():
            if p == (0, 0):
                continue
            v = s.valuation()
            if v is None or v > budget:
                continue
            if p not in gens or gens[p] > v:
                gens[p] = v
    best: dict[Vec, Fraction] = {q: Fraction(0)}
    frontier = [q]
    while frontier:
        nxt = []
        for base in frontier:
            c0 = best[base]
            for p, v in gens.items():
                tgt = (base[0] + p[0], base[1] + p[1])
                c = c0 + v
                if c > budget:
                    continue
                if tgt not in best or best[tgt] > c:
                    best[tgt] = c
                    nxt.append(tgt)
        frontier = nxt
    return best


def broken_lines(
    diagram: ScatteringDiagram,
    q: Vec,
    basepoint: Point,
    budget: Fraction | None = None,
) -> list[BrokenLine]:
    """All broken lines for initial exponent q ending at `basepoint` whose
    final coefficient has valuation at most `budget` (default: the diagram's
    truncation order)."""
    if q == (0, 0):
        raise ValueError("broken lines need a nonzero initial exponent")
    budget = diagram.theta_order if budget is None else Fraction(budget)
    S = (Fraction(basepoint[0]), Fraction(basepoint[1]))
    if point_on_any_wall(diagram, S):
        raise GenericityError(f"basepoint {S} lies on a wall")
    theta = diagram.theta_order
    active = [w for w in diagram.walls if w.min_val() is not None and w.min_val() <= budget]
    active.sort(key=lambda w: w.min_val())
    minvals = [w.min_val() for w in active]
    costs = _reachability_costs(diagram, q, budget)
    singular = diagram.singular_points()
    ctx = _TraceContext(diagram, active, minvals, q, budget, theta, costs, singular)
    out: list[BrokenLine] = []
    for p_final in sorted(e for e in costs if e != (0, 0)):
        for coeff, chain in _trace(ctx, S, p_final, Fraction(0)):
            coeff = coeff.truncate(budget)
            if not coeff:
                continue
            out.append(BrokenLine(q, S, tuple(chain)))
    out.sort(key=lambda bl: (bl.n_bends(), bl.final()[0]))
    return out


@dataclass
class _TraceContext:
    diagram: ScatteringDiagram
    active: list[Wall]        # sorted by min_val ascending
    minvals: list[Fraction]
    q: Vec
    budget: Fraction
    theta: Fraction
    costs: dict               # exponent -> minimal bend valuation from q
    singular: set             # wall intersection points and ray bases


def _trace(ctx: _TraceContext, x: Point, p: Vec, spent: Fraction):
    """Prefixes of broken lines arriving at x with exponent p; yields
    (cumulative coefficient, segment chain).  The reachability costs prune
    branches whose exponent cannot return to q within the budget."""
    floor = ctx.costs.get(p)
    if floor is None or spent + floor > ctx.budget:
        return []
    results = []
    if p == ctx.q:
        results.append((TES.one(), [Segment(None, x, ctx.q, TES.one())]))
    room = ctx.budget - spent
    for wall, wmin in zip(ctx.active, ctx.minvals):
        if wmin > room:
            break  # walls are sorted by min_val
        y = _backward_hit(x, p, wall)
        if y is None:
            continue
        m0 = (-wall.direction[1], wall.direction[0])
        e = dot(m0, p)
        if e == 0:
            continue
        e = abs(e)
        pw = wall.power(e, ctx.theta)
        hit_checked = False
        for s_exp, s_series in sorted(pw.terms.items()):
            if s_exp == (0, 0):
                continue
            v = s_series.valuation()
            if v > room:
                continue
            p_prev = vsub(p, s_exp)
            if p_prev == (0, 0):
                continue
            prev_floor = ctx.costs.get(p_prev)
            if prev_floor is None or v + prev_floor > room:
                continue
            if not hit_checked:
                if y in ctx.singular:
                    raise GenericityError(f"bend point {y} lies on several walls")
                hit_checked = True
            for coeff, chain in _trace(ctx, y, p_prev, spent + v):
                new_coeff = (coeff * s_series).truncate(ctx.budget)
                if not new_coeff:
                    continue
                seg = Segment(y, x, p, new_coeff, bend_wall=wall)
                results.append((new_coeff, chain + [seg]))
    return results


def theta_expand(
    diagram: ScatteringDiagram, q: Vec, basepoint: Point, budget: Fraction | None = None
) -> LaurentPoly:
    """Expansion of the theta function for q at the basepoint: the sum of the
    final monomials over broken lines (initial coefficient normalized to 1).
    For q = 0 the theta function is the constant 1."""
    if q == (0, 0):
        return LaurentPoly.one(diagram.theta_order)
    budget = diagram.theta_order if budget is None else Fraction(budget)
    out = LaurentPoly.zero(budget)
    for line in broken_lines(diagram, q, basepoint, budget):
        p, c = line.final()
        out = out + LaurentPoly.monomial(p, c, budget)
    return out


@dataclass
class Superpotential:
    model: ToricModel
    omega: KahlerClass
    poly: LaurentPoly
    per_theta: tuple[LaurentPoly, ...]   # t^{lambda_i} * theta_i
    basepoint: Point
    diagram: ScatteringDiagram
    lines: tuple[tuple[BrokenLine, ...], ...]


def default_basepoints(spacing: Fraction, count: int = 10) -> list[Point]:
    """Generic points well inside the chamber of the origin (distance below
    half the wall spacing).  Successive candidates are jittered with large
    prime denominators so a trace that happens to run through a scattering
    point can be retried from a clean basepoint."""
    k = 8 * Fraction(spacing)
    base = [
        (Fraction(3, 64), Fraction(5, 128)),
        (-Fraction(5, 128), Fraction(7, 256)),
        (Fraction(7, 256), -Fraction(3, 64)),
    ]
    out: list[Point] = []
    for m in range(count):
        bx, by = base[m % 3]
        jx = Fraction(17 * (m + 1), 1231)
        jy = Fraction(-13 * (m + 1), 1373)
        out.append(((bx + jx) * k, (by + jy) * k))
    return out


def build_diagram(
    model: ToricModel,
    omega: KahlerClass,
    theta: Fraction | None = None,
    spacing: Fraction | None = None,
    max_retries: int = 4,
) -> ScatteringDiagram:
    """Perturbed initial diagram plus consistent completion; retries with a
    rescaled spacing when the perturbation is non-generic."""
    from .scatter import NonGenericDiagram, default_spacing

    spacing = default_spacing(model, omega) if spacing is None else Fraction(spacing)
    last: Exception | None = None
    for k in range(max_retries):
        factor = Fraction(16 - k, 16)
        try:
            d0 = initial_walls(model, omega, spacing * factor, theta)
            return complete(d0)
        except NonGenericDiagram as exc:  # re-perturb and retry
            last = exc
    raise last


def superpotential(
    model: ToricModel,
    omega: KahlerClass,
    basepoint: Point | None = None,
    theta: Fraction | None = None,
    diagram: ScatteringDiagram | None = None,
) -> Superpotential:
    """W_t at a generic point of the special chamber: sum of t^{lambda_i}
    times the theta expansion for each boundary ray."""
    if diagram is None:
        diagram = build_diagram(model, omega, theta)
    theta_order = diagram.theta_order
    if basepoint is None:
        sp = diagram.spacing if diagram.spacing is not None else Fraction(1, 16)
        candidates = [s for s in default_basepoints(sp) if in_special_chamber(diagram, s)]
    else:
        if not in_special_chamber(diagram, basepoint):
            raise GenericityError(f"basepoint {basepoint} is not in the special chamber")
        candidates = [basepoint]
    last: Exception | None = None
    for S in candidates:
        try:
            return _superpotential_at(model, omega, S, diagram, theta_order)
        except GenericityError as exc:
            last = exc
    raise last if last is not None else GenericityError("no basepoint in the special chamber")


def _superpotential_at(model, omega, basepoint, diagram, theta_order) -> Superpotential:
    per_theta = []
    all_lines = []
    total = LaurentPoly.zero(theta_order)
    for i in range(model.n):
        lam = omega.lambdas[i]
        budget = theta_order - lam
        lines = broken_lines(diagram, model.rays[i], basepoint, budget)
        all_lines.append(tuple(lines))
        term = LaurentPoly.zero(theta_order)
        for line in lines:
            p, c = line.final()
            term = term + LaurentPoly.monomial(p, c.shift(lam), theta_order)
        per_theta.append(term)
        total = total + term
    for _, s in total.terms.items():
        v = s.valuation()
        assert v is not None and v > 0, "superpotential monomial with nonpositive valuation"
    return Superpotential(model, omega, total, tuple(per_theta), basepoint, diagram, tuple(all_lines))


def truncated_superpotential(model: ToricModel, omega: KahlerClass) -> LaurentPoly:
    """Closed form of the truncated superpotential: for each ray the straight
    monomial plus the ladder of corrections from the blowups on the next ray."""
    out = LaurentPoly.zero()
    n = model.n
    for i in range(n):
        lam = omega.lambdas[i]
        nxt = (i + 1) % n
        term = LaurentPoly.monomial(model.rays[i], TES.t_power(lam))
        ladder = TES.t_power(lam)
        for j in range(model.blowups[nxt]):
            ladder = ladder * TES.t_power(omega.cs[nxt][j])
            exp = (
                model.rays[i][0] + (j + 1) * model.rays[nxt][0],
                model.rays[i][1] + (j + 1) * model.rays[nxt][1],
            )
            term = term + LaurentPoly.monomial(exp, ladder)
        out = out + term
    return out


@dataclass
class BendAuditReport:
    n_lines: int
    n_bends: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def bend_audit(lines, diagram: ScatteringDiagram) -> BendAuditReport:
    """Check that every bend lies on an initial wall of the diagram."""
    n_lines = 0
    n_bends = 0
    violations = []
    for line in lines:
        n_lines += 1
        for point, wall in line.bend_points():
            n_bends += 1
            if wall is None or not wall.initial:
                violations.append((line.initial_exponent, point))
    return BendAuditReport(n_lines, n_bends, violations)


def max_bent_line(lines) -> BrokenLine:
    """The unique broken line with the most bends (raises if not unique)."""
    best = max(line.n_bends() for line in lines)
    top = [line for line in lines if line.n_bends() == best]
    if len(top) != 1:
        raise ValueError(f"maximally bent line is not unique ({len(top)} candidates)")
    return top[0]
