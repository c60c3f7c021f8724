"""Perturbed scattering diagrams on N_R and their consistent completion.

Walls are lines or outgoing rays with attached functions 1 + (positive
t-valuation) in a single monomial direction.  `complete` runs the
order-by-order insertion algorithm: find the inconsistency of lowest
t-valuation around an intersection point, cancel it with outgoing rays,
repeat until every loop is the identity modulo t^Theta.

Conventions.  A wall stores its *support* direction.  For a line the support
is base + R*direction and the wall function lives in z^direction; for an
outgoing ray the support is base + R_{>=0}*direction and the function lives
in positive multiples of z^(-direction) (monomials point back toward the
base).  Crossing transforms use the primitive covector m that annihilates the
support and is negative on the travel direction.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .core import (
    LaurentPoly,
    QQ,
    TExponentSeries as TES,
    Vec,
    dot,
    perp_against,
    primitive,
    vadd,
    vneg,
    vsub,
    wedge,
)
from .surface import KahlerClass, ToricModel, validate_omega

Point = tuple[Fraction, Fraction]

# slot offsets get a per-ray multiplier to break accidental collinearity
# between scattering centers (symmetric spacings put dP3 cluster points on a
# common outgoing-ray direction)
_RAY_SPACING_TWEAK = (
    Fraction(1),
    Fraction(21, 20),
    Fraction(19, 20),
    Fraction(23, 22),
    Fraction(17, 16),
)


class NonGenericDiagram(ValueError):
    """Three or more walls meet transversally at one point; re-perturb spacing."""


class InconsistentDefect(RuntimeError):
    """A loop defect is not cancellable by outgoing rays (internal error)."""


@dataclass(eq=False)
class Wall:
    base: Point
    direction: Vec          # support direction (primitive)
    kind: str               # "line" | "ray"
    fn: LaurentPoly
    initial: bool = False
    ray_index: int | None = None   # for initial walls: which boundary ray
    c_label: int | None = None     # for initial walls: ascending label of c_ij
    _pow_cache: dict = field(default_factory=dict, repr=False)

    def monomial_dir(self) -> Vec:
        return self.direction if self.kind == "line" else vneg(self.direction)

    def support_key(self):
        """Identifies the support line: (canonical direction, offset)."""
        d = primitive(self.direction)
        if d[0] < 0 or (d[0] == 0 and d[1] < 0):
            d = vneg(d)
        return (d, d[0] * self.base[1] - d[1] * self.base[0])

    def contains(self, x: Point) -> bool:
        dx = vsub(x, self.base)
        if dx[0] * self.direction[1] != dx[1] * self.direction[0]:
            return False
        if self.kind == "line":
            return True
        s = _ray_parameter(dx, self.direction)
        return s >= 0

    def power(self, e: int, theta) -> LaurentPoly:
        from .core import laurent_pow

        key = (e, theta)
        out = self._pow_cache.get(key)
        if out is None:
            out = laurent_pow(self.fn, e, theta)
            self._pow_cache[key] = out
        return out

    def min_val(self) -> Fraction | None:
        g = self.fn - LaurentPoly.one(self.fn.trunc)
        return g.min_valuation()

    def multiply_fn(self, factor: LaurentPoly) -> None:
        self.fn = self.fn * factor
        self._pow_cache.clear()


def _ray_parameter(dx, direction) -> Fraction:
    if direction[0]:
        return Fraction(dx[0], direction[0])
    return Fraction(dx[1], direction[1])


@dataclass
class ScatteringDiagram:
    walls: list[Wall]
    theta_order: Fraction
    model: ToricModel | None = None
    omega: KahlerClass | None = None
    spacing: Fraction | None = None
    _singular: set | None = None

    def initial_walls(self) -> list[Wall]:
        return [w for w in self.walls if w.initial]

    def singular_points(self) -> set:
        """Ray bases and pairwise transversal intersections (cached)."""
        if self._singular is None:
            pts = {w.base for w in self.walls if w.kind == "ray"}
            walls = self.walls
            for a in range(len(walls)):
                for b in range(a + 1, len(walls)):
                    x = _intersection(walls[a], walls[b])
                    if x is not None:
                        pts.add(x)
            self._singular = pts
        return self._singular

    def wall_for_blowup(self, i: int, j: int) -> Wall:
        for w in self.walls:
            if w.initial and w.ray_index == i and w.c_label == j:
                return w
        raise KeyError((i, j))

    def to_json(self) -> str:
        data = []
        for w in self.walls:
            data.append(
                {
                    "base": [str(w.base[0]), str(w.base[1])],
                    "direction": list(w.direction),
                    "kind": w.kind,
                    "initial": w.initial,
                    "fn": [
                        {"exponent": list(p), "coeff": [[str(e), str(c)] for e, c in s.items()]}
                        for p, s in w.fn.items()
                    ],
                }
            )
        return json.dumps({"theta_order": str(self.theta_order), "walls": data}, indent=2, sort_keys=True)


def cw_normal(n: Vec) -> Vec:
    """Rotate by -90 degrees: the 'right side' offset direction of a ray."""
    return (n[1], -n[0])


def default_spacing(model: ToricModel, omega: KahlerClass) -> Fraction:
    """1/16 of the smallest facet lattice length of Xi (closed-form polytope)."""
    from .theta import truncated_superpotential
    from .tropical import polytope, tropicalize

    wstar = truncated_superpotential(model, omega)
    poly = polytope(tropicalize(wstar), Fraction(0))
    return min(poly.facet_lattice_lengths()) / 16


def default_theta_order(model: ToricModel, omega: KahlerClass) -> Fraction:
    """Sum of all lambda and c parameters plus max lambda: clears every
    valuation appearing in the truncated superpotential and the closed-form
    predictions."""
    lam = omega.lambdas
    return sum(lam) + sum(sum(row) for row in omega.cs) + max(lam)


def initial_walls(
    model: ToricModel,
    omega: KahlerClass,
    spacing: Fraction | None = None,
    theta: Fraction | None = None,
) -> ScatteringDiagram:
    """The perturbed initial diagram: for each blowup E_ij one line parallel
    to n_i on the right of the ray, function 1 + t^{c_ij} z^{n_i}, with larger
    c closer to the origin."""
    report = validate_omega(model, omega)
    if not report.ok:
        raise ValueError(f"omega fails admissibility: {report}")
    spacing = default_spacing(model, omega) if spacing is None else Fraction(spacing)
    theta = default_theta_order(model, omega) if theta is None else Fraction(theta)
    walls: list[Wall] = []
    for i in range(model.n):
        l = model.blowups[i]
        if not l:
            continue
        n_i = model.rays[i]
        off = cw_normal(n_i)
        tweak = _RAY_SPACING_TWEAK[i % len(_RAY_SPACING_TWEAK)]
        for slot in range(1, l + 1):
            label = l - slot  # slot 1 (closest) carries the largest c
            c = omega.cs[i][label]
            d = spacing * slot * tweak
            base = (d * off[0], d * off[1])
            fn = LaurentPoly({(0, 0): TES.one(), n_i: TES.t_power(c)}, theta)
            walls.append(
                Wall(base=base, direction=n_i, kind="line", fn=fn, initial=True,
                     ray_index=i, c_label=label)
            )
    return ScatteringDiagram(walls, theta, model, omega, spacing)


# -- crossing transforms ----------------------------------------------------


def cross(mono: LaurentPoly, wall: Wall, travel: Vec, theta=None) -> LaurentPoly:
    """Apply the wall-crossing transform to a monomial (or polynomial)."""
    theta = theta if theta is not None else mono.trunc
    return cross_poly(mono, wall, travel, theta)


def cross_poly(poly: LaurentPoly, wall: Wall, travel: Vec, theta) -> LaurentPoly:
    m = perp_against(wall.direction, travel)
    out = LaurentPoly.zero(theta)
    for p, s in poly.terms.items():
        e = dot(m, p)
        piece = wall.power(e, theta).scale_series(s).shift_exponent(p)
        out = out + piece
    return out


def path_product(diagram: ScatteringDiagram, crossings, probe: LaurentPoly, theta=None) -> LaurentPoly:
    """Compose crossings (wall, travel) in order on the probe, mod t^Theta."""
    theta = diagram.theta_order if theta is None else Fraction(theta)
    out = probe.with_trunc(theta)
    for wall, travel in crossings:
        out = cross_poly(out, wall, travel, theta)
    return out


def _angle_cmp(u: Vec, v: Vec) -> int:
    """Counterclockwise angular order starting just above direction (1, 0)."""
    if u == v:
        return 0
    hu = 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1
    hv = 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1
    if hu != hv:
        return -1 if hu < hv else 1
    w = wedge(u, v)
    if w == 0:
        return 0
    return -1 if w > 0 else 1


def loop_crossings(diagram: ScatteringDiagram, point: Point) -> list[tuple[Wall, Vec]]:
    """Crossing list of a small counterclockwise loop around `point`."""
    hits: list[tuple[Vec, Wall]] = []
    for w in diagram.walls:
        if not w.contains(point):
            continue
        d = primitive(w.direction)
        if w.kind == "ray" and point == w.base:
            hits.append((d, w))
        else:
            hits.append((d, w))
            hits.append((vneg(d), w))
    hits.sort(key=cmp_to_key(lambda a, b: _angle_cmp(a[0], b[0])))
    out = []
    for u, w in hits:
        travel = (-u[1], u[0])  # ccw tangent at circle point in direction u
        out.append((w, travel))
    return out


def consistency_defect(diagram: ScatteringDiagram, point: Point, theta=None):
    """Lowest-order failure of the identity around `point`.

    Returns None when consistent mod t^Theta, else (valuation, defects) where
    defects maps probe-exponent -> {monomial p -> coefficient at the lowest
    valuation}.
    """
    theta = diagram.theta_order if theta is None else Fraction(theta)
    crossings = loop_crossings(diagram, point)
    if len(crossings) < 3:
        return None
    deviations: dict[Vec, LaurentPoly] = {}
    val: Fraction | None = None
    for probe_exp in ((1, 0), (0, 1)):
        probe = LaurentPoly.monomial(probe_exp, TES.one(), theta)
        image = path_product(diagram, crossings, probe, theta)
        g = image.shift_exponent(vneg(probe_exp)) - LaurentPoly.one(theta)
        deviations[probe_exp] = g
        v = g.min_valuation()
        if v is not None and (val is None or v < val):
            val = v
    if val is None:
        return None
    defect_terms: dict[Vec, dict[Vec, Fraction]] = {}
    for probe_exp, g in deviations.items():
        terms: dict[Vec, Fraction] = {}
        for p, s in g.terms.items():
            c = s.coefficient(val)
            if c:
                terms[p] = c
        defect_terms[probe_exp] = terms
    return val, defect_terms


def is_consistent_at(diagram: ScatteringDiagram, point: Point, theta=None) -> bool:
    return consistency_defect(diagram, point, theta) is None


# -- completion -------------------------------------------------------------


def _intersection(w1: Wall, w2: Wall) -> Point | None:
    """Transversal intersection point of two supports, or None."""
    d1, d2 = w1.direction, w2.direction
    det = wedge(d1, d2)
    if det == 0:
        return None
    b = vsub(w2.base, w1.base)
    s1 = Fraction(wedge(b, d2), det)
    s2 = Fraction(wedge(b, d1), det)
    if w1.kind == "ray" and s1 < 0:
        return None
    if w2.kind == "ray" and s2 < 0:
        return None
    return (w1.base[0] + s1 * d1[0], w1.base[1] + s1 * d1[1])


def _noncommuting_bound(w1: Wall, w2: Wall) -> Fraction | None:
    """Lower bound for the defect valuation a pair can create, or None if the
    walls commute (parallel monomial directions)."""
    if wedge(w1.monomial_dir(), w2.monomial_dir()) == 0:
        return None
    v1, v2 = w1.min_val(), w2.min_val()
    if v1 is None or v2 is None:
        return None
    return v1 + v2


def complete(diagram: ScatteringDiagram, theta: Fraction | None = None) -> ScatteringDiagram:
    """Kontsevich-Soibelman consistent completion modulo t^Theta."""
    theta = diagram.theta_order if theta is None else Fraction(theta)
    walls = [
        Wall(w.base, w.direction, w.kind, w.fn.with_trunc(theta), w.initial, w.ray_index, w.c_label)
        for w in diagram.walls
    ]
    out = ScatteringDiagram(walls, theta, diagram.model, diagram.omega, diagram.spacing)

    passing: dict[Point, set] = {}

    def register_pair(w1: Wall, w2: Wall, heap, seen):
        x = _intersection(w1, w2)
        if x is None:
            return
        for w in (w1, w2):
            if not (w.kind == "ray" and w.base == x):
                keys = passing.setdefault(x, set())
                keys.add(w.support_key())
                if len(keys) >= 3:
                    raise NonGenericDiagram(
                        f"three walls through {x}; re-perturb the spacing"
                    )
        bound = _noncommuting_bound(w1, w2)
        if bound is None or bound > theta:
            return
        if x not in seen or seen[x] > bound:
            seen[x] = bound
            heapq.heappush(heap, (bound, x[0], x[1]))

    heap: list[tuple[Fraction, Fraction, Fraction]] = []
    seen: dict[Point, Fraction] = {}
    for a in range(len(walls)):
        for b in range(a + 1, len(walls)):
            register_pair(walls[a], walls[b], heap, seen)

    guard = 0
    while heap:
        guard += 1
        if guard > 200000:
            raise InconsistentDefect("completion failed to terminate")
        _, x0, x1 = heapq.heappop(heap)
        point = (x0, x1)
        defect = consistency_defect(out, point, theta)
        if defect is None:
            continue
        val, per_probe = defect
        exps = sorted(set(per_probe[(1, 0)]) | set(per_probe[(0, 1)]))
        new_walls: list[Wall] = []
        for p in exps:
            if p == (0, 0):
                raise InconsistentDefect(f"scalar defect at {point}")
            d = primitive(p)
            m = (-d[1], d[0])
            dx = per_probe[(1, 0)].get(p, Fraction(0))
            dy = per_probe[(0, 1)].get(p, Fraction(0))
            if m[0]:
                c = Fraction(-dx, m[0])
            else:
                c = Fraction(-dy, m[1])
            if c * m[0] != -dx or c * m[1] != -dy:
                raise InconsistentDefect(f"defect at {point} is not a wall cocycle")
            if not c:
                continue
            factor = LaurentPoly({(0, 0): TES.one(), p: TES.t_power(val, c)}, theta)
            support_dir = vneg(d)
            merged = False
            for w in out.walls:
                if w.kind == "ray" and w.base == point and w.direction == support_dir:
                    w.multiply_fn(factor)
                    merged = True
                    break
            if not merged:
                w = Wall(base=point, direction=support_dir, kind="ray", fn=factor)
                out.walls.append(w)
                new_walls.append(w)
        for w in new_walls:
            for other in out.walls:
                if other is not w:
                    register_pair(w, other, heap, seen)
        nxt = consistency_defect(out, point, theta)
        if nxt is not None:
            if nxt[0] <= val:
                raise InconsistentDefect(f"defect valuation did not increase at {point}")
            heapq.heappush(heap, (nxt[0], point[0], point[1]))
    return out


def all_intersection_points(diagram: ScatteringDiagram) -> list[Point]:
    pts = set()
    walls = diagram.walls
    for a in range(len(walls)):
        for b in range(a + 1, len(walls)):
            x = _intersection(walls[a], walls[b])
            if x is not None:
                pts.add(x)
    return sorted(pts)


def check_consistency(diagram: ScatteringDiagram, theta=None, fast: bool = True) -> bool:
    """Path product around every intersection point is the identity mod t^Theta.

    With fast=True, points where every incident noncommuting pair already has
    combined valuation above Theta are skipped: any loop deviation is a sum of
    iterated commutators, whose valuations are bounded below by the pair sums.
    """
    theta = diagram.theta_order if theta is None else Fraction(theta)
    for x in all_intersection_points(diagram):
        if fast:
            incident = [w for w in diagram.walls if w.contains(x)]
            bounds = [
                b
                for a in range(len(incident))
                for b in (
                    _noncommuting_bound(incident[a], w2) for w2 in incident[a + 1:]
                )
                if b is not None
            ]
            if not bounds or min(bounds) > theta:
                continue
        if not is_consistent_at(diagram, x, theta):
            return False
    return True
