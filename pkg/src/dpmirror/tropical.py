"""Tropicalization of the superpotential, exact polytope geometry for the
level sets, and numerical amoeba measurements at finite t.

The tropicalization of a Laurent polynomial over finite t-series is the
minimum of one affine form per monomial: the coefficient valuation plus the
pairing with the exponent.  P(delta) is the super-level set; its volume is the
quadratic (1/2) (omega - delta c1)^2 in the admissible range, which is also
interpolated independently from three exact polytope volumes as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key

import numpy as np

from .core import LaurentPoly, Vec, dot, primitive, wedge
from .surface import KahlerClass, ToricModel, chern, omega_pair

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class AffineForm:
    """x -> const + <x, exponent>, tagged by where it came from."""

    const: Fraction
    exponent: Vec
    label: tuple

    def __call__(self, x) -> Fraction:
        return self.const + self.exponent[0] * x[0] + self.exponent[1] * x[1]


@dataclass(frozen=True)
class TropicalForm:
    forms: tuple[AffineForm, ...]

    def value(self, x) -> Fraction:
        return min(f(x) for f in self.forms)


def tropicalize(w: LaurentPoly) -> TropicalForm:
    """One affine form per monomial: valuation of the coefficient plus the
    linear form of the exponent."""
    forms = []
    for p, s in w.items():
        v = s.valuation()
        if v is None:
            continue
        forms.append(AffineForm(v, p, ("monomial", p, v)))
    return TropicalForm(tuple(forms))


def beta_forms(model: ToricModel, omega: KahlerClass) -> TropicalForm:
    """The labeled tropical forms of the truncated superpotential:
    beta_i = lambda_i + <x, n_i> and
    beta_ij = lambda_{i-1} + c_i1 + ... + c_ij + <x, n_{i-1} + j n_i>."""
    forms = []
    n = model.n
    for i in range(n):
        forms.append(AffineForm(omega.lambdas[i], model.rays[i], ("i", i)))
    for i in range(n):
        prev = (i - 1) % n
        acc = omega.lambdas[prev]
        for j in range(model.blowups[i]):
            acc = acc + omega.cs[i][j]
            exp = (
                model.rays[prev][0] + (j + 1) * model.rays[i][0],
                model.rays[prev][1] + (j + 1) * model.rays[i][1],
            )
            forms.append(AffineForm(acc, exp, ("ij", i, j)))
    return TropicalForm(tuple(forms))


class EmptyPolytope(ValueError):
    pass


@dataclass(frozen=True)
class Polygon:
    """Convex polygon as a counterclockwise vertex cycle plus its facets."""

    vertices: tuple[Point, ...]
    facets: tuple[AffineForm, ...]   # active forms, one per edge, ccw order

    def facet_lattice_lengths(self) -> list[Fraction]:
        out = []
        k = len(self.vertices)
        for a in range(k):
            va, vb = self.vertices[a], self.vertices[(a + 1) % k]
            out.append(_lattice_length(va, vb))
        return out

    def contains(self, x, level=Fraction(0)) -> bool:
        return all(f(x) >= level for f in self.facets)

    def centroid(self) -> Point:
        k = len(self.vertices)
        sx = sum(v[0] for v in self.vertices)
        sy = sum(v[1] for v in self.vertices)
        return (sx / k, sy / k)


def _lattice_length(va: Point, vb: Point) -> Fraction:
    d = (vb[0] - va[0], vb[1] - va[1])
    if d == (0, 0):
        return Fraction(0)
    num = (d[0].numerator * d[1].denominator, d[1].numerator * d[0].denominator)
    prim = primitive(num)
    if prim[0]:
        return d[0] / prim[0]
    return d[1] / prim[1]


def _ccw_sorted(points: list[Point], center: Point) -> list[Point]:
    def cmp(a, b):
        ua = (a[0] - center[0], a[1] - center[1])
        ub = (b[0] - center[0], b[1] - center[1])
        ha = 0 if (ua[1] > 0 or (ua[1] == 0 and ua[0] > 0)) else 1
        hb = 0 if (ub[1] > 0 or (ub[1] == 0 and ub[0] > 0)) else 1
        if ha != hb:
            return -1 if ha < hb else 1
        w = ua[0] * ub[1] - ua[1] * ub[0]
        if w > 0:
            return -1
        if w < 0:
            return 1
        return 0

    return sorted(points, key=cmp_to_key(cmp))


def polytope(trop: TropicalForm, delta) -> Polygon:
    """Exact super-level polygon {x : all forms >= delta} with facet labels.

    Raises EmptyPolytope when the region is empty and ValueError when it is
    unbounded (the forms' exponents must positively span the plane)."""
    delta = Fraction(delta)
    forms = list(trop.forms)
    _assert_bounded(forms)
    candidates: set[Point] = set()
    for a in range(len(forms)):
        for b in range(a + 1, len(forms)):
            fa, fb = forms[a], forms[b]
            det = wedge(fa.exponent, fb.exponent)
            if det == 0:
                continue
            # <x, na> = delta - ca ; <x, nb> = delta - cb
            ra, rb = delta - fa.const, delta - fb.const
            x = (
                Fraction(ra * fb.exponent[1] - rb * fa.exponent[1], det),
                Fraction(rb * fa.exponent[0] - ra * fb.exponent[0], det),
            )
            if all(f(x) >= delta for f in forms):
                candidates.add(x)
    if not candidates:
        raise EmptyPolytope(f"level {delta} is empty")
    pts = list(candidates)
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    verts = _ccw_sorted(pts, (cx, cy))
    if len(verts) < 3:
        # degenerate (point or segment): keep vertices, no facets
        return Polygon(tuple(verts), ())
    facets = []
    k = len(verts)
    for a in range(k):
        va, vb = verts[a], verts[(a + 1) % k]
        active = [
            f for f in forms if f(va) == delta and f(vb) == delta
        ]
        if len(active) != 1:
            raise ValueError(f"facet between {va} and {vb} has {len(active)} active forms")
        facets.append(active[0])
    return Polygon(tuple(verts), tuple(facets))


def _angle_cmp_vec(u, v) -> int:
    if u == v:
        return 0
    hu = 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1
    hv = 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1
    if hu != hv:
        return -1 if hu < hv else 1
    w = wedge(u, v)
    return 0 if w == 0 else (-1 if w > 0 else 1)


def _assert_bounded(forms) -> None:
    """The super-level set is bounded iff the exponents positively span the
    plane: every cyclically consecutive angular gap is strictly below pi."""
    dirs = sorted(
        {primitive(f.exponent) for f in forms if f.exponent != (0, 0)},
        key=cmp_to_key(_angle_cmp_vec),
    )
    if len(dirs) < 3:
        raise ValueError("level set is unbounded (too few normal directions)")
    k = len(dirs)
    for a in range(k):
        u, v = dirs[a], dirs[(a + 1) % k]
        if wedge(u, v) <= 0:
            raise ValueError("level set is unbounded (angular gap >= pi)")


def volume(poly: Polygon) -> Fraction:
    """Shoelace area (vertices counterclockwise)."""
    verts = poly.vertices
    if len(verts) < 3:
        return Fraction(0)
    total = Fraction(0)
    k = len(verts)
    for a in range(k):
        va, vb = verts[a], verts[(a + 1) % k]
        total += va[0] * vb[1] - vb[0] * va[1]
    return total / 2


def affine_perimeter(poly: Polygon) -> Fraction:
    """Sum of the lattice lengths of the facets."""
    if len(poly.vertices) < 3:
        return Fraction(0)
    return sum(poly.facet_lattice_lengths())


@dataclass
class VolumeQuadratic:
    """vol P(delta) = v0 + v1*delta + (v2/2)*delta^2 with the exact and the
    interpolated coefficients asserted equal."""

    v0: Fraction
    v1: Fraction
    v2: Fraction

    def __call__(self, delta) -> Fraction:
        delta = Fraction(delta)
        return self.v0 + self.v1 * delta + self.v2 * delta * delta / 2


def v_of_delta(model: ToricModel, omega: KahlerClass, eps: Fraction | None = None) -> VolumeQuadratic:
    """The exact quadratic (1/2)(omega - delta c1)^2 cross-checked against the
    quadratic interpolated through three polytope volumes."""
    c1, _ = chern(model)
    w2 = omega_pair(model, omega, _omega_as_class(model, omega))
    wc1 = omega_pair(model, omega, c1)
    from .surface import intersect

    c1sq = Fraction(intersect(c1, c1))
    exact = VolumeQuadratic(w2 / 2, -wc1, c1sq)

    if eps is None:
        eps = facet_safe_delta(model, omega)
    trop = beta_forms(model, omega)
    deltas = [Fraction(0), eps / 2, eps]
    vols = [volume(polytope(trop, d)) for d in deltas]
    # Lagrange interpolation through three points of a quadratic
    d0, d1, d2 = deltas
    f0, f1, f2 = vols
    a2 = ((f2 - f0) / (d2 - d0) - (f1 - f0) / (d1 - d0)) / (d2 - d1)
    a1 = (f1 - f0) / (d1 - d0) - a2 * (d0 + d1)
    a0 = f0 - a1 * d0 - a2 * d0 * d0
    interp = VolumeQuadratic(a0, a1, 2 * a2)
    assert (interp.v0, interp.v1, interp.v2) == (exact.v0, exact.v1, exact.v2), (
        "polytope volumes disagree with (1/2)(omega - delta c1)^2",
        interp,
        exact,
    )
    return exact


def _omega_as_class(model: ToricModel, omega: KahlerClass):
    return omega.divisor_class(model)


def facet_safe_delta(model: ToricModel, omega: KahlerClass) -> Fraction:
    """A delta > 0 below which P(delta) keeps one facet per tropical form."""
    trop = beta_forms(model, omega)
    expected = len(trop.forms)
    cand = min(
        [l for l in omega.lambdas]
        + [c for row in omega.cs for c in row]
        + [omega.lambdas[i] - c for i in range(model.n) for c in omega.cs[i]]
    ) / 2
    for _ in range(40):
        try:
            poly = polytope(trop, cand)
            if len(poly.facets) == expected:
                return cand
        except (EmptyPolytope, ValueError):
            pass
        cand = cand / 2
    raise ValueError("could not find an admissible delta range")


def dominance_gaps(w: LaurentPoly, wstar: LaurentPoly) -> list[tuple[Vec, Fraction]]:
    """For each monomial of w beyond wstar, the constant slack against the
    matching wstar form with the same exponent (global affine dominance).

    Raises when an extra monomial has no same-exponent partner or dominates:
    then W - W* is not strictly dominated and the truncation is unsound."""
    star = {p: s for p, s in wstar.items()}
    for p, sstar in star.items():
        for e, c in sstar.items():
            if w.coefficient(p).coefficient(e) != c:
                raise ValueError(f"truncated term t^{e} z^{p} is missing from W")
    gaps: list[tuple[Vec, Fraction]] = []
    for p, s in w.items():
        sstar = star.get(p)
        base = sstar.valuation() if sstar is not None else None
        for e in sorted(s.terms):
            if base is not None and e in sstar.terms:
                continue  # belongs to the truncation
            if base is None:
                raise ValueError(f"extra monomial z^{p} has no dominating partner")
            if e <= base:
                raise ValueError(f"extra term t^{e} z^{p} is not dominated")
            gaps.append((p, e - base))
    return gaps


def default_epsilons(model: ToricModel, omega: KahlerClass, w: LaurentPoly | None = None,
                     wstar: LaurentPoly | None = None) -> tuple[Fraction, Fraction]:
    """(eps, eps') defaults: eps' is half the smallest of the dominance gaps,
    the parameter margins, and the admissible polytope range; eps = eps'/2."""
    cand = [facet_safe_delta(model, omega)]
    cand += list(omega.lambdas)
    cand += [c for row in omega.cs for c in row]
    cand += [omega.lambdas[i] - c for i in range(model.n) for c in omega.cs[i]]
    for row in omega.cs:
        cand += [b - a for a, b in zip(row, row[1:])]
    if w is not None and wstar is not None:
        cand += [g for _, g in dominance_gaps(w, wstar)]
    eps_p = min(cand) / 2
    trop = beta_forms(model, omega)
    expected = len(trop.forms)
    for _ in range(40):
        try:
            if len(polytope(trop, eps_p).facets) == expected:
                break
        except (EmptyPolytope, ValueError):
            pass
        eps_p = eps_p / 2
    return eps_p / 2, eps_p


def xi_equals_xi_star(model: ToricModel, omega: KahlerClass, w: LaurentPoly,
                      wstar: LaurentPoly) -> bool:
    """Zero level sets of trop(W) and trop(W*) coincide: every extra form of W
    is non-binding on the polygon (checked at the vertices) and the polygons'
    vertex sets agree."""
    p_star = polytope(tropicalize(wstar), Fraction(0))
    p_full = polytope(tropicalize(w), Fraction(0))
    if set(p_star.vertices) != set(p_full.vertices):
        return False
    for f in tropicalize(w).forms:
        if min(f(v) for v in p_star.vertices) < 0:
            return False
    return True


# -- numerical amoebas -------------------------------------------------------


class NumericPotential:
    """W_t on the positive locus in Log_t coordinates: a callable
    W(x) = sum_p coeff_p(t) * t^{<x, p>}, vectorized over numpy arrays."""

    def __init__(self, w: LaurentPoly, t: float):
        if not (0 < t < 1):
            raise ValueError("t must lie in (0, 1)")
        self.t = t
        self.logt = math.log(t)
        self.exponents = np.array([p for p, _ in w.items()], dtype=float)
        self.coeffs = np.array([s.eval(t) for _, s in w.items()], dtype=float)

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        pairing = np.multiply.outer(x1, self.exponents[:, 0]) + np.multiply.outer(
            x2, self.exponents[:, 1]
        )
        return np.einsum("...k,k->...", np.exp(self.logt * pairing), self.coeffs)

    def at(self, x1: float, x2: float) -> float:
        return float(self(np.float64(x1), np.float64(x2)))


def _bounding_box(model: ToricModel, omega: KahlerClass) -> tuple[float, float, float, float]:
    """Xi dilated by a factor of 3 about its centroid."""
    poly = polytope(beta_forms(model, omega), Fraction(0))
    cx, cy = poly.centroid()
    xs = [cx + 3 * (v[0] - cx) for v in poly.vertices]
    ys = [cy + 3 * (v[1] - cy) for v in poly.vertices]
    return float(min(xs)), float(max(xs)), float(min(ys)), float(max(ys))


def amoeba_volume(
    model: ToricModel,
    omega: KahlerClass,
    w: LaurentPoly,
    delta,
    t: float,
    rel_tol: float = 1e-4,
    max_depth: int = 14,
) -> float:
    """Area of {x : W_t(x) <= t^delta} by dyadic quadtree refinement.

    The region is convex (W is a positive sum of exponentials of affine
    functions), so a cell with all corners inside lies inside; boundary cells
    are split, and the estimate interior + boundary/2 is Richardson-refined
    across the last two levels."""
    W = NumericPotential(w, t)
    level_value = t ** float(delta)
    x0, x1, y0, y1 = _bounding_box(model, omega)
    cells = [(x0, x1, y0, y1)]
    inside_area = 0.0
    estimates = []
    prev = None
    for depth in range(max_depth):
        xs = np.array([[c[0], c[1], c[0], c[1], 0.5 * (c[0] + c[1])] for c in cells])
        ys = np.array([[c[2], c[2], c[3], c[3], 0.5 * (c[2] + c[3])] for c in cells])
        vals = W(xs.ravel(), ys.ravel()).reshape(xs.shape)
        inls = vals <= level_value
        new_cells = []
        boundary_area = 0.0
        for idx, c in enumerate(cells):
            flags = inls[idx]
            area = (c[1] - c[0]) * (c[3] - c[2])
            if flags.all():
                inside_area += area
            elif flags.any():
                boundary_area += area
                new_cells.append(c)
            else:
                # all sampled points outside: convex region may still clip a
                # corner of the cell by at most O(h^2); treat as outside
                pass
        estimates.append(inside_area + 0.5 * boundary_area)
        if prev is not None and abs(estimates[-1] - prev) <= rel_tol * max(abs(estimates[-1]), 1e-30):
            break
        prev = estimates[-1]
        if not new_cells:
            break
        cells = []
        for c in new_cells:
            mx, my = 0.5 * (c[0] + c[1]), 0.5 * (c[2] + c[3])
            cells.extend(
                [(c[0], mx, c[2], my), (mx, c[1], c[2], my), (c[0], mx, my, c[3]), (mx, c[1], my, c[3])]
            )
    if len(estimates) >= 2:
        # boundary midpoint rule converges ~ O(h^2): Richardson with ratio 4
        return (4 * estimates[-1] - estimates[-2]) / 3
    return estimates[-1]


def corner_defect(model: ToricModel, omega: KahlerClass, w: LaurentPoly, eps, t: float,
                  rel_tol: float = 2e-5) -> float:
    """(vol P(eps) - vol amoeba_eps) * (log t)^2: tends to (n + sum l) zeta(2)."""
    exact = float(volume(polytope(beta_forms(model, omega), Fraction(eps))))
    approx = amoeba_volume(model, omega, w, eps, t, rel_tol=rel_tol)
    return (exact - approx) * math.log(t) ** 2


def hausdorff_gap(model: ToricModel, omega: KahlerClass, w: LaurentPoly, delta, t: float,
                  n_dirs: int = 256) -> float:
    """Max radial distance between the amoeba boundary and the polytope
    boundary, sampled from the polytope centroid."""
    poly = polytope(beta_forms(model, omega), Fraction(delta))
    W = NumericPotential(w, t)
    cx, cy = float(poly.centroid()[0]), float(poly.centroid()[1])
    level = t ** float(delta)
    if not W.at(cx, cy) <= level:
        raise ValueError("polytope centroid is outside the amoeba; t too large")
    forms = [(float(f.const), (float(f.exponent[0]), float(f.exponent[1]))) for f in poly.facets]
    gap = 0.0
    for k in range(n_dirs):
        ang = 2 * math.pi * (k + 0.5) / n_dirs
        ux, uy = math.cos(ang), math.sin(ang)
        # exact polytope radius along (ux, uy)
        r_poly = math.inf
        for const, (ex, ey) in forms:
            num = const + ex * cx + ey * cy - float(delta)
            den = -(ex * ux + ey * uy)
            if den > 0:
                r_poly = min(r_poly, num / den)
        # amoeba radius by bisection on the convex section
        lo, hi = 0.0, max(r_poly, 1e-6)
        while W.at(cx + hi * ux, cy + hi * uy) <= level:
            hi *= 1.5
            if hi > 1e6:
                raise ValueError("amoeba appears unbounded along a ray")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if W.at(cx + mid * ux, cy + mid * uy) <= level:
                lo = mid
            else:
                hi = mid
        gap = max(gap, abs(0.5 * (lo + hi) - r_poly))
    return gap
