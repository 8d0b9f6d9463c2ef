"""Goldberg's three one-parameter families of tetrahedral tiles.

Each family is parametrized by a single edge parameter a with d12 normalized
to 1; all three degenerate at the endpoints of (0, 1).  Family 1 contains
Sommerville No. 1 (a = 1/3); family 2 contains Sommerville No. 3; family 3
only tiles non-face-to-face in general (its free dihedral angle would have to
divide 2*pi to stack, so it cannot vary continuously in a face-to-face tiling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import rigor
from .geom import (
    SLOTS,
    AngleSextuple,
    EdgeSextuple,
    GeometryError,
    Tetrahedron,
    dihedral_angles,
    edges_from_angles,
    normalized_area,
    validate_edges,
)
from .taxonomy import SLOT_PERMS

__all__ = [
    "FamilyParam",
    "FamilyMatch",
    "OutOfRange",
    "VALID_RANGE",
    "family_edges",
    "family_angles",
    "minimize_family",
    "match_family",
    "alpha_to_param",
    "rc6_doubling_check",
]


class OutOfRange(GeometryError):
    pass


# All three families produce valid tetrahedra exactly for a in (0, 1):
# at both endpoints some face degenerates to a segment.
VALID_RANGE = (0.0, 1.0)


@dataclass(frozen=True)
class FamilyParam:
    family: int
    a: float

    def __post_init__(self):
        if self.family not in (1, 2, 3):
            raise GeometryError(f"family must be 1, 2 or 3, got {self.family}")


def _raw_edges(family: int, a: float) -> tuple:
    if family == 1:
        return (1.0, math.sqrt(3 * a * a + 1), 3 * a, 1.0, math.sqrt(3 * a * a + 1), 1.0)
    if family == 2:
        if 4 - 3 * a * a <= 0:
            raise OutOfRange(f"family 2 parameter {a} out of range")
        return (1.0, math.sqrt(3 * a * a + 1), 1.5 * a, 1.0,
                0.5 * math.sqrt(4 - 3 * a * a), 0.5 * math.sqrt(4 - 3 * a * a))
    return (1.0, 0.5 * math.sqrt(6 * a * a + 3), 3 * a, 0.5,
            math.sqrt(3 * a * a + 1), 0.5 * math.sqrt(6 * a * a + 3))


def family_edges(p: FamilyParam) -> EdgeSextuple:
    """Edge sextuple of the family member; raises OutOfRange when degenerate."""
    lo, hi = VALID_RANGE
    if not (lo < p.a < hi):
        raise OutOfRange(f"family {p.family} parameter {p.a} outside ({lo}, {hi})")
    try:
        edges = EdgeSextuple.of(_raw_edges(p.family, p.a))
        validate_edges(edges)
    except GeometryError as exc:
        raise OutOfRange(f"family {p.family} at a={p.a}: {exc}") from exc
    return edges


def family_angles(p: FamilyParam) -> AngleSextuple:
    return dihedral_angles(validate_edges(family_edges(p)))


def _family1_alpha(a: float) -> float:
    # sin(alpha) = 1 / sqrt(3 a^2 + 1), alpha acute
    return math.asin(1.0 / math.sqrt(3 * a * a + 1))


def alpha_to_param(alpha: float) -> float:
    """Family-1 edge parameter from its free dihedral angle (alpha acute)."""
    if not (0.0 < alpha < 0.5 * math.pi):
        raise OutOfRange(f"family-1 alpha {alpha} must be acute")
    return 1.0 / (math.tan(alpha) * math.sqrt(3.0))


def _family1_pattern(alpha: float) -> tuple:
    return (alpha, 0.5 * math.pi, math.pi / 3.0, math.pi - 2 * alpha, 0.5 * math.pi, alpha)


def _family2_pattern(alpha: float, beta: float) -> tuple:
    return (alpha, 0.5 * math.pi, math.pi / 3.0, 0.5 * math.pi - alpha,
            0.5 * math.pi + beta, 0.5 * math.pi - beta)


def _family3_pattern(alpha: float, gamma: float) -> tuple:
    return (alpha, 0.5 * math.pi + gamma, math.pi / 6.0, math.pi - 2 * alpha,
            0.5 * math.pi, 0.5 * math.pi - gamma)


def _norm_area_of(a: float, family: int) -> float:
    return normalized_area(validate_edges(family_edges(FamilyParam(family, a))))


def minimize_family(family: int, tol: float = 1e-8) -> tuple:
    """(a*, area*) minimizing normalized area over the family's valid range.

    Golden-section search bracketed to `tol` in a, then cross-checked with an
    interval lower bound of the area over [a*-1e-3, a*+1e-3].
    """
    lo, hi = 1e-3, 1.0 - 1e-3
    phi = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = _norm_area_of(c, family), _norm_area_of(d, family)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = _norm_area_of(c, family)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = _norm_area_of(d, family)
    a_star = 0.5 * (a + b)
    area_star = _norm_area_of(a_star, family)
    lb = _interval_area_lower_bound(family, a_star - 1e-3, a_star + 1e-3)
    if area_star < lb - 1e-9:
        raise GeometryError(
            f"family {family} minimum {area_star} below its interval bound {lb}")
    return a_star, area_star


def _interval_area_lower_bound(family: int, lo: float, hi: float) -> float:
    """Certified lower bound of normalized area over a parameter interval."""
    a = rigor.Interval(max(lo, 1e-6), min(hi, 1.0 - 1e-6))
    one = rigor.Interval.point(1.0)
    three = rigor.Interval.point(3.0)
    asq = a.sq()
    if family == 1:
        c = (three * asq + one).sqrt()
        edges = [one, c, three * a, one, c, one]
    elif family == 2:
        c = (three * asq + one).sqrt()
        d = (rigor.Interval.point(4.0) - three * asq).sqrt() * rigor.Interval.point(0.5)
        edges = [one, c, rigor.Interval.point(1.5) * a, one, d, d]
    else:
        f = (rigor.Interval.point(6.0) * asq + three).sqrt() * rigor.Interval.point(0.5)
        edges = [one, f, three * a, rigor.Interval.point(0.5), (three * asq + one).sqrt(), f]
    half = rigor.Interval.point(0.5)
    areas = []
    for face in ((3, 4, 5), (1, 2, 5), (0, 2, 4), (0, 1, 3)):
        x, y, z = (edges[k] for k in face)
        s = (x + y + z) * half
        areas.append((s * (s - x) * (s - y) * (s - z)).sqrt())
    surface = areas[0] + areas[1] + areas[2] + areas[3]
    det = _cm_interval(edges)
    volume = (det / rigor.Interval.point(288.0)).sqrt()
    # S / V^(2/3) bounded below by S.lo / (V.hi^(2/3))
    return surface.lo / volume.hi ** (2.0 / 3.0)


def _cm_interval(edges) -> rigor.Interval:
    sq = [e.sq() for e in edges]
    d12, d13, d14, d23, d24, d34 = sq
    one = rigor.Interval.point(1.0)
    zero = rigor.Interval.point(0.0)
    m = [
        [zero, d12, d13, d14, one],
        [d12, zero, d23, d24, one],
        [d13, d23, zero, d34, one],
        [d14, d24, d34, zero, one],
        [one, one, one, one, zero],
    ]

    def det(rows, cols):
        if len(rows) == 1:
            return m[rows[0]][cols[0]]
        total = None
        r0 = rows[0]
        for pos, cc in enumerate(cols):
            term = m[r0][cc] * det(rows[1:], cols[:pos] + cols[pos + 1:])
            if pos % 2:
                term = -term
            total = term if total is None else total + term
        return total

    return det(tuple(range(5)), tuple(range(5)))


@dataclass(frozen=True)
class FamilyMatch:
    family: int
    a: float
    alpha: float
    slot_perm: tuple

    def to_json(self) -> dict:
        return {"family": self.family, "a": self.a, "alpha": self.alpha}


_PATTERN_TOL = 1e-9


def match_family(angles: AngleSextuple, tol: float = _PATTERN_TOL) -> Optional[FamilyMatch]:
    """Family membership test for an angle sextuple, up to vertex permutation.

    Family 1 pattern: (alpha, pi/2, pi/3, pi-2*alpha, pi/2, alpha);
    family 2: (alpha, pi/2, pi/3, pi/2-alpha, pi/2+beta, pi/2-beta) with
    sin(beta) = sqrt(3)*a/2; family 3: (alpha, pi/2+gamma, pi/6, pi-2*alpha,
    pi/2, pi/2-gamma) with sin(gamma) = a/sqrt(3a^2+1).  A match requires the
    reconstructed family member to reproduce the permuted input to `tol`.
    """
    for perm in SLOT_PERMS:
        vals = tuple(angles.values[k] for k in perm)
        hit = _match_one(vals, tol)
        if hit is not None:
            return FamilyMatch(hit[0], hit[1], hit[2], perm)
    return None


def _match_one(vals: tuple, tol: float):
    half_pi = 0.5 * math.pi
    third_pi = math.pi / 3.0
    # family 1
    alpha = vals[0]
    if (abs(vals[1] - half_pi) <= tol and abs(vals[4] - half_pi) <= tol
            and abs(vals[2] - third_pi) <= tol and abs(vals[5] - alpha) <= tol
            and abs(vals[3] - (math.pi - 2 * alpha)) <= tol and alpha < half_pi):
        a = alpha_to_param(alpha)
        if _pattern_close(_family1_pattern(alpha), vals, tol):
            return (1, a, alpha)
    # family 2
    alpha = vals[0]
    if (abs(vals[1] - half_pi) <= tol and abs(vals[2] - third_pi) <= tol
            and abs(vals[3] - (half_pi - alpha)) <= tol and alpha < half_pi):
        beta = vals[4] - half_pi
        if abs(vals[5] - (half_pi - beta)) <= tol and beta > -tol:
            a = alpha_to_param(alpha)
            if abs(math.sin(max(beta, 0.0)) - math.sqrt(3) * a / 2.0) <= 1e-7:
                if _pattern_close(_family2_pattern(alpha, beta), vals, tol):
                    return (2, a, alpha)
    # family 3
    alpha = vals[0]
    if (abs(vals[4] - half_pi) <= tol and abs(vals[2] - math.pi / 6.0) <= tol
            and abs(vals[3] - (math.pi - 2 * alpha)) <= tol and alpha < half_pi):
        gamma = vals[1] - half_pi
        if abs(vals[5] - (half_pi - gamma)) <= tol:
            sin_a = math.sin(alpha)
            if sin_a < 1.0 - 1e-12:
                a = alpha_to_param(alpha)
                if abs(math.sin(gamma) - a / math.sqrt(3 * a * a + 1)) <= 1e-7:
                    if _pattern_close(_family3_pattern(alpha, gamma), vals, tol):
                        return (3, a, alpha)
    return None


def _pattern_close(pattern: tuple, vals: tuple, tol: float) -> bool:
    return all(abs(p - v) <= tol for p, v in zip(pattern, vals))


def rc6_doubling_check(angles: AngleSextuple, tol: float = 1e-9) -> dict:
    """Glue two copies of a half-tile along the face opposite V3 and verify the
    union is a family-1 tetrahedron.

    Requires d14 = d24 (true for the intended inputs).  The second copy is the
    image under the half-turn about the axis through V4 and the midpoint of
    V1V2; returns the collinearity defect of V3, V4, V3' and the family-1
    match of the doubled tetrahedron's angles.
    """
    import numpy as np

    edges = edges_from_angles(angles)
    if abs(edges.d14 - edges.d24) > 1e-9 * max(edges.d14, edges.d24):
        raise GeometryError("doubling construction needs d14 = d24")
    v = _embed(edges)
    v1, v2, v3, v4 = v
    mid = 0.5 * (v1 + v2)
    axis = v4 - mid
    axis = axis / np.linalg.norm(axis)

    def half_turn(x):
        rel = x - mid
        return mid + 2.0 * np.dot(rel, axis) * axis - rel

    v3p = half_turn(v3)
    # collinearity of V3, V4, V3': distance from V4 to the line V3--V3'
    seg = v3p - v3
    defect = float(np.linalg.norm(np.cross(v4 - v3, seg)) / np.linalg.norm(seg))
    scale = float(np.linalg.norm(v3p - v3))
    rel_defect = defect / scale
    doubled = EdgeSextuple.of([
        np.linalg.norm(v2 - v3),   # hull tetra (V2, V3, V1, V3')
        np.linalg.norm(v2 - v1),
        np.linalg.norm(v2 - v3p),
        np.linalg.norm(v3 - v1),
        np.linalg.norm(v3 - v3p),
        np.linalg.norm(v1 - v3p),
    ])
    match = match_family(dihedral_angles(validate_edges(doubled)), tol=1e-7)
    return {
        "collinearity_defect": rel_defect,
        "collinear": rel_defect <= tol,
        "doubled_match": match,
    }


def _embed(e: EdgeSextuple):
    """Coordinates V1..V4 realizing the sextuple (V1 at origin, V2 on +x)."""
    import numpy as np

    v1 = np.zeros(3)
    v2 = np.array([e.d12, 0.0, 0.0])
    x3 = (e.d12 ** 2 + e.d13 ** 2 - e.d23 ** 2) / (2 * e.d12)
    y3 = math.sqrt(max(e.d13 ** 2 - x3 ** 2, 0.0))
    v3 = np.array([x3, y3, 0.0])
    x4 = (e.d12 ** 2 + e.d14 ** 2 - e.d24 ** 2) / (2 * e.d12)
    y4 = (e.d13 ** 2 + e.d14 ** 2 - e.d34 ** 2 - 2 * x3 * x4) / (2 * y3)
    z4 = math.sqrt(max(e.d14 ** 2 - x4 ** 2 - y4 ** 2, 0.0))
    v4 = np.array([x4, y4, z4])
    return v1, v2, v3, v4
