"""Exhaustive search for tetrahedra whose dihedral angles are all 2*pi/n.

Any such angle has n in [3, 41]: n >= 3 because dihedrals are below pi, and
n < 42 by the angle-sum inequalities.  The search enumerates denominator
sextuples with incremental vertex/quadrilateral pruning, keeps those whose
angle determinant vanishes numerically, dedupes by canonical form, and then
puts each survivor through a three-stage validation (certified determinant
zero, edge reconstruction, exact round trip).  Exactly eleven candidates
survive: five known tiles and six non-tiles with bipartite-graph certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from . import lengraph, rigor, taxonomy
from .geom import (
    SLOTS,
    AngleSextuple,
    EdgeSextuple,
    GeometryError,
    NotRealizable,
    dihedral_angles,
    edges_from_angles,
    normalized_area,
    validate_edges,
)

__all__ = [
    "CandidateRecord",
    "UnmatchedCandidate",
    "N_MIN",
    "N_MAX",
    "KNOWN_TILES",
    "search_2pi_over_n",
    "validate_candidate",
    "verdict",
]

N_MIN, N_MAX = 3, 41

# The five tiles among all-2pi/n tetrahedra, by canonical denominator sextuple.
KNOWN_TILES = {
    (3, 6, 6, 8, 8, 4): "Sommerville No. 3",
    (4, 4, 4, 6, 6, 8): "Sommerville No. 2",
    (4, 4, 8, 8, 4, 6): "first Goldberg family, alpha = 2pi/8",
    (4, 5, 6, 10, 5, 4): "first Goldberg family, alpha = 2pi/5",
    (4, 6, 6, 6, 6, 4): "Sommerville No. 1",
}

# Catalog names for the six valid non-tiles, assigned after canonical sort.
NON_TILE_NAMES = {
    (3, 4, 5, 10, 6, 6): "NT-A",
    (3, 5, 5, 10, 10, 4): "NT-B",
    (3, 5, 10, 10, 6, 4): "NT-C",
    (3, 6, 10, 10, 10, 3): "NT-D",
    (4, 4, 4, 5, 6, 10): "NT-E",
    (4, 5, 6, 5, 6, 5): "NT-F",
}


class UnmatchedCandidate(GeometryError):
    """A valid all-2pi/n candidate that is neither a known tile nor a certified
    non-tile; this would be a genuine discovery and must surface loudly."""


@dataclass(frozen=True)
class CandidateRecord:
    denominators: tuple
    edges: EdgeSextuple
    area: float
    verdict: str  # "tiles" | "does-not-tile"
    name: str
    certificate: Optional[lengraph.NonTilingCertificate] = None

    def to_json(self) -> dict:
        return {
            "denominators": list(self.denominators),
            "edges": [round(v, 12) for v in self.edges],
            "normalized_area": round(self.area, 6),
            "verdict": self.verdict,
            "name": self.name,
            "certificate": self.certificate.to_json() if self.certificate else None,
        }


def _det4(m) -> float:
    (a, b, c, d), (e, f, g, h), (i, j, k, l), (p, q, r, s) = m
    kl_rs = k * s - l * r
    jl_qs = j * s - l * q
    jk_qr = j * r - k * q
    il_ps = i * s - l * p
    ik_pr = i * r - k * p
    ij_pq = i * q - j * p
    return (a * (f * kl_rs - g * jl_qs + h * jk_qr)
            - b * (e * kl_rs - g * il_ps + h * ik_pr)
            + c * (e * jl_qs - f * il_ps + h * ij_pq)
            - d * (e * jk_qr - f * ik_pr + g * ij_pq))


def _cos_matrix_rows(c12, c13, c14, c23, c24, c34, neg_one):
    return ((neg_one, c34, c24, c23),
            (c34, neg_one, c14, c13),
            (c24, c14, neg_one, c12),
            (c23, c13, c12, neg_one))


def _raw_search(det_filter: float = 1e-9):
    """Denominator sextuples passing the angle-sum pruning and a float
    determinant filter, restricted to n12 = min (necessary for canonicality)."""
    ns = range(N_MIN, N_MAX + 1)
    ang = {n: 2.0 * math.pi / n for n in ns}
    cos = {n: math.cos(2.0 * math.pi / n) for n in ns}
    pi = math.pi
    two_pi = 2.0 * math.pi
    hits = []
    for n12 in ns:
        t12 = ang[n12]
        for n13 in ns:
            if n13 < n12:
                continue
            t13 = ang[n13]
            for n14 in ns:
                if n14 < n12:
                    continue
                t14 = ang[n14]
                if t12 + t13 + t14 <= pi:  # vertex V1
                    continue
                for n23 in ns:
                    if n23 < n12:
                        continue
                    t23 = ang[n23]
                    for n24 in ns:
                        if n24 < n12:
                            continue
                        t24 = ang[n24]
                        if t12 + t23 + t24 <= pi:  # vertex V2
                            continue
                        if t13 + t14 + t23 + t24 >= two_pi:  # opposite pair {12,34}
                            continue
                        for n34 in ns:
                            if n34 < n12:
                                continue
                            t34 = ang[n34]
                            if t13 + t23 + t34 <= pi:  # vertex V3
                                continue
                            if t14 + t24 + t34 <= pi:  # vertex V4
                                continue
                            if t12 + t14 + t23 + t34 >= two_pi:  # pair {13,24}
                                continue
                            if t12 + t13 + t24 + t34 >= two_pi:  # pair {14,23}
                                continue
                            det = _det4(_cos_matrix_rows(
                                cos[n12], cos[n13], cos[n14],
                                cos[n23], cos[n24], cos[n34], -1.0))
                            if abs(det) < det_filter:
                                hits.append((n12, n13, n14, n23, n24, n34))
    return hits


def _interval_det(ns: tuple) -> rigor.Interval:
    cosv = [rigor.pi_multiple(2, n).cos() for n in ns]
    neg_one = rigor.Interval.point(-1.0)
    return _det4(_cos_matrix_rows(*cosv, neg_one))


def _tightened_det(ns: tuple, dps: int = 50):
    with mpmath.workdps(dps):
        cosv = [mpmath.cos(2 * mpmath.pi / n) for n in ns]
        m = _cos_matrix_rows(*cosv, mpmath.mpf(-1))
        return _det4(m)


_TIGHT_WIDTH = 1e-12
_TIGHT_MAG = 1e-30


@dataclass(frozen=True)
class Invalid:
    denominators: tuple
    stage: str
    detail: str


def validate_candidate(ns):
    """Three-stage validation of a denominator sextuple.

    1. the angle determinant vanishes: the outward-rounded interval value
       contains 0, and a 50-digit re-evaluation has magnitude below 1e-30
       (width budget 1e-12 on the double-precision interval);
    2. edge reconstruction succeeds with a positive area vector;
    3. the rebuilt tetrahedron's angles hit the exact 2pi/n targets to 1e-9.
    Returns a CandidateRecord or Invalid(stage).
    """
    ns = tuple(int(n) for n in ns)
    ds = _interval_det(ns)
    if not (ds.lo <= 0.0 <= ds.hi):
        return Invalid(ns, "determinant", f"interval {ds!r} excludes zero")
    if ds.width > _TIGHT_WIDTH:
        return Invalid(ns, "determinant", f"interval width {ds.width:.2e} too wide")
    tight = _tightened_det(ns)
    if abs(tight) > _TIGHT_MAG:
        return Invalid(ns, "determinant", f"50-digit value {float(tight):.2e} is nonzero")
    angles = AngleSextuple.from_pi_fractions([Fraction(2, n) for n in ns])
    try:
        edges = edges_from_angles(angles)
    except GeometryError as exc:
        return Invalid(ns, "reconstruction", str(exc))
    back = dihedral_angles(validate_edges(edges))
    err = max(abs(b - 2.0 * math.pi / n) for b, n in zip(back.values, ns))
    if err > 1e-9:
        return Invalid(ns, "round-trip", f"angle error {err:.2e}")
    area = normalized_area(validate_edges(edges))
    return _with_verdict(ns, edges, area)


def _with_verdict(ns, edges, area) -> CandidateRecord:
    canon = taxonomy.canonicalize(ns)
    if canon in KNOWN_TILES:
        return CandidateRecord(canon, edges, area, "tiles", KNOWN_TILES[canon])
    # derive the non-tiling certificate from the candidate itself
    angles = AngleSextuple.from_pi_fractions([Fraction(2, n) for n in ns])
    labeling = _labeling_from_edges(edges)
    cert = lengraph.non_tiling_certificate(angles, labeling,
                                           candidate=NON_TILE_NAMES.get(canon, str(canon)))
    if cert is None:
        raise UnmatchedCandidate(
            f"candidate {canon} is neither a known tile nor certifiably a non-tile")
    return CandidateRecord(canon, edges, area, "does-not-tile",
                           NON_TILE_NAMES.get(canon, str(canon)), cert)


def _labeling_from_edges(edges: EdgeSextuple, tol: float = 1e-9) -> lengraph.EdgeLabeling:
    letters = {}
    out = []
    for v in edges:
        key = next((k for k in letters if abs(k - v) <= tol * max(k, v)), None)
        if key is None:
            letters[v] = "abcdef"[len(letters)]
            key = v
        out.append(letters[key])
    return lengraph.EdgeLabeling("".join(out))


def search_2pi_over_n() -> list:
    """All tetrahedra with every dihedral of the form 2pi/n, canonical order."""
    seen = {}
    for ns in _raw_search():
        canon = taxonomy.canonicalize(ns)
        if canon in seen:
            continue
        result = validate_candidate(canon)
        if isinstance(result, CandidateRecord):
            seen[canon] = result
    return [seen[k] for k in sorted(seen)]
