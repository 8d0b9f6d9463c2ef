"""Classification of tetrahedra into 25 edge-equality types.

A type is a pattern of equalities among the six edge slots, up to vertex
permutation (reflections included).  Fifteen types have fully characterized
tiling behavior; the remaining ten are handled by the casework pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Optional, Sequence

from .geom import SLOTS, SLOT_INDEX, EdgeSextuple, GeometryError

__all__ = [
    "TypeId",
    "TYPES",
    "TYPE_BY_LETTER",
    "GROUP_ORIENTATION_PRESERVING",
    "GROUP_EDMONDS",
    "GROUP_ALL_2PI_N",
    "GROUP_NON_CHARACTERIZED",
    "AmbiguousEquality",
    "vertex_slot_permutations",
    "canonicalize",
    "classify",
    "group_of",
    "known_tile_verdict",
    "TileVerdict",
]

GROUP_ORIENTATION_PRESERVING = "orientation-preserving"
GROUP_EDMONDS = "Edmonds"
GROUP_ALL_2PI_N = "2pi/n"
GROUP_NON_CHARACTERIZED = "non-characterized"


class AmbiguousEquality(GeometryError):
    """Two lengths differ by more than exact zero but less than the tolerance."""


def vertex_slot_permutations() -> tuple:
    """The 24 actions of vertex relabelings on the six edge slots.

    Entry p satisfies: relabeled[slot] = original[p[slot]].  Generated from
    the vertex permutations rather than written out by hand; a transcription
    slip here would silently corrupt every search built on top.
    """
    out = []
    for sigma in permutations((1, 2, 3, 4)):
        mapping = tuple(SLOT_INDEX[(sigma[i - 1], sigma[j - 1])] for (i, j) in SLOTS)
        out.append(mapping)
    return tuple(sorted(set(out)))


SLOT_PERMS = vertex_slot_permutations()


def canonicalize(sextuple: Sequence) -> tuple:
    """Lexicographic minimum of a slot sextuple over all vertex relabelings.

    Works for lengths, angle denominators, or any comparable entries; two
    sextuples describe the same unlabeled tetrahedron data exactly when their
    canonical forms coincide.
    """
    vals = tuple(sextuple)
    if len(vals) != 6:
        raise GeometryError(f"need a sextuple, got {len(vals)} entries")
    return min(tuple(vals[p[k]] for k in range(6)) for p in SLOT_PERMS)


def _pattern_of(values: Sequence) -> str:
    """First-occurrence letter pattern of a sextuple, e.g. (5,7,5) -> 'aba'."""
    letters = {}
    out = []
    for v in values:
        if v not in letters:
            letters[v] = "abcdef"[len(letters)]
        out.append(letters[v])
    return "".join(out)


def canonical_pattern(values: Sequence) -> str:
    """Equality pattern canonicalized over vertex relabelings."""
    return min(_pattern_of([values[p[k]] for k in range(6)]) for p in SLOT_PERMS)


@dataclass(frozen=True)
class TypeId:
    letter: str
    pattern: str  # slot letters in (12,13,14,23,24,34) order
    group: str

    @property
    def lengths_partition(self) -> tuple:
        counts = {}
        for ch in self.pattern:
            counts[ch] = counts.get(ch, 0) + 1
        return tuple(sorted(counts.values(), reverse=True))


_TYPE_ROWS = [
    ("a", "aaaaaa", GROUP_ORIENTATION_PRESERVING),
    ("b", "abaaba", GROUP_ORIENTATION_PRESERVING),
    ("c", "aabbba", GROUP_EDMONDS),
    ("d", "aaaaab", GROUP_ORIENTATION_PRESERVING),
    ("e", "aaabbb", GROUP_ORIENTATION_PRESERVING),
    ("f", "babaaa", GROUP_ORIENTATION_PRESERVING),
    ("g", "abccba", GROUP_ALL_2PI_N),
    ("h", "abccbb", GROUP_NON_CHARACTERIZED),
    ("i", "abaaca", GROUP_ORIENTATION_PRESERVING),
    ("j", "aaabcb", GROUP_ORIENTATION_PRESERVING),
    ("k", "bcbaaa", GROUP_ORIENTATION_PRESERVING),
    ("l", "abbcca", GROUP_ORIENTATION_PRESERVING),
    ("m", "abcaaa", GROUP_NON_CHARACTERIZED),
    ("n", "abaacb", GROUP_NON_CHARACTERIZED),
    ("o", "abcacb", GROUP_NON_CHARACTERIZED),
    ("p", "acbbda", GROUP_ALL_2PI_N),
    ("q", "acbadb", GROUP_ORIENTATION_PRESERVING),
    ("r", "aaabcd", GROUP_NON_CHARACTERIZED),
    ("s", "abcddd", GROUP_NON_CHARACTERIZED),
    ("t", "abaacd", GROUP_NON_CHARACTERIZED),
    ("u", "aabbcd", GROUP_NON_CHARACTERIZED),
    ("v", "abcacd", GROUP_NON_CHARACTERIZED),
    ("w", "bacdae", GROUP_ALL_2PI_N),
    ("x", "abcade", GROUP_NON_CHARACTERIZED),
    ("y", "abcdef", GROUP_ALL_2PI_N),
]

TYPES = tuple(TypeId(letter, pattern, group) for letter, pattern, group in _TYPE_ROWS)
TYPE_BY_LETTER = {t.letter: t for t in TYPES}
_TYPE_BY_CANONICAL = {canonical_pattern(t.pattern): t for t in TYPES}
assert len(_TYPE_BY_CANONICAL) == 25, "type patterns must be pairwise inequivalent"


def _equality_classes(values: Sequence[float], eq_tol: float, exact: bool):
    """Group the six values into equality classes; returns class index per slot.

    With exact=True, values are compared with ==.  Otherwise two values are
    equal when their relative difference is below eq_tol, and a pair landing
    between eq_tol and 10*eq_tol raises AmbiguousEquality: the data is too
    noisy to classify.
    """
    ids = [None] * 6
    reps = []  # class representatives
    for k, v in enumerate(values):
        assigned = None
        for ci, rep in enumerate(reps):
            scale = max(abs(rep), abs(v))
            if exact:
                same = (v == rep)
                near = False
            else:
                rel = abs(v - rep) / scale
                same = rel <= eq_tol
                near = eq_tol < rel <= 10 * eq_tol
            if same:
                assigned = ci
                break
            if near:
                raise AmbiguousEquality(
                    f"lengths {rep} and {v} differ by a relative {abs(v - rep) / scale:.2e},"
                    f" within 10x of the tolerance {eq_tol}")
        if assigned is None:
            reps.append(v)
            assigned = len(reps) - 1
        ids[k] = assigned
    return ids


def classify(edges, eq_tol: float = 1e-9, exact: bool = False) -> TypeId:
    """Map an edge sextuple to its equality type under the given tolerance."""
    e = edges if isinstance(edges, EdgeSextuple) else EdgeSextuple.of(edges)
    classes = _equality_classes(list(e), eq_tol, exact)
    key = canonical_pattern(classes)
    try:
        return _TYPE_BY_CANONICAL[key]
    except KeyError:  # cannot happen: all partitions of 6 slots are covered
        raise GeometryError(f"unclassifiable equality pattern {key}") from None


def group_of(t: TypeId) -> str:
    return t.group


@dataclass(frozen=True)
class TileVerdict:
    verdict: str  # "tiles" | "does-not-tile" | "unknown"
    name: Optional[str] = None
    detail: Optional[str] = None

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "name": self.name, "detail": self.detail}


_REL_TOL = 1e-9


def _close(a: float, b: float, tol: float = _REL_TOL) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b), 1.0)


def _letter_values(e: EdgeSextuple, pattern: str, perm) -> dict:
    """Letter -> length mapping for one slot assignment; None if inconsistent."""
    out = {}
    for k in range(6):
        letter = pattern[k]
        v = e[perm[k]]
        if letter in out:
            if not _close(out[letter], v):
                return None
        else:
            out[letter] = v
    # distinct letters must carry distinct lengths, else it is a finer type
    letters = list(out)
    for i in range(len(letters)):
        for j in range(i + 1, len(letters)):
            if _close(out[letters[i]], out[letters[j]]):
                return None
    return out


def _match_letters(e: EdgeSextuple, t: TypeId):
    """All consistent letter->length assignments of e to t's pattern."""
    seen = []
    for perm in SLOT_PERMS:
        vals = _letter_values(e, t.pattern, perm)
        if vals is not None and vals not in seen:
            seen.append(vals)
    return seen


def known_tile_verdict(t: TypeId, edges) -> TileVerdict:
    """Tiling verdict for the fully characterized types; Unknown otherwise.

    Ratio criteria are taken from the classification literature: type (b)
    tiles only as Sommerville No. 1, (c) only at Edmonds' two ratios, (j) only
    as Sommerville No. 3 or No. 4, (q) only as Sommerville No. 2.  Types (h)
    and (v) report one-parameter family membership (first and second Goldberg
    families) as a sufficient condition.
    """
    e = edges if isinstance(edges, EdgeSextuple) else EdgeSextuple.of(edges)
    if classify(e).letter != t.letter:
        raise GeometryError(f"edges {tuple(e)} are not of type ({t.letter})")

    def ratio_check(name, predicate):
        for vals in _match_letters(e, t):
            if predicate(vals):
                return TileVerdict("tiles", name=name)
        return None

    if t.group == GROUP_ALL_2PI_N:
        return TileVerdict("does-not-tile",
                           detail="every angle would need the form 2pi/n; no such tile has this type")
    if t.letter == "a":
        return TileVerdict("does-not-tile", detail="regular tetrahedron")
    if t.letter == "b":
        hit = ratio_check("Sommerville No. 1",
                          lambda v: _close(v["a"] / v["b"], math.sqrt(3) / 2))
        return hit or TileVerdict("does-not-tile", detail="a/b != sqrt(3)/2")
    if t.letter == "c":
        hit = ratio_check("Edmonds tile",
                          lambda v: _close(v["a"] / v["b"], math.sqrt(2.0 / 3.0))
                          or _close(v["a"] / v["b"], math.sqrt(3.0 / 2.0)))
        if hit:
            return TileVerdict("tiles", name=hit.name,
                               detail="non-orientation-preserving only")
        return TileVerdict("does-not-tile", detail="a/b not in {sqrt(2/3), sqrt(3/2)}")
    if t.letter == "j":
        hit = (ratio_check("Sommerville No. 3",
                           lambda v: _close(v["b"] / v["a"], 2 / math.sqrt(3))
                           and _close(v["c"] / v["a"], 2 * math.sqrt(2) / math.sqrt(3)))
               or ratio_check("Sommerville No. 4",
                              lambda v: _close(v["b"] / v["a"], math.sqrt(3) / (math.sqrt(5) / 2))
                              and _close(v["c"] / v["a"], 2 / (math.sqrt(5) / 2))))
        return hit or TileVerdict("does-not-tile", detail="not a Sommerville No. 3/4 ratio")
    if t.letter == "q":
        hit = ratio_check("Sommerville No. 2",
                          lambda v: _close(v["b"] / v["a"], math.sqrt(2) / math.sqrt(3))
                          and _close(v["c"] / v["a"], 2 / math.sqrt(3))
                          and _close(v["d"] / v["a"], 1 / math.sqrt(3)))
        return hit or TileVerdict("does-not-tile", detail="not the Sommerville No. 2 ratio")
    if t.letter == "h":
        hit = ratio_check("first Goldberg family",
                          lambda v: _close(v["c"] ** 2, v["b"] ** 2 + v["a"] ** 2 / 3.0))
        if hit:
            return TileVerdict("tiles", name=hit.name)
        return TileVerdict("unknown", detail="type (h) outside the known family")
    if t.letter == "v":
        hit = ratio_check("second Goldberg family",
                          lambda v: _close(v["a"] ** 2, v["c"] ** 2 + v["d"] ** 2 / 3.0)
                          and _close(v["b"] ** 2, v["a"] ** 2 + 4.0 * v["d"] ** 2 / 3.0))
        if hit:
            return TileVerdict("tiles", name=hit.name)
        return TileVerdict("unknown", detail="type (v) outside the known family")
    if t.group == GROUP_ORIENTATION_PRESERVING:
        return TileVerdict("does-not-tile",
                           detail="orientation-preserving type with no tiling ratio")
    return TileVerdict("unknown")
