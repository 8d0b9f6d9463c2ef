"""Classification and canonicalization tests."""

import math
import random
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tetratile import taxonomy
from tetratile.geom import SLOTS, SLOT_INDEX, EdgeSextuple, validate_edges
from tetratile.taxonomy import (
    AmbiguousEquality,
    GROUP_ALL_2PI_N,
    GROUP_EDMONDS,
    GROUP_NON_CHARACTERIZED,
    GROUP_ORIENTATION_PRESERVING,
    SLOT_PERMS,
    TYPES,
    TYPE_BY_LETTER,
    canonicalize,
    classify,
    group_of,
    known_tile_verdict,
    vertex_slot_permutations,
)

SQ3 = math.sqrt(3)


# --- slot permutation table ----------------------------------------------------

def test_slot_perm_table_shape():
    perms = vertex_slot_permutations()
    assert len(perms) == 24
    for p in perms:
        assert sorted(p) == list(range(6))


def test_slot_perm_matches_definition():
    # spot-check one transposition: swapping V3 and V4 exchanges slots
    # 13<->14 and 23<->24, fixing 12 and 34
    sigma = {1: 1, 2: 2, 3: 4, 4: 3}
    mapping = tuple(SLOT_INDEX[(sigma[i], sigma[j])] for (i, j) in SLOTS)
    assert mapping in SLOT_PERMS
    assert mapping[SLOT_INDEX[(1, 2)]] == SLOT_INDEX[(1, 2)]
    assert mapping[SLOT_INDEX[(1, 3)]] == SLOT_INDEX[(1, 4)]
    assert mapping[SLOT_INDEX[(3, 4)]] == SLOT_INDEX[(3, 4)]


# --- canonicalization ------------------------------------------------------------

def test_canonicalize_examples():
    assert canonicalize((4, 6, 6, 6, 6, 4)) == (4, 6, 6, 6, 6, 4)
    # swapping V3 and V4 must not change the canonical form
    swapped = (3, 5, 5, 10, 10, 4)
    image = tuple(swapped[SLOT_INDEX[(min(a, b), max(a, b))]]
                  for (a, b) in [({1: 1, 2: 2, 3: 4, 4: 3}[i], {1: 1, 2: 2, 3: 4, 4: 3}[j])
                                 for (i, j) in SLOTS])
    assert canonicalize(swapped) == canonicalize(image)


@given(st.lists(st.integers(3, 12), min_size=6, max_size=6))
@settings(max_examples=200, deadline=None)
def test_canonicalize_idempotent_and_invariant(vals):
    canon = canonicalize(vals)
    assert canonicalize(canon) == canon
    rng = random.Random(sum(vals))
    perm = rng.choice(SLOT_PERMS)
    permuted = tuple(vals[perm[k]] for k in range(6))
    assert canonicalize(permuted) == canon


@given(st.lists(st.integers(3, 8), min_size=6, max_size=6),
       st.lists(st.integers(3, 8), min_size=6, max_size=6))
@settings(max_examples=150, deadline=None)
def test_canonicalize_separates_orbits(a, b):
    # equal canonical forms exactly when some relabeling maps a to b
    same_orbit = any(tuple(a[p[k]] for k in range(6)) == tuple(b) for p in SLOT_PERMS)
    assert (canonicalize(a) == canonicalize(b)) == same_orbit


# --- the 25 types ---------------------------------------------------------------

def test_type_inventory():
    assert len(TYPES) == 25
    by_group = {}
    for t in TYPES:
        by_group[t.group] = by_group.get(t.group, 0) + 1
    assert by_group == {
        GROUP_ORIENTATION_PRESERVING: 10,
        GROUP_EDMONDS: 1,
        GROUP_ALL_2PI_N: 4,
        GROUP_NON_CHARACTERIZED: 10,
    }


def test_lengths_partitions_cover():
    partitions = sorted({t.lengths_partition for t in TYPES})
    assert (6,) in partitions            # all equal
    assert (1, 1, 1, 1, 1, 1) in partitions  # all distinct
    for t in TYPES:
        assert sum(t.lengths_partition) == 6


def _instance_for(type_id, values=(1.0, 1.08, 1.16, 1.24, 1.32, 1.4)):
    letters = sorted(set(type_id.pattern))
    assign = {ch: values[i] for i, ch in enumerate(letters)}
    return EdgeSextuple.of([assign[ch] for ch in type_id.pattern])


def test_classify_every_type_from_representative():
    for t in TYPES:
        e = _instance_for(t)
        validate_edges(e)  # near-regular perturbations stay valid
        assert classify(e).letter == t.letter


def test_classify_examples():
    assert classify((1, 1, 1, 1, 1, 1)).letter == "a"
    assert classify((2, SQ3, SQ3, SQ3, SQ3, 2)).letter == "b"
    assert classify((1.0, 1.1, 1.2, 1.3, 1.35, 1.4)).letter == "y"


def test_classify_scale_and_permutation_invariant():
    rng = random.Random(3)
    for t in TYPES:
        e = _instance_for(t)
        perm = rng.choice(SLOT_PERMS)
        permuted = EdgeSextuple.of([e[perm[k]] for k in range(6)])
        assert classify(permuted).letter == t.letter
        assert classify(e.scaled(3.7)).letter == t.letter


def test_classify_ambiguous_equality():
    with pytest.raises(AmbiguousEquality):
        classify((1.0, 1.0 + 5e-9, 1.2, 1.3, 1.35, 1.4))


def test_group_lookup():
    assert group_of(TYPE_BY_LETTER["c"]) == GROUP_EDMONDS
    assert group_of(TYPE_BY_LETTER["g"]) == GROUP_ALL_2PI_N
    assert group_of(TYPE_BY_LETTER["v"]) == GROUP_NON_CHARACTERIZED
    assert group_of(TYPE_BY_LETTER["b"]) == GROUP_ORIENTATION_PRESERVING


# --- tiling verdicts ---------------------------------------------------------------

def test_verdict_sommerville_1():
    v = known_tile_verdict(TYPE_BY_LETTER["b"], (2, SQ3, SQ3, SQ3, SQ3, 2))
    assert v.verdict == "tiles" and v.name == "Sommerville No. 1"
    # wrong ratio does not tile
    v2 = known_tile_verdict(TYPE_BY_LETTER["b"],
                            (2, 1.9, 2, 2, 1.9, 2))
    assert v2.verdict == "does-not-tile"


def test_verdict_edmonds():
    p_over_q = math.sqrt(2.0 / 3.0)
    edges = EdgeSextuple.of([p_over_q, 1, 1, p_over_q, 1, p_over_q])
    # pattern (p,q,q,p,q,p): p on a path, matches the path-letter layout
    t = classify(edges)
    assert t.letter == "c"
    v = known_tile_verdict(t, edges)
    assert v.verdict == "tiles"
    assert "non-orientation-preserving" in (v.detail or "")
    bad = EdgeSextuple.of([0.9, 1, 1, 0.9, 1, 0.9])
    assert known_tile_verdict(classify(bad), bad).verdict == "does-not-tile"


def test_verdict_regular_and_unknown():
    assert known_tile_verdict(TYPE_BY_LETTER["a"], (1,) * 6).verdict == "does-not-tile"
    e = _instance_for(TYPE_BY_LETTER["x"])
    assert known_tile_verdict(TYPE_BY_LETTER["x"], e).verdict == "unknown"


def test_verdict_sommerville_2():
    # star letter a = sqrt3, then b = sqrt2, c = 2, d = 1 in the type layout
    edges = EdgeSextuple.of([SQ3, 2, math.sqrt(2), SQ3, 1, math.sqrt(2)])
    t = classify(edges)
    assert t.letter == "q"
    assert known_tile_verdict(t, edges).name == "Sommerville No. 2"


def test_verdict_sommerville_3_and_4():
    som3 = EdgeSextuple.of([SQ3, SQ3, SQ3, 2, 2 * math.sqrt(2), 2])
    t3 = classify(som3)
    assert t3.letter == "j"
    assert known_tile_verdict(t3, som3).name == "Sommerville No. 3"
    a, b, c = math.sqrt(5) / 2, SQ3, 2.0
    som4 = EdgeSextuple.of([a, a, a, b, c, b])
    t4 = classify(som4)
    assert t4.letter == "j"
    assert known_tile_verdict(t4, som4).name == "Sommerville No. 4"


def test_verdict_goldberg_families_h_and_v():
    from tetratile.goldberg import FamilyParam, family_edges

    e1 = family_edges(FamilyParam(1, 0.45))
    t1 = classify(e1)
    assert t1.letter == "h"
    assert known_tile_verdict(t1, e1).verdict == "tiles"
    e2 = family_edges(FamilyParam(2, 0.52))
    t2 = classify(e2)
    assert t2.letter == "v"
    assert known_tile_verdict(t2, e2).verdict == "tiles"
    # Baumgartner's tile sits in the same family
    bt2 = EdgeSextuple.of([SQ3, 2, math.sqrt(11) / 2, SQ3, math.sqrt(11) / 2, SQ3 / 2])
    tb = classify(bt2)
    assert tb.letter == "v"
    assert known_tile_verdict(tb, bt2).verdict == "tiles"


def test_verdict_2pi_n_group_never_tiles():
    for letter in "gpwy":
        e = _instance_for(TYPE_BY_LETTER[letter])
        assert known_tile_verdict(TYPE_BY_LETTER[letter], e).verdict == "does-not-tile"
