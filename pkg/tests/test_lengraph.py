"""Stacking-graph tests: construction, parity, templates, certificates."""

import math
from fractions import Fraction

import pytest

from tetratile import lengraph
from tetratile.geom import SLOTS, SLOT_INDEX, AngleSextuple
from tetratile.lengraph import (
    AngleForm,
    AngleNotRationalMultiple,
    CONSTRAINT_CATALOG,
    EdgeLabeling,
    StackingRelation,
    UnknownLetter,
    angle_constraints,
    angle_equality_classes,
    build_graph,
    has_odd_closed_walk,
    non_tiling_certificate,
    verify_constraint_catalog,
)
from tetratile.taxonomy import TYPES, TYPE_BY_LETTER


# --- graph construction ----------------------------------------------------------

def test_build_graph_all_distinct():
    # all six lengths distinct: the slot-13 letter connects (d12,d23) to
    # (d14,d34), plus the mirrored component
    g = build_graph(EdgeLabeling("abcdef"), "b")
    assert set(g.edges) == {
        ((("a", "d"), ("c", "f")), frozenset({(1, 3)})),
        ((("d", "a"), ("f", "c")), frozenset({(1, 3)})),
    }


def test_build_graph_type_g_single_edge():
    g = build_graph(EdgeLabeling("abccba"), "a")
    assert len(g.edges) == 1
    (u, v), labels = g.edges[0]
    assert {u, v} == {("b", "c"), ("c", "b")}
    assert labels == frozenset({(1, 2), (3, 4)})


def test_build_graph_type_h_letter_c_path():
    g = build_graph(EdgeLabeling("abccbb"), "c")
    assert set(g.nodes) == {("a", "b"), ("b", "b"), ("b", "a")}
    assert len(g.edges) == 2
    for _, labels in g.edges:
        assert labels == frozenset({(1, 4), (2, 3)})


def test_build_graph_unknown_letter():
    with pytest.raises(UnknownLetter):
        build_graph(EdgeLabeling("abccbb"), "z")


def test_build_graph_invariant_under_letter_bijection():
    to_weird = str.maketrans("abcdef", "uvwxyz")
    to_plain = str.maketrans("uvwxyz", "abcdef")

    def norm(g):
        out = []
        for (u, v), labels in g.edges:
            uu = tuple(x.translate(to_plain) for x in u)
            vv = tuple(x.translate(to_plain) for x in v)
            out.append((tuple(sorted((uu, vv))), labels))
        return sorted(out)

    for t in TYPES:
        lab = EdgeLabeling(t.pattern)
        renamed = EdgeLabeling(t.pattern.translate(to_weird))
        for letter in lab.letters:
            g1 = build_graph(lab, letter)
            g2 = build_graph(renamed, letter.translate(to_weird))
            assert norm(g1) == norm(g2), (t.letter, letter)


# --- odd closed walks --------------------------------------------------------------

def test_odd_walk_simple():
    g = build_graph(EdgeLabeling("abcdef"), "a")
    odd, coloring = has_odd_closed_walk(g)
    assert not odd
    assert coloring is not None
    for (u, v), _ in g.edges:
        assert coloring[u] != coloring[v]


def test_odd_walk_loop():
    # slot-34 letter of the five-equal pattern: both node pairs coincide
    g = build_graph(EdgeLabeling("aaaaab"), "b")
    odd, coloring = has_odd_closed_walk(g)
    assert odd and coloring is None


def test_odd_walk_type_m_triangles():
    g = build_graph(EdgeLabeling("abcaaa"), "a")
    odd, _ = has_odd_closed_walk(g)
    assert odd  # two triangles through the (a,a) node


def _walk_oracle(g, max_len=12):
    """Brute force: does some closed walk of odd length <= max_len exist?"""
    nodes = list(g.nodes)
    ix = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    adj = [[0] * n for _ in range(n)]
    for (u, v), _ in g.edges:
        adj[ix[u]][ix[v]] = 1
        adj[ix[v]][ix[u]] = 1
    power = [row[:] for row in adj]
    for k in range(1, max_len + 1):
        if k % 2 == 1 and any(power[i][i] for i in range(n)):
            return True
        power = [[min(1, sum(power[i][m] * adj[m][j] for m in range(n)))
                  for j in range(n)] for i in range(n)]
    return False


def test_odd_walk_matches_bruteforce_on_all_types():
    for t in TYPES:
        lab = EdgeLabeling(t.pattern)
        for letter in lab.letters:
            g = build_graph(lab, letter)
            odd, _ = has_odd_closed_walk(g)
            assert odd == _walk_oracle(g), (t.letter, letter)


# --- constraint templates ------------------------------------------------------------

def test_catalog_matches_derivation():
    verify_constraint_catalog()


def test_symmetry_classes_type_h():
    classes = angle_equality_classes(EdgeLabeling("abccbb"))
    as_sets = {frozenset(c) for c in classes}
    assert frozenset({(1, 3), (2, 4)}) in as_sets
    assert frozenset({(1, 4), (2, 3)}) in as_sets


def test_template_type_x():
    derived = angle_constraints(EdgeLabeling(TYPE_BY_LETTER["x"].pattern))
    forms = {tpl for tpl in derived if isinstance(tpl, AngleForm)}
    assert {frozenset(t.slots) for t in forms} == {
        frozenset({(1, 3)}), frozenset({(1, 4)}),
        frozenset({(2, 4)}), frozenset({(3, 4)})}
    assert all(t.numerator == 1 for t in forms)
    rels = [tpl for tpl in derived if isinstance(tpl, StackingRelation)]
    assert len(rels) == 1
    assert rels[0].even_terms == frozenset({0, 1})


def test_template_type_r_same_parity():
    derived = angle_constraints(EdgeLabeling(TYPE_BY_LETTER["r"].pattern))
    rels = [tpl for tpl in derived if isinstance(tpl, StackingRelation)]
    assert len(rels) == 1
    assert rels[0].same_parity_classes == (frozenset({0, 1, 2}),)
    assert rels[0].even_terms == frozenset()


def test_template_type_h_merged_equal_slots():
    derived = angle_constraints(EdgeLabeling(TYPE_BY_LETTER["h"].pattern))
    rels = [tpl for tpl in derived if isinstance(tpl, StackingRelation)]
    assert len(rels) == 1
    assert rels[0].terms == (frozenset({(1, 3), (2, 4)}), frozenset({(3, 4)}))
    assert rels[0].even_terms == frozenset({0, 1})


def test_all_2pi_n_types_fully_pinned():
    for letter in "gpwy":
        derived = angle_constraints(EdgeLabeling(TYPE_BY_LETTER[letter].pattern))
        covered = set()
        for tpl in derived:
            if isinstance(tpl, AngleForm):
                covered |= tpl.slots
        assert covered == set(SLOTS)


# --- non-tiling certificates -----------------------------------------------------------

def _angles_2pi(ns):
    return AngleSextuple.from_pi_fractions([Fraction(2, n) for n in ns])


def test_certificate_nt_a():
    cert = non_tiling_certificate(_angles_2pi((3, 4, 5, 10, 6, 6)),
                                  EdgeLabeling("abcdef"), candidate="NT-A")
    assert cert is not None
    assert cert.slot == (1, 2)
    assert cert.denominator == 3
    nodes = {frozenset((u, v)) for (u, v), _ in cert.graph.edges}
    assert frozenset((("b", "d"), ("c", "e"))) in nodes  # (d13,d23)-(d14,d24)
    assert cert.fallback_bipartition is not None


def test_certificate_nt_f():
    # d13 = d23 and d14 = d24 as the numerics confirm
    cert = non_tiling_certificate(_angles_2pi((4, 5, 6, 5, 6, 5)),
                                  EdgeLabeling("abcbcd"), candidate="NT-F")
    assert cert is not None
    assert cert.slot == (1, 3)
    assert cert.denominator == 5
    assert set(cert.letter_slots) == {(1, 3), (2, 3)}


def test_certificate_sommerville_1_none():
    cert = non_tiling_certificate(_angles_2pi((4, 6, 6, 6, 6, 4)),
                                  EdgeLabeling("abbbba"))
    assert cert is None


def test_certificate_needs_exact_tags():
    a = AngleSextuple.from_radians([2 * math.pi / 5] * 6)
    with pytest.raises(AngleNotRationalMultiple):
        non_tiling_certificate(a, EdgeLabeling("aaaaaa"))
