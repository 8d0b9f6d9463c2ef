"""Edge-length graphs: the combinatorics of stacking tetrahedra around an edge.

For a tetrahedron with an edge labeling (one abstract letter per slot) and a
target letter d, the d-graph has a node for each ordered pair of letters and,
for every slot (i,j) carrying d, an edge joining (d_ik, d_jk) to (d_il, d_jl)
labeled {i,j} (both orientations of (i,j) contribute, so graphs come with a
mirror image; coinciding endpoints make loops).  Closed walks in this graph
are exactly the ways copies of the tetrahedron can wrap 2*pi around an edge
of length d, which turns bipartiteness and cycle parity into linear
constraints on the dihedral angles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Optional, Sequence

from .geom import SLOTS, SLOT_INDEX, AngleSextuple, GeometryError

__all__ = [
    "EdgeLabeling",
    "EdgeLengthGraph",
    "AngleForm",
    "StackingRelation",
    "NonTilingCertificate",
    "UnknownLetter",
    "AngleNotRationalMultiple",
    "build_graph",
    "has_odd_closed_walk",
    "angle_constraints",
    "angle_equality_classes",
    "non_tiling_certificate",
    "CONSTRAINT_CATALOG",
    "verify_constraint_catalog",
]


class UnknownLetter(GeometryError):
    pass


class AngleNotRationalMultiple(GeometryError):
    pass


@dataclass(frozen=True)
class EdgeLabeling:
    """Letters for the six slots in (12,13,14,23,24,34) order, e.g. 'abccbb'."""

    pattern: str

    def __post_init__(self):
        if len(self.pattern) != 6:
            raise GeometryError(f"labeling needs six letters, got {self.pattern!r}")

    def letter(self, i: int, j: int) -> str:
        return self.pattern[SLOT_INDEX[(i, j)]]

    @property
    def letters(self) -> tuple:
        return tuple(sorted(set(self.pattern)))

    def slots_of(self, letter: str) -> tuple:
        return tuple(SLOTS[k] for k in range(6) if self.pattern[k] == letter)


@dataclass(frozen=True)
class EdgeLengthGraph:
    """Multigraph on ordered letter pairs; parallel edges merge their labels."""

    letter: str
    nodes: tuple  # ordered letter pairs
    edges: tuple  # ((u, v), frozenset of slots) with u <= v; u == v is a loop

    def adjacency(self) -> dict:
        adj = {n: [] for n in self.nodes}
        for (u, v), labels in self.edges:
            adj[u].append((v, labels))
            if u != v:
                adj[v].append((u, labels))
        return adj

    def to_json(self) -> dict:
        return {
            "letter": self.letter,
            "nodes": [list(n) for n in self.nodes],
            "edges": [{"between": [list(u), list(v)],
                       "labels": sorted(f"{i}{j}" for i, j in labels)}
                      for (u, v), labels in self.edges],
        }


def build_graph(labeling: EdgeLabeling, letter: str) -> EdgeLengthGraph:
    """The letter's stacking graph, mirror edges and loops included."""
    if letter not in labeling.pattern:
        raise UnknownLetter(f"letter {letter!r} does not occur in {labeling.pattern!r}")
    edge_map = {}
    nodes = set()
    for (i, j) in labeling.slots_of(letter):
        for a, b in ((i, j), (j, i)):
            k, l = (x for x in (1, 2, 3, 4) if x not in (a, b))
            u = (labeling.letter(a, k), labeling.letter(b, k))
            v = (labeling.letter(a, l), labeling.letter(b, l))
            key = (min(u, v), max(u, v))
            edge_map.setdefault(key, set()).add((min(i, j), max(i, j)))
            nodes.update((u, v))
    edges = tuple(sorted((key, frozenset(labels)) for key, labels in edge_map.items()))
    return EdgeLengthGraph(letter, tuple(sorted(nodes)), edges)


def _components(g: EdgeLengthGraph) -> list:
    """Connected components as lists of nodes (isolated nodes cannot occur)."""
    adj = g.adjacency()
    seen = set()
    comps = []
    for start in g.nodes:
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            n = stack.pop()
            comp.append(n)
            for m, _ in adj[n]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        comps.append(sorted(comp))
    return comps


def has_odd_closed_walk(g: EdgeLengthGraph):
    """(True, None) if some component has an odd closed walk (loops count);
    otherwise (False, 2-coloring witness)."""
    for (u, v), _ in g.edges:
        if u == v:
            return True, None
    adj = g.adjacency()
    color = {}
    for start in g.nodes:
        if start in color:
            continue
        color[start] = 0
        queue = [start]
        while queue:
            n = queue.pop()
            for m, _ in adj[n]:
                if m not in color:
                    color[m] = 1 - color[n]
                    queue.append(m)
                elif color[m] == color[n]:
                    return True, None
    return False, color


# ---------------------------------------------------------------------------
# Constraint templates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AngleForm:
    """All angles on `slots` are equal and of the form numerator*pi/n.

    numerator 1 when the relevant graph component has no odd closed walk
    (even stacking count), else 2.
    """

    slots: frozenset
    numerator: int

    def sort_key(self):
        return (0, min(self.slots), self.numerator)

    def to_json(self) -> dict:
        return {"kind": "angle_form",
                "slots": sorted(f"{i}{j}" for i, j in self.slots),
                "form": f"{self.numerator}pi/n"}


@dataclass(frozen=True)
class StackingRelation:
    """sum over terms of n_t * theta_t = 2*pi, theta_t shared by the term's slots.

    even_terms: indices of terms whose coefficient must be even.
    same_parity_classes: groups of term indices forced to share parity.
    """

    letter: str
    terms: tuple  # tuple of frozensets of slots, sorted by min slot
    even_terms: frozenset
    same_parity_classes: tuple

    def sort_key(self):
        return (1, min(min(t) for t in self.terms), self.letter)

    def to_json(self) -> dict:
        return {
            "kind": "stacking_relation",
            "letter": self.letter,
            "terms": [sorted(f"{i}{j}" for i, j in t) for t in self.terms],
            "even_terms": sorted(self.even_terms),
            "same_parity_classes": [sorted(c) for c in self.same_parity_classes],
        }


def angle_equality_classes(labeling: EdgeLabeling) -> list:
    """Slot classes forced to share a dihedral angle by labeling symmetries.

    A vertex relabeling that maps the pattern to itself is an isometry of any
    tetrahedron of this type, so its slot orbits carry equal angles.
    """
    pattern = labeling.pattern
    stabilizer = []
    for sigma in permutations((1, 2, 3, 4)):
        mapping = [SLOT_INDEX[(sigma[i - 1], sigma[j - 1])] for (i, j) in SLOTS]
        if all(pattern[mapping[k]] == pattern[k] for k in range(6)):
            stabilizer.append(mapping)
    # orbits of the stabilizer action
    parent = list(range(6))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for mapping in stabilizer:
        for k in range(6):
            a, b = find(k), find(mapping[k])
            if a != b:
                parent[a] = b
    classes = {}
    for k in range(6):
        classes.setdefault(find(k), set()).add(SLOTS[k])
    return [frozenset(c) for c in classes.values()]


def _component_parities(comp_edges, groups):
    """Achievable parity vectors of group coefficients over closed walks.

    comp_edges: list of (edge_id, labels) within one component;
    groups: list of frozensets of slots.  A closed walk traverses each edge
    some number of times (edge parities form the GF(2) cycle space) and
    attributes each traversal of a multi-label edge to one of its labels.
    Enumerates the full achievable set; graphs here are tiny.
    """
    n_edges = len(comp_edges)
    # cycle space basis via spanning structure over GF(2)
    nodes = sorted({n for (_, (u, v), _) in comp_edges for n in (u, v)})
    node_ix = {n: i for i, n in enumerate(nodes)}
    basis = []
    tree = {}  # node -> (parent_node, edge_index) in BFS forest
    seen = set()
    adj = {}
    for eix, (eid, (u, v), labels) in enumerate(comp_edges):
        if u == v:
            vec = [0] * n_edges
            vec[eix] = 1
            basis.append(tuple(vec))
        else:
            adj.setdefault(u, []).append((v, eix))
            adj.setdefault(v, []).append((u, eix))
    root = nodes[0]
    seen.add(root)
    order = [root]
    path_edges = {root: []}  # node -> sorted edge-parity vector from root
    queue = [root]
    while queue:
        n = queue.pop()
        for m, eix in adj.get(n, ()):
            if m not in seen:
                seen.add(m)
                vec = list(path_edges[n])
                vec.append(eix)
                path_edges[m] = vec
                queue.append(m)
            # non-tree or tree edge: handled below by fundamental cycles
    # fundamental cycles: for every edge (u,v), cycle = path(u) ^ path(v) ^ {e}
    used_tree = set()
    for eix, (eid, (u, v), labels) in enumerate(comp_edges):
        if u == v:
            continue
        vec = [0] * n_edges
        for k in path_edges[u]:
            vec[k] ^= 1
        for k in path_edges[v]:
            vec[k] ^= 1
        vec[eix] ^= 1
        if any(vec):
            basis.append(tuple(vec))
    # span of basis (deduplicated)
    space = {tuple([0] * n_edges)}
    for b in basis:
        space |= {tuple(x ^ y for x, y in zip(v, b)) for v in space}
    # map edge parities to achievable group parities, over all label splits
    group_of_slot = {}
    for gix, g in enumerate(groups):
        for s in g:
            group_of_slot[s] = gix
    achievable = set()
    for c in space:
        # per-edge parity attributions to labels: for single-label edges fixed,
        # for multi-label edges all splits with the right sum
        per_edge_options = []
        for eix, (eid, (u, v), labels) in enumerate(comp_edges):
            labs = sorted(labels)
            opts = []
            for split in product((0, 1), repeat=len(labs)):
                if sum(split) % 2 == c[eix]:
                    opts.append(tuple(zip(labs, split)))
            per_edge_options.append(opts)
        for combo in product(*per_edge_options):
            gvec = [0] * len(groups)
            for edge_attr in combo:
                for slot, par in edge_attr:
                    gvec[group_of_slot[slot]] ^= par
            achievable.add(tuple(gvec))
    return achievable


def angle_constraints(labeling: EdgeLabeling) -> frozenset:
    """Constraint templates derived from all letter graphs of a labeling.

    One template per connected component of each letter's graph: an AngleForm
    when the component's slots are all forced equal, otherwise a
    StackingRelation with coefficient parity classes.  Mirror components
    produce duplicate templates and are deduplicated.
    """
    sym = angle_equality_classes(labeling)
    templates = set()
    for letter in labeling.letters:
        g = build_graph(labeling, letter)
        comps = _components(g)
        for comp in comps:
            comp_set = set(comp)
            comp_edges = []
            for eid, ((u, v), labels) in enumerate(g.edges):
                if u in comp_set:
                    comp_edges.append((eid, (u, v), labels))
            if not comp_edges:
                continue
            slots = set()
            for _, _, labels in comp_edges:
                slots |= labels
            groups = sorted(
                {frozenset(cls & slots) for cls in sym if cls & slots},
                key=lambda s: min(s))
            if len(groups) == 1:
                sub = EdgeLengthGraph(letter, tuple(comp),
                                      tuple(((u, v), labels) for _, (u, v), labels in comp_edges))
                odd, _ = has_odd_closed_walk(sub)
                templates.add(AngleForm(frozenset(groups[0]), 2 if odd else 1))
            else:
                achievable = _component_parities(comp_edges, groups)
                even = frozenset(
                    gix for gix in range(len(groups))
                    if all(v[gix] == 0 for v in achievable))
                # same-parity classes among non-even terms
                rest = [gix for gix in range(len(groups)) if gix not in even]
                classes = []
                for gix in rest:
                    placed = False
                    for cls in classes:
                        rep = next(iter(cls))
                        if all(v[gix] == v[rep] for v in achievable):
                            cls.add(gix)
                            placed = True
                            break
                    if not placed:
                        classes.append({gix})
                same = tuple(sorted(frozenset(c) for c in classes if len(c) > 1))
                templates.add(StackingRelation(letter, tuple(groups), even, same))
    return frozenset(templates)


# ---------------------------------------------------------------------------
# Curated catalog for the ten non-characterized types (double-entry bookkeeping:
# the derivation above must reproduce these rows exactly, or the build fails).
# ---------------------------------------------------------------------------

def _af(slots, num):
    return AngleForm(frozenset(SLOTS[k] for k in slots), num)


def _sr(letter, term_slots, even, same):
    terms = tuple(frozenset(SLOTS[k] for k in t) for t in term_slots)
    return StackingRelation(letter, terms, frozenset(even), tuple(frozenset(s) for s in same))


CONSTRAINT_CATALOG = {
    # slots are indices into (12,13,14,23,24,34)
    "h": frozenset({
        _af([0], 1),                       # theta12 = pi/n
        _sr("b", [[1, 4], [5]], [0, 1], []),  # n(13=24) + n34, both even
        _af([2, 3], 1),                    # theta14 = theta23 = pi/n
    }),
    "m": frozenset({
        _af([1], 1), _af([2], 1),
        _sr("a", [[0], [3], [4], [5]], [3], [[0, 1, 2]]),
    }),
    "n": frozenset({
        _af([4], 1),
        _sr("a", [[0], [2], [3]], [0, 1, 2], []),
        _sr("b", [[1], [5]], [0, 1], []),
    }),
    "o": frozenset({
        _sr("a", [[0], [3]], [0, 1], []),
        _sr("b", [[1], [5]], [0, 1], []),
        _sr("c", [[2], [4]], [0, 1], []),
    }),
    "r": frozenset({
        _af([3], 1), _af([4], 1), _af([5], 1),
        _sr("a", [[0], [1], [2]], [], [[0, 1, 2]]),
    }),
    "s": frozenset({
        _af([0], 1), _af([1], 1), _af([2], 1),
        _sr("d", [[3], [4], [5]], [0, 1, 2], []),
    }),
    "t": frozenset({
        _af([1], 1), _af([4], 1), _af([5], 1),
        _sr("a", [[0], [2], [3]], [0, 1, 2], []),
    }),
    "u": frozenset({
        _af([4], 1), _af([5], 1),
        _sr("a", [[0], [1]], [0, 1], []),
        _af([2], 1), _af([3], 1),
    }),
    "v": frozenset({
        _af([1], 1), _af([5], 1),
        _sr("a", [[0], [3]], [0, 1], []),
        _sr("c", [[2], [4]], [0, 1], []),
    }),
    "x": frozenset({
        _af([1], 1), _af([2], 1), _af([4], 1), _af([5], 1),
        _sr("a", [[0], [3]], [0, 1], []),
    }),
}


def verify_constraint_catalog() -> None:
    """Fail hard if the derivation and the curated catalog ever disagree."""
    from .taxonomy import TYPE_BY_LETTER
    for letter, expected in CONSTRAINT_CATALOG.items():
        derived = angle_constraints(EdgeLabeling(TYPE_BY_LETTER[letter].pattern))
        if derived != expected:
            missing = expected - derived
            extra = derived - expected
            raise AssertionError(
                f"constraint derivation mismatch for type ({letter}): "
                f"missing={missing} extra={extra}")
    # the four all-2pi/n types: every slot must be pinned to a k*pi/n form
    for letter in "gpwy":
        derived = angle_constraints(EdgeLabeling(TYPE_BY_LETTER[letter].pattern))
        covered = set()
        for tpl in derived:
            if isinstance(tpl, AngleForm):
                covered |= tpl.slots
        if covered != set(SLOTS):
            raise AssertionError(
                f"type ({letter}) should force every angle to a (2)pi/n form; "
                f"covered only {sorted(covered)}")


# ---------------------------------------------------------------------------
# Non-tiling certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonTilingCertificate:
    """Witness that a 2pi/n-angled candidate cannot tile face to face.

    The slot's length class has all dihedral angles equal to 2pi/n with n odd,
    yet its stacking graph admits only even closed walks (bipartition witness
    given), which would force the angle to be pi/m.  The fallback block
    re-derives the same contradiction with all six lengths treated as
    distinct, covering the possibility that numerically equal lengths differ.
    """

    candidate: str
    slot: tuple
    letter_slots: tuple
    denominator: int
    graph: EdgeLengthGraph
    bipartition: dict
    fallback_graph: EdgeLengthGraph
    fallback_bipartition: dict
    conclusion: str

    def to_json(self) -> dict:
        return {
            "kind": "non_tiling_certificate",
            "candidate": self.candidate,
            "slot": f"{self.slot[0]}{self.slot[1]}",
            "equal_length_slots": [f"{i}{j}" for i, j in self.letter_slots],
            "odd_denominator": self.denominator,
            "graph": self.graph.to_json(),
            "bipartition": {"|".join(n): c for n, c in sorted(self.bipartition.items())},
            "fallback_graph": self.fallback_graph.to_json(),
            "fallback_bipartition": {"|".join(n): c
                                     for n, c in sorted(self.fallback_bipartition.items())},
            "conclusion": self.conclusion,
        }


def non_tiling_certificate(angles: AngleSextuple, labeling: EdgeLabeling,
                           candidate: str = "") -> Optional[NonTilingCertificate]:
    """Certificate that the candidate does not tile, or None.

    Scans slots in order for one whose letter class has a common angle 2pi/n
    with n odd and a bipartite stacking graph.  Every angle must carry an
    exact rational-multiple-of-pi tag.
    """
    fracs = angles.pi_fractions
    if any(f is None for f in fracs):
        raise AngleNotRationalMultiple("all six angles need exact pi-fraction tags")
    denominators = []
    for f in fracs:
        two_over = Fraction(2, 1) / f
        if two_over.denominator != 1:
            raise AngleNotRationalMultiple(f"angle tag {f} is not of the form 2pi/n")
        denominators.append(int(two_over))
    distinct = EdgeLabeling("abcdef")
    for k, (i, j) in enumerate(SLOTS):
        n = denominators[k]
        if n % 2 == 0:
            continue
        letter = labeling.pattern[k]
        class_slots = labeling.slots_of(letter)
        if any(fracs[SLOT_INDEX[s]] != fracs[k] for s in class_slots):
            continue  # not all angles in the class agree
        g = build_graph(labeling, letter)
        odd, coloring = has_odd_closed_walk(g)
        if odd:
            continue
        # distinct-lengths fallback: the slot alone still carries 2pi/odd
        g2 = build_graph(distinct, distinct.pattern[k])
        odd2, coloring2 = has_odd_closed_walk(g2)
        if odd2:
            continue
        return NonTilingCertificate(
            candidate=candidate,
            slot=(i, j),
            letter_slots=class_slots,
            denominator=n,
            graph=g,
            bipartition=coloring,
            fallback_graph=g2,
            fallback_bipartition=coloring2,
            conclusion=(
                f"stacking around edge {i}{j} uses an even number of copies, so its "
                f"angle would be pi/m, contradicting theta={2}pi/{n} with {n} odd"),
        )
    return None
