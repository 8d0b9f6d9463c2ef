"""Certified search for the least-area face-to-face tetrahedral tile of space.

Modules:
    geom      -- tetrahedron geometry kernel (volumes, areas, dihedral angles)
    rigor     -- outward-rounded intervals and certified branch-and-bound
    taxonomy  -- the 25 edge-equality types and canonical forms
    lengraph  -- stacking graphs, angle constraints, non-tiling certificates
    goldberg  -- the three one-parameter families of tiles
    dihunt    -- exhaustive search for all-2pi/n tetrahedra
    casework  -- finite case elimination over the non-characterized types
    cli       -- command-line driver and report persistence
"""

__version__ = "0.1.0"
