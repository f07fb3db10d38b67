"""Symmetry-constrained crystal generation toolkit.

Crystals are represented by their asymmetric unit (space group, one
representative site per symmetry orbit, free lattice parameters); a
bounded-latent autoencoder and a latent flow-matching model generate new
units whose symmetry holds by construction, and an evaluation harness
scores generated sets against a reference distribution.
"""

from .crystal import (
    CrystalASU,
    FullCrystal,
    MatchParams,
    Site,
    assign_wyckoff,
    expand_asu,
    lattice_matrix,
    min_pairwise_distance,
    niggli_reduce,
    structural_validity,
)
from .symcat import (
    SymmetryCatalog,
    default_catalog,
    load_catalog,
    orbit_expand,
    symmetrize_lattice,
    symmetrize_site,
    wyckoff_mask,
)

__version__ = "0.1.0"

__all__ = [
    "CrystalASU",
    "FullCrystal",
    "MatchParams",
    "Site",
    "SymmetryCatalog",
    "assign_wyckoff",
    "default_catalog",
    "expand_asu",
    "lattice_matrix",
    "load_catalog",
    "min_pairwise_distance",
    "niggli_reduce",
    "orbit_expand",
    "structural_validity",
    "symmetrize_lattice",
    "symmetrize_site",
    "wyckoff_mask",
]
