"""Exact classification of symplectic and contact differential forms over
truncated divided power algebras in characteristic p.

The package is organized bottom-up:

- gfp           exact F_p linear algebra, flags, pairings, canonical forms
- algebra       the truncated divided power algebra O(F)
- forms         the de Rham complex, cohomology, unit-class splitting
- groups        divided-power automorphisms and their actions
- flagbilinear  antisymmetric forms relative to a flag
- grind         the refinement pipeline and quiver-type decomposition
- classify      recognition, invariants, normal shapes, equivalence
- jsonio, cli   file formats and the command-line front end
"""

from .algebra import AlgebraElement, FlagSpec, OutOfAlgebraError
from .classify import (ContactCandidate, ContactInvariant,
                       SymplecticCandidate, Type2Invariant, equivalent,
                       invariants, is_contact, is_symplectic, normal_shape,
                       random_form)
from .forms import DiffForm
from .grind import Indecomposable, descriptor_equal
from .groups import Automorphism, Derivation

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement", "Automorphism", "ContactCandidate", "ContactInvariant",
    "Derivation", "DiffForm", "FlagSpec", "Indecomposable",
    "OutOfAlgebraError", "SymplecticCandidate", "Type2Invariant",
    "descriptor_equal", "equivalent", "invariants", "is_contact",
    "is_symplectic", "normal_shape", "random_form",
]
