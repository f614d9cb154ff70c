"""Symbolic calculus for round fold maps.

Descriptors encode a fold map whose singular values are concentric
spheres as a finite list of events; the library builds such maps from
Morse traces and bundle data, performs combining/decomposing surgery,
computes the quotient-space homology and source Euler characteristic
exactly, and recognizes the source manifold where the classification
rules apply.  All values are immutable and every operation is pure.
"""

from .chain import ChainComplex, HomologyProfile, homology
from .descriptor import (
    Birth,
    ComponentForest,
    Cylinder,
    Death,
    Generic,
    Merge,
    NamedWithBoundary,
    Provenance,
    PuncturedCylinder,
    RoundFoldDescriptor,
    Split,
    component_forest,
    core_fiber,
    descriptor_isomorphic,
    regular_fibers,
)
from .errors import (
    HypothesisError,
    InvariantUnavailableError,
    RoundFoldError,
    ScopeError,
    SiteError,
    StructuralError,
    ValidationFailure,
)
from .expressions import (
    AlmostSphere,
    BundleTotal,
    ConnectedSum,
    HomotopySphere,
    ManifoldExpr,
    Named,
    Product,
    StandardSphere,
    euler_of_expr,
    expr_from_json,
    expr_to_json,
    homology_ranks_of_expr,
    normalize,
)
from .constructions import (
    PresetEntry,
    from_bundle,
    iterated_bundle_spin,
    list_presets,
    preset,
    trivial_spinning,
)
from .reeb import (
    ReebComplex,
    build_reeb,
    euler_characteristic,
    prop1_report,
    reeb_homology,
)
from .snf import smith_normal_form
from .surgery import CombineSite, DecomposeSite, combine, combine_iterated, decompose
from .traces import MorseTrace, canonical_trace

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
