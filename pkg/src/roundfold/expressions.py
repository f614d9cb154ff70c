"""Formal algebra of closed-manifold expressions.

Expressions are immutable trees built from spheres, twisted spheres,
products, sphere-base bundle total spaces, connected sums and named
manifolds with declared invariants.  `normalize` rewrites a tree to a
canonical form so that structural equality can stand in for
diffeomorphism of the expressible fragment; `euler_of_expr` and
`homology_ranks_of_expr` evaluate exact invariants where they are
determined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

from .errors import InvariantUnavailableError, StructuralError

# Label treated as the trivial twist for AlmostSphere / HomotopySphere.
TRIVIAL_LABEL = ""

# Stored constant: number of oriented 7-dimensional homotopy spheres up to
# orientation-preserving diffeomorphism.
THETA_7_COUNT = 28
# Of those, how many admit no special generic map into R^3.
THETA_7_NO_SPECIAL_GENERIC_INTO_R3 = 14


class ManifoldExpr:
    """Base class; all concrete expressions are frozen dataclasses."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def __str__(self):  # canonical DSL text, defined in dsl.py
        from . import dsl

        return dsl.print_expr(self)


@dataclass(frozen=True)
class StandardSphere(ManifoldExpr):
    d: int

    def __post_init__(self):
        if self.d < 0:
            raise StructuralError(f"sphere dimension must be >= 0, got {self.d}")

    @property
    def dim(self) -> int:
        return self.d


@dataclass(frozen=True)
class AlmostSphere(ManifoldExpr):
    """Twisted double of a standard disc; the twist label is opaque."""

    d: int
    twist: str

    def __post_init__(self):
        if self.d < 0:
            raise StructuralError(f"sphere dimension must be >= 0, got {self.d}")

    @property
    def dim(self) -> int:
        return self.d


@dataclass(frozen=True)
class HomotopySphere(ManifoldExpr):
    """Formal element of the group of homotopy d-spheres; label opaque."""

    d: int
    theta: str

    def __post_init__(self):
        if self.d < 0:
            raise StructuralError(f"sphere dimension must be >= 0, got {self.d}")

    @property
    def dim(self) -> int:
        return self.d


@dataclass(frozen=True)
class Product(ManifoldExpr):
    factors: tuple[ManifoldExpr, ...]

    def __post_init__(self):
        if not self.factors:
            raise StructuralError("product needs at least one factor")

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)


@dataclass(frozen=True)
class BundleTotal(ManifoldExpr):
    """Total space of a fiber bundle over a standard sphere.

    twist is an opaque clutching label; None means the trivial bundle.
    Two distinct labels are never identified.
    """

    fiber: ManifoldExpr
    base_dim: int
    twist: str | None = None

    def __post_init__(self):
        if self.base_dim < 1:
            raise StructuralError(f"bundle base dimension must be >= 1, got {self.base_dim}")

    @property
    def dim(self) -> int:
        return self.fiber.dim + self.base_dim


@dataclass(frozen=True)
class ConnectedSum(ManifoldExpr):
    summands: tuple[ManifoldExpr, ...]

    def __post_init__(self):
        if not self.summands:
            raise StructuralError("connected sum needs at least one summand")
        dims = {s.dim for s in self.summands}
        if len(dims) > 1:
            bad = ", ".join(f"{s} (dim {s.dim})" for s in self.summands)
            raise StructuralError(f"connected-sum summands must share a dimension: {bad}")
        if self.summands[0].dim < 1:
            raise StructuralError("connected sum is only defined in dimension >= 1")

    @property
    def dim(self) -> int:
        return self.summands[0].dim


@dataclass(frozen=True)
class Named(ManifoldExpr):
    """A named closed manifold with declared invariants.

    ranks, when given, is the degree-indexed tuple of free homology ranks
    (length dim + 1).  torsion_degrees lists degrees with torsion; None
    means torsion data is unknown, () means declared torsion-free.
    """

    name: str
    d: int
    euler: int | None = None
    connectivity: int = 0
    ranks: tuple[int, ...] | None = None
    torsion_degrees: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.d < 0:
            raise StructuralError(f"dimension must be >= 0, got {self.d}")
        if self.connectivity < 0:
            raise StructuralError("connectivity degree must be >= 0")
        if self.ranks is not None and len(self.ranks) != self.d + 1:
            raise StructuralError(
                f"named manifold {self.name!r}: ranks list must have dim+1 = {self.d + 1} entries"
            )

    @property
    def dim(self) -> int:
        return self.d


# Fixed variant order for the canonical total order.
_TAG_ORDER = {
    StandardSphere: 0,
    AlmostSphere: 1,
    HomotopySphere: 2,
    Product: 3,
    BundleTotal: 4,
    ConnectedSum: 5,
    Named: 6,
}


def sort_key(e: ManifoldExpr):
    """Total order key: lexicographic on (variant tag, dim, children, labels)."""
    tag = _TAG_ORDER[type(e)]
    if isinstance(e, StandardSphere):
        return (tag, e.dim, (), "")
    if isinstance(e, AlmostSphere):
        return (tag, e.dim, (), e.twist)
    if isinstance(e, HomotopySphere):
        return (tag, e.dim, (), e.theta)
    if isinstance(e, Product):
        return (tag, e.dim, tuple(sort_key(f) for f in e.factors), "")
    if isinstance(e, BundleTotal):
        return (tag, e.dim, (sort_key(e.fiber),), e.twist or "")
    if isinstance(e, ConnectedSum):
        return (tag, e.dim, tuple(sort_key(s) for s in e.summands), "")
    if isinstance(e, Named):
        return (tag, e.dim, (), e.name)
    raise StructuralError(f"unknown expression {e!r}")


def compose_twists(a: str, b: str) -> str:
    """Free concatenation of opaque twist labels (no group laws imposed)."""
    if a == TRIVIAL_LABEL:
        return b
    if b == TRIVIAL_LABEL:
        return a
    return f"{a}+{b}"


def normalize(e: ManifoldExpr) -> ManifoldExpr:
    """Rewrite to canonical form.  Idempotent.

    - trivial-twist bundles become products,
    - twisted spheres with the trivial label and dim != 4 become standard,
    - products are flattened, sorted, singletons collapsed,
    - connected sums are flattened, sorted, standard-sphere summands of the
      ambient dimension dropped (one sphere is kept if nothing else remains).
    """
    if isinstance(e, StandardSphere):
        return e
    if isinstance(e, AlmostSphere):
        if e.twist == TRIVIAL_LABEL and e.dim != 4:
            return StandardSphere(e.dim)
        return e
    if isinstance(e, HomotopySphere):
        if e.theta == TRIVIAL_LABEL and e.dim != 4:
            return StandardSphere(e.dim)
        return e
    if isinstance(e, Named):
        return e
    if isinstance(e, BundleTotal):
        fiber = normalize(e.fiber)
        if e.twist is None or e.twist == TRIVIAL_LABEL:
            return normalize(Product((fiber, StandardSphere(e.base_dim))))
        return BundleTotal(fiber, e.base_dim, e.twist)
    if isinstance(e, Product):
        flat: list[ManifoldExpr] = []
        for f in e.factors:
            nf = normalize(f)
            if isinstance(nf, Product):
                flat.extend(nf.factors)
            else:
                flat.append(nf)
        flat.sort(key=sort_key)
        if len(flat) == 1:
            return flat[0]
        return Product(tuple(flat))
    if isinstance(e, ConnectedSum):
        m = e.dim
        flat = []
        for s in e.summands:
            ns = normalize(s)
            if isinstance(ns, ConnectedSum):
                flat.extend(ns.summands)
            else:
                flat.append(ns)
        kept = [s for s in flat if s != StandardSphere(m)]
        if not kept:
            return StandardSphere(m)
        kept.sort(key=sort_key)
        if len(kept) == 1:
            return kept[0]
        return ConnectedSum(tuple(kept))
    raise StructuralError(f"unknown expression {e!r}")


def sphere_euler(d: int) -> int:
    return 1 + (-1) ** d


def euler_of_expr(e: ManifoldExpr) -> int:
    """Exact Euler characteristic.  Odd-dimensional results must be 0."""
    chi = _euler(e)
    if e.dim % 2 == 1 and chi != 0:
        raise StructuralError(
            f"odd-dimensional closed manifold with nonzero declared euler number: {e}"
        )
    return chi


def _euler(e: ManifoldExpr) -> int:
    if isinstance(e, (StandardSphere, AlmostSphere, HomotopySphere)):
        return sphere_euler(e.dim)
    if isinstance(e, Product):
        return reduce(lambda a, b: a * b, (_euler(f) for f in e.factors), 1)
    if isinstance(e, BundleTotal):
        return _euler(e.fiber) * sphere_euler(e.base_dim)
    if isinstance(e, ConnectedSum):
        k = len(e.summands)
        return sum(_euler(s) for s in e.summands) - (k - 1) * sphere_euler(e.dim)
    if isinstance(e, Named):
        if e.euler is None:
            raise InvariantUnavailableError(
                f"named manifold {e.name!r} carries no euler number"
            )
        if e.dim % 2 == 1 and e.euler != 0:
            raise StructuralError(
                f"named manifold {e.name!r} is odd-dimensional but declares euler {e.euler}"
            )
        return e.euler
    raise StructuralError(f"unknown expression {e!r}")


def _rank_vector(e: ManifoldExpr) -> list[int]:
    """Degree-indexed free homology ranks (length dim+1), or raise."""
    d = e.dim
    if isinstance(e, (StandardSphere, AlmostSphere, HomotopySphere)):
        v = [0] * (d + 1)
        if d == 0:
            v[0] = 2
        else:
            v[0] = 1
            v[d] += 1
        return v
    if isinstance(e, Named):
        if e.ranks is None:
            raise InvariantUnavailableError(
                f"named manifold {e.name!r} carries no homology ranks"
            )
        return list(e.ranks)
    if isinstance(e, Product):
        v = [1]
        for f in e.factors:
            w = _rank_vector(f)
            v = [
                sum(v[i] * w[k - i] for i in range(max(0, k - len(w) + 1), min(k, len(v) - 1) + 1))
                for k in range(len(v) + len(w) - 1)
            ]
        return v
    if isinstance(e, BundleTotal):
        n = e.base_dim
        fib = e.fiber
        is_sphere_fiber = isinstance(fib, (StandardSphere, AlmostSphere, HomotopySphere))
        if not (is_sphere_fiber and fib.dim >= n >= 1 and fib.dim >= 1):
            raise InvariantUnavailableError(
                f"homology ranks undetermined for bundle with fiber {fib}"
            )
        # Fiber dim >= base dim forces the sphere-bundle spectral sequence to
        # collapse, so the total space carries product-of-spheres ranks.
        v = [0] * (d + 1)
        v[0] += 1
        v[n] += 1
        v[d - n] += 1
        v[d] += 1
        return v
    if isinstance(e, ConnectedSum):
        if d < 1:
            raise InvariantUnavailableError("connected sum in dimension 0")
        v = [0] * (d + 1)
        v[0] = 1
        v[d] = 1
        for s in e.summands:
            w = _rank_vector(s)
            for k in range(1, d):
                v[k] += w[k]
        return v
    raise StructuralError(f"unknown expression {e!r}")


def homology_ranks_of_expr(e: ManifoldExpr) -> list[tuple[int, int]]:
    """Nonzero free homology ranks as sorted (degree, rank) pairs.

    Defined on the recognizable fragment: sphere-like leaves, named
    manifolds with declared ranks, products of those, sphere-fiber bundles
    with fiber dim >= base dim, and connected sums of recognizable pieces.
    """
    v = _rank_vector(normalize(e))
    return [(k, r) for k, r in enumerate(v) if r != 0]


def is_simply_connected(e: ManifoldExpr) -> bool | None:
    """True/False when derivable from the expression, None when unknown."""
    if isinstance(e, (StandardSphere, AlmostSphere, HomotopySphere)):
        return e.dim >= 2
    if isinstance(e, Named):
        if e.connectivity >= 1:
            return True
        return None
    if isinstance(e, Product):
        vals = [is_simply_connected(f) for f in e.factors]
        if all(v is True for v in vals):
            return True
        if any(v is False for v in vals):
            return False
        return None
    if isinstance(e, BundleTotal):
        # pi_1 exact sequence over S^n: base simply connected for n >= 2.
        v = is_simply_connected(e.fiber)
        if e.base_dim >= 2 and v is True:
            return True
        if e.base_dim == 1:
            return False
        return v if v is False else None
    if isinstance(e, ConnectedSum):
        if e.dim < 3:
            return None
        vals = [is_simply_connected(s) for s in e.summands]
        if all(v is True for v in vals):
            return True
        if any(v is False for v in vals):
            return False
        return None
    return None


def connectivity_at_least(e: ManifoldExpr, k: int) -> bool | None:
    """Is e known to be k-connected?  True/False when derivable, else None."""
    if k < 0:
        return True
    if isinstance(e, (StandardSphere, AlmostSphere, HomotopySphere)):
        return k <= e.dim - 1
    if isinstance(e, Named):
        return True if e.connectivity >= k else None
    if isinstance(e, Product):
        vals = [connectivity_at_least(f, k) for f in e.factors]
        if all(v is True for v in vals):
            return True
        if any(v is False for v in vals):
            return False
        return None
    if isinstance(e, BundleTotal):
        if k > e.base_dim - 1:
            return None
        return connectivity_at_least(e.fiber, k)
    if isinstance(e, ConnectedSum):
        if k > e.dim - 2:
            return None
        vals = [connectivity_at_least(s, k) for s in e.summands]
        if all(v is True for v in vals):
            return True
        return None
    return None


def is_sphere_like(e: ManifoldExpr) -> bool:
    """Standard or twisted sphere (any homotopy-sphere variant)."""
    return isinstance(e, (StandardSphere, AlmostSphere, HomotopySphere))


def is_standard_sphere(e: ManifoldExpr, d: int | None = None) -> bool:
    e = normalize(e)
    return isinstance(e, StandardSphere) and (d is None or e.dim == d)


def expr_to_json(e: ManifoldExpr):
    """JSON object form {kind, dim, children, label, euler}."""
    kind, children, label, euler = None, [], None, None
    if isinstance(e, StandardSphere):
        kind = "sphere"
    elif isinstance(e, AlmostSphere):
        kind, label = "almost_sphere", e.twist
    elif isinstance(e, HomotopySphere):
        kind, label = "homotopy_sphere", e.theta
    elif isinstance(e, Product):
        kind, children = "product", [expr_to_json(f) for f in e.factors]
    elif isinstance(e, BundleTotal):
        kind, children, label = "bundle", [expr_to_json(e.fiber)], e.twist
    elif isinstance(e, ConnectedSum):
        kind, children = "connected_sum", [expr_to_json(s) for s in e.summands]
    elif isinstance(e, Named):
        kind, label, euler = "named", e.name, e.euler
    else:
        raise StructuralError(f"unknown expression {e!r}")
    if euler is None:
        try:
            euler = euler_of_expr(e)
        except (InvariantUnavailableError, StructuralError):
            euler = None
    return {"kind": kind, "dim": e.dim, "children": children, "label": label, "euler": euler}


def expr_from_json(obj) -> ManifoldExpr:
    kind = obj["kind"]
    dim = obj["dim"]
    if kind == "sphere":
        return StandardSphere(dim)
    if kind == "almost_sphere":
        return AlmostSphere(dim, obj.get("label") or "")
    if kind == "homotopy_sphere":
        return HomotopySphere(dim, obj.get("label") or "")
    if kind == "product":
        return Product(tuple(expr_from_json(c) for c in obj["children"]))
    if kind == "bundle":
        fiber = expr_from_json(obj["children"][0])
        return BundleTotal(fiber, dim - fiber.dim, obj.get("label"))
    if kind == "connected_sum":
        return ConnectedSum(tuple(expr_from_json(c) for c in obj["children"]))
    if kind == "named":
        return Named(obj["label"], dim, euler=obj.get("euler"))
    raise StructuralError(f"unknown expression kind {kind!r}")
