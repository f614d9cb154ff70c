"""Builders producing round fold descriptors.

`trivial_spinning` revolves a boundary-anchored Morse trace around a
sphere; `from_bundle` realizes the map on a fiber-bundle total space
whose proper-core fiber is two copies of the fiber; `iterated_bundle_spin`
stacks bundle stages whose restrictions are declared trivial; `preset`
serves a catalog of named example maps together with their expected
classifications for use as test oracles.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .descriptor import (
    Birth,
    Cylinder,
    Death,
    FoldEvent,
    Generic,
    Merge,
    NamedWithBoundary,
    Provenance,
    RoundFoldDescriptor,
    Split,
)
from .errors import HypothesisError, StructuralError
from .expressions import (
    ManifoldExpr,
    Named,
    Product,
    StandardSphere,
    compose_twists,
    is_sphere_like,
    normalize,
)
from .traces import MorseTrace, canonical_trace, validate_trace


def _invert_events(t: MorseTrace) -> tuple[FoldEvent, ...]:
    """Reverse the upward trace into outermost-to-inward descriptor events."""
    config: dict[str, ManifoldExpr] = dict(t.boundary)
    inverted: list[FoldEvent] = []
    for event in t.events:
        if isinstance(event, Birth):
            config[event.component] = event.fiber
            inverted.append(Death(event.component))
        elif isinstance(event, Death):
            label = config.pop(event.component)
            inverted.append(Birth(event.component, label))
        elif isinstance(event, Split):
            parent_label = config.pop(event.parent)
            config[event.child1] = event.fiber1
            config[event.child2] = event.fiber2
            inverted.append(Merge(event.child1, event.child2, event.parent, parent_label))
        elif isinstance(event, Merge):
            l1 = config.pop(event.parent1)
            l2 = config.pop(event.parent2)
            config[event.child] = event.fiber
            inverted.append(Split(event.child, event.parent1, l1, event.parent2, l2))
        elif isinstance(event, Generic):
            config[event.component] = event.after
            inverted.append(
                Generic(event.index, event.component, event.after, event.before, event.singular_euler)
            )
        else:
            raise StructuralError(f"unknown trace event {event!r}")
    inverted.reverse()
    return tuple(inverted)


def trivial_spinning(t: MorseTrace, n: int, provenance: Provenance | None = None) -> RoundFoldDescriptor:
    """Spin a trace around S^{n-1} into a smoothly trivial descriptor.

    The trace's critical events, read from the minimum outward, become the
    descriptor's events in outermost-to-inward order; the proper-core
    fiber is the trace's boundary.  Traces with empty boundary give the
    product-with-identity variant whose image misses the origin (empty
    proper-core fiber).
    """
    if n < 1:
        raise StructuralError(f"target dimension must be >= 1, got {n}")
    problems = validate_trace(t)
    if problems:
        raise StructuralError("invalid trace: " + "; ".join(str(p) for p in problems))
    events = _invert_events(t)
    d = RoundFoldDescriptor(
        m=t.fiber_dim + n,
        n=n,
        events=events,
        triviality="smooth",
        axis=t.label,
        provenance=provenance or Provenance(),
    )
    d.ensure_valid()
    return d


def from_bundle(
    fiber: ManifoldExpr,
    n: int,
    twist: str | None = None,
    trace: MorseTrace | None = None,
    factor_cells=None,
) -> RoundFoldDescriptor:
    """Round fold map on the total space of a fiber bundle over S^n.

    Sphere-like fibers and sphere products get the canonical trace; any
    other fiber requires an explicit trace on its cylinder whose boundary
    is two copies of the fiber.  The twist label is recorded as provenance
    for classification round-trips.
    """
    fiber = normalize(fiber)
    if fiber.dim < 1:
        raise StructuralError("bundle construction needs a fiber of dimension >= 1")
    if n < 1:
        raise StructuralError(f"target dimension must be >= 1, got {n}")
    if trace is None:
        try:
            trace = canonical_trace(fiber, factor_cells=factor_cells)
        except StructuralError as exc:
            raise HypothesisError(
                f"trace required: no canonical trace for fiber {fiber} ({exc})"
            ) from exc
    boundary = [normalize(e) for _, e in trace.boundary]
    if len(boundary) != 2 or any(b != fiber for b in boundary):
        raise HypothesisError(
            f"trace boundary must be two copies of {fiber}, got {len(boundary)} components"
        )
    split_key = (trace.boundary[0][0], trace.boundary[1][0])
    prov = Provenance(twist=twist, split_twists=(((split_key), twist or ""),))
    d = trivial_spinning(t=trace, n=n, provenance=prov)
    out = RoundFoldDescriptor(
        m=d.m,
        n=d.n,
        events=d.events,
        triviality="smooth",
        axis=Cylinder(fiber),
        provenance=prov,
    )
    out.ensure_valid()
    return out


def iterated_bundle_spin(
    fibers,
    n: int,
    twists=None,
    restriction_trivial: bool = False,
    factor_cells=None,
) -> RoundFoldDescriptor:
    """Round fold map on an iterated bundle total space.

    Each stage past the first is a bundle over the previous total space
    whose restriction to the accumulated fibers the caller must assert to
    be trivial; the result is a map whose axis fiber is the cylinder over
    the product of all stage fibers.
    """
    fibers = [normalize(f) for f in fibers]
    if not fibers:
        raise StructuralError("need at least one bundle stage")
    if len(fibers) > 1 and not restriction_trivial:
        raise HypothesisError(
            "iterated spinning needs the caller to assert that every stage "
            "restricts trivially to the accumulated fibers (restriction_trivial=True)"
        )
    twists = list(twists) if twists else []
    twist = ""
    for t in twists:
        twist = compose_twists(twist, t or "")
    total = normalize(Product(tuple(fibers))) if len(fibers) > 1 else fibers[0]
    if factor_cells is None and not is_sphere_like(total):
        cells = []
        for f in fibers:
            if isinstance(f, StandardSphere):
                cells.append((0, f.dim))
            elif isinstance(f, Product) and all(isinstance(x, StandardSphere) for x in f.factors):
                cells.extend((0, x.dim) for x in f.factors)
            else:
                raise HypothesisError(
                    f"stage fiber {f} has no canonical cell structure; pass factor_cells"
                )
        factor_cells = cells
    d = from_bundle(total, n, twist=twist or None, factor_cells=factor_cells)
    prov = Provenance(
        twist=d.provenance.twist,
        split_twists=d.provenance.split_twists,
        restriction_trivial=True,
        notes=(f"iterated spin over {len(fibers)} stage(s)",),
    )
    return RoundFoldDescriptor(d.m, d.n, d.events, d.triviality, d.axis, prov)


# ---------------------------------------------------------------------------
# Preset catalog


@dataclass(frozen=True)
class PresetEntry:
    name: str
    descriptor: RoundFoldDescriptor
    expected_manifold: ManifoldExpr | None
    expected_confidence: str | None
    alias: Named | None = None
    note: str = ""


def _preset_special_generic(m: int, n: int) -> PresetEntry:
    if not m >= n >= 1:
        raise StructuralError(f"need m >= n >= 1, got ({m}, {n})")
    fd = m - n
    axis = NamedWithBoundary(
        f"disc{fd + 1}",
        boundary=(StandardSphere(fd),),
        boundary_n_minus_1_connected=(fd >= n),
        pi_n_minus_1_trivial=True,
    )
    d = RoundFoldDescriptor(
        m=m,
        n=n,
        events=(Birth("c1", StandardSphere(fd)),),
        triviality="smooth",
        axis=axis,
    )
    if 1 <= fd <= 3 and m > 3:
        expected: ManifoldExpr = StandardSphere(m)
        note = "connected singular set in low codimension forces the standard sphere"
    elif fd == 0:
        from .expressions import AlmostSphere

        expected = AlmostSphere(m, "double1")
        note = "a twisted double of the disc"
    else:
        from .expressions import HomotopySphere

        expected = HomotopySphere(m, f"theta1({m},{n})")
        note = "connected singular set: a homotopy sphere class"
    return PresetEntry(f"special_generic({m},{n})", d, expected, "diffeomorphism", note=note)


def _preset_milnor(theta: str) -> PresetEntry:
    from .expressions import BundleTotal

    d = from_bundle(StandardSphere(3), 4, twist=theta)
    return PresetEntry(
        f"milnor_sphere({theta})",
        d,
        BundleTotal(StandardSphere(3), 4, theta),
        "diffeomorphism",
        note="linear 3-sphere bundles over the 4-sphere include exotic 7-spheres",
    )


def _preset_cp3() -> PresetEntry:
    from .expressions import BundleTotal

    d = from_bundle(StandardSphere(2), 4, twist="cp3")
    alias = Named("CP3", 6, euler=4, connectivity=1, ranks=(1, 0, 1, 0, 1, 0, 1), torsion_degrees=())
    return PresetEntry(
        "cp3_over_s4",
        d,
        BundleTotal(StandardSphere(2), 4, "cp3"),
        "diffeomorphism",
        alias=alias,
        note="the complex projective 3-space as a 2-sphere bundle over the 4-sphere",
    )


def _preset_so5_mod_so2() -> PresetEntry:
    from .expressions import BundleTotal

    fibers = [StandardSphere(3), StandardSphere(2)]
    d = iterated_bundle_spin(fibers, 4, twists=["so4", "so3"], restriction_trivial=True)
    fiber = normalize(Product((StandardSphere(3), StandardSphere(2))))
    alias = Named("SO(5)/SO(2)", 9, euler=0)
    return PresetEntry(
        "so5_mod_so2",
        d,
        BundleTotal(fiber, 4, compose_twists("so4", "so3")),
        "diffeomorphism",
        alias=alias,
        note="homogeneous space spun through its sphere-bundle tower",
    )


def _preset_so5_mod_so1() -> PresetEntry:
    from .expressions import BundleTotal

    so3 = Named("SO(3)", 3, euler=0, connectivity=0, ranks=(1, 0, 0, 1), torsion_degrees=(1,))
    fibers = [StandardSphere(3), so3]
    d = iterated_bundle_spin(
        fibers, 4, twists=["so4", "so3"], restriction_trivial=True,
        factor_cells=[(0, 3), (0, 1, 2, 3)],
    )
    fiber = normalize(Product((StandardSphere(3), so3)))
    alias = Named("SO(5)", 10, euler=0)
    return PresetEntry(
        "so5_mod_so1",
        d,
        BundleTotal(fiber, 4, compose_twists("so4", "so3")),
        "diffeomorphism",
        alias=alias,
        note="the rotation group itself, spun over the 4-sphere",
    )


def _preset_bott3(b: int, c: int) -> PresetEntry:
    from .expressions import BundleTotal

    if c % 2 != 0:
        raise HypothesisError(
            "three-stage tower spins only when the inner stage datum c is even "
            f"(got c={c}): odd c twists the restriction to the first fiber"
        )
    twist = f"bott(b={b},c={c})"
    d = iterated_bundle_spin(
        [StandardSphere(2), StandardSphere(2)], 2, twists=[twist], restriction_trivial=True
    )
    fiber = normalize(Product((StandardSphere(2), StandardSphere(2))))
    alias = Named(f"bott3({b},{c})", 6, euler=8, connectivity=1)
    return PresetEntry(
        f"bott3({b},{c})",
        d,
        BundleTotal(fiber, 2, twist),
        "diffeomorphism",
        alias=alias,
        note="three-stage sphere tower over the plane target",
    )


def _preset_example5() -> PresetEntry:
    from .expressions import BundleTotal, ConnectedSum
    from .surgery import CombineSite, combine

    f1 = from_bundle(StandardSphere(4), 2, twist="e5_outer")
    inner = from_bundle(Product((StandardSphere(2), StandardSphere(2))), 2, twist="e5_inner")
    site = CombineSite(component=core_sphere_components(f1)[0])
    d, _note = combine(f1, site, inner)
    expected = normalize(
        ConnectedSum(
            (
                BundleTotal(StandardSphere(4), 2, "e5_outer"),
                BundleTotal(Product((StandardSphere(2), StandardSphere(2))), 2, "e5_inner"),
            )
        )
    )
    return PresetEntry(
        "example5",
        d,
        expected,
        "diffeomorphism",
        note="connected sum of a 4-sphere bundle and a product-fiber bundle over the plane",
    )


def _preset_spun_circle(n: int) -> PresetEntry:
    if n < 2:
        raise StructuralError("spun circle needs target dimension >= 2")
    t = MorseTrace(
        boundary=(),
        events=(Birth("c1", StandardSphere(0)), Death("c1")),
    )
    d = trivial_spinning(t, n)
    expected = normalize(Product((StandardSphere(1), StandardSphere(n - 1))))
    return PresetEntry(
        f"spun_circle({n})",
        d,
        None,
        None,
        alias=Named(f"S1xS{n - 1}", n, euler=0),
        note=f"circle times S^{n - 1}: image misses the origin, empty proper-core fiber; "
        f"source is {expected}",
    )


def core_sphere_components(d: RoundFoldDescriptor) -> list[str]:
    """Ids of proper-core components labelled by standard spheres."""
    from .descriptor import core_fiber
    from .expressions import is_standard_sphere

    return [c for c, fib in core_fiber(d) if is_standard_sphere(fib, d.fiber_dim)]


_FIXED_PRESETS = {
    "cp3_over_s4": _preset_cp3,
    "so5_mod_so2": _preset_so5_mod_so2,
    "so5_mod_so1": _preset_so5_mod_so1,
    "example5": _preset_example5,
}

_TEMPLATE_PRESETS = {
    "special_generic": (_preset_special_generic, "special_generic(m,n)"),
    "milnor_sphere": (lambda theta="milnor": _preset_milnor(str(theta)), "milnor_sphere(theta)"),
    "bott3": (_preset_bott3, "bott3(b,c) with c even"),
    "spun_circle": (_preset_spun_circle, "spun_circle(n)"),
}

_NAME_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\((.*)\))?$")


def preset(name: str) -> PresetEntry:
    """Look up a catalog preset; RFM_PRESET_PATH directories extend the catalog."""
    match = _NAME_RE.match(name.strip())
    if not match:
        raise StructuralError(f"malformed preset name {name!r}")
    base, argtext = match.groups()
    if base in _FIXED_PRESETS:
        if argtext:
            raise StructuralError(f"preset {base!r} takes no arguments")
        return _FIXED_PRESETS[base]()
    if base in _TEMPLATE_PRESETS:
        fn = _TEMPLATE_PRESETS[base][0]
        args = []
        if argtext:
            for part in argtext.split(","):
                part = part.strip()
                args.append(int(part) if re.fullmatch(r"-?\d+", part) else part)
        return fn(*args)
    entry = _external_preset(name)
    if entry is not None:
        return entry
    raise StructuralError(f"unknown preset {name!r}; see `rfm list-presets`")


def _external_preset(name: str) -> PresetEntry | None:
    from . import dsl

    path_var = os.environ.get("RFM_PRESET_PATH", "")
    for directory in filter(None, path_var.split(os.pathsep)):
        candidate = os.path.join(directory, f"{name}.rfm")
        if os.path.isfile(candidate):
            with open(candidate, "r", encoding="utf-8") as fh:
                value, diagnostics = dsl.parse(fh.read(), path=candidate)
            if diagnostics or not isinstance(value, RoundFoldDescriptor):
                raise StructuralError(f"external preset {candidate} does not parse to a descriptor")
            return PresetEntry(name, value, None, None, note=f"external preset from {candidate}")
    return None


def list_presets() -> list[dict]:
    """Stable catalog listing: fixed names, templates, external files."""
    out = [{"name": n, "kind": "fixed"} for n in sorted(_FIXED_PRESETS)]
    out += [
        {"name": sig, "kind": "template"}
        for _, sig in sorted(_TEMPLATE_PRESETS.values(), key=lambda p: p[1])
    ]
    path_var = os.environ.get("RFM_PRESET_PATH", "")
    for directory in sorted(filter(None, path_var.split(os.pathsep))):
        if os.path.isdir(directory):
            for fn in sorted(os.listdir(directory)):
                if fn.endswith(".rfm"):
                    out.append({"name": fn[: -len(".rfm")], "kind": "external"})
    return out


def default_preset_instances() -> list[PresetEntry]:
    """Concrete instances exercised by the test suite and CLI smoke checks."""
    return [
        _preset_special_generic(5, 2),
        _preset_special_generic(7, 2),
        _preset_special_generic(7, 3),
        _preset_special_generic(4, 2),
        _preset_milnor("milnor"),
        _preset_cp3(),
        _preset_so5_mod_so2(),
        _preset_so5_mod_so1(),
        _preset_bott3(1, 2),
        _preset_example5(),
        _preset_spun_circle(3),
    ]
