"""Combining and decomposing surgery on round fold descriptors.

`combine` grafts a second map onto a standard-sphere component of the
first map's proper-core fiber, realizing the connected sum of the source
manifolds; `decompose` splits a map along a regular sphere of values into
two maps whose sources connected-sum back to the original.  Both keep
exact event-count arithmetic (combine: l = l1 + l2 - 1; decompose:
l1 + l2 = l + 1) and never proceed past an undischarged hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .descriptor import (
    Birth,
    Death,
    Generic,
    Merge,
    Provenance,
    RoundFoldDescriptor,
    Split,
    component_forest,
    core_fiber,
    inputs_of,
    min_triviality,
    outputs_of,
    regular_fibers,
    rename_event,
)
from .errors import HypothesisError, SiteError
from .expressions import (
    ManifoldExpr,
    connectivity_at_least,
    is_sphere_like,
    is_standard_sphere,
    normalize,
)
from .descriptor import Cylinder


@dataclass(frozen=True)
class CombineSite:
    """A standard-sphere component of the first map's proper-core fiber."""

    component: str


@dataclass(frozen=True)
class DecomposeSite:
    """A regular sphere of values inside region `region`, crossing the
    standard-sphere fiber component `component`.

    null_homotopy_witness: "derived-from-sphere-class" asks the library to
    discharge the null-homotopy hypothesis from the split-off piece's
    structure; "assumed" records a caller assertion.
    """

    region: int
    component: str
    null_homotopy_witness: str = "derived-from-sphere-class"


@dataclass(frozen=True)
class SurgeryNote:
    """Source-manifold bookkeeping attached to surgery outputs."""

    relation: str
    details: tuple[str, ...] = ()

    def to_json(self):
        return {"relation": self.relation, "details": list(self.details)}


def _sphere_class_piece(d: RoundFoldDescriptor) -> bool:
    """Fibers all sphere-like, fold indices 0/1, connected acyclic graph.

    Under m >= 2n this discharges the null-homotopy hypotheses: the
    quotient model is a bouquet of n-spheres, so pi_{n-1} vanishes.
    """
    if not all(isinstance(e, (Birth, Death, Split, Merge)) for e in d.events):
        return False
    for region in regular_fibers(d):
        for _, fib in region:
            if not is_sphere_like(fib):
                return False
    forest = component_forest(d)
    return forest.connected and forest.cycle_count == 0 and len(forest.capped) >= 1


def chain_bundle_fiber(d: RoundFoldDescriptor) -> ManifoldExpr | None:
    """Fiber F when d is a single-chain bundle shape, else None.

    The shape: one outermost birth, generic events threading the same
    component, and a final split into two equal copies of F.  Such a map
    is the spun cylinder trace of an F-bundle total space.
    """
    if d.l < 2:
        return None
    first, last = d.events[0], d.events[-1]
    if not (isinstance(first, Birth) and isinstance(last, Split)):
        return None
    thread = first.component
    for e in d.events[1:-1]:
        if not (isinstance(e, Generic) and e.component == thread):
            return None
    if last.parent != thread:
        return None
    f1, f2 = normalize(last.fiber1), normalize(last.fiber2)
    if f1 != f2:
        return None
    return f1


def _null_homotopy_ok(d: RoundFoldDescriptor, assume: bool) -> str:
    """Witness for the vanishing of pi_{n-1} of the piece's source.

    Routes: the sphere-fiber class (bouquet model kills pi_{n-1} when
    m >= 2n), or a recognized F-bundle structure (cylinder axis label or
    the chain shape) with F an (n-1)-connected fiber, or an explicit
    caller assertion.
    """
    if assume:
        return "assumed"
    if d.m >= 2 * d.n and _sphere_class_piece(d):
        return "derived-from-sphere-class"
    fiber = None
    if isinstance(d.axis, Cylinder):
        fiber = d.axis.fiber
    elif d.triviality == "smooth":
        fiber = chain_bundle_fiber(d)
    if (
        fiber is not None
        and d.m >= 2 * d.n
        and connectivity_at_least(fiber, d.n - 1) is True
    ):
        return "derived-from-bundle-axis"
    raise HypothesisError(
        "cannot discharge the null-homotopy hypothesis: the piece is neither in "
        "the sphere-fiber class with a connected acyclic component graph nor a "
        "recognized bundle over the target sphere with an (n-1)-connected fiber; "
        "pass assume_null_homotopic=True to assert it"
    )


def _freshen(d2: RoundFoldDescriptor, taken: set[str]):
    """Rename d2's component ids away from `taken`; return (events, mapping)."""
    mapping: dict[str, str] = {}
    used = set(taken)

    def freshen(c: str) -> str:
        if c not in mapping:
            new = c
            k = 1
            while new in used:
                k += 1
                new = f"{c}_{k}"
            mapping[c] = new
            used.add(new)
        return mapping[c]

    events = []
    for e in d2.events:
        for c in inputs_of(e):
            freshen(c)
        for c, _ in outputs_of(e):
            freshen(c)
        events.append(rename_event(e, mapping))
    return tuple(events), mapping


def _all_ids(d: RoundFoldDescriptor) -> set[str]:
    ids = set()
    for e in d.events:
        ids.update(inputs_of(e))
        ids.update(c for c, _ in outputs_of(e))
    return ids


def _renamed_split_twists(prov: Provenance, mapping) -> tuple:
    out = []
    for (a, b), twist in prov.split_twists:
        out.append(((mapping.get(a, a), mapping.get(b, b)), twist))
    return tuple(out)


def combine(
    f1: RoundFoldDescriptor,
    site: CombineSite,
    f2: RoundFoldDescriptor,
    assume_null_homotopic: bool = False,
):
    """Graft f2 onto a standard-sphere proper-core component of f1.

    Returns the combined descriptor and a connected-sum note.  f2's
    outermost event must create a standard sphere (its cap is deleted and
    identified with the consumed site component); the null-homotopy
    hypothesis on f2 is discharged structurally or by explicit assertion.
    """
    f1.ensure_valid()
    f2.ensure_valid()
    if (f1.m, f1.n) != (f2.m, f2.n):
        raise HypothesisError(
            f"dimension mismatch: ({f1.m},{f1.n}) vs ({f2.m},{f2.n})"
        )
    m, n = f1.m, f1.n
    if m < 2 * n:
        raise HypothesisError(f"combining needs m >= 2n, got m={m}, n={n}")
    core1 = dict(core_fiber(f1))
    if site.component not in core1:
        raise SiteError(f"component {site.component!r} is not in the proper-core fiber")
    if not is_standard_sphere(core1[site.component], m - n):
        raise SiteError(
            f"site component {site.component!r} carries {core1[site.component]}, "
            f"need the standard {m - n}-sphere"
        )
    outer = f2.events[0]
    if not (isinstance(outer, Birth) and is_standard_sphere(outer.fiber, m - n)):
        if not assume_null_homotopic:
            raise HypothesisError(
                "f2's outermost event must create a standard sphere "
                "(or pass assume_null_homotopic=True to assert the gluing data)"
            )
        witness = "assumed"
    else:
        witness = _null_homotopy_ok(f2, assume_null_homotopic)

    taken = _all_ids(f1)
    renamed, mapping = _freshen(f2, taken)
    born = renamed[0].component if isinstance(renamed[0], Birth) else None
    tail = renamed[1:]
    if born is not None:
        tail = tuple(rename_event(e, {born: site.component}) for e in tail)
        mapping = {k: (site.component if v == born else v) for k, v in mapping.items()}

    events = f1.events + tail
    prov = Provenance(
        twist=None,
        split_twists=f1.provenance.split_twists + _renamed_split_twists(f2.provenance, mapping),
        notes=f1.provenance.notes
        + f2.provenance.notes
        + (f"combined at core component {site.component!r} (null homotopy: {witness})",),
        assumptions=f1.provenance.assumptions + f2.provenance.assumptions,
    )
    result = RoundFoldDescriptor(
        m=m,
        n=n,
        events=events,
        triviality=min_triviality(f1.triviality, f2.triviality),
        axis=f1.axis if f2.l == 1 else None,
        provenance=prov,
    )
    result.ensure_valid()
    note = SurgeryNote(
        relation="source = connected_sum(source(f1), source(f2))",
        details=(f"l = {f1.l} + {f2.l} - 1 = {result.l}", f"null homotopy: {witness}"),
    )
    return result, note


def combine_iterated(f1: RoundFoldDescriptor, sites, maps, assume_null_homotopic: bool = False):
    """Left fold of `combine` over (site, map) pairs.

    Site components must name distinct standard-sphere proper-core
    components of the accumulated map.
    """
    sites = list(sites)
    maps = list(maps)
    if len(sites) != len(maps):
        raise SiteError(f"{len(maps)} maps but {len(sites)} sites")
    core = dict(core_fiber(f1))
    spheres = [c for c, fib in core.items() if is_standard_sphere(fib, f1.fiber_dim)]
    if len(sites) > len(spheres):
        raise SiteError(
            f"site exhaustion: {len(sites)} maps to attach but only "
            f"{len(spheres)} standard-sphere core components"
        )
    acc = f1
    notes = []
    for site, f2 in zip(sites, maps):
        acc, note = combine(acc, site, f2, assume_null_homotopic=assume_null_homotopic)
        notes.append(note)
    return acc, notes


def _subtree(f: RoundFoldDescriptor, region: int, component: str):
    """Event positions (1-based) of the inward closure of (region, component).

    Component ids are globally unique, so the closure is the union-find
    class of the chosen id when every event past `region` glues its
    inputs and outputs together.  Returns None when the closure meets
    region `region` in more than the chosen component: the piece is then
    not a connected component of the preimage and the site is not
    separable.
    """
    regions = regular_fibers(f)
    parent: dict[str, str] = {}

    def find(c):
        parent.setdefault(c, c)
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    def union(ids):
        ids = list(ids)
        if not ids:
            return
        root = find(ids[0])
        for c in ids[1:]:
            parent[find(c)] = root

    for k in range(region + 1, f.l + 1):
        event = f.events[k - 1]
        union(list(inputs_of(event)) + [c for c, _ in outputs_of(event)])

    site_root = find(component)
    for c, _ in regions[region]:
        if c != component and find(c) == site_root:
            return None
    taken = []
    for k in range(region + 1, f.l + 1):
        event = f.events[k - 1]
        ids = list(inputs_of(event)) + [c for c, _ in outputs_of(event)]
        if ids and find(ids[0]) == site_root:
            taken.append(k)
    return taken


def decompose(f: RoundFoldDescriptor, site: DecomposeSite):
    """Split f along a value sphere into (f1, f2) with a connected-sum note.

    f2 is the chosen component's inward closure, capped by a fresh
    outermost sphere birth; f1 keeps everything else, with the chosen
    component riding passively to the proper core.  l1 + l2 = l + 1.
    """
    f.ensure_valid()
    m, n = f.m, f.n
    if m < 2 * n:
        raise HypothesisError(f"decomposing needs m >= 2n, got m={m}, n={n}")
    regions = regular_fibers(f)
    if not (0 <= site.region <= f.l):
        raise SiteError(f"region {site.region} out of range 0..{f.l}")
    config = dict(regions[site.region])
    if site.component not in config:
        raise SiteError(
            f"component {site.component!r} is not in region {site.region}"
        )
    if not is_standard_sphere(config[site.component], m - n):
        raise SiteError(
            f"site component carries {config[site.component]}, need the standard "
            f"{m - n}-sphere"
        )
    taken = _subtree(f, site.region, site.component)
    if taken is None:
        raise SiteError(
            "not separable at this site: a merge joins the chosen component's "
            "inward closure to another component of the same region"
        )
    taken_set = set(taken)
    sub_events = tuple(f.events[k - 1] for k in taken)
    rest_events = tuple(e for k, e in enumerate(f.events, start=1) if k not in taken_set)

    cap = Birth(site.component, normalize(config[site.component]))
    prov = f.provenance
    f2 = RoundFoldDescriptor(
        m=m,
        n=n,
        events=(cap,) + sub_events,
        triviality=f.triviality,
        axis=None,
        provenance=Provenance(
            split_twists=prov.split_twists,
            notes=(f"split off at region {site.region}, component {site.component!r}",),
        ),
    )
    f1 = RoundFoldDescriptor(
        m=m,
        n=n,
        events=rest_events,
        triviality=f.triviality,
        axis=f.axis if not sub_events else None,
        provenance=Provenance(
            split_twists=prov.split_twists,
            notes=(f"remainder after splitting off region {site.region}, "
                   f"component {site.component!r}",),
        ),
    )
    f1.ensure_valid()
    f2.ensure_valid()

    if site.null_homotopy_witness == "assumed":
        witness = "assumed"
    else:
        witness = _null_homotopy_ok(f2, assume=False)
    note = SurgeryNote(
        relation="source(f) = connected_sum(source(f1), source(f2))",
        details=(
            f"l1 + l2 = {f1.l} + {f2.l} = {f.l} + 1",
            f"null homotopy: {witness}",
            "cap: one-singular-sphere map on the split-off piece",
        ),
    )
    return f1, f2, note
