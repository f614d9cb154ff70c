"""Combinatorial normal form of a round fold map.

A descriptor stores the source/target dimensions, the ordered fold events
on concentric value spheres (outermost first), the declared triviality of
the surrounding bundle, and an optional axis-fiber label.  Validation
replays the events once, caching the regular fiber of every annulus
region; the replay also yields the radial component graph that the Reeb
model is built on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import StructuralError, ValidationFailure
from .expressions import (
    ManifoldExpr,
    is_sphere_like,
    is_standard_sphere,
    normalize,
)

TRIVIALITY_LEVELS = ("none", "top", "pl", "smooth")


def min_triviality(a: str, b: str) -> str:
    return a if TRIVIALITY_LEVELS.index(a) <= TRIVIALITY_LEVELS.index(b) else b


# ---------------------------------------------------------------------------
# Fold events


@dataclass(frozen=True)
class Birth:
    component: str
    fiber: ManifoldExpr


@dataclass(frozen=True)
class Death:
    component: str


@dataclass(frozen=True)
class Split:
    parent: str
    child1: str
    fiber1: ManifoldExpr
    child2: str
    fiber2: ManifoldExpr


@dataclass(frozen=True)
class Merge:
    parent1: str
    parent2: str
    child: str
    fiber: ManifoldExpr


@dataclass(frozen=True)
class Generic:
    index: int
    component: str
    before: ManifoldExpr
    after: ManifoldExpr
    singular_euler: int


FoldEvent = Birth | Death | Split | Merge | Generic


def event_index(event: FoldEvent) -> int:
    """Fold index of the event's singular sphere."""
    if isinstance(event, (Birth, Death)):
        return 0
    if isinstance(event, (Split, Merge)):
        return 1
    return event.index


def inputs_of(event: FoldEvent) -> tuple[str, ...]:
    if isinstance(event, Birth):
        return ()
    if isinstance(event, Death):
        return (event.component,)
    if isinstance(event, Split):
        return (event.parent,)
    if isinstance(event, Merge):
        return (event.parent1, event.parent2)
    return (event.component,)


def outputs_of(event: FoldEvent) -> tuple[tuple[str, ManifoldExpr], ...]:
    if isinstance(event, Birth):
        return ((event.component, event.fiber),)
    if isinstance(event, Death):
        return ()
    if isinstance(event, Split):
        return ((event.child1, event.fiber1), (event.child2, event.fiber2))
    if isinstance(event, Merge):
        return ((event.child, event.fiber),)
    return ((event.component, event.after),)


def rename_event(event: FoldEvent, mapping) -> FoldEvent:
    r = lambda c: mapping.get(c, c)
    if isinstance(event, Birth):
        return Birth(r(event.component), event.fiber)
    if isinstance(event, Death):
        return Death(r(event.component))
    if isinstance(event, Split):
        return Split(r(event.parent), r(event.child1), event.fiber1, r(event.child2), event.fiber2)
    if isinstance(event, Merge):
        return Merge(r(event.parent1), r(event.parent2), r(event.child), event.fiber)
    return Generic(event.index, r(event.component), event.before, event.after, event.singular_euler)


# ---------------------------------------------------------------------------
# Axis-fiber labels


@dataclass(frozen=True)
class Cylinder:
    fiber: ManifoldExpr


@dataclass(frozen=True)
class PuncturedCylinder:
    fiber: ManifoldExpr
    holes: int


@dataclass(frozen=True)
class NamedWithBoundary:
    name: str
    boundary: tuple[ManifoldExpr, ...] = ()
    boundary_n_minus_1_connected: bool = False
    pi_n_minus_1_trivial: bool = False


AxisFiber = Cylinder | PuncturedCylinder | NamedWithBoundary


# ---------------------------------------------------------------------------
# Provenance metadata (excluded from equality; not serialized in the DSL)


@dataclass(frozen=True)
class Provenance:
    twist: str | None = None
    # ((child1, child2) -> twist label) for split events produced by bundle
    # builders; survives surgery renaming so classification can round-trip.
    split_twists: tuple[tuple[tuple[str, str], str], ...] = ()
    restriction_trivial: bool = False
    assumptions: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def split_twist_map(self):
        return dict(self.split_twists)

    def with_note(self, note: str) -> "Provenance":
        return Provenance(
            self.twist, self.split_twists, self.restriction_trivial,
            self.assumptions, self.notes + (note,),
        )


# ---------------------------------------------------------------------------
# Descriptor


@dataclass(frozen=True)
class RoundFoldDescriptor:
    m: int
    n: int
    events: tuple[FoldEvent, ...]
    triviality: str = "none"
    axis: AxisFiber | None = None
    provenance: Provenance = field(default=Provenance(), compare=False, repr=False)

    @property
    def l(self) -> int:
        """Number of singular value spheres (= events)."""
        return len(self.events)

    @property
    def fiber_dim(self) -> int:
        return self.m - self.n

    @property
    def half_trace(self) -> bool:
        """n = 1 descriptors store only the inward half of the symmetric form."""
        return self.n == 1

    @property
    def singular_component_count(self) -> int:
        return 2 * self.l if self.half_trace else self.l

    def validation(self) -> "ValidationReport":
        cached = getattr(self, "_report", None)
        if cached is None:
            cached = _validate(self)
            object.__setattr__(self, "_report", cached)
        return cached

    def ensure_valid(self) -> "ValidationReport":
        report = self.validation()
        if not report.ok:
            raise ValidationFailure(report.violations)
        return report

    def __str__(self):
        from . import dsl

        return dsl.print_descriptor(self)


@dataclass(frozen=True)
class Violation:
    message: str
    event: int | None = None  # 1-based event position

    def __str__(self):
        if self.event is None:
            return self.message
        return f"event {self.event}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]
    # Region fibers, outermost first: regions[0] == {} always, regions[l] is
    # the proper-core fiber.  Only present when replay succeeded.
    regions: tuple[tuple[tuple[str, ManifoldExpr], ...], ...] | None

    @property
    def core(self):
        if self.regions is None:
            return None
        return self.regions[-1]


def _validate(d: RoundFoldDescriptor) -> ValidationReport:
    violations: list[Violation] = []
    if d.n < 1:
        violations.append(Violation(f"target dimension must be >= 1, got {d.n}"))
    if d.m < d.n:
        violations.append(Violation(f"need m >= n, got m={d.m}, n={d.n}"))
    if d.l < 1:
        violations.append(Violation("a round fold map has at least one singular sphere"))
    if d.triviality not in TRIVIALITY_LEVELS:
        violations.append(Violation(f"unknown triviality level {d.triviality!r}"))
    if violations:
        return ValidationReport(False, tuple(violations), None)

    fd = d.fiber_dim
    max_index = (fd + 1) // 2
    config: dict[str, ManifoldExpr] = {}
    used: set[str] = set()
    regions: list[tuple[tuple[str, ManifoldExpr], ...]] = [()]

    def fresh(c, k):
        if c in used:
            violations.append(Violation(f"component id {c!r} reused", k))
            return False
        used.add(c)
        return True

    def present(c, k):
        if c not in config:
            violations.append(Violation(f"{_kind(d.events[k - 1])} on absent component {c!r}", k))
            return False
        return True

    def check_dim(expr, k, role):
        if expr.dim != fd:
            violations.append(
                Violation(f"{role} has dimension {expr.dim}, fibers must have dimension {fd}", k)
            )

    def check_spherelike(expr, k, role):
        if not is_sphere_like(expr):
            violations.append(
                Violation(f"{role} must be a standard or twisted sphere, got {expr}", k)
            )

    replay_ok = True
    for pos, event in enumerate(d.events, start=1):
        step_ok = True
        if isinstance(event, Birth):
            check_spherelike(event.fiber, pos, "birth component")
            check_dim(event.fiber, pos, "birth component")
            step_ok &= fresh(event.component, pos)
            if step_ok:
                config[event.component] = event.fiber
        elif isinstance(event, Death):
            step_ok &= present(event.component, pos)
            if step_ok:
                check_spherelike(config[event.component], pos, "dying component")
                del config[event.component]
        elif isinstance(event, Split):
            if fd < 1:
                violations.append(Violation("index-1 folds need m - n >= 1", pos))
            step_ok &= present(event.parent, pos)
            if event.child1 == event.child2:
                violations.append(Violation("split children must be distinct", pos))
                step_ok = False
            for child, fib in ((event.child1, event.fiber1), (event.child2, event.fiber2)):
                check_dim(fib, pos, f"split child {child!r}")
            if step_ok:
                del config[event.parent]
                step_ok &= fresh(event.child1, pos)
                step_ok &= fresh(event.child2, pos)
                if step_ok:
                    config[event.child1] = event.fiber1
                    config[event.child2] = event.fiber2
        elif isinstance(event, Merge):
            if fd < 1:
                violations.append(Violation("index-1 folds need m - n >= 1", pos))
            if event.parent1 == event.parent2:
                violations.append(Violation("merge parents must be distinct", pos))
                step_ok = False
            step_ok &= present(event.parent1, pos)
            step_ok &= present(event.parent2, pos)
            check_dim(event.fiber, pos, "merged component")
            if step_ok:
                del config[event.parent1]
                del config[event.parent2]
                step_ok &= fresh(event.child, pos)
                if step_ok:
                    config[event.child] = event.fiber
        elif isinstance(event, Generic):
            if not (1 <= event.index <= max_index):
                violations.append(
                    Violation(
                        f"fold index {event.index} outside 1..{max_index} for m-n={fd}", pos
                    )
                )
            step_ok &= present(event.component, pos)
            check_dim(event.before, pos, "generic event label (before)")
            check_dim(event.after, pos, "generic event label (after)")
            if step_ok:
                current = config[event.component]
                if normalize(current) != normalize(event.before):
                    violations.append(
                        Violation(
                            f"generic event declares label {event.before} but component "
                            f"{event.component!r} currently carries {current}",
                            pos,
                        )
                    )
                config[event.component] = event.after
        else:
            violations.append(Violation(f"unknown event {event!r}", pos))
            step_ok = False
        if not step_ok:
            replay_ok = False
            break
        regions.append(tuple(config.items()))

    if not replay_ok:
        return ValidationReport(False, tuple(violations), None)

    core = regions[-1]
    if isinstance(d.axis, Cylinder):
        want = normalize(d.axis.fiber)
        matching = [c for c, fib in core if normalize(fib) == want]
        if len(matching) < 2:
            violations.append(
                Violation(
                    f"axis label cylinder({d.axis.fiber}) requires two proper-core "
                    f"components equal to the fiber, found {len(matching)}"
                )
            )
    elif isinstance(d.axis, PuncturedCylinder):
        if d.axis.holes < 1:
            violations.append(Violation("punctured cylinder needs at least one hole"))

    ok = not violations
    return ValidationReport(ok, tuple(violations), tuple(regions) if ok else None)


def _kind(event: FoldEvent) -> str:
    return type(event).__name__.lower()


def regular_fibers(d: RoundFoldDescriptor):
    """Region fibers, outermost first (length l+1); entry l is the core."""
    return d.ensure_valid().regions


def core_fiber(d: RoundFoldDescriptor):
    return regular_fibers(d)[-1]


# ---------------------------------------------------------------------------
# Component forest (the radial graph L)


@dataclass(frozen=True)
class ForestVertex:
    id: str
    kind: str  # "event" | "pass" | "cap"
    event: int | None = None  # 1-based, for event vertices
    component: str | None = None


@dataclass(frozen=True)
class ForestEdge:
    region: int
    component: str
    fiber: ManifoldExpr
    tail: str  # outward endpoint vertex id
    head: str  # inward endpoint vertex id


@dataclass(frozen=True)
class ComponentForest:
    vertices: tuple[ForestVertex, ...]
    edges: tuple[ForestEdge, ...]
    capped: tuple[str, ...]  # cap vertex ids, in core order
    free_leaves: tuple[str, ...]  # degree-1 event vertex ids
    connected: bool
    component_count: int
    cycle_count: int

    def degree(self, vertex_id: str) -> int:
        return sum((e.tail == vertex_id) + (e.head == vertex_id) for e in self.edges)


def component_forest(d: RoundFoldDescriptor) -> ComponentForest:
    """The radial component graph: one edge per (region, component)."""
    regions = regular_fibers(d)
    l = d.l
    vertices: dict[str, ForestVertex] = {}
    edges: list[ForestEdge] = []

    def event_vertex(k):
        vid = f"e{k}"
        vertices.setdefault(vid, ForestVertex(vid, "event", event=k))
        return vid

    def pass_vertex(k, c):
        vid = f"p{k}:{c}"
        vertices.setdefault(vid, ForestVertex(vid, "pass", event=k, component=c))
        return vid

    def cap_vertex(c):
        vid = f"cap:{c}"
        vertices.setdefault(vid, ForestVertex(vid, "cap", component=c))
        return vid

    for k in range(1, l + 1):
        event_vertex(k)  # every singular sphere is a vertex of L

    for k in range(1, l + 1):
        outs = {c for c, _ in outputs_of(d.events[k - 1])}
        for c, fib in regions[k]:
            tail = event_vertex(k) if c in outs else pass_vertex(k, c)
            if k < l:
                ins = set(inputs_of(d.events[k]))
                head = event_vertex(k + 1) if c in ins else pass_vertex(k + 1, c)
            else:
                head = cap_vertex(c)
            edges.append(ForestEdge(k, c, fib, tail, head))

    # Connectivity and cycle rank over the realized graph.
    adjacency: dict[str, list[str]] = {v: [] for v in vertices}
    for e in edges:
        adjacency[e.tail].append(e.head)
        adjacency[e.head].append(e.tail)
    seen: set[str] = set()
    n_components = 0
    for v in vertices:
        if v not in seen:
            n_components += 1
            stack = [v]
            seen.add(v)
            while stack:
                u = stack.pop()
                for w in adjacency[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
    cycles = len(edges) - len(vertices) + n_components

    degree: dict[str, int] = {v: 0 for v in vertices}
    for e in edges:
        degree[e.tail] += 1
        degree[e.head] += 1
    free = tuple(
        v.id for v in vertices.values() if v.kind == "event" and degree[v.id] == 1
    )
    capped = tuple(cap_vertex(c) for c, _ in regions[-1])

    return ComponentForest(
        vertices=tuple(vertices.values()),
        edges=tuple(edges),
        capped=capped,
        free_leaves=free,
        connected=(n_components <= 1),
        component_count=n_components,
        cycle_count=cycles,
    )


# ---------------------------------------------------------------------------
# Structural comparison up to component renaming


def descriptor_isomorphic(d1: RoundFoldDescriptor, d2: RoundFoldDescriptor) -> bool:
    """Event-list equality up to a consistent renaming of component ids.

    Axis labels are construction metadata and are not compared.
    """
    if (d1.m, d1.n, d1.triviality, d1.l) != (d2.m, d2.n, d2.triviality, d2.l):
        return False
    fwd: dict[str, str] = {}
    bwd: dict[str, str] = {}

    def bind(a, b):
        if fwd.get(a, b) != b or bwd.get(b, a) != a:
            return False
        fwd[a] = b
        bwd[b] = a
        return True

    for e1, e2 in zip(d1.events, d2.events):
        if type(e1) is not type(e2):
            return False
        if isinstance(e1, Birth):
            if normalize(e1.fiber) != normalize(e2.fiber) or not bind(e1.component, e2.component):
                return False
        elif isinstance(e1, Death):
            if not bind(e1.component, e2.component):
                return False
        elif isinstance(e1, Split):
            if normalize(e1.fiber1) != normalize(e2.fiber1):
                return False
            if normalize(e1.fiber2) != normalize(e2.fiber2):
                return False
            if not (bind(e1.parent, e2.parent) and bind(e1.child1, e2.child1) and bind(e1.child2, e2.child2)):
                return False
        elif isinstance(e1, Merge):
            if normalize(e1.fiber) != normalize(e2.fiber):
                return False
            if not (bind(e1.parent1, e2.parent1) and bind(e1.parent2, e2.parent2) and bind(e1.child, e2.child)):
                return False
        else:
            if (e1.index, e1.singular_euler) != (e2.index, e2.singular_euler):
                return False
            if normalize(e1.before) != normalize(e2.before) or normalize(e1.after) != normalize(e2.after):
                return False
            if not bind(e1.component, e2.component):
                return False
    return True


class IdGen:
    """Deterministic component id source: c1, c2, ... skipping taken ids."""

    def __init__(self, taken=()):
        self.taken = set(taken)
        self.counter = 0

    def fresh(self) -> str:
        while True:
            self.counter += 1
            cid = f"c{self.counter}"
            if cid not in self.taken:
                self.taken.add(cid)
                return cid
