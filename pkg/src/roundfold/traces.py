"""Boundary-anchored Morse function skeletons.

A trace lists the fiber of the minimum level (the source boundary) and
the ordered critical events read upward from it; replaying the events
must end with the empty configuration.  Traces feed the spinning
construction, which turns them into round fold descriptors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .descriptor import (
    AxisFiber,
    Birth,
    Death,
    FoldEvent,
    Generic,
    Merge,
    Split,
    Violation,
)
from .errors import StructuralError
from .expressions import (
    ConnectedSum,
    ManifoldExpr,
    Named,
    Product,
    StandardSphere,
    is_sphere_like,
    normalize,
    sphere_euler,
    euler_of_expr,
)


@dataclass(frozen=True)
class MorseTrace:
    boundary: tuple[tuple[str, ManifoldExpr], ...]
    events: tuple[FoldEvent, ...]
    label: AxisFiber | None = None

    @property
    def fiber_dim(self) -> int:
        if self.boundary:
            return self.boundary[0][1].dim
        for e in self.events:
            if isinstance(e, Birth):
                return e.fiber.dim
        raise StructuralError("cannot determine fiber dimension of an empty trace")

    def __str__(self):
        from . import dsl

        return dsl.print_trace(self)


def validate_trace(t: MorseTrace) -> list[Violation]:
    """Replay upward from the boundary; must end empty."""
    violations: list[Violation] = []
    config: dict[str, ManifoldExpr] = {}
    used: set[str] = set()
    dims = {expr.dim for _, expr in t.boundary}
    if len(dims) > 1:
        violations.append(Violation("boundary components must share a dimension"))
        return violations
    for cid, expr in t.boundary:
        if cid in used:
            violations.append(Violation(f"boundary id {cid!r} reused"))
        used.add(cid)
        config[cid] = expr
    try:
        d = t.fiber_dim
    except StructuralError as exc:
        violations.append(Violation(str(exc)))
        return violations

    for pos, event in enumerate(t.events, start=1):
        if isinstance(event, Birth):
            if not is_sphere_like(event.fiber):
                violations.append(Violation("minimum creates a sphere component", pos))
            if event.component in used:
                violations.append(Violation(f"id {event.component!r} reused", pos))
                return violations
            used.add(event.component)
            config[event.component] = event.fiber
        elif isinstance(event, Death):
            if event.component not in config:
                violations.append(Violation(f"death of absent component {event.component!r}", pos))
                return violations
            if not is_sphere_like(config[event.component]):
                violations.append(Violation("maximum kills a sphere component", pos))
            del config[event.component]
        elif isinstance(event, Split):
            if event.parent not in config:
                violations.append(Violation(f"split of absent component {event.parent!r}", pos))
                return violations
            del config[event.parent]
            for c, fib in ((event.child1, event.fiber1), (event.child2, event.fiber2)):
                if c in used:
                    violations.append(Violation(f"id {c!r} reused", pos))
                    return violations
                used.add(c)
                config[c] = fib
        elif isinstance(event, Merge):
            for p in (event.parent1, event.parent2):
                if p not in config:
                    violations.append(Violation(f"merge of absent component {p!r}", pos))
                    return violations
            del config[event.parent1]
            del config[event.parent2]
            if event.child in used:
                violations.append(Violation(f"id {event.child!r} reused", pos))
                return violations
            used.add(event.child)
            config[event.child] = event.fiber
        elif isinstance(event, Generic):
            if event.component not in config:
                violations.append(
                    Violation(f"generic event on absent component {event.component!r}", pos)
                )
                return violations
            current = config[event.component]
            if normalize(current) != normalize(event.before):
                violations.append(
                    Violation(
                        f"generic event declares {event.before} but component carries {current}",
                        pos,
                    )
                )
            config[event.component] = event.after
        for cid, expr in config.items():
            if expr.dim != d:
                violations.append(
                    Violation(f"component {cid!r} has dimension {expr.dim}, expected {d}", pos)
                )
                return violations
    if config:
        violations.append(
            Violation("trace does not terminate at empty fiber "
                      f"(components {sorted(config)} survive the top level)")
        )
    return violations


# ---------------------------------------------------------------------------
# Canonical traces


def sphere_trace(fiber: ManifoldExpr) -> MorseTrace:
    """Two-critical trace on the cylinder over a sphere-like fiber."""
    if not is_sphere_like(fiber):
        raise StructuralError(f"sphere trace needs a sphere-like fiber, got {fiber}")
    return MorseTrace(
        boundary=(("b1", fiber), ("b2", fiber)),
        events=(Merge("b1", "b2", "t1", fiber), Death("t1")),
    )


def _interior_cells(factor_cells: list[tuple[int, ...]]) -> list[int]:
    """Cell dimensions of the product CW structure, interior cells only."""
    dims = [0]
    for cells in factor_cells:
        dims = [a + b for a in dims for b in cells]
    dims.sort()
    top = dims[-1]
    interior = [x for x in dims if 0 < x < top]
    if dims.count(0) != 1 or dims.count(top) != 1:
        raise StructuralError("product cell structure must have unique bottom and top cells")
    return interior


def product_trace(fiber: ManifoldExpr, factor_cells=None, name=None) -> MorseTrace:
    """One critical per cell of the fiber's standard CW structure.

    The level sets are doubles of the complementary handlebodies: the two
    boundary copies merge into fiber # fiber, one generic event per
    interior cell peels the Morse data down to a sphere, and the top cell
    kills it.  For a two-factor sphere product the intermediate level is
    the fiber itself; deeper stages get opaque named labels carrying exact
    euler numbers derived from the surgery bookkeeping.
    """
    fiber = normalize(fiber)
    d = fiber.dim
    if factor_cells is None:
        if not isinstance(fiber, Product) or not all(
            isinstance(f, StandardSphere) for f in fiber.factors
        ):
            raise StructuralError(
                f"no canonical cell structure for {fiber}; pass factor_cells explicitly"
            )
        factor_cells = [(0, f.dim) for f in fiber.factors]
    interior = _interior_cells(factor_cells)
    if not interior:
        return sphere_trace(fiber)

    chi_fiber = euler_of_expr(fiber)
    # Level labels after the merge, one per interior cell crossed upward.
    labels: list[ManifoldExpr] = [normalize(ConnectedSum((fiber, fiber)))]
    chis = [2 * chi_fiber - sphere_euler(d)]
    for j, delta in enumerate(interior):
        mu = delta + 1
        chi_next = chis[-1] - sphere_euler(mu - 1) + sphere_euler(d - mu)
        if j == len(interior) - 1:
            nxt: ManifoldExpr = StandardSphere(d)
        elif len(interior) == 2 and j == 0:
            nxt = fiber
        else:
            nxt = Named(f"level[{_slug(fiber)}:{j + 1}]", d, euler=chi_next)
        labels.append(nxt)
        chis.append(chi_next)
    if chis[-1] != sphere_euler(d):
        raise StructuralError("euler bookkeeping of the canonical trace is inconsistent")

    events: list[FoldEvent] = [Merge("b1", "b2", "t1", labels[0])]
    for j, delta in enumerate(interior):
        mu = delta + 1
        index = min(mu, d + 1 - mu)
        chi_sing = chis[j] - sphere_euler(mu - 1) + 1
        events.append(Generic(index, "t1", labels[j], labels[j + 1], chi_sing))
    events.append(Death("t1"))
    return MorseTrace(boundary=(("b1", fiber), ("b2", fiber)), events=tuple(events))


def _slug(expr: ManifoldExpr) -> str:
    if isinstance(expr, StandardSphere):
        return f"S{expr.dim}"
    if isinstance(expr, Product):
        return "x".join(_slug(f) for f in expr.factors)
    if isinstance(expr, Named):
        return expr.name
    return f"dim{expr.dim}"


def canonical_trace(fiber: ManifoldExpr, factor_cells=None) -> MorseTrace:
    """Default trace for catalog fibers: spheres and sphere products."""
    fiber = normalize(fiber)
    if is_sphere_like(fiber):
        return sphere_trace(fiber)
    return product_trace(fiber, factor_cells=factor_cells)
