"""Quotient-space model of a descriptor and its exact invariants.

For n >= 2 the quotient of the source by fiber components is modeled as
discs glued to (S^{n-1} x L) along the capped leaves of the radial
component graph L: cells are L's vertices and edges crossed with the
minimal CW structure of S^{n-1} (one 0-cell, one (n-1)-cell), plus one
n-disc per proper-core component.  For n = 1 the model is the symmetric
double of the component graph.  Homology is exact integer homology via
Smith normal form; the source Euler characteristic is computed by
compactly-supported additivity over the value strata.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chain import ChainComplex, HomologyProfile, homology
from .descriptor import (
    Birth,
    ComponentForest,
    Death,
    Generic,
    Merge,
    RoundFoldDescriptor,
    Split,
    component_forest,
    inputs_of,
    regular_fibers,
)
from .errors import StructuralError
from .expressions import euler_of_expr, is_sphere_like, sphere_euler


@dataclass(frozen=True)
class ReebComplex:
    complex: ChainComplex
    # cell name -> ("vertex-point" | "vertex-shell" | "edge-point" |
    #               "edge-shell" | "cap", anchor)
    provenance: dict
    forest: ComponentForest
    n: int

    @property
    def cap_count(self) -> int:
        return sum(1 for kind, _ in self.provenance.values() if kind == "cap")


def build_reeb(d: RoundFoldDescriptor) -> ReebComplex:
    """CW model of the fiber-component quotient space."""
    d.ensure_valid()
    forest = component_forest(d)
    if d.n == 1:
        return _doubled_graph_complex(d, forest)
    n = d.n

    zero_cells = []
    shell_cells = []
    provenance = {}
    vertex_ids = [v.id for v in forest.vertices]
    for vid in vertex_ids:
        p = f"{vid}|p"
        s = f"{vid}|s"
        zero_cells.append(p)
        shell_cells.append(s)
        provenance[p] = ("vertex-point", vid)
        provenance[s] = ("vertex-shell", vid)
    edge_point = []
    edge_shell = []
    for idx, e in enumerate(forest.edges):
        ep = f"E{idx}|p"
        es = f"E{idx}|s"
        edge_point.append(ep)
        edge_shell.append(es)
        provenance[ep] = ("edge-point", idx)
        provenance[es] = ("edge-shell", idx)
    caps = []
    for cap_vid in forest.capped:
        comp = cap_vid.split(":", 1)[1]
        name = f"cap[{comp}]"
        caps.append(name)
        provenance[name] = ("cap", comp)

    vindex = {vid: i for i, vid in enumerate(vertex_ids)}

    cells = {0: tuple(zero_cells)}
    boundaries: dict[int, list[list[int]]] = {}

    if n == 2:
        cells[1] = tuple(edge_point) + tuple(shell_cells)
        cells[2] = tuple(edge_shell) + tuple(caps)
    else:
        cells[1] = tuple(edge_point)
        cells[n - 1] = tuple(shell_cells)
        cells[n] = tuple(edge_shell) + tuple(caps)

    # d1: edge-point cells map to head - tail; shell cells (n = 2) map to 0.
    d1 = [[0] * len(cells[1]) for _ in zero_cells]
    for j, e in enumerate(forest.edges):
        d1[vindex[e.head]][j] += 1
        d1[vindex[e.tail]][j] -= 1
    boundaries[1] = d1

    # dn: edge-shell cells map to (head - tail) shells, caps to their leaf shell.
    shell_index = {vid: i for i, vid in enumerate(vertex_ids)}
    rows = len(shell_cells)
    offset = len(edge_point) if n == 2 else 0
    dn = [[0] * (len(edge_shell) + len(caps)) for _ in range(rows)]
    for j, e in enumerate(forest.edges):
        dn[shell_index[e.head]][j] += 1
        dn[shell_index[e.tail]][j] -= 1
    for j, cap_vid in enumerate(forest.capped):
        dn[shell_index[cap_vid]][len(edge_shell) + j] += 1
    if n == 2:
        # Degree-1 cells are edge-points followed by shells; pad rows.
        padded = [[0] * len(cells[2]) for _ in range(len(cells[1]))]
        for i in range(rows):
            padded[offset + i] = dn[i]
        boundaries[2] = padded
    else:
        boundaries[n] = dn
        # Shell cells in degree n-1 have zero boundary; implicit zero matrix.

    complex = ChainComplex(cells, boundaries)
    return ReebComplex(complex=complex, provenance=provenance, forest=forest, n=n)


def _doubled_graph_complex(d: RoundFoldDescriptor, forest: ComponentForest) -> ReebComplex:
    """n = 1: two mirror copies of the graph glued along the core components."""
    provenance = {}
    zero_cells = []
    one_cells = []
    vmap = {}
    for half in (0, 1):
        for v in forest.vertices:
            if v.kind == "cap":
                continue
            name = f"h{half}|{v.id}"
            vmap[(half, v.id)] = name
            zero_cells.append(name)
            provenance[name] = ("vertex-point", name)
    junction = {}
    for cap_vid in forest.capped:
        comp = cap_vid.split(":", 1)[1]
        name = f"j|{comp}"
        junction[cap_vid] = name
        zero_cells.append(name)
        provenance[name] = ("vertex-point", name)

    incidence = []
    for half in (0, 1):
        for idx, e in enumerate(forest.edges):
            name = f"h{half}|E{idx}"
            one_cells.append(name)
            provenance[name] = ("edge-point", (half, idx))
            head = junction.get(e.head) or vmap[(half, e.head)]
            tail = vmap[(half, e.tail)]
            incidence.append((tail, head))
    vindex = {name: i for i, name in enumerate(zero_cells)}
    d1 = [[0] * len(one_cells) for _ in zero_cells]
    for j, (tail, head) in enumerate(incidence):
        d1[vindex[head]][j] += 1
        d1[vindex[tail]][j] -= 1
    complex = ChainComplex({0: tuple(zero_cells), 1: tuple(one_cells)}, {1: d1})
    return ReebComplex(complex=complex, provenance=provenance, forest=forest, n=1)


def reeb_homology(d: RoundFoldDescriptor) -> HomologyProfile:
    return homology(build_reeb(d).complex)


# ---------------------------------------------------------------------------
# Euler characteristic by stratified additivity


def _singular_fiber_euler(d, regions, k: int) -> int:
    """Euler number of the level set over the k-th singular sphere (1-based)."""
    event = d.events[k - 1]
    before = dict(regions[k - 1])
    passive = sum(
        euler_of_expr(fib) for c, fib in before.items() if c not in set(inputs_of(event))
    )
    if isinstance(event, (Birth, Death)):
        involved = 1  # the sphere collapses to a point
    elif isinstance(event, Split):
        involved = euler_of_expr(event.fiber1) + euler_of_expr(event.fiber2) - 1
    elif isinstance(event, Merge):
        involved = (
            euler_of_expr(before[event.parent1]) + euler_of_expr(before[event.parent2]) - 1
        )
    elif isinstance(event, Generic):
        involved = event.singular_euler
    else:  # pragma: no cover
        raise StructuralError(f"unknown event {event!r}")
    return passive + involved


def euler_characteristic(d: RoundFoldDescriptor) -> int:
    """chi of the source manifold, by additivity over value strata.

    Open annuli contribute -chi(S^{n-1}) times their fiber, the open core
    disc contributes (-1)^n times its fiber, and each singular sphere
    contributes chi(S^{n-1}) times its singular level set, where folded
    components count a cone point in place of the vanished sphere.
    """
    regions = regular_fibers(d)
    l = d.l

    def chi_region(j):
        return sum(euler_of_expr(fib) for _, fib in regions[j])

    if d.n == 1:
        total = 0
        for j in range(1, l):
            total += 2 * (-1) * chi_region(j)
        total += (-1) * chi_region(l)
        for k in range(1, l + 1):
            total += 2 * _singular_fiber_euler(d, regions, k)
        return total

    chi_shell = sphere_euler(d.n - 1)
    total = 0
    for j in range(1, l):
        total += -chi_shell * chi_region(j)
    total += (-1) ** d.n * chi_region(l)
    for k in range(1, l + 1):
        total += chi_shell * _singular_fiber_euler(d, regions, k)
    return total


# ---------------------------------------------------------------------------
# Homotopy/homology report for the sphere-fiber class


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    ok: bool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


@dataclass(frozen=True)
class SphereClassReport:
    eligible: bool
    checks: tuple[HypothesisCheck, ...]
    core_components: int | None = None
    h_degree: int | None = None
    h_rank: int | None = None
    pi_statements: tuple[str, ...] = ()
    quotient_homology: HomologyProfile | None = None
    cross_check_ok: bool | None = None

    def to_json(self):
        return {
            "eligible": self.eligible,
            "checks": [c.to_json() for c in self.checks],
            "core_components": self.core_components,
            "h": None
            if self.h_degree is None
            else {"degree": self.h_degree, "rank": self.h_rank},
            "pi": list(self.pi_statements),
            "quotient_homology": None
            if self.quotient_homology is None
            else self.quotient_homology.to_json(),
            "cross_check_ok": self.cross_check_ok,
        }


def _acceptable_sphere_fiber(fib) -> bool:
    from .expressions import HomotopySphere

    if not is_sphere_like(fib):
        return False
    # A homotopy 4-sphere is not known to be a twisted double of a disc.
    if isinstance(fib, HomotopySphere) and fib.dim == 4:
        return False
    return True


def prop1_report(d: RoundFoldDescriptor) -> SphereClassReport:
    """Homotopy/homology statements for sphere-fiber, index 0/1 maps.

    The first group of statements needs regular fibers that are twisted
    spheres and fold indices 0/1; the rank statement additionally needs
    m >= 2n and a simply-connected source, which is derived from the
    component graph being a capped tree.  Everything asserted is
    cross-checked against the quotient model's homology.
    """
    d.ensure_valid()
    checks = []
    m, n, l_events = d.m, d.n, d.l
    regions = regular_fibers(d)
    forest = component_forest(d)

    fibers_ok = all(
        _acceptable_sphere_fiber(fib) for region in regions for _, fib in region
    )
    indices_ok = all(not isinstance(e, Generic) for e in d.events)
    checks.append(
        HypothesisCheck("regular fibers are twisted spheres", fibers_ok)
    )
    checks.append(HypothesisCheck("fold indices are 0 or 1", indices_ok))
    checks.append(HypothesisCheck("m > n >= 2", m > n >= 2, f"m={m}, n={n}"))
    first_clause = fibers_ok and indices_ok and m > n >= 2

    simply_connected = (
        forest.connected and forest.cycle_count == 0 and len(forest.capped) >= 1
    )
    checks.append(
        HypothesisCheck(
            "source simply connected (derived: component graph is a capped tree)",
            simply_connected,
        )
    )
    checks.append(HypothesisCheck("m >= 2n", m >= 2 * n, f"m={m}, n={n}"))
    second_clause = first_clause and simply_connected and m >= 2 * n

    if not first_clause:
        return SphereClassReport(False, tuple(checks))

    core_count = len(regions[-1])
    pi = tuple(
        [f"pi_k(M) = pi_k(W) for 0 <= k <= {m - n - 1} (quotient map)"]
        + ([f"pi_k(M) = 0 for 1 <= k <= {n - 1}"] if second_clause else [])
        + ["degrees above are the only ones determined here"]
    )
    profile = reeb_homology(d)
    if not second_clause:
        return SphereClassReport(
            True, tuple(checks), core_components=core_count,
            pi_statements=pi, quotient_homology=profile,
        )

    rank = (core_count - 1) if m > 2 * n else 2 * (core_count - 1)
    cross = profile.rank(n) == core_count - 1 and profile.rank(0) == 1
    for k in range(1, n):
        cross = cross and profile.rank(k) == 0 and not profile.torsion(k)
    cross = cross and not profile.torsion(n)
    return SphereClassReport(
        True,
        tuple(checks),
        core_components=core_count,
        h_degree=n,
        h_rank=rank,
        pi_statements=pi,
        quotient_homology=profile,
        cross_check_ok=cross,
    )
