"""Recognition and synthesis for round fold descriptors.

`classify` rewrites a qualifying descriptor into a canonical manifold
expression together with the chain of rules applied and their checked
hypotheses; `synthesize` builds a descriptor realizing a qualifying
expression, and the two are mutually inverse on the sphere-bundle
connected-sum fragment.  `dim5_recognizer` decides the dimension-5,
plane-target question both ways.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constructions import from_bundle
from .descriptor import (
    Birth,
    Cylinder,
    Generic,
    PuncturedCylinder,
    RoundFoldDescriptor,
    Split,
    component_forest,
    core_fiber,
    regular_fibers,
)
from .errors import HypothesisError, ScopeError, SiteError, StructuralError
from .expressions import (
    AlmostSphere,
    BundleTotal,
    ConnectedSum,
    HomotopySphere,
    ManifoldExpr,
    Named,
    Product,
    StandardSphere,
    THETA_7_COUNT,
    THETA_7_NO_SPECIAL_GENERIC_INTO_R3,
    connectivity_at_least,
    is_simply_connected,
    is_sphere_like,
    is_standard_sphere,
    normalize,
)
from .reeb import HypothesisCheck
from .surgery import CombineSite, DecomposeSite, chain_bundle_fiber, combine, decompose

_CONFIDENCE_ORDER = (None, "homeomorphism", "PL", "diffeomorphism")
_FLAG_TIER = {"none": None, "top": "homeomorphism", "pl": "PL", "smooth": "diffeomorphism"}


def _min_confidence(a, b):
    return a if _CONFIDENCE_ORDER.index(a) <= _CONFIDENCE_ORDER.index(b) else b


@dataclass(frozen=True)
class RuleRecord:
    rule: str
    name: str
    conclusion: str
    hypotheses: tuple[HypothesisCheck, ...] = ()
    notes: tuple[str, ...] = ()

    def to_json(self):
        return {
            "rule": self.rule,
            "name": self.name,
            "conclusion": self.conclusion,
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class ClassificationResult:
    manifold: ManifoldExpr | None
    confidence: str | None
    chain: tuple[RuleRecord, ...]
    unclassified_reasons: tuple[str, ...] = ()

    @property
    def classified(self) -> bool:
        return self.manifold is not None

    def to_json(self):
        from .dsl import print_expr
        from .expressions import expr_to_json

        return {
            "manifold": None if self.manifold is None else print_expr(self.manifold),
            "manifold_json": None if self.manifold is None else expr_to_json(self.manifold),
            "confidence": self.confidence,
            "chain": [r.to_json() for r in self.chain],
            "unclassified_reasons": list(self.unclassified_reasons),
        }


class _Labels:
    """Deterministic fresh labels per classification run."""

    def __init__(self):
        self.counters = {}

    def fresh(self, prefix: str) -> str:
        k = self.counters.get(prefix, 0) + 1
        self.counters[prefix] = k
        return f"{prefix}{k}"


def _twist_for_split(d: RoundFoldDescriptor, split: Split, labels: _Labels) -> str | None:
    recorded = d.provenance.split_twist_map().get((split.child1, split.child2))
    if recorded is not None:
        return recorded or None
    return labels.fresh("tau")


def _theta_label(labels: _Labels, m: int, n: int) -> str:
    return f"{labels.fresh('theta')}({m},{n})"


def _wrazidlo_note(m: int, n: int):
    if (m, n) == (7, 3):
        return (
            f"advisory: of the {THETA_7_COUNT} classes of oriented homotopy 7-spheres, "
            f"{THETA_7_NO_SPECIAL_GENERIC_INTO_R3} admit no fold map into R^3 with "
            "all fold indices zero; a connected-singular-set claim selects from the rest",
        )
    return ()


def classify(d: RoundFoldDescriptor) -> ClassificationResult:
    """Apply the recognition rules R1..R9, first match wins per piece."""
    d.ensure_valid()
    return _classify(d, _Labels())


def _classify(d: RoundFoldDescriptor, labels: _Labels) -> ClassificationResult:
    m, n = d.m, d.n
    core = core_fiber(d)
    forest = component_forest(d)

    # R1/R2: declared or upgradable cylinder axis -> bundle total space.
    result = _rule_cylinder_axis(d, labels)
    if result is not None:
        return result
    # R3 (+R8 for a declared punctured axis): the two-sphere shape.
    result = _rule_two_component(d, labels)
    if result is not None:
        return result
    # Chain shape left over from surgery: reconstructed bundle.
    result = _rule_chain_bundle(d, labels)
    if result is not None:
        return result
    # R4..R8: peel the map into pieces by decomposing surgery.
    if d.l >= 2:
        result = _rule_peel(d, labels)
        if result is not None:
            return result
    # R9 and the homotopy-sphere classes: one singular sphere.
    if d.l == 1:
        return _rule_single_sphere(d, labels)

    reasons = []
    if m < 2 * n:
        reasons.append(f"m >= 2n fails (m={m}, n={n}): surgery rules unavailable")
    if not forest.connected:
        reasons.append("component graph is disconnected")
    if forest.cycle_count:
        reasons.append(
            f"component graph has {forest.cycle_count} cycle(s): outside the tree rules"
        )
    if d.axis is None:
        reasons.append("no axis label and no recognized event shape")
    if d.triviality != "smooth":
        reasons.append(f"triviality flag is {d.triviality!r}; several rules need smooth")
    if not reasons:
        reasons.append("no rule matched this combinatorial shape")
    return ClassificationResult(None, None, (), tuple(reasons))


def _core_pair_fiber(d) -> ManifoldExpr | None:
    core = core_fiber(d)
    if len(core) != 2:
        return None
    a, b = (normalize(fib) for _, fib in core)
    return a if a == b else None


def _rule_cylinder_axis(d, labels) -> ClassificationResult | None:
    if not isinstance(d.axis, Cylinder):
        return None
    fiber = normalize(d.axis.fiber)
    pair = _core_pair_fiber(d)
    if pair != fiber:
        return None
    chain = []
    tier = _FLAG_TIER[d.triviality]
    checks = [
        HypothesisCheck("axis fiber is a cylinder", True, f"fiber {fiber}"),
        HypothesisCheck("proper-core fiber is two copies of the fiber", True),
        HypothesisCheck(
            "surrounding bundle trivial (declared)", tier is not None, f"flag={d.triviality}"
        ),
    ]
    # Thm-3-style upgrade for the plane target.
    upgraded = False
    if d.n == 2:
        big = d.m >= 7 and is_simply_connected(fiber) is True
        small = d.m in (3, 4) and is_standard_sphere(fiber, d.m - 2)
        if big or small:
            upgraded = True
    if tier is None and not upgraded:
        return None
    twist = d.provenance.twist
    if twist is None:
        split = d.events[-1] if isinstance(d.events[-1], Split) else None
        twist = _twist_for_split(d, split, labels) if split else labels.fresh("tau")
    manifold = normalize(BundleTotal(fiber, d.n, twist or None))
    if tier is not None:
        chain.append(
            RuleRecord(
                "R1",
                "cylinder-axis bundle",
                f"total space of a {fiber}-bundle over S^{d.n}",
                tuple(checks),
            )
        )
    if upgraded and tier != "diffeomorphism":
        chain.append(
            RuleRecord(
                "R2",
                "plane-target smoothing",
                "surrounding bundle smoothed: smooth bundle total space",
                (
                    HypothesisCheck("n = 2", True),
                    HypothesisCheck(
                        "m >= 7 with simply-connected fiber, or m in {3,4} with sphere fiber",
                        True,
                        f"m={d.m}",
                    ),
                ),
            )
        )
        tier = "diffeomorphism"
    return ClassificationResult(manifold, tier, tuple(chain))


def _two_component_shape(d):
    """(birth, split) when events are exactly [Birth, Split] on one thread."""
    if d.l != 2:
        return None
    first, last = d.events
    if not (isinstance(first, Birth) and isinstance(last, Split)):
        return None
    if last.parent != first.component:
        return None
    return first, last


def _rule_two_component(d, labels) -> ClassificationResult | None:
    shape = _two_component_shape(d)
    if shape is None:
        return None
    _, split = shape
    sigma = _core_pair_fiber(d)
    if sigma is None or not is_sphere_like(sigma):
        return None
    checks = [
        HypothesisCheck("two singular spheres, one birth and one split", True),
        HypothesisCheck("proper-core fiber is two equal twisted spheres", True, str(sigma)),
        HypothesisCheck("m >= 2n", d.m >= 2 * d.n, f"m={d.m}, n={d.n}"),
        HypothesisCheck(
            "annulus bundle trivial (read off the smooth flag)",
            d.triviality == "smooth",
            f"flag={d.triviality}",
        ),
    ]
    if not all(c.ok for c in checks):
        return None
    chain = []
    if isinstance(d.axis, PuncturedCylinder) and d.axis.holes == 1:
        chain.append(
            RuleRecord(
                "R8",
                "exotic-class split",
                "declared punctured-cylinder axis: a homotopy-sphere class splits off",
                (
                    HypothesisCheck(
                        "axis is a once-punctured cylinder", True, str(d.axis.fiber)
                    ),
                ),
            )
        )
    twist = _twist_for_split(d, split, labels)
    if is_standard_sphere(sigma):
        manifold = normalize(BundleTotal(StandardSphere(d.fiber_dim), d.n, twist))
        conclusion = f"total space of a smooth S^{d.fiber_dim}-bundle over S^{d.n}"
    else:
        manifold = normalize(
            ConnectedSum(
                (
                    HomotopySphere(d.m, _theta_label(labels, d.m, d.n)),
                    BundleTotal(sigma, d.n, twist),
                )
            )
        )
        conclusion = (
            f"connected sum of a homotopy-sphere class and a smooth "
            f"{sigma}-bundle over S^{d.n}"
        )
    chain.append(RuleRecord("R3", "two-sphere recognition", conclusion, tuple(checks)))
    return ClassificationResult(manifold, "diffeomorphism", tuple(chain))


def _rule_chain_bundle(d, labels) -> ClassificationResult | None:
    fiber = chain_bundle_fiber(d)
    if fiber is None or d.triviality != "smooth":
        return None
    if is_sphere_like(fiber):
        return None  # handled by the two-component rule when l = 2
    split = d.events[-1]
    twist = _twist_for_split(d, split, labels)
    manifold = normalize(BundleTotal(fiber, d.n, twist))
    record = RuleRecord(
        "R1",
        "chain-shape bundle",
        f"single-thread event chain over a smooth flag: {fiber}-bundle over S^{d.n}",
        (
            HypothesisCheck("one birth, generic chain, final split into equal fibers", True),
            HypothesisCheck("surrounding bundle smooth (declared)", True),
        ),
        notes=("axis label reconstructed from the event chain",),
    )
    return ClassificationResult(manifold, "diffeomorphism", (record,))


def _candidate_sites(d):
    regions = regular_fibers(d)
    for r in range(d.l - 1, -1, -1):
        for c, fib in regions[r]:
            if is_standard_sphere(fib, d.fiber_dim):
                yield r, c


def _rule_peel(d, labels) -> ClassificationResult | None:
    if d.m < 2 * d.n or d.n < 2:
        return None
    forest = component_forest(d)
    if not forest.connected or forest.cycle_count:
        return None
    for r, c in _candidate_sites(d):
        try:
            f1, f2, note = decompose(d, DecomposeSite(region=r, component=c))
        except (HypothesisError, SiteError):
            continue
        if f2.l < 2 or f1.l >= d.l:
            continue
        left = _classify(f1, labels)
        if not left.classified:
            continue
        right = _classify(f2, labels)
        if not right.classified:
            continue
        manifold = normalize(ConnectedSum((left.manifold, right.manifold)))
        confidence = _min_confidence(left.confidence, right.confidence)
        peel = RuleRecord(
            "R7",
            "splitting surgery",
            f"split at region {r}, component {c!r}: connected sum of the two pieces",
            (
                HypothesisCheck("m >= 2n", True, f"m={d.m}, n={d.n}"),
                HypothesisCheck("component graph is a tree", True),
                HypothesisCheck("separable standard-sphere site", True, f"region {r}, {c!r}"),
            ),
            notes=(note.relation,),
        )
        chain = (peel,) + left.chain + right.chain
        summary = _summary_rule(d, manifold, labels)
        if summary is not None:
            chain = chain + (summary,)
        return ClassificationResult(manifold, confidence, chain)
    return None


def _summary_rule(d, manifold, labels) -> RuleRecord | None:
    """Name the global theorem the peeled decomposition instantiates."""
    summands = (
        list(manifold.summands) if isinstance(manifold, ConnectedSum) else [manifold]
    )
    bundles = [s for s in summands if isinstance(s, BundleTotal)]
    thetas = [s for s in summands if isinstance(s, (HomotopySphere, AlmostSphere))]
    others = [s for s in summands if s not in bundles and s not in thetas]
    regions = regular_fibers(d)
    core = regions[-1]
    all_fibers_standard = all(
        is_standard_sphere(fib, d.fiber_dim) for reg in regions for _, fib in reg
    )
    core_spherelike = all(is_sphere_like(normalize(fib)) for _, fib in core)
    noncore_standard = all(
        is_standard_sphere(fib, d.fiber_dim)
        for reg in regions[:-1]
        for _, fib in reg
    )
    l = d.l
    if others:
        return None
    if thetas:
        return RuleRecord(
            "R8",
            "exotic-summand split",
            "a homotopy-sphere class split off by surgery at the outermost region",
            (HypothesisCheck("piece with one singular sphere is non-standard", True),),
        )
    sphere_bundles = [
        b for b in bundles if is_standard_sphere(b.fiber, d.fiber_dim)
    ]
    twisted_sphere_bundles = [
        b
        for b in bundles
        if is_sphere_like(b.fiber) and not is_standard_sphere(b.fiber, d.fiber_dim)
    ]
    f_bundles = [b for b in bundles if not is_sphere_like(b.fiber)]
    if all_fibers_standard and len(core) == l and not f_bundles and not twisted_sphere_bundles:
        return RuleRecord(
            "R4",
            "sphere-fiber sum",
            f"connected sum of {max(len(bundles), 1)} smooth sphere-bundles over S^{d.n}",
            (
                HypothesisCheck("all regular fibers are standard spheres", True),
                HypothesisCheck("core components = singular spheres = l", True, f"l={l}"),
                HypothesisCheck("annulus bundles trivial (smooth flag)", d.triviality == "smooth"),
            ),
        )
    if core_spherelike and noncore_standard and not f_bundles and twisted_sphere_bundles:
        bound = l - 1 - l // 2
        return RuleRecord(
            "R5",
            "twisted-sphere-fiber sum",
            f"connected sum of {len(bundles)} twisted-sphere bundles over S^{d.n}",
            (
                HypothesisCheck("non-core fibers are standard spheres", True),
                HypothesisCheck("core fibers are twisted spheres", True),
                HypothesisCheck(
                    f"count bound: >= {bound} non-standard summands",
                    len(twisted_sphere_bundles) >= bound,
                    f"{len(twisted_sphere_bundles)} non-standard of {len(bundles)}",
                ),
            ),
        )
    if f_bundles and sphere_bundles:
        return RuleRecord(
            "R6",
            "mixed-fiber sum",
            "connected sum of sphere-bundles and a highly-connected-fiber bundle",
            (
                HypothesisCheck("sphere-bundle piece present", True),
                HypothesisCheck(
                    "non-sphere fiber is (n-1)-connected",
                    all(
                        connectivity_at_least(b.fiber, d.n - 1) is True for b in f_bundles
                    ),
                ),
            ),
        )
    return None


def _rule_single_sphere(d, labels) -> ClassificationResult:
    m, n = d.m, d.n
    fd = d.fiber_dim
    checks = [
        HypothesisCheck("one singular sphere (connected singular set)", True),
        HypothesisCheck("1 <= m - n <= 3", 1 <= fd <= 3, f"m-n={fd}"),
        HypothesisCheck("m > 3", m > 3, f"m={m}"),
    ]
    if 1 <= fd <= 3 and m > 3:
        record = RuleRecord(
            "R9",
            "low-codimension sphere",
            f"the source is the standard {m}-sphere",
            tuple(checks),
            notes=_wrazidlo_note(m, n),
        )
        return ClassificationResult(StandardSphere(m), "diffeomorphism", (record,))
    manifold: ManifoldExpr
    if fd == 0:
        manifold = AlmostSphere(m, labels.fresh("double"))
        conclusion = "a twisted double of the disc (an almost-sphere)"
    else:
        manifold = HomotopySphere(m, _theta_label(labels, m, n))
        conclusion = "a homotopy-sphere class with a connected-singular-set map"
    record = RuleRecord(
        "theta-class",
        "connected singular set",
        conclusion,
        tuple(checks),
        notes=_wrazidlo_note(m, n),
    )
    return ClassificationResult(manifold, _FLAG_TIER[d.triviality], (record,))


# ---------------------------------------------------------------------------
# Synthesis


def _as_bundle_summand(s: ManifoldExpr, n: int | None):
    """(fiber, base, twist) when s is a bundle over a sphere, else None."""
    if isinstance(s, BundleTotal):
        return s.fiber, s.base_dim, s.twist
    if isinstance(s, Product) and n is not None:
        spheres = [f for f in s.factors if isinstance(f, StandardSphere) and f.dim == n]
        if spheres:
            rest = list(s.factors)
            rest.remove(spheres[0])
            fiber = rest[0] if len(rest) == 1 else Product(tuple(rest))
            return fiber, n, None
    return None


def synthesize(e: ManifoldExpr, n: int | None = None) -> RoundFoldDescriptor:
    """Build a descriptor realizing a connected sum of bundles over S^n.

    Summands must be bundle total spaces (twisted, or trivial ones written
    as products carrying an S^n factor) whose fibers have canonical traces;
    the pieces are grafted together with combining surgery, standard-sphere
    fibers first so every graft has a standard site available.
    """
    norm = normalize(e)
    summands = list(norm.summands) if isinstance(norm, ConnectedSum) else [norm]
    if n is None:
        bases = {s.base_dim for s in summands if isinstance(s, BundleTotal)}
        if len(bases) == 1:
            n = bases.pop()
        elif len(bases) > 1:
            raise HypothesisError(f"summands disagree on the base sphere: {sorted(bases)}")
        else:
            raise HypothesisError(
                "no construction known: no bundle summand fixes the target dimension; "
                "pass n explicitly"
            )
    m = norm.dim
    if m < 2 * n:
        raise HypothesisError(f"synthesis needs m >= 2n, got m={m}, n={n}")
    pieces = []
    for s in summands:
        parsed = _as_bundle_summand(s, n)
        if parsed is None:
            raise HypothesisError(f"no construction known for summand {s}")
        fiber, base, twist = parsed
        if base != n:
            raise HypothesisError(
                f"summand {s} is a bundle over S^{base}, expected S^{n}"
            )
        try:
            pieces.append((from_bundle(fiber, n, twist=twist), fiber))
        except (HypothesisError, StructuralError) as exc:
            raise HypothesisError(f"no construction known for summand {s}: {exc}") from exc
    # Standard-sphere fibers first: each graft consumes one standard site.
    pieces.sort(key=lambda p: (not is_standard_sphere(p[1], m - n), str(p[1])))
    standard = sum(1 for _, fib in pieces if is_standard_sphere(fib, m - n))
    if len(pieces) >= 2 and len(pieces) - standard > standard + 1:
        raise HypothesisError(
            "no construction known: grafting needs a standard-sphere site per piece "
            f"({len(pieces) - standard} twisted pieces but only {standard} standard ones)"
        )
    acc = pieces[0][0]
    for piece, _ in pieces[1:]:
        site = next(
            c
            for c, fib in core_fiber(acc)
            if is_standard_sphere(fib, m - n)
        )
        acc, _note = combine(acc, CombineSite(site), piece)
    return acc


# ---------------------------------------------------------------------------
# Dimension-5 recognizer


@dataclass(frozen=True)
class Dim5Verdict:
    admits: bool | None  # None: open / undetermined
    reason: str
    citation: str
    witness: RoundFoldDescriptor | None = None
    notes: tuple[str, ...] = ()

    def to_json(self):
        return {
            "admits": self.admits,
            "reason": self.reason,
            "citation": self.citation,
            "witness": None if self.witness is None else str(self.witness),
            "notes": list(self.notes),
        }


def _is_s3_bundle_sum(e: ManifoldExpr) -> bool:
    norm = normalize(e)
    summands = list(norm.summands) if isinstance(norm, ConnectedSum) else [norm]
    for s in summands:
        parsed = _as_bundle_summand(s, 2)
        if parsed is None:
            return False
        fiber, base, _ = parsed
        if base != 2 or not is_standard_sphere(fiber, 3):
            return False
    return True


def dim5_recognizer(x) -> Dim5Verdict:
    """Decide whether a 5-manifold admits a sphere-fiber map to the plane."""
    if isinstance(x, RoundFoldDescriptor):
        if (x.m, x.n) != (5, 2):
            raise ScopeError(f"recognizer needs (m, n) = (5, 2), got ({x.m}, {x.n})")
        from .reeb import prop1_report

        report = prop1_report(x)
        if report.eligible:
            return Dim5Verdict(
                True,
                "the descriptor itself is a sphere-fiber witness",
                "sphere-fiber class membership",
                witness=x,
            )
        failed = [c.name for c in report.checks if not c.ok]
        return Dim5Verdict(
            None,
            f"descriptor is not in the sphere-fiber class ({'; '.join(failed)})",
            "sphere-fiber class membership",
        )

    e = normalize(x)
    if e.dim != 5:
        raise ScopeError(f"recognizer works in dimension 5, got {e.dim}")
    if e == StandardSphere(5):
        from .constructions import preset

        return Dim5Verdict(
            True,
            "the 5-sphere admits the one-singular-sphere map",
            "sphere-fiber class construction",
            witness=preset("special_generic(5,2)").descriptor,
        )
    if _is_s3_bundle_sum(e):
        return Dim5Verdict(
            True,
            "connected sum of 3-sphere bundles over the 2-sphere",
            "torsion-free second homology characterizes these sums",
            witness=synthesize(e, n=2),
        )
    if isinstance(e, Named):
        sc = e.connectivity >= 1
        torsion_known = e.torsion_degrees is not None
        if sc and torsion_known and 2 in e.torsion_degrees:
            notes = ()
            if e.ranks is not None and all(r == 0 for r in e.ranks[1:5]):
                notes = (
                    "rational homology sphere with torsion: whether general round "
                    "fold maps into the plane exist is open",
                )
            return Dim5Verdict(
                False,
                "second homology has torsion, so no sphere-fiber map to the plane exists",
                "torsion obstruction: torsion-free H_2 is equivalent to being a sum "
                "of 3-sphere bundles over the 2-sphere",
                notes=notes,
            )
        if sc and torsion_known:
            return Dim5Verdict(
                True,
                "simply-connected with declared torsion-free homology",
                "torsion-free second homology characterizes these sums",
                notes=("witness synthesis needs an explicit bundle decomposition",),
            )
        return Dim5Verdict(
            None,
            "insufficient declared data (need connectivity and torsion degrees)",
            "torsion-free second homology criterion",
        )
    return Dim5Verdict(
        None,
        f"expression {e} is outside the recognizable fragment",
        "torsion-free second homology criterion",
    )
