"""Textual language for descriptors, traces and manifold expressions.

Grammar (whitespace-insensitive, `#` starts a line comment):

    file  := "roundfold" "{" FIELDS "}" | "trace" "{" FIELDS "}" | "manifold" EXPR
    roundfold fields: m = INT; n = INT; trivial = none|top|pl|smooth;
                      axis = AXIS;           (optional)
                      events = [ EVENT, ... ];
    trace fields:     boundary = [ ID : EXPR, ... ]; label = AXIS; (optional)
                      events = [ EVENT, ... ];
    EVENT := birth(ID : EXPR) | death(ID)
           | split(ID -> ID : EXPR, ID : EXPR)
           | merge(ID, ID -> ID : EXPR)
           | generic(i=INT, ID : EXPR -> EXPR, chi_sing=INT)
    EXPR  := ATOM ("*" ATOM)*
    ATOM  := S(INT) | Sigma(INT, STRING) | Theta(INT, STRING)
           | bundle(EXPR over INT [, twist STRING])
           | csum(EXPR, ...)
           | named(STRING, dim=INT [, euler=INT, conn=INT,
                   ranks=[INT,...], torsion=[INT,...]])
    AXIS  := EXPR                     -- cylinder over the fiber
           | punctured(EXPR, INT)     -- cylinder with that many holes
           | withboundary(STRING [, EXPR ...]
                          [, conn_boundary=0|1] [, pi_trivial=0|1])

Parsing never raises: problems come back as diagnostics with line:col
spans, and `parse(print(v))` reproduces `v` structurally.
"""

from __future__ import annotations

from dataclasses import dataclass

from .descriptor import (
    AxisFiber,
    Birth,
    Cylinder,
    Death,
    FoldEvent,
    Generic,
    Merge,
    NamedWithBoundary,
    PuncturedCylinder,
    RoundFoldDescriptor,
    Split,
)
from .errors import RoundFoldError
from .expressions import (
    AlmostSphere,
    BundleTotal,
    ConnectedSum,
    HomotopySphere,
    ManifoldExpr,
    Named,
    Product,
    StandardSphere,
)
from .traces import MorseTrace, validate_trace


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int
    col: int
    hint: str | None = None

    def __str__(self):
        loc = f"{self.line}:{self.col}"
        base = f"{loc}: {self.severity}: {self.message}"
        return base if self.hint is None else f"{base} ({self.hint})"

    def to_json(self):
        return {
            "severity": self.severity,
            "message": self.message,
            "line": self.line,
            "col": self.col,
            "hint": self.hint,
        }


# ---------------------------------------------------------------------------
# Lexer

_PUNCT = ("->", "{", "}", "[", "]", "(", ")", ";", ",", ":", "=", "*")


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | int | string | punct | eof
    text: str
    line: int
    col: int


class _LexError(RoundFoldError):
    def __init__(self, message, line, col):
        super().__init__(message)
        self.line = line
        self.col = col


def _lex(text: str) -> list[_Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("->", i):
            tokens.append(_Token("punct", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in "{}[]();,:=*":
            tokens.append(_Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise _LexError("unterminated string", line, col)
                j += 1
            if j >= n:
                raise _LexError("unterminated string", line, col)
            tokens.append(_Token("string", text[i + 1 : j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise _LexError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _ParseError(RoundFoldError):
    def __init__(self, message, token: _Token, hint=None):
        super().__init__(message)
        self.token = token
        self.hint = hint


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.event_spans: list[tuple[int, int]] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind, text=None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise _ParseError(f"expected {want!r}, found {tok.text or tok.kind!r}", tok)
        return self.next()

    def accept(self, kind, text=None):
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> ManifoldExpr:
        factors = [self.parse_atom()]
        while self.accept("punct", "*"):
            factors.append(self.parse_atom())
        if len(factors) == 1:
            return factors[0]
        return Product(tuple(factors))

    def parse_atom(self) -> ManifoldExpr:
        tok = self.peek()
        if tok.kind != "ident":
            raise _ParseError(f"expected an expression, found {tok.text or tok.kind!r}", tok)
        head = tok.text
        if head == "S":
            self.next()
            self.expect("punct", "(")
            d = self.parse_int()
            self.expect("punct", ")")
            return StandardSphere(d)
        if head in ("Sigma", "Theta"):
            self.next()
            self.expect("punct", "(")
            d = self.parse_int()
            self.expect("punct", ",")
            label = self.expect("string").text
            self.expect("punct", ")")
            return AlmostSphere(d, label) if head == "Sigma" else HomotopySphere(d, label)
        if head == "bundle":
            self.next()
            self.expect("punct", "(")
            fiber = self.parse_expr()
            self.expect("ident", "over")
            base = self.parse_int()
            twist = None
            if self.accept("punct", ","):
                self.expect("ident", "twist")
                twist = self.expect("string").text
            self.expect("punct", ")")
            return BundleTotal(fiber, base, twist)
        if head == "csum":
            self.next()
            self.expect("punct", "(")
            summands = [self.parse_expr()]
            while self.accept("punct", ","):
                summands.append(self.parse_expr())
            self.expect("punct", ")")
            return ConnectedSum(tuple(summands))
        if head == "named":
            self.next()
            self.expect("punct", "(")
            name = self.expect("string").text
            self.expect("punct", ",")
            self.expect("ident", "dim")
            self.expect("punct", "=")
            d = self.parse_int()
            euler = None
            conn = 0
            ranks = None
            torsion = None
            while self.accept("punct", ","):
                key = self.expect("ident").text
                self.expect("punct", "=")
                if key == "euler":
                    euler = self.parse_int()
                elif key == "conn":
                    conn = self.parse_int()
                elif key == "ranks":
                    ranks = tuple(self.parse_int_list())
                elif key == "torsion":
                    torsion = tuple(self.parse_int_list())
                else:
                    raise _ParseError(f"unknown named(...) field {key!r}", self.peek())
            self.expect("punct", ")")
            return Named(name, d, euler=euler, connectivity=conn, ranks=ranks,
                         torsion_degrees=torsion)
        raise _ParseError(f"unknown expression head {head!r}", tok)

    def parse_int(self) -> int:
        return int(self.expect("int").text)

    def parse_int_list(self) -> list[int]:
        self.expect("punct", "[")
        items = []
        if not self.accept("punct", "]"):
            items.append(self.parse_int())
            while self.accept("punct", ","):
                items.append(self.parse_int())
            self.expect("punct", "]")
        return items

    # -- axis labels ---------------------------------------------------------

    def parse_axis(self) -> AxisFiber:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "punctured":
            self.next()
            self.expect("punct", "(")
            fiber = self.parse_expr()
            self.expect("punct", ",")
            holes = self.parse_int()
            self.expect("punct", ")")
            return PuncturedCylinder(fiber, holes)
        if tok.kind == "ident" and tok.text == "withboundary":
            self.next()
            self.expect("punct", "(")
            name = self.expect("string").text
            boundary = []
            conn_boundary = False
            pi_trivial = False
            while self.accept("punct", ","):
                nxt = self.peek()
                if nxt.kind == "ident" and nxt.text in ("conn_boundary", "pi_trivial"):
                    key = self.next().text
                    self.expect("punct", "=")
                    val = self.parse_int() != 0
                    if key == "conn_boundary":
                        conn_boundary = val
                    else:
                        pi_trivial = val
                else:
                    boundary.append(self.parse_expr())
            self.expect("punct", ")")
            return NamedWithBoundary(name, tuple(boundary), conn_boundary, pi_trivial)
        return Cylinder(self.parse_expr())

    # -- events --------------------------------------------------------------

    def parse_event(self) -> FoldEvent:
        tok = self.expect("ident")
        self.event_spans.append((tok.line, tok.col))
        kind = tok.text
        self.expect("punct", "(")
        if kind == "birth":
            cid = self.parse_id()
            self.expect("punct", ":")
            fiber = self.parse_expr()
            self.expect("punct", ")")
            return Birth(cid, fiber)
        if kind == "death":
            cid = self.parse_id()
            self.expect("punct", ")")
            return Death(cid)
        if kind == "split":
            parent = self.parse_id()
            self.expect("punct", "->")
            c1 = self.parse_id()
            self.expect("punct", ":")
            f1 = self.parse_expr()
            self.expect("punct", ",")
            c2 = self.parse_id()
            self.expect("punct", ":")
            f2 = self.parse_expr()
            self.expect("punct", ")")
            return Split(parent, c1, f1, c2, f2)
        if kind == "merge":
            p1 = self.parse_id()
            self.expect("punct", ",")
            p2 = self.parse_id()
            self.expect("punct", "->")
            child = self.parse_id()
            self.expect("punct", ":")
            fiber = self.parse_expr()
            self.expect("punct", ")")
            return Merge(p1, p2, child, fiber)
        if kind == "generic":
            self.expect("ident", "i")
            self.expect("punct", "=")
            index = self.parse_int()
            self.expect("punct", ",")
            cid = self.parse_id()
            self.expect("punct", ":")
            before = self.parse_expr()
            self.expect("punct", "->")
            after = self.parse_expr()
            self.expect("punct", ",")
            self.expect("ident", "chi_sing")
            self.expect("punct", "=")
            chi = self.parse_int()
            self.expect("punct", ")")
            return Generic(index, cid, before, after, chi)
        raise _ParseError(f"unknown event kind {kind!r}", tok,
                          hint="expected birth, death, split, merge or generic")

    def parse_id(self) -> str:
        return self.expect("ident").text

    def parse_event_list(self):
        self.expect("punct", "[")
        events = []
        if not self.accept("punct", "]"):
            events.append(self.parse_event())
            while self.accept("punct", ","):
                events.append(self.parse_event())
            self.expect("punct", "]")
        return tuple(events)

    # -- blocks ---------------------------------------------------------------

    def parse_file(self):
        head = self.expect("ident")
        if head.text == "manifold":
            expr = self.parse_expr()
            self.expect("eof")
            return expr
        if head.text == "roundfold":
            value = self.parse_roundfold()
            self.expect("eof")
            return value
        if head.text == "trace":
            value = self.parse_trace()
            self.expect("eof")
            return value
        raise _ParseError(
            f"unknown file header {head.text!r}", head,
            hint="expected roundfold, trace or manifold",
        )

    def parse_roundfold(self) -> RoundFoldDescriptor:
        self.expect("punct", "{")
        fields = {}
        order = []
        while not self.accept("punct", "}"):
            key_tok = self.expect("ident")
            key = key_tok.text
            if key in fields:
                raise _ParseError(f"duplicate field {key!r}", key_tok)
            self.expect("punct", "=")
            if key == "m" or key == "n":
                fields[key] = self.parse_int()
            elif key == "trivial":
                tok = self.expect("ident")
                if tok.text not in ("none", "top", "pl", "smooth"):
                    raise _ParseError(f"unknown triviality level {tok.text!r}", tok)
                fields[key] = tok.text
            elif key == "axis":
                fields[key] = self.parse_axis()
            elif key == "events":
                fields[key] = self.parse_event_list()
            else:
                raise _ParseError(f"unknown roundfold field {key!r}", key_tok)
            order.append(key)
            self.expect("punct", ";")
        for required in ("m", "n", "events"):
            if required not in fields:
                raise _ParseError(f"missing roundfold field {required!r}", self.peek())
        return RoundFoldDescriptor(
            m=fields["m"],
            n=fields["n"],
            events=fields["events"],
            triviality=fields.get("trivial", "none"),
            axis=fields.get("axis"),
        )

    def parse_trace(self) -> MorseTrace:
        self.expect("punct", "{")
        fields = {}
        while not self.accept("punct", "}"):
            key_tok = self.expect("ident")
            key = key_tok.text
            if key in fields:
                raise _ParseError(f"duplicate field {key!r}", key_tok)
            self.expect("punct", "=")
            if key == "boundary":
                self.expect("punct", "[")
                boundary = []
                if not self.accept("punct", "]"):
                    while True:
                        cid = self.parse_id()
                        self.expect("punct", ":")
                        boundary.append((cid, self.parse_expr()))
                        if not self.accept("punct", ","):
                            break
                    self.expect("punct", "]")
                fields[key] = tuple(boundary)
            elif key == "label":
                fields[key] = self.parse_axis()
            elif key == "events":
                fields[key] = self.parse_event_list()
            else:
                raise _ParseError(f"unknown trace field {key!r}", key_tok)
            self.expect("punct", ";")
        if "events" not in fields:
            raise _ParseError("missing trace field 'events'", self.peek())
        return MorseTrace(
            boundary=fields.get("boundary", ()),
            events=fields["events"],
            label=fields.get("label"),
        )


def parse(text: str, path: str | None = None):
    """Parse a source file; returns (value or None, diagnostics).

    The value is a RoundFoldDescriptor, MorseTrace or ManifoldExpr.
    Descriptor/trace semantic problems (absent components, reused ids,
    bad dimensions) are reported as diagnostics anchored to the
    offending event, with the value still returned.
    """
    try:
        tokens = _lex(text)
    except _LexError as exc:
        return None, [Diagnostic("error", str(exc), exc.line, exc.col)]
    parser = _Parser(tokens)
    try:
        value = parser.parse_file()
    except _ParseError as exc:
        return None, [
            Diagnostic("error", str(exc), exc.token.line, exc.token.col, hint=exc.hint)
        ]
    except RoundFoldError as exc:
        tok = parser.tokens[max(parser.pos - 1, 0)]
        return None, [Diagnostic("error", str(exc), tok.line, tok.col)]

    diagnostics = []
    if isinstance(value, RoundFoldDescriptor):
        report = value.validation()
        for violation in report.violations:
            if violation.event is not None and violation.event <= len(parser.event_spans):
                line, col = parser.event_spans[violation.event - 1]
            else:
                line, col = 1, 1
            diagnostics.append(Diagnostic("error", str(violation), line, col))
    elif isinstance(value, MorseTrace):
        for violation in validate_trace(value):
            if violation.event is not None and violation.event <= len(parser.event_spans):
                line, col = parser.event_spans[violation.event - 1]
            else:
                line, col = 1, 1
            diagnostics.append(Diagnostic("error", str(violation), line, col))
    return value, diagnostics


# ---------------------------------------------------------------------------
# Printer


def print_expr(e: ManifoldExpr) -> str:
    if isinstance(e, StandardSphere):
        return f"S({e.dim})"
    if isinstance(e, AlmostSphere):
        return f'Sigma({e.dim}, "{e.twist}")'
    if isinstance(e, HomotopySphere):
        return f'Theta({e.dim}, "{e.theta}")'
    if isinstance(e, Product):
        return " * ".join(print_expr(f) for f in e.factors)
    if isinstance(e, BundleTotal):
        twist = f', twist "{e.twist}"' if e.twist is not None else ""
        return f"bundle({print_expr(e.fiber)} over {e.base_dim}{twist})"
    if isinstance(e, ConnectedSum):
        return "csum(" + ", ".join(print_expr(s) for s in e.summands) + ")"
    if isinstance(e, Named):
        parts = [f'"{e.name}"', f"dim={e.dim}"]
        if e.euler is not None:
            parts.append(f"euler={e.euler}")
        if e.connectivity:
            parts.append(f"conn={e.connectivity}")
        if e.ranks is not None:
            parts.append("ranks=[" + ", ".join(str(r) for r in e.ranks) + "]")
        if e.torsion_degrees is not None:
            parts.append("torsion=[" + ", ".join(str(t) for t in e.torsion_degrees) + "]")
        return "named(" + ", ".join(parts) + ")"
    raise RoundFoldError(f"unknown expression {e!r}")


def print_axis(a: AxisFiber) -> str:
    if isinstance(a, Cylinder):
        return print_expr(a.fiber)
    if isinstance(a, PuncturedCylinder):
        return f"punctured({print_expr(a.fiber)}, {a.holes})"
    if isinstance(a, NamedWithBoundary):
        parts = [f'"{a.name}"'] + [print_expr(b) for b in a.boundary]
        if a.boundary_n_minus_1_connected:
            parts.append("conn_boundary=1")
        if a.pi_n_minus_1_trivial:
            parts.append("pi_trivial=1")
        return "withboundary(" + ", ".join(parts) + ")"
    raise RoundFoldError(f"unknown axis label {a!r}")


def print_event(e: FoldEvent) -> str:
    if isinstance(e, Birth):
        return f"birth({e.component} : {print_expr(e.fiber)})"
    if isinstance(e, Death):
        return f"death({e.component})"
    if isinstance(e, Split):
        return (
            f"split({e.parent} -> {e.child1} : {print_expr(e.fiber1)}, "
            f"{e.child2} : {print_expr(e.fiber2)})"
        )
    if isinstance(e, Merge):
        return f"merge({e.parent1}, {e.parent2} -> {e.child} : {print_expr(e.fiber)})"
    if isinstance(e, Generic):
        return (
            f"generic(i={e.index}, {e.component} : {print_expr(e.before)} -> "
            f"{print_expr(e.after)}, chi_sing={e.singular_euler})"
        )
    raise RoundFoldError(f"unknown event {e!r}")


def _print_event_block(events) -> str:
    if not events:
        return "  events = [];"
    lines = ",\n".join(f"    {print_event(e)}" for e in events)
    return f"  events = [\n{lines}\n  ];"


def print_descriptor(d: RoundFoldDescriptor) -> str:
    lines = ["roundfold {", f"  m = {d.m};", f"  n = {d.n};", f"  trivial = {d.triviality};"]
    if d.axis is not None:
        lines.append(f"  axis = {print_axis(d.axis)};")
    lines.append(_print_event_block(d.events))
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_trace(t: MorseTrace) -> str:
    boundary = ", ".join(f"{cid} : {print_expr(expr)}" for cid, expr in t.boundary)
    lines = ["trace {", f"  boundary = [{boundary}];"]
    if t.label is not None:
        lines.append(f"  label = {print_axis(t.label)};")
    lines.append(_print_event_block(t.events))
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_manifold(e: ManifoldExpr) -> str:
    return f"manifold {print_expr(e)}\n"


def print_value(value) -> str:
    if isinstance(value, RoundFoldDescriptor):
        return print_descriptor(value)
    if isinstance(value, MorseTrace):
        return print_trace(value)
    if isinstance(value, ManifoldExpr):
        return print_manifold(value)
    raise RoundFoldError(f"cannot print {value!r}")


def parse_expr_text(text: str):
    """Parse a bare expression (no `manifold` header); (value, diagnostics)."""
    return parse("manifold " + text)


# ---------------------------------------------------------------------------
# JSON forms mirroring the DSL


def axis_to_json(a: AxisFiber | None):
    from .expressions import expr_to_json

    if a is None:
        return None
    if isinstance(a, Cylinder):
        return {"kind": "cylinder", "fiber": expr_to_json(a.fiber)}
    if isinstance(a, PuncturedCylinder):
        return {"kind": "punctured_cylinder", "fiber": expr_to_json(a.fiber), "holes": a.holes}
    return {
        "kind": "with_boundary",
        "name": a.name,
        "boundary": [expr_to_json(b) for b in a.boundary],
        "conn_boundary": a.boundary_n_minus_1_connected,
        "pi_trivial": a.pi_n_minus_1_trivial,
    }


def event_to_json(e: FoldEvent):
    from .expressions import expr_to_json

    if isinstance(e, Birth):
        return {"kind": "birth", "component": e.component, "fiber": expr_to_json(e.fiber)}
    if isinstance(e, Death):
        return {"kind": "death", "component": e.component}
    if isinstance(e, Split):
        return {
            "kind": "split",
            "parent": e.parent,
            "children": [
                {"component": e.child1, "fiber": expr_to_json(e.fiber1)},
                {"component": e.child2, "fiber": expr_to_json(e.fiber2)},
            ],
        }
    if isinstance(e, Merge):
        return {
            "kind": "merge",
            "parents": [e.parent1, e.parent2],
            "component": e.child,
            "fiber": expr_to_json(e.fiber),
        }
    return {
        "kind": "generic",
        "index": e.index,
        "component": e.component,
        "before": expr_to_json(e.before),
        "after": expr_to_json(e.after),
        "chi_sing": e.singular_euler,
    }


def descriptor_to_json(d: RoundFoldDescriptor):
    return {
        "kind": "roundfold",
        "m": d.m,
        "n": d.n,
        "trivial": d.triviality,
        "axis": axis_to_json(d.axis),
        "events": [event_to_json(e) for e in d.events],
        "text": print_descriptor(d),
    }


def trace_to_json(t: MorseTrace):
    from .expressions import expr_to_json

    return {
        "kind": "trace",
        "boundary": [
            {"component": cid, "fiber": expr_to_json(expr)} for cid, expr in t.boundary
        ],
        "label": axis_to_json(t.label),
        "events": [event_to_json(e) for e in t.events],
        "text": print_trace(t),
    }
