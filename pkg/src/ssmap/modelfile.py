"""Plain-text model language: parser, validator and canonical serializer.

A model file declares variables with level counts and optional
thresholds, decay rates, named exponent slots, Hill equations and an
optional explicit truth table:

    system toy
    var x1 levels 3 thresholds 0.3 0.6
    decay x1 1.0
    exponent n1 = 2
    eq x1 = 0.8 * act(x1, 0.3, n1) + 0.6 * act(x2, 0.7, n2) * rep(x1, 0.3, n3)
    table
    0 0 -> 0 0
    ...

Files are UTF-8, LF or CRLF; '#' starts a comment. Reals are decimal
literals (scientific notation accepted). At least one of equations or
table must be present; when both are, their dimensions must agree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError, SemanticError, ThresholdMismatch
from .hill import HillExpression, HillSystem, HillTerm, ProductTerm
from .regions import ThresholdScheme
from .spaces import MultistateNetwork, State, StateSpace

_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[=(),*+]))"
)

_KEYWORDS = ("system", "var", "decay", "exponent", "eq", "table")


@dataclass
class _Tok:
    kind: str  # arrow | num | ident | sym
    text: str
    line: int
    col: int


def _tokenize_line(text: str, line_no: int) -> list[_Tok]:
    text = text.split("#", 1)[0].rstrip()
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = text[pos:].lstrip()
            if not bad:
                break
            raise ParseError(f"unexpected character {bad[0]!r}", line_no, pos + 1)
        for kind in ("arrow", "num", "ident", "sym"):
            if m.group(kind) is not None:
                toks.append(_Tok(kind, m.group(kind), line_no, m.start(kind) + 1))
                break
        pos = m.end()
    return toks


class _LineParser:
    """Cursor over one line's tokens with positioned errors."""

    def __init__(self, toks: list[_Tok], line_no: int):
        self.toks = toks
        self.line = line_no
        self.i = 0

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def error(self, expected: str):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"expected {expected}, found end of line", self.line)
        raise ParseError(f"expected {expected}, found {tok.text!r}", self.line, tok.col)

    def take(self, kind: str, text: str | None = None, expected: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            self.error(expected or (text or kind))
        self.i += 1
        return tok

    def take_ident(self, expected: str = "identifier") -> _Tok:
        return self.take("ident", expected=expected)

    def take_real(self, expected: str = "number") -> tuple[float, _Tok]:
        tok = self.take("num", expected=expected)
        return float(tok.text), tok

    def take_int(self, expected: str = "integer") -> tuple[int, _Tok]:
        tok = self.take("num", expected=expected)
        if not tok.text.isdigit():
            raise ParseError(f"expected {expected}, found {tok.text!r}", self.line, tok.col)
        return int(tok.text), tok

    def end(self):
        if not self.done():
            tok = self.peek()
            raise ParseError(f"unexpected trailing {tok.text!r}", self.line, tok.col)


@dataclass
class ModelDocument:
    """Parsed and validated model.

    equations, when present, are indexed like variables; exponent_slots
    preserves declaration order and maps slot name to its explicit value
    or None. Slot values resolve explicit > document default when a Hill
    system is built.
    """

    name: str | None
    variables: tuple[str, ...]
    space: StateSpace
    thresholds: ThresholdScheme | None
    decay: tuple[float, ...]
    equations: tuple[HillExpression, ...] | None
    exponent_slots: dict[str, float | None] = field(default_factory=dict)
    exponent_default: float | None = None
    table: MultistateNetwork | None = None

    @property
    def has_hill(self) -> bool:
        return self.equations is not None

    @property
    def n_vars(self) -> int:
        return self.space.n_vars

    def var_index(self, name: str) -> int:
        return self.variables.index(name)

    def resolved_exponents(self, n_override: float | None = None) -> dict[str, float]:
        out: dict[str, float] = {}
        for slot, val in self.exponent_slots.items():
            if n_override is not None:
                out[slot] = float(n_override)
            elif val is not None:
                out[slot] = val
            elif self.exponent_default is not None:
                out[slot] = self.exponent_default
            else:
                raise SemanticError(
                    f"exponent slot {slot} has no value (assign it, set a default, "
                    f"or pass a uniform override)"
                )
        return out

    def build_hill(self, n_override: float | None = None) -> HillSystem:
        """Hill system with exponent slots resolved; n_override sets all slots."""
        if self.equations is None:
            raise SemanticError("model has no equations, only a truth table")
        return HillSystem(self.equations, self.decay, self.resolved_exponents(n_override))

    def scheme(self) -> ThresholdScheme:
        """Declared thresholds, or thresholds derived from the equations."""
        if self.thresholds is not None:
            return self.thresholds
        if self.equations is None:
            raise SemanticError("model declares no thresholds and has no equations to derive them from")
        return _derive_from_expressions(self.equations, self.space)

    def semantically_equal(self, other: "ModelDocument") -> bool:
        """Equality after resolving exponent defaults into slot values."""
        if not isinstance(other, ModelDocument):
            return False
        try:
            mine, theirs = self.resolved_exponents(), other.resolved_exponents()
        except SemanticError:
            mine, theirs = dict(self.exponent_slots), dict(other.exponent_slots)
        return (
            self.name == other.name
            and self.variables == other.variables
            and self.space == other.space
            and self.thresholds == other.thresholds
            and self.decay == other.decay
            and self.equations == other.equations
            and mine == theirs
            and self.table == other.table
        )


def parse_model(text: str, name_hint: str | None = None) -> ModelDocument:
    """Parse and validate a model document; raises ParseError/SemanticError."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    tok_lines = [(_tokenize_line(ln, i + 1), i + 1) for i, ln in enumerate(lines)]
    tok_lines = [(toks, ln) for toks, ln in tok_lines if toks]
    if not tok_lines:
        raise ParseError("empty model: no stanzas", 1)

    name = name_hint
    var_names: list[str] = []
    var_levels: list[int] = []
    var_thresholds: dict[int, tuple[float, ...]] = {}
    var_lines: dict[str, int] = {}
    decays: dict[int, float] = {}
    raw_eqs: dict[str, tuple[list, int]] = {}
    slots: dict[str, float | None] = {}
    table_rows: list[tuple[tuple[int, ...], tuple[int, ...], int]] = []
    saw_table = False

    idx = 0
    if tok_lines[0][0][0].kind == "ident" and tok_lines[0][0][0].text == "system":
        lp = _LineParser(*tok_lines[0])
        lp.take("ident", "system")
        name = lp.take_ident("model name").text
        lp.end()
        idx = 1

    while idx < len(tok_lines):
        toks, line_no = tok_lines[idx]
        lp = _LineParser(toks, line_no)
        head = lp.peek()
        if head.kind != "ident" or head.text not in _KEYWORDS:
            lp.error("a stanza keyword (var, decay, exponent, eq, table)")
        kw = head.text
        lp.i += 1
        if kw == "system":
            raise ParseError("system header must be the first stanza", line_no, head.col)
        elif kw == "var":
            vname = lp.take_ident("variable name").text
            if vname in var_names:
                raise SemanticError(f"duplicate variable {vname}", line_no)
            lp.take("ident", "levels")
            n_levels, ltok = lp.take_int("level count")
            if n_levels < 2:
                raise SemanticError(f"variable {vname} needs at least 2 levels, got {n_levels}", line_no)
            ths = None
            if not lp.done():
                lp.take("ident", "thresholds")
                vals = []
                while not lp.done():
                    v, _ = lp.take_real("threshold")
                    vals.append(v)
                if len(vals) != n_levels - 1:
                    raise SemanticError(
                        f"variable {vname}: {n_levels} levels require {n_levels - 1} "
                        f"thresholds, got {len(vals)}", line_no)
                ths = tuple(vals)
            lp.end()
            var_names.append(vname)
            var_levels.append(n_levels - 1)
            var_lines[vname] = line_no
            if ths is not None:
                var_thresholds[len(var_names) - 1] = ths
        elif kw == "decay":
            vname = lp.take_ident("variable name").text
            val, vtok = lp.take_real("decay rate")
            lp.end()
            if vname not in var_names:
                raise SemanticError(f"decay for unknown variable {vname}", line_no)
            vi = var_names.index(vname)
            if vi in decays:
                raise SemanticError(f"duplicate decay for {vname}", line_no)
            if val <= 0.0:
                raise SemanticError(f"decay of {vname} must be positive, got {val}", line_no)
            decays[vi] = val
        elif kw == "exponent":
            sname = lp.take_ident("exponent slot name").text
            val = None
            if not lp.done():
                lp.take("sym", "=")
                val, _ = lp.take_real("exponent value")
                if val < 1.0:
                    raise SemanticError(f"exponent {sname} must be >= 1, got {val}", line_no)
            lp.end()
            if sname in slots and slots[sname] is not None and val is not None:
                raise SemanticError(f"duplicate exponent assignment for {sname}", line_no)
            slots[sname] = val if val is not None else slots.get(sname)
        elif kw == "eq":
            vname = lp.take_ident("variable name").text
            lp.take("sym", "=")
            terms = _parse_expression(lp)
            lp.end()
            if vname in raw_eqs:
                raise SemanticError(f"duplicate equation for {vname}", line_no)
            raw_eqs[vname] = (terms, line_no)
        elif kw == "table":
            lp.end()
            if saw_table:
                raise SemanticError("duplicate table stanza", line_no)
            saw_table = True
            idx += 1
            while idx < len(tok_lines) and tok_lines[idx][0][0].kind == "num":
                rtoks, rline = tok_lines[idx]
                rlp = _LineParser(rtoks, rline)
                ins: list[int] = []
                while rlp.peek() is not None and rlp.peek().kind == "num":
                    v, _ = rlp.take_int("level")
                    ins.append(v)
                rlp.take("arrow", expected="->")
                outs: list[int] = []
                while rlp.peek() is not None and rlp.peek().kind == "num":
                    v, _ = rlp.take_int("level")
                    outs.append(v)
                rlp.end()
                table_rows.append((tuple(ins), tuple(outs), rline))
                idx += 1
            continue
        idx += 1

    if not var_names:
        raise SemanticError("model declares no variables", tok_lines[-1][1])
    space = StateSpace(tuple(var_levels))

    scheme = None
    if var_thresholds:
        missing = [var_names[i] for i in range(space.n_vars)
                   if i not in var_thresholds and space.levels[i] > 0]
        if len(var_thresholds) != space.n_vars:
            raise SemanticError(
                f"thresholds declared for some variables but missing for {missing}")
        try:
            scheme = ThresholdScheme(tuple(var_thresholds[i] for i in range(space.n_vars)))
        except SemanticError as exc:
            raise SemanticError(str(exc), min(var_lines.values())) from None

    decay = tuple(decays.get(i, 1.0) for i in range(space.n_vars))

    equations = None
    if raw_eqs:
        for vname in raw_eqs:
            if vname not in var_names:
                raise SemanticError(f"equation for unknown variable {vname}", raw_eqs[vname][1])
        missing = [v for v in var_names if v not in raw_eqs]
        if missing:
            raise SemanticError(f"missing equation for variable {missing[0]}")
        built = []
        for vname in var_names:
            terms, line_no = raw_eqs[vname]
            prods = []
            for coef, factors, tline in terms:
                if coef <= 0.0:
                    raise SemanticError(f"term coefficient must be positive, got {coef}", tline)
                if not factors:
                    raise SemanticError(
                        "constant term (no Hill factors) is not supported", tline)
                hfs = []
                for orient, fvar, thr, slot, fline in factors:
                    if fvar not in var_names:
                        raise SemanticError(f"unknown variable {fvar} in factor", fline)
                    if not (0.0 < thr < 1.0):
                        raise SemanticError(
                            f"factor threshold must lie strictly in (0,1), got {thr}", fline)
                    if slot not in slots:
                        slots[slot] = None
                    hfs.append(HillTerm(var_names.index(fvar), orient, thr, slot))
                prods.append(ProductTerm(coef, tuple(hfs)))
            built.append(HillExpression(tuple(prods)))
        equations = tuple(built)

    table = None
    if saw_table:
        if not table_rows:
            raise SemanticError("table stanza has no rows")
        mapping: dict[State, State] = {}
        for ins, outs, rline in table_rows:
            if len(ins) != space.n_vars or len(outs) != space.n_vars:
                raise SemanticError(
                    f"table row has {len(ins)} inputs and {len(outs)} outputs "
                    f"for {space.n_vars} variables", rline)
            if not space.contains(ins):
                raise SemanticError(f"table input {ins} outside the state space", rline)
            if not space.contains(outs):
                raise SemanticError(f"table output {outs} outside the state space", rline)
            if ins in mapping:
                raise SemanticError(f"duplicate table row for input {ins}", rline)
            mapping[ins] = outs
        if len(mapping) != space.state_count:
            missing_state = next(s for s in space.states() if s not in mapping)
            raise SemanticError(
                f"table is not total: {len(mapping)} of {space.state_count} rows "
                f"(first missing input {missing_state})")
        table = MultistateNetwork(space, mapping)

    if equations is None and table is None:
        raise SemanticError("model needs equations or a table")

    return ModelDocument(
        name=name,
        variables=tuple(var_names),
        space=space,
        thresholds=scheme,
        decay=decay,
        equations=equations,
        exponent_slots=slots,
        table=table,
    )


def _parse_expression(lp: _LineParser) -> list:
    """product ('+' product)*; returns [(coef, factors, line)] with factor
    tuples (orientation, var_name, threshold, slot, line)."""
    terms = [_parse_product(lp)]
    while not lp.done():
        lp.take("sym", "+")
        terms.append(_parse_product(lp))
    return terms


def _parse_product(lp: _LineParser):
    coef, ctok = lp.take_real("coefficient")
    factors = []
    while not lp.done() and lp.peek().kind == "sym" and lp.peek().text == "*":
        lp.take("sym", "*")
        kind = lp.take_ident("act or rep")
        if kind.text not in ("act", "rep"):
            raise ParseError(f"expected act or rep, found {kind.text!r}", lp.line, kind.col)
        lp.take("sym", "(")
        vname = lp.take_ident("variable name").text
        lp.take("sym", ",")
        thr, _ = lp.take_real("threshold")
        lp.take("sym", ",")
        slot = lp.take_ident("exponent slot").text
        lp.take("sym", ")")
        factors.append((kind.text, vname, thr, slot, lp.line))
    return coef, factors, ctok.line


def derive_scheme(sys: HillSystem, space: StateSpace) -> ThresholdScheme:
    """Read per-variable thresholds off the Hill terms.

    The distinct term thresholds of variable i must number exactly
    space.levels[i]; otherwise ThresholdMismatch is raised.
    """
    return _derive_from_expressions(sys.expressions, space)


def _derive_from_expressions(expressions, space: StateSpace) -> ThresholdScheme:
    per_var: list[set[float]] = [set() for _ in range(space.n_vars)]
    for expr in expressions:
        for term in expr.terms:
            for f in term.factors:
                per_var[f.var].add(f.threshold)
    for i, ks in enumerate(per_var):
        if len(ks) != space.levels[i]:
            raise ThresholdMismatch(i, len(ks), space.levels[i])
    return ThresholdScheme(tuple(tuple(sorted(ks)) for ks in per_var))


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def serialize_model(doc: ModelDocument) -> str:
    """Canonical text: fixed stanza order, 12-significant-digit reals.

    parse(serialize(doc)) is semantically equal to doc; an exponent
    default is baked into the slot assignments.
    """
    out: list[str] = []
    if doc.name:
        out.append(f"system {doc.name}")
        out.append("")
    for i, vname in enumerate(doc.variables):
        line = f"var {vname} levels {doc.space.levels[i] + 1}"
        if doc.thresholds is not None:
            line += " thresholds " + " ".join(_fmt(k) for k in doc.thresholds.thresholds[i])
        out.append(line)
    if doc.has_hill:
        out.append("")
        for i, vname in enumerate(doc.variables):
            out.append(f"decay {vname} {_fmt(doc.decay[i])}")
        if doc.exponent_slots:
            out.append("")
            for slot in sorted(doc.exponent_slots):
                val = doc.exponent_slots[slot]
                if val is None:
                    val = doc.exponent_default
                out.append(f"exponent {slot}" + (f" = {_fmt(val)}" if val is not None else ""))
        out.append("")
        for i, vname in enumerate(doc.variables):
            out.append(f"eq {vname} = " + _serialize_expression(doc, doc.equations[i]))
    if doc.table is not None:
        out.append("")
        out.append("table")
        for state in doc.space.states():
            image = doc.table.table[state]
            out.append(" ".join(str(v) for v in state) + " -> " + " ".join(str(v) for v in image))
    out.append("")
    return "\n".join(out)


def _serialize_expression(doc: ModelDocument, expr: HillExpression) -> str:
    parts = []
    for term in expr.terms:
        bits = [_fmt(term.coefficient)]
        for f in term.factors:
            bits.append(f"{f.orientation}({doc.variables[f.var]}, {_fmt(f.threshold)}, {f.exponent_slot})")
        parts.append(" * ".join(bits))
    return " + ".join(parts)
