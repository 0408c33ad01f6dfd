import numpy as np
import pytest

from ssmap import (
    HillExpression,
    HillSystem,
    HillTerm,
    MultistateNetwork,
    ParseError,
    ProductTerm,
    SemanticError,
    StateSpace,
    ThresholdMismatch,
    derive_scheme,
    parse_model,
    serialize_model,
)
from ssmap.modelfile import ModelDocument


def test_parse_toy_structure(toy_doc):
    assert toy_doc.name == "toy"
    assert toy_doc.variables == ("x1", "x2")
    assert toy_doc.space.levels == (2, 2)
    assert toy_doc.thresholds.thresholds == ((0.3, 0.6), (0.4, 0.7))
    assert toy_doc.decay == (1.0, 1.0)
    assert toy_doc.table is not None and len(toy_doc.table.table) == 9
    assert toy_doc.table.table[(1, 1)] == (2, 2)
    eq1 = toy_doc.equations[0]
    assert [t.coefficient for t in eq1.terms] == [0.8, 0.6]
    assert eq1.terms[1].factors[1].orientation == "rep"
    assert toy_doc.resolved_exponents() == {f"n{i}": 2.0 for i in range(1, 7)}


def test_roundtrip_toy(toy_doc):
    text = serialize_model(toy_doc)
    again = parse_model(text, name_hint="toy")
    assert again == toy_doc
    assert serialize_model(again) == text


def test_roundtrip_crlf(toy_text):
    doc = parse_model(toy_text.replace("\n", "\r\n"), name_hint="toy")
    assert doc.variables == ("x1", "x2")


def test_roundtrip_repressor9(nine_doc):
    text = serialize_model(nine_doc)
    again = parse_model(text, name_hint="repressor9")
    assert again == nine_doc
    assert serialize_model(again) == text


def test_exponent_default_bakes_into_serialization():
    text = "var x1 levels 2 thresholds 0.5\neq x1 = 1.0 * act(x1, 0.5, n1)\n"
    doc = parse_model(text)
    doc.exponent_default = 10.0
    out = serialize_model(doc)
    assert "exponent n1 = 10" in out
    again = parse_model(out)
    assert again.exponent_slots["n1"] == 10.0
    assert doc.semantically_equal(again)


def test_discrete_only_document_roundtrip():
    text = "var a levels 2\nvar b levels 2\ntable\n0 0 -> 1 1\n0 1 -> 0 1\n1 0 -> 1 0\n1 1 -> 0 0\n"
    doc = parse_model(text)
    assert not doc.has_hill
    assert doc.table.table[(1, 1)] == (0, 0)
    out = serialize_model(doc)
    assert "table" in out and "eq" not in out and "decay" not in out
    assert parse_model(out) == doc
    with pytest.raises(SemanticError):
        doc.build_hill()
    with pytest.raises(SemanticError):
        doc.scheme()


def test_threshold_arity_error():
    with pytest.raises(SemanticError) as err:
        parse_model("var x1 levels 3 thresholds 0.3\neq x1 = 1.0 * act(x1, 0.3, n1)\n")
    assert "3 levels require 2 thresholds" in str(err.value)
    assert err.value.line == 1


def test_empty_and_junk_documents():
    with pytest.raises(ParseError):
        parse_model("")
    with pytest.raises(ParseError):
        parse_model("   \n\n  # only comments\n")
    with pytest.raises(ParseError) as err:
        parse_model("var x1 levels 2\nbogus stanza here\n")
    assert err.value.line == 2


def test_semantic_errors_carry_lines():
    base = "var x1 levels 2 thresholds 0.5\n"
    cases = [
        (base + "decay x9 1.0\neq x1 = 1.0 * act(x1, 0.5, n1)\n", "unknown variable x9"),
        (base + "eq x1 = 1.0 * act(x1, 0.5, n1)\neq x1 = 1.0 * act(x1, 0.5, n1)\n", "duplicate equation"),
        (base + "eq x1 = 1.0 * act(zz, 0.5, n1)\n", "unknown variable zz"),
        (base + "eq x1 = 0.5\n", "constant term"),
        (base + "eq x1 = 1.0 * act(x1, 1.5, n1)\n", "strictly in (0,1)"),
        (base + "decay x1 0\neq x1 = 1.0 * act(x1, 0.5, n1)\n", "must be positive"),
        (base + "exponent n1 = 0.5\neq x1 = 1.0 * act(x1, 0.5, n1)\n", ">= 1"),
    ]
    for text, needle in cases:
        with pytest.raises(SemanticError) as err:
            parse_model(text)
        assert needle in str(err.value)
        assert err.value.line is not None


def test_missing_equation_names_variable():
    text = "var x1 levels 2\nvar x2 levels 2\neq x1 = 1.0 * act(x2, 0.5, n1)\n"
    with pytest.raises(SemanticError) as err:
        parse_model(text)
    assert "x2" in str(err.value)


def test_table_errors():
    head = "var a levels 2\nvar b levels 2\ntable\n"
    with pytest.raises(SemanticError) as err:
        parse_model(head + "0 0 -> 1 1\n")
    assert "not total" in str(err.value)
    with pytest.raises(SemanticError) as err:
        parse_model(head + "0 0 -> 1 2\n0 1 -> 0 0\n1 0 -> 0 0\n1 1 -> 0 0\n")
    assert "outside the state space" in str(err.value)
    with pytest.raises(SemanticError) as err:
        parse_model(head + "0 0 -> 1 1\n0 0 -> 0 0\n0 1 -> 0 0\n1 0 -> 0 0\n1 1 -> 0 0\n")
    assert "duplicate table row" in str(err.value)
    with pytest.raises(SemanticError) as err:
        parse_model(head + "0 -> 1\n")
    assert "2 variables" in str(err.value).replace("for 2", "2")


def test_syntax_error_positions():
    with pytest.raises(ParseError) as err:
        parse_model("var x1 levels 2\neq x1 = 1.0 * act(x1, 0.5\n")
    assert err.value.line == 2
    with pytest.raises(ParseError) as err:
        parse_model("var x1 levels 2\neq x1 = 1.0 * foo(x1, 0.5, n1)\n")
    assert "act or rep" in str(err.value)


def test_derive_scheme_toy(toy_doc, toy_space):
    sys = toy_doc.build_hill()
    scheme = derive_scheme(sys, toy_space)
    assert scheme.thresholds == ((0.3, 0.6), (0.4, 0.7))


def test_derive_scheme_nine(nine_doc):
    scheme = nine_doc.scheme()
    assert scheme.thresholds == ((0.5,),) * 9


def test_derive_scheme_mismatch():
    terms = tuple(
        ProductTerm(0.3, (HillTerm(0, "act", k, "n1"),)) for k in (0.3, 0.5, 0.6)
    )
    sys = HillSystem((HillExpression(terms),), (1.0,), {"n1": 2.0})
    with pytest.raises(ThresholdMismatch) as err:
        derive_scheme(sys, StateSpace((2,)))
    assert err.value.var == 0
    assert (err.value.found, err.value.expected) == (3, 2)


def _random_document(rng: np.random.Generator) -> ModelDocument:
    n = int(rng.integers(1, 4))
    names = tuple(f"v{i}" for i in range(n))
    levels = tuple(int(rng.integers(1, 4)) for _ in range(n))
    space = StateSpace(levels)
    thresholds = tuple(
        tuple(np.round(np.sort(rng.uniform(0.05, 0.95, m)), 3))
        for m in levels
    )
    # regenerate until strictly increasing after rounding
    while any(len(set(t)) != len(t) for t in thresholds):
        thresholds = tuple(
            tuple(np.round(np.sort(rng.uniform(0.05, 0.95, m)), 3))
            for m in levels
        )
    from ssmap import ThresholdScheme

    scheme = ThresholdScheme(thresholds)
    decay = tuple(float(np.round(rng.uniform(0.1, 3.0), 4)) for _ in range(n))
    slots: dict[str, float | None] = {}
    eqs = []
    for i in range(n):
        terms = []
        for t in range(int(rng.integers(1, 3))):
            coef = float(np.round(rng.uniform(0.05, 0.9), 4))
            factors = []
            for _ in range(int(rng.integers(1, 3))):
                v = int(rng.integers(0, n))
                k = float(thresholds[v][int(rng.integers(0, len(thresholds[v])))])
                slot = f"e{len(slots)}"
                slots[slot] = float(rng.integers(1, 8))
                factors.append(HillTerm(v, "act" if rng.random() < 0.5 else "rep", k, slot))
            terms.append(ProductTerm(coef, tuple(factors)))
        eqs.append(HillExpression(tuple(terms)))
    table = None
    if rng.random() < 0.5:
        mapping = {
            s: tuple(int(rng.integers(0, m + 1)) for m in levels) for s in space.states()
        }
        table = MultistateNetwork(space, mapping)
    return ModelDocument(
        name=f"r{int(rng.integers(0, 999))}",
        variables=names,
        space=space,
        thresholds=scheme,
        decay=decay,
        equations=tuple(eqs),
        exponent_slots=slots,
        table=table,
    )


def test_roundtrip_random_documents():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        doc = _random_document(rng)
        text = serialize_model(doc)
        again = parse_model(text)
        assert again.semantically_equal(doc), text
        assert serialize_model(again) == text
