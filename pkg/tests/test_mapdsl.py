"""The map definition language: lexer, parser, printer, compiler."""

import numpy as np
import pytest

from cevarep.errors import (
    ArityError,
    MapSyntaxError,
    OutOfDomain,
    UnknownIdentifier,
)
from cevarep.fracaffine import FracAffineMap
from cevarep.geom import AffineFunctional, AffineMap
from cevarep.mapdsl import (
    BinOp,
    Const,
    MapSpec,
    Pow,
    Var,
    compile,
    parse,
    parse_expression,
    spec_to_source,
    to_source,
)

EXAMPLE = """
n = 2
m = 2
region = [-1, 1] x [-1, 1]
f1 := (2*x1 + 1) / (x1 + 2)
f2 := x2 / (x1 + 2)
"""


def test_parse_example():
    spec = parse(EXAMPLE)
    assert spec.in_dim == 2
    assert spec.out_dim == 2
    assert np.array_equal(spec.region.lo, [-1.0, -1.0])
    assert np.array_equal(spec.region.hi, [1.0, 1.0])
    assert len(spec.components) == 2


def test_parse_components_any_order():
    src = "n = 1\nm = 2\nregion = [0, 1]\nf2 := x1\nf1 := 2*x1\n"
    spec = parse(src)
    assert spec.components[0] == BinOp("*", Const(2.0), Var(1))
    assert spec.components[1] == Var(1)


def test_number_literals():
    assert parse_expression("1e3", 1) == Const(1000.0)
    assert parse_expression(".5", 1) == Const(0.5)
    assert parse_expression("2.5e-2", 1) == Const(0.025)


def test_precedence():
    # ^ binds tightest and applies to one atom
    assert parse_expression("2*x1^3", 1) == BinOp(
        "*", Const(2.0), Pow(Var(1), 3)
    )
    e = parse_expression("1 - x1 - 2", 1)  # left associative
    assert e == BinOp("-", BinOp("-", Const(1.0), Var(1)), Const(2.0))
    e2 = parse_expression("1 + x1*2", 1)
    assert e2 == BinOp("+", Const(1.0), BinOp("*", Var(1), Const(2.0)))


def test_syntax_error_reports_position():
    with pytest.raises(MapSyntaxError) as info:
        parse("n = 2\nm = 1\nregion = [0,1] x [0,1]\nf1 := x1 + ")
    assert info.value.line == 4
    assert info.value.col > 0
    assert "line 4" in str(info.value)
    with pytest.raises(MapSyntaxError):
        parse_expression("x1 $ 2", 1)  # unexpected character
    with pytest.raises(MapSyntaxError):
        parse_expression("x1 x1", 1)  # trailing input


def test_unknown_identifiers():
    with pytest.raises(UnknownIdentifier):
        parse_expression("foo(x1)", 1)
    with pytest.raises(UnknownIdentifier):
        parse_expression("y1 + 1", 1)
    with pytest.raises(UnknownIdentifier):
        parse_expression("x3", 2)  # out of range for n = 2


def test_arity_checked():
    with pytest.raises(ArityError):
        parse_expression("exp(x1, x1)", 1)


def test_exponent_must_be_integer_literal():
    with pytest.raises(MapSyntaxError):
        parse_expression("x1^2.5", 1)
    with pytest.raises(MapSyntaxError):
        parse_expression("x1^(2)", 1)
    with pytest.raises(MapSyntaxError):
        parse_expression("x1^-1", 1)


def test_header_validation():
    with pytest.raises(MapSyntaxError):
        parse("n = 2\nm = 1\nregion = [0, 1]\nf1 := x1\n")  # one box, n = 2
    with pytest.raises(MapSyntaxError):
        parse("n = 1\nm = 1\nregion = [2, 1]\nf1 := x1\n")  # lo > hi
    with pytest.raises(MapSyntaxError):
        parse("n = 0\nm = 1\nregion = [0, 1]\nf1 := 1\n")
    with pytest.raises(MapSyntaxError):
        parse("n = 1\nm = 1\nregion = [0, 1]\nf1 := x1\nf1 := x1\n")  # twice
    with pytest.raises(MapSyntaxError):
        parse("n = 1\nm = 2\nregion = [0, 1]\nf1 := x1\n")  # f2 missing
    with pytest.raises(MapSyntaxError):
        parse("n = 1\nm = 1\nregion = [0, 1]\nf2 := x1\n")  # out of range


def test_nesting_capped_cleanly():
    deep = "(" * 300 + "x1" + ")" * 300
    with pytest.raises(MapSyntaxError) as info:
        parse_expression(deep, 1)
    assert "nesting" in str(info.value)
    # just below the cap still parses
    ok = "(" * 100 + "x1" + ")" * 100
    assert parse_expression(ok, 1) == Var(1)


def test_print_parse_round_trip_expressions():
    sources = [
        "(2*x1 + 1) / (x1 + 2)",
        "-x1^2 + sqrt(abs(x2))",
        "exp(-(x1 - 0.5)) * log(x2 + 3)",
        "1 - x1 - 2 - -x2",
        "x1 / x2 / 2",
        "(x1 + x2)^4",
    ]
    for src in sources:
        node = parse_expression(src, 2)
        assert parse_expression(to_source(node), 2) == node


def test_spec_round_trip():
    spec = parse(EXAMPLE)
    again = parse(spec_to_source(spec))
    assert again.in_dim == spec.in_dim
    assert again.out_dim == spec.out_dim
    assert np.array_equal(again.region.lo, spec.region.lo)
    assert np.array_equal(again.region.hi, spec.region.hi)
    assert again.components == spec.components


def test_eval_worked_values():
    oracle = compile(parse(EXAMPLE))
    assert oracle.eval([0.0, 0.0])[0] == pytest.approx(0.5)
    assert oracle.eval([0.0, 0.5])[1] == pytest.approx(0.25)
    cube = compile(parse("n = 1\nm = 1\nregion = [0, 3]\nf1 := x1^3\n"))
    assert cube.eval([2.0])[0] == pytest.approx(8.0)


def test_eval_constant_component():
    oracle = compile(parse("n = 1\nm = 1\nregion = [0, 1]\nf1 := 3\n"))
    out = oracle.eval_many(np.array([[0.0], [0.5], [1.0]]))
    assert np.array_equal(out, [[3.0], [3.0], [3.0]])


def test_domain_guards():
    logm = compile(parse("n = 1\nm = 1\nregion = [-2, 2]\nf1 := log(x1)\n"))
    with pytest.raises(OutOfDomain):
        logm.eval([-1.0])
    assert not logm.in_domain([-1.0])
    assert logm.in_domain([1.0])
    assert logm.eval([1.0])[0] == pytest.approx(0.0)

    div = compile(parse("n = 1\nm = 1\nregion = [-1, 1]\nf1 := 1/x1\n"))
    with pytest.raises(OutOfDomain):
        div.eval([0.0])
    with pytest.raises(OutOfDomain):
        div.eval_many(np.array([[0.5], [0.0]]))

    root = compile(parse("n = 1\nm = 1\nregion = [-1, 1]\nf1 := sqrt(x1)\n"))
    with pytest.raises(OutOfDomain):
        root.eval([-0.5])
    assert root.eval([0.25])[0] == pytest.approx(0.5)


def test_compiled_oracle_metadata():
    oracle = compile(parse(EXAMPLE))
    assert oracle.name == "mapdsl"
    assert oracle.region.dim == 2
    assert oracle.eval_many is not None


def test_dsl_matches_native_map():
    src = (
        "n = 2\nm = 2\nregion = [-1, 1] x [-1, 1]\n"
        "f1 := (x1 + 2*x2 + 1) / (0.2*x1 + 2)\n"
        "f2 := (3*x1 - x2) / (0.2*x1 + 2)\n"
    )
    oracle = compile(parse(src))
    native = FracAffineMap(
        AffineMap(np.array([[1.0, 2.0], [3.0, -1.0]]), np.array([1.0, 0.0])),
        AffineFunctional(np.array([0.2, 0.0]), 2.0),
        np.zeros(2),
    )
    rng = np.random.default_rng(0)
    X = oracle.region.sample(rng, 100)
    dsl_imgs = oracle.eval_many(X)
    native_imgs = native.eval_many(X)
    assert np.allclose(dsl_imgs, native_imgs, rtol=1e-12, atol=1e-12)


def test_to_source_rejects_non_expression():
    with pytest.raises(TypeError):
        to_source("x1")
