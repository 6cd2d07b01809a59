import pytest

from freefield.coeffs import poly_ring
from freefield.dsl import (
    BinOp,
    Command,
    Coord,
    Evaluator,
    Let,
    SystemDecl,
    Var,
    coordinate_aliases,
    parse,
    parse_field,
    parse_mapping,
    parse_state,
)
from freefield.errors import ScriptError
from freefield.liecocycle import VectorField
from freefield.states import ModeVar, normalize

A1 = ModeVar("a", 1, -1)
B1 = ModeVar("b", 1, -1)


class TestParse:
    def test_system(self):
        assert parse("system omega N = 1;") == [SystemDecl("omega", 1, "poly", None)]
        [decl] = parse("system heis N = 2 ring series(6);")
        assert (decl.ring, decl.order) == ("series", 6)
        assert parse("system heis N = 1 ring rat;")[0].ring == "rat"

    def test_let_with_juxtaposition(self):
        [statement] = parse("let L = b1_{-1} a1_{-1};")
        assert statement == Let("L", BinOp("mul", Var(B1), Var(A1)))
        assert (statement.line, statement.column) == (1, 1)

    def test_commands(self):
        statements = parse("""
            # comment
            check virasoro;
            ope a1_{-1} x1;
            nproduct a1_{-1} -1 x1;
            cohomology wmax=2;
            p1 sections 3;
        """)
        assert statements == [
            Command("check", ["virasoro"]),
            Command("ope", [Var(A1), Coord(1)]),
            Command("nproduct", [Var(A1), -1, Coord(1)]),
            Command("cohomology", [2]),
            Command("p1", ["sections", 3]),
        ]
        assert statements[1].line == 4

    def test_transform(self):
        [command] = parse('transform map "x -> x + x^2" order 4 check-opes;')
        assert command == Command("transform", ["x -> x + x^2", 4, "check_opes"])
        [command] = parse('transform map "x -> 2*x" compose "x -> x + x^2";')
        assert command.args == ["x -> 2*x", None, "compose", "x -> x + x^2"]

    def test_cocycle(self):
        [command] = parse('cocycle "c" "(x2^2, 0)" "(0, x1^2)";')
        assert command.args == ["c", "(x2^2, 0)", "(0, x1^2)"]


class TestParseErrors:
    def test_missing_name(self):
        with pytest.raises(ScriptError) as info:
            parse("let = ;")
        assert (info.value.line, info.value.column) == (1, 5)
        assert info.value.message == "unexpected '='"

    def test_unexpected_character(self):
        with pytest.raises(ScriptError) as info:
            parse("ope a1_{-1} @;")
        assert "unexpected character" in info.value.message
        assert info.value.column == 13

    def test_end_of_input(self):
        with pytest.raises(ScriptError) as info:
            parse("print x1")
        assert info.value.message == "unexpected end of input"

    def test_diagnostic(self):
        with pytest.raises(ScriptError) as info:
            parse("let = ;")
        assert info.value.diagnostic() == {"severity": "error", "message": "unexpected '='",
                                           "line": 1, "column": 5, "length": 1}


class TestEvaluate:
    def test_state(self, heis1):
        [statement] = parse("let s = 2*x1 a1_{-1} + |0>;")
        state = Evaluator(heis1).state(statement.expr)
        x = heis1.ring.gen(1)
        assert state == normalize(heis1, [(x * 2, [A1]), (1, [])])

    def test_environment(self, heis1):
        [statement] = parse("let t = s - s;")
        assert Evaluator(heis1, {"s": heis1.a(1)}).state(statement.expr).is_zero()

    def test_unbound_name(self, heis1):
        [command] = parse("print foo;")
        with pytest.raises(ScriptError) as info:
            Evaluator(heis1).state(command.args[0])
        assert (info.value.line, info.value.column) == (1, 7)

    def test_variable_outside_system(self, heis1):
        [command] = parse("print phi1_{0};")
        with pytest.raises(ScriptError):
            Evaluator(heis1).state(command.args[0])

    def test_b_zero_mode_is_the_coordinate(self, heis1):
        [command] = parse("print b1_{0} a1_{-1};")
        x = heis1.ring.gen(1)
        assert Evaluator(heis1).state(command.args[0]) == normalize(heis1, [(x, [A1])])

    def test_division_by_state(self, heis1):
        [command] = parse("print x1 / a1_{-1};")
        with pytest.raises(ScriptError):
            Evaluator(heis1).state(command.args[0])

    def test_negative_power(self, laurent1):
        [command] = parse("print x1^-2;")
        x = laurent1.ring.gen(1)
        assert Evaluator(laurent1).state(command.args[0]) == laurent1.function(laurent1.ring.one() / (x * x))

    def test_render_round_trip(self, omega1):
        state = normalize(omega1, [(omega1.ring.gen(1) * 3, [A1, ModeVar("phi", 1, 0)]), (-1, [B1])])
        assert parse_state(state.render(), omega1) == state


class TestStrings:
    def test_aliases(self):
        assert coordinate_aliases(1) == {"b1": 1, "b": 1, "x": 1}
        assert coordinate_aliases(2) == {"b1": 1, "b2": 2, "x": 1, "y": 2}

    def test_mapping(self, series_omega1):
        x = series_omega1.ring.gen(1)
        assert parse_mapping("b -> b + b^2", series_omega1) == (x + x * x,)
        assert parse_mapping("x1 + x1^2", series_omega1) == (x + x * x,)

    def test_mapping_component_count(self, series_omega1):
        with pytest.raises(ScriptError):
            parse_mapping("x, y -> x, y", series_omega1)

    def test_field(self):
        x, y = poly_ring(2).gens
        assert parse_field("(y^2, 0)", 2) == VectorField.of(2, [y ** 2, 0])
        assert parse_field("(x2^2, x1 x2)", 2) == VectorField.of(2, [y ** 2, x * y])

    def test_field_must_be_polynomial(self):
        with pytest.raises(ScriptError):
            parse_field("(1/x1, 0)", 2)
