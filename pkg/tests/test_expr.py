import math

import numpy as np
import pytest

from featurekit.errors import (
    ExpressionSyntaxError,
    ExpressionTypeError,
    UnknownFunction,
)
from featurekit.expr import Binary, Var, compile_expression, linfit


def ev(source, env=None, array_vars=()):
    return compile_expression(source, array_vars=array_vars).evaluate(env or {})


class TestParsing:
    def test_product_ast(self):
        e = compile_expression("x * y")
        assert e.ast == Binary("*", Var("x"), Var("y"))
        assert e.free_vars == {"x", "y"}

    def test_precedence(self):
        assert ev("2 + 3 * 4") == 14.0
        assert ev("(2 + 3) * 4") == 20.0
        assert ev("2 ^ 3 ^ 2") == 512.0          # right-assoc
        assert ev("-2 ^ 2") == -4.0              # ^ binds tighter than unary -
        assert ev("2 ^ -1") == 0.5

    def test_comparisons_and_boolean(self):
        assert ev("1 < 2 and 3 >= 3") is True
        assert ev("not (1 == 1)") is False
        assert ev("1 > 2 or 2 > 1") is True

    def test_conditional(self):
        assert ev("if(1 < 2, 10, 20)") == 10.0
        assert ev("if(1 > 2, 10, 20)") == 20.0

    def test_tuple(self):
        e = compile_expression("(x + 1, x - 1)")
        assert e.arity == 2
        assert e.evaluate({"x": 5.0}) == (6.0, 4.0)

    def test_syntax_error_has_position(self):
        with pytest.raises(ExpressionSyntaxError) as err:
            compile_expression("x + ")
        assert err.value.position == 4

    def test_unexpected_character(self):
        with pytest.raises(ExpressionSyntaxError):
            compile_expression("x $ y")

    def test_scientific_notation(self):
        assert ev("1e3 + 2.5e-1") == 1000.25


class TestTypeChecking:
    def test_sum_of_scalar_rejected(self):
        with pytest.raises(ExpressionTypeError):
            compile_expression("sum(x)")

    def test_array_var_declared(self):
        e = compile_expression("sum(xs)", array_vars={"xs"})
        assert e.evaluate({"xs": [1.0, 2.0, 3.0]}) == 6.0

    def test_array_arithmetic_rejected(self):
        with pytest.raises(ExpressionTypeError):
            compile_expression("xs + 1", array_vars={"xs"})

    def test_unknown_function(self):
        with pytest.raises(UnknownFunction):
            compile_expression("frobnicate(x)")

    def test_linfit_is_tuple_typed(self):
        e = compile_expression("linfit(xs, ys)", array_vars={"xs", "ys"})
        assert e.result_type == "tuple[2]"
        assert e.arity == 2

    def test_if_branches_must_agree(self):
        with pytest.raises(ExpressionTypeError):
            compile_expression("if(1 < 2, 1, 2 < 3)")

    def test_boolean_arithmetic_rejected(self):
        with pytest.raises(ExpressionTypeError):
            compile_expression("(1 < 2) + 1")


class TestIeeeSemantics:
    def test_division_by_zero(self):
        assert ev("1 / 0") == math.inf
        assert ev("-1 / 0") == -math.inf
        assert math.isnan(ev("0 / 0"))

    def test_negative_sqrt_and_log(self):
        assert math.isnan(ev("sqrt(0 - 4)"))
        assert math.isnan(ev("log(0 - 1)"))
        assert ev("log(0)") == -math.inf

    def test_nan_propagates(self):
        assert math.isnan(ev("sqrt(0-1) + 5"))

    def test_fractional_power_of_negative(self):
        assert math.isnan(ev("pow(0 - 2, 0.5)"))


class TestBuiltins:
    def test_scalar_builtins(self):
        assert ev("sqrt(9)") == 3.0
        assert ev("abs(0 - 4)") == 4.0
        assert ev("floor(2.7)") == 2.0
        assert ev("min(2, 3)") == 2.0
        assert ev("max(2, 3)") == 3.0
        assert ev("pow(2, 10)") == 1024.0

    def test_array_builtins(self):
        env = {"v": [1.0, 2.0, 3.0, 4.0]}
        assert ev("len(v)", env, {"v"}) == 4.0
        assert ev("sum(v)", env, {"v"}) == 10.0
        assert ev("mean(v)", env, {"v"}) == 2.5
        assert ev("at(v, 2)", env, {"v"}) == 3.0
        assert math.isnan(ev("at(v, 9)", env, {"v"}))

    def test_dot(self):
        env = {"u": [1.0, 2.0], "v": [3.0, 4.0]}
        assert ev("dot(u, v)", env, {"u", "v"}) == 11.0
        assert math.isnan(ev("dot(u, v)", {"u": [1.0], "v": [1.0, 2.0]},
                             {"u", "v"}))


class TestLinfit:
    def test_exact_line(self):
        slope, intercept = linfit([0, 1, 2, 3, 4], [1, 3, 5, 7, 9])
        assert slope == pytest.approx(2.0, abs=1e-12)
        assert intercept == pytest.approx(1.0, abs=1e-12)

    def test_against_numpy_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            n = rng.integers(2, 40)
            xs = rng.normal(0, 10, n)
            while len(np.unique(xs)) < 2:
                xs = rng.normal(0, 10, n)
            ys = rng.normal(0, 10, n)
            slope, intercept = linfit(xs.tolist(), ys.tolist())
            expected = np.polyfit(xs, ys, 1)
            assert slope == pytest.approx(expected[0], rel=1e-9, abs=1e-9)
            assert intercept == pytest.approx(expected[1], rel=1e-9, abs=1e-9)

    def test_degenerate(self):
        assert all(math.isnan(v) for v in linfit([1.0], [2.0]))
        assert all(math.isnan(v) for v in linfit([2.0, 2.0], [1.0, 5.0]))
