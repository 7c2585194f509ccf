import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src"))

import unittest
import numpy as np
from pdm_slater.core import Constants, SpaceDim
from pdm_slater.exceptions import DimensionError, EvaluationError, ExpressionSyntaxError, ModelError, ParameterError
from pdm_slater.expressions import BinaryOp, Constant, Negate, Parameter, Variable, evaluate, parse_expression
from pdm_slater.fields import (
    PDMModel,
    builtin_constant,
    builtin_harmonic,
    builtin_pct_mass_ratio,
    builtin_pct_potential,
    eval_jet2,
    eval_value,
    expression_field,
)
from pdm_slater.oracles import pct_potential_mass_form


class TestParser(unittest.TestCase):

    def test_single_variable(self):
        self.assertEqual(parse_expression("x"), Variable(1))
        self.assertEqual(parse_expression("y"), Variable(2))
        self.assertEqual(parse_expression("x4"), Variable(4))

    def test_unknown_names_are_parameters(self):
        node = parse_expression("((1+x^2)/(g+x^2))^2")
        self.assertEqual(node.parameters, frozenset({"g"}))
        self.assertEqual(node.max_axis, 1)

    def test_precedence(self):
        self.assertEqual(
            parse_expression("1+2*3"),
            BinaryOp("+", Constant(1.0), BinaryOp("*", Constant(2.0), Constant(3.0))),
        )
        self.assertEqual(parse_expression("-a^2"), Negate(BinaryOp("^", Parameter("a"), Constant(2.0))))

    def test_evaluation_order(self):
        cases = {
            "2^3^2": 512.0,
            "-2^2": -4.0,
            "2*-3": -6.0,
            "(1 + 2) * 3": 9.0,
            "8 / 4 / 2": 1.0,
            "1 - 2 - 3": -4.0,
            "2**3": 8.0,
            "1.5e1 + .5": 15.5,
        }
        for text, expected in cases.items():
            self.assertEqual(evaluate(parse_expression(text), [], {}), expected, text)

    def test_functions(self):
        self.assertAlmostEqual(evaluate(parse_expression("atan(1)*4"), [], {}), np.pi, places=14)
        self.assertAlmostEqual(evaluate(parse_expression("ln(exp(2)) + sqrt(9) + abs(-1)"), [], {}), 6.0, places=14)

    def test_missing_operand_position(self):
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse_expression("2*x+-")
        self.assertEqual(ctx.exception.position, 4)

    def test_syntax_errors(self):
        cases = {"": 0, "   ": 0, "3 $ 4": 2, "(x + 1": 6, "sin x": 0, "x y": 2, ")": 0}
        for text, position in cases.items():
            with self.assertRaises(ExpressionSyntaxError, msg=text) as ctx:
                parse_expression(text)
            self.assertEqual(ctx.exception.position, position, text)

    def test_round_trip(self):
        texts = [
            "((1 + x^2)/(gamma + x^2))^2",
            "-x^2 + 3*sin(y)/(1 + z^2) - 2^-1",
            "m0*omega^2/2*(x + (gamma - 1)*atan(x))^2",
            "exp(-(x1^2 + x2^2)/s) * cosh(x3) - tanh(w)",
            "1e-5 * x - 0.25",
        ]
        for text in texts:
            node = parse_expression(text)
            self.assertEqual(parse_expression(str(node)), node, text)


class TestJets(unittest.TestCase):

    def test_square(self):
        j = eval_jet2(expression_field("x^2"), [3.0])
        self.assertEqual(j.value, 9.0)
        np.testing.assert_array_equal(j.gradient, [6.0])
        self.assertEqual(j.laplacian, 2.0)

    def test_sum_of_squares(self):
        j = eval_jet2(expression_field("x1^2+x2^2"), [1.0, 1.0])
        self.assertEqual(j.value, 2.0)
        np.testing.assert_array_equal(j.gradient, [2.0, 2.0])
        self.assertEqual(j.laplacian, 4.0)

    def test_against_finite_differences(self):
        field = expression_field(
            "exp(-x1^2/2)*cos(x2) + sqrt(1 + x1^2*x2^2) + atan(x1 - x2)/(2 + sin(x1)) + a*x2^3",
            {"a": 0.7},
        )
        h = 1e-4
        for point in ([0.3, -0.7], [1.1, 0.4], [-0.5, 1.3]):
            p = np.array(point)
            j = eval_jet2(field, p)
            lap = 0.0
            for i in range(2):
                e = np.zeros(2)
                e[i] = h
                fp, f0, fm = eval_value(field, p + e), eval_value(field, p), eval_value(field, p - e)
                grad = (fp - fm) / (2 * h)
                self.assertLess(abs(grad - j.gradient[i]), 1e-6 * max(1.0, abs(grad)))
                lap += (fp - 2 * f0 + fm) / h ** 2
            self.assertLess(abs(lap - j.laplacian), 1e-6 * max(1.0, abs(lap)))

    def test_pow_with_variable_exponent(self):
        j = eval_jet2(expression_field("x^x"), [2.0])
        self.assertAlmostEqual(j.value, 4.0, places=13)
        self.assertAlmostEqual(j.gradient[0], 4.0 * (np.log(2.0) + 1.0), places=12)

    def test_evaluation_errors(self):
        with self.assertRaises(EvaluationError):
            eval_jet2(expression_field("ln(x)"), [-1.0])
        with self.assertRaises(EvaluationError):
            eval_jet2(expression_field("1/x"), [0.0])
        with self.assertRaises(EvaluationError) as ctx:
            eval_value(expression_field("sqrt(x - 2)"), [1.0])
        self.assertIn("sqrt", ctx.exception.node)
        with self.assertRaises(EvaluationError):
            eval_jet2(expression_field("k*x"), [1.0])

    def test_coordinate_beyond_point(self):
        with self.assertRaises(DimensionError):
            eval_jet2(expression_field("x2"), [1.0])


class TestBuiltins(unittest.TestCase):

    def test_pct_mass_ratio_values(self):
        self.assertAlmostEqual(eval_value(builtin_pct_mass_ratio(0.6), [0.0]), 2.777778, places=6)
        self.assertAlmostEqual(eval_value(builtin_pct_mass_ratio(0.8), [0.0]), 1.5625, places=12)
        j = eval_jet2(builtin_pct_mass_ratio(0.6), [0.0])
        self.assertEqual(j.gradient[0], 0.0)

    def test_pct_mass_ratio_constant_at_gamma_one(self):
        field = builtin_pct_mass_ratio(1.0)
        for x in (-3.0, -0.4, 0.0, 1.7, 25.0):
            j = eval_jet2(field, [x])
            self.assertEqual(j.value, 1.0)
            self.assertEqual(j.gradient[0], 0.0)
            self.assertEqual(j.laplacian, 0.0)

    def test_pct_mass_ratio_tends_to_one(self):
        self.assertAlmostEqual(eval_value(builtin_pct_mass_ratio(0.6), [1e4]), 1.0, places=6)

    def test_invalid_gamma(self):
        for gamma in (0.0, -1.0):
            with self.assertRaises(ParameterError):
                builtin_pct_mass_ratio(gamma)
        with self.assertRaises(ParameterError):
            builtin_pct_potential(0.6, 0.0)

    def test_pct_potential_reduces_to_oscillator(self):
        field = builtin_pct_potential(1.0, 1.0)
        for x in (-2.0, 0.0, 0.5, 3.0):
            self.assertAlmostEqual(eval_value(field, [x]), x * x / 2, places=13)

    def test_pct_potential_at_origin(self):
        # U(0) = -hbar^2 f''(0) / (8 m0) = 25/27 for gamma = 0.6
        u0 = eval_value(builtin_pct_potential(0.6, 1.0), [0.0])
        fpp = eval_jet2(builtin_pct_mass_ratio(0.6), [0.0]).laplacian
        self.assertAlmostEqual(u0, -fpp / 8, places=13)
        self.assertAlmostEqual(u0, 25 / 27, places=13)

    def test_pct_potential_mass_form(self):
        rng = np.random.default_rng(7)
        for gamma in (0.6, 0.8, 1.3):
            constants = Constants(hbar=0.7, m0=1.4)
            field = builtin_pct_potential(gamma, 1.2, constants)
            for x in rng.uniform(-5, 5, 50):
                u = eval_value(field, [x])
                self.assertLess(abs(u - pct_potential_mass_form(x, gamma, 1.2, constants)), 1e-11 * max(1.0, abs(u)))

    def test_harmonic(self):
        field = builtin_harmonic(2.0, 3)
        self.assertAlmostEqual(eval_value(field, [1.0, 1.0, 1.0]), 6.0, places=14)
        self.assertEqual(eval_jet2(field, [0.0, 0.0, 0.0]).laplacian, 12.0)

    def test_constant(self):
        j = eval_jet2(builtin_constant(2.5), [0.1, 0.2])
        self.assertEqual((j.value, j.laplacian), (2.5, 0.0))


class TestModel(unittest.TestCase):

    def test_pct_model(self):
        model = PDMModel.pct(0.6)
        self.assertEqual(model.dim, SpaceDim.ONE)
        self.assertAlmostEqual(model.mass_ratio(0.0), 1 / 0.36, places=12)

    def test_expressions_bind_constants(self):
        model = PDMModel.from_expressions("1", "hbar^2/(2*m0)*x^2", constants=Constants(hbar=2.0, m0=0.5))
        self.assertAlmostEqual(model.potential(1.0), 4.0, places=14)

    def test_nonpositive_mass_ratio(self):
        model = PDMModel.from_expressions("x", "0")
        with self.assertRaises(ModelError):
            model.jets(-1.0)
        with self.assertRaises(ModelError):
            model.mass_ratio(0.0)

    def test_coordinate_beyond_dimension(self):
        with self.assertRaises(DimensionError):
            PDMModel.from_expressions("1 + x2^2", "0", dim=1)

    def test_point_dimension(self):
        model = PDMModel.harmonic(1.0, 2)
        with self.assertRaises(DimensionError):
            model.jets([0.0, 0.0, 0.0])


if __name__ == '__main__':
    unittest.main()
