import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src"))

import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from pydantic import ValidationError
from pdm_slater.checks import available_checks, run_checks
from pdm_slater.cli import main
from pdm_slater.config import RunConfig, load_config, parse_config
from pdm_slater.exceptions import ConfigError, ParameterError
from pdm_slater.runner import (
    ComparisonRow,
    evaluate_points,
    figure_tables,
    run_compare,
    run_density,
    run_exact_grid,
    run_exact_pct,
    run_figures,
    run_semiclassical,
    write_rows,
)

PCT_ONE = {
    "model": {"builtin": "pct", "params": {"gamma": 1.0}},
    "run": {"beta": 1.0, "grid": {"min": -3, "max": 3, "n": 61}},
    "compare": {"oracle": "pct-exact", "tolerance": 0.02},
}


def config_of(data: dict) -> RunConfig:
    return parse_config(json.dumps(data))


class TestConfig(unittest.TestCase):

    def test_builtin_pct(self):
        config = config_of({"model": {"builtin": "pct", "params": {"gamma": 0.6}}})
        model = config.build_model()
        self.assertEqual(model.name, "pct")
        self.assertEqual(model.params, {"gamma": 0.6, "omega": 1.0})
        self.assertAlmostEqual(model.mass_ratio(0.0), 1 / 0.36, places=12)

    def test_expression_model(self):
        config = config_of({
            "model": {"f": "1", "U": "omega^2*x^2/2", "params": {"omega": 2.0}},
            "run": {"lambda": 1.5},
        })
        self.assertAlmostEqual(config.build_model().potential(1.0), 2.0, places=14)
        self.assertEqual(config.run.lam, 1.5)

    def test_defaults(self):
        config = RunConfig()
        self.assertIsNone(config.model)
        self.assertEqual(config.run.betas, (1.0,))
        self.assertEqual(config.compare.grid.to_grid().n, 4001)
        with self.assertRaises(ConfigError):
            config.build_model()

    def test_columns(self):
        config = RunConfig(outputs=["C_exact", "C_leading"])
        self.assertEqual(config.columns, ("beta", "x", "C_leading", "C_exact"))
        self.assertEqual(config.with_tolerance(0.5).compare.tolerance, 0.5)
        self.assertIs(config.with_tolerance(None), config)

    def test_invalid_gamma(self):
        with self.assertRaises(ParameterError):
            config_of({"model": {"builtin": "pct", "params": {"gamma": -1.0}}})

    def test_rejected_configs(self):
        bad = [
            {"model": {"builtin": "morse"}},
            {"model": {"builtin": "harmonic", "params": {"gamma": 0.6}}},
            {"model": {"f": "1"}},
            {"model": {"f": "1", "U": "a*x^2"}},
            {"model": {"builtin": "pct", "params": {}}},
            {"model": {"builtin": "pct", "params": {"gamma": 0.6}}, "run": {"d": 2}},
            {"run": {"beta": []}},
            {"run": {"beta": [1.0, -0.5]}},
            {"run": {"d": 2, "axis": 3}},
            {"run": {"grid": {"min": 1, "max": 1}}},
            {"outputs": ["C_total"]},
            {"unknown": 1},
        ]
        for data in bad:
            with self.assertRaises(ConfigError, msg=json.dumps(data)):
                config_of(data)

    def test_bad_json(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config('{"model": ', "broken.json")
        self.assertIn("broken.json", str(ctx.exception))
        self.assertIn("line", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config("/nonexistent/run.json")

    def test_source_prefix(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.json"
            path.write_text(json.dumps({"model": {"f": "1", "U": "k*x^2"}}), encoding="utf-8")
            with self.assertRaises(ConfigError) as ctx:
                load_config(path)
            self.assertIn(str(path), str(ctx.exception))
            self.assertIn("'k'", str(ctx.exception))


class TestRunner(unittest.TestCase):

    def test_evaluate_points_keeps_order(self):
        items = list(range(40))
        self.assertEqual(evaluate_points(lambda i: i * i, items, workers=4), [i * i for i in items])
        self.assertEqual(evaluate_points(lambda i: -i, [], workers=4), [])

    def test_semiclassical_rows(self):
        config = config_of({
            "model": {"builtin": "harmonic"},
            "run": {"beta": [0.5, 1.0], "grid": {"min": -1, "max": 1, "n": 11}, "workers": 3},
        })
        rows = run_semiclassical(config)
        self.assertEqual(len(rows), 22)
        self.assertEqual([r.beta for r in rows[:11]], [0.5] * 11)
        origin = rows[16]
        self.assertEqual((origin.beta, origin.x), (1.0, 0.0))
        self.assertAlmostEqual(origin.C_leading, 0.3989423, places=7)
        self.assertAlmostEqual(origin.C_semiclassical, 0.3656971, places=7)
        self.assertIsNone(origin.C_exact)

    def test_axis_selection(self):
        config = config_of({
            "model": {"f": "1 + x2^2/4", "U": "x1^2 + x2^2"},
            "run": {"d": 2, "axis": 2, "grid": {"min": -1, "max": 1, "n": 3}},
        })
        rows = run_semiclassical(config)
        self.assertAlmostEqual(rows[0].C_semiclassical, rows[2].C_semiclassical, places=12)
        self.assertNotEqual(rows[0].C_semiclassical, rows[1].C_semiclassical)

    def test_row_sum_is_checked(self):
        with self.assertRaises(ValidationError):
            ComparisonRow(beta=1.0, x=0.0, C_leading=1.0, delta_C=0.5, C_semiclassical=1.0)

    def test_compare_oscillator(self):
        report = run_compare(config_of(PCT_ONE))
        self.assertEqual(len(report.rows), 61)
        self.assertTrue(0.005 <= report.max_rel_err <= 0.012, report.max_rel_err)
        self.assertTrue(1.5 <= abs(report.argmax_x) <= 2.5, report.argmax_x)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.rows[30].C_exact, 0.3680052, places=7)
        self.assertFalse(run_compare(config_of(PCT_ONE).with_tolerance(1e-6)).passed)

    def test_pct_oracle_needs_pct_model(self):
        config = config_of({"model": {"builtin": "harmonic"}, "run": {"grid": {"min": -1, "max": 1, "n": 3}}})
        with self.assertRaises(ConfigError):
            run_compare(config)
        with self.assertRaises(ConfigError):
            run_exact_pct(config)

    def test_grid_oracle_matches_closed_form(self):
        config = config_of({
            "model": {"builtin": "pct", "params": {"gamma": 0.6}},
            "run": {"beta": 1.0, "grid": {"min": -3, "max": 3, "n": 61}},
            "compare": {"oracle": "grid-spectral", "grid": {"min": -12, "max": 12, "n": 2401}},
        })
        numeric = run_exact_grid(config)
        exact = run_exact_pct(config)
        self.assertEqual(len(numeric), len(exact))
        for a, b in zip(numeric, exact):
            self.assertEqual(a.x, b.x)
            self.assertLessEqual(abs(a.C_exact - b.C_exact) / b.C_exact, 1e-4)

    def test_grid_oracle_box(self):
        config = config_of({
            "model": {"builtin": "harmonic"},
            "run": {"grid": {"min": -5, "max": 5, "n": 11}},
            "compare": {"oracle": "grid-spectral", "grid": {"min": -4, "max": 4, "n": 101}},
        })
        with self.assertRaises(ConfigError):
            run_exact_grid(config)

    def test_density_regions(self):
        config = config_of({
            "model": {"builtin": "harmonic"},
            "run": {"lambda": 1.0, "grid": {"min": -2, "max": 2, "n": 5}},
        })
        with self.assertLogs("pdm_slater.runner", level="WARNING"):
            rows = run_density(config)
        self.assertEqual([r.region for r in rows], ["forbidden", "allowed", "allowed", "allowed", "forbidden"])
        self.assertEqual([r.V for r in rows], [2.0, 0.5, 0.0, 0.5, 2.0])
        self.assertIsNone(rows[0].density)
        self.assertGreater(rows[2].density, 0.0)
        with self.assertRaises(ConfigError):
            run_density(config_of({"model": {"builtin": "harmonic"}}))

    def test_write_rows(self):
        config = config_of({
            "model": {"builtin": "harmonic"},
            "run": {"lambda": 1.0, "grid": {"min": -2, "max": 2, "n": 5}},
        })
        out = io.StringIO()
        write_rows(out, run_density(config), ("x", "lam", "V", "density", "region"))
        lines = out.getvalue().split("\n")
        self.assertEqual(lines[0], "x,lambda,V,density,region")
        self.assertEqual(lines[1], "-2,1,2,,forbidden")


class TestFigures(unittest.TestCase):

    def test_tables(self):
        tables = figure_tables(RunConfig())
        self.assertEqual(set(tables), {"mass_ratio", "slater_semiclassical", "delta_correction", "slater_exact"})
        header, rows = tables["mass_ratio"]
        self.assertEqual(header, ["x", "f(gamma=0.6)", "f(gamma=0.8)", "f(gamma=1)"])
        self.assertEqual(len(rows), 201)
        self.assertAlmostEqual(rows[100][0], 0.0, places=12)
        for got, want in zip(rows[100][1:], (2.777778, 1.5625, 1.0)):
            self.assertAlmostEqual(got, want, places=6)
        exact = tables["slater_exact"][1][100][1:]
        for got, want in zip(exact, (0.2208031, 0.2944042, 0.3680052)):
            self.assertAlmostEqual(got, want, places=7)
        self.assertAlmostEqual(tables["delta_correction"][1][100][3], -0.3989423 / 12, places=7)
        for name in ("slater_semiclassical", "delta_correction"):
            deviation = max(abs(row[1] - row[3]) for row in tables[name][1])
            self.assertGreater(deviation, 1e-3, name)
        self.assertAlmostEqual(tables["slater_semiclassical"][1][100][3], 0.3656971, places=7)

    def test_run_figures(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = run_figures(RunConfig(), tmp)
            self.assertEqual(len(paths), 4)
            for path in paths:
                lines = path.read_text(encoding="utf-8").splitlines()
                self.assertEqual(len(lines), 202)
                self.assertTrue(lines[0].startswith("x,"))


class TestChecks(unittest.TestCase):

    def test_selected_checks_pass(self):
        names = ["delta correction identity", "gamma recurrence", "truncation order"]
        results = run_checks(names)
        self.assertEqual([r.name for r in results], ["gamma recurrence", "delta correction identity", "truncation order"])
        for r in results:
            self.assertTrue(r.passed, str(r))
            self.assertTrue(str(r).startswith("PASS "))

    def test_registry(self):
        self.assertIn("oracle cross-validation", available_checks())
        self.assertEqual(run_checks([]), [])


class TestMain(unittest.TestCase):

    def run_main(self, argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(argv)
        return code, out.getvalue(), err.getvalue()

    def write_config(self, tmp: str, data: dict) -> str:
        path = Path(tmp) / "run.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def test_compare_to_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, PCT_ONE)
            first, second = Path(tmp) / "a.csv", Path(tmp) / "b.csv"
            self.assertEqual(self.run_main(["compare", "--config", config, "--out", str(first)])[0], 0)
            self.assertEqual(self.run_main(["compare", "--config", config, "--out", str(second)])[0], 0)
            content = first.read_text(encoding="utf-8")
            self.assertTrue(content.startswith("beta,x,C_leading,delta_C,C_semiclassical,C_exact,abs_err,rel_err\n"))
            self.assertEqual(len(content.splitlines()), 62)
            self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_tolerance_exceeded(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, PCT_ONE)
            code, out, err = self.run_main(["compare", "--config", config, "--tolerance", "1e-6"])
        self.assertEqual(code, 1)
        self.assertTrue(out.startswith("beta,x,"))
        self.assertIn("Tolerance Exceeded", err)

    def test_compare_summary_on_stderr(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, PCT_ONE)
            code, out, err = self.run_main(["compare", "--config", config, "-q"])
        self.assertEqual(code, 0)
        self.assertIn("max_rel_err=", err)
        self.assertNotIn("max_rel_err=", out)

    def test_invalid_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {"model": {"builtin": "pct", "params": {"gamma": -1.0}}})
            code, out, err = self.run_main(["semiclassical", "--config", config])
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("gamma", err)

    def test_missing_model(self):
        code, _, err = self.run_main(["semiclassical", "-q"])
        self.assertEqual(code, 2)
        self.assertIn("model", err)

    def test_overflowing_weight(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {
                "model": {"f": "1", "U": "-x^2"},
                "run": {"grid": {"min": -30, "max": 30, "n": 7}},
            })
            code, out, err = self.run_main(["semiclassical", "--config", config])
        self.assertEqual(code, 2)
        self.assertIn("overflows", err)
        self.assertIn("(at x=", err)

    def test_semiclassical_stdout(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = self.write_config(tmp, {
                "model": {"builtin": "harmonic"},
                "run": {"grid": {"min": -1, "max": 1, "n": 3}},
                "outputs": ["C_semiclassical"],
            })
            code, out, _ = self.run_main(["semiclassical", "--config", config])
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[0], "beta,x,C_semiclassical")
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[2].startswith("1,0,0.365697"))

    def test_check_subset(self):
        code, out, _ = self.run_main(["check", "--only", "gamma recurrence"])
        self.assertEqual(code, 0)
        self.assertIn("PASS gamma recurrence", out)

    def test_figures(self):
        with tempfile.TemporaryDirectory() as tmp:
            code, out, _ = self.run_main(["figures", "--out", tmp])
            self.assertEqual(code, 0)
            self.assertEqual(len(out.splitlines()), 4)
            self.assertTrue((Path(tmp) / "slater_exact.csv").exists())


if __name__ == '__main__':
    unittest.main()
