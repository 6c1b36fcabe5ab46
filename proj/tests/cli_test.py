"""End-to-end checks of the formopt command line tool.

Usage: cli_test.py <formopt binary> <samples dir> <schemas dir>
"""

import json
import math
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema

CLI = ""
SAMPLES = pathlib.Path()
SCHEMAS = pathlib.Path()


def run(*args, stdin=None):
    return subprocess.run([CLI, *args], input=stdin, capture_output=True, text=True, timeout=300)


def run_json(*args, stdin=None):
    proc = run(*args, "--json", stdin=stdin)
    if proc.returncode != 0:
        raise AssertionError(f"exit {proc.returncode}: {proc.stderr}")
    return json.loads(proc.stdout)


def sample(name):
    return str(SAMPLES / f"{name}.json")


def validate(doc, schema_name):
    schema = json.loads((SCHEMAS / f"{schema_name}.schema.json").read_text())
    jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)


class ExitCodes(unittest.TestCase):
    def test_success(self):
        self.assertEqual(run("eval", "--form", sample("sum_of_fourth_powers"), "--point", "1,0").returncode, 0)

    def test_bad_input(self):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as tmp:
            json.dump({"n": 2, "d": 4, "terms": [{"alpha": [3, 0], "c": 1.0}]}, tmp)
        proc = run("eval", "--form", tmp.name, "--point", "1,0")
        self.assertEqual(proc.returncode, 2)
        self.assertIn("FORM_NOT_HOMOGENEOUS", proc.stderr)
        self.assertEqual(run("eval", "--form", "/nonexistent.json", "--point", "1,0").returncode, 2)
        self.assertEqual(run("eval", "--form", sample("sum_of_fourth_powers"), "--point", "1,0,0").returncode, 2)
        self.assertEqual(run("eval", "--form", sample("sum_of_fourth_powers"), "--point", "0,0").returncode, 2)
        self.assertEqual(run("search", "--form", sample("sum_of_fourth_powers"), "--starts", "-3").returncode, 2)
        self.assertEqual(run("frobnicate").returncode, 2)

    def test_unsupported(self):
        form = run("gen", "--n", "4", "--d", "3", "--seed", "1").stdout
        self.assertEqual(run("oracle", "--form", "-", stdin=form).returncode, 3)


class Eval(unittest.TestCase):
    def test_values(self):
        r = run_json("eval", "--form", sample("sum_of_fourth_powers"), "--point", "0.6,0.8")
        self.assertAlmostEqual(r["f"], 0.5392, places=12)
        self.assertAlmostEqual(r["gradient"][0], 0.864, places=12)
        self.assertAlmostEqual(r["gradient"][1], 2.048, places=12)
        self.assertAlmostEqual(r["grad_norm"], math.hypot(0.864, 2.048), places=12)
        self.assertAlmostEqual(r["d_abs_f"], 2.1568, places=12)
        self.assertFalse(r["fonc"])
        validate(r, "eval")

    def test_text_has_twelve_digits(self):
        out = run("eval", "--form", sample("sum_of_fourth_powers"), "--point", "0.6,0.8").stdout
        self.assertIn("grad_norm: 2.22279103831", out)

    def test_stdin_form(self):
        text = pathlib.Path(sample("indefinite_quartic")).read_text()
        r = run_json("eval", "--form", "-", "--point", "0,1", stdin=text)
        self.assertEqual(r["f"], -2.0)
        self.assertTrue(r["fonc"])


class Certify(unittest.TestCase):
    def classify(self, name, point):
        r = run_json("certify", "--form", sample(name), "--point", point)
        validate(r, "certificate")
        return r

    def test_classifications(self):
        self.assertEqual(self.classify("sum_of_fourth_powers", "1,1")["classification"], "StrictLocalMin")
        self.assertEqual(self.classify("sum_of_fourth_powers", "1,0")["classification"], "FONCNotSONC")
        self.assertEqual(self.classify("sum_of_fourth_powers", "0.6,0.8")["classification"], "NotFONC")
        r = self.classify("indefinite_quartic", "0,1")
        self.assertEqual(r["classification"], "StrictLocalMin")
        self.assertEqual(r["det_bordered"], -8.0)
        self.assertEqual(self.classify("product_of_squares", "1,0")["classification"], "StrictLocalMin")

    def test_off_sphere_warning(self):
        proc = run("certify", "--form", sample("sum_of_fourth_powers"), "--point", "2,2")
        self.assertEqual(proc.returncode, 0)
        self.assertIn("warning", proc.stderr)


class Reports(unittest.TestCase):
    def test_search_schema(self):
        for name in ["sum_of_fourth_powers", "indefinite_quartic", "tilted_quartic", "diagonal_quadratic",
                     "product_of_squares"]:
            validate(run_json("search", "--form", sample(name), "--starts", "60"), "search")

    def test_analyze_schema_and_verdicts(self):
        expected = {"sum_of_fourth_powers": "NoSpurious", "indefinite_quartic": "NoSpurious",
                    "tilted_quartic": "Spurious", "product_of_squares": "NoSpurious"}
        for name, verdict in expected.items():
            r = run_json("analyze", "--form", sample(name))
            validate(r, "analyze")
            self.assertEqual(r["verdict"], verdict, name)
            self.assertTrue(r["ball_sphere"]["passed"], name)

    def test_oracle_schema(self):
        r = run_json("oracle", "--form", sample("tilted_quartic"), "--resolution", "20000")
        validate(r, "oracle")
        self.assertEqual(sum(e["is_local_min"] for e in r["extrema"]), 4)

    def test_samples_are_forms(self):
        for path in SAMPLES.glob("*.json"):
            validate(json.loads(path.read_text()), "form")

    def test_out_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = pathlib.Path(tmp) / "report.json"
            proc = run("search", "--form", sample("sum_of_fourth_powers"), "--starts", "20", "--out", str(out))
            self.assertEqual(proc.returncode, 0)
            validate(json.loads(out.read_text()), "search")


class Generation(unittest.TestCase):
    def test_round_trip(self):
        text = run("gen", "--n", "3", "--d", "4", "--seed", "7").stdout
        doc = json.loads(text)
        validate(doc, "form")
        self.assertEqual(len(doc["terms"]), 15)
        r = run_json("eval", "--form", "-", "--point", "1,0,0", stdin=text)
        self.assertEqual(r["f"], next(t["c"] for t in doc["terms"] if t["alpha"] == [4, 0, 0]))

    def test_gen_is_deterministic(self):
        a = run("gen", "--n", "3", "--d", "5", "--seed", "3", "--scheme", "sparse:4").stdout
        b = run("gen", "--n", "3", "--d", "5", "--seed", "3", "--scheme", "sparse:4").stdout
        self.assertEqual(a, b)
        self.assertEqual(len(json.loads(a)["terms"]), 4)

    def test_gen_pipe_search_twice(self):
        form = run("gen", "--n", "3", "--d", "4", "--seed", "21").stdout
        first = run("search", "--form", "-", "--seed", "9", stdin=form)
        second = run("search", "--form", "-", "--seed", "9", "--threads", "1", stdin=form)
        self.assertEqual(first.returncode, 0)
        self.assertEqual(first.stdout, second.stdout)


if __name__ == "__main__":
    CLI, SAMPLES, SCHEMAS = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    unittest.main(argv=sys.argv[:1], verbosity=2)
