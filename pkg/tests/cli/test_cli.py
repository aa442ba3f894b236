# This code is part of densek.
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Tests for the densek command line."""
import contextlib
import csv
import io
import json
import os
import tempfile
import unittest

from densek.cli import main
from densek.core.graph import erdos_renyi
from densek.utils.sweep_subroutines import CSV_FIELDS

SNAP_GRAPH = """# K4 with a pendant path and a stray edge
1 2
1 3
1 4
2 3
2 4
3 4
4 5
5 6
6 7
7 8
20 21
"""

KONECT_GRAPH = """% bip unweighted
1 1
1 2
1 3
2 1
2 2
3 3
4 1
4 2
4 3
"""


class TestCli(unittest.TestCase):
    """densek command line tests."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.tmp = self._tmp.name
        self.snap = self._write("graph.txt", SNAP_GRAPH)
        self.konect = self._write("bip.tsv", KONECT_GRAPH)
        self.out = os.path.join(self.tmp, "out.csv")

    def tearDown(self):
        self._tmp.cleanup()

    def _write(self, name, text):
        path = os.path.join(self.tmp, name)
        with open(path, "w", encoding="utf-8") as stream:
            stream.write(text)
        return path

    def _run(self, command):
        """Runs ``densek`` on a whitespace-separated command; returns (code, stderr)."""
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            code = main(command.split())
        return code, stderr.getvalue()

    def _rows(self, path=None):
        with open(path or self.out, encoding="utf-8", newline="") as stream:
            return list(csv.DictReader(stream))

    def test_dks_sweep(self):
        """Two methods times two k values give four rows in (method, k) order."""
        code, _ = self._run(
            f"dks --input {self.snap} --k 3,4 --methods epprox,greedy --out {self.out}"
        )
        self.assertEqual(code, 0)
        with open(self.out, encoding="utf-8") as stream:
            self.assertEqual(stream.readline().strip(), ",".join(CSV_FIELDS))
        rows = self._rows()
        self.assertEqual(
            [(row["method"], row["k1"]) for row in rows],
            [("epprox", "3"), ("epprox", "4"), ("greedy", "3"), ("greedy", "4")],
        )
        for row in rows:
            self.assertEqual(row["dataset"], "graph.txt")
            self.assertEqual((row["n"], row["m"]), ("8", "10"))
            self.assertEqual((row["mode"], row["k2"], row["seed"]), ("dks", "", "0"))
        self.assertEqual(float(rows[3]["density"]), 1.0)
        self.assertEqual(rows[3]["edges_inside"], "6")
        self.assertEqual(rows[3]["converged_by"], "peeling")

    def test_dkbs_cells(self):
        """Bipartite sweep against the oracle."""
        code, _ = self._run(
            f"dkbs --input {self.konect} --format konect --k1 2 --k2 2 "
            f"--methods epprox,brute --out {self.out}"
        )
        self.assertEqual(code, 0)
        rows = self._rows()
        self.assertEqual(len(rows), 2)
        self.assertEqual((rows[0]["k1"], rows[0]["k2"]), ("2", "2"))
        self.assertEqual(rows[0]["mode"], "dkbs")
        self.assertEqual(float(rows[1]["density"]), 1.0)
        self.assertLessEqual(float(rows[0]["density"]), 1.0)

    def test_stdout(self):
        """Without --out the CSV goes to stdout."""
        stdout = io.StringIO()
        with contextlib.redirect_stdout(stdout):
            code, _ = self._run(f"dks --input {self.snap} --k 2")
        self.assertEqual(code, 0)
        self.assertEqual(len(stdout.getvalue().splitlines()), 2)

    def test_missing_file(self):
        """Unreadable input: exit 2 and no CSV."""
        missing = os.path.join(self.tmp, "nope.txt")
        code, message = self._run(f"dks --input {missing} --k 2 --out {self.out}")
        self.assertEqual(code, 2)
        self.assertIn("densek: error:", message)
        self.assertFalse(os.path.exists(self.out))

    def test_bad_inputs(self):
        """Parse errors, oversized k and unknown methods are usage errors."""
        bad = self._write("bad.txt", "1 2\n3\n")
        self.assertEqual(self._run(f"dks --input {bad} --k 1")[0], 2)
        self.assertEqual(self._run(f"dks --input {self.snap} --k 8")[0], 2)
        code, _ = self._run(
            f"dkbs --input {self.konect} --format konect --k1 1 --k2 1 --methods greedy"
        )
        self.assertEqual(code, 2)
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as context:
                main(["dks", "--input", self.snap, "--k", "4,3"])
        self.assertEqual(context.exception.code, 2)

    def test_failed_cell(self):
        """A failing cell is marked and the run exits 1 after writing every row."""
        graph = erdos_renyi(40, 0.3, seed=0)
        edges = "".join(f"{u} {v}\n" for u, v in graph.to_edge_list().edges)
        path = self._write("big.txt", edges)
        code, message = self._run(
            f"dks --input {path} --k 20 --methods greedy,brute --out {self.out}"
        )
        self.assertEqual(code, 1)
        self.assertIn("too large for oracle", message)
        rows = self._rows()
        self.assertEqual([row["converged_by"] for row in rows], ["peeling", "error"])
        self.assertEqual(rows[1]["density"], "")

    def test_deterministic_and_parallel(self):
        """Reruns and parallel runs agree except for runtime."""
        outputs = []
        for jobs in (1, 1, 3):
            code, _ = self._run(
                f"dks --input {self.snap} --k 2,3,4 --methods epprox,greedy,tpm,brute "
                f"--seed 5 --jobs {jobs} --out {self.out}"
            )
            self.assertEqual(code, 0)
            rows = self._rows()
            for row in rows:
                del row["runtime_ms"]
            outputs.append(rows)
        self.assertEqual(len(outputs[0]), 12)
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(outputs[0], outputs[2])

    def test_trace_and_selection_out(self):
        """Trace lines match the reported iterations; labels are the original ids."""
        trace = os.path.join(self.tmp, "trace.jsonl")
        selection = os.path.join(self.tmp, "selection.jsonl")
        code, _ = self._run(
            f"dks --input {self.snap} --k 4 --methods epprox,greedy --max-iter 50 "
            f"--out {self.out} --trace-out {trace} --selection-out {selection}"
        )
        self.assertEqual(code, 0)
        rows = self._rows()
        with open(trace, encoding="utf-8") as stream:
            records = [json.loads(line) for line in stream]
        self.assertEqual(len(records), int(rows[0]["iterations"]))
        self.assertTrue(all(record["method"] == "epprox" for record in records))
        self.assertTrue(all(record["k1"] == 4 for record in records))
        with open(selection, encoding="utf-8") as stream:
            chosen = [json.loads(line) for line in stream]
        self.assertEqual([line["method"] for line in chosen], ["epprox", "greedy"])
        self.assertEqual(len(chosen[0]["labels"]), 4)
        self.assertEqual(chosen[1]["labels"], [1, 2, 3, 4])

    def test_schedule(self):
        """--schedule picks the base schedule; explicit flags still override it."""
        trace = os.path.join(self.tmp, "trace.jsonl")
        for schedule, first_lam in (("published", 1e-10), ("gentle", 1.0)):
            code, _ = self._run(
                f"dks --input {self.snap} --k 4 --schedule {schedule} --max-iter 40 "
                f"--out {self.out} --trace-out {trace}"
            )
            self.assertEqual(code, 0)
            with open(trace, encoding="utf-8") as stream:
                records = [json.loads(line) for line in stream]
            self.assertEqual(records[0]["lam"], first_lam)
            self.assertLessEqual(len(records), 40)
            self.assertEqual(int(self._rows()[0]["iterations"]), len(records))
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as context:
                main(["dks", "--input", self.snap, "--k", "4", "--schedule", "slow"])
        self.assertEqual(context.exception.code, 2)
