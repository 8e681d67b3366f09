from typing import List, Tuple

import contextlib
import io
import json
import os
import tempfile

from cimmap.cli import main

from .base import TestCase


class TestCommandLine(TestCase):
    def run_main(self, argv: List[str]) -> Tuple[int, str, str]:
        stdout = io.StringIO()
        stderr = io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = main(argv)
        return code, stdout.getvalue(), stderr.getvalue()

    def test_default_mappers(self) -> None:
        code, out, _ = self.run_main([ "--network", "cnn8" ])
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("network cnn8 on a 512x512 array"))
        for mapper in ("img2col", "sdk", "vw_sdk", "vwc_sdk", "tetris"):
            self.assertIn(f"{mapper} window", out)

    def test_json_output(self) -> None:
        code, out, _ = self.run_main([ "--network", "cnn8", "--mapper", "vw_sdk,tetris", "--format", "json" ])
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["totals"], { "vw_sdk": 128, "tetris": 116 })

    def test_prune_budget(self) -> None:
        code, out, _ = self.run_main([ "--network", "cnn8", "--mapper", "vwc_sdk", "--prune-budget", "44", "--format", "json" ])
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["totals"], { "vwc_sdk": 110 })

    def test_prune_policy_file(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "budgets.csv")
            with open(path, "w") as f:
                f.write("# layer,input %\n4,44\n")

            code, out, _ = self.run_main([
                "--network", "cnn8", "--mapper", "vwc_sdk", "--prune-policy", path, "--format", "json",
            ])

        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["totals"], { "vwc_sdk": 121 })

    def test_groups(self) -> None:
        code, out, _ = self.run_main([ "--network", "cnn8", "--mapper", "tetrisg", "--group", "2", "--format", "json" ])
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["totals"], { "tetrisg": 47 })

    def test_oracle(self) -> None:
        code, _, err = self.run_main([ "--network", "toy", "--array", "40x15", "--weight-bits", "5", "--oracle" ])
        self.assertEqual(code, 0)
        self.assertIn("[ok] tetris toy: 18 replayed / 18 cycles", err)
        self.assertNotIn("[mismatch]", err)

    def test_errors(self) -> None:
        code, out, err = self.run_main([ "--network", "toy", "--array", "40x15", "--weight-bits", "5", "--mapper", "tetrisg", "--group", "2" ])
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("group does not divide channels", err)

        code, _, err = self.run_main([ "--network", "cnn8", "--array", "512" ])
        self.assertEqual(code, 2)
        self.assertIn("invalid array size", err)

        code, _, err = self.run_main([ "--network", "cnn8", "--mapper", "nope" ])
        self.assertEqual(code, 2)
        self.assertIn("unknown mapper", err)
