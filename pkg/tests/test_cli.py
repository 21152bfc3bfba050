"""Command-line interface: subcommands, exit codes, and determinism."""

from __future__ import annotations

import io
import json

from brieskorn.cli import EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_OK, main

GOLDEN = [
    "invariants",
    "--factors", "x:3",
    "--residual", "x^3+y^3",
    "--vars", "x,y",
    "--weights", "1,1",
    "--format", "json",
]


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


class TestInvariantsCommand:
    def test_golden_json(self):
        code, text = run(GOLDEN)
        assert code == EXIT_OK
        envelope = json.loads(text)
        report = envelope["report"]
        assert (report["mu"], report["nu"], report["rank"]) == (9, 4, 13)
        assert report["basis_nu"] == ["1", "x", "y", "x*y"]
        assert len(report["basis"]) == 13
        assert {e["monomial"]: e["coefficient"] for e in report["a_action"]}["1"] == "1/3"
        assert envelope["warnings"] == []
        assert envelope["timing"] is None

    def test_cross_with_defaults(self):
        code, text = run(
            ["invariants", "--factors", "x:2,y:2", "--weights", "1,1",
             "--format", "json"]
        )
        assert code == EXIT_OK
        report = json.loads(text)["report"]
        assert (report["mu"], report["nu"], report["rank"]) == (1, 1, 2)

    def test_byte_identical_output(self):
        _, first = run(GOLDEN)
        _, second = run(GOLDEN)
        assert first == second

    def test_json_round_trips(self):
        _, text = run(GOLDEN)
        envelope = json.loads(text)
        assert json.loads(json.dumps(envelope, indent=2)) == envelope

    def test_multiplicity_one_rejected(self):
        code, _ = run(["invariants", "--factors", "x:1"])
        assert code == EXIT_INVALID

    def test_parse_error_is_invalid_input(self):
        code, _ = run(["invariants", "--factors", "x+:2"])
        assert code == EXIT_INVALID

    def test_expansion_mismatch_reported(self):
        code, _ = run(
            ["invariants", "--factors", "x:3", "--residual", "x^3+y^3",
             "--f", "x^6"]
        )
        assert code == EXIT_INVALID

    def test_expansion_match_accepted(self):
        code, _ = run(
            ["invariants", "--factors", "x:3", "--residual", "x^3+y^3",
             "--f", "x^6 + x^3*y^3", "--weights", "1,1"]
        )
        assert code == EXIT_OK

    def test_inconclusive_exit_code(self):
        # the cap is below the first usable jet order: nothing stabilizes
        code, _ = run(
            ["invariants", "--factors", "x:3", "--residual", "x^3+y^3",
             "--jet-cap", "6"]
        )
        assert code == EXIT_INCONCLUSIVE

    def test_witness_flag(self):
        code, text = run(GOLDEN + ["--check-witness"])
        assert code == EXIT_OK
        report = json.loads(text)["report"]
        assert report["torsion_free_witness"]["holds"] is True

    def test_heuristic_warning_without_weights(self):
        code, text = run(
            ["invariants", "--factors", "x:2,y:2", "--format", "json"]
        )
        assert code == EXIT_OK
        envelope = json.loads(text)
        assert any("jet stabilization" in w for w in envelope["warnings"])
        assert envelope["report"]["a_action"] is None

    def test_timing_opt_in(self):
        code, text = run(GOLDEN + ["--timing"])
        assert code == EXIT_OK
        assert json.loads(text)["timing"]["seconds"] >= 0

    def test_text_format(self):
        code, text = run(
            ["invariants", "--factors", "x:2,y:2", "--weights", "1,1"]
        )
        assert code == EXIT_OK
        assert "mu: 1" in text and "rank: 2" in text


class TestSuspendCommand:
    def test_golden_suspension(self):
        code, text = run(
            ["suspend", "--isolated", "z^2", "--factors", "x:3",
             "--residual", "x^3+y^3", "--weights", "1,1", "--format", "json"]
        )
        assert code == EXIT_OK
        report = json.loads(text)["report"]
        assert report["rank"] == 13
        assert report["ab_model"]["rank"] == 13

    def test_z3_gives_rank_26(self):
        code, text = run(
            ["suspend", "--isolated", "z^3", "--factors", "x:3",
             "--residual", "x^3+y^3", "--weights", "1,1", "--format", "json"]
        )
        assert code == EXIT_OK
        assert json.loads(text)["report"]["rank"] == 26

    def test_verify_direct(self):
        code, text = run(
            ["suspend", "--isolated", "z^2", "--factors", "x:2,y:2",
             "--weights", "1,1", "--verify-direct", "--format", "json"]
        )
        assert code == EXIT_OK
        check = json.loads(text)["report"]["direct_check"]
        assert check["agrees"] and check["mu_direct"] == 1

    def test_product_germ_accepted(self):
        code, text = run(
            ["suspend", "--isolated", "z*w", "--factors", "x:2,y:2",
             "--weights", "1,1", "--format", "json"]
        )
        assert code == EXIT_OK
        assert json.loads(text)["report"]["rank"] == 2

    def test_smooth_germ_rejected(self):
        code, _ = run(
            ["suspend", "--isolated", "z", "--factors", "x:2,y:2"]
        )
        assert code == EXIT_INVALID

    def test_variable_clash_rejected(self):
        code, _ = run(
            ["suspend", "--isolated", "x^2", "--factors", "x:2,y:2"]
        )
        assert code == EXIT_INVALID


class TestAbmodCommands:
    def test_identity(self):
        code, text = run(["abmod", "identity", "--n", "5"])
        assert code == EXIT_OK
        assert text.strip() == "OK"

    def test_tensor_and_check(self, tmp_path):
        left = tmp_path / "left.json"
        right = tmp_path / "right.json"
        out_path = tmp_path / "product.json"
        left.write_text(
            json.dumps(
                {"rank": 1, "trunc_order": 16, "label": "E",
                 "a_matrix": [[[[1, "1/3"]]]]}
            )
        )
        right.write_text(
            json.dumps(
                {"rank": 2, "trunc_order": 16, "label": "F",
                 "a_matrix": [[[[1, "1/2"]], []], [[], [[1, "3/2"]]]]}
            )
        )
        code, _ = run(["abmod", "tensor", str(left), str(right), "-o", str(out_path)])
        assert code == EXIT_OK
        record = json.loads(out_path.read_text())
        assert record["rank"] == 2
        assert record["a_matrix"][0][0] == [[1, "5/6"]]

        code, text = run(["abmod", "check", str(out_path)])
        assert code == EXIT_OK
        flags = json.loads(text)
        assert flags["commutation"] and flags["simple_pole"]
        assert flags["regular_k1"] and flags["regular_k2"]

    def test_check_inconclusive_when_truncation_tiny(self, tmp_path):
        path = tmp_path / "tiny.json"
        path.write_text(
            json.dumps(
                {"rank": 1, "trunc_order": 2, "label": "",
                 "a_matrix": [[[[1, "1"]]]]}
            )
        )
        code, _ = run(["abmod", "check", str(path), "--k", "3"])
        assert code == EXIT_INCONCLUSIVE

    def test_selftest_deterministic(self):
        code1, text1 = run(["abmod", "selftest", "--count", "10", "--seed", "3"])
        code2, text2 = run(["abmod", "selftest", "--count", "10", "--seed", "3"])
        assert code1 == code2 == EXIT_OK
        assert text1 == text2
        assert "10/10" in text1


class TestConfiguration:
    def test_env_override_for_jet_cap(self, monkeypatch):
        monkeypatch.setenv("BRIESKORN_JET_CAP", "6")
        code, _ = run(
            ["invariants", "--factors", "x:3", "--residual", "x^3+y^3"]
        )
        assert code == EXIT_INCONCLUSIVE

    def test_flag_beats_environment(self, monkeypatch):
        monkeypatch.setenv("BRIESKORN_JET_CAP", "6")
        code, _ = run(
            ["invariants", "--factors", "x:3", "--residual", "x^3+y^3",
             "--weights", "1,1", "--jet-cap", "24"]
        )
        assert code == EXIT_OK

    def test_config_echoed_in_envelope(self):
        _, text = run(GOLDEN + ["--trunc", "8"])
        assert json.loads(text)["config"]["trunc_order"] == 8
