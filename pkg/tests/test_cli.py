import json
import subprocess
import sys

from hypersym.identities import strip_timing


def run_cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "hypersym.cli", *argv],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


class TestEval:
    def test_exact_partial_sum(self):
        r = run_cli("eval", "--fn", "f11", "--a", "1", "--b", "1",
                    "--x", "1", "--exact", "--terms", "5")
        assert r.returncode == 0
        assert r.stdout.strip() == "163/60"

    def test_psi2_origin_defaults_to_exact(self):
        r = run_cli("eval", "--fn", "psi2", "--a", "1/2", "--b", "4/3",
                    "--c", "5/7", "--x", "0", "--y", "0")
        assert r.returncode == 0
        assert r.stdout.strip() == "1"

    def test_float_exponential(self):
        r = run_cli("eval", "--fn", "f11", "--a", "1", "--b", "1",
                    "--x", "1.0", "--tol", "1e-14")
        assert r.returncode == 0
        value = float(r.stdout.split()[0])
        assert abs(value - 2.718281828459045) < 1e-13
        assert "terms=" in r.stdout

    def test_psi2x3_exact(self):
        r = run_cli("eval", "--fn", "psi2x3", "--a", "1", "--b", "1",
                    "--c", "1", "--x", "0", "--y", "0", "--z", "0")
        assert r.returncode == 0
        assert r.stdout.strip() == "1"

    def test_parse_error_exits_2(self):
        r = run_cli("eval", "--fn", "f11", "--a", "1", "--b", "oops", "--x", "1")
        assert r.returncode == 2

    def test_degenerate_parameter_exits_2(self):
        r = run_cli("eval", "--fn", "f11", "--a", "1", "--b", "-2", "--x", "1")
        assert r.returncode == 2

    def test_usage_error_exits_2(self):
        r = run_cli("eval", "--fn", "f11")
        assert r.returncode == 2


class TestVerify:
    def test_identities_scope(self, tmp_path):
        r = run_cli("verify", "--scope", "identities", "--out", str(tmp_path))
        assert r.returncode == 0, r.stderr
        data = json.loads((tmp_path / "verify_identities.json").read_text())
        assert data["ok"] is True
        rows = data["scopes"]["identities"]["rows"]
        assert len(rows) == 39
        assert (tmp_path / "verify_identities.md").exists()

    def test_commutators_scope_with_span(self, tmp_path):
        r = run_cli("verify", "--scope", "commutators", "--span-check",
                    "--out", str(tmp_path))
        assert r.returncode == 0
        data = json.loads((tmp_path / "verify_commutators.json").read_text())
        result = data["scopes"]["commutators"]["result"]
        assert result["antisymmetry_ok"] and result["jacobi_ok"]
        f11_rows = result["families"]["f11"]
        # span findings are reported, not asserted: one pair escapes
        escaped = [row["pair"] for row in f11_rows if not row["in_span"]]
        assert escaped == ["[f11.E_a', f11.E_b']"]
        assert all(row["in_span"] for row in result["families"]["psi2"])

    def test_flows_scope(self, tmp_path):
        r = run_cli("verify", "--scope", "flows", "--alpha", "0.1",
                    "--step", "1e-3", "--out", str(tmp_path))
        assert r.returncode == 0
        data = json.loads((tmp_path / "verify_flows.json").read_text())
        rows = data["scopes"]["flows"]["rows"]
        assert len(rows) == 10
        assert all(row["max_deviation"] <= 1e-8 for row in rows)

    def test_recursions_scope(self, tmp_path):
        r = run_cli("verify", "--scope", "recursions", "--out", str(tmp_path))
        assert r.returncode == 0
        data = json.loads((tmp_path / "verify_recursions.json").read_text())
        rows = data["scopes"]["recursions"]["rows"]
        assert len(rows) == 15  # 5 relations x 3 points
        assert all(row["status"] == "PASS" for row in rows)

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"recursion_order": 6, "out": str(tmp_path / "cfgout")}))
        r = run_cli("verify", "--scope", "recursions", "--config", str(cfg),
                    "--out", str(tmp_path / "flagout"))
        assert r.returncode == 0
        assert (tmp_path / "flagout" / "verify_recursions.json").exists()
        data = json.loads((tmp_path / "flagout" / "verify_recursions.json").read_text())
        assert data["scopes"]["recursions"]["rows"][0]["order"] == 6

    def test_bad_config_exits_2(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"nonsense_key": 1}))
        r = run_cli("verify", "--scope", "recursions", "--config", str(cfg))
        assert r.returncode == 2

    def test_bad_points_exit_2(self):
        r = run_cli("verify", "--scope", "recursions", "--points", "0.5,4/3,5/7")
        assert r.returncode == 2


class TestDeterminism:
    def test_scope_all_byte_identical_modulo_timing(self, tmp_path):
        r1 = run_cli("verify", "--scope", "all", "--mode", "both",
                     "--out", str(tmp_path / "runA"))
        r2 = run_cli("verify", "--scope", "all", "--mode", "both",
                     "--out", str(tmp_path / "runB"))
        assert r1.returncode == 0 and r2.returncode == 0
        a = strip_timing((tmp_path / "runA" / "verify_all.json").read_text())
        b = strip_timing((tmp_path / "runB" / "verify_all.json").read_text())
        assert a == b
        am = (tmp_path / "runA" / "verify_all.md").read_text()
        bm = (tmp_path / "runB" / "verify_all.md").read_text()
        assert am == bm


class TestCatalogueCommand:
    def test_listings(self):
        r = run_cli("catalogue")
        assert r.returncode == 0
        out = r.stdout
        for rec_id in ("I-F11-RAISE-A", "I-PSI2-SHIFT-Y"):
            assert rec_id in out
        assert "f11.E_a" in out and "psi2.E_ac" in out
        assert "+corrected" in out
