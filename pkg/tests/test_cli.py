import json

import pytest

from dnls_hierarchy.algebra import GaussianRational
from dnls_hierarchy.cli import main, parse_gaussian_rational

GR = GaussianRational.of


class TestGaussianRationalFlag:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2", GR(2)),
            ("1/2", GR("1/2")),
            ("-3/2", GR("-3/2")),
            ("i", GR(0, 1)),
            ("-i", GR(0, -1)),
            ("2i", GR(0, 2)),
            ("1/2+3/4 i", GR("1/2", "3/4")),
            ("-1-2i", GR(-1, -2)),
        ],
    )
    def test_accepted_forms(self, text, expected):
        assert parse_gaussian_rational(text) == expected

    def test_rejects_garbage(self):
        with pytest.raises(Exception):
            parse_gaussian_rational("one half")


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "derive" in capsys.readouterr().out


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["derive", "--n", "1", "--bogus"])
    assert exc.value.code == 2


def test_derive_latex_artifact(tmp_path, capsys):
    assert main(["derive", "--n", "3", "--alpha", "8", "--format", "latex",
                 "--out", str(tmp_path)]) == 0
    text = (tmp_path / "derive_n3.tex").read_text()
    assert text.startswith("iq_t-q_{xxxx} = ")
    out = capsys.readouterr().out
    assert '"verb": "derive"' in out


def test_gauge_json_has_empty_residual(tmp_path):
    assert main(["gauge", "--j", "1", "--format", "json", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "gauge_j1.json").read_text())
    assert payload["residual_bad_cubics"] == {}
    assert payload["gauged"]["linear"]["canonical"] is True


def test_check_subset_passes(tmp_path, capsys):
    code = main(["check", "--goldens", "--cubics", "--n-max", "5",
                 "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "check_report.json").read_text())
    assert report["all_pass"] is True
    out = capsys.readouterr().out
    assert "PASS reference table, gauged j=3" in out


def test_simulate_writes_csv_and_snapshot(tmp_path):
    code = main([
        "simulate", "--j", "2", "--equation", "planewave", "--grid", "64",
        "--dt", "0.001", "--t-end", "0.01", "--monitor-stride", "5",
        "--out", str(tmp_path),
    ])
    assert code == 0
    csv = (tmp_path / "timeseries.csv").read_text()
    assert csv.splitlines()[0] == "time,mass,l2_error"
    assert (tmp_path / "final.bin").exists()
    report = json.loads((tmp_path / "report.json").read_text())
    assert float(report["final_l2_error"]) < 1e-5


def test_simulate_gauged_equation(tmp_path):
    code = main([
        "simulate", "--j", "2", "--equation", "gauged", "--grid", "128",
        "--length", "100.0", "--dt", "0.001", "--t-end", "0.01",
        "--monitors", "mass", "--out", str(tmp_path),
    ])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert float(report["monitor_drift_abs"]["-1"]) < 1e-10
    assert float(report["linear_phase_per_step"]) > 0


def test_norms_verb_reads_snapshot(tmp_path, capsys):
    main([
        "simulate", "--j", "2", "--equation", "linear", "--grid", "64",
        "--dt", "0.001", "--t-end", "0.01", "--out", str(tmp_path),
    ])
    capsys.readouterr()
    code = main([
        "norms", "--input", str(tmp_path / "final.bin"), "--s", "0.5",
        "--r", "2", "--p", "4", "--out", str(tmp_path),
    ])
    assert code == 0
    values = json.loads((tmp_path / "norms.json").read_text())
    assert "fourier_lebesgue(s=0.5,r=2.0)" in values
    assert "modulation(s=0.5,p=4.0)" in values


def test_picard_verb(tmp_path):
    code = main(["picard", "--j", "2", "--s", "0.5", "--r", "2",
                 "--N-list", "16,32,64,128", "--out", str(tmp_path)])
    assert code == 0
    fit = json.loads((tmp_path / "picard_fit.json").read_text())
    assert abs(fit["slope"] - fit["predicted"]) < 0.15
    assert (tmp_path / "picard_norms.csv").read_text().startswith("N,norm")


def test_export_writes_all_formats(tmp_path):
    assert main(["export", "--n-max", "2", "--j-max", "1", "--format", "text",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "hierarchy_n2.txt").exists()
    assert (tmp_path / "gauged_j1.txt").exists()


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"formt": "latex"}))
    with pytest.raises(SystemExit) as exc:
        main(["derive", "--n", "1", "--config", str(cfg), "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_config_file_supplies_defaults_and_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"format": "latex"}))
    out1 = tmp_path / "a"
    assert main(["derive", "--n", "1", "--config", str(cfg), "--out", str(out1)]) == 0
    assert (out1 / "derive_n1.tex").exists()
    out2 = tmp_path / "b"
    assert main(["derive", "--n", "1", "--config", str(cfg), "--format", "text",
                 "--out", str(out2)]) == 0
    assert (out2 / "derive_n1.txt").exists()
    assert not (out2 / "derive_n1.tex").exists()


@pytest.mark.parametrize("argv_tail", [
    ["resonance", "--j", "2", "--count", "20000", "--seed", "9"],
    ["derive", "--n", "4"],
])
def test_artifacts_are_byte_deterministic(tmp_path, argv_tail):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(argv_tail + ["--out", str(out_a)]) == 0
    assert main(argv_tail + ["--out", str(out_b)]) == 0
    files_a = sorted(p.name for p in out_a.iterdir())
    files_b = sorted(p.name for p in out_b.iterdir())
    assert files_a == files_b
    for name in files_a:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
