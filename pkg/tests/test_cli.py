"""CLI dispatch, config precedence, output schemas, atomic writes."""

import json
import os

import numpy as np
import pytest

from spinchain_otoc.cli import main, parse_range
from spinchain_otoc.errors import DomainError
from spinchain_otoc.output import dump_json, format_float, write_text_atomic


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


class TestParseRange:
    def test_inclusive_endpoint(self):
        assert parse_range("-2:5:0.5") == tuple(np.arange(-2, 5.25, 0.5).tolist())
        assert len(parse_range("-2:5:0.5")) == 15
        assert parse_range("0:4:1") == (0.0, 1.0, 2.0, 3.0, 4.0)

    def test_half_step_tolerance(self):
        # stop not on the lattice: include the nearest point within step/2
        assert parse_range("0:1.04:0.5") == (0.0, 0.5, 1.0)

    def test_bare_number(self):
        assert parse_range("1.5") == (1.5,)
        assert parse_range(2) == (2.0,)

    def test_errors(self):
        with pytest.raises(DomainError):
            parse_range("1:2")
        with pytest.raises(DomainError):
            parse_range("0:1:-0.5")


class TestFloatSerialization:
    def test_format_round_trips(self):
        for x in (np.pi, 1 / 3, 1e-17, 123456.789012345678, float("inf")):
            text = format_float(x)
            assert float(text) == x

    def test_dump_json_round_trips(self):
        doc = {"a": np.pi, "b": [1, 2.5, None], "c": {"d": True, "e": "text"},
               "f": float("inf")}
        parsed = json.loads(dump_json(doc))
        assert parsed["a"] == np.pi
        assert parsed["b"] == [1, 2.5, None]
        assert parsed["f"] == float("inf")


class TestAtomicWrite:
    def test_writes_and_replaces(self, tmp_path):
        target = tmp_path / "out.txt"
        write_text_atomic(target, "one")
        write_text_atomic(target, "two")
        assert target.read_text() == "two"
        assert list(tmp_path.iterdir()) == [target]

    def test_no_partial_file_on_failure(self, tmp_path, monkeypatch):
        target = tmp_path / "out.txt"

        def boom(src, dst):
            raise OSError("simulated failure")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            write_text_atomic(target, "data")
        monkeypatch.undo()
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []


class TestExitCodes:
    def test_success(self, tmp_path):
        code = main(["saturation", "--n", "8", "--jz", "-2", "--h", "0",
                     "--boundary", "periodic", "--op", "sz",
                     "--output-dir", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "saturation_report.json").read_text())
        assert report["f_saturation_re"] == pytest.approx(1.0, abs=1e-10)
        assert report["f_ex_re"] == pytest.approx(0.0, abs=1e-10)

    def test_missing_flag_is_usage_error(self, tmp_path, capsys):
        code = main(["saturation", "--jz", "-2", "--output-dir", str(tmp_path)])
        assert code == 2
        err = capsys.readouterr().err
        assert "usage" in err

    def test_domain_error_is_one(self, tmp_path):
        code = main(["saturation", "--n", "40", "--jz", "1.0",
                     "--output-dir", str(tmp_path)])
        assert code == 1

    def test_invalid_boundary_named(self, tmp_path, capsys):
        # argparse rejects bad choices as usage errors, naming the value
        code = main(["spectrum", "--n", "4", "--jz", "1.0",
                     "--boundary", "twisted", "--output-dir", str(tmp_path)])
        assert code == 2
        assert "twisted" in capsys.readouterr().err

    def test_invalid_boundary_in_config_named(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"n": 4, "jz": 1.0, "boundary": "twisted"}')
        code = main(["spectrum", "--config", str(cfg), "--output-dir", str(tmp_path)])
        assert code == 1
        assert "twisted" in capsys.readouterr().err


class TestConfigPrecedence:
    def test_empty_file_flags_win(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("")
        code = main(["spectrum", "--n", "3", "--jz", "0.4",
                     "--config", str(cfg), "--output-dir", str(tmp_path)])
        assert code == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["config"]["n"] == 3

    def test_flag_overrides_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 6, "jz": 0.4}))
        code = main(["spectrum", "--n", "4", "--config", str(cfg),
                     "--output-dir", str(tmp_path)])
        assert code == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["config"]["n"] == 4
        assert manifest["config"]["jz"] == 0.4

    def test_unknown_keys_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 4, "jz": 0.4, "mystery": 1}))
        code = main(["spectrum", "--config", str(cfg), "--output-dir", str(tmp_path)])
        assert code == 1
        assert "mystery" in capsys.readouterr().err

    def test_parse_error_reports_line(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{\n  "n": 4,\n  bad\n}')
        code = main(["spectrum", "--config", str(cfg), "--output-dir", str(tmp_path)])
        assert code == 1
        assert "line 3" in capsys.readouterr().err

    def test_manifest_round_trip(self, tmp_path):
        first = tmp_path / "a"
        code = main(["saturation", "--n", "6", "--jz", "0.8", "--h", "0.3",
                     "--output-dir", str(first)])
        assert code == 0
        second = tmp_path / "b"
        code = main(["saturation", "--config", str(first / "manifest.json"),
                     "--output-dir", str(second)])
        assert code == 0
        a = (first / "saturation_report.json").read_text()
        b = (second / "saturation_report.json").read_text()
        assert a == b


class TestSpectrumCommand:
    def test_csv_schema(self, tmp_path):
        assert main(["spectrum", "--n", "3", "--jz", "1.0", "--h", "0.2",
                     "--output-dir", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "spectrum.csv")
        assert header == ["index", "energy", "sector", "theta"]
        assert len(rows) == 8
        energies = [float(r[1]) for r in rows]
        assert energies == sorted(energies)
        assert min(int(r[3]) for r in rows) == 1  # theta is 1-based


class TestOtocCommand:
    def test_timeseries_and_report(self, tmp_path):
        assert main(["otoc", "--n", "6", "--jz", "-2", "--h", "0",
                     "--boundary", "periodic", "--tmax", "5", "--samples", "50",
                     "--output-dir", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "otoc_timeseries.csv")
        assert header == ["t", "re_F", "im_F"]
        assert len(rows) == 50
        assert all(abs(float(r[1]) - 1.0) < 1e-10 for r in rows)  # ferromagnet
        report = json.loads((tmp_path / "otoc_report.json").read_text())
        assert report["f_time_average_re"] == pytest.approx(1.0, abs=1e-10)


class TestPhaseDiagramCommand:
    def test_grid_rows(self, tmp_path):
        assert main(["phase-diagram", "--jz", "-2:5:0.5", "--h", "0:4:1",
                     "--n", "4", "--output-dir", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "phase_diagram.csv")
        assert header == ["jz", "h", "n", "boundary", "op", "window",
                          "f_sat_re", "f_gs_re", "f_ex_re", "status"]
        assert len(rows) == 15 * 5
        assert all(r[-1] == "ok" for r in rows)


class TestScalingCommand:
    def _write_phase_csv(self, path):
        # smooth crossings: linear interpolation then recovers jzc accurately
        lines = ["jz,h,n,boundary,op,window,f_sat_re,f_gs_re,f_ex_re,status"]
        for n in (8, 10, 12, 14, 20, 40):
            jzc = 0.7 * n ** (-0.98) + 1.02
            for jz in np.arange(0.5, 2.05, 0.02):
                val = 1.0 / (1.0 + np.exp(-(jz - jzc) / 0.05))
                lines.append(f"{jz:.17g},0,{n},periodic,sigma_z,none,{val:.17g},{val:.17g},0,ok")
        path.write_text("\n".join(lines) + "\n")

    def test_fit_from_csv(self, tmp_path):
        csv_path = tmp_path / "phase.csv"
        self._write_phase_csv(csv_path)
        assert main(["scaling", "--input", str(csv_path), "--h", "0",
                     "--output-dir", str(tmp_path)]) == 0
        fit = json.loads((tmp_path / "scaling.json").read_text())
        assert set(fit) == {"points", "a", "xi", "jz_inf", "residual"}
        assert len(fit["points"]) == 6
        assert fit["xi"] == pytest.approx(-0.98, abs=0.01)
        assert fit["jz_inf"] == pytest.approx(1.02, abs=0.001)

    def test_missing_columns_named(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("jz,h,n\n1,0,8\n")
        assert main(["scaling", "--input", str(bad),
                     "--output-dir", str(tmp_path)]) == 1
        assert "f_gs_re" in capsys.readouterr().err


class TestDiagnosticsCommand:
    def test_csv_schema(self, tmp_path):
        assert main(["diagnostics", "--n", "6", "--jz", "-2:2:2", "--h", "0",
                     "--output-dir", str(tmp_path)]) == 0
        header, rows = read_csv(tmp_path / "diagnostics.csv")
        assert header == ["jz", "h", "n", "intra_ground_max", "cross_set_max",
                          "pr_ground", "fluct", "tau"]
        assert len(rows) == 3
        ferro = rows[0]
        assert float(ferro[3]) == pytest.approx(1.0, abs=1e-10)
        assert float(ferro[6]) == pytest.approx(0.0, abs=1e-10)
        assert ferro[7] == "inf"
