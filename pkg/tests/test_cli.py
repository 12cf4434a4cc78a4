import io

import pytest
import yaml

from rdsparse.cli import build_parser, main, resolve_run_config


def run(argv):
    out = io.StringIO()
    assert main(argv, out) == 0
    return out.getvalue()


def test_presets_listing():
    text = run(["presets"])
    assert "signal5: sizes 10x3x3, 4 mode(s)" in text


def test_crlb_command():
    text = run(["crlb", "--signal", "signal1", "--snr", "0:10:10"])
    lines = text.splitlines()
    assert lines[0].startswith("snr_db,")
    assert len(lines) == 3


def test_precedence(tmp_path):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text(yaml.safe_dump({"signal": "signal2", "trials": 7, "seed": 5, "snr_db": [1, 2]}))
    args = build_parser().parse_args(["run", "--config", str(cfg), "--trials", "3"])
    resolved = resolve_run_config(args)
    assert resolved.trials == 3  # flag beats file
    assert resolved.signal == "signal2" and resolved.master_seed == 5  # file beats defaults
    assert resolved.snr_db == (1, 2)
    default = resolve_run_config(build_parser().parse_args(["run"]))
    assert default.trials == 200


def test_run_writes_files(tmp_path):
    prefix = tmp_path / "r"
    text = run(["run", "--signal", "signal1", "--snr", "10", "--trials", "2", "--seed", "1", "--out", str(prefix)])
    assert text == (tmp_path / "r_results.csv").read_text()
    assert (tmp_path / "r_meta.txt").exists()


def test_scaling_command(tmp_path):
    text = run(["scaling", "--m1", "8,16", "--trials", "1", "--out", str(tmp_path / "s")])
    assert "M1,mean_ms,std_ms" in text


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["run", "--estimator", "music"], io.StringIO())
    with pytest.raises(SystemExit):
        main([], io.StringIO())
