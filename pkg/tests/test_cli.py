import json

import pytest

from uelpick.cli import ConfigError, KEYS, load_config, main, parse_config_text, parse_ratio
from uelpick.fileio import IoError, read_picks

SMALL = "lines = 3\ncdps = 4\nseed_stride = 3\nseed = 4\n"


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "run.cfg"
    cfg.write_text(SMALL)
    assert main(["synth", "--config", str(cfg), "--out", str(root / "d"), "--snr", "2"]) == 0
    assert main(["pick", "--config", str(cfg), "--out", str(root / "d")]) == 0
    return root, cfg


def test_ratio_parsing():
    assert parse_ratio("2/3") == pytest.approx(2 / 3)
    assert parse_ratio("inf") == float("inf")
    with pytest.raises(ZeroDivisionError):
        parse_ratio("1/0")
    with pytest.raises(ConfigError, match="snr"):
        load_config(None, {"snr": "1/0"})


def test_bad_value_names_key():
    with pytest.raises(ConfigError) as exc:
        load_config(None, {"snr": "0"}).snr
    assert "snr" in str(exc.value)


def test_unknown_key():
    with pytest.raises(ConfigError, match="colour"):
        load_config(None, {"colour": "red"})


def test_config_text_comments_and_syntax():
    assert parse_config_text("# c\n tau = 0.3 # t\n\n") == {"tau": "0.3"}
    with pytest.raises(ConfigError):
        parse_config_text("tau 0.3\n")


def test_every_default_parses():
    cfg = load_config(None)
    for key in KEYS:
        getattr(cfg, key)


def test_missing_dataset(tmp_path):
    with pytest.raises(IoError):
        from uelpick.cli import load_gathers
        load_gathers(tmp_path)
    assert main(["pick", "--out", str(tmp_path)]) == 1


def test_exit_code_for_config_error(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path), "--snr", "-1"]) == 2
    assert "snr" in capsys.readouterr().err


def test_eval_excludes_seeds(dataset, capsys):
    root, cfg = dataset
    assert main(["eval", "--config", str(cfg), "--out", str(root / "d")]) == 0
    doc = json.loads((root / "d" / "report_uel.json").read_text())
    _, seeds = read_picks(root / "d" / "picks_uel.txt")
    assert len(seeds) == len(doc["seed_locations"]) >= 1
    assert doc["metrics"]["n_locations"] == 12 - len(seeds)
    assert "VMAE" in capsys.readouterr().out


def test_qc_writes_images(dataset):
    root, cfg = dataset
    assert main(["qc", "--config", str(cfg), "--out", str(root / "d")]) == 0
    names = sorted(p.name for p in (root / "d" / "qc").iterdir())
    assert "section_auto_line0000.pgm" in names and "nmo_ref_L0000_C0000.pgm" in names


def test_workers_give_identical_picks(dataset):
    root, cfg = dataset
    out = root / "w4"
    assert main(["pick", "--config", str(cfg), "--out", str(out), "--data", str(root / "d"), "--workers", "4"]) == 0
    assert (out / "picks_uel.txt").read_bytes() == (root / "d" / "picks_uel.txt").read_bytes()
