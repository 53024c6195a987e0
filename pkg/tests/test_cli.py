"""CLI subcommand tests (in-process, exit-code contracts)."""

import json

import numpy as np
import pytest

from pleaders.cli import main
from pleaders.io import read_signal, write_signal


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["unknown-command"])
    assert exc.value.code == 2


def test_synth_writes_signal_and_oracle_sidecar(tmp_path):
    out = tmp_path / "mrw.bin"
    rc = main(["synth", "mrw", "--param", "n=4096", "--param", "nu=0.4",
               "--seed", "11", "--out", str(out)])
    assert rc == 0
    data = read_signal(out)
    assert data.size == 4096
    sidecar = json.loads(out.with_suffix(".json").read_text())
    assert sidecar["oracle"]["c1"] == pytest.approx(0.36)
    assert sidecar["oracle"]["p0"] == pytest.approx(25.0, rel=1e-6)


def test_synth_is_seed_deterministic(tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    for out in (a, b):
        main(["synth", "lws", "--param", "n=4096", "--seed", "5",
              "--out", str(out)])
    assert np.array_equal(read_signal(a), read_signal(b))


def test_analyze_writes_report_and_figures(tmp_path):
    sig = tmp_path / "mrw.bin"
    main(["synth", "mrw", "--param", "n=4096", "--seed", "2",
          "--out", str(sig)])
    out = tmp_path / "report"
    rc = main(["analyze", str(sig), "--p", "2", "inf", "--j1", "3",
               "--out", str(out)])
    assert rc == 0
    assert (out / "cumulants.csv").exists()
    assert (out / "summary.json").exists()
    pngs = list(out.glob("*.png"))
    assert pngs, "report path must render figures"


def test_analyze_degenerate_input_exit_code(tmp_path):
    path = write_signal(np.ones(4096), tmp_path / "const.csv")
    rc = main(["analyze", str(path), "--p", "2", "--no-figures",
               "--out", str(tmp_path / "rep")])
    assert rc == 3


def test_mc_and_compare(tmp_path):
    config = {
        "process": "mrw",
        "params": {"n": 4096},
        "n_realizations": 2,
        "seed": 9,
        "p_values": [2.0, "inf"],
        "estimators": ["pleader", "mfdfa"],
        "j1": 3,
    }
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / "mc-out"
    rc = main(["mc", str(cfg), "--out", str(out)])
    assert rc == 0
    assert (out / "aggregate.csv").exists()
    rc = main(["compare", str(cfg), "--a", "pleader_p2", "--b", "mfdfa",
               "--out", str(out)])
    assert rc == 0
    table = (out / "compare.csv").read_text().splitlines()
    assert table[0].startswith("target,")
    assert len(table) == 5  # header + c1..c4


def test_mc_figures(tmp_path):
    config = {
        "process": "mrw",
        "params": {"n": 4096},
        "n_realizations": 2,
        "seed": 9,
        "p_values": [2.0],
        "estimators": ["pleader"],
        "j1": 3,
    }
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / "mc-fig"
    rc = main(["mc", str(cfg), "--out", str(out), "--figures"])
    assert rc == 0
    assert (out / "rmse_c1.png").exists()


def test_numerical_error_exit_code(tmp_path, rng):
    # a usable file but an octave range the data cannot support -> exit 4
    path = write_signal(rng.standard_normal(4096), tmp_path / "sig.csv")
    rc = main(["analyze", str(path), "--p", "2", "--j1", "9", "--j2", "11",
               "--no-figures", "--out", str(tmp_path / "rep")])
    assert rc == 4
