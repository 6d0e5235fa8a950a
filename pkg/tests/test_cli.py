import json

import numpy as np

from risdc.cli import main
from risdc.experiments import config_to_dict
from risdc.matio import save_matrix

from test_experiments import tiny_multi_cfg, tiny_single_cfg


def _write_cfg(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config_to_dict(cfg)))
    return str(path)


def test_single_user_command_writes_csv_summary_and_figure(tmp_path):
    cfg = _write_cfg(tmp_path, tiny_single_cfg())
    out = tmp_path / "sweep.csv"
    code = main(["single-user", "--config", cfg, "--out", str(out), "--no-timing"])
    assert code == 0
    assert out.exists()
    assert (tmp_path / "sweep.csv.summary.csv").exists()
    assert (tmp_path / "sweep.png").exists()


def test_no_fig_skips_figure(tmp_path):
    cfg = _write_cfg(tmp_path, tiny_single_cfg())
    out = tmp_path / "sweep.csv"
    assert main(["single-user", "--config", cfg, "--out", str(out), "--no-timing", "--no-fig"]) == 0
    assert not (tmp_path / "sweep.png").exists()


def test_multi_user_command(tmp_path):
    cfg = _write_cfg(tmp_path, tiny_multi_cfg(trials=2))
    out = tmp_path / "mu.csv"
    assert main(["multi-user", "--config", cfg, "--out", str(out), "--no-timing", "--no-fig"]) == 0
    text = out.read_text()
    assert text.startswith("method,n_ris,trial,")
    assert ";" in text  # per-UE rates


def test_seed_and_trials_overrides_change_output(tmp_path):
    cfg = _write_cfg(tmp_path, tiny_single_cfg())
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["single-user", "--config", cfg, "--out", str(out1), "--no-timing", "--no-fig",
          "--trials", "2", "--seed", "1"])
    main(["single-user", "--config", cfg, "--out", str(out2), "--no-timing", "--no-fig",
          "--trials", "2", "--seed", "2"])
    assert len(out1.read_text().splitlines()) == 1 + 2 * 2 * 2
    assert out1.read_bytes() != out2.read_bytes()


def test_threads_flag_does_not_change_bytes(tmp_path):
    cfg = _write_cfg(tmp_path, tiny_single_cfg())
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["single-user", "--config", cfg, "--out", str(out1), "--no-timing", "--no-fig",
          "--threads", "1"])
    main(["single-user", "--config", cfg, "--out", str(out2), "--no-timing", "--no-fig",
          "--threads", "4"])
    assert out1.read_bytes() == out2.read_bytes()


def test_scenario_mismatch_exit_code(tmp_path):
    cfg = _write_cfg(tmp_path, tiny_single_cfg())
    assert main(["multi-user", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_bad_config_exit_code(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{oops")
    assert main(["single-user", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == 2


def test_solve_success_and_error_codes(tmp_path):
    g_path, h_path = tmp_path / "g.json", tmp_path / "h.json"
    save_matrix(np.eye(2, dtype=complex), g_path)
    save_matrix(np.array([[1.0], [0.0]], dtype=complex), h_path)
    out = tmp_path / "out.json"
    assert main(["solve", "--g", str(g_path), "--h", str(h_path), "--out", str(out)]) == 0
    assert out.exists()

    # malformed input -> config error
    bad = tmp_path / "bad.json"
    bad.write_text("nope")
    assert main(["solve", "--g", str(bad), "--h", str(h_path), "--out", str(out)]) == 2

    # missing file -> i/o error
    assert main(["solve", "--g", str(tmp_path / "absent.json"), "--h", str(h_path),
                 "--out", str(out)]) == 3

    # unknown method -> config error
    assert main(["solve", "--g", str(g_path), "--h", str(h_path), "--method", "magic",
                 "--out", str(out)]) == 2
