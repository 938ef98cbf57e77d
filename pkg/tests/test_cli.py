import csv
import json
import logging

import pytest

from cssqkd.cli import EQUIV_KEYS, SIMULATE_KEYS, main, parse_config
from cssqkd.css_code import CssCodePair, dump_pair, steane_pair
from cssqkd.errors import ConfigError


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_minimal_flags_fill_defaults():
    cfg = parse_config(SIMULATE_KEYS, {}, {"protocol": 3, "code": "steane", "n": 50, "seed": 1})
    assert cfg["trials"] == 100 and cfg["attack.kind"] == "none" and cfg["scramble"] is False
    assert cfg["n"] == 50


def test_flag_beats_file_with_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="cssqkd.cli"):
        cfg = parse_config(SIMULATE_KEYS, {"trials": 5, "seed": 2}, {"trials": 7, "seed": None})
    assert cfg["trials"] == 7 and cfg["seed"] == 2
    assert any("trials" in r.message for r in caplog.records)


def test_unknown_key_and_type_mismatch_name_the_key():
    with pytest.raises(ConfigError, match="attack.knd"):
        parse_config(SIMULATE_KEYS, {"attack.knd": "none"}, {})
    with pytest.raises(ConfigError, match="trials"):
        parse_config(SIMULATE_KEYS, {"trials": "many"}, {})
    with pytest.raises(ConfigError, match="scramble"):
        parse_config(EQUIV_KEYS, {"scramble": 1}, {})


def test_unknown_attack_kind_lists_kinds(capsys, tmp_path):
    code, _, err = run(["simulate", "--seed", "1", "--attack.kind", "laser", "--output.dir", str(tmp_path)], capsys)
    assert code == 1
    assert "intercept_resend" in err and "attack.kind" in err


def test_missing_seed_is_usage_error(capsys, tmp_path):
    code, _, err = run(["simulate", "--output.dir", str(tmp_path)], capsys)
    assert code == 1 and "seed" in err


def test_bad_flag_value_is_usage_error(capsys):
    code, _, _ = run(["simulate", "--trials", "lots"], capsys)
    assert code == 1


def test_simulate_outputs_and_summary_consistency(capsys, tmp_path):
    code, out, _ = run(
        ["simulate", "--protocol", "3", "--seed", "4", "--trials", "60", "--attack.kind", "iid_pauli",
         "--attack.px", "0.05", "--attack.pz", "0.05", "--output.dir", str(tmp_path)],
        capsys,
    )
    assert code == 0
    records = [json.loads(line) for line in (tmp_path / "trials.jsonl").read_text().splitlines()]
    assert len(records) == 60
    with open(tmp_path / "summary.csv") as fh:
        row = next(csv.DictReader(fh))
    # every summary field is recomputable from the per-trial records
    aborted = sum(r["aborted"] for r in records)
    assert float(row["abort_rate"]) == aborted / 60
    kept = [r for r in records if not r["aborted"]]
    assert float(row["key_agreement"]) == sum(r["key_agreement"] for r in kept) / len(kept)
    checked = [r for r in records if r["check_errors"] is not None]
    assert float(row["mean_check_error_rate"]) == sum(r["check_errors"] for r in checked) / (len(checked) * 7)
    sifted = sum(r["stats"]["sifted_count"] for r in records)
    assert float(row["sifted_error_rate"]) == sum(r["stats"]["sifted_errors"] for r in records) / sifted
    assert json.loads(out)["trials"] == 60


def test_config_file_and_env_output_dir(capsys, tmp_path, monkeypatch):
    conf = tmp_path / "run.toml"
    conf.write_text('seed = 3\ntrials = 20\nprotocol = 2\n[attack]\nkind = "iid_pauli"\npx = 0.02\n')
    monkeypatch.setenv("CSSQKD_OUTPUT_DIR", str(tmp_path / "env_out"))
    code, out, _ = run(["simulate", "--config", str(conf)], capsys)
    assert code == 0
    assert (tmp_path / "env_out" / "summary.csv").exists()
    summary = json.loads(out)
    assert summary["protocol"] == 2 and summary["attack"] == "iid_pauli"


def test_no_attack_protocol3_summary(capsys, tmp_path):
    code, out, _ = run(["simulate", "--seed", "1", "--output.dir", str(tmp_path)], capsys)
    s = json.loads(out)
    assert code == 0 and s["abort_rate"] == 0.0 and s["key_agreement"] == 1.0


def test_equivalence_writes_report(capsys, tmp_path):
    code, _, _ = run(
        ["equivalence", "--seed", "2", "--trials", "300", "--attack.kind", "iid_pauli",
         "--attack.px", "0.03", "--attack.pz", "0.03", "--output.dir", str(tmp_path)],
        capsys,
    )
    assert code == 0
    rep = json.loads((tmp_path / "equivalence.json").read_text())
    assert rep["protocols"] == [2, 3] and 0 <= rep["tvd"] <= 1
    assert sum(c["a"] for c in rep["counts"]) == 300


def test_equivalence_bad_protocols(capsys, tmp_path):
    code, _, _ = run(["equivalence", "--seed", "1", "--protocols", "2,5", "--output.dir", str(tmp_path)], capsys)
    assert code == 1


def test_codes_commands(capsys, tmp_path):
    code, out, _ = run(["codes", "list"], capsys)
    assert code == 0 and "steane" in out
    code, out, _ = run(["codes", "show", "steane"], capsys)
    assert code == 0 and out == dump_pair(steane_pair())
    good = tmp_path / "good.txt"
    good.write_text(dump_pair(steane_pair()))
    assert run(["codes", "validate", str(good)], capsys)[0] == 0
    # swap C1 and C2 so containment fails
    p = steane_pair()
    bad = tmp_path / "bad.txt"
    bad.write_text(dump_pair(CssCodePair(7, p.c2_gen, p.c1_gen, p.h1, p.h2, 1, 1, "swapped")))
    code, out, _ = run(["codes", "validate", str(bad)], capsys)
    assert code == 3 and "invalid" in out


def test_bounds_grid_is_columnar(capsys):
    code, out, _ = run(["bounds", "sampling", "--n", "500,1000", "--delta", "0.1", "--eps", "0.02,0.05"], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 4 and set(rows[0]) == {"n", "delta", "eps", "bound"}


def test_bounds_domain_error(capsys):
    code, _, err = run(["bounds", "sampling", "--eps", "0.3"], capsys)
    assert code == 1 and "eps" in err


def test_bounds_lochau_and_rate(capsys):
    code, out, _ = run(["bounds", "lochau", "--s", "4", "--m", "1000"], capsys)
    assert code == 0 and "True" in out
    code, out, _ = run(["bounds", "rate", "--delta", "0.05"], capsys)
    assert "0.427" in out


def test_verify_passes(capsys):
    code, out, _ = run(["verify", "--circuits", "50"], capsys)
    assert code == 0
    assert out.count("PASS") == 5


def test_runtime_error_exit_code(capsys, tmp_path):
    code, _, err = run(
        ["simulate", "--protocol", "1", "--seed", "1", "--attack.kind", "intercept_resend",
         "--trials", "2", "--output.dir", str(tmp_path)],
        capsys,
    )
    assert code == 2 and "UnsupportedAttack" in err
