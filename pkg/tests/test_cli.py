from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from krwlab.boolcore import AND, XOR
from krwlab.cli import (
    ConfigError, ExperimentConfig, ResultCache, cached_measure, cc_rows, cli, dumps, load_config,
)
from krwlab.detcc import SearchBudget
from krwlab.ndcc import cycle_graph
from krwlab.relations import kw

CLEAN_ENV = {"KRWLAB_CACHE": None, "KRWLAB_MAX_MEMO": None, "KRWLAB_MAX_SIDE": None, "KRWLAB_SEED": None}


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args, env=None):
    return runner.invoke(cli, args, env={**CLEAN_ENV, **(env or {})}, catch_exceptions=False)


def test_cc_table_small(runner):
    r1 = invoke(runner, ["cc-table", "--n", "1"])
    assert r1.exit_code == 0
    rows = json.loads(r1.output)["rows"]
    assert len(rows) == 4 and all(r["agree"] for r in rows)
    r2 = invoke(runner, ["--format", "table", "cc-table", "--n", "2"])
    assert r2.exit_code == 0 and len(r2.output.strip().splitlines()) == 17


def test_cc_table_rejects_large_n(runner):
    assert invoke(runner, ["cc-table", "--n", "5"]).exit_code == 2


@pytest.mark.parametrize("hex_text, L, D", [("8", 2, 1), ("6", 4, 2), ("e8", 5, 3)])
def test_kw_command(runner, hex_text, L, D):
    r = invoke(runner, ["kw", "--f", hex_text])
    doc = json.loads(r.output)
    assert r.exit_code == 0 and (doc["L"], doc["D"]) == (L, D)


@pytest.mark.parametrize("bad", ["zz", "123", ""])
def test_kw_malformed_hex(runner, bad):
    assert invoke(runner, ["kw", "--f", bad]).exit_code == 2


def test_constant_function_depth(runner):
    doc = json.loads(invoke(runner, ["kw", "--f", "0"]).output)
    assert doc["D"] == "-inf" and doc["L"] == 0


def test_cache_roundtrip_and_version_miss(tmp_path):
    path = tmp_path / "c.jsonl"
    desc = kw(XOR(2)).descriptor()
    c = ResultCache(str(path))
    c.put(desc, "cc", 2)
    assert ResultCache(str(path)).get(desc, "cc") == 2
    assert ResultCache(str(path), version="other").get(desc, "cc") is None
    assert ResultCache(str(path)).get(desc, "size") is None


def test_cache_drops_corrupt_lines(tmp_path):
    path = tmp_path / "c.jsonl"
    c = ResultCache(str(path))
    c.put(kw(AND(2)).descriptor(), "cc", 1)
    good = path.read_text()
    tampered = json.loads(good)
    tampered["hash"] = "0" * len(tampered["hash"])
    path.write_text(good + "{not json\n" + json.dumps(tampered) + "\n")
    c2 = ResultCache(str(path))
    assert c2.corrupt == [2, 3]
    assert path.read_text() == good
    assert c2.verify(seed=0).passed


def test_cache_is_transparent(tmp_path):
    budget = SearchBudget()
    cache = ResultCache(str(tmp_path / "c.jsonl"))
    cold = cc_rows(2, 0, None, budget)
    warm1 = cc_rows(2, 0, cache, budget)
    warm2 = cc_rows(2, 0, ResultCache(str(tmp_path / "c.jsonl")), budget)
    assert cold == warm1 == warm2


def test_cached_measure_uses_cache(tmp_path):
    cache = ResultCache(str(tmp_path / "c.jsonl"))
    desc = kw(XOR(2)).descriptor()
    cache.put(desc, "size", 99)
    assert cached_measure(cache, desc, "size", SearchBudget()) == 99
    assert not cache.verify(seed=0, fraction=1.0).passed


def test_cache_verify_command(runner, tmp_path):
    path = str(tmp_path / "c.jsonl")
    invoke(runner, ["cc-table", "--n", "2"], env={"KRWLAB_CACHE": path})
    r = invoke(runner, ["cache-verify"], env={"KRWLAB_CACHE": path})
    assert r.exit_code == 0 and json.loads(r.output)["details"]["mismatches"] == []
    assert invoke(runner, ["cache-verify"]).exit_code == 2


def test_config_file_and_env(tmp_path):
    ini = tmp_path / "k.ini"
    ini.write_text("[krwlab]\nsuites = parity-bound, kw-connection\nseed = 4\nformat = table\n"
                   "[options]\nrandom_graphs = 7\n")
    cfg = load_config(str(ini), env={})
    assert cfg.suites == ("parity-bound", "kw-connection") and cfg.seed == 4 and cfg.fmt == "table"
    assert cfg.suite_options().random_graphs == 7
    assert load_config(str(ini), env={"KRWLAB_SEED": "9"}).seed == 9
    assert load_config(None, env={}) == ExperimentConfig()


@pytest.mark.parametrize("text, env", [
    ("[krwlab]\nseed = x\n", {}),
    ("[krwlab]\nsuites = nope\n", {}),
    ("[krwlab]\nmystery = 1\n", {}),
    ("[options]\nrandom_graphs = 0\n", {}),
    ("[krwlab]\nformat = xml\n", {}),
    ("", {"KRWLAB_MAX_MEMO": "-1"}),
])
def test_config_errors(tmp_path, text, env):
    ini = tmp_path / "k.ini"
    ini.write_text(text)
    with pytest.raises(ConfigError):
        load_config(str(ini), env=env)


def test_bad_config_exit_code(runner, tmp_path):
    ini = tmp_path / "k.ini"
    ini.write_text("[krwlab]\nseed = x\n")
    assert invoke(runner, ["--config", str(ini), "list"]).exit_code == 2
    assert invoke(runner, ["list"], env={"KRWLAB_SEED": "abc"}).exit_code == 2
    assert invoke(runner, ["--config", str(tmp_path / "missing.ini"), "list"]).exit_code == 2


def test_unknown_suite(runner):
    assert invoke(runner, ["suite", "nope"]).exit_code == 2


def test_suite_report_is_deterministic(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    r1 = invoke(runner, ["suite", "parity-bound", "--out", str(a)])
    r2 = invoke(runner, ["suite", "parity-bound", "--out", str(b)])
    assert r1.exit_code == r2.exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert [c["name"] for c in doc["checks"]] == ["parity-bound"]


def test_list(runner):
    out = invoke(runner, ["list"]).output
    assert "all:" in out and "barrier" in out


def test_winning_set_command(runner, tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"alphabet": "ab", "words": ["aa", "ab", "ba"]}))
    doc = json.loads(invoke(runner, ["winning-set", "--input", str(p)]).output)
    assert doc["winning_set"] == [[1, 1], [1, 2], [2, 1]] and doc["status"] == "pass"
    p.write_text("{")
    assert invoke(runner, ["winning-set", "--input", str(p)]).exit_code == 2


def test_graph_eq_command(runner, tmp_path):
    p = tmp_path / "g.txt"
    p.write_text(cycle_graph(5).to_graph6())
    r = invoke(runner, ["graph-eq", "--graph", str(p)])
    doc = json.loads(r.output)
    assert r.exit_code == 0 and doc["n"] == 5 and doc["checks"][0]["details"]["chi"] == 3


def test_barrier_command(runner):
    r = invoke(runner, ["barrier", "--m", "4", "--wx", "0", "--wy", "4"])
    assert r.exit_code == 0
    doc = json.loads(r.output)
    assert doc["checks"][0]["details"]["edges"] == 0
    assert invoke(runner, ["barrier", "--m", "4", "--wx", "2", "--wy", "2"]).exit_code == 2
    assert invoke(runner, ["barrier", "--m", "4", "--wx", "0", "--wy", "4", "--code", "bch"]).exit_code == 2


def test_dumps_encodes_infinity():
    assert json.loads(dumps({"D": float("-inf"), 1: (2, 3)})) == {"D": "-inf", "1": [2, 3]}
