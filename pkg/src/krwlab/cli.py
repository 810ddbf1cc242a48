"""Command-line harness: acceptance suites, complexity tables, and a persistent solver cache.

Exit codes: 0 all checks pass (vacuous/infeasible count as honest outcomes),
1 an assertion failed, 2 configuration error, 3 a check was skipped on budget.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
import logging
import math
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import click

from .boolcore import TruthTable, all_functions, find_linear_code, repetition_code
from .detcc import SOLVER_VERSION, BudgetExceeded, RectangleGame, SearchBudget, formula_oracle
from .ndcc import parse_graph, verify_graph_eq_ncc, verify_graph_ineq_bounds
from .prefixthick import StringSet, verify_winning_size, winning_set
from .relations import descriptor_hash, kw, relation_from_descriptor
from .reports import FAIL, PASS, SKIPPED, CheckReport
from .structlab import BARRIER_PARAMS, barrier_construct
from .suites import SUITES, SuiteOptions, run_timed

log = logging.getLogger("krwlab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SKIPPED = 0, 1, 2, 3
SECTION = "krwlab"
ENV_OVERRIDES = {
    "KRWLAB_CACHE": "cache",
    "KRWLAB_MAX_MEMO": "max_memo",
    "KRWLAB_MAX_SIDE": "max_side",
    "KRWLAB_SEED": "seed",
}
CC3_SAMPLE = 24


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    suites: tuple[str, ...] = ("all",)
    seed: int = 0
    max_memo: int = 3_000_000
    max_side: int = 16
    cache: Optional[str] = None
    output: Optional[str] = None
    fmt: str = "json"
    options: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.max_memo <= 0 or self.max_side <= 0:
            raise ConfigError("budgets must be positive")
        if self.fmt not in ("json", "table"):
            raise ConfigError(f"unknown output format {self.fmt!r}")
        for s in self.suites:
            if s not in SUITES:
                raise ConfigError(f"unknown suite {s!r}; choose from {sorted(SUITES)}")
        known = {f.name for f in dataclasses.fields(SuiteOptions)} - {"seed", "max_memo"}
        for k, v in self.options.items():
            if k not in known:
                raise ConfigError(f"unknown option {k!r}")
            if v <= 0:
                raise ConfigError(f"option {k} must be positive")

    @property
    def budget(self) -> SearchBudget:
        return SearchBudget(max_side=self.max_side, max_memo=self.max_memo)

    def suite_options(self) -> SuiteOptions:
        return SuiteOptions(seed=self.seed, max_memo=self.max_memo, **self.options)


def _int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None


def load_config(path: Optional[str], env: Optional[dict[str, str]] = None) -> ExperimentConfig:
    """INI file (section ``[krwlab]``) then environment overrides."""
    env = os.environ if env is None else env
    values: dict[str, str] = {}
    if path:
        cp = configparser.ConfigParser()
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if cp.has_section(SECTION):
            values.update(cp[SECTION])
        if cp.has_section("options"):
            values.update({f"option.{k}": v for k, v in cp["options"].items()})
    for var, key in ENV_OVERRIDES.items():
        if var in env:
            values[key] = env[var]
    cfg: dict[str, Any] = {}
    for key, raw in values.items():
        if key == "suites":
            cfg["suites"] = tuple(s.strip() for s in raw.split(",") if s.strip())
        elif key in ("seed", "max_memo", "max_side"):
            cfg[key] = _int(raw, key)
        elif key in ("cache", "output"):
            cfg[key] = raw or None
        elif key == "format":
            cfg["fmt"] = raw
        elif key.startswith("option."):
            cfg.setdefault("options", {})[key[7:]] = _int(raw, key)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return ExperimentConfig(**cfg)


# Cache ---------------------------------------------------------------------

def _encode(v: Any) -> Any:
    if isinstance(v, float) and math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return v


def _decode(v: Any) -> Any:
    return float(v) if v in ("-inf", "inf") else v


class ResultCache:
    """Append-only JSONL store keyed by (descriptor hash, measure); other solver versions miss."""

    def __init__(self, path: Optional[str], version: str = SOLVER_VERSION):
        self.path = Path(path) if path else None
        self.version = version
        self.records: dict[tuple[str, str], dict] = {}
        self.corrupt: list[int] = []
        if self.path and self.path.exists():
            self._load()

    def _load(self) -> None:
        good = []
        for lineno, line in enumerate(self.path.read_text().splitlines(), 1):
            try:
                rec = json.loads(line)
                key = (rec["hash"], rec["measure"])
                if not {"descriptor", "value", "version"} <= rec.keys():
                    raise KeyError("missing fields")
                if descriptor_hash(rec["descriptor"]) != rec["hash"]:
                    raise ValueError("hash mismatch")
            except (ValueError, KeyError, TypeError):
                self.corrupt.append(lineno)
                continue
            self.records[key] = rec
            good.append(line)
        if self.corrupt:
            log.warning("dropped %d corrupt cache records", len(self.corrupt))
            self.path.write_text("".join(g + "\n" for g in good))

    def get(self, descriptor: dict, measure: str) -> Optional[Any]:
        rec = self.records.get((descriptor_hash(descriptor), measure))
        if rec is None or rec["version"] != self.version:
            return None
        return _decode(rec["value"])

    def put(self, descriptor: dict, measure: str, value: Any) -> None:
        rec = {"hash": descriptor_hash(descriptor), "measure": measure, "descriptor": descriptor,
               "value": _encode(value), "version": self.version}
        self.records[(rec["hash"], measure)] = rec
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def verify(self, seed: int, fraction: float = 0.01, budget: SearchBudget = SearchBudget()) -> CheckReport:
        current = sorted(k for k, r in self.records.items() if r["version"] == self.version)
        k = min(len(current), max(1, math.ceil(fraction * len(current)))) if current else 0
        sample = random.Random(seed).sample(current, k)
        mismatches = []
        for key in sample:
            rec = self.records[key]
            got = compute_measure(rec["descriptor"], rec["measure"], budget)
            if _encode(got) != rec["value"]:
                mismatches.append({"hash": key[0], "measure": key[1], "cached": rec["value"], "fresh": _encode(got)})
        details = {"records": len(current), "sampled": k, "mismatches": mismatches, "corrupt_lines": self.corrupt}
        return CheckReport("cache-verify", FAIL if mismatches else PASS, details)


def compute_measure(descriptor: dict, measure: str, budget: SearchBudget) -> Any:
    rel = relation_from_descriptor(descriptor)
    game = RectangleGame(rel, budget)
    if measure == "cc":
        return game.cc()
    if measure == "size":
        return game.size()
    raise ValueError(f"unknown measure {measure!r}")


def cached_measure(cache: Optional[ResultCache], descriptor: dict, measure: str, budget: SearchBudget) -> Any:
    if cache is not None:
        hit = cache.get(descriptor, measure)
        if hit is not None:
            return hit
    value = compute_measure(descriptor, measure, budget)
    if cache is not None:
        cache.put(descriptor, measure, value)
    return value


# Tables --------------------------------------------------------------------

NEG_INF = float("-inf")


def cc_rows(n: int, seed: int, cache: Optional[ResultCache], budget: SearchBudget) -> list[dict]:
    if not 1 <= n <= 3:
        raise ConfigError("cc-table needs 1 <= n <= 3")
    fs = list(all_functions(n))
    if n == 3:
        fs = sorted(random.Random(seed).sample(fs, CC3_SAMPLE), key=lambda t: t.bits)
    rows = []
    for f in fs:
        if f.is_constant:
            L, D = 0, NEG_INF
        else:
            desc = kw(f).descriptor()
            L = cached_measure(cache, desc, "size", budget)
            D = cached_measure(cache, desc, "cc", budget)
        o = formula_oracle(f)
        rows.append({"f": f.to_hex(), "L_game": L, "D_game": D, "L_oracle": o.L, "D_oracle": o.D,
                     "agree": (L, D) == (o.L, o.D)})
    return rows


def _plain(obj: Any) -> Any:
    if isinstance(obj, float) and math.isinf(obj):
        return _encode(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2)


def summary_table(reports: list[CheckReport]) -> str:
    width = max((len(r.name) for r in reports), default=4)
    lines = [f"{'check':<{width}}  status"]
    lines += [f"{r.name:<{width}}  {r.status}" for r in reports]
    return "\n".join(lines)


def exit_code(reports: list[CheckReport]) -> int:
    if any(r.status == FAIL for r in reports):
        return EXIT_FAIL
    if any(r.status == SKIPPED for r in reports):
        return EXIT_SKIPPED
    return EXIT_OK


def run_suite(cfg: ExperimentConfig, names: tuple[str, ...]) -> tuple[dict, int]:
    """Run every criterion of the named suites; the report is sorted by check id."""
    wanted = sorted({c for s in names for c in SUITES[s]})
    reports = []
    for name in wanted:
        rep, secs = run_timed(name, cfg.suite_options())
        log.info("%s %s (%.1fs)", name, rep.status, secs)
        reports.append(rep)
    reports.sort(key=lambda r: r.name)
    doc = {"seed": cfg.seed, "suites": sorted(names), "checks": [r.to_dict() for r in reports]}
    return doc, exit_code(reports)


# CLI -----------------------------------------------------------------------

class _State:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.cache = ResultCache(cfg.cache) if cfg.cache else None


def _emit(state: _State, doc: Any, table: Optional[str] = None, out: Optional[str] = None) -> None:
    text = table if (state.cfg.fmt == "table" and table is not None) else dumps(doc)
    target = out or state.cfg.output
    if target:
        Path(target).write_text(dumps(doc) + "\n")
        click.echo(table if table is not None else f"wrote {target}")
    else:
        click.echo(text)


def _fail_config(msg: str) -> None:
    click.echo(f"config error: {msg}", err=True)
    sys.exit(EXIT_CONFIG)


def _parse_tt(hex_text: str, n: Optional[int]) -> TruthTable:
    try:
        if n is None:
            digits = len(hex_text.strip())
            n = {1: 2, 2: 3, 4: 4}.get(digits)
            if n is None:
                raise ValueError("give --n for this truth-table length")
        return TruthTable.from_hex(n, hex_text)
    except ValueError as exc:
        raise ConfigError(f"malformed truth table {hex_text!r}: {exc}") from None


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="INI file with a [krwlab] section.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default=None)
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], fmt: Optional[str], verbose: bool) -> None:
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(config_path)
        if fmt:
            cfg = dataclasses.replace(cfg, fmt=fmt)
    except ConfigError as exc:
        _fail_config(str(exc))
    ctx.obj = _State(cfg)


@cli.command()
@click.argument("name", required=False)
@click.option("--out", type=click.Path(), default=None)
@click.pass_obj
def suite(state: _State, name: Optional[str], out: Optional[str]) -> None:
    """Run an acceptance suite (default: the suites named in the config)."""
    names = (name,) if name else state.cfg.suites
    for s in names:
        if s not in SUITES:
            _fail_config(f"unknown suite {s!r}; choose from {sorted(SUITES)}")
    doc, code = run_suite(state.cfg, names)
    reports = [CheckReport(c["name"], c["status"], c["details"]) for c in doc["checks"]]
    _emit(state, doc, summary_table(reports), out)
    sys.exit(code)


@cli.command()
@click.option("--out", type=click.Path(), required=True)
@click.pass_obj
def report(state: _State, out: str) -> None:
    """Run the configured suites and write the JSON report to a file."""
    doc, code = run_suite(state.cfg, state.cfg.suites)
    Path(out).write_text(dumps(doc) + "\n")
    click.echo(summary_table([CheckReport(c["name"], c["status"], c["details"]) for c in doc["checks"]]))
    sys.exit(code)


@cli.command("cc-table")
@click.option("--n", "n", type=int, required=True)
@click.pass_obj
def cc_table(state: _State, n: int) -> None:
    """Formula size and depth of every n-bit function by game and by enumeration."""
    try:
        rows = cc_rows(n, state.cfg.seed, state.cache, state.cfg.budget)
    except ConfigError as exc:
        _fail_config(str(exc))
    except BudgetExceeded as exc:
        click.echo(f"skipped: {exc}", err=True)
        sys.exit(EXIT_SKIPPED)
    lines = ["f      L_game D_game L_oracle D_oracle agree"]
    lines += [f"{r['f']:<6} {r['L_game']:>6} {str(r['D_game']):>6} {r['L_oracle']:>8} {str(r['D_oracle']):>8} {r['agree']}"
              for r in rows]
    _emit(state, {"n": n, "rows": rows}, "\n".join(lines))
    sys.exit(EXIT_OK if all(r["agree"] for r in rows) else EXIT_FAIL)


@cli.command("kw")
@click.option("--f", "f_hex", required=True, help="Truth table in hex, most significant input first.")
@click.option("--n", "n", type=int, default=None)
@click.pass_obj
def kw_cmd(state: _State, f_hex: str, n: Optional[int]) -> None:
    """Exact L and D of one function's KW relation."""
    try:
        f = _parse_tt(f_hex, n)
    except ConfigError as exc:
        _fail_config(str(exc))
    if f.is_constant:
        doc = {"f": f.to_hex(), "n": f.arity, "L": 0, "D": NEG_INF}
    else:
        try:
            desc = kw(f).descriptor()
            doc = {"f": f.to_hex(), "n": f.arity,
                   "L": cached_measure(state.cache, desc, "size", state.cfg.budget),
                   "D": cached_measure(state.cache, desc, "cc", state.cfg.budget)}
        except BudgetExceeded as exc:
            click.echo(f"skipped: {exc}", err=True)
            sys.exit(EXIT_SKIPPED)
    _emit(state, doc, f"L={doc['L']} D={doc['D']}")


def _read_string_set(path: str) -> StringSet:
    try:
        obj = json.loads(Path(path).read_text())
        if "labels" in obj:
            return StringSet.from_dict(obj)
        return StringSet.from_words(obj["words"], obj["alphabet"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read string set from {path}: {exc}") from None


@cli.command("winning-set")
@click.option("--input", "path", type=click.Path(), required=True,
              help='JSON: {"alphabet": "ab", "words": [...]} or {"labels": [...], "strings": [...]}.')
@click.pass_obj
def winning_set_cmd(state: _State, path: str) -> None:
    """Winning set of a string set and the size identity check."""
    try:
        X = _read_string_set(path)
    except ConfigError as exc:
        _fail_config(str(exc))
    W = winning_set(X)
    try:
        rep = verify_winning_size(X)
        status, agrees = PASS, rep.oracle_agrees
    except AssertionError:
        status, agrees = FAIL, None
    doc = {"size_x": len(X), "size_w": len(W), "winning_set": [list(w) for w in W],
           "oracle_agrees": agrees, "status": status}
    _emit(state, doc, f"|X|={len(X)} |W|={len(W)} {status}")
    sys.exit(EXIT_OK if status == PASS else EXIT_FAIL)


@cli.command("graph-eq")
@click.option("--graph", "path", type=click.Path(), required=True, help="graph6 or 'v: u1 u2' adjacency text.")
@click.pass_obj
def graph_eq_cmd(state: _State, path: str) -> None:
    """Cover number of GraphEq against the chromatic number, plus the GraphIneq bracket."""
    try:
        G = parse_graph(Path(path).read_text())
    except (OSError, ValueError, KeyError) as exc:
        _fail_config(f"cannot read graph from {path}: {exc}")
    try:
        reps = [verify_graph_eq_ncc(G), verify_graph_ineq_bounds(G)]
    except BudgetExceeded as exc:
        click.echo(f"skipped: {exc}", err=True)
        sys.exit(EXIT_SKIPPED)
    _emit(state, {"n": G.n, "edges": len(G.edges), "checks": [r.to_dict() for r in reps]}, summary_table(reps))
    sys.exit(exit_code(reps))


@cli.command()
@click.option("--m", "m", type=int, required=True)
@click.option("--code", "code_kind", default="repetition", help="'repetition' or 'gv:<d>' for a greedy code of distance d.")
@click.option("--wx", type=int, required=True)
@click.option("--wy", type=int, required=True)
@click.option("--f", "f_hex", default=None, help="Outer function in hex (default: weight threshold).")
@click.pass_obj
def barrier(state: _State, m: int, code_kind: str, wx: int, wy: int, f_hex: Optional[str]) -> None:
    """Announcement transcript with an edgeless strong characteristic graph."""
    try:
        if code_kind == "repetition":
            code = repetition_code(m)
        elif code_kind.startswith("gv:"):
            code = find_linear_code(m, int(code_kind[3:]))
        else:
            raise ConfigError(f"unknown code {code_kind!r}")
        f = _parse_tt(f_hex, m) if f_hex else None
        res = barrier_construct(f, code, wx, wy, params=BARRIER_PARAMS, budget=state.cfg.budget)
    except (ConfigError, ValueError) as exc:
        _fail_config(str(exc))
    except BudgetExceeded as exc:
        click.echo(f"skipped: {exc}", err=True)
        sys.exit(EXIT_SKIPPED)
    reps = [res.report, res.alive]
    _emit(state, {"checks": [r.to_dict() for r in reps]}, summary_table(reps))
    sys.exit(exit_code(reps))


@cli.command("cache-verify")
@click.pass_obj
def cache_verify(state: _State) -> None:
    """Recompute a seeded 1% sample of cached values."""
    if state.cache is None:
        _fail_config("no cache path configured")
    rep = state.cache.verify(state.cfg.seed, budget=state.cfg.budget)
    _emit(state, rep.to_dict(), summary_table([rep]))
    sys.exit(exit_code([rep]))


@cli.command("list")
def list_cmd() -> None:
    """Suites and the checks they run."""
    for name in sorted(SUITES):
        click.echo(f"{name}: {', '.join(SUITES[name])}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
