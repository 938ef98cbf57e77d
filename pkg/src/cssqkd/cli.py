"""
Command-line front end.

Settings come from an optional TOML file (flat dotted keys such as
``attack.kind``) and from flags that mirror the keys one to one
(``--attack.kind``).  A flag overrides the file and logs a warning when
both set the same key.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error,
3 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .adversary import KINDS, AttackModel, coherent_pair_gate, eve_information_estimate
from .css_code import SHIPPED, dump_pair, get_pair, load_pair, shannon_threshold, validate_pair
from .errors import ConfigError, DomainError
from .f2_linalg import BitVector
from .protocols import ProtocolConfig, compare_transcripts, run_trials, z_average_check
from .rng import RNG_ALGORITHM, stream
from .security_bounds import empirical_sampling_experiment, key_rate, lo_chau_info_bound, sampling_tail_bound
from .statevector import bell_projector_identities, verify_hadamard_duality
from .verify import frame_oracle_agreement

log = logging.getLogger("cssqkd.cli")

OUTPUT_ENV = "CSSQKD_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class Key:
    name: str
    kind: type
    default: Any
    help: str


RUN_KEYS = [
    Key("seed", int, None, "master seed (required)"),
    Key("trials", int, 100, "number of trials"),
    Key("workers", int, 1, "worker processes"),
    Key("code", str, "steane", f"code pair: {', '.join(sorted(SHIPPED))}, random, or a file path"),
    Key("code.n", int, 20, "length of a random code"),
    Key("code.dim_c1", int, 12, "dim C1 of a random code"),
    Key("code.dim_c2", int, 6, "dim C2 of a random code"),
    Key("code.t", int, 1, "correction radius of a random code"),
    Key("code.seed", int, 0, "seed for the random code"),
    Key("n", int, None, "number of check positions (default: code length)"),
    Key("threshold", int, None, "largest tolerated number of check disagreements"),
    Key("threshold_rate", float, None, "threshold as a fraction of the check count"),
    Key("delta", float, None, "BB84 oversampling; raw qubits = (4 + delta) * (n + code length) / 2"),
    Key("scramble", bool, False, "permute positions before sending"),
    Key("announce_z", bool, True, "Protocol 2 announces z"),
    Key("representation", str, "auto", "auto, frame or dense"),
    Key("qubit_cap", int, 12, "largest dense register"),
    Key("attack.kind", str, "none", f"one of {', '.join(KINDS)}"),
    Key("attack.px", float, 0.0, "X probability"),
    Key("attack.py", float, 0.0, "Y probability"),
    Key("attack.pz", float, 0.0, "Z probability"),
    Key("attack.fraction", float, 1.0, "intercepted fraction"),
    Key("attack.bit_err", str, None, "fixed X pattern, e.g. 0100000"),
    Key("attack.phase_err", str, None, "fixed Z pattern"),
    Key("attack.theta", float, 0.2, "coherent probe angle (unitary)"),
    Key("attack.phi", float, 0.0, "coherent probe rotation (unitary)"),
    Key("output.dir", str, None, f"output directory (default ${OUTPUT_ENV} or .)"),
    Key("output.prefix", str, "", "file name prefix"),
]
SIMULATE_KEYS = [Key("protocol", int, 3, "1, 2 or 3")] + RUN_KEYS
EQUIV_KEYS = [Key("protocols", str, "2,3", "two protocols to compare, e.g. 1,2")] + RUN_KEYS


def _flatten(tree: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in tree.items():
        path = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, path + "."))
        else:
            out[path] = v
    return out


def _coerce(key: Key, value: Any) -> Any:
    if value is None:
        return None
    if key.kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", key.name)
        return value
    if key.kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", key.name)
        return float(value)
    if key.kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key.name)
        return value
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", key.name)
    return value


def parse_config(keys: list[Key], file_values: dict[str, Any], flag_values: dict[str, Any]) -> dict[str, Any]:
    """Merge defaults, file values and flags; flags win."""
    known = {k.name: k for k in keys}
    cfg = {k.name: k.default for k in keys}
    for name, value in file_values.items():
        if name not in known:
            raise ConfigError(f"unknown key; valid keys: {', '.join(sorted(known))}", name)
        cfg[name] = _coerce(known[name], value)
    for name, value in flag_values.items():
        if value is None:
            continue
        if name in file_values and file_values[name] != value:
            log.warning("flag --%s=%s overrides config file value %r", name, value, file_values[name])
        cfg[name] = value
    return cfg


def load_config_file(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return _flatten(tomllib.load(fh))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", "config") from None


def _pair_from(cfg: dict[str, Any]):
    name = cfg["code"]
    if name == "random":
        return get_pair(
            "random", n=cfg["code.n"], dim_c1=cfg["code.dim_c1"], dim_c2=cfg["code.dim_c2"],
            t=cfg["code.t"], seed=cfg["code.seed"],
        )
    if name in SHIPPED:
        return get_pair(name)
    if os.path.exists(name):
        return load_pair(Path(name).read_text())
    raise ConfigError(f"unknown code {name!r}; known: {', '.join(sorted(SHIPPED))}, random", "code")


def _attack_from(cfg: dict[str, Any], pair) -> AttackModel:
    kind = cfg["attack.kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown attack kind {kind!r}; valid kinds: {', '.join(KINDS)}", "attack.kind")
    try:
        if kind == "none":
            return AttackModel.none()
        if kind == "iid_pauli":
            return AttackModel.iid_pauli(cfg["attack.px"], cfg["attack.py"], cfg["attack.pz"])
        if kind == "intercept_resend":
            return AttackModel.intercept_resend(cfg["attack.fraction"])
        if kind == "fixed_pattern":
            bit, phase = cfg["attack.bit_err"], cfg["attack.phase_err"]
            if bit is None and phase is None:
                raise ConfigError("fixed_pattern needs attack.bit_err or attack.phase_err", "attack.bit_err")
            length = len(bit or phase)
            b = BitVector.from_str(bit) if bit else BitVector.zeros(length)
            p = BitVector.from_str(phase) if phase else BitVector.zeros(length)
            return AttackModel.fixed_pattern(b, p)
        return AttackModel.unitary(coherent_pair_gate(cfg["attack.theta"], cfg["attack.phi"]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), "attack") from None


def build_protocol_config(cfg: dict[str, Any]) -> ProtocolConfig:
    if cfg["seed"] is None:
        raise ConfigError("a seed is required for reproducible runs", "seed")
    if cfg["trials"] < 1:
        raise ConfigError("need at least one trial", "trials")
    pair = _pair_from(cfg)
    return ProtocolConfig(
        pair,
        n_check=cfg["n"],
        threshold=cfg["threshold"],
        threshold_rate=cfg["threshold_rate"],
        scramble=cfg["scramble"],
        attack=_attack_from(cfg, pair),
        seed=cfg["seed"],
        delta=cfg["delta"],
        announce_z=cfg["announce_z"],
        representation=cfg["representation"],
        qubit_cap=cfg["qubit_cap"],
    )


def output_dir(cfg: dict[str, Any]) -> Path:
    d = cfg.get("output.dir") or os.environ.get(OUTPUT_ENV) or "."
    path = Path(d)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_csv(path: Path, rows: list[dict[str, Any]]) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    path.write_text(buf.getvalue())


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def summarize(protocol: int, config: ProtocolConfig, transcripts) -> dict[str, Any]:
    """Summary row; every field is recomputable from the trial records."""
    n = len(transcripts)
    kept = [t for t in transcripts if not t.aborted]
    checked = [t for t in transcripts if t.check_errors is not None]
    row: dict[str, Any] = {
        "protocol": protocol,
        "code": config.pair.name,
        "attack": config.attack.kind,
        "seed": config.seed,
        "trials": n,
        "n_check": config.check_count,
        "threshold": config.abort_threshold,
        "abort_rate": sum(t.aborted for t in transcripts) / n,
        "abort_check": sum(t.abort_reason == "check" for t in transcripts),
        "abort_decode": sum(t.abort_reason == "decode" for t in transcripts),
        "abort_sifting": sum(t.abort_reason == "sifting" for t in transcripts),
        "key_agreement": (sum(bool(t.key_agreement) for t in kept) / len(kept)) if kept else None,
        "mean_check_error_rate": (
            sum(t.check_errors for t in checked) / (len(checked) * config.check_count) if checked else None
        ),
    }
    if protocol == 3:
        sifted = sum(t.stats["sifted_count"] for t in transcripts)
        row["sifted_error_rate"] = sum(t.stats["sifted_errors"] for t in transcripts) / sifted if sifted else None
    else:
        row["sifted_error_rate"] = None
    rate = row["mean_check_error_rate"]
    row["shannon_rate_at_check_rate"] = key_rate(min(rate, 0.5), "shannon") if rate is not None else None
    row["eve_info_bits"] = None
    if protocol == 3 and config.attack.kind == "intercept_resend":
        recs, bits, bases = [], [], []
        for t in transcripts:
            s = t.extras["sifted"]
            tx = s if t.extras["tx_of"] is None else t.extras["tx_of"][s]
            recs.append(t.eve.subset(tx))
            bits.append(t.extras["alice_bits"][s])
            bases.append(t.extras["alice_bases"][s])
        row["eve_info_bits"] = eve_information_estimate(recs, bits, bases).bits_per_bit
    return row


# subcommands -----------------------------------------------------------------


def cmd_simulate(cfg: dict[str, Any]) -> int:
    protocol = cfg["protocol"]
    if protocol not in (1, 2, 3):
        raise ConfigError("protocol must be 1, 2 or 3", "protocol")
    config = build_protocol_config(cfg)
    runs = run_trials(protocol, config, cfg["trials"], workers=cfg["workers"])
    out = output_dir(cfg)
    prefix = cfg["output.prefix"]
    with open(out / f"{prefix}trials.jsonl", "w") as fh:
        for t in runs:
            fh.write(_json_line(t.to_record()) + "\n")
    row = summarize(protocol, config, runs)
    _write_csv(out / f"{prefix}summary.csv", [row])
    print(_json_line(row))
    return EXIT_OK


def cmd_equivalence(cfg: dict[str, Any]) -> int:
    try:
        protocols = tuple(int(p) for p in cfg["protocols"].split(","))
    except ValueError:
        raise ConfigError("expected two comma-separated protocol numbers", "protocols") from None
    if len(protocols) != 2 or not set(protocols) <= {1, 2, 3}:
        raise ConfigError("expected two protocols from 1, 2, 3", "protocols")
    config = build_protocol_config(cfg)
    runs_a = run_trials(protocols[0], config, cfg["trials"], workers=cfg["workers"])
    runs_b = run_trials(protocols[1], config, cfg["trials"], workers=cfg["workers"])
    rep = compare_transcripts(protocols, runs_a, runs_b)
    out = output_dir(cfg)
    prefix = cfg["output.prefix"]
    rec = rep.to_record()
    rec.update(code=config.pair.name, attack=config.attack.kind, seed=config.seed)
    stat = rep.statistic
    rec["counts"] = [
        {"statistic": list(k), "a": stat.counts_a[k], "b": stat.counts_b[k]} for k in stat.counts_a
    ]
    (out / f"{prefix}equivalence.json").write_text(json.dumps(rec, sort_keys=True, indent=1) + "\n")
    _write_csv(out / f"{prefix}equivalence.csv", [{k: v for k, v in rec.items() if k != "counts"}])
    print(_json_line({k: v for k, v in rec.items() if k != "counts"}))
    return EXIT_OK


def cmd_codes(args) -> int:
    if args.action == "list":
        for name in sorted(SHIPPED):
            p = get_pair(name)
            print(f"{name}\tn={p.n}\tk={p.k}\tt_bit={p.t_bit}\tt_phase={p.t_phase}")
        return EXIT_OK
    if args.target is None:
        raise UsageError(f"codes {args.action} needs a code name or file")
    cfg = {"code": args.target, "code.n": args.n, "code.dim_c1": args.dim_c1, "code.dim_c2": args.dim_c2,
           "code.t": args.t, "code.seed": args.code_seed}
    if args.action == "validate" and os.path.exists(args.target):
        pair = load_pair(Path(args.target).read_text())
    else:
        pair = _pair_from(cfg)
    if args.action == "show":
        sys.stdout.write(dump_pair(pair))
        return EXIT_OK
    check = validate_pair(pair)
    if not check:
        print(f"invalid: {check.violation}")
        return EXIT_VERIFY
    print(f"ok: {pair.name} n={pair.n} k={pair.k}")
    return EXIT_OK


def _grid(text: str, cast: Callable) -> list:
    return [cast(x) for x in str(text).split(",") if x.strip()]


def cmd_bounds(args) -> int:
    rows: list[dict[str, Any]] = []
    if args.formula == "lochau":
        for s, m in itertools.product(_grid(args.s, float), _grid(args.m, int)):
            b = lo_chau_info_bound(s, m)
            rows.append({"s": s, "m": m, "c": b.c, "bound": b.value, "vacuous": b.vacuous, "residual": b.residual})
    elif args.formula == "sampling":
        for n, d, e in itertools.product(_grid(args.n, int), _grid(args.delta, float), _grid(args.eps, float)):
            row = {"n": n, "delta": d, "eps": e, "bound": sampling_tail_bound(n, d, e)}
            if args.trials:
                seed = 0 if args.seed is None else args.seed
                emp, _ = empirical_sampling_experiment(n, d, e, args.trials, stream(seed, n, len(rows)))
                row.update(trials=args.trials, empirical=emp)
            rows.append(row)
    elif args.formula == "rate":
        for d in _grid(args.delta, float):
            rows.append({"delta": d, "mode": args.mode, "rate": key_rate(d, args.mode)})
    else:
        rows.append({"shannon_threshold": shannon_threshold()})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_verify(args) -> int:
    results = []
    r1, r2 = bell_projector_identities()
    results.append(("bell_identities", max(r1, r2) <= 1e-12, max(r1, r2)))
    steane = get_pair("steane")
    dual = verify_hadamard_duality(steane)
    results.append(("steane_duality", bool(dual), dual.distance))
    for name in ("steane", "rep3"):
        p = get_pair(name)
        rep = z_average_check(p, BitVector.zeros(p.n), BitVector.zeros(p.n))
        results.append((f"z_average_{name}", bool(rep), rep.max_deviation))
    ok, worst = frame_oracle_agreement(args.circuits, seed=args.seed)
    results.append(("frame_vs_oracle", ok, worst))
    for name, good, val in results:
        print(f"{'PASS' if good else 'FAIL'} {name} {val:.3e}")
    return EXIT_OK if all(r[1] for r in results) else EXIT_VERIFY


# argument parsing ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _typed(kind: type) -> Callable:
    if kind is bool:
        return _bool
    return kind


def _add_keys(p: argparse.ArgumentParser, keys: list[Key]) -> None:
    p.add_argument("--config", help="TOML file of dotted keys")
    for k in keys:
        p.add_argument(f"--{k.name}", dest=k.name, type=_typed(k.kind), default=None, help=k.help)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cssqkd", description="Simulate CSS-code key distribution protocols.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({RNG_ALGORITHM})")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress warnings")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run one protocol for many trials")
    _add_keys(sim, SIMULATE_KEYS)
    eq = sub.add_parser("equivalence", help="compare two protocols statistically")
    _add_keys(eq, EQUIV_KEYS)

    codes = sub.add_parser("codes", help="list, show or validate code pairs")
    codes.add_argument("action", choices=["list", "show", "validate"])
    codes.add_argument("target", nargs="?")
    codes.add_argument("--n", type=int, default=20)
    codes.add_argument("--dim_c1", type=int, default=12)
    codes.add_argument("--dim_c2", type=int, default=6)
    codes.add_argument("--t", type=int, default=1)
    codes.add_argument("--code-seed", dest="code_seed", type=int, default=0)

    b = sub.add_parser("bounds", help="evaluate security formulas; comma lists give a grid")
    b.add_argument("formula", choices=["lochau", "sampling", "rate", "threshold"])
    b.add_argument("--s", default="20")
    b.add_argument("--m", default="1")
    b.add_argument("--n", default="1000")
    b.add_argument("--delta", default="0.1")
    b.add_argument("--eps", default="0.05")
    b.add_argument("--mode", choices=["shannon", "gv"], default="shannon")
    b.add_argument("--trials", type=int, default=0, help="also run the sampling experiment")
    b.add_argument("--seed", type=int, default=None)

    v = sub.add_parser("verify", help="oracle identities and frame-vs-oracle agreement")
    v.add_argument("--circuits", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    log.setLevel(logging.ERROR if args.quiet else logging.WARNING)
    try:
        if args.command in ("simulate", "equivalence"):
            keys = SIMULATE_KEYS if args.command == "simulate" else EQUIV_KEYS
            flags = {k.name: getattr(args, k.name) for k in keys}
            cfg = parse_config(keys, load_config_file(args.config), flags)
            return cmd_simulate(cfg) if args.command == "simulate" else cmd_equivalence(cfg)
        if args.command == "codes":
            return cmd_codes(args)
        if args.command == "bounds":
            return cmd_bounds(args)
        return cmd_verify(args)
    except (ConfigError, UsageError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported with context
        print(f"error during {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
