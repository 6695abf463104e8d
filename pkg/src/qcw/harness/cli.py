"""Command-line front end: ``qcw <subcommand> [options]``.

Exit codes: 0 when every run met its expectation (or every criterion
passed), 1 otherwise, 2 on a usage error.  ``QCW_SEED`` in the environment
overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter

import numpy as np

from .. import coinflip as cf
from ..errors import ConfigurationError, ParameterError, UsageError
from ..fieldmath import Distribution
from ..hashing import pa_experiment
from .session import derive_seed, run_session
from .transcript import export_transcript

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    """Bad arguments detected after parsing."""


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.12g}")
    if isinstance(v, np.bool_):
        return bool(v)
    return v


# ---------------------------------------------------------------------------
# protocol sessions

def _session_config(args) -> tuple[str, dict, dict]:
    """Protocol name, strategies and config from the parsed arguments."""
    cmd = args.command
    cfg: dict = {}
    strategies: dict = {}

    def put(key, value):
        if value is not None:
            cfg[key] = value

    if cmd in ("ot", "id", "idplus"):
        put("m", args.m)
        put("alpha", args.alpha)
        put("phi", args.phi)
        put("phi_prime", args.phi_prime)
        if args.strategy:
            strategies["B"] = args.strategy
    if cmd == "ot":
        put("lam", args.lam)
        put("gamma", args.gamma)
        put("k", args.k)
        if args.plain:
            cfg["compiled"] = False
    if cmd in ("id", "idplus"):
        put("ell", args.ell)
        put("w_A", args.w_a)
        put("w_B", args.w_b)
    if cmd == "idplus":
        put("eve_fraction", args.eve_fraction)
        if args.eve:
            strategies["E"] = args.eve
    if cmd == "commit":
        put("scheme", args.scheme)
        put("preset", args.preset)
        put("mode", args.mode)
        put("bit", args.bit)
        if args.strategy:
            strategies["A"] = args.strategy
    if cmd == "ssscommit":
        put("sigma", args.sigma)
        put("preset", args.preset)
        put("mode", args.mode)
        put("corrupt", args.corrupt)
        if args.strategy:
            strategies["A"] = args.strategy
    if cmd == "iqzk":
        put("kappa", args.kappa)
        put("x", args.x)
        put("coin", args.coin)
        if args.strategy:
            strategies["A"] = args.strategy
    return cmd, strategies, cfg


def _run_sessions(protocol: str, strategies: dict, cfg: dict, args, expect: str) -> tuple[dict, bool]:
    reasons: Counter = Counter()
    accepted = 0
    runs = []
    for i in range(args.trials):
        seed = derive_seed(args.seed, i)
        out, session = run_session(protocol, strategies, cfg, seed, f"{protocol}-{i}")
        accepted += out.accepted
        reasons[out.reason or "ok"] += 1
        if i == 0 and args.transcript:
            export_transcript(session.transcript(), args.transcript)
        if i < args.show:
            runs.append({"session": i, "accepted": out.accepted, "reason": out.reason,
                         "aborted_by": out.aborted_by, "values": _jsonable(out.values) if args.values else None})
    ok = accepted == args.trials if expect == "accept" else accepted == 0
    record = {"protocol": protocol, "strategies": strategies, "config": _jsonable(cfg), "seed": args.seed,
              "trials": args.trials, "accepted": accepted, "acceptance_rate": accepted / args.trials,
              "reasons": dict(sorted(reasons.items())), "expect": expect, "ok": ok, "runs": runs}
    return record, ok


def cmd_protocol(args) -> tuple[dict, bool]:
    protocol, strategies, cfg = _session_config(args)
    return _run_sessions(protocol, strategies, cfg, args, args.expect)


def cmd_zkpk(args) -> tuple[dict, bool]:
    cfg = {"vertices": args.vertices, "sigma": args.sigma, "kappa": args.kappa, "coin": args.coin,
           "preset": args.preset}
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            g = json.load(fh)
        if isinstance(g, list):
            g = {"adjacency": g}
        cfg["graph"] = g
    strategies = {"A": "cheat" if args.cheat else "honest"}
    expect = args.expect or ("reject" if args.cheat else "accept")
    return _run_sessions("zkpk", strategies, cfg, args, expect)


# ---------------------------------------------------------------------------
# coins

def cmd_coin_flip(args) -> tuple[dict, bool]:
    cfg = {"bits": args.bits, "flavor": args.flavor, "sigma": args.sigma}
    strategies = {"A": args.alice, "B": args.bob}
    records = []
    aborted = 0
    for i in range(args.trials):
        out, session = run_session("coin", strategies, cfg, derive_seed(args.seed, i), f"coin-{i}")
        if i == 0 and args.transcript:
            export_transcript(session.transcript(), args.transcript)
        aborted += not out.accepted
        records.append({"outcome": out.values.get("coin"), "aborted": not out.accepted, "reason": out.reason,
                        "retries": 0})
    return {"command": "coin flip", "config": cfg, "strategies": strategies, "seed": args.seed,
            "trials": args.trials, "aborted": aborted, "records": records[: args.show]}, aborted == 0


def cmd_coin_force(args) -> tuple[dict, bool]:
    target_hex = args.target.lower()
    ell = 4 * len(target_hex)
    if ell == 0:
        raise CliError("--target must be a non-empty hex string")
    try:
        target = cf.hex_to_bits(target_hex, ell)
    except ParameterError as exc:
        raise CliError(str(exc)) from exc
    records = []
    hits = nonabort = 0
    for i in range(args.trials):
        rng = np.random.default_rng(derive_seed(args.seed, i))
        adversary = cf.make_party(args.strategy, rng)
        if args.side == "alice":
            out = cf.enforce_ff_against_alice(target, adversary, ell, args.sigma, rng=rng)
        else:
            out = cf.enforce_ff_against_bob(target, adversary, ell, args.sigma, rng=rng)
        if not out.aborted:
            nonabort += 1
            hits += out.hex() == target_hex
        records.append({"outcome": out.hex(), "aborted": out.aborted, "reason": out.reason, "retries": out.retries})
    return {"command": "coin force", "target": target_hex, "side": args.side, "sigma": args.sigma,
            "strategy": args.strategy, "seed": args.seed, "trials": args.trials, "non_abort": nonabort,
            "hits": hits, "records": records[: args.show]}, hits == nonabort


# ---------------------------------------------------------------------------
# privacy amplification and the suite

def cmd_pa(args) -> tuple[dict, bool]:
    rng = np.random.default_rng(args.seed)
    if not 1 <= args.n <= 16:
        raise CliError("--n must be between 1 and 16")
    size = 1 << args.n
    w = rng.random(size) ** args.skew
    w /= w.sum()
    dist = Distribution({x: float(p) for x, p in enumerate(w)})
    leak = list(range(min(args.leak, args.n)))
    res = pa_experiment(dist, leak, args.ell, args.trials, rng, args.n)
    return {"command": "pa", "n": args.n, "ell": args.ell, "leaked_bits": leak, "hmin": res.hmin,
            "mean_distance": res.empirical, "std_err": res.std_err, "bound": res.bound,
            "holds": res.holds}, res.holds


def cmd_suite(args) -> tuple[dict, bool]:
    from .suite import run_suite
    only = None
    if args.only:
        try:
            only = sorted({int(v) for v in args.only.split(",")})
        except ValueError as exc:
            raise CliError("--only takes comma-separated criterion numbers") from exc
    progress = (lambda r: print(r.line(), file=sys.stderr, flush=True)) if not args.quiet else None
    report = run_suite(args.seed, args.scale, only, progress)
    return report.to_dict(), report.passed


# ---------------------------------------------------------------------------
# parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    p.add_argument("--trials", type=int, default=argparse.SUPPRESS, help="number of runs (default 1)")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print the JSON record")
    p.add_argument("--out", metavar="FILE", default=argparse.SUPPRESS, help="write the JSON record to FILE")
    return p


def _session_flags(p, strategy_help: str) -> None:
    p.add_argument("--strategy", help=strategy_help)
    p.add_argument("--expect", choices=("accept", "reject"), default="accept",
                   help="outcome every run must have for exit code 0")
    p.add_argument("--transcript", metavar="FILE", help="export the first session's transcript (JSON lines)")
    p.add_argument("--show", type=int, default=5, help="per-run records to include")
    p.add_argument("--values", action="store_true", help="include protocol output values in the records")


def _bb84_flags(p) -> None:
    p.add_argument("--m", type=int, help="number of qubits")
    p.add_argument("--alpha", type=float, help="test fraction of the compiler")
    p.add_argument("--phi", type=float, help="channel error rate")
    p.add_argument("--phi-prime", dest="phi_prime", type=float, help="error threshold of the test")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qcw", parents=[common],
                                     description="Two-party protocol workbench: run sessions, batches and the suite.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ot", parents=[common], help="oblivious transfer from BB84 states")
    _bb84_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, help="output length as a fraction of the surviving qubits")
    p.add_argument("--gamma", type=float, help="storage fraction of the bounded-storage receiver")
    p.add_argument("--k", type=int, choices=(0, 1), help="receiver's choice bit (random if omitted)")
    p.add_argument("--plain", action="store_true", help="skip the commit-and-open verification")
    _session_flags(p, "receiver: honest, delayed or bqsm")
    p.set_defaults(func=cmd_protocol)

    for name, helptext in (("id", "password identification"), ("idplus", "identification with MAC and syndromes")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        _bb84_flags(p)
        p.add_argument("--ell", type=int, help="response length in bits")
        p.add_argument("--w-a", dest="w_a", type=int, help="user's password index")
        p.add_argument("--w-b", dest="w_b", type=int, help="server's password index")
        if name == "idplus":
            p.add_argument("--eve", choices=("passthrough", "tamper", "measure"), help="man-in-the-middle strategy")
            p.add_argument("--eve-fraction", dest="eve_fraction", type=float, help="fraction measured by Eve")
        _session_flags(p, "server: honest or delayed")
        p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("commit", parents=[common], help="single bit commitment")
    p.add_argument("--scheme", choices=("lwe", "naor"))
    p.add_argument("--preset", choices=("standard", "small"))
    p.add_argument("--mode", choices=("hiding", "binding"))
    p.add_argument("--bit", type=int, choices=(0, 1))
    _session_flags(p, "committer: honest or flip")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("ssscommit", parents=[common], help="secret-sharing commitment with cut-and-choose opening")
    p.add_argument("--sigma", type=int)
    p.add_argument("--preset", choices=("standard", "small"))
    p.add_argument("--mode", choices=("hiding", "binding"))
    p.add_argument("--corrupt", type=int, help="positions corrupted by the corrupt strategy")
    _session_flags(p, "committer: honest, corrupt or guess")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("coin", parents=[common], help="coin flipping")
    coin_sub = p.add_subparsers(dest="coin_command", required=True)
    f = coin_sub.add_parser("flip", parents=[common], help="run the coin protocol")
    f.add_argument("--bits", type=int, default=8)
    f.add_argument("--flavor", choices=("sequential", "force_random", "force_force"), default="sequential")
    f.add_argument("--sigma", type=int, default=8)
    f.add_argument("--alice", default="honest", choices=sorted(cf.STRATEGIES))
    f.add_argument("--bob", default="honest", choices=sorted(cf.STRATEGIES))
    f.add_argument("--transcript", metavar="FILE")
    f.add_argument("--show", type=int, default=5)
    f.set_defaults(func=cmd_coin_flip)
    f = coin_sub.add_parser("force", parents=[common], help="steer the enforceable coin to a target")
    f.add_argument("--target", required=True, help="target outcome in hex (4 bits per digit)")
    f.add_argument("--side", choices=("alice", "bob"), required=True, help="corrupted party the simulator faces")
    f.add_argument("--sigma", type=int, default=8)
    f.add_argument("--strategy", default="honest", choices=sorted(cf.STRATEGIES))
    f.add_argument("--show", type=int, default=5)
    f.set_defaults(func=cmd_coin_force)

    p = sub.add_parser("zkpk", parents=[common], help="zero-knowledge proof of a Hamiltonian cycle")
    zk_sub = p.add_subparsers(dest="zk_command", required=True)
    r = zk_sub.add_parser("run", parents=[common], help="run proofs")
    r.add_argument("--vertices", type=int, default=8)
    r.add_argument("--sigma", type=int, default=8)
    r.add_argument("--kappa", type=int, default=256, help="coin bits for the commitment key")
    r.add_argument("--coin", choices=("ideal", "sequential"), default="ideal")
    r.add_argument("--preset", choices=("standard", "small"), default="standard")
    r.add_argument("--cheat", action="store_true", help="prover without a witness")
    r.add_argument("--graph", metavar="FILE", help="JSON adjacency list, or {adjacency, cycle}")
    r.add_argument("--expect", choices=("accept", "reject"))
    r.add_argument("--transcript", metavar="FILE")
    r.add_argument("--show", type=int, default=5)
    r.add_argument("--values", action="store_true")
    r.set_defaults(func=cmd_zkpk)

    p = sub.add_parser("iqzk", parents=[common], help="proof over a flipped reference string")
    p.add_argument("--kappa", type=int)
    p.add_argument("--x", type=int, help="instance (quadratic residue test modulo 1019)")
    p.add_argument("--coin", choices=("ideal", "sequential"))
    _session_flags(p, "prover: honest or witnessless")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("pa", parents=[common], help="privacy amplification on a random source")
    p.add_argument("--n", type=int, default=8, help="source length in bits")
    p.add_argument("--ell", type=int, default=2, help="output length")
    p.add_argument("--leak", type=int, default=1, help="leading bits made public")
    p.add_argument("--skew", type=float, default=3.0, help="exponent skewing the random weights")
    p.set_defaults(func=cmd_pa, default_trials=32)

    p = sub.add_parser("suite", parents=[common], help="run the acceptance criteria")
    p.add_argument("--scale", type=float, default=1.0, help="multiplier on every trial count")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--quiet", action="store_true", help="no per-criterion progress on stderr")
    p.set_defaults(func=cmd_suite)
    return parser


def _render(record: dict) -> str:
    lines = []
    for k, v in record.items():
        if k in ("runs", "records", "criteria"):
            continue
        lines.append(f"{k}: {v}")
    for item in record.get("criteria", []):
        mark = "pass" if item["passed"] else "FAIL"
        lines.append(f"  [{mark}] {item['id']:2d} {item['name']}")
        for rep in item["reports"]:
            lines.append(f"         {rep['metric']}: {rep['estimate']} vs {rep['bound']} ({rep['rule']}) {rep['verdict']}")
    for item in record.get("runs", []) + record.get("records", []):
        lines.append(f"  {item}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    args.seed = getattr(args, "seed", 0)
    env = os.environ.get("QCW_SEED")
    if env is not None:
        try:
            args.seed = int(env, 0)
        except ValueError:
            print(f"qcw: QCW_SEED must be an integer, got {env!r}", file=sys.stderr)
            return EXIT_USAGE
    args.trials = getattr(args, "trials", getattr(args, "default_trials", 1))
    args.json = getattr(args, "json", False)
    args.out = getattr(args, "out", None)
    if args.trials < 1:
        print("qcw: --trials must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        record, ok = args.func(args)
    except (CliError, ParameterError, ConfigurationError, UsageError) as exc:
        print(f"qcw: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(_jsonable(record), sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    print(text if args.json else _render(record), end="" if args.json else "\n")
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
