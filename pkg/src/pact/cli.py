"""Command-line driver for every workflow.

Runs against a local data directory by default (an embedded engine) or
against a running service with ``--remote``. Exit codes: 0 success, 1 domain
error (or a negative verification outcome), 2 usage error. With ``--json``
exactly one JSON document is written to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import core, simnet
from .client import HttpClient
from .engine import DEFAULT_MINER_COUNT, DEFAULT_SERVICE_DIFFICULTY, Engine
from .errors import PactError

DEFAULT_DATA_DIR = "pact-data"
DEFAULT_ADDR = "127.0.0.1:8743"


@dataclass(frozen=True, slots=True)
class CLIError(RuntimeError):
    message: str
    exit_code: int = 1


def _emit_json(payload: object) -> None:
    print(json.dumps(payload, indent=2, sort_keys=False))


def _emit(ns: argparse.Namespace, payload: object, human: str) -> None:
    if ns.json:
        _emit_json(payload)
    else:
        print(human)


def _read_text_file(path: str) -> str:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from exc
    return core.canonicalize(raw)


def _backend(ns: argparse.Namespace):
    if getattr(ns, "remote", None):
        base = ns.remote if "://" in ns.remote else f"http://{ns.remote}"
        return HttpClient(base)
    return _engine(ns)


def _engine(ns: argparse.Namespace) -> Engine:
    data_dir = ns.data_dir or os.environ.get("PACT_DATA_DIR") or DEFAULT_DATA_DIR
    clock = None
    if ns.fixed_time is not None:
        fixed = ns.fixed_time
        clock = lambda: fixed  # noqa: E731
    key_seed = ns.key_seed or os.environ.get("PACT_KEY_SEED") or None
    return Engine(
        data_dir,
        difficulty=ns.difficulty,
        miner_count=ns.miners,
        clock=clock,
        key_seed=key_seed.encode("utf-8") if key_seed else None,
    )


# -- command handlers ------------------------------------------------------


def _cmd_group_create(ns: argparse.Namespace) -> int:
    signatories = []
    for spec in ns.signatory:
        sig_id, _, display = spec.partition(":")
        signatories.append({"id": sig_id, "display_name": display})
    view = _backend(ns).create_group(signatories, group_id=ns.id)
    lines = [f"group {view['id']}"]
    lines += [
        f"  {s['id']}{' (' + s['display_name'] + ')' if s['display_name'] else ''}"
        f"  {s['public_key']}"
        for s in view["signatories"]
    ]
    _emit(ns, view, "\n".join(lines))
    return 0


def _proposal_human(view: dict) -> str:
    lines = [
        f"proposal {view['id']}  [{view['kind']}]",
        f"  status: {view['status']}  tally: {view['tally']}",
        f"  expected hash: {view['expected_hash']}",
    ]
    if view["parent_version_id"]:
        lines.append(f"  amends: {view['parent_version_id']}")
    for sid, sub in view["submissions"].items():
        verdict = "yes" if sub["vote"] else "no"
        match = "ok" if sub["submitted_hash"] == view["expected_hash"] else "MISMATCH"
        lines.append(f"  vote {sid}: {verdict} (hash {match})")
    if view["pending_signatories"]:
        lines.append(f"  awaiting: {', '.join(view['pending_signatories'])}")
    if view["version_id"]:
        lines.append(
            f"  version: {view['version_id']} at block {view['block_index']}"
        )
    return "\n".join(lines)


def _cmd_propose(ns: argparse.Namespace) -> int:
    if (ns.file is None) == (ns.text is None):
        raise CLIError("provide exactly one of --file or --text", exit_code=2)
    text = _read_text_file(ns.file) if ns.file else ns.text
    view = _backend(ns).open_proposal(
        ns.group, text, kind=ns.kind, parent_version_id=ns.parent
    )
    _emit(ns, view, _proposal_human(view))
    return 0


def _cmd_vote(ns: argparse.Namespace) -> int:
    sources = [s for s in (ns.hash, ns.file, ns.text) if s is not None]
    if len(sources) != 1:
        raise CLIError(
            "provide exactly one hash source: --hash, --file, or --text",
            exit_code=2,
        )
    if ns.hash is not None:
        submitted = ns.hash
    elif ns.file is not None:
        submitted = core.hash_contract(_read_text_file(ns.file))
    else:
        submitted = core.hash_contract(ns.text)
    view = _backend(ns).cast_vote(
        ns.proposal, ns.signatory, submitted, not ns.no, signature=ns.signature
    )
    _emit(ns, view, _proposal_human(view))
    return 0


def _cmd_finalize(ns: argparse.Namespace) -> int:
    result = _backend(ns).finalize(ns.proposal, miner_id=ns.miner)
    human = (
        f"version {result['version_id']} accepted at block {result['block_index']}\n"
        f"  owner pubkey: {result['owner_pubkey']}\n"
        f"  miner vote: {result['yes_count']} yes, threshold {result['threshold']}"
    )
    _emit(ns, result, human)
    return 0


def _cmd_chain_show(ns: argparse.Namespace) -> int:
    records = _backend(ns).chain_records()
    lines = []
    for r in records:
        what = "genesis" if r["index"] == 0 else f"contract {r['contract_id']}"
        lines.append(f"[{r['index']}] {r['hash']}  {what}")
    _emit(ns, records, "\n".join(lines))
    return 0


def _cmd_chain_verify(ns: argparse.Namespace) -> int:
    report = _backend(ns).verify_chain_report()
    if report["valid"]:
        _emit(ns, report, f"valid ({report['length']} blocks)")
        return 0
    _emit(
        ns,
        report,
        f"INVALID at block {report['first_bad_index']}: {report['rule']}",
    )
    return 1


def _cmd_history(ns: argparse.Namespace) -> int:
    entries = _backend(ns).history(ns.contract_id)
    lines = [
        f"[{e['block_index']}] {e['version_id']}  hash {e['contract_hash'][:16]}..  "
        f"owner {e['owner_pubkey'][:16]}.."
        for e in entries
    ]
    _emit(ns, entries, "\n".join(lines))
    return 0


def _cmd_verify(ns: argparse.Namespace) -> int:
    report = _backend(ns).verify_document(_read_text_file(ns.file))
    if report["found"]:
        human = (
            f"found: block {report['block_index']}, version {report['version_id']}\n"
            f"  owner pubkey: {report['owner_pubkey']}"
        )
    else:
        human = f"not found (digest {report['digest']})"
    _emit(ns, report, human)
    return 0 if report["found"] else 1


def _cmd_sim_run(ns: argparse.Namespace) -> int:
    config = {
        "miner_count": ns.miners,
        "noise_p": ns.noise,
        "adversary_mode": ns.adversary_mode,
        "adversary_count": ns.adversaries,
        "requests": ns.requests,
        "valid_fraction": ns.valid_fraction,
        "difficulty": 0,
        "seed": ns.seed,
    }
    if ns.remote:
        if ns.csv:
            raise CLIError("--csv needs a local run (the log stays server-side)", exit_code=2)
        base = ns.remote if "://" in ns.remote else f"http://{ns.remote}"
        summary = HttpClient(base).run_sim(config)
    else:
        try:
            report = simnet.run_simulation(simnet.SimConfig(**config))
        except ValueError as exc:
            raise CLIError(str(exc), exit_code=2) from exc
        if ns.csv:
            with open(ns.csv, "w", encoding="utf-8", newline="") as f:
                simnet.write_csv(report, f)
            print(f"wrote per-request log to {ns.csv}", file=sys.stderr)
        summary = report.summary()
    human = (
        f"miners {ns.miners}, noise {ns.noise}, {ns.requests} requests, seed {ns.seed}\n"
        f"  truthful request failure rate: {summary['truthful_request_failure_rate']:.6f}\n"
        f"  analytic failure probability:  {summary['analytic_failure_probability']:.6f}\n"
        f"  adversarial acceptance rate:   {summary['adversarial_acceptance_rate']:.6f}"
    )
    _emit(ns, summary, human)
    return 0


def _cmd_serve(ns: argparse.Namespace) -> int:
    from . import service

    app = service.create_app(_engine(ns))
    addr = ns.addr or os.environ.get("PACT_ADDR") or DEFAULT_ADDR
    service.serve(app, addr)
    return 0


# -- parser wiring ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--json", action="store_true", help="emit one JSON document")

    engine_opts = argparse.ArgumentParser(add_help=False)
    engine_opts.add_argument(
        "--data-dir", default=None, help=f"data directory (default ${{PACT_DATA_DIR}} or ./{DEFAULT_DATA_DIR})"
    )
    engine_opts.add_argument(
        "--remote", default=None, metavar="ADDR", help="talk to a running service instead"
    )
    engine_opts.add_argument(
        "--difficulty", type=int, default=DEFAULT_SERVICE_DIFFICULTY,
        help="proof-of-work difficulty for a fresh data directory",
    )
    engine_opts.add_argument(
        "--miners", type=int, default=DEFAULT_MINER_COUNT,
        help="verifying miner count for a fresh data directory",
    )
    engine_opts.add_argument(
        "--key-seed", default=None, help="fixed key-derivation seed (reproducible runs)"
    )
    engine_opts.add_argument(
        "--fixed-time", type=int, default=None, help="freeze the clock at this epoch"
    )

    parser = argparse.ArgumentParser(
        prog="pact",
        description="Contract agreement ledger: unanimous signatory voting over "
        "content hashes, with approved versions mined onto a quorum-gated chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    group = sub.add_parser("group", help="consensus group management")
    group_sub = group.add_subparsers(dest="subcommand", required=True)
    create = group_sub.add_parser(
        "create", parents=[output, engine_opts], help="create a group"
    )
    create.add_argument("--id", default=None, help="group id (generated when omitted)")
    create.add_argument(
        "--signatory", action="append", required=True, metavar="ID[:NAME]",
        help="signatory id with optional display name; repeatable",
    )
    create.set_defaults(handler=_cmd_group_create)

    propose = sub.add_parser(
        "propose", parents=[output, engine_opts], help="open a contract proposal"
    )
    propose.add_argument("--group", required=True)
    propose.add_argument("--file", default=None, help="read the contract text from a file")
    propose.add_argument("--text", default=None, help="contract text inline")
    propose.add_argument("--kind", choices=["original", "amendment"], default="original")
    propose.add_argument("--parent", default="", help="approved version id to amend")
    propose.set_defaults(handler=_cmd_propose)

    vote = sub.add_parser(
        "vote", parents=[output, engine_opts],
        help="submit a signatory's hash confirmation and vote",
    )
    vote.add_argument("--proposal", required=True)
    vote.add_argument("--signatory", required=True)
    vote.add_argument("--hash", default=None, help="submit this digest directly")
    vote.add_argument("--file", default=None, help="hash the text in this file")
    vote.add_argument("--text", default=None, help="hash this inline text")
    vote.add_argument("--no", action="store_true", help="vote against")
    vote.add_argument("--signature", default=None, help="detached vote signature (hex)")
    vote.set_defaults(handler=_cmd_vote)

    finalize = sub.add_parser(
        "finalize", parents=[output, engine_opts],
        help="freeze an approved proposal and mine its block",
    )
    finalize.add_argument("--proposal", required=True)
    finalize.add_argument("--miner", default="m1", help="miner id recorded in the block")
    finalize.set_defaults(handler=_cmd_finalize)

    chain = sub.add_parser("chain", help="chain inspection")
    chain_sub = chain.add_subparsers(dest="subcommand", required=True)
    chain_show = chain_sub.add_parser(
        "show", parents=[output, engine_opts], help="list all blocks"
    )
    chain_show.set_defaults(handler=_cmd_chain_show)
    chain_verify = chain_sub.add_parser(
        "verify", parents=[output, engine_opts], help="re-verify every block"
    )
    chain_verify.set_defaults(handler=_cmd_chain_verify)

    history = sub.add_parser(
        "history", parents=[output, engine_opts],
        help="version lineage of an original contract",
    )
    history.add_argument("contract_id")
    history.set_defaults(handler=_cmd_history)

    verify = sub.add_parser(
        "verify", parents=[output, engine_opts],
        help="check whether a document is notarized on the chain",
    )
    verify.add_argument("file")
    verify.set_defaults(handler=_cmd_verify)

    sim = sub.add_parser("sim", help="miner network simulation")
    sim_sub = sim.add_subparsers(dest="subcommand", required=True)
    sim_run = sim_sub.add_parser(
        "run", parents=[output], help="Monte Carlo run of the acceptance gate"
    )
    sim_run.add_argument("--miners", type=int, required=True)
    sim_run.add_argument("--noise", type=float, default=0.0, help="per-miner inversion probability")
    sim_run.add_argument(
        "--adversary-mode", choices=["per_request_bernoulli", "fixed_subset"],
        default="per_request_bernoulli",
    )
    sim_run.add_argument("--adversaries", type=int, default=0, help="fixed_subset size")
    sim_run.add_argument("--requests", type=int, default=1)
    sim_run.add_argument("--valid-fraction", type=float, default=1.0)
    sim_run.add_argument("--seed", type=int, default=0)
    sim_run.add_argument("--csv", default=None, help="write the per-request log here")
    sim_run.add_argument("--remote", default=None, metavar="ADDR")
    sim_run.set_defaults(handler=_cmd_sim_run)

    serve = sub.add_parser(
        "serve", parents=[engine_opts], help="run the HTTP service"
    )
    serve.add_argument("--addr", default=None, help=f"listen address (default ${{PACT_ADDR}} or {DEFAULT_ADDR})")
    serve.set_defaults(handler=_cmd_serve, json=False)

    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.handler(ns)
    except CLIError as exc:
        if ns.json and exc.exit_code != 2:
            _emit_json({"error": {"code": "CLI_ERROR", "message": exc.message}})
        else:
            print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except PactError as exc:
        if ns.json:
            _emit_json({"error": {"code": exc.code, "message": exc.message}})
        else:
            print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
