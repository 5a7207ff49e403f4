"""``dosn`` command-line front end.

Exit codes: 0 success, 1 domain error, 2 usage error.  Errors are written to
stderr as one JSON object; human-readable output goes to stdout and
``--json`` switches it to machine-readable form.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from . import workspace
from .errors import DosnError, UnknownContent
from .ledger import Ledger
from .merkle import DEFAULT_CHUNK_SIZE
from .protocol import DOSN, PublishParams, compare_costs
from .rng import Rng
from .scenario import run_file
from .storage import BEHAVIORS


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(args, obj, table=None) -> None:
    if getattr(args, "json", False) or table is None:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(table)


def _table(rows: list[dict], cols: list[str]) -> str:
    widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows)) if rows else len(c) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
    lines.append("  ".join("-" * widths[c] for c in cols))
    for r in rows:
        lines.append("  ".join(str(r.get(c, "")).ljust(widths[c]) for c in cols))
    return "\n".join(lines)


def _user(net: DOSN, name: str):
    if name not in net.users:
        raise DosnError(f"unknown user {name!r}")
    return net.users[name]


def _member(net: DOSN, name: str) -> str:
    return net.users[name].address if name in net.users else name


def _content_id(net: DOSN, ref: str) -> str:
    if ref in net.records or net.ledger.get_root(ref):
        return ref
    hits = [c for c in net.records if c.startswith(ref)]
    if len(hits) == 1:
        return hits[0]
    raise UnknownContent(ref)


# commands that do not touch a workspace

def cmd_ledger_verify(args) -> int:
    path = Path(args.file) if args.file else workspace.resolve(args.workspace) / "ledger.jsonl"
    ledger = Ledger.load(path)
    out = {"valid": True, "height": ledger.height, "head": ledger.blocks[-1].digest,
           "state_digest": ledger.get_state_digest()}
    _emit(args, out, f"chain valid: height {out['height']}\nstate digest: {out['state_digest']}")
    return 0


def cmd_run(args) -> int:
    report = run_file(args.scenario)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0 if report["all_expectations_met"] else 1


def cmd_baseline_compare(args) -> int:
    rng = Rng(args.seed)
    contents = [rng.randbytes(args.size) for _ in range(args.contents)]
    params = PublishParams(args.t, args.n, args.r, args.chunk_size)
    report = compare_costs(contents, args.k, args.miners, params, args.seed)
    report["ratio"] = report["dosn_bytes"] / report["baseline_bytes"]
    rows = [
        {"mode": f"baseline (k={args.k})", "total_bytes": report["baseline_bytes"]},
        {"mode": f"dosn (r={args.r}, {args.miners} miners)", "total_bytes": report["dosn_bytes"]},
    ]
    _emit(args, report, _table(rows, ["mode", "total_bytes"]) + f"\nratio dosn/baseline: {report['ratio']:.4f}")
    return 0


# commands on a workspace

def cmd_init(args, root: Path) -> int:
    if (root / "workspace.json").exists():
        if not args.force:
            raise DosnError(f"workspace already exists at {root} (use --force)")
        for sub in ("miners", "users"):
            shutil.rmtree(root / sub, ignore_errors=True)
    net = DOSN(args.seed)
    for _ in range(args.miners):
        net.add_miner()
    workspace.save(net, root)
    _emit(args, {"workspace": str(root), "seed": args.seed, "miners": [
        {"name": m.name, "address": m.address} for m in net.storage.miners.values()]},
        f"initialized {root} with {args.miners} miners (seed {args.seed})")
    return 0


def cmd_user_add(args, net: DOSN) -> int:
    kp = net.add_user(args.name)
    _emit(args, {"name": args.name, "address": kp.address}, f"{args.name} {kp.address}")
    return 0


def cmd_miner_add(args, net: DOSN) -> int:
    addr = net.add_miner(args.name, args.behavior)
    name = net.miner_name(addr)
    _emit(args, {"name": name, "address": addr}, f"{name} {addr}")
    return 0


def cmd_miner_set_behavior(args, net: DOSN) -> int:
    m = net.storage.by_name(args.miner)
    m.behavior = args.behavior
    _emit(args, {"name": m.name, "behavior": m.behavior}, f"{m.name} -> {m.behavior}")
    return 0


def cmd_post(args, net: DOSN) -> int:
    data = sys.stdin.buffer.read() if args.file == "-" else Path(args.file).read_bytes()
    acl = {}
    for entry in args.member or []:
        name, _, role = entry.partition("=")
        if not role:
            raise UsageError(f"--member expects NAME=ROLE, got {entry!r}")
        acl[_member(net, name)] = role
    params = PublishParams(args.t, args.n, args.r, args.chunk_size)
    rec = net.publish(_user(net, args.owner), data, acl, args.allow or [], params)
    _emit(args, {"content_id": rec.content_id, "policy_id": rec.policy_id,
                 "leaves": len(rec.manifest.leaf_cids), "bytes": len(data)}, rec.content_id)
    return 0


def cmd_grant(args, net: DOSN) -> int:
    cid = _content_id(net, args.content)
    net.grant(_user(net, args.owner), cid, _member(net, args.member), args.role)
    _emit(args, {"content_id": cid, "member": args.member, "role": args.role},
          f"granted {args.role} to {args.member}")
    return 0


def cmd_revoke(args, net: DOSN) -> int:
    cid = _content_id(net, args.content)
    owner = _user(net, args.owner)
    if args.member:
        net.remove_member(owner, cid, _member(net, args.member))
        msg = f"removed {args.member} from policy"
    else:
        net.revoke(owner, cid)
        msg = "policy revoked"
    _emit(args, {"content_id": cid, "member": args.member, "revoked": not args.member}, msg)
    return 0


def cmd_policy_show(args, net: DOSN) -> int:
    ref = args.id
    policy = net.ledger.policy(int(ref)) if ref.isdigit() else None
    if policy is None:
        pid = net._policy_id(_content_id(net, ref))
        policy = net.ledger.policy(pid) if pid else None
    if policy is None:
        raise DosnError(f"no policy {ref!r}")
    print(json.dumps(policy.to_json(), indent=2, sort_keys=True))
    return 0


def cmd_get(args, net: DOSN) -> int:
    cid = _content_id(net, args.content)
    out = net.fetch(_user(net, getattr(args, "as")), cid)
    for w in out.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not out.ok:
        print(json.dumps({"error": out.reason.value, "detail": out.detail}), file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_bytes(out.plaintext)
    else:
        sys.stdout.buffer.write(out.plaintext)
        sys.stdout.flush()
    return 0


def cmd_forget(args, net: DOSN) -> int:
    cid = _content_id(net, args.content)
    net.forget(_user(net, args.owner), cid)
    _emit(args, {"content_id": cid, "forgotten": True}, f"forgot {cid}")
    return 0


def cmd_acc_delete(args, net: DOSN) -> int:
    net.delete_acc(_user(net, args.owner))
    _emit(args, {"owner": args.owner, "deactivated": True}, f"ACC of {args.owner} deactivated")
    return 0


def cmd_net_stats(args, net: DOSN) -> int:
    stats = net.storage.stats()
    table = _table(stats["per_miner"], ["name", "behavior", "shards", "key_shares", "bytes_stored", "requests"])
    table += f"\ntotal bytes: {stats['total_bytes']}"
    _emit(args, stats, table)
    return 0


READ_ONLY = {cmd_policy_show, cmd_net_stats}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dosn", description="Decentralized social network simulator")
    p.add_argument("--workspace", "-w", help="workspace directory (default $DOSN_WORKSPACE or ./.dosn)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    # repeated on subcommands; SUPPRESS keeps a top-level value from being reset
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workspace", "-w", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(subparsers, name, func, **kw):
        sp = subparsers.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=func)
        return sp

    sp = add(sub, "init", cmd_init, help="create a workspace")
    sp.add_argument("--miners", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--force", action="store_true")

    user = sub.add_parser("user").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    add(user, "add", cmd_user_add).add_argument("name")

    miner = sub.add_parser("miner").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = add(miner, "add", cmd_miner_add)
    sp.add_argument("name", nargs="?")
    sp.add_argument("--behavior", choices=BEHAVIORS, default="honest")
    sp = add(miner, "set-behavior", cmd_miner_set_behavior)
    sp.add_argument("miner")
    sp.add_argument("behavior", choices=BEHAVIORS)

    sp = add(sub, "post", cmd_post, help="encrypt, shard and publish a file")
    sp.add_argument("--owner", required=True)
    sp.add_argument("--file", required=True, help="path, or - for stdin")
    sp.add_argument("--t", type=int, default=3)
    sp.add_argument("--n", type=int, default=5)
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
    sp.add_argument("--allow", action="append", help="role allowed to read (repeatable)")
    sp.add_argument("--member", action="append", help="NAME=ROLE acl entry (repeatable)")

    sp = add(sub, "grant", cmd_grant, help="assign a role to a member")
    sp.add_argument("--owner", required=True)
    sp.add_argument("--content", required=True)
    sp.add_argument("--member", required=True)
    sp.add_argument("--role", required=True)

    sp = add(sub, "revoke", cmd_revoke, help="revoke a policy, or drop one member with --member")
    sp.add_argument("--owner", required=True)
    sp.add_argument("--content", required=True)
    sp.add_argument("--member")

    policy = sub.add_parser("policy").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    add(policy, "show", cmd_policy_show).add_argument("id", help="policy id or content id")

    sp = add(sub, "get", cmd_get, help="fetch and decrypt content")
    sp.add_argument("--as", required=True)
    sp.add_argument("--content", required=True)
    sp.add_argument("--out")

    sp = add(sub, "forget", cmd_forget, help="revoke and destroy key shares")
    sp.add_argument("--owner", required=True)
    sp.add_argument("--content", required=True)

    acc = sub.add_parser("acc").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    add(acc, "delete", cmd_acc_delete).add_argument("--owner", required=True)

    net = sub.add_parser("net").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    add(net, "stats", cmd_net_stats)

    ledger = sub.add_parser("ledger").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    add(ledger, "verify", cmd_ledger_verify).add_argument("file", nargs="?")

    sp = add(sub, "run", cmd_run, help="execute a scenario file")
    sp.add_argument("scenario")
    sp.add_argument("--out")

    baseline = sub.add_parser("baseline").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = add(baseline, "compare", cmd_baseline_compare)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--contents", type=int, default=10)
    sp.add_argument("--size", type=int, default=1 << 20)
    sp.add_argument("--miners", type=int, default=6)
    sp.add_argument("--t", type=int, default=3)
    sp.add_argument("--n", type=int, default=5)
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        func = args.func
        if func in (cmd_ledger_verify, cmd_run, cmd_baseline_compare):
            return func(args)
        root = workspace.resolve(args.workspace)
        with workspace.locked(root):
            if func is cmd_init:
                return cmd_init(args, root)
            net = workspace.load(root)
            rc = func(args, net)
            if func not in READ_ONLY:
                workspace.save(net, root)
            return rc
    except UsageError as exc:
        print(json.dumps({"error": "UsageError", "message": str(exc)}), file=sys.stderr)
        return 2
    except (DosnError, workspace.WorkspaceError, OSError, ValueError) as exc:
        code = exc.code if isinstance(exc, DosnError) else type(exc).__name__
        print(json.dumps({"error": code, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
