"""Scripted scenarios: build a network from JSON, run operations, emit a report.

Scenario schema::

    {
      "seed": 42,
      "miners": 6,                      # count, or a list of names
      "users": ["alice", "bob"],
      "behaviors": {"m3": "tamper"},
      "operations": [
        {"op": "post", "owner": "alice", "text": "hi", "t": 3, "n": 5, "r": 2,
         "acl": {"bob": "friend"}, "allow": ["friend"], "label": "p1"},
        {"op": "get", "as": "bob", "content": "p1", "expect": "ok"},
        ...
      ]
    }

Content for ``post`` is one of ``text``, ``hex`` or ``random_bytes`` (a
length drawn from the scenario seed).  Other ops: ``grant``,
``remove_member``, ``update``, ``revoke``, ``forget``, ``delete_acc``,
``set_behavior``.  Any op may carry ``expect``: ``"ok"``, a fetch failure
reason, or an error class name.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import DosnError
from .ledger import verify_chain
from .protocol import DOSN, PublishParams
from .rng import Rng


def _content(op: dict, rng: Rng) -> bytes:
    if "text" in op:
        return op["text"].encode()
    if "hex" in op:
        return bytes.fromhex(op["hex"])
    if "random_bytes" in op:
        return rng.randbytes(int(op["random_bytes"]))
    raise ValueError("post needs text, hex or random_bytes")


def build_network(scenario: dict) -> DOSN:
    net = DOSN(int(scenario.get("seed", 0)))
    miners = scenario.get("miners", 6)
    names = [f"m{i}" for i in range(1, miners + 1)] if isinstance(miners, int) else list(miners)
    for name in names:
        net.add_miner(name)
    for user in scenario.get("users", []):
        net.add_user(user)
    for name, behavior in scenario.get("behaviors", {}).items():
        net.storage.by_name(name).behavior = behavior
    return net


def run_scenario(scenario: dict) -> dict:
    net = build_network(scenario)
    data_rng = Rng(f"content:{scenario.get('seed', 0)}")
    labels: dict[str, str] = {}
    posted: dict[str, bytes] = {}
    results = []

    def cid_of(ref: str) -> str:
        return labels.get(ref, ref)

    def addr(name: str) -> str:
        return net.users[name].address if name in net.users else name

    for i, op in enumerate(scenario.get("operations", [])):
        kind = op["op"]
        res: dict = {"index": i, "op": kind}
        try:
            if kind == "post":
                content = _content(op, data_rng)
                params = PublishParams(op.get("t", 3), op.get("n", 5), op.get("r", 2),
                                       op.get("chunk_size", PublishParams.chunk_size))
                acl = {addr(u): role for u, role in op.get("acl", {}).items()}
                rec = net.publish(net.users[op["owner"]], content, acl, op.get("allow", []), params)
                labels[op.get("label", rec.content_id)] = rec.content_id
                posted[rec.content_id] = content
                res.update(ok=True, content_id=rec.content_id, policy_id=rec.policy_id,
                           leaves=len(rec.manifest.leaf_cids))
            elif kind == "get":
                content_id = cid_of(op["content"])
                out = net.fetch(net.users[op["as"]], content_id)
                res.update(out.to_json())
                if out.ok:
                    res["bytes_match"] = out.plaintext == posted.get(content_id)
            elif kind == "grant":
                net.grant(net.users[op["owner"]], cid_of(op["content"]), addr(op["member"]), op["role"])
                res["ok"] = True
            elif kind == "remove_member":
                net.remove_member(net.users[op["owner"]], cid_of(op["content"]), addr(op["member"]))
                res["ok"] = True
            elif kind == "update":
                acl = op.get("acl")
                if acl is not None:
                    acl = {addr(u): role for u, role in acl.items()}
                net.update_policy(net.users[op["owner"]], cid_of(op["content"]), acl, op.get("allow"))
                res["ok"] = True
            elif kind == "revoke":
                net.revoke(net.users[op["owner"]], cid_of(op["content"]))
                res["ok"] = True
            elif kind == "forget":
                net.forget(net.users[op["owner"]], cid_of(op["content"]))
                res["ok"] = True
            elif kind == "delete_acc":
                net.delete_acc(net.users[op["owner"]])
                res["ok"] = True
            elif kind == "set_behavior":
                net.storage.by_name(op["miner"]).behavior = op["behavior"]
                res["ok"] = True
            else:
                raise ValueError(f"unknown scenario op {kind!r}")
        except DosnError as exc:
            res.update(ok=False, error=exc.code, detail=str(exc))
        if "expect" in op:
            got = "ok" if res.get("ok") else res.get("reason") or res.get("error")
            res["expected"] = op["expect"]
            res["matches_expectation"] = got == op["expect"]
        results.append(res)

    live = net.ledger.get_state_digest()
    return {
        "seed": scenario.get("seed", 0),
        "results": results,
        "wrong_plaintext_events": sum(1 for r in results if r.get("bytes_match") is False),
        "all_expectations_met": all(r.get("matches_expectation", True) for r in results),
        "state_digest": live,
        "replay_digest": verify_chain(net.ledger.blocks),
        "height": net.ledger.height,
        "stats": net.storage.stats(),
    }


def run_file(path) -> dict:
    return run_scenario(json.loads(Path(path).read_text()))
