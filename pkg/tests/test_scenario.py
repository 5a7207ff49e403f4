import json

from dosn.cli import main
from dosn.scenario import run_scenario

SCENARIO = {
    "seed": 5,
    "miners": 6,
    "users": ["alice", "bob", "carol"],
    "operations": [
        {"op": "post", "owner": "alice", "random_bytes": 300000, "t": 3, "n": 5, "r": 2,
         "chunk_size": 65536, "acl": {"bob": "friend"}, "allow": ["friend"], "label": "p1"},
        {"op": "get", "as": "bob", "content": "p1", "expect": "ok"},
        {"op": "get", "as": "carol", "content": "p1", "expect": "AccessDenied"},
        {"op": "grant", "owner": "alice", "content": "p1", "member": "carol", "role": "family"},
        {"op": "get", "as": "carol", "content": "p1", "expect": "AccessDenied"},
        {"op": "update", "owner": "alice", "content": "p1", "allow": ["friend", "family"]},
        {"op": "get", "as": "carol", "content": "p1", "expect": "ok"},
        {"op": "set_behavior", "miner": "m2", "behavior": "tamper"},
        {"op": "get", "as": "bob", "content": "p1", "expect": "ok"},
        {"op": "revoke", "owner": "bob", "content": "p1", "expect": "NotOwner"},
        {"op": "forget", "owner": "alice", "content": "p1", "expect": "ok"},
        {"op": "get", "as": "bob", "content": "p1", "expect": "AccessDenied"},
        {"op": "delete_acc", "owner": "alice", "expect": "ok"},
    ],
}


def test_scenario_report():
    rep = run_scenario(SCENARIO)
    assert rep["all_expectations_met"], [r for r in rep["results"] if not r.get("matches_expectation", True)]
    assert rep["wrong_plaintext_events"] == 0
    assert rep["state_digest"] == rep["replay_digest"]
    assert run_scenario(SCENARIO)["state_digest"] == rep["state_digest"]


def test_run_command(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(SCENARIO))
    out = tmp_path / "report.json"
    assert main(["run", str(path), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["all_expectations_met"]
    bad = dict(SCENARIO, operations=[{"op": "delete_acc", "owner": "alice", "expect": "NotOwner"}])
    path.write_text(json.dumps(bad))
    assert main(["run", str(path)]) == 1
