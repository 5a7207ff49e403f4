"""On-disk workspace for the command-line front end.

Layout (format version 1)::

    <root>/workspace.json      seed, rng state, nonce counter, miner order, content records
    <root>/ledger.jsonl        one committed block per line
    <root>/miners/<addr>.json  one miner's holdings and behavior
    <root>/users/<name>.json   user keystore (signing key in hex)
"""
from __future__ import annotations

import fcntl
import json
import os
from contextlib import contextmanager
from pathlib import Path

from .crypto import KeyPair, NonceSource
from .ledger import Ledger, canonical_json, digest
from .protocol import DOSN, ContentRecord
from .rng import Rng
from .storage import MinerRecord

FORMAT_VERSION = 1
ENV_VAR = "DOSN_WORKSPACE"
DEFAULT_DIR = ".dosn"


class WorkspaceError(Exception):
    pass


def resolve(path=None) -> Path:
    return Path(path or os.environ.get(ENV_VAR) or DEFAULT_DIR)


@contextmanager
def locked(root: Path):
    root.mkdir(parents=True, exist_ok=True)
    with open(root / ".lock", "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def save(net: DOSN, root: Path) -> None:
    (root / "miners").mkdir(parents=True, exist_ok=True)
    (root / "users").mkdir(parents=True, exist_ok=True)
    net.ledger.save(root / "ledger.jsonl")
    for addr, miner in net.storage.miners.items():
        _write_json(root / "miners" / f"{addr}.json", miner.to_json())
    for name, kp in net.users.items():
        _write_json(root / "users" / f"{name}.json",
                    {"name": name, "address": kp.address, "signing_key": kp.signing_key.hex()})
    _write_json(root / "workspace.json", {
        "format_version": FORMAT_VERSION,
        "seed": net.seed,
        "rng_state": net.rng.getstate(),
        "nonce": {"prefix": net.nonces.prefix.hex(), "counter": net.nonces.counter},
        "miners": list(net.storage.miners),
        "users": list(net.users),
        "records": [r.to_json() for r in net.records.values()],
    })


def load(root: Path) -> DOSN:
    meta_path = root / "workspace.json"
    if not meta_path.exists():
        raise WorkspaceError(f"no workspace at {root}; run 'dosn init' first")
    meta = json.loads(meta_path.read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise WorkspaceError(f"unsupported workspace format {meta.get('format_version')}")
    net = DOSN(meta["seed"])
    net.rng = Rng.from_state(meta["rng_state"])
    net.nonces = NonceSource(None, bytes.fromhex(meta["nonce"]["prefix"]), meta["nonce"]["counter"])
    net.ledger = Ledger.load(root / "ledger.jsonl")
    for addr in meta["miners"]:
        rec = MinerRecord.from_json(json.loads((root / "miners" / f"{addr}.json").read_text()))
        net.storage.miners[addr] = rec
    for name in meta["users"]:
        u = json.loads((root / "users" / f"{name}.json").read_text())
        kp = KeyPair.from_signing_key(bytes.fromhex(u["signing_key"]))
        if kp.address != u["address"]:
            raise WorkspaceError(f"keystore for {name} does not match its address")
        net.users[name] = kp
    for r in meta["records"]:
        rec = ContentRecord.from_json(r)
        net.records[rec.content_id] = rec
    return net


def snapshot_digest(net: DOSN) -> str:
    """Digest over everything a workspace persists."""
    return digest(canonical_json({
        "ledger": net.ledger.get_state_digest(),
        "head": net.ledger.blocks[-1].digest,
        "miners": [m.to_json() for m in net.storage.miners.values()],
        "users": {n: k.address for n, k in net.users.items()},
        "records": [r.to_json() for r in net.records.values()],
        "rng": net.rng.getstate(),
        "nonce": [net.nonces.prefix.hex(), net.nonces.counter],
    }))
