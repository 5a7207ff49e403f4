import json

import pytest

from dosn.crypto import KeyPair
from dosn.ledger import (
    Block,
    Ledger,
    Transaction,
    anchor_root,
    genesis,
    replay,
    replay_transactions,
    verify_chain,
)
from dosn.errors import ChainInvalid
from dosn.rng import Rng

ROOT_A = "aa" * 32
ROOT_B = "bb" * 32


@pytest.fixture
def keys():
    rng = Rng(0)
    return KeyPair.generate(rng), KeyPair.generate(rng)


def test_genesis_and_first_height(keys):
    led = Ledger()
    assert led.height == 0 and led.blocks[0].parent_digest == "00" * 32
    empty_digest = led.get_state_digest()
    assert Ledger().get_state_digest() == empty_digest
    r = anchor_root(led, keys[0], ROOT_A, ROOT_A)
    assert r.accepted and r.height == 1
    assert led.get_state_digest() != empty_digest


def test_reused_nonce_rejected(keys):
    led = Ledger()
    tx = Transaction.create(keys[0], 1, {"op": "anchor_root", "content_id": ROOT_A, "root": ROOT_A})
    assert led.submit(tx).accepted
    before = led.get_state_digest()
    again = Transaction.create(keys[0], 1, {"op": "anchor_root", "content_id": ROOT_B, "root": ROOT_B})
    r = led.submit(again)
    assert r.reason == "BadNonce" and r.height is None
    assert led.get_state_digest() == before and led.height == 1


def test_bad_signature(keys):
    a, b = keys
    led = Ledger()
    forged = Transaction.create(b, 1, {"op": "anchor_root", "content_id": ROOT_A, "root": ROOT_A})
    forged = Transaction(a.address, 1, forged.payload, forged.signature)
    assert led.submit(forged).reason == "BadSignature"


def test_anchor_get_root_duplicate(keys):
    led = Ledger()
    anchor_root(led, keys[0], ROOT_A, ROOT_A).raise_for_status()
    assert led.get_root(ROOT_A) == ROOT_A
    assert led.get_root(ROOT_B) is None
    r = anchor_root(led, keys[1], ROOT_A, ROOT_A)
    assert r.reason == "DuplicateContent"


def test_malformed_payloads_rejected(keys):
    led = Ledger()
    for payload in ({"op": "nope"}, {"no": "op"}, {"op": "anchor_root", "content_id": 1, "root": "x"}):
        assert not led.transact(keys[0], payload).accepted
    assert led.height == 0


def test_replay_and_identical_logs(keys):
    led = Ledger()
    anchor_root(led, keys[0], ROOT_A, ROOT_A)
    anchor_root(led, keys[1], ROOT_B, ROOT_B)
    assert verify_chain(led.blocks) == led.get_state_digest()
    assert replay_transactions(led.transactions()).get_state_digest() == led.get_state_digest()
    assert replay(led.blocks).blocks[-1].digest == led.blocks[-1].digest


def test_chain_corruption_detected(keys):
    led = Ledger()
    for i in range(4):
        anchor_root(led, keys[i % 2], f"{i:064x}", f"{i:064x}")
    blocks = [Block.from_json(b.to_json()) for b in led.blocks]
    blocks[2].txs[0].payload["root"] = "ff" * 32
    with pytest.raises(ChainInvalid):
        verify_chain(blocks)
    # re-sealing the mutated block breaks the link from its successor
    blocks[2].txs[0] = Transaction.create(keys[1], 1, {"op": "anchor_root", "content_id": "e" * 64, "root": "e" * 64})
    blocks[2].seal()
    with pytest.raises(ChainInvalid):
        verify_chain(blocks)


def test_save_load_roundtrip(tmp_path, keys):
    led = Ledger()
    anchor_root(led, keys[0], ROOT_A, ROOT_A)
    path = tmp_path / "ledger.jsonl"
    led.save(path)
    assert len(path.read_text().splitlines()) == 2
    assert Ledger.load(path).get_state_digest() == led.get_state_digest()
    lines = path.read_text().splitlines()
    b = json.loads(lines[1])
    b["txs"][0]["payload"]["root"] = ROOT_B
    path.write_text(lines[0] + "\n" + json.dumps(b) + "\n")
    with pytest.raises(ChainInvalid):
        Ledger.load(path)


def test_batched_blocks(keys):
    led = Ledger(block_size=3)
    for i in range(5):
        assert anchor_root(led, keys[0], f"{i:064x}", f"{i:064x}").height == 1 + i // 3
    assert led.height == 1 and len(led.pending) == 2
    led.seal()
    assert [len(b.txs) for b in led.blocks] == [0, 3, 2]
    assert verify_chain(led.blocks) == led.get_state_digest()


def test_genesis_tamper(keys):
    g = genesis()
    g.parent_digest = "11" * 32
    with pytest.raises(ChainInvalid):
        verify_chain([g])
