"""Access Control Contract state machine.

Each owner address has exactly one contract holding that owner's policies.
Policy ids are global, sequential from 1, and never reused.  All mutation
happens through :meth:`AccessControl.apply`, which the ledger calls inside
its serialized submit path; handlers validate fully before touching state so
a rejected call leaves everything as it was.

RBAC model: a policy maps member address -> role and lists the roles allowed
to read.  Reading is the only right.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ContractDeactivated,
    MalformedTransaction,
    NotAnchored,
    NotOwner,
    PolicyRevoked,
    TooFewKeyHolders,
    UnknownPolicy,
)
from .merkle import merkle_root

ACTIVE = "active"
REVOKED = "revoked"

# Denied reasons
NO_POLICY = "NoPolicy"
NOT_IN_ACL = "NotInAcl"
ROLE_NOT_ALLOWED = "RoleNotAllowed"
REVOKED_REASON = "Revoked"

CONTRACT_OPS = ("create_policy", "update_policy", "revoke_policy", "check_access", "delete_acc")


@dataclass
class Policy:
    policy_id: int
    owner: str
    content_id: str
    acl: dict[str, str]
    allowed_roles: frozenset[str]
    key_holders: tuple[tuple[str, int], ...]
    leaf_cids: tuple[str, ...]
    shard_locations: dict[str, tuple[str, ...]]
    threshold: int
    status: str = ACTIVE
    revoked_at: int | None = None

    def to_json(self) -> dict:
        return {
            "policy_id": self.policy_id,
            "owner": self.owner,
            "content_id": self.content_id,
            "acl": dict(sorted(self.acl.items())),
            "allowed_roles": sorted(self.allowed_roles),
            "key_holders": [[a, x] for a, x in self.key_holders],
            "leaf_cids": list(self.leaf_cids),
            "shard_locations": {c: list(m) for c, m in sorted(self.shard_locations.items())},
            "threshold": self.threshold,
            "status": self.status,
            "revoked_at": self.revoked_at,
        }


@dataclass(frozen=True)
class AccessGrant:
    policy_id: int
    content_id: str
    root: str
    leaf_cids: tuple[str, ...]
    shard_locations: dict[str, tuple[str, ...]]
    key_holders: tuple[tuple[str, int], ...]
    threshold: int

    granted = True

    def to_json(self) -> dict:
        return {
            "granted": True,
            "policy_id": self.policy_id,
            "content_id": self.content_id,
            "root": self.root,
            "leaf_cids": list(self.leaf_cids),
            "shard_locations": {c: list(m) for c, m in self.shard_locations.items()},
            "key_holders": [[a, x] for a, x in self.key_holders],
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class Denied:
    reason: str

    granted = False

    def to_json(self) -> dict:
        return {"granted": False, "reason": self.reason}


@dataclass
class ContractState:
    owner: str
    policies: dict[int, Policy] = field(default_factory=dict)
    deactivated: bool = False

    def to_json(self) -> dict:
        return {
            "owner": self.owner,
            "deactivated": self.deactivated,
            "policies": [self.policies[k].to_json() for k in sorted(self.policies)],
        }


def _roles(value, what: str) -> frozenset[str]:
    if not isinstance(value, (list, tuple, set, frozenset)):
        raise MalformedTransaction(f"{what} must be a list of role names")
    for r in value:
        if not isinstance(r, str) or not r:
            raise MalformedTransaction(f"{what} contains an empty or non-string role")
    return frozenset(value)


def _acl(value) -> dict[str, str]:
    if not isinstance(value, dict):
        raise MalformedTransaction("acl must map address -> role")
    for addr, role in value.items():
        if not isinstance(addr, str) or not isinstance(role, str) or not role:
            raise MalformedTransaction("acl entries must be address -> non-empty role")
    return dict(value)


class AccessControl:
    def __init__(self):
        self.contracts: dict[str, ContractState] = {}
        self.policy_owner: dict[int, str] = {}
        self.next_policy_id = 1
        self.access_log: list[dict] = []

    # reads

    def contract(self, owner: str) -> ContractState | None:
        return self.contracts.get(owner)

    def policy(self, policy_id: int) -> Policy | None:
        owner = self.policy_owner.get(policy_id)
        if owner is None:
            return None
        return self.contracts[owner].policies[policy_id]

    def policies_for(self, content_id: str) -> list[Policy]:
        out = []
        for pid in sorted(self.policy_owner):
            p = self.policy(pid)
            if p.content_id == content_id:
                out.append(p)
        return out

    def decide(self, requester: str, policy_id: int, root: str | None = None) -> AccessGrant | Denied:
        """Pure access decision; raises ContractDeactivated for a deleted ACC."""
        p = self.policy(policy_id)
        if p is None:
            return Denied(NO_POLICY)
        if self.contracts[p.owner].deactivated:
            raise ContractDeactivated(f"contract of {p.owner[:12]} is deactivated")
        if p.status != ACTIVE:
            return Denied(REVOKED_REASON)
        role = p.acl.get(requester)
        if role is None:
            return Denied(NOT_IN_ACL)
        if role not in p.allowed_roles:
            return Denied(ROLE_NOT_ALLOWED)
        return grant_for(p, root if root is not None else p.content_id)

    def to_json(self) -> dict:
        return {
            "next_policy_id": self.next_policy_id,
            "contracts": [self.contracts[k].to_json() for k in sorted(self.contracts)],
            "access_log": self.access_log,
        }

    # writes

    def _own_contract(self, sender: str) -> ContractState:
        c = self.contracts.get(sender)
        if c is None:
            c = ContractState(sender)
        if c.deactivated:
            raise ContractDeactivated("sender's contract is deactivated")
        return c

    def _owned_policy(self, sender: str, payload: dict) -> Policy:
        pid = payload.get("policy_id")
        if not isinstance(pid, int):
            raise MalformedTransaction("policy_id must be an integer")
        p = self.policy(pid)
        if p is None:
            raise UnknownPolicy(f"no policy {pid}")
        if self.contracts[p.owner].deactivated:
            raise ContractDeactivated(f"policy {pid} belongs to a deactivated contract")
        if p.owner != sender:
            raise NotOwner(f"policy {pid} is not owned by sender")
        if p.status != ACTIVE:
            raise PolicyRevoked(f"policy {pid} is revoked")
        return p

    def apply(self, sender: str, payload: dict, anchors: dict, height: int):
        op = payload.get("op")
        if op == "create_policy":
            return self._create(sender, payload, anchors)
        if op == "update_policy":
            return self._update(sender, payload)
        if op == "revoke_policy":
            p = self._owned_policy(sender, payload)
            p.status = REVOKED
            p.revoked_at = height
            return {"policy_id": p.policy_id, "status": REVOKED}
        if op == "check_access":
            pid = payload.get("policy_id")
            if not isinstance(pid, int):
                raise MalformedTransaction("policy_id must be an integer")
            anchor = None
            p = self.policy(pid)
            if p is not None:
                anchor = anchors.get(p.content_id, {}).get("root")
            decision = self.decide(sender, pid, anchor)
            self.access_log.append({
                "height": height,
                "policy_id": pid,
                "requester": sender,
                "granted": decision.granted,
                "reason": None if decision.granted else decision.reason,
            })
            return decision
        if op == "delete_acc":
            target = payload.get("contract", sender)
            if target != sender:
                raise NotOwner("only the contract owner may delete it")
            c = self._own_contract(sender)
            c.deactivated = True
            self.contracts[sender] = c
            return {"contract": sender, "deactivated": True}
        raise MalformedTransaction(f"unknown contract op {op!r}")

    def _create(self, sender: str, payload: dict, anchors: dict) -> dict:
        contract = self._own_contract(sender)
        content_id = payload.get("content_id")
        anchor = anchors.get(content_id)
        if anchor is None:
            raise NotAnchored(f"content {str(content_id)[:12]} has no anchored root")
        if anchor["owner"] != sender:
            raise NotOwner("content root was anchored by another address")
        acl = _acl(payload.get("acl", {}))
        allowed = _roles(payload.get("allowed_roles", []), "allowed_roles")
        t = payload.get("threshold")
        if not isinstance(t, int) or t < 1:
            raise MalformedTransaction("threshold must be a positive integer")
        try:
            holders = tuple((str(a), int(x)) for a, x in payload.get("key_holders", []))
        except (TypeError, ValueError):
            raise MalformedTransaction("key_holders must be [address, x] pairs") from None
        if len({a for a, _ in holders}) != len(holders) or len({x for _, x in holders}) != len(holders):
            raise MalformedTransaction("key_holders must list distinct miners and share indexes")
        if len(holders) < t:
            raise TooFewKeyHolders(f"{len(holders)} key holders for threshold {t}")
        leaf_cids = tuple(payload.get("leaf_cids", []))
        if not leaf_cids or merkle_root(list(leaf_cids)) != anchor["root"]:
            raise MalformedTransaction("leaf_cids do not match the anchored root")
        locations = payload.get("shard_locations", {})
        if not isinstance(locations, dict) or set(locations) != set(leaf_cids):
            raise MalformedTransaction("shard_locations must cover exactly the leaf cids")
        pid = self.next_policy_id
        policy = Policy(
            policy_id=pid,
            owner=sender,
            content_id=content_id,
            acl=acl,
            allowed_roles=allowed,
            key_holders=holders,
            leaf_cids=leaf_cids,
            shard_locations={c: tuple(m) for c, m in locations.items()},
            threshold=t,
        )
        contract.policies[pid] = policy
        self.contracts[sender] = contract
        self.policy_owner[pid] = sender
        self.next_policy_id += 1
        return {"policy_id": pid}

    def _update(self, sender: str, payload: dict) -> dict:
        p = self._owned_policy(sender, payload)
        acl = _acl(payload["acl"]) if payload.get("acl") is not None else None
        allowed = (_roles(payload["allowed_roles"], "allowed_roles")
                   if payload.get("allowed_roles") is not None else None)
        if acl is not None:
            p.acl = acl
        if allowed is not None:
            p.allowed_roles = allowed
        return {"policy_id": p.policy_id}


def grant_for(policy: Policy, root: str) -> AccessGrant:
    """The grant an authorized requester receives for ``policy``."""
    return AccessGrant(
        policy_id=policy.policy_id,
        content_id=policy.content_id,
        root=root,
        leaf_cids=policy.leaf_cids,
        shard_locations=dict(policy.shard_locations),
        key_holders=policy.key_holders,
        threshold=policy.threshold,
    )
