"""Shared builders for tests: deterministic keypairs, groups, votes, chains."""

from __future__ import annotations

import hashlib

from pact import consensus, core, ledger


def seeded_keypair(tag: str) -> core.KeyPair:
    return core.generate_keypair(hashlib.sha256(tag.encode("utf-8")).digest())


def make_group(group_id: str = "g1", n: int = 3):
    """Group with signatories s1..sN; returns (group, {signatory_id: keypair})."""
    keys = {f"s{i + 1}": seeded_keypair(f"{group_id}/s{i + 1}") for i in range(n)}
    signatories = [consensus.Signatory(sid, kp.public_key) for sid, kp in keys.items()]
    return consensus.create_group(group_id, signatories), keys


def cast(proposal, signatory_id, keypair, vote=True, submitted_hash=None):
    """Sign and cast a vote; defaults to confirming the expected hash."""
    digest = proposal.expected_hash if submitted_hash is None else submitted_hash
    signature = core.sign(
        keypair.private_key, consensus.vote_message(proposal.id, digest, vote)
    )
    return consensus.cast_vote(proposal, signatory_id, digest, vote, signature)


def approve(proposal, keys):
    """All signatories confirm with yes votes."""
    for sid, kp in keys.items():
        cast(proposal, sid, kp)
    return proposal


class ChainBuilder:
    """Drives the real ownership-signing and mining flow block by block,
    without going through the consensus layer."""

    def __init__(self, difficulty: int = 2):
        self.root = seeded_keypair("root-owner")
        self.chain = ledger.new_chain(self.root.public_key, difficulty)
        self.owner_keys = {self.root.public_key: self.root}
        self._counter = 0

    def make_block(
        self,
        contract_id: str | None = None,
        parent_contract_id: str = "",
        contract_hash: str | None = None,
        signatory_ids: tuple[str, ...] = ("s1", "s2"),
        miner_id: str = "m1",
        timestamp: int | None = None,
        owner: core.KeyPair | None = None,
    ) -> ledger.Block:
        """Mine a valid candidate on the current tip (does not append)."""
        self._counter += 1
        if owner is None:
            owner = seeded_keypair(f"owner-{self._counter}")
        if contract_id is None:
            contract_id = f"{self._counter:032x}"
        if contract_hash is None:
            contract_hash = core.sha256_hex(f"contract {self._counter}\n".encode())
        prev = self.chain.tip
        prev_owner = self.owner_keys[prev.header.payload.owner_pubkey]
        sig = core.sign(
            prev_owner.private_key,
            ledger.ownership_message(contract_hash, owner.public_key, prev.hash),
        )
        payload = ledger.BlockPayload(
            contract_id=contract_id,
            parent_contract_id=parent_contract_id,
            contract_hash=contract_hash,
            signatory_ids=tuple(sorted(signatory_ids)),
            owner_pubkey=owner.public_key,
            prev_owner_sig=sig,
        )
        header = ledger.BlockHeader(
            index=prev.header.index + 1,
            timestamp=timestamp if timestamp is not None else 1_700_000_000 + self._counter,
            miner_id=miner_id,
            payload=payload,
            prev_hash=prev.hash,
            nonce=0,
        )
        block = ledger.mine(header, self.chain.difficulty)
        self.owner_keys[owner.public_key] = owner
        return block

    def add_block(self, **kwargs) -> ledger.Block:
        block = self.make_block(**kwargs)
        result = ledger.append_block(self.chain, block, [True])
        assert result.accepted
        return block
