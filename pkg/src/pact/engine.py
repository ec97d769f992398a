"""Application engine tying consensus, ledger, and persistence together.

One engine owns one data directory. All consensus activity is event-sourced:
mutations append to the event log first, and opening a directory replays the
log (and cross-checks the chain file) to rebuild exactly the state that wrote
it. Private keys for the platform-custodied signatories and version owners
live only in the vault.

Keypair minting goes through a persisted counter; when the engine is created
with a fixed ``key_seed`` every minted key is derived as
``sha256(key_seed || counter)``, which makes whole scenarios byte-for-byte
reproducible across runs and restarts.
"""

from __future__ import annotations

import hashlib
import time
from pathlib import Path
from typing import Callable

from . import consensus, core, ledger, simnet, store
from .errors import (
    CorruptLogError,
    DuplicateGroupError,
    InvalidChainError,
    NotASignatoryError,
    QuorumNotReachedError,
    UnknownContractError,
    UnknownGroupError,
    UnknownProposalError,
)

DEFAULT_SERVICE_DIFFICULTY = 2
DEFAULT_MINER_COUNT = 5

ROOT_OWNER_ID = "root"


class Engine:
    def __init__(
        self,
        data_dir: str | Path,
        difficulty: int = DEFAULT_SERVICE_DIFFICULTY,
        miner_count: int = DEFAULT_MINER_COUNT,
        clock: Callable[[], int] | None = None,
        key_seed: bytes | None = None,
        fsync: bool = False,
    ) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock if clock is not None else lambda: int(time.time())
        self._key_seed = key_seed

        # An existing directory's recorded parameters win over the arguments;
        # difficulty is baked into already-mined blocks.
        existing = store.read_config(self.data_dir / store.CONFIG_FILE)
        if existing is not None:
            difficulty, miner_count = existing.difficulty, existing.miner_count
        else:
            if difficulty < 0:
                raise ValueError("difficulty must be non-negative")
            if miner_count < 1:
                raise ValueError("miner_count must be at least 1")
            store.write_config(
                self.data_dir / store.CONFIG_FILE,
                store.StoreConfig(difficulty=difficulty, miner_count=miner_count),
            )
        self.difficulty = difficulty
        self.miner_count = miner_count
        self.miners = [simnet.MinerProfile(f"m{i + 1}") for i in range(miner_count)]

        self.vault = store.KeyVault(self.data_dir / store.VAULT_FILE)
        self.texts = store.TextStore(self.data_dir / store.TEXTS_DIR)
        self.chain_file = store.ChainFile(self.data_dir / store.CHAIN_FILE, fsync=fsync)
        self.events = store.EventLog(self.data_dir / store.EVENTS_FILE, fsync=fsync)

        self.groups: dict[str, consensus.ConsensusGroup] = {}
        self.proposals: dict[str, consensus.Proposal] = {}
        self.versions: dict[str, consensus.ContractVersion] = {}
        self.version_by_proposal: dict[str, str] = {}
        self.owner_id_by_pubkey: dict[str, str] = {}
        self.version_block_index: dict[str, int] = {}

        blocks = self.chain_file.read_blocks()
        if blocks is None:
            root = self._mint_keypair()
            self.vault.put(f"owner/{ROOT_OWNER_ID}", root.private_key)
            self.chain = ledger.new_chain(root.public_key, self.difficulty)
            self.chain_file.append(self.chain.blocks[0])
        else:
            self.chain = ledger.Chain(blocks=blocks, difficulty=self.difficulty)
            verdict = ledger.verify_chain(self.chain)
            if not verdict.valid:
                raise InvalidChainError(
                    f"persisted chain fails verification at index "
                    f"{verdict.first_bad_index} ({verdict.rule})"
                )
        self.owner_id_by_pubkey[self.chain.root_owner_pubkey] = ROOT_OWNER_ID

        self._replay(self.events.read_all())

    # -- key custody ---------------------------------------------------

    def _mint_keypair(self) -> core.KeyPair:
        counter = self.vault.next_counter()
        if self._key_seed is None:
            return core.generate_keypair()
        seed = hashlib.sha256(self._key_seed + counter.to_bytes(8, "big")).digest()
        return core.generate_keypair(seed)

    def _signatory_key_id(self, group_id: str, signatory_id: str) -> str:
        return f"signatory/{group_id}/{signatory_id}"

    # -- replay ----------------------------------------------------------

    def _replay(self, records: list[store.EventRecord]) -> None:
        accepted_blocks = 0
        for record in records:
            body = record.body
            try:
                if record.kind == "group_created":
                    self._register_group(
                        consensus.create_group(
                            body["group_id"],
                            [
                                consensus.Signatory(
                                    s["id"], s["public_key"], s.get("display_name", "")
                                )
                                for s in body["signatories"]
                            ],
                        )
                    )
                elif record.kind == "proposal_opened":
                    group = self.groups[body["group_id"]]
                    proposal = consensus.open_proposal(
                        group,
                        self._group_proposals(group),
                        self._group_versions(group.id),
                        self.texts.get(body["expected_hash"]),
                        kind=body["kind"],
                        parent_version_id=body["parent_version_id"],
                    )
                    if proposal.id != body["proposal_id"]:
                        raise CorruptLogError(
                            f"replay produced proposal {proposal.id}, "
                            f"log says {body['proposal_id']}"
                        )
                    self.proposals[proposal.id] = proposal
                elif record.kind == "vote_cast":
                    proposal = self.proposals[body["proposal_id"]]
                    consensus.cast_vote(
                        proposal,
                        body["signatory_id"],
                        body["submitted_hash"],
                        body["vote"],
                        body["vote_signature"],
                    )
                    if proposal.status != body["status_after"]:
                        raise CorruptLogError(
                            f"replay of vote on {proposal.id} reached status "
                            f"{proposal.status}, log says {body['status_after']}"
                        )
                elif record.kind == "proposal_finalized":
                    proposal = self.proposals[body["proposal_id"]]
                    if consensus.tally(proposal) != "approved":
                        raise CorruptLogError(
                            f"log finalizes {proposal.id} but replayed tally is "
                            f"{consensus.tally(proposal)}"
                        )
                    proposal.status = "approved"
                    self._register_version(proposal, body["version_id"], body["owner_pubkey"])
                elif record.kind == "block_accepted":
                    accepted_blocks += 1
                    index = body["index"]
                    if (
                        index >= len(self.chain.blocks)
                        or self.chain.blocks[index].hash != body["hash"]
                    ):
                        raise InvalidChainError(
                            f"event log records block {index} ({body['hash'][:12]}…) "
                            "that the chain file does not contain"
                        )
                    self.version_block_index[body["contract_id"]] = index
            except (CorruptLogError, InvalidChainError):
                raise
            except Exception as exc:
                raise CorruptLogError(
                    f"event {record.seq} ({record.kind}) does not replay: {exc}"
                ) from exc
        if accepted_blocks != len(self.chain.blocks) - 1:
            raise InvalidChainError(
                f"chain file has {len(self.chain.blocks) - 1} mined blocks but the "
                f"event log records {accepted_blocks}"
            )

    def _register_group(self, group: consensus.ConsensusGroup) -> None:
        self.groups[group.id] = group

    def _register_version(
        self, proposal: consensus.Proposal, version_id: str, owner_pubkey: str
    ) -> None:
        expected = consensus.derive_version_id(proposal.id, proposal.expected_hash)
        if version_id != expected:
            raise CorruptLogError(
                f"version id {version_id} does not derive from proposal {proposal.id}"
            )
        version = consensus.ContractVersion(
            version_id=version_id,
            group_id=proposal.group_id,
            kind=proposal.kind,
            parent_version_id=proposal.parent_version_id,
            text=proposal.text,
            digest=proposal.expected_hash,
        )
        self.versions[version_id] = version
        self.version_by_proposal[proposal.id] = version_id
        self.owner_id_by_pubkey[owner_pubkey] = f"owner-{version_id[:12]}"

    def _group_proposals(self, group: consensus.ConsensusGroup) -> list[consensus.Proposal]:
        return [self.proposals[pid] for pid in group.proposal_ids if pid in self.proposals]

    def _group_versions(self, group_id: str) -> dict[str, consensus.ContractVersion]:
        return {
            vid: v for vid, v in self.versions.items() if v.group_id == group_id
        }

    # -- mutations -------------------------------------------------------

    def create_group(
        self, signatories: list[dict], group_id: str | None = None
    ) -> dict:
        """Register a group, minting a custodied keypair per signatory.

        ``signatories`` entries carry ``id`` and optional ``display_name``.
        """
        if group_id is None:
            group_id = f"g{len(self.groups) + 1}"
        if group_id in self.groups:
            raise DuplicateGroupError(f"group {group_id!r} already exists")
        # Validate ids before any key is minted so failed calls leave the
        # vault untouched.
        probe = [consensus.Signatory(s["id"], "0" * 64) for s in signatories]
        consensus.create_group(group_id, probe)
        members: list[consensus.Signatory] = []
        for entry in signatories:
            keypair = self._mint_keypair()
            self.vault.put(self._signatory_key_id(group_id, entry["id"]), keypair.private_key)
            members.append(
                consensus.Signatory(
                    entry["id"], keypair.public_key, entry.get("display_name", "")
                )
            )
        group = consensus.create_group(group_id, members)
        self._register_group(group)
        self.events.append(
            "group_created",
            {
                "group_id": group_id,
                "signatories": [
                    {"id": s.id, "public_key": s.public_key, "display_name": s.display_name}
                    for s in group.signatories
                ],
            },
            self.clock(),
        )
        return self.group_view(group_id)

    def open_proposal(
        self,
        group_id: str,
        text: str,
        kind: str = "original",
        parent_version_id: str = "",
    ) -> dict:
        group = self.groups.get(group_id)
        if group is None:
            raise UnknownGroupError(f"no group {group_id!r}")
        proposal = consensus.open_proposal(
            group,
            self._group_proposals(group),
            self._group_versions(group_id),
            text,
            kind=kind,
            parent_version_id=parent_version_id,
        )
        self.texts.put(proposal.text)
        self.proposals[proposal.id] = proposal
        self.events.append(
            "proposal_opened",
            {
                "proposal_id": proposal.id,
                "group_id": group_id,
                "kind": proposal.kind,
                "parent_version_id": proposal.parent_version_id,
                "expected_hash": proposal.expected_hash,
            },
            self.clock(),
        )
        return self.proposal_view(proposal.id)

    def sign_vote(
        self, proposal_id: str, signatory_id: str, submitted_hash: str, vote: bool
    ) -> str:
        """Sign a vote with the signatory's custodied key."""
        proposal = self._proposal(proposal_id)
        if signatory_id not in proposal.signatory_pubkeys:
            raise NotASignatoryError(
                f"{signatory_id!r} is not a signatory of proposal {proposal_id!r}"
            )
        core.validate_digest(submitted_hash)
        private_key = self.vault.get(
            self._signatory_key_id(proposal.group_id, signatory_id)
        )
        return core.sign(
            private_key, consensus.vote_message(proposal_id, submitted_hash, vote)
        )

    def cast_vote(
        self,
        proposal_id: str,
        signatory_id: str,
        submitted_hash: str,
        vote: bool,
        signature: str | None = None,
    ) -> dict:
        """Record a vote; signs with the custodied key when none is supplied."""
        proposal = self._proposal(proposal_id)
        if signature is None:
            signature = self.sign_vote(proposal_id, signatory_id, submitted_hash, vote)
        consensus.cast_vote(proposal, signatory_id, submitted_hash, vote, signature)
        self.events.append(
            "vote_cast",
            {
                "proposal_id": proposal_id,
                "signatory_id": signatory_id,
                "submitted_hash": submitted_hash,
                "vote": vote,
                "vote_signature": signature,
                "status_after": proposal.status,
            },
            self.clock(),
        )
        return self.proposal_view(proposal_id)

    def finalize(self, proposal_id: str, miner_id: str = "m1") -> dict:
        """Freeze an approved proposal, mine its block, and run the miner vote.

        The new version's owner key is minted and custodied; the previous
        block's owner signs the handoff; the block is accepted onto the chain
        when the miner quorum vouches for it.
        """
        proposal = self._proposal(proposal_id)
        version, owner = consensus.finalize(
            proposal, owner_seed=self._owner_seed()
        )
        self.vault.put(f"owner/{owner.id}", owner.keypair.private_key)

        prev = self.chain.tip
        prev_owner_id = self.owner_id_by_pubkey[prev.header.payload.owner_pubkey]
        handoff = core.sign(
            self.vault.get(f"owner/{prev_owner_id}"),
            ledger.ownership_message(
                version.digest, owner.keypair.public_key, prev.hash
            ),
        )
        payload = ledger.BlockPayload(
            contract_id=version.version_id,
            parent_contract_id=version.parent_version_id,
            contract_hash=version.digest,
            signatory_ids=tuple(sorted(proposal.signatory_pubkeys)),
            owner_pubkey=owner.keypair.public_key,
            prev_owner_sig=handoff,
        )
        template = ledger.BlockHeader(
            index=prev.header.index + 1,
            timestamp=self.clock(),
            miner_id=miner_id,
            payload=payload,
            prev_hash=prev.hash,
            nonce=0,
        )
        block = ledger.mine(template, self.chain.difficulty)
        verdicts = simnet.vote_on_block(self.miners, self.chain, block)
        result = ledger.append_block(self.chain, block, verdicts)
        if not result.accepted:
            raise QuorumNotReachedError(
                f"miner vote {result.yes_count}/{len(verdicts)} fell short of "
                f"threshold {result.threshold}"
            )
        self.chain_file.append(block)
        self._register_version(proposal, version.version_id, owner.keypair.public_key)
        self.version_block_index[version.version_id] = block.header.index
        now = self.clock()
        self.events.append(
            "proposal_finalized",
            {
                "proposal_id": proposal_id,
                "version_id": version.version_id,
                "owner_id": owner.id,
                "owner_pubkey": owner.keypair.public_key,
            },
            now,
        )
        self.events.append(
            "block_accepted",
            {
                "index": block.header.index,
                "hash": block.hash,
                "contract_id": version.version_id,
                "miner_id": miner_id,
                "yes_count": result.yes_count,
                "threshold": result.threshold,
            },
            now,
        )
        return {
            "proposal_id": proposal_id,
            "version_id": version.version_id,
            "owner_pubkey": owner.keypair.public_key,
            "block_index": block.header.index,
            "yes_count": result.yes_count,
            "threshold": result.threshold,
            "block": store.block_to_record(block),
        }

    def _owner_seed(self) -> bytes | None:
        if self._key_seed is None:
            self.vault.next_counter()
            return None
        counter = self.vault.next_counter()
        return hashlib.sha256(self._key_seed + counter.to_bytes(8, "big")).digest()

    # -- queries ---------------------------------------------------------

    def _proposal(self, proposal_id: str) -> consensus.Proposal:
        proposal = self.proposals.get(proposal_id)
        if proposal is None:
            raise UnknownProposalError(f"no proposal {proposal_id!r}")
        return proposal

    def group_view(self, group_id: str) -> dict:
        group = self.groups.get(group_id)
        if group is None:
            raise UnknownGroupError(f"no group {group_id!r}")
        return {
            "id": group.id,
            "signatories": [
                {"id": s.id, "display_name": s.display_name, "public_key": s.public_key}
                for s in group.signatories
            ],
            "proposal_ids": list(group.proposal_ids),
        }

    def proposal_view(self, proposal_id: str) -> dict:
        p = self._proposal(proposal_id)
        version_id = self.version_by_proposal.get(proposal_id)
        return {
            "id": p.id,
            "group_id": p.group_id,
            "kind": p.kind,
            "parent_version_id": p.parent_version_id,
            "text": p.text,
            "expected_hash": p.expected_hash,
            "status": p.status,
            "tally": consensus.tally(p),
            "submissions": {
                sid: {
                    "submitted_hash": sub.submitted_hash,
                    "vote": sub.vote,
                    "vote_signature": sub.vote_signature,
                }
                for sid, sub in p.submissions.items()
            },
            "pending_signatories": [
                sid for sid in p.signatory_pubkeys if sid not in p.submissions
            ],
            "version_id": version_id,
            "block_index": self.version_block_index.get(version_id)
            if version_id
            else None,
        }

    def chain_records(self) -> list[dict]:
        return [store.block_to_record(b) for b in self.chain.blocks]

    def verify_chain_report(self) -> dict:
        verdict = ledger.verify_chain(self.chain)
        return {
            "valid": verdict.valid,
            "first_bad_index": verdict.first_bad_index,
            "rule": verdict.rule,
            "length": len(self.chain.blocks),
        }

    def history(self, contract_id: str) -> list[dict]:
        entries = ledger.contract_history(self.chain, contract_id)
        return [
            {
                "version_id": e.version_id,
                "contract_hash": e.contract_hash,
                "owner_pubkey": e.owner_pubkey,
                "block_index": e.block_index,
            }
            for e in entries
        ]

    def verify_document(self, text: str | bytes) -> dict:
        """Attest whether a document's canonical digest appears on the chain."""
        digest = core.hash_contract(core.canonicalize(text))
        for block in self.chain.blocks[1:]:
            payload = block.header.payload
            if payload.contract_hash == digest:
                root = payload.contract_id
                parents = {
                    b.header.payload.contract_id: b.header.payload.parent_contract_id
                    for b in self.chain.blocks[1:]
                }
                while parents.get(root):
                    root = parents[root]
                return {
                    "found": True,
                    "digest": digest,
                    "block_index": block.header.index,
                    "version_id": payload.contract_id,
                    "lineage_root": root,
                    "owner_pubkey": payload.owner_pubkey,
                }
        return {"found": False, "digest": digest}

    def version_text(self, version_id: str) -> str:
        version = self.versions.get(version_id)
        if version is None:
            raise UnknownContractError(f"no approved version {version_id!r}")
        return version.text
