"""Append-only proof-of-work chain of approved contract versions.

Each non-genesis block carries one approved version: its id, parent linkage,
contract digest, signatory ids, the version owner's public key, and a
signature over the ownership handoff made by the previous block's owner.
A mined block joins the chain only when a majority of verifying miners
(at least 51%) vouch for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import core
from .errors import DecodeError, MiningBudgetExceededError, UnknownContractError

ZERO_CONTRACT_ID = "0" * 32
ZERO_DIGEST = "0" * 64
ZERO_SIGNATURE = "0" * 128
GENESIS_MINER_ID = "genesis"

# Production proof-of-work target: six leading zero hex characters. Expected
# work is 16^6 hashes per block, so interactive setups and tests run lower.
DEFAULT_DIFFICULTY = 6

RULE_HASH = "hash_mismatch"
RULE_DIFFICULTY = "difficulty"
RULE_LINKAGE = "linkage"
RULE_OWNER_SIG = "owner_signature"
RULE_GENESIS = "genesis"


@dataclass(frozen=True)
class BlockPayload:
    contract_id: str
    parent_contract_id: str
    contract_hash: str
    signatory_ids: tuple[str, ...]
    owner_pubkey: str
    prev_owner_sig: str


@dataclass(frozen=True)
class BlockHeader:
    index: int
    timestamp: int
    miner_id: str
    payload: BlockPayload
    prev_hash: str
    nonce: int


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    hash: str


def block_preimage(header: BlockHeader) -> bytes:
    """The exact bytes that are hashed: 11 LF-separated fields, no trailing LF.

    Field order: index, timestamp, miner_id, contract_id, parent_contract_id
    (empty for originals), contract_hash, signatory_ids joined by commas,
    owner_pubkey, prev_owner_sig, prev_hash, nonce.
    """
    p = header.payload
    fields = (
        str(header.index),
        str(header.timestamp),
        header.miner_id,
        p.contract_id,
        p.parent_contract_id,
        p.contract_hash,
        ",".join(p.signatory_ids),
        p.owner_pubkey,
        p.prev_owner_sig,
        header.prev_hash,
        str(header.nonce),
    )
    return "\n".join(fields).encode("utf-8")


def hash_block(header: BlockHeader) -> str:
    return core.sha256_hex(block_preimage(header))


def seal(header: BlockHeader) -> Block:
    return Block(header=header, hash=hash_block(header))


def ownership_message(contract_hash: str, owner_pubkey: str, prev_hash: str) -> bytes:
    """Bytes the previous block's owner signs to hand the chain tip over."""
    return f"OWN\n{contract_hash}\n{owner_pubkey}\n{prev_hash}".encode("utf-8")


def genesis_block(root_owner_pubkey: str) -> Block:
    """The fixed first block; only the root owner's public key varies."""
    payload = BlockPayload(
        contract_id=ZERO_CONTRACT_ID,
        parent_contract_id="",
        contract_hash=ZERO_DIGEST,
        signatory_ids=(),
        owner_pubkey=root_owner_pubkey,
        prev_owner_sig=ZERO_SIGNATURE,
    )
    header = BlockHeader(
        index=0,
        timestamp=0,
        miner_id=GENESIS_MINER_ID,
        payload=payload,
        prev_hash=ZERO_DIGEST,
        nonce=0,
    )
    return seal(header)


def meets_difficulty(digest: str, difficulty: int) -> bool:
    return digest.startswith("0" * difficulty)


def mine(
    template: BlockHeader,
    difficulty: int,
    nonce_start: int = 0,
    max_attempts: int | None = None,
) -> Block:
    """Find the smallest nonce >= nonce_start whose hash meets the difficulty.

    The search walks nonces in increasing order, so the result is fully
    deterministic for a given template. The template's own nonce field is
    ignored. Without ``max_attempts`` the search is unbounded.
    """
    if difficulty < 0:
        raise ValueError("difficulty must be non-negative")
    # The nonce is the last preimage field, so hash prefix+nonce directly
    # instead of rebuilding the header every attempt.
    base = block_preimage(replace(template, nonce=0))
    prefix = base[: base.rfind(b"\n") + 1]
    target = "0" * difficulty
    nonce = nonce_start
    attempts = 0
    while max_attempts is None or attempts < max_attempts:
        digest = core.sha256_hex(prefix + str(nonce).encode("ascii"))
        attempts += 1
        if digest.startswith(target):
            return Block(header=replace(template, nonce=nonce), hash=digest)
        nonce += 1
    raise MiningBudgetExceededError(
        f"no nonce met difficulty {difficulty} within {max_attempts} attempts"
    )


def verify_block_diagnostic(
    block: Block, prev_block: Block, difficulty: int
) -> str | None:
    """None when the block verifies against its predecessor, else the first
    failed rule: hash integrity, difficulty prefix, linkage, owner signature.
    """
    if hash_block(block.header) != block.hash:
        return RULE_HASH
    if not meets_difficulty(block.hash, difficulty):
        return RULE_DIFFICULTY
    if (
        block.header.index != prev_block.header.index + 1
        or block.header.prev_hash != prev_block.hash
    ):
        return RULE_LINKAGE
    payload = block.header.payload
    message = ownership_message(
        payload.contract_hash, payload.owner_pubkey, block.header.prev_hash
    )
    try:
        signed = core.verify_signature(
            prev_block.header.payload.owner_pubkey, message, payload.prev_owner_sig
        )
    except DecodeError:
        signed = False
    if not signed:
        return RULE_OWNER_SIG
    return None


def verify_block(block: Block, prev_block: Block, difficulty: int) -> bool:
    return verify_block_diagnostic(block, prev_block, difficulty) is None


@dataclass
class Chain:
    """Genesis plus accepted blocks. The root owner is identified by the
    public key recorded in the genesis block; its private key lives in the
    vault, never here.
    """

    blocks: list[Block] = field(default_factory=list)
    difficulty: int = DEFAULT_DIFFICULTY

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    @property
    def root_owner_pubkey(self) -> str:
        return self.blocks[0].header.payload.owner_pubkey

    def __len__(self) -> int:
        return len(self.blocks)


def new_chain(root_owner_pubkey: str, difficulty: int = DEFAULT_DIFFICULTY) -> Chain:
    if difficulty < 0:
        raise ValueError("difficulty must be non-negative")
    return Chain(blocks=[genesis_block(root_owner_pubkey)], difficulty=difficulty)


def quorum_threshold(miner_count: int) -> int:
    """Smallest T with T/miner_count >= 0.51, in exact integer arithmetic."""
    if miner_count < 1:
        raise ValueError("miner_count must be at least 1")
    return (51 * miner_count + 99) // 100


@dataclass(frozen=True)
class AppendResult:
    accepted: bool
    yes_count: int
    threshold: int
    reason: str = ""


def append_block(
    chain: Chain, block: Block, verifier_verdicts: list[bool]
) -> AppendResult:
    """Gate a candidate block on the miner vote; append only on quorum.

    The chain is unchanged when the vote falls short. The candidate must
    extend the current tip (callers mine on the tip, so anything else is a
    programming error, not a vote outcome).
    """
    if not verifier_verdicts:
        raise ValueError("at least one verifier verdict is required")
    if (
        block.header.index != chain.tip.header.index + 1
        or block.header.prev_hash != chain.tip.hash
    ):
        raise ValueError("candidate block does not extend the chain tip")
    yes_count = sum(1 for v in verifier_verdicts if v)
    threshold = quorum_threshold(len(verifier_verdicts))
    if yes_count >= threshold:
        chain.blocks.append(block)
        return AppendResult(True, yes_count, threshold)
    return AppendResult(False, yes_count, threshold, reason="quorum_not_reached")


def verify_genesis(block: Block) -> bool:
    h = block.header
    p = h.payload
    return (
        h.index == 0
        and h.timestamp == 0
        and h.miner_id == GENESIS_MINER_ID
        and p.contract_id == ZERO_CONTRACT_ID
        and p.parent_contract_id == ""
        and p.contract_hash == ZERO_DIGEST
        and p.signatory_ids == ()
        and core.is_public_key(p.owner_pubkey)
        and p.prev_owner_sig == ZERO_SIGNATURE
        and h.prev_hash == ZERO_DIGEST
        and h.nonce == 0
        and block.hash == hash_block(h)
    )


@dataclass(frozen=True)
class ChainVerdict:
    valid: bool
    first_bad_index: int | None = None
    rule: str | None = None


def verify_chain(chain: Chain) -> ChainVerdict:
    """Walk the chain from genesis, reporting the first rule violation.

    Genesis is matched against its fixed constants (no difficulty rule);
    every later block must verify against its predecessor.
    """
    if not chain.blocks or not verify_genesis(chain.blocks[0]):
        return ChainVerdict(valid=False, first_bad_index=0, rule=RULE_GENESIS)
    for i in range(1, len(chain.blocks)):
        rule = verify_block_diagnostic(chain.blocks[i], chain.blocks[i - 1], chain.difficulty)
        if rule is not None:
            return ChainVerdict(valid=False, first_bad_index=i, rule=rule)
    return ChainVerdict(valid=True)


@dataclass(frozen=True)
class HistoryEntry:
    version_id: str
    contract_hash: str
    owner_pubkey: str
    block_index: int


def contract_history(chain: Chain, root_contract_id: str) -> list[HistoryEntry]:
    """Version lineage in block order, starting from an original contract.

    Follows parent links forward; lineage is linear because amendments may
    only target the newest approved version.
    """
    blocks_by_contract: dict[str, Block] = {}
    child_of: dict[str, str] = {}
    for block in chain.blocks[1:]:
        p = block.header.payload
        blocks_by_contract[p.contract_id] = block
        if p.parent_contract_id:
            child_of[p.parent_contract_id] = p.contract_id
    root = blocks_by_contract.get(root_contract_id)
    if root is None or root.header.payload.parent_contract_id != "":
        raise UnknownContractError(
            f"{root_contract_id!r} is not an original contract on this chain"
        )
    history: list[HistoryEntry] = []
    current: str | None = root_contract_id
    while current is not None:
        block = blocks_by_contract[current]
        payload = block.header.payload
        history.append(
            HistoryEntry(
                version_id=current,
                contract_hash=payload.contract_hash,
                owner_pubkey=payload.owner_pubkey,
                block_index=block.header.index,
            )
        )
        current = child_of.get(current)
    return history
