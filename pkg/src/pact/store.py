"""Durable persistence: JSON-lines event log and chain file, content-addressed
contract texts, and a permission-restricted key vault.

Everything is append-only and human-auditable. The event log is the source of
truth for consensus state (replaying it rebuilds groups, proposals, and
votes); the chain file mirrors accepted blocks one per line; texts live under
``texts/<digest>.txt``; private keys live only in ``vault.json`` (mode 0600).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from . import core, ledger
from .errors import CorruptLogError, StorageError

EVENTS_FILE = "events.jsonl"
CHAIN_FILE = "chain.jsonl"
TEXTS_DIR = "texts"
VAULT_FILE = "vault.json"
CONFIG_FILE = "config.json"

EVENT_KINDS = (
    "group_created",
    "proposal_opened",
    "vote_cast",
    "proposal_finalized",
    "block_accepted",
)


@dataclass(frozen=True)
class EventRecord:
    seq: int
    kind: str
    body: dict
    recorded_at: int


class EventLog:
    """Append-only JSONL log with strictly increasing, gap-free sequence
    numbers. ``read_all`` must run before the first append so the next
    sequence number is known."""

    def __init__(self, path: Path, fsync: bool = False) -> None:
        self.path = Path(path)
        self.fsync = fsync
        self._next_seq: int | None = None

    def read_all(self) -> list[EventRecord]:
        records: list[EventRecord] = []
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as f:
                for lineno, line in enumerate(f, start=1):
                    try:
                        raw = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise CorruptLogError(
                            f"{self.path.name} line {lineno}: not valid JSON ({exc.msg})"
                        ) from exc
                    try:
                        record = EventRecord(
                            seq=raw["seq"],
                            kind=raw["kind"],
                            body=raw["body"],
                            recorded_at=raw["recorded_at"],
                        )
                    except (KeyError, TypeError) as exc:
                        raise CorruptLogError(
                            f"{self.path.name} line {lineno}: missing field {exc}"
                        ) from exc
                    if record.seq != lineno:
                        raise CorruptLogError(
                            f"{self.path.name} line {lineno}: expected seq {lineno}, got {record.seq}"
                        )
                    if record.kind not in EVENT_KINDS:
                        raise CorruptLogError(
                            f"{self.path.name} line {lineno}: unknown event kind {record.kind!r}"
                        )
                    records.append(record)
        self._next_seq = len(records) + 1
        return records

    def append(self, kind: str, body: dict, recorded_at: int) -> int:
        if self._next_seq is None:
            raise StorageError("event log must be read before appending")
        if kind not in EVENT_KINDS:
            raise StorageError(f"unknown event kind {kind!r}")
        seq = self._next_seq
        line = json.dumps(
            {"seq": seq, "kind": kind, "body": body, "recorded_at": recorded_at},
            separators=(",", ":"),
        )
        if "\n" in line:
            raise StorageError("event body serialized to multiple lines")
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
            f.flush()
            if self.fsync:
                os.fsync(f.fileno())
        self._next_seq = seq + 1
        return seq


# chain.jsonl key order mirrors the block preimage field order, plus hash.
def block_to_record(block: ledger.Block) -> dict:
    h = block.header
    p = h.payload
    return {
        "index": h.index,
        "timestamp": h.timestamp,
        "miner_id": h.miner_id,
        "contract_id": p.contract_id,
        "parent_contract_id": p.parent_contract_id,
        "contract_hash": p.contract_hash,
        "signatory_ids": list(p.signatory_ids),
        "owner_pubkey": p.owner_pubkey,
        "prev_owner_sig": p.prev_owner_sig,
        "prev_hash": h.prev_hash,
        "nonce": h.nonce,
        "hash": block.hash,
    }


def block_from_record(record: dict) -> ledger.Block:
    payload = ledger.BlockPayload(
        contract_id=record["contract_id"],
        parent_contract_id=record["parent_contract_id"],
        contract_hash=record["contract_hash"],
        signatory_ids=tuple(record["signatory_ids"]),
        owner_pubkey=record["owner_pubkey"],
        prev_owner_sig=record["prev_owner_sig"],
    )
    header = ledger.BlockHeader(
        index=record["index"],
        timestamp=record["timestamp"],
        miner_id=record["miner_id"],
        payload=payload,
        prev_hash=record["prev_hash"],
        nonce=record["nonce"],
    )
    return ledger.Block(header=header, hash=record["hash"])


class ChainFile:
    """One block per line, JSON keys in preimage order plus hash."""

    def __init__(self, path: Path, fsync: bool = False) -> None:
        self.path = Path(path)
        self.fsync = fsync

    def read_blocks(self) -> list[ledger.Block] | None:
        """All persisted blocks, or None when the file does not exist yet."""
        if not self.path.exists():
            return None
        blocks: list[ledger.Block] = []
        with open(self.path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                try:
                    record = json.loads(line)
                    blocks.append(block_from_record(record))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise CorruptLogError(
                        f"{self.path.name} line {lineno}: bad block record ({exc})"
                    ) from exc
        return blocks

    def append(self, block: ledger.Block) -> None:
        line = json.dumps(block_to_record(block), separators=(",", ":"))
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
            f.flush()
            if self.fsync:
                os.fsync(f.fileno())


class TextStore:
    """Canonical contract texts addressed by their digest."""

    def __init__(self, root: Path) -> None:
        self.root = Path(root)

    def _path(self, digest: str) -> Path:
        core.validate_digest(digest)
        return self.root / f"{digest}.txt"

    def put(self, text: str) -> str:
        digest = core.hash_contract(text)
        path = self._path(digest)
        if not path.exists():
            self.root.mkdir(parents=True, exist_ok=True)
            path.write_bytes(core.canonicalize(text).encode("utf-8"))
        return digest

    def get(self, digest: str) -> str:
        path = self._path(digest)
        if not path.exists():
            raise StorageError(f"no stored text for digest {digest}")
        text = path.read_bytes().decode("utf-8")
        if core.hash_contract(text) != digest:
            raise CorruptLogError(f"stored text {path.name} does not match its digest")
        return text

    def __contains__(self, digest: str) -> bool:
        return self._path(digest).exists()


class KeyVault:
    """Private-key custody in a single 0600 JSON file.

    Stores key material by id plus a derivation counter used when keypairs
    are minted from a fixed seed. Nothing here may ever appear in the event
    log, chain file, or any API response.
    """

    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self.keys: dict[str, str] = {}
        self.counter = 0
        if self.path.exists():
            try:
                raw = json.loads(self.path.read_text(encoding="utf-8"))
                self.keys = dict(raw["keys"])
                self.counter = int(raw["counter"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorruptLogError(f"{self.path.name}: bad vault file ({exc})") from exc

    def _save(self) -> None:
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump({"counter": self.counter, "keys": self.keys}, f, indent=2)
        os.chmod(tmp, 0o600)
        os.replace(tmp, self.path)

    def put(self, key_id: str, private_key: str) -> None:
        self.keys[key_id] = private_key
        self._save()

    def get(self, key_id: str) -> str:
        try:
            return self.keys[key_id]
        except KeyError:
            raise StorageError(f"vault has no key {key_id!r}") from None

    def __contains__(self, key_id: str) -> bool:
        return key_id in self.keys

    def next_counter(self) -> int:
        value = self.counter
        self.counter += 1
        self._save()
        return value


@dataclass(frozen=True)
class StoreConfig:
    difficulty: int
    miner_count: int


def read_config(path: Path) -> StoreConfig | None:
    path = Path(path)
    if not path.exists():
        return None
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        return StoreConfig(
            difficulty=int(raw["difficulty"]), miner_count=int(raw["miner_count"])
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptLogError(f"{path.name}: bad config file ({exc})") from exc


def write_config(path: Path, config: StoreConfig) -> None:
    Path(path).write_text(
        json.dumps({"difficulty": config.difficulty, "miner_count": config.miner_count})
        + "\n",
        encoding="utf-8",
    )
