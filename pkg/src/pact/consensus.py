"""Consensus groups and the contract approval workflow.

A group is a fixed set of signatories. Any signatory may open a proposal (an
original contract or an amendment of an approved version); every signatory
then submits the hash they computed over the text together with a signed
yes/no vote. A proposal is approved only when all signatories voted yes and
every submitted hash equals the expected hash; any deviation rejects it
immediately. Finalizing an approved proposal freezes the text as a contract
version and mints a fresh owner keypair for that version.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

from . import core
from .errors import (
    AlreadyFinalizedError,
    AlreadyVotedError,
    BadVoteSignatureError,
    DecodeError,
    DuplicateSignatoryError,
    EmptyContractTextError,
    EmptyGroupError,
    InvalidIdentifierError,
    NotApprovedError,
    NotASignatoryError,
    OpenProposalExistsError,
    ParentNotLatestError,
    ProposalClosedError,
    UnknownParentVersionError,
)

ProposalKind = Literal["original", "amendment"]
ProposalStatus = Literal["open", "approved", "rejected"]
TallyResult = Literal["pending", "approved", "rejected"]

# Identifiers are embedded in LF-delimited signing messages and comma-joined
# lists, so they must stay on one token.
_ID_PATTERN = re.compile(r"[A-Za-z0-9][A-Za-z0-9_.:-]*\Z")

VERSION_ID_LEN = 32


def validate_identifier(value: str, label: str) -> str:
    if not isinstance(value, str) or not _ID_PATTERN.fullmatch(value):
        raise InvalidIdentifierError(
            f"{label} must be alphanumeric with ._:- separators, got {value!r}"
        )
    return value


@dataclass(frozen=True)
class Signatory:
    id: str
    public_key: str
    display_name: str = ""


@dataclass
class ConsensusGroup:
    id: str
    signatories: tuple[Signatory, ...]
    proposal_ids: list[str] = field(default_factory=list)

    @property
    def signatory_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.signatories)

    def signatory(self, signatory_id: str) -> Signatory | None:
        for s in self.signatories:
            if s.id == signatory_id:
                return s
        return None


@dataclass(frozen=True)
class Submission:
    """One signatory's recorded hash-and-vote."""

    submitted_hash: str
    vote: bool
    vote_signature: str


@dataclass
class Proposal:
    id: str
    group_id: str
    kind: ProposalKind
    parent_version_id: str
    text: str
    expected_hash: str
    # Snapshot of the group's keys at opening time, so votes verify even if
    # group objects are rebuilt later.
    signatory_pubkeys: dict[str, str]
    submissions: dict[str, Submission] = field(default_factory=dict)
    status: ProposalStatus = "open"


@dataclass(frozen=True)
class ContractVersion:
    version_id: str
    group_id: str
    kind: ProposalKind
    parent_version_id: str
    text: str
    digest: str


@dataclass(frozen=True)
class VersionOwner:
    """The freshly minted identity that owns exactly one approved version."""

    id: str
    keypair: core.KeyPair
    owned_version_id: str


def create_group(group_id: str, signatories: Sequence[Signatory]) -> ConsensusGroup:
    validate_identifier(group_id, "group id")
    if not signatories:
        raise EmptyGroupError("a consensus group needs at least one signatory")
    seen: set[str] = set()
    for s in signatories:
        validate_identifier(s.id, "signatory id")
        if s.id in seen:
            raise DuplicateSignatoryError(f"signatory id {s.id!r} appears twice")
        seen.add(s.id)
        if not core.is_public_key(s.public_key):
            raise DecodeError(f"signatory {s.id!r} has a malformed public key")
    return ConsensusGroup(id=group_id, signatories=tuple(signatories))


def vote_message(proposal_id: str, submitted_hash: str, vote: bool) -> bytes:
    """The exact bytes a signatory signs when voting."""
    return f"VOTE\n{proposal_id}\n{submitted_hash}\n{1 if vote else 0}".encode("utf-8")


def open_proposal(
    group: ConsensusGroup,
    existing: Sequence[Proposal],
    approved_versions: Mapping[str, ContractVersion],
    text: str | bytes,
    kind: ProposalKind = "original",
    parent_version_id: str = "",
) -> Proposal:
    """Open a proposal in ``group``.

    ``existing`` holds the group's prior proposals (to enforce one open
    proposal at a time) and ``approved_versions`` its approved versions keyed
    by version id (for amendment parent checks). The text is canonicalized on
    the way in and the expected hash is computed over the canonical form.
    """
    if kind not in ("original", "amendment"):
        raise ValueError(f"kind must be 'original' or 'amendment', got {kind!r}")
    for p in existing:
        if p.status == "open":
            raise OpenProposalExistsError(
                f"group {group.id!r} already has open proposal {p.id!r}"
            )
    canonical = core.canonicalize(text)
    if kind == "original":
        if parent_version_id:
            raise ValueError("original proposals do not take a parent version")
        if canonical == "":
            raise EmptyContractTextError("an original contract cannot be empty")
    else:
        parent = approved_versions.get(parent_version_id)
        if parent is None:
            raise UnknownParentVersionError(
                f"no approved version {parent_version_id!r} in group {group.id!r}"
            )
        for v in approved_versions.values():
            if v.parent_version_id == parent_version_id:
                raise ParentNotLatestError(
                    f"version {parent_version_id!r} was already amended by {v.version_id!r}"
                )
    proposal_id = f"{group.id}-p{len(group.proposal_ids) + 1}"
    proposal = Proposal(
        id=proposal_id,
        group_id=group.id,
        kind=kind,
        parent_version_id=parent_version_id if kind == "amendment" else "",
        text=canonical,
        expected_hash=core.hash_contract(canonical),
        signatory_pubkeys={s.id: s.public_key for s in group.signatories},
    )
    group.proposal_ids.append(proposal_id)
    return proposal


def cast_vote(
    proposal: Proposal,
    signatory_id: str,
    submitted_hash: str,
    vote: bool,
    vote_signature: str,
) -> Proposal:
    """Record one signatory's hash-and-vote submission.

    The signature must cover :func:`vote_message` for exactly the submitted
    hash and vote. A no vote or a hash that differs from the expected hash
    rejects the proposal on the spot; approval happens only in finalize.
    """
    if proposal.status != "open":
        raise ProposalClosedError(f"proposal {proposal.id!r} is {proposal.status}")
    pubkey = proposal.signatory_pubkeys.get(signatory_id)
    if pubkey is None:
        raise NotASignatoryError(
            f"{signatory_id!r} is not a signatory of proposal {proposal.id!r}"
        )
    if signatory_id in proposal.submissions:
        raise AlreadyVotedError(f"{signatory_id!r} already voted on {proposal.id!r}")
    core.validate_digest(submitted_hash)
    message = vote_message(proposal.id, submitted_hash, vote)
    try:
        valid = core.verify_signature(pubkey, message, vote_signature)
    except DecodeError as exc:
        raise BadVoteSignatureError(f"vote signature does not decode: {exc}") from exc
    if not valid:
        raise BadVoteSignatureError(
            f"vote signature of {signatory_id!r} does not verify on {proposal.id!r}"
        )
    proposal.submissions[signatory_id] = Submission(submitted_hash, vote, vote_signature)
    if not vote or submitted_hash != proposal.expected_hash:
        proposal.status = "rejected"
    return proposal


def tally(proposal: Proposal) -> TallyResult:
    """Current outcome: pending until every signatory has confirmed.

    Approved means all signatories submitted the expected hash with a yes
    vote; any no vote or mismatched hash means rejected; anything short of
    full participation is pending.
    """
    if proposal.status == "rejected":
        return "rejected"
    if proposal.status == "approved":
        return "approved"
    subs = proposal.submissions
    for sub in subs.values():
        if not sub.vote or sub.submitted_hash != proposal.expected_hash:
            return "rejected"
    if len(subs) == len(proposal.signatory_pubkeys):
        return "approved"
    return "pending"


def derive_version_id(proposal_id: str, digest: str) -> str:
    """Stable version id from what was approved (proposal identity + digest)."""
    return core.sha256_hex(f"version\n{proposal_id}\n{digest}".encode("utf-8"))[
        :VERSION_ID_LEN
    ]


def finalize(
    proposal: Proposal, owner_seed: bytes | None = None
) -> tuple[ContractVersion, VersionOwner]:
    """Freeze an approved proposal into a version and mint its owner keypair.

    Each call on a distinct proposal mints a distinct owner; a proposal can be
    finalized once. ``owner_seed`` makes the minted keypair reproducible.
    """
    if proposal.status == "approved":
        raise AlreadyFinalizedError(f"proposal {proposal.id!r} was already finalized")
    if tally(proposal) != "approved":
        raise NotApprovedError(
            f"proposal {proposal.id!r} is not unanimously approved (tally: {tally(proposal)})"
        )
    version_id = derive_version_id(proposal.id, proposal.expected_hash)
    version = ContractVersion(
        version_id=version_id,
        group_id=proposal.group_id,
        kind=proposal.kind,
        parent_version_id=proposal.parent_version_id,
        text=proposal.text,
        digest=proposal.expected_hash,
    )
    owner = VersionOwner(
        id=f"owner-{version_id[:12]}",
        keypair=core.generate_keypair(owner_seed),
        owned_version_id=version_id,
    )
    proposal.status = "approved"
    return version, owner
