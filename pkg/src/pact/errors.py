"""Domain errors with stable machine-readable codes.

Every error the package raises on purpose derives from :class:`PactError` and
carries a ``code`` that survives serialization (the HTTP layer and the CLI both
relay it verbatim). Unexpected conditions raise ordinary Python exceptions.
"""

from __future__ import annotations


class PactError(Exception):
    """Base class for all domain errors."""

    code = "PACT_ERROR"

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class BadRequestError(PactError):
    """Request is structurally valid JSON but self-contradictory."""

    code = "BAD_REQUEST"


class EncodingError(PactError):
    """Contract text is not valid UTF-8."""

    code = "ENCODING_ERROR"


class DecodeError(PactError):
    """Malformed hex material: wrong length, wrong alphabet, or upper case."""

    code = "DECODE_ERROR"


class InvalidIdentifierError(PactError):
    """Identifier contains characters that would break the wire encodings."""

    code = "INVALID_IDENTIFIER"


class EmptyGroupError(PactError):
    code = "EMPTY_GROUP"


class DuplicateSignatoryError(PactError):
    code = "DUPLICATE_SIGNATORY"


class DuplicateGroupError(PactError):
    code = "DUPLICATE_GROUP"


class UnknownGroupError(PactError):
    code = "UNKNOWN_GROUP"


class UnknownProposalError(PactError):
    code = "UNKNOWN_PROPOSAL"


class EmptyContractTextError(PactError):
    code = "EMPTY_CONTRACT_TEXT"


class OpenProposalExistsError(PactError):
    code = "OPEN_PROPOSAL_EXISTS"


class UnknownParentVersionError(PactError):
    code = "UNKNOWN_PARENT_VERSION"


class ParentNotLatestError(PactError):
    """Amendment targets an approved version that already has a child."""

    code = "PARENT_NOT_LATEST"


class NotASignatoryError(PactError):
    code = "NOT_A_SIGNATORY"


class AlreadyVotedError(PactError):
    code = "ALREADY_VOTED"


class BadVoteSignatureError(PactError):
    code = "BAD_VOTE_SIGNATURE"


class ProposalClosedError(PactError):
    code = "PROPOSAL_CLOSED"


class NotApprovedError(PactError):
    code = "NOT_APPROVED"


class AlreadyFinalizedError(PactError):
    code = "ALREADY_FINALIZED"


class QuorumNotReachedError(PactError):
    code = "QUORUM_NOT_REACHED"


class UnknownContractError(PactError):
    code = "UNKNOWN_CONTRACT"


class MiningBudgetExceededError(PactError):
    code = "MINING_BUDGET_EXCEEDED"


class StorageError(PactError):
    code = "STORAGE_ERROR"


class CorruptLogError(StorageError):
    """A persisted file failed to parse or failed an integrity check."""

    code = "CORRUPT_LOG"


class InvalidChainError(StorageError):
    """The persisted chain does not verify; the engine refuses to start."""

    code = "INVALID_CHAIN"


def _register(cls: type[PactError], into: dict[str, type[PactError]]) -> None:
    into.setdefault(cls.code, cls)
    for sub in cls.__subclasses__():
        _register(sub, into)


def error_for_code(code: str, message: str) -> PactError:
    """Rebuild a typed error from its serialized code (exact class when the
    code is known, plain PactError otherwise)."""
    by_code: dict[str, type[PactError]] = {}
    _register(PactError, by_code)
    cls = by_code.get(code, PactError)
    err = cls(message)
    err.code = code
    return err
