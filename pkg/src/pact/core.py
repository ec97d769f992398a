"""Canonical text handling, SHA-256 digests, and Ed25519 signatures.

Everything above this layer agrees on three conventions:

* contract texts are canonicalized before they are hashed, so the same
  agreement yields the same digest regardless of platform line endings;
* digests, public keys, and signatures travel as lowercase hex (mixed case is
  rejected, never folded);
* signatures are detached Ed25519 over raw message bytes.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import DecodeError, EncodingError

SCHEME_ID = "ed25519"
SEED_LEN = 32
PUBLIC_KEY_HEX_LEN = 64
PRIVATE_KEY_HEX_LEN = 64
SIGNATURE_HEX_LEN = 128
DIGEST_HEX_LEN = 64

_LOWER_HEX = re.compile(r"[0-9a-f]*\Z")


@dataclass(frozen=True)
class KeyPair:
    """An Ed25519 keypair in hex form; ``private_key`` is the 32-byte seed."""

    public_key: str
    private_key: str
    scheme_id: str = SCHEME_ID


def canonicalize(text: str | bytes) -> str:
    """Normalize line endings to LF and trailing whitespace structure.

    CRLF and lone CR become LF. A non-empty result ends with exactly one LF
    (missing one is added, extras are collapsed); the empty text stays empty.
    Idempotent. Bytes input must be valid UTF-8.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"contract text is not valid UTF-8: {exc}") from exc
    normalized = text.replace("\r\n", "\n").replace("\r", "\n")
    if not normalized:
        return ""
    return normalized.rstrip("\n") + "\n"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_contract(text: str | bytes) -> str:
    """Digest of the canonical form of ``text`` (canonicalizes first)."""
    return sha256_hex(canonicalize(text).encode("utf-8"))


def decode_hex(value: str, expected_len: int, label: str) -> bytes:
    """Decode lowercase hex of an exact length, or raise :class:`DecodeError`."""
    if not isinstance(value, str):
        raise DecodeError(f"{label} must be a string")
    if len(value) != expected_len:
        raise DecodeError(
            f"{label} must be {expected_len} hex characters, got {len(value)}"
        )
    if not _LOWER_HEX.fullmatch(value):
        raise DecodeError(f"{label} must be lowercase hex")
    return bytes.fromhex(value)


def validate_digest(value: str) -> str:
    """Check that ``value`` is a well-formed SHA-256 digest; return it."""
    decode_hex(value, DIGEST_HEX_LEN, "digest")
    return value


def is_digest(value: object) -> bool:
    return (
        isinstance(value, str)
        and len(value) == DIGEST_HEX_LEN
        and _LOWER_HEX.fullmatch(value) is not None
    )


def is_public_key(value: object) -> bool:
    return (
        isinstance(value, str)
        and len(value) == PUBLIC_KEY_HEX_LEN
        and _LOWER_HEX.fullmatch(value) is not None
    )


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Create a keypair, from a fixed 32-byte seed when given (deterministic)."""
    if seed is None:
        seed = os.urandom(SEED_LEN)
    if len(seed) != SEED_LEN:
        raise ValueError(f"seed must be {SEED_LEN} bytes, got {len(seed)}")
    private = Ed25519PrivateKey.from_private_bytes(seed)
    public = private.public_key().public_bytes_raw()
    return KeyPair(public_key=public.hex(), private_key=seed.hex())


def sign(private_key: str, message: bytes) -> str:
    """Detached signature over ``message``; deterministic for a fixed key."""
    raw = decode_hex(private_key, PRIVATE_KEY_HEX_LEN, "private key")
    return Ed25519PrivateKey.from_private_bytes(raw).sign(message).hex()


def verify_signature(public_key: str, message: bytes, signature: str) -> bool:
    """True iff ``signature`` is valid for ``message`` under ``public_key``.

    A signature that simply does not verify returns False; malformed key or
    signature material raises :class:`DecodeError` instead.
    """
    raw_key = decode_hex(public_key, PUBLIC_KEY_HEX_LEN, "public key")
    raw_sig = decode_hex(signature, SIGNATURE_HEX_LEN, "signature")
    try:
        loaded = Ed25519PublicKey.from_public_bytes(raw_key)
    except Exception as exc:  # not a valid curve point
        raise DecodeError(f"public key does not decode: {exc}") from exc
    try:
        loaded.verify(raw_sig, message)
    except InvalidSignature:
        return False
    return True
