"""Canonicalization, hashing, and signature primitives."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pact import core
from pact.errors import DecodeError, EncodingError

# Checked against coreutils sha256sum, not hashlib.
SHA256_EMPTY = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
SHA256_ABC = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


class TestCanonicalize:
    @pytest.mark.parametrize(
        ("raw", "want"),
        [
            ("", ""),
            ("a", "a\n"),
            ("a\n", "a\n"),
            ("a\r\nb", "a\nb\n"),
            ("a\rb\r\n", "a\nb\n"),
            ("a\n\n\n", "a\n"),
            ("\r\n", "\n"),
            ("\n", "\n"),
            ("line one\nline two", "line one\nline two\n"),
        ],
    )
    def test_examples(self, raw, want):
        assert core.canonicalize(raw) == want

    def test_accepts_utf8_bytes(self):
        assert core.canonicalize("héllo\r\n".encode("utf-8")) == "héllo\n"

    def test_rejects_bad_utf8(self):
        with pytest.raises(EncodingError):
            core.canonicalize(b"\xff\xfe")

    @given(st.text())
    def test_idempotent(self, text):
        once = core.canonicalize(text)
        assert core.canonicalize(once) == once

    @given(st.text())
    def test_shape(self, text):
        out = core.canonicalize(text)
        assert "\r" not in out
        if out:
            assert out.endswith("\n")
            assert not out.endswith("\n\n")

    @given(st.text(min_size=1))
    def test_nonempty_stays_nonempty_unless_only_newlines(self, text):
        out = core.canonicalize(text)
        stripped = text.replace("\r", "").replace("\n", "")
        if stripped:
            assert out.rstrip("\n") != "" and out != ""


class TestHashing:
    def test_known_vectors(self):
        assert core.sha256_hex(b"") == SHA256_EMPTY
        assert core.sha256_hex(b"abc") == SHA256_ABC

    def test_hash_contract_canonicalizes_first(self):
        assert core.hash_contract("abc\r\n") == core.hash_contract("abc")
        assert core.hash_contract("abc") == core.sha256_hex(b"abc\n")

    def test_empty_contract_hashes_empty_string(self):
        assert core.hash_contract("") == SHA256_EMPTY

    @given(st.text())
    def test_line_ending_insensitive(self, text):
        assert core.hash_contract(text.replace("\n", "\r\n")) == core.hash_contract(text)


class TestDigestValidation:
    def test_accepts_lowercase(self):
        assert core.validate_digest(SHA256_ABC) == SHA256_ABC

    @pytest.mark.parametrize(
        "bad",
        [
            SHA256_ABC.upper(),
            SHA256_ABC[:-1],
            SHA256_ABC + "0",
            SHA256_ABC[:-1] + "g",
            "",
        ],
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(DecodeError):
            core.validate_digest(bad)
        assert not core.is_digest(bad)


class TestKeys:
    def test_deterministic_from_seed(self):
        seed = bytes(range(32))
        a = core.generate_keypair(seed)
        b = core.generate_keypair(seed)
        assert a == b
        assert a.scheme_id == "ed25519"
        assert len(a.public_key) == 64
        assert len(a.private_key) == 64
        assert a.private_key == seed.hex()

    def test_distinct_without_seed(self):
        assert core.generate_keypair().public_key != core.generate_keypair().public_key

    def test_bad_seed_length(self):
        with pytest.raises(ValueError):
            core.generate_keypair(b"short")


class TestSignatures:
    def test_roundtrip(self):
        kp = core.generate_keypair(b"\x01" * 32)
        sig = core.sign(kp.private_key, b"hello")
        assert len(sig) == 128
        assert core.verify_signature(kp.public_key, b"hello", sig)

    def test_sign_is_deterministic(self):
        kp = core.generate_keypair(b"\x02" * 32)
        assert core.sign(kp.private_key, b"msg") == core.sign(kp.private_key, b"msg")

    def test_wrong_message_fails_cleanly(self):
        kp = core.generate_keypair(b"\x03" * 32)
        sig = core.sign(kp.private_key, b"hello")
        assert core.verify_signature(kp.public_key, b"hellp", sig) is False

    def test_wrong_key_fails_cleanly(self):
        kp = core.generate_keypair(b"\x04" * 32)
        other = core.generate_keypair(b"\x05" * 32)
        sig = core.sign(kp.private_key, b"hello")
        assert core.verify_signature(other.public_key, b"hello", sig) is False

    def test_tampered_signature_fails_cleanly(self):
        kp = core.generate_keypair(b"\x06" * 32)
        sig = core.sign(kp.private_key, b"hello")
        flipped = ("0" if sig[0] != "0" else "1") + sig[1:]
        assert core.verify_signature(kp.public_key, b"hello", flipped) is False

    def test_malformed_material_raises_not_false(self):
        kp = core.generate_keypair(b"\x07" * 32)
        sig = core.sign(kp.private_key, b"hello")
        with pytest.raises(DecodeError):
            core.verify_signature(kp.public_key.upper(), b"hello", sig)
        with pytest.raises(DecodeError):
            core.verify_signature(kp.public_key, b"hello", sig.upper())
        with pytest.raises(DecodeError):
            core.verify_signature(kp.public_key, b"hello", sig[:-2])
        with pytest.raises(DecodeError):
            core.verify_signature(kp.public_key[:-1] + "x", b"hello", sig)

    @given(st.binary(min_size=0, max_size=64))
    def test_verify_matches_sign(self, message):
        kp = core.generate_keypair(b"\x08" * 32)
        assert core.verify_signature(kp.public_key, message, core.sign(kp.private_key, message))
