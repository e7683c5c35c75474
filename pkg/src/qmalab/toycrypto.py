"""Hash-based toy primitives shared by the NIZK and obfuscation layers.

Everything here is a fidelity-only stand-in built on BLAKE2b: deterministic,
seedable, with authenticated encryption and binding commitments at test
scale.  No cryptographic security is claimed anywhere in this module.
"""

from __future__ import annotations

import hashlib
import hmac


class IntegrityError(Exception):
    """Authenticated decryption or transcript consistency failed."""


def digest(tag: bytes, *parts: bytes, out_len: int = 32) -> bytes:
    h = hashlib.blake2b(digest_size=min(out_len, 64), person=tag[:16].ljust(16, b"\0"))
    for p in parts:
        h.update(len(p).to_bytes(4, "big"))
        h.update(p)
    d = h.digest()
    while len(d) < out_len:
        d += hashlib.blake2b(d, digest_size=64).digest()
    return d[:out_len]


def stream(seed: bytes, n: int) -> bytes:
    """Deterministic keystream of n bytes in counter mode."""
    out = bytearray()
    ctr = 0
    while len(out) < n:
        out += hashlib.blake2b(
            ctr.to_bytes(8, "big") + seed, digest_size=64, person=b"qmalab-stream\0\0\0"
        ).digest()
        ctr += 1
    return bytes(out[:n])


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise IntegrityError("pad/ciphertext length mismatch")
    return bytes(x ^ y for x, y in zip(a, b))


def mac(key: bytes, message: bytes, out_len: int = 16) -> bytes:
    return hmac.new(key, message, hashlib.sha256).digest()[:out_len]


def commit(payload: bytes, r: bytes) -> bytes:
    """Binding-at-test-scale commitment: hash(payload || r) with 128-bit r."""
    if len(r) != 16:
        raise ValueError("commitment randomness must be 16 bytes")
    return digest(b"qmalab-commit", payload, r)


def auth_encrypt(key: bytes, plaintext: bytes, nonce: bytes) -> bytes:
    """nonce || plaintext xor keystream || tag."""
    if len(nonce) != 16:
        raise ValueError("nonce must be 16 bytes")
    body = xor_bytes(plaintext, stream(key + nonce, len(plaintext)))
    return nonce + body + mac(key, nonce + body)


def auth_decrypt(key: bytes, ct: bytes) -> bytes:
    if len(ct) < 32:
        raise IntegrityError("ciphertext too short")
    nonce, body, tag = ct[:16], ct[16:-16], ct[-16:]
    if not hmac.compare_digest(tag, mac(key, nonce + body)):
        raise IntegrityError("authentication tag mismatch")
    return xor_bytes(body, stream(key + nonce, len(body)))


CIPHERTEXT_OVERHEAD = 32  # nonce + tag


def frame(payload: bytes, total: int) -> bytes:
    """Length-prefixed zero-padded framing to a fixed width."""
    if len(payload) + 4 > total:
        raise ValueError(f"payload of {len(payload)} bytes exceeds the {total}-byte frame")
    return len(payload).to_bytes(4, "big") + payload + b"\0" * (total - 4 - len(payload))


def unframe(data: bytes) -> bytes:
    n = int.from_bytes(data[:4], "big")
    if n + 4 > len(data):
        raise IntegrityError("corrupt frame length")
    return data[4 : 4 + n]
