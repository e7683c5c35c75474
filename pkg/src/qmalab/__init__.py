"""Desk-scale simulation lab for coset-state authentication, permuting ZX
verifiers with strong completeness, idealized provably-correct obfuscation,
and the NIZK argument of knowledge for QMA built from them."""

from . import ati, csa, gf2, nizknp, obfstack, permver, protocol, simstate, zxham

__all__ = [
    "ati",
    "csa",
    "gf2",
    "nizknp",
    "obfstack",
    "permver",
    "protocol",
    "simstate",
    "zxham",
]

__version__ = "0.1.0"
