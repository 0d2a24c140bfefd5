"""Differential fault analysis of AES: traced cipher, fault simulator and key recovery."""

from .aes import encrypt_block, encrypt_traced, expand_key
from .analysis import analyze_pair, run_attack
from .faults import FaultSpec, inject, make_campaign
from .keyrecovery import FinalKeyMaterial, recover_key

__version__ = "0.1.0"

__all__ = [
    "encrypt_block",
    "encrypt_traced",
    "expand_key",
    "analyze_pair",
    "run_attack",
    "FaultSpec",
    "inject",
    "make_campaign",
    "FinalKeyMaterial",
    "recover_key",
]
