"""Walk the AES key schedule backwards from its last Nk words."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .aes import VARIANTS, AESUsageError, Word, hex_to_block, schedule_mask, xor_words


@dataclass(frozen=True)
class FinalKeyMaterial:
    """The last Nk words of an expanded schedule, as 4*Nk bytes.

    For AES-128 this is exactly the last round key; for AES-192 and
    AES-256 it spans the last two round keys.
    """

    variant: int
    data: bytes

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise AESUsageError(f"unknown variant {self.variant}")
        nk = VARIANTS[self.variant][0]
        if len(self.data) != 4 * nk:
            raise AESUsageError(
                f"AES-{self.variant} needs {nk} final words ({4 * nk} bytes), "
                f"got {len(self.data)} bytes"
            )

    @property
    def words(self) -> List[Word]:
        return [tuple(self.data[i:i + 4]) for i in range(0, len(self.data), 4)]


def recover_key(final: FinalKeyMaterial, variant: Optional[int] = None) -> bytes:
    """Return the cipher key whose schedule ends with ``final``.

    ``final`` may also be given as raw bytes together with ``variant``.
    """
    if not isinstance(final, FinalKeyMaterial):
        final = FinalKeyMaterial(variant if variant is not None else 128, bytes(final))
    nk, nr = VARIANTS[final.variant]
    total = 4 * (nr + 1)
    w: List[Optional[Word]] = [None] * total
    w[total - nk:] = final.words
    # forward: w[i] = w[i - nk] ^ mask(i, w[i - 1]), so w[i - nk] = w[i] ^ mask(i, w[i - 1])
    for i in range(total - 1, nk - 1, -1):
        w[i - nk] = xor_words(w[i], schedule_mask(i, nk, w[i - 1]))
    return bytes(b for word in w[:nk] for b in word)


def recover_key_from_hex(variant: int, hex_words: str) -> bytes:
    return recover_key(FinalKeyMaterial(variant, hex_to_block(hex_words)))


def last_round_key_suffices(variant: int) -> bool:
    """Whether one round key (4 words) is enough material to invert the schedule."""
    return VARIANTS[variant][0] == 4

