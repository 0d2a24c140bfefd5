"""AES-128/192/256 encryption with a traced mode.

A state is a tuple of 16 ints in column-major order: index ``i`` holds
row ``i % 4`` of column ``i // 4``, the same layout as the input block.
Rounds follow FIPS-197 order (SubBytes, ShiftRows, MixColumns,
AddRoundKey).  The traced mode records the state after every step so
that faults can be injected at any step boundary and the computation
resumed from there.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .gf256 import SBOX, gf_mul

State = Tuple[int, ...]
BytesLike = Union[bytes, bytearray, Sequence[int]]

# variant name -> (Nk, Nr)
VARIANTS = {128: (4, 10), 192: (6, 12), 256: (8, 14)}

MIX_MATRIX = (
    (0x02, 0x03, 0x01, 0x01),
    (0x01, 0x02, 0x03, 0x01),
    (0x01, 0x01, 0x02, 0x03),
    (0x03, 0x01, 0x01, 0x02),
)
INV_MIX_MATRIX = (
    (0x0E, 0x0B, 0x0D, 0x09),
    (0x09, 0x0E, 0x0B, 0x0D),
    (0x0D, 0x09, 0x0E, 0x0B),
    (0x0B, 0x0D, 0x09, 0x0E),
)


class Step(str, enum.Enum):
    ADD_ROUND_KEY = "AddRoundKey"
    SUB_BYTES = "SubBytes"
    SHIFT_ROWS = "ShiftRows"
    MIX_COLUMNS = "MixColumns"


class AESUsageError(ValueError):
    """Bad key/block length or an inconsistent step invocation."""


def block_to_hex(block: BytesLike) -> str:
    return bytes(block).hex().upper()


def hex_to_block(text: str, length: Optional[int] = None) -> bytes:
    cleaned = "".join(text.split())
    try:
        data = bytes.fromhex(cleaned)
    except ValueError as exc:
        raise AESUsageError(f"malformed hex string {text!r}") from exc
    if length is not None and len(data) != length:
        raise AESUsageError(f"expected {length} bytes, got {len(data)}")
    return data


def to_state(block: BytesLike) -> State:
    state = tuple(block)
    if len(state) != 16 or any(not 0 <= b < 256 for b in state):
        raise AESUsageError("a block is exactly 16 bytes")
    return state


def state_rows(state: State) -> List[List[int]]:
    """The state as four rows, handy for comparing against printed tables."""
    return [[state[4 * c + r] for c in range(4)] for r in range(4)]


def shift_position(index: int) -> int:
    """Where ShiftRows moves the byte at ``index``."""
    row, col = index % 4, index // 4
    return 4 * ((col - row) % 4) + row


# --- round steps --------------------------------------------------------------

def add_round_key(state: State, round_key: State) -> State:
    return tuple(s ^ k for s, k in zip(state, round_key))


def sub_bytes(state: State) -> State:
    return tuple(SBOX[s] for s in state)


def shift_rows(state: State) -> State:
    out = [0] * 16
    for i, s in enumerate(state):
        out[shift_position(i)] = s
    return tuple(out)


def mix_column(column: Sequence[int], matrix=MIX_MATRIX) -> Tuple[int, ...]:
    return tuple(
        gf_mul(row[0], column[0]) ^ gf_mul(row[1], column[1])
        ^ gf_mul(row[2], column[2]) ^ gf_mul(row[3], column[3])
        for row in matrix
    )


def mix_columns(state: State, matrix=MIX_MATRIX) -> State:
    out: List[int] = []
    for c in range(4):
        out.extend(mix_column(state[4 * c:4 * c + 4], matrix))
    return tuple(out)


def inv_mix_columns(state: State) -> State:
    return mix_columns(state, INV_MIX_MATRIX)


def round_step(step: Step, state: State, round_key: Optional[State] = None) -> State:
    """Apply exactly one round transformation.

    ``round_key`` must be given for AddRoundKey and only for AddRoundKey.
    """
    step = Step(step)
    if (step is Step.ADD_ROUND_KEY) != (round_key is not None):
        raise AESUsageError(
            f"{step.value} {'requires' if round_key is None else 'takes no'} round key"
        )
    if step is Step.ADD_ROUND_KEY:
        return add_round_key(state, round_key)
    if step is Step.SUB_BYTES:
        return sub_bytes(state)
    if step is Step.SHIFT_ROWS:
        return shift_rows(state)
    return mix_columns(state)


# --- key schedule ----------------------------------------------------------------

RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)

Word = Tuple[int, int, int, int]


def sub_word(word: Sequence[int]) -> Word:
    return tuple(SBOX[b] for b in word)  # type: ignore[return-value]


def rot_word(word: Sequence[int]) -> Word:
    return (word[1], word[2], word[3], word[0])


def xor_words(a: Sequence[int], b: Sequence[int]) -> Word:
    return tuple(x ^ y for x, y in zip(a, b))  # type: ignore[return-value]


def schedule_mask(i: int, nk: int, previous: Word) -> Word:
    """The word XORed with ``w[i - nk]`` to produce ``w[i]`` (``previous`` is ``w[i - 1]``)."""
    if i % nk == 0:
        temp = sub_word(rot_word(previous))
        return (temp[0] ^ RCON[i // nk - 1], temp[1], temp[2], temp[3])
    if nk > 6 and i % nk == 4:
        return sub_word(previous)
    return tuple(previous)  # type: ignore[return-value]


def variant_for_key_length(n_bytes: int) -> int:
    variant = n_bytes * 8
    if variant not in VARIANTS:
        raise AESUsageError(f"key must be 16, 24 or 32 bytes, got {n_bytes}")
    return variant


@dataclass(frozen=True)
class KeySchedule:
    variant: int
    words: Tuple[Word, ...]

    @property
    def nk(self) -> int:
        return VARIANTS[self.variant][0]

    @property
    def nr(self) -> int:
        return VARIANTS[self.variant][1]

    def round_key(self, r: int) -> State:
        return tuple(b for w in self.words[4 * r:4 * r + 4] for b in w)

    def final_words(self) -> bytes:
        """The last Nk words, which is what key recovery starts from."""
        return bytes(b for w in self.words[-self.nk:] for b in w)


def expand_key(key: BytesLike) -> KeySchedule:
    key = bytes(key)
    variant = variant_for_key_length(len(key))
    nk, nr = VARIANTS[variant]
    words: List[Word] = [tuple(key[4 * i:4 * i + 4]) for i in range(nk)]  # type: ignore[misc]
    for i in range(nk, 4 * (nr + 1)):
        words.append(xor_words(words[i - nk], schedule_mask(i, nk, words[i - 1])))
    return KeySchedule(variant, tuple(words))


# --- encryption -------------------------------------------------------------------

Label = Tuple[int, Step]
# called after each step; may return a replacement state
StepHook = Callable[[int, Step, State], Optional[State]]


def round_steps(nr: int) -> List[Label]:
    """Every (round, step) label of an encryption, in execution order."""
    labels: List[Label] = [(0, Step.ADD_ROUND_KEY)]
    for r in range(1, nr):
        labels += [(r, Step.SUB_BYTES), (r, Step.SHIFT_ROWS),
                   (r, Step.MIX_COLUMNS), (r, Step.ADD_ROUND_KEY)]
    labels += [(nr, Step.SUB_BYTES), (nr, Step.SHIFT_ROWS), (nr, Step.ADD_ROUND_KEY)]
    return labels


@dataclass(frozen=True)
class EncryptionTrace:
    """States after every step, keyed by (round, step); round 0 is the whitening key."""

    labels: Tuple[Label, ...]
    states: Tuple[State, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, label: Label) -> State:
        r, step = label
        return self.states[self.labels.index((r, Step(step)))]

    def items(self):
        return zip(self.labels, self.states)

    @property
    def final(self) -> State:
        return self.states[-1]


def run_rounds(schedule: KeySchedule, plaintext: BytesLike,
               hook: Optional[StepHook] = None) -> EncryptionTrace:
    state = to_state(plaintext)
    labels = round_steps(schedule.nr)
    states = []
    for r, step in labels:
        rk = schedule.round_key(r) if step is Step.ADD_ROUND_KEY else None
        state = round_step(step, state, rk)
        if hook is not None:
            replaced = hook(r, step, state)
            if replaced is not None:
                state = to_state(replaced)
        states.append(state)
    return EncryptionTrace(tuple(labels), tuple(states))


def encrypt_block(key: BytesLike, plaintext: BytesLike) -> bytes:
    schedule = expand_key(key)
    return bytes(run_rounds(schedule, plaintext).final)


def encrypt_traced(key: BytesLike, plaintext: BytesLike) -> Tuple[bytes, EncryptionTrace]:
    trace = run_rounds(expand_key(key), plaintext)
    return bytes(trace.final), trace
