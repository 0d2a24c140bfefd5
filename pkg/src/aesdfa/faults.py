"""Simulated single-byte faults inside an AES encryption.

A fault is described by *where* it strikes (a location relative to the end
of the cipher), *which* state byte it hits, and *how* the byte is changed.
:func:`inject` runs the traced encryption, corrupts one byte at the chosen
step boundary and lets the computation finish, returning both ciphertexts
together with the realized fault so the run can be replayed exactly.
"""

from __future__ import annotations

import enum
import hashlib
import logging
import random
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from .aes import (
    BytesLike,
    KeySchedule,
    State,
    Step,
    expand_key,
    run_rounds,
    shift_position,
    to_state,
)

log = logging.getLogger(__name__)

STUCK_RETRIES = 16


class FaultRejected(ValueError):
    """The requested mutation would leave the state unchanged."""


class Location(str, enum.Enum):
    # single byte at the MixColumns input of the second-to-last round
    AFTER_SHIFT_ROWS = "after-shiftrows"
    # one of the step boundaries between the last two MixColumns, picked at random
    WINDOW = "window"
    # state entering MixColumns two rounds before the end
    DEEP = "deep"

    @property
    def round_offset(self) -> int:
        return 2 if self is Location.DEEP else 1


class Model(str, enum.Enum):
    XOR = "xor"
    RANDOM = "random"
    STUCK_00 = "stuck00"
    STUCK_FF = "stuckFF"


@dataclass(frozen=True)
class FaultSpec:
    location: Location = Location.AFTER_SHIFT_ROWS
    byte_index: Union[int, str] = "random"
    model: Model = Model.RANDOM
    xor_value: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "location", Location(self.location))
        object.__setattr__(self, "model", Model(self.model))
        if self.byte_index != "random" and not (
            isinstance(self.byte_index, int) and 0 <= self.byte_index < 16
        ):
            raise ValueError(f"byte_index must be 0..15 or 'random', got {self.byte_index!r}")
        if self.model is Model.XOR:
            if self.xor_value is None or not 0 <= self.xor_value < 256:
                raise ValueError("xor model needs a byte value")
            if self.xor_value == 0:
                raise FaultRejected("xor with 0 does not change the state")

    def boundaries(self, nr: int) -> List[Tuple[int, Step]]:
        """Candidate (round, step) points after which the byte is corrupted."""
        if self.location is Location.AFTER_SHIFT_ROWS:
            return [(nr - 1, Step.SHIFT_ROWS)]
        if self.location is Location.WINDOW:
            return [(nr - 2, Step.ADD_ROUND_KEY), (nr - 1, Step.SUB_BYTES),
                    (nr - 1, Step.SHIFT_ROWS)]
        return [(nr - 2, Step.SHIFT_ROWS)]


@dataclass(frozen=True)
class FaultTruth:
    """The fault as it actually happened: ``value`` is the XOR difference applied."""

    round: int
    step: Step
    byte_index: int
    model: Model
    value: int

    def __post_init__(self):
        object.__setattr__(self, "step", Step(self.step))
        object.__setattr__(self, "model", Model(self.model))

    @property
    def mix_input_index(self) -> int:
        """Byte position of the fault once it reaches the next MixColumns input."""
        if self.step in (Step.SHIFT_ROWS, Step.MIX_COLUMNS):
            return self.byte_index
        return shift_position(self.byte_index)


@dataclass(frozen=True)
class FaultyRun:
    plaintext: bytes
    correct: bytes
    faulty: bytes
    truth: Optional[FaultTruth] = None
    seed: Optional[int] = None

    def replay(self, key: BytesLike) -> bytes:
        """Re-encrypt ``plaintext`` applying the recorded fault."""
        if self.truth is None:
            raise ValueError("run carries no ground truth")
        return apply_fault(expand_key(key), self.plaintext, self.truth)


def apply_fault(schedule: KeySchedule, plaintext: BytesLike, truth: FaultTruth) -> bytes:
    def hook(r: int, step: Step, state: State) -> Optional[State]:
        if (r, step) != (truth.round, truth.step):
            return None
        mutated = list(state)
        mutated[truth.byte_index] ^= truth.value
        return tuple(mutated)

    return bytes(run_rounds(schedule, plaintext, hook).final)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary hashable parts (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def inject(key: BytesLike, plaintext: BytesLike, spec: FaultSpec, seed: int = 0) -> FaultyRun:
    """Encrypt ``plaintext`` once cleanly and once with the fault described by ``spec``.

    Raises:
        FaultRejected: a stuck-at fault targets a byte already holding the stuck value.
    """
    schedule = expand_key(key)
    plaintext = bytes(to_state(plaintext))
    rng = random.Random(seed)
    r, step = rng.choice(spec.boundaries(schedule.nr))
    index = rng.randrange(16) if spec.byte_index == "random" else spec.byte_index

    clean = run_rounds(schedule, plaintext)
    original = clean[(r, step)][index]
    if spec.model is Model.XOR:
        diff = spec.xor_value
    elif spec.model is Model.RANDOM:
        replacement = rng.randrange(255)
        if replacement >= original:
            replacement += 1
        diff = replacement ^ original
    else:
        stuck = 0x00 if spec.model is Model.STUCK_00 else 0xFF
        if original == stuck:
            raise FaultRejected(f"byte {index} already equals {stuck:02X}")
        diff = stuck ^ original

    truth = FaultTruth(r, step, index, spec.model, diff)
    faulty = apply_fault(schedule, plaintext, truth)
    return FaultyRun(plaintext, bytes(clean.final), faulty, truth, seed)


def campaign_plaintext(seed: int, index: int, attempt: int) -> bytes:
    return random.Random(derive_seed(seed, index, attempt, "plaintext")).randbytes(16)


def make_campaign(key: BytesLike, n: int, spec: FaultSpec, seed: int = 0,
                  max_retries: int = STUCK_RETRIES) -> List[FaultyRun]:
    """``n`` faulty runs over fresh random plaintexts, reproducible from ``seed``.

    Run ``i`` uses plaintext :func:`campaign_plaintext` and fault seed
    ``derive_seed(seed, i, attempt)``; a rejected fault is retried with the
    next attempt number, up to ``max_retries`` times.
    """
    if n < 1:
        raise ValueError("campaign size must be at least 1")
    runs = []
    for i in range(n):
        for attempt in range(max_retries + 1):
            pt = campaign_plaintext(seed, i, attempt)
            try:
                runs.append(inject(key, pt, spec, derive_seed(seed, i, attempt)))
                break
            except FaultRejected as exc:
                log.debug("run %d attempt %d rejected: %s", i, attempt, exc)
        else:
            raise FaultRejected(f"run {i}: no usable plaintext after {max_retries} retries")
    return runs

