"""Recover the last AES round key from correct/faulty ciphertext pairs.

A single byte fault ``eps`` entering the MixColumns of the second-to-last
round becomes ``c * eps`` in each of four bytes of the last SubBytes input,
with ``c`` taken from one column of the MixColumns matrix.  For each of the
four output differences ``eps'`` the values of ``eps`` compatible with
``s(x + c*eps) + s(x) = eps'`` form a 127-element set, obtained directly
as inverses of a scaled copy of E1.  Intersecting the four sets bounds the
injected fault; each surviving fault value yields two (rarely four) key
byte candidates, and intersecting across pairs isolates the key.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .aes import MIX_MATRIX, VARIANTS, BytesLike, encrypt_block, shift_position
from .gf256 import (
    AFFINE_INV_TABLE,
    E1_NONZERO,
    INV,
    SBOX,
    SBOX_CONSTANT,
    gf_mul,
    solve_quadratic,
)
from .keyrecovery import FinalKeyMaterial, recover_key, last_round_key_suffices

log = logging.getLogger(__name__)

COEFFICIENTS = (0x01, 0x02, 0x03)

# MUL[a][b] = a * b; the inner loops below are dominated by field products
MUL: Tuple[bytes, ...] = tuple(bytes(gf_mul(a, b) for b in range(256)) for a in range(256))


class AnalysisError(ValueError):
    pass


class NoFaultError(AnalysisError):
    """Correct and faulty ciphertexts are identical."""


class UnsupportedShape(AnalysisError):
    """The differential is not a recognised single-fault pattern."""


class InconsistentHypothesis(AnalysisError):
    """No fault value is compatible with every observed difference."""


class ContradictionError(AnalysisError):
    """Intersecting candidate sets left a key byte with no candidates."""


class VerificationError(AnalysisError):
    """The recovered key does not reproduce a known ciphertext."""


# --- differentials and fault shapes ---------------------------------------------

@dataclass(frozen=True)
class DiffState:
    values: Tuple[int, ...]

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(i for i, v in enumerate(self.values) if v)

    def restricted(self, positions: Iterable[int]) -> "DiffState":
        keep = set(positions)
        return DiffState(tuple(v if i in keep else 0 for i, v in enumerate(self.values)))


def differential(correct: BytesLike, faulty: BytesLike) -> DiffState:
    correct, faulty = bytes(correct), bytes(faulty)
    if len(correct) != 16 or len(faulty) != 16:
        raise AnalysisError("ciphertexts must be 16 bytes")
    if correct == faulty:
        raise NoFaultError("ciphertexts are identical; the fault had no effect")
    return DiffState(tuple(a ^ b for a, b in zip(correct, faulty)))


def output_positions(column: int) -> Tuple[int, ...]:
    """Ciphertext positions reached by MixColumns row k of ``column``, for k = 0..3."""
    return tuple(shift_position(4 * column + k) for k in range(4))


COLUMN_PATTERNS = {frozenset(output_positions(j)): j for j in range(4)}


@dataclass(frozen=True)
class FaultPattern:
    """A four-byte differential traced back to one MixColumns input column.

    ``slots[k]`` is the ciphertext position fed by MixColumns output row
    ``k``; ``row_hypotheses`` are the input rows that may hold the fault.
    """

    injected_column: int
    slots: Tuple[int, int, int, int]
    row_hypotheses: Tuple[int, ...]

    @staticmethod
    def coefficient(row: int, mix_row: int) -> int:
        return MIX_MATRIX[mix_row][row]


def classify(diff: DiffState, location: Optional[int] = None) -> FaultPattern:
    """Identify the faulty MixColumns input column from a four-byte differential.

    ``location`` is the byte index of the fault at the MixColumns input when
    known; otherwise all four rows are kept as hypotheses.
    """
    support = diff.support
    column = COLUMN_PATTERNS.get(support)
    if column is None:
        raise UnsupportedShape(f"support {sorted(support)} is not a single-column pattern")
    if location is None:
        rows: Tuple[int, ...] = (0, 1, 2, 3)
    else:
        if location // 4 != column:
            raise UnsupportedShape(
                f"fault at byte {location} cannot produce support {sorted(support)}"
            )
        rows = (location % 4,)
    return FaultPattern(column, output_positions(column), rows)  # type: ignore[arg-type]


def split_deep_fault(diff: DiffState) -> List[DiffState]:
    """Split a full 16-byte differential into four single-column differentials."""
    if len(diff.support) != 16:
        raise UnsupportedShape(f"expected 16 faulty bytes, got {len(diff.support)}")
    groups = [diff.restricted(output_positions(j)) for j in range(4)]
    for g in groups:
        classify(g)
    return groups


# --- fault sets -------------------------------------------------------------------

def _check_fault_args(c: int, eps_prime: int) -> None:
    if c not in COEFFICIENTS:
        raise ValueError(f"coefficient must be 1, 2 or 3, got {c}")
    if eps_prime == 0:
        raise ValueError("output difference must be nonzero")


@functools.lru_cache(maxsize=None)
def fault_candidates(c: int, eps_prime: int) -> FrozenSet[int]:
    """Injected faults ``eps`` compatible with output difference ``eps_prime``.

    These are the inverses of ``c * (a^-1 * eps') * t`` for ``t`` in E1 minus
    zero, always 127 values.
    """
    _check_fault_args(c, eps_prime)
    lam = MUL[c][AFFINE_INV_TABLE[eps_prime]]
    return frozenset(INV[MUL[lam][t]] for t in E1_NONZERO)


@functools.lru_cache(maxsize=1)
def _reachable_output_diffs() -> Tuple[FrozenSet[int], ...]:
    # reachable[d] = { s(x ^ d) ^ s(x) : x in GF(2^8) }
    return tuple(frozenset(SBOX[x ^ d] ^ SBOX[x] for x in range(256)) for d in range(256))


def brute_force_fault_set(c: int, eps_prime: int) -> FrozenSet[int]:
    """Same set as :func:`fault_candidates`, by enumerating every ``x`` and ``eps``."""
    _check_fault_args(c, eps_prime)
    reachable = _reachable_output_diffs()
    return frozenset(eps for eps in range(1, 256) if eps_prime in reachable[gf_mul(c, eps)])


def intersect_fault_sets(sets: Sequence[FrozenSet[int]]) -> FrozenSet[int]:
    """Committed-fault set: values of ``eps`` common to all four slots."""
    if not sets:
        raise ValueError("need at least one set")
    result = functools.reduce(frozenset.intersection, sets)
    if not result:
        raise InconsistentHypothesis("fault sets have empty intersection")
    return result


def key_candidates(c: int, eps_prime: int, eps: int, faulty_byte: int) -> FrozenSet[int]:
    """Last-round-key byte values consistent with fault ``eps`` in this slot.

    Two values in general, four when ``theta`` is one.
    """
    ce = MUL[c][eps]
    theta = INV[MUL[AFFINE_INV_TABLE[eps_prime]][ce]] if ce else 0
    roots = solve_quadratic(theta) if theta else None
    if roots is None:
        raise AnalysisError(
            f"fault {eps:02X} is not compatible with c={c:02X}, difference {eps_prime:02X}"
        )
    alpha, beta = roots
    keys = {SBOX[MUL[ce][alpha]] ^ faulty_byte, SBOX[MUL[ce][beta]] ^ faulty_byte}
    if theta == 1:
        keys.update((SBOX_CONSTANT ^ faulty_byte, SBOX[ce] ^ faulty_byte))
    return frozenset(keys)


# --- per-pair analysis ----------------------------------------------------------

@dataclass(frozen=True)
class HypothesisResult:
    column: int
    row: int
    faults: FrozenSet[int]


@dataclass(frozen=True)
class FaultOption:
    """One (row, fault value) explanation of a column and the key bytes it allows per slot."""

    slots: Tuple[int, ...]
    row: int
    eps: int
    keys: Tuple[FrozenSet[int], ...]


@dataclass(frozen=True)
class PairReport:
    """Key-byte candidate sets deduced from one pair, by ciphertext position."""

    candidates: Mapping[int, FrozenSet[int]]
    hypotheses: Tuple[HypothesisResult, ...] = ()
    options: Tuple[FaultOption, ...] = ()


def _analyze_pattern(diff: DiffState, faulty: bytes, pattern: FaultPattern):
    per_byte: Dict[int, set] = {pos: set() for pos in pattern.slots}
    survivors = []
    options = []
    for row in pattern.row_hypotheses:
        coeffs = [FaultPattern.coefficient(row, k) for k in range(4)]
        try:
            faults = intersect_fault_sets([
                fault_candidates(coeffs[k], diff.values[pos])
                for k, pos in enumerate(pattern.slots)
            ])
        except InconsistentHypothesis:
            log.debug("column %d row %d pruned", pattern.injected_column, row)
            continue
        survivors.append(HypothesisResult(pattern.injected_column, row, faults))
        for eps in sorted(faults):
            keys = tuple(
                key_candidates(coeffs[k], diff.values[pos], eps, faulty[pos])
                for k, pos in enumerate(pattern.slots)
            )
            options.append(FaultOption(pattern.slots, row, eps, keys))
            for pos, kc in zip(pattern.slots, keys):
                per_byte[pos] |= kc
    if not survivors:
        raise InconsistentHypothesis(
            f"no row hypothesis survives for column {pattern.injected_column}"
        )
    return {pos: frozenset(v) for pos, v in per_byte.items()}, survivors, options


def analyze_pair(correct: BytesLike, faulty: BytesLike,
                 location: Optional[int] = None) -> PairReport:
    """Candidate sets for the key bytes touched by one faulty encryption.

    ``location`` is the MixColumns-input byte index of a fault in the last
    window, when known.  Sixteen-byte differentials from a fault two rounds
    before the end are split into four columns, each analysed with unknown row.
    """
    faulty = bytes(faulty)
    diff = differential(correct, faulty)
    if len(diff.support) == 16:
        groups = [(g, None) for g in split_deep_fault(diff)]
    else:
        groups = [(diff, location)]
    candidates: Dict[int, FrozenSet[int]] = {}
    hypotheses: List[HypothesisResult] = []
    options: List[FaultOption] = []
    for g, loc in groups:
        per_byte, survivors, opts = _analyze_pattern(g, faulty, classify(g, loc))
        candidates.update(per_byte)
        hypotheses.extend(survivors)
        options.extend(opts)
    return PairReport(candidates, tuple(hypotheses), tuple(options))


# --- accumulation across pairs ---------------------------------------------------

@dataclass(frozen=True)
class CandidateTracker:
    """Per key byte, the values still possible; absent bytes are unconstrained.

    ``constrained_by[i]`` counts the consumed pairs that touched byte ``i``.
    """

    candidates: Mapping[int, FrozenSet[int]] = field(default_factory=dict)
    pairs_consumed: int = 0
    constrained_by: Mapping[int, int] = field(default_factory=dict)

    def count(self, i: int) -> int:
        return len(self.candidates[i]) if i in self.candidates else 256

    def value(self, i: int) -> Optional[int]:
        cands = self.candidates.get(i)
        if cands is not None and len(cands) == 1:
            return next(iter(cands))
        return None

    @property
    def converged(self) -> bool:
        return all(self.value(i) is not None for i in range(16))

    def key(self) -> Optional[bytes]:
        if not self.converged:
            return None
        return bytes(self.value(i) for i in range(16))


def accumulate(tracker: CandidateTracker, report: PairReport) -> CandidateTracker:
    candidates = dict(tracker.candidates)
    constrained_by = dict(tracker.constrained_by)
    for pos, cands in report.candidates.items():
        merged = candidates[pos] & cands if pos in candidates else frozenset(cands)
        if not merged:
            raise ContradictionError(f"key byte {pos} has no remaining candidate")
        candidates[pos] = merged
        constrained_by[pos] = constrained_by.get(pos, 0) + 1
    return CandidateTracker(candidates, tracker.pairs_consumed + 1, constrained_by)


def refine(tracker: CandidateTracker, reports: Sequence[PairReport]) -> CandidateTracker:
    """Drop fault explanations that contradict the tracker, until nothing changes.

    An option (row, eps) of a pair is kept only if every slot still has a
    key candidate in common with the tracker; the surviving options are
    then unioned per byte and intersected in.  The true explanation always
    survives, so the true key is never removed, and the fixed point reached
    does not depend on the order of ``reports``.
    """
    candidates = dict(tracker.candidates)
    changed = True
    while changed:
        changed = False
        for report in reports:
            allowed: Dict[int, set] = {pos: set() for pos in report.candidates}
            for opt in report.options:
                narrowed = [
                    kc & candidates[pos] if pos in candidates else kc
                    for pos, kc in zip(opt.slots, opt.keys)
                ]
                if all(narrowed):
                    for pos, kc in zip(opt.slots, narrowed):
                        allowed[pos].update(kc)
            for pos, values in allowed.items():
                merged = frozenset(values)
                if pos in candidates:
                    merged &= candidates[pos]
                if not merged:
                    raise ContradictionError(f"key byte {pos} has no remaining candidate")
                if merged != candidates.get(pos):
                    candidates[pos] = merged
                    changed = True
    return CandidateTracker(candidates, tracker.pairs_consumed, tracker.constrained_by)


# --- whole attack --------------------------------------------------------------------

@dataclass(frozen=True)
class PairInput:
    plaintext: Optional[bytes]
    correct: bytes
    faulty: bytes
    # MixColumns-input byte index of the fault, for known-location analysis
    location: Optional[int] = None


@dataclass(frozen=True)
class ByteAudit:
    candidate_count: int
    value: Optional[int]
    # pairs touching this byte consumed by the time it became a singleton
    pairs_to_converge: Optional[int]
    # candidate count after each consumed pair
    history: Tuple[int, ...]


@dataclass
class AttackResult:
    variant: int
    tracker: CandidateTracker
    skipped: List[Tuple[int, str]]
    per_byte: List[ByteAudit]
    last_round_key: Optional[bytes] = None
    cipher_key: Optional[bytes] = None
    verified: bool = False

    @property
    def pairs_used(self) -> int:
        return self.tracker.pairs_consumed

    @property
    def converged(self) -> bool:
        return self.last_round_key is not None

    @property
    def status(self) -> str:
        return "converged" if self.converged else "partial"

    @property
    def last_round_key_only(self) -> bool:
        return self.converged and self.cipher_key is None

    def pairs_per_group(self) -> List[Optional[int]]:
        """Pairs each output group (one MixColumns column) needed to converge."""
        out = []
        for j in range(4):
            counts = [self.per_byte[p].pairs_to_converge for p in output_positions(j)]
            out.append(None if None in counts else max(counts))
        return out


def run_attack(pairs: Sequence[PairInput], location_mode: str = "unknown",
               variant: int = 128, refined: bool = True) -> AttackResult:
    """Feed pairs through the analysis until all 16 key bytes are determined.

    With ``refined`` each new pair is followed by :func:`refine` over all
    pairs so far; without it candidate sets are only intersected.  Unusable
    pairs are skipped and listed in ``AttackResult.skipped``.  On
    convergence for AES-128 the cipher key is recovered and checked by
    re-encrypting a plaintext from the pairs.

    Raises:
        VerificationError: the recovered key fails to reproduce a ciphertext.
    """
    if location_mode not in ("known", "unknown"):
        raise ValueError(f"location mode must be 'known' or 'unknown', got {location_mode!r}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant}")
    if not pairs:
        raise ValueError("need at least one pair")

    tracker = CandidateTracker()
    skipped: List[Tuple[int, str]] = []
    seen = set()
    reports: List[PairReport] = []
    trail: List[Tuple[int, ...]] = []
    converged_after: Dict[int, int] = {}
    for index, pair in enumerate(pairs):
        if tracker.converged:
            break
        dedup_key = (pair.plaintext, pair.faulty) if pair.plaintext else (pair.correct, pair.faulty)
        if dedup_key in seen:
            skipped.append((index, "duplicate pair"))
            continue
        seen.add(dedup_key)
        location = None
        if location_mode == "known":
            if pair.location is None:
                skipped.append((index, "fault location unknown"))
                continue
            location = pair.location
        try:
            report = analyze_pair(pair.correct, pair.faulty, location)
        except (UnsupportedShape, NoFaultError, InconsistentHypothesis) as exc:
            log.info("skipping pair %d: %s", index, exc)
            skipped.append((index, str(exc)))
            continue
        tracker = accumulate(tracker, report)
        if refined:
            reports.append(report)
            tracker = refine(tracker, reports)
        trail.append(tuple(tracker.count(i) for i in range(16)))
        for i in range(16):
            if i not in converged_after and tracker.value(i) is not None:
                converged_after[i] = tracker.constrained_by[i]

    per_byte = [
        ByteAudit(tracker.count(i), tracker.value(i), converged_after.get(i),
                  tuple(step[i] for step in trail))
        for i in range(16)
    ]
    result = AttackResult(variant, tracker, skipped, per_byte, tracker.key())
    if result.last_round_key is not None and last_round_key_suffices(variant):
        key = recover_key(FinalKeyMaterial(variant, result.last_round_key))
        reference = next((p for p in pairs if p.plaintext is not None), None)
        if reference is not None:
            if encrypt_block(key, reference.plaintext) != reference.correct:
                raise VerificationError("recovered key does not reproduce the correct ciphertext")
            result.verified = True
        result.cipher_key = key
    return result
