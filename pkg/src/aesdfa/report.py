"""Pair files and attack reports.

Pair file: one record per line,

    PLAINTEXT CORRECT FAULTY [round=R,step=S,byte=B,model=M,value=HH]

with 32 uppercase hex digits per block.  The optional trailing field is the
ground truth of a simulated fault.  Lines starting with ``#`` are comments;
a ``# seed=N`` comment records the campaign seed.

Attack report: a JSON object, see :func:`attack_report`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO, Iterable, List, Optional, Tuple

from .aes import block_to_hex, hex_to_block
from .analysis import AttackResult, PairInput
from .faults import FaultTruth, FaultyRun


class PairFileError(ValueError):
    pass


@dataclass(frozen=True)
class PairRecord:
    plaintext: bytes
    correct: bytes
    faulty: bytes
    truth: Optional[FaultTruth] = None

    def __post_init__(self):
        for name in ("plaintext", "correct", "faulty"):
            if len(getattr(self, name)) != 16:
                raise PairFileError(f"{name} must be 16 bytes")
        if self.correct == self.faulty:
            raise PairFileError("correct and faulty ciphertexts are identical")

    @classmethod
    def from_run(cls, run: FaultyRun, with_truth: bool = False) -> "PairRecord":
        return cls(run.plaintext, run.correct, run.faulty, run.truth if with_truth else None)

    def to_line(self) -> str:
        fields = [block_to_hex(self.plaintext), block_to_hex(self.correct),
                  block_to_hex(self.faulty)]
        if self.truth is not None:
            t = self.truth
            fields.append(f"round={t.round},step={t.step.value},byte={t.byte_index},"
                          f"model={t.model.value},value={t.value:02X}")
        return " ".join(fields)

    @classmethod
    def from_line(cls, line: str) -> "PairRecord":
        parts = line.split()
        if len(parts) not in (3, 4):
            raise PairFileError(f"expected 3 or 4 fields, got {len(parts)}")
        try:
            blocks = [hex_to_block(p, 16) for p in parts[:3]]
        except ValueError as exc:
            raise PairFileError(str(exc)) from exc
        truth = parse_truth(parts[3]) if len(parts) == 4 else None
        return cls(*blocks, truth=truth)

    def as_input(self) -> PairInput:
        location = self.truth.mix_input_index if self.truth is not None else None
        return PairInput(self.plaintext, self.correct, self.faulty, location)


def parse_truth(text: str) -> FaultTruth:
    try:
        items = dict(item.split("=", 1) for item in text.split(","))
        return FaultTruth(
            round=int(items["round"]),
            step=items["step"],
            byte_index=int(items["byte"]),
            model=items["model"],
            value=int(items["value"], 16),
        )
    except (KeyError, ValueError) as exc:
        raise PairFileError(f"malformed truth field {text!r}") from exc


_SEED_RE = re.compile(r"#\s*seed=(\d+)")


def write_pairs(out: IO[str], records: Iterable[PairRecord], seed: Optional[int] = None) -> None:
    if seed is not None:
        out.write(f"# seed={seed}\n")
    for rec in records:
        out.write(rec.to_line() + "\n")


def read_pairs(src: IO[str]) -> Tuple[List[PairRecord], Optional[int]]:
    """Parse a pair file, returning the records and the recorded seed, if any."""
    records = []
    seed = None
    for lineno, line in enumerate(src, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _SEED_RE.match(line)
            if m:
                seed = int(m.group(1))
            continue
        try:
            records.append(PairRecord.from_line(line))
        except PairFileError as exc:
            raise PairFileError(f"line {lineno}: {exc}") from exc
    return records, seed


def attack_report(result: AttackResult, location_mode: str,
                  seed: Optional[int] = None) -> dict:
    """JSON-ready summary of an attack.

    ``status`` is ``converged`` exactly when every ``candidate_count`` is 1.
    ``cipher_key_hex`` is null when the last round key alone cannot be
    inverted (AES-192/256), in which case ``last_round_key_only`` is true.
    """
    return {
        "status": result.status,
        "variant": result.variant,
        "location": location_mode,
        "k_last_round_hex": block_to_hex(result.last_round_key) if result.converged else None,
        "cipher_key_hex": block_to_hex(result.cipher_key) if result.cipher_key else None,
        "last_round_key_only": result.last_round_key_only,
        "verified": result.verified,
        "per_byte": [
            {
                "index": i,
                "candidate_count": b.candidate_count,
                "value": f"{b.value:02X}" if b.value is not None else None,
                "pairs_to_converge": b.pairs_to_converge,
            }
            for i, b in enumerate(result.per_byte)
        ],
        "pairs_used": result.pairs_used,
        "pairs_skipped": len(result.skipped),
        "skipped": [{"pair": i, "reason": reason} for i, reason in result.skipped],
        "seed": seed,
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
