"""Command-line front end.

Exit codes: 0 on success (or a converged attack), 2 when an attack ends
with unresolved key bytes, 1 on usage or data errors.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from typing import List, Optional

from .aes import AESUsageError, block_to_hex, encrypt_block, hex_to_block, variant_for_key_length
from .analysis import AnalysisError, run_attack
from .faults import FaultRejected, FaultSpec, Location, Model, inject, make_campaign
from .keyrecovery import recover_key_from_hex
from .report import PairFileError, PairRecord, attack_report, dump_report, read_pairs, write_pairs

log = logging.getLogger("aesdfa")

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _key(text: str, variant: Optional[int]) -> bytes:
    key = hex_to_block(text)
    actual = variant_for_key_length(len(key))
    if variant is not None and variant != actual:
        raise UsageError(f"--variant {variant} does not match a {len(key)}-byte key")
    return key


def _fault_spec(args) -> FaultSpec:
    if args.round_offset == 2:
        location = Location.DEEP
    elif args.point == "window":
        location = Location.WINDOW
    else:
        location = Location.AFTER_SHIFT_ROWS
    byte = args.byte if args.byte == "random" else int(args.byte)
    model, xor_value = args.model, None
    if model.startswith("xor:"):
        xor_value = int(model[4:], 16)
        model = "xor"
    try:
        return FaultSpec(location, byte, Model(model), xor_value)
    except FaultRejected:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _byte_arg(text: str) -> str:
    if text == "random" or (text.isdigit() and 0 <= int(text) < 16):
        return text
    raise argparse.ArgumentTypeError("expected 0..15 or 'random'")


def _model_arg(text: str) -> str:
    if text in ("random", "stuck00", "stuckFF"):
        return text
    if text.startswith("xor:") and len(text) == 6:
        try:
            int(text[4:], 16)
            return text
        except ValueError:
            pass
    raise argparse.ArgumentTypeError("expected xor:HH, random, stuck00 or stuckFF")


def _add_fault_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--round-offset", type=int, choices=(1, 2), default=1,
                   help="1: between the last two MixColumns; 2: before MixColumns two rounds "
                        "from the end")
    p.add_argument("--point", choices=("shiftrows", "window"), default="shiftrows",
                   help="with --round-offset 1: fault after ShiftRows, or at a random step "
                        "boundary in the window")
    p.add_argument("--byte", type=_byte_arg, default="random")
    p.add_argument("--model", type=_model_arg, default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-truth", action="store_true",
                   help="append the realized fault to each pair record")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aesdfa", description="Differential fault analysis toolkit for AES.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encrypt", help="encrypt one block")
    p.add_argument("--key", required=True)
    p.add_argument("--pt", required=True)
    p.add_argument("--variant", type=int, choices=(128, 192, 256))

    p = sub.add_parser("inject", help="encrypt one block with and without a fault")
    p.add_argument("--key", required=True)
    p.add_argument("--pt", required=True)
    _add_fault_flags(p)

    p = sub.add_parser("campaign", help="write a pair file over random plaintexts")
    p.add_argument("--key", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", default="-")
    _add_fault_flags(p)

    p = sub.add_parser("attack", help="recover the last round key from a pair file")
    p.add_argument("--pairs", required=True, help="pair file, or - for standard input")
    p.add_argument("--location", choices=("known", "unknown"), default="unknown")
    p.add_argument("--variant", type=int, choices=(128, 192, 256), default=128)
    p.add_argument("--report", help="also write the JSON report to this file")
    p.add_argument("--figure", help="render the convergence figure to this file")
    p.add_argument("--no-refine", action="store_true",
                   help="only intersect per-pair candidate sets")

    p = sub.add_parser("recover-key", help="invert the key schedule from its last Nk words")
    p.add_argument("--variant", type=int, choices=(128, 192, 256), required=True)
    p.add_argument("--final-words", required=True)
    return parser


@contextlib.contextmanager
def _open(path: str, mode: str):
    if path == "-":
        yield sys.stdin if "r" in mode else sys.stdout
    else:
        with open(path, mode) as fh:
            yield fh


def _cmd_encrypt(args) -> int:
    key = _key(args.key, args.variant)
    print(block_to_hex(encrypt_block(key, hex_to_block(args.pt, 16))))
    return EXIT_OK


def _cmd_inject(args) -> int:
    key = _key(args.key, None)
    run = inject(key, hex_to_block(args.pt, 16), _fault_spec(args), args.seed)
    print(PairRecord.from_run(run, args.with_truth).to_line())
    return EXIT_OK


def _cmd_campaign(args) -> int:
    key = _key(args.key, None)
    runs = make_campaign(key, args.count, _fault_spec(args), args.seed)
    with _open(args.out, "w") as out:
        write_pairs(out, (PairRecord.from_run(r, args.with_truth) for r in runs), args.seed)
    return EXIT_OK


def _cmd_attack(args) -> int:
    with _open(args.pairs, "r") as src:
        records, seed = read_pairs(src)
    if not records:
        raise UsageError("pair file contains no records")
    if args.location == "known" and any(r.truth is None for r in records):
        raise UsageError("--location known needs pair records with truth fields")
    result = run_attack([r.as_input() for r in records], args.location, args.variant,
                        refined=not args.no_refine)
    text = dump_report(attack_report(result, args.location, seed))
    sys.stdout.write(text)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    if args.figure:
        from .plotting import convergence_figure

        convergence_figure(result, args.figure)
    return EXIT_OK if result.converged else EXIT_PARTIAL


def _cmd_recover_key(args) -> int:
    print(block_to_hex(recover_key_from_hex(args.variant, args.final_words)))
    return EXIT_OK


COMMANDS = {
    "encrypt": _cmd_encrypt,
    "inject": _cmd_inject,
    "campaign": _cmd_campaign,
    "attack": _cmd_attack,
    "recover-key": _cmd_recover_key,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, AESUsageError, PairFileError, FaultRejected, AnalysisError,
            OSError) as exc:
        print(f"aesdfa {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
