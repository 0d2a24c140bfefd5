import io
import json
import random

import pytest

from conftest import KEY, PLAINTEXT
from aesdfa.aes import Step, block_to_hex
from aesdfa.cli import main
from aesdfa.faults import FaultSpec, FaultTruth, Location, Model, make_campaign
from aesdfa.report import PairFileError, PairRecord, read_pairs, write_pairs

KEY_HEX = block_to_hex(KEY)
PT_HEX = block_to_hex(PLAINTEXT)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_encrypt(capsys):
    code, out, _ = run_cli(capsys, "encrypt", "--key", KEY_HEX, "--pt", PT_HEX)
    assert code == 0
    assert out.strip() == "3925841D02DC09FBDC118597196A0B32"


def test_encrypt_variant_mismatch(capsys):
    code, _, err = run_cli(capsys, "encrypt", "--key", KEY_HEX, "--pt", PT_HEX,
                           "--variant", "256")
    assert code == 1 and "variant" in err


@pytest.mark.parametrize("argv", [
    ["encrypt", "--key", "XYZ", "--pt", PT_HEX],
    ["encrypt", "--key", KEY_HEX, "--pt", "00"],
    ["inject", "--key", KEY_HEX, "--pt", PT_HEX, "--byte", "16"],
    ["inject", "--key", KEY_HEX, "--pt", PT_HEX, "--model", "xor:00"],
    ["inject", "--key", KEY_HEX, "--pt", PT_HEX, "--model", "flip"],
    ["recover-key", "--variant", "192", "--final-words", "D014F9A8C9EE2589E13F0CC8B6630CA6"],
    ["attack", "--pairs", "/nonexistent/pairs.txt"],
    ["frobnicate"],
])
def test_usage_errors_exit_one(capsys, argv):
    with pytest.raises(SystemExit) as exc_info:
        raise SystemExit(main(argv))
    assert exc_info.value.code == 1
    assert capsys.readouterr().err


def test_recover_key(capsys):
    code, out, _ = run_cli(capsys, "recover-key", "--variant", "128", "--final-words",
                           "D014F9A8C9EE2589E13F0CC8B6630CA6")
    assert code == 0 and out.strip() == KEY_HEX


def test_inject_worked_example(capsys):
    code, out, _ = run_cli(capsys, "inject", "--key", KEY_HEX, "--pt", PT_HEX,
                           "--round-offset", "1", "--byte", "0", "--model", "xor:1E",
                           "--seed", "0", "--with-truth")
    assert code == 0
    record = PairRecord.from_line(out)
    assert block_to_hex(record.faulty) == "DE25841D02DC0962DC11C297193B0B32"
    assert record.truth == FaultTruth(9, Step.SHIFT_ROWS, 0, Model.XOR, 0x1E)
    _, plain, _ = run_cli(capsys, "inject", "--key", KEY_HEX, "--pt", PT_HEX, "--byte", "0",
                          "--model", "xor:1E")
    assert len(plain.split()) == 3


def test_inject_deep(capsys):
    code, out, _ = run_cli(capsys, "inject", "--key", KEY_HEX, "--pt", PT_HEX,
                           "--round-offset", "2", "--model", "random", "--seed", "4",
                           "--with-truth")
    record = PairRecord.from_line(out)
    assert record.truth.round == 8
    assert all(a != b for a, b in zip(record.correct, record.faulty))


def test_campaign_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        code, _, _ = run_cli(capsys, "campaign", "--key", KEY_HEX, "--count", "30",
                             "--point", "window", "--seed", "5", "--with-truth",
                             "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    records, seed = read_pairs(io.StringIO(a.read_text()))
    assert len(records) == 30 and seed == 5


def test_campaign_attack_pipeline(tmp_path, capsys, monkeypatch):
    key_hex = block_to_hex(random.Random(1).randbytes(16))
    code, pairs, _ = run_cli(capsys, "campaign", "--key", key_hex, "--count", "50",
                             "--point", "window", "--seed", "3")
    assert code == 0
    monkeypatch.setattr("sys.stdin", io.StringIO(pairs))
    report_path, figure_path = tmp_path / "report.json", tmp_path / "conv.png"
    code, out, _ = run_cli(capsys, "attack", "--pairs", "-", "--location", "unknown",
                           "--report", str(report_path), "--figure", str(figure_path))
    assert code == 0
    report = json.loads(out)
    assert report == json.loads(report_path.read_text())
    assert report["status"] == "converged"
    assert report["cipher_key_hex"] == key_hex
    assert report["seed"] == 3
    assert all(b["candidate_count"] == 1 for b in report["per_byte"])
    assert figure_path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_attack_partial_exit_code(tmp_path, capsys):
    path = tmp_path / "pairs.txt"
    run_cli(capsys, "campaign", "--key", KEY_HEX, "--count", "3", "--seed", "1",
            "--out", str(path))
    code, out, _ = run_cli(capsys, "attack", "--pairs", str(path))
    assert code == 2
    report = json.loads(out)
    assert report["status"] == "partial"
    assert report["k_last_round_hex"] is None
    assert any(b["candidate_count"] > 1 for b in report["per_byte"])


def test_attack_known_location(tmp_path, capsys):
    path = tmp_path / "pairs.txt"
    run_cli(capsys, "campaign", "--key", KEY_HEX, "--count", "40", "--point", "window",
            "--seed", "2", "--with-truth", "--out", str(path))
    code, out, _ = run_cli(capsys, "attack", "--pairs", str(path), "--location", "known",
                           "--no-refine")
    assert code == 0
    assert json.loads(out)["cipher_key_hex"] == KEY_HEX


def test_attack_known_needs_truth(tmp_path, capsys):
    path = tmp_path / "pairs.txt"
    run_cli(capsys, "campaign", "--key", KEY_HEX, "--count", "5", "--out", str(path))
    code, _, err = run_cli(capsys, "attack", "--pairs", str(path), "--location", "known")
    assert code == 1 and "truth" in err


def test_attack_aes256_reports_last_round_key_only(tmp_path, capsys):
    key = random.Random(2).randbytes(32)
    path = tmp_path / "pairs.txt"
    run_cli(capsys, "campaign", "--key", block_to_hex(key), "--count", "60", "--point",
            "window", "--seed", "6", "--out", str(path))
    code, out, _ = run_cli(capsys, "attack", "--pairs", str(path), "--variant", "256")
    report = json.loads(out)
    assert code == 0
    assert report["last_round_key_only"] and report["cipher_key_hex"] is None
    assert report["k_last_round_hex"] is not None


# --- pair file format --------------------------------------------------------------

def test_pair_file_roundtrip():
    runs = make_campaign(KEY, 10, FaultSpec(Location.DEEP, "random", Model.STUCK_FF), seed=1)
    buf = io.StringIO()
    write_pairs(buf, [PairRecord.from_run(r, with_truth=True) for r in runs], seed=1)
    records, seed = read_pairs(io.StringIO(buf.getvalue()))
    assert seed == 1
    assert [r.truth for r in records] == [r.truth for r in runs]
    assert [r.faulty for r in records] == [r.faulty for r in runs]
    fields = buf.getvalue().splitlines()[1].split(" ")
    assert len(fields) == 4
    assert all(len(f) == 32 and f == f.upper() for f in fields[:3])


@pytest.mark.parametrize("line", [
    "00",
    "00112233445566778899AABBCCDDEEFF 00112233445566778899AABBCCDDEEFF "
    "00112233445566778899AABBCCDDEEFF",
    "GG112233445566778899AABBCCDDEEFF 00112233445566778899AABBCCDDEEFF "
    "10112233445566778899AABBCCDDEEFF",
    "00112233445566778899AABBCCDDEEFF 00112233445566778899AABBCCDDEEFF "
    "10112233445566778899AABBCCDDEEFF round=9",
])
def test_pair_file_rejects_bad_lines(line):
    with pytest.raises(PairFileError):
        read_pairs(io.StringIO(line + "\n"))
