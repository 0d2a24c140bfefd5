import os
import random

import pytest

import paper_tables as T
from conftest import CIPHERTEXT, K9, K10, KEY, PLAINTEXT
from aesdfa.aes import (
    AESUsageError,
    Step,
    block_to_hex,
    encrypt_block,
    encrypt_traced,
    expand_key,
    hex_to_block,
    inv_mix_columns,
    mix_columns,
    round_step,
    round_steps,
    shift_rows,
    state_rows,
    to_state,
)

FIPS_VECTORS = [
    # FIPS-197 Appendix C.1-C.3
    ("000102030405060708090a0b0c0d0e0f",
     "00112233445566778899aabbccddeeff", "69c4e0d86a7b0430d8cdb78070b4c55a"),
    ("000102030405060708090a0b0c0d0e0f1011121314151617",
     "00112233445566778899aabbccddeeff", "dda97ca4864cdfe06eaf70a0ec0d7191"),
    ("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
     "00112233445566778899aabbccddeeff", "8ea2b7ca516745bfeafc49904b496089"),
]


def test_worked_example_ciphertext():
    assert encrypt_block(KEY, PLAINTEXT) == CIPHERTEXT
    assert block_to_hex(CIPHERTEXT) == "3925841D02DC09FBDC118597196A0B32"


@pytest.mark.parametrize("key, pt, ct", FIPS_VECTORS)
def test_fips_known_answers(key, pt, ct):
    assert encrypt_block(bytes.fromhex(key), bytes.fromhex(pt)) == bytes.fromhex(ct)


def test_against_independent_implementation():
    crypto = pytest.importorskip("cryptography.hazmat.primitives.ciphers")
    rng = random.Random(5)
    for n in (16, 24, 32):
        for _ in range(20):
            key, pt = rng.randbytes(n), rng.randbytes(16)
            enc = crypto.Cipher(crypto.algorithms.AES(key), crypto.modes.ECB()).encryptor()
            assert encrypt_block(key, pt) == enc.update(pt) + enc.finalize()


def test_round_keys_of_worked_example():
    schedule = expand_key(KEY)
    assert schedule.round_key(10) == tuple(K10) == tuple(T.K10)
    assert schedule.round_key(9) == tuple(K9) == tuple(T.K9)


@pytest.mark.parametrize("n, words", [(16, 44), (24, 52), (32, 60)])
def test_schedule_shape(n, words):
    key = os.urandom(n)
    schedule = expand_key(key)
    assert len(schedule.words) == words
    assert bytes(b for w in schedule.words[:n // 4] for b in w) == key


def test_bad_key_length():
    with pytest.raises(AESUsageError):
        expand_key(bytes(15))
    with pytest.raises(AESUsageError):
        encrypt_block(KEY, bytes(15))


def test_state_layout_is_column_major():
    block = bytes(range(16))
    assert state_rows(to_state(block))[1] == [1, 5, 9, 13]
    assert bytes(to_state(block)) == block


def test_round_steps_on_worked_tables():
    assert round_step(Step.SHIFT_ROWS, tuple(T.AFTER_SUB_BYTES_10)) == tuple(T.AFTER_SHIFT_ROWS_10)
    assert round_step(Step.MIX_COLUMNS, tuple(T.FAULT_INJECTED)) == tuple(T.AFTER_MIX_COLUMN)
    assert round_step(Step.ADD_ROUND_KEY, tuple(T.AFTER_MIX_COLUMN), tuple(T.K9)) == tuple(
        T.AFTER_ADD_ROUND_KEY_9)
    assert round_step(Step.SUB_BYTES, tuple(T.AFTER_ADD_ROUND_KEY_9)) == tuple(
        T.AFTER_SUB_BYTES_10)
    assert round_step(Step.ADD_ROUND_KEY, tuple(T.AFTER_SHIFT_ROWS_10), tuple(T.K10)) == tuple(
        T.FAULTY_OUTPUT)


def test_mix_columns_single_byte_spread():
    eps = 0x1E
    state = (eps,) + (0,) * 15
    assert mix_columns(state)[:4] == (0x3C, eps, eps, 0x22)
    assert mix_columns(state)[4:] == (0,) * 12


def test_round_step_key_usage():
    s = tuple(range(16))
    with pytest.raises(AESUsageError):
        round_step(Step.ADD_ROUND_KEY, s)
    with pytest.raises(AESUsageError):
        round_step(Step.SUB_BYTES, s, s)


def test_shift_rows_order_four():
    s = tuple(os.urandom(16))
    t = s
    for _ in range(4):
        t = shift_rows(t)
    assert t == s


def test_mix_columns_invertible():
    for _ in range(50):
        s = tuple(os.urandom(16))
        assert inv_mix_columns(mix_columns(s)) == s


def test_trace():
    ct, trace = encrypt_traced(KEY, PLAINTEXT)
    assert ct == CIPHERTEXT
    assert bytes(trace.final) == ct
    assert len(trace) == 40 == 1 + 4 * 9 + 3
    assert list(trace.labels) == round_steps(10)
    assert trace[(0, Step.ADD_ROUND_KEY)] is trace.states[0]
    assert tuple(trace[(9, Step.SHIFT_ROWS)]) == tuple(T.AFTER_SHIFT_ROWS_9)
    assert trace[(9, "ShiftRows")][:4] == (0x87, 0x6E, 0x46, 0xA6)
    assert (8, Step.SHIFT_ROWS) in trace.labels


@pytest.mark.parametrize("n", [16, 24, 32])
def test_trace_agrees_with_encrypt(n):
    rng = random.Random(n)
    for _ in range(20):
        key, pt = rng.randbytes(n), rng.randbytes(16)
        ct, trace = encrypt_traced(key, pt)
        assert ct == encrypt_block(key, pt) == bytes(trace.final)
        nr = {16: 10, 24: 12, 32: 14}[n]
        assert len(trace) == 4 * nr


def test_encrypt_injective_on_random_plaintexts():
    rng = random.Random(1)
    key = rng.randbytes(16)
    pts = {rng.randbytes(16) for _ in range(1000)}
    assert len({encrypt_block(key, p) for p in pts}) == len(pts)


def test_hex_helpers():
    assert hex_to_block("32 43 F6 A8 88 5A 30 8D 31 31 98 A2 E0 37 07 34") == PLAINTEXT
    with pytest.raises(AESUsageError):
        hex_to_block("XYZ")
    with pytest.raises(AESUsageError):
        hex_to_block("00", 16)
