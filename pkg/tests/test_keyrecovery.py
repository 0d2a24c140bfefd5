import random

import pytest

from conftest import K10, KEY
from aesdfa.aes import AESUsageError, expand_key
from aesdfa.keyrecovery import FinalKeyMaterial, recover_key, recover_key_from_hex


def test_worked_example():
    assert recover_key(FinalKeyMaterial(128, K10)) == KEY
    assert recover_key_from_hex(128, "D014F9A8C9EE2589E13F0CC8B6630CA6") == KEY


@pytest.mark.parametrize("variant", [128, 192, 256])
def test_roundtrip(variant):
    rng = random.Random(variant)
    for _ in range(200):
        key = rng.randbytes(variant // 8)
        final = expand_key(key).final_words()
        assert recover_key(FinalKeyMaterial(variant, final)) == key


def test_aes256_needs_last_two_round_keys():
    key = random.Random(0).randbytes(32)
    schedule = expand_key(key)
    k13_k14 = bytes(schedule.round_key(13)) + bytes(schedule.round_key(14))
    assert recover_key(FinalKeyMaterial(256, k13_k14)) == key


@pytest.mark.parametrize("variant, n", [(128, 15), (192, 16), (256, 16), (256, 24)])
def test_wrong_word_count(variant, n):
    with pytest.raises(AESUsageError):
        FinalKeyMaterial(variant, bytes(n))
