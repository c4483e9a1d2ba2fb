import random

import pytest
from hypothesis import given, settings, strategies as st

from dshrpl.errors import DomainError, IntegrityError, KeyMismatchError, RoutingError
from dshrpl.he import (Ciphertext, aggregate_at, decrypt, encrypt, eval_add, is_probable_prime,
                       keygen, keypair_from_primes, send_data)
from dshrpl.types import DodagGraph

PK, SK = keypair_from_primes(11, 13)
BIG_PK, BIG_SK = keygen(64, rng_seed=11)


def test_fixture_key():
    assert PK.n == 143 and PK.g == 144
    assert decrypt(SK, encrypt(PK, 42, 1)) == 42


def test_exhaustive_roundtrip_on_fixture_key():
    rng = random.Random(0)
    assert all(decrypt(SK, encrypt(PK, m, rng)) == m for m in range(143))


def test_keygen_is_seeded():
    assert keygen(32, rng_seed=5)[0] == keygen(32, rng_seed=5)[0]
    assert keygen(32, rng_seed=5)[0] != keygen(32, rng_seed=6)[0]
    assert BIG_PK.n.bit_length() in (127, 128)
    with pytest.raises(DomainError):
        keygen(8, rng_seed=1)


def test_prime_test():
    assert [p for p in range(60) if is_probable_prime(p)] == [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
    assert not is_probable_prime(561)         # Carmichael number


def test_encryption_is_randomised():
    a, b = encrypt(PK, 9, 1), encrypt(PK, 9, 2)
    assert a != b
    assert decrypt(SK, a) == decrypt(SK, b) == 9
    assert decrypt(SK, encrypt(PK, 0, 3)) == 0
    with pytest.raises(DomainError):
        encrypt(PK, 143)


def test_eval_add_examples():
    r = random.Random(4)
    assert decrypt(SK, eval_add(PK, encrypt(PK, 5, r), encrypt(PK, 7, r))) == 12
    assert decrypt(SK, eval_add(PK, encrypt(PK, 77, r), encrypt(PK, 0, r))) == 77
    assert decrypt(SK, eval_add(PK, encrypt(PK, 142, r), encrypt(PK, 1, r))) == 0
    c = encrypt(PK, 1, r)
    for _ in range(4):
        c = eval_add(PK, c, encrypt(PK, 1, r))
    assert decrypt(SK, c) == 5


def test_key_mismatch_and_tampering():
    c = encrypt(PK, 3, 1)
    with pytest.raises(KeyMismatchError):
        eval_add(BIG_PK, c, c)
    with pytest.raises(KeyMismatchError):
        decrypt(BIG_SK, c)
    with pytest.raises(IntegrityError):
        decrypt(SK, Ciphertext(0, PK.key_id))
    with pytest.raises(IntegrityError):
        decrypt(SK, Ciphertext(11 * 5, PK.key_id))


def test_ciphertext_bytes_roundtrip():
    c = encrypt(BIG_PK, 123456, 2)
    raw = c.to_bytes(BIG_PK)
    assert len(raw) == (BIG_PK.n_square.bit_length() + 7) // 8
    assert Ciphertext.from_bytes(raw, BIG_PK.key_id) == c


@settings(max_examples=100)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 2 ** 32 - 1), st.integers(0, 2 ** 31))
def test_homomorphism_on_sensor_readings(a, b, seed):
    r = random.Random(seed)
    c = eval_add(BIG_PK, encrypt(BIG_PK, a, r), encrypt(BIG_PK, b, r))
    assert decrypt(BIG_SK, c) == (a + b) % BIG_PK.n


# --- delivery along a DODAG --------------------------------------------------------

def tree():
    # 0 <- 1 <- {3, 4};  0 <- 2 <- 5
    return DodagGraph(frozenset(range(6)), {1: 0, 2: 0, 3: 1, 4: 1, 5: 2},
                      {0: 1, 1: 2, 2: 2, 3: 3, 4: 3, 5: 3})


def test_send_data_on_clean_route():
    out = send_data(3, 4242, tree(), BIG_PK, BIG_SK, rng_seed=1)
    assert out.delivered and out.value == 4242 and out.path == (3, 1, 0)


def test_siblings_aggregate_at_parent():
    out = aggregate_at(1, {3: 5, 4: 7}, tree(), PK, SK, rng_seed=1)
    assert out.value == 12 and out.path == (1, 0)
    with pytest.raises(RoutingError):
        aggregate_at(1, {5: 1}, tree(), PK, SK)


def test_active_sinkhole_on_route_drops_payload():
    out = send_data(5, 9, tree(), PK, SK, sinkholes=(2,), rng_seed=1)
    assert not out.delivered and out.dropped_at == 2 and out.value is None
    g = tree()
    g.quarantined = frozenset({2})
    del g.parent[5]
    with pytest.raises(RoutingError):
        send_data(5, 9, g, PK, SK, sinkholes=(2,))
    assert send_data(3, 9, g, PK, SK, sinkholes=(2,)).delivered
