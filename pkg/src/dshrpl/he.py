"""Paillier additively homomorphic encryption.

Textbook scheme over ``n = p*q`` with ``g = n + 1``. Randomness always comes
from an explicit seed or :class:`random.Random`, so a fixed seed reproduces
keys and ciphertexts exactly.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Tuple, Union

from .errors import DomainError, IntegrityError, KeyGenerationError, KeyMismatchError, RoutingError

DEFAULT_PRIME_BITS = 1024
MIN_PRIME_BITS = 16
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)

RngLike = Union[int, random.Random, None]


def _rng(seed: RngLike) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


def is_probable_prime(n: int, rounds: int = 40, rng: RngLike = 0) -> bool:
    """Miller-Rabin test with seeded witnesses."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    r = _rng(rng)
    for _ in range(rounds):
        a = r.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime(bits: int, rng: random.Random, max_tries: int = 100_000) -> int:
    for _ in range(max_tries):
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(cand, rng=rng.getrandbits(32)):
            return cand
    raise KeyGenerationError(f"no {bits}-bit prime found in {max_tries} draws")


@dataclass(frozen=True)
class PublicKey:
    n: int
    g: int

    @property
    def n_square(self) -> int:
        return self.n * self.n

    @property
    def key_id(self) -> int:
        """32-bit fingerprint carried in DATA packets."""
        digest = hashlib.blake2b(f"{self.n}:{self.g}".encode(), digest_size=4).digest()
        return int.from_bytes(digest, "big")


@dataclass(frozen=True, repr=False)
class SecretKey:
    lam: int
    mu: int
    public: PublicKey

    def __repr__(self):
        return f"SecretKey(key_id={self.public.key_id:#010x})"


@dataclass(frozen=True)
class Ciphertext:
    value: int
    key_id: int

    def to_bytes(self, pk: PublicKey) -> bytes:
        width = (pk.n_square.bit_length() + 7) // 8
        return self.value.to_bytes(width, "big")

    @classmethod
    def from_bytes(cls, raw: bytes, key_id: int) -> "Ciphertext":
        return cls(int.from_bytes(raw, "big"), key_id)


def keypair_from_primes(p: int, q: int):
    if p == q:
        raise KeyGenerationError("p and q must be distinct")
    n = p * q
    if math.gcd(n, (p - 1) * (q - 1)) != 1:
        raise KeyGenerationError("gcd(pq, (p-1)(q-1)) must be 1")
    lam = math.lcm(p - 1, q - 1)
    pk = PublicKey(n, n + 1)
    # with g = n + 1, L(g^lam mod n^2) = lam mod n
    mu = pow(lam % n, -1, n)
    return pk, SecretKey(lam, mu, pk)


def keygen(prime_bits: int = DEFAULT_PRIME_BITS, rng_seed: RngLike = None):
    """Generate a key pair from two distinct seeded random primes."""
    if prime_bits < MIN_PRIME_BITS:
        raise DomainError(f"prime_bits must be at least {MIN_PRIME_BITS}")
    rng = _rng(rng_seed)
    for _ in range(64):
        p = random_prime(prime_bits, rng)
        q = random_prime(prime_bits, rng)
        if p != q and math.gcd(p * q, (p - 1) * (q - 1)) == 1:
            return keypair_from_primes(p, q)
    raise KeyGenerationError("could not draw a usable prime pair")


def encrypt(pk: PublicKey, m: int, rng_seed: RngLike = None) -> Ciphertext:
    if not 0 <= m < pk.n:
        raise DomainError(f"plaintext {m} outside [0, n)")
    rng = _rng(rng_seed)
    n, nn = pk.n, pk.n_square
    while True:
        r = rng.randrange(1, n)
        if math.gcd(r, n) == 1:
            break
    # g^m = (1 + n)^m = 1 + m*n  (mod n^2)
    c = (1 + m * n) % nn * pow(r, n, nn) % nn
    return Ciphertext(c, pk.key_id)


def eval_add(pk: PublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Ciphertext of the sum of the two plaintexts modulo n."""
    kid = pk.key_id
    if c1.key_id != kid or c2.key_id != kid:
        raise KeyMismatchError("ciphertexts were not produced under this public key")
    return Ciphertext(c1.value * c2.value % pk.n_square, kid)


def decrypt(sk: SecretKey, c: Ciphertext) -> int:
    pk = sk.public
    n, nn = pk.n, pk.n_square
    if c.key_id != pk.key_id:
        raise KeyMismatchError("ciphertext belongs to another key")
    if not 0 < c.value < nn or math.gcd(c.value, n) != 1:
        raise IntegrityError("malformed ciphertext")
    u = pow(c.value, sk.lam, nn)
    return (u - 1) // n * sk.mu % n


# --- delivery over a DODAG -------------------------------------------------

@dataclass(frozen=True)
class DeliveryOutcome:
    delivered: bool
    value: Optional[int]                 # decrypted at the root; None when dropped
    path: Tuple[int, ...]                # hops actually traversed
    dropped_at: Optional[int] = None


def send_data(source: int, payload: int, graph, pk: PublicKey, sk: SecretKey,
              sinkholes: Iterable[int] = (), rng_seed: RngLike = None) -> DeliveryOutcome:
    """Encrypt ``payload`` at ``source`` and forward it parent by parent to the root.

    Only the source sees the plaintext; relays handle the ciphertext and the
    root decrypts. A relay listed in ``sinkholes`` (and not quarantined)
    swallows the packet.
    """
    path = graph.path_to_root(source)
    if path is None:
        raise RoutingError(f"node {source} is not attached to the root")
    bad = set(sinkholes) - set(graph.quarantined)
    ct = encrypt(pk, payload, rng_seed)
    for hop in path[1:-1]:
        if hop in bad:
            return DeliveryOutcome(False, None, tuple(path[:path.index(hop) + 1]), hop)
    return DeliveryOutcome(True, decrypt(sk, ct), tuple(path))


def aggregate_at(parent: int, payloads: Mapping[int, int], graph, pk: PublicKey, sk: SecretKey,
                 rng_seed: RngLike = None) -> DeliveryOutcome:
    """Children of ``parent`` each encrypt a reading; ``parent`` adds the ciphertexts
    and forwards the single aggregate to the root, which decrypts the sum."""
    rng = _rng(rng_seed)
    for child in payloads:
        if graph.parent.get(child) != parent:
            raise RoutingError(f"node {child} is not a child of {parent}")
    path = graph.path_to_root(parent)
    if path is None:
        raise RoutingError(f"node {parent} is not attached to the root")
    cts = [encrypt(pk, m, rng) for _, m in sorted(payloads.items())]
    total = cts[0]
    for c in cts[1:]:
        total = eval_add(pk, total, c)
    return DeliveryOutcome(True, decrypt(sk, total), tuple(path))
