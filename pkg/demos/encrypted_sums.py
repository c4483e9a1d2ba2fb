"""Additively homomorphic transport in a few lines.

Two children encrypt their readings under the root's public key; their
parent multiplies the ciphertexts without seeing either value; only the
root can decrypt, and it gets the sum.
"""

from dshrpl.he import aggregate_at, decrypt, encrypt, eval_add, keygen, send_data
from dshrpl.types import DodagGraph

pk, sk = keygen(64, rng_seed=1)
a, b = encrypt(pk, 5, rng_seed=10), encrypt(pk, 7, rng_seed=11)
print("Enc(5) =", hex(a.value)[:24] + "...")
print("Enc(7) =", hex(b.value)[:24] + "...")
print("Dec(Enc(5) * Enc(7)) =", decrypt(sk, eval_add(pk, a, b)))

# 0 <- 1 <- {3, 4};  0 <- 2 <- 5, and node 2 is a sinkhole
g = DodagGraph(frozenset(range(6)), {1: 0, 2: 0, 3: 1, 4: 1, 5: 2})
print("siblings 3 and 4 aggregated at 1:", aggregate_at(1, {3: 5, 4: 7}, g, pk, sk, rng_seed=2).value)
print("node 5 through the sinkhole:", send_data(5, 99, g, pk, sk, sinkholes=(2,), rng_seed=3))
