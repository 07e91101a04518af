"""Poseidon permutation over the BN254 scalar field.

Parameters: t = 3, alpha = 5, 8 full rounds, 57 partial rounds. Round
constants and the Cauchy MDS matrix come from the Grain LFSR procedure of
the Poseidon reference scripts, so ``permute([0, 1, 2])`` reproduces the
published ``poseidonperm_x5_254_3`` test vector.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache
from typing import Iterator, Sequence

P = 21888242871839275222246405745257275088548364400416034343698204186575808495617

WIDTH = 3
ALPHA = 5
FULL_ROUNDS = 8
PARTIAL_ROUNDS = 57
FIELD_BITS = 254


def _grain_bits(field_bits: int, t: int, rf: int, rp: int) -> Iterator[int]:
    header = (
        format(1, "02b")  # prime field
        + format(0, "04b")  # x^alpha s-box
        + format(field_bits, "012b")
        + format(t, "012b")
        + format(rf, "010b")
        + format(rp, "010b")
    )
    state = deque([int(b) for b in header] + [1] * 30)

    def clock() -> int:
        bit = state[62] ^ state[51] ^ state[38] ^ state[23] ^ state[13] ^ state[0]
        state.popleft()
        state.append(bit)
        return bit

    for _ in range(160):
        clock()
    # self-shrinking: emit the second bit of each pair whose first bit is 1
    while True:
        bit = clock()
        while bit == 0:
            clock()
            bit = clock()
        yield clock()


def _draw(bits: Iterator[int], n: int) -> int:
    value = 0
    for _ in range(n):
        value = (value << 1) | next(bits)
    return value


@lru_cache(maxsize=None)
def parameters() -> tuple[tuple[int, ...], tuple[tuple[int, ...], ...]]:
    """Return ``(round_constants, mds)`` for the fixed parameter set."""
    bits = _grain_bits(FIELD_BITS, WIDTH, FULL_ROUNDS, PARTIAL_ROUNDS)
    constants = []
    for _ in range((FULL_ROUNDS + PARTIAL_ROUNDS) * WIDTH):
        while True:
            candidate = _draw(bits, FIELD_BITS)
            if candidate < P:
                break
        constants.append(candidate)
    while True:
        points = [_draw(bits, FIELD_BITS) % P for _ in range(2 * WIDTH)]
        xs, ys = points[:WIDTH], points[WIDTH:]
        if len(set(points)) == 2 * WIDTH and all((x + y) % P for x in xs for y in ys):
            break
    mds = tuple(tuple(pow(x + y, -1, P) for y in ys) for x in xs)
    return tuple(constants), mds


def permute(state: Sequence[int]) -> list[int]:
    """Apply the width-3 permutation to ``state`` (three elements below P)."""
    if len(state) != WIDTH:
        raise ValueError(f"state must have {WIDTH} elements, got {len(state)}")
    rc, mds = parameters()
    (m00, m01, m02), (m10, m11, m12), (m20, m21, m22) = mds
    a, b, c = state
    half = FULL_ROUNDS // 2
    last_partial = half + PARTIAL_ROUNDS
    for r in range(FULL_ROUNDS + PARTIAL_ROUNDS):
        i = 3 * r
        a += rc[i]
        sq = a * a % P
        a = sq * sq * a % P
        if r < half or r >= last_partial:
            b += rc[i + 1]
            sq = b * b % P
            b = sq * sq * b % P
            c += rc[i + 2]
            sq = c * c % P
            c = sq * sq * c % P
        else:
            b += rc[i + 1]
            c += rc[i + 2]
        a, b, c = (
            (m00 * a + m01 * b + m02 * c) % P,
            (m10 * a + m11 * b + m12 * c) % P,
            (m20 * a + m21 * b + m22 * c) % P,
        )
    return [a, b, c]
