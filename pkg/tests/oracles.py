"""Independent reference implementations used to derive expected values.

Written from the algorithm descriptions, in a deliberately different style
from the package (bit lists, explicit matrices, whole-tree rebuilds), and
never importing package code. Slow is fine here.
"""

from __future__ import annotations

P = 0x30644E72E131A029B85045B68181585D2833E84879B9709143E1F593F0000001
T, RF, RP, N_BITS = 3, 8, 57, 254


def _grain_stream():
    bits = [0, 1] + [0, 0, 0, 0]
    bits += [int(c) for c in bin(N_BITS)[2:].zfill(12)]
    bits += [int(c) for c in bin(T)[2:].zfill(12)]
    bits += [int(c) for c in bin(RF)[2:].zfill(10)]
    bits += [int(c) for c in bin(RP)[2:].zfill(10)]
    bits += [1] * 30
    assert len(bits) == 80

    def step():
        new = bits[0] ^ bits[13] ^ bits[23] ^ bits[38] ^ bits[51] ^ bits[62]
        del bits[0]
        bits.append(new)
        return new

    for _ in range(160):
        step()
    while True:
        first, second = step(), step()
        if first == 1:
            yield second


def _field_elements(stream, count, reject_large=True):
    out = []
    while len(out) < count:
        value = int("".join(str(next(stream)) for _ in range(N_BITS)), 2)
        if reject_large and value >= P:
            continue
        out.append(value % P)
    return out


def _constants():
    stream = _grain_stream()
    rc = _field_elements(stream, (RF + RP) * T)
    while True:
        xy = _field_elements(stream, 2 * T, reject_large=False)
        xs, ys = xy[:T], xy[T:]
        if len(set(xy)) == 2 * T and all((x + y) % P != 0 for x in xs for y in ys):
            break
    mds = [[pow((xs[i] + ys[j]) % P, P - 2, P) for j in range(T)] for i in range(T)]
    return rc, mds


_RC, _MDS = None, None


def poseidon(state):
    global _RC, _MDS
    if _RC is None:
        _RC, _MDS = _constants()
    s = [x % P for x in state]
    for r in range(RF + RP):
        s = [(s[i] + _RC[r * T + i]) % P for i in range(T)]
        full = r < RF // 2 or r >= RF // 2 + RP
        s = [pow(x, 5, P) for x in s] if full else [pow(s[0], 5, P)] + s[1:]
        s = [sum(_MDS[i][j] * s[j] for j in range(T)) % P for i in range(T)]
    return s


def sponge(inputs):
    """Rate 2, capacity seeded with len * 2^64, squeeze element 1."""
    assert 1 <= len(inputs) <= 16
    padded = list(inputs) + [0] * (len(inputs) % 2)
    s = [len(inputs) * 2 ** 64, 0, 0]
    for i in range(0, len(padded), 2):
        s = poseidon([s[0], (s[1] + padded[i]) % P, (s[2] + padded[i + 1]) % P])
    return s[1]


def document_digest(data: bytes) -> int:
    chunks = [int.from_bytes(data[i:i + 31], "little") for i in range(0, len(data), 31)] or [0]
    acc = sponge([chunks[0]])
    for c in chunks[1:]:
        acc = sponge([acc, c])
    return acc


def merkle_root(leaves, depth=20, hash2=None):
    """Rebuild the whole tree bottom-up from the leaf list."""
    hash2 = hash2 or (lambda a, b: sponge([a, b]))
    empty = 0
    level = list(leaves)
    for _ in range(depth):
        if len(level) % 2:
            level.append(empty)
        level = [hash2(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        empty = hash2(empty, empty)
    return level[0] if level else empty


def merkle_path_root(leaf, siblings, dirs, hash2=None):
    hash2 = hash2 or (lambda a, b: sponge([a, b]))
    node = leaf
    for sib, d in zip(siblings, dirs):
        node = hash2(sib, node) if d == 1 else hash2(node, sib)
    return node


def eval_relation_holds(rt, h, rat, v, k, pd, siblings, dirs, hash_fn=None) -> bool:
    hash_fn = hash_fn or sponge
    if hash_fn([k]) != h:
        return False
    node = hash_fn([k, pd])
    for sib, d in zip(siblings, dirs):
        node = hash_fn([sib, node]) if d == 1 else hash_fn([node, sib])
    return node == rt and 0 <= rat <= v and len(siblings) == 20
