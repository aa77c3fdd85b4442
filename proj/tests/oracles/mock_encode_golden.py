"""Reference values for the mock encoder.

Reimplements the 64-bit Mersenne Twister from its published recurrence
(no std::mt19937_64, no numpy) and derives the seed with hashlib.
Writes one line per case: label, dim, then the unit vector in double
precision and rounded to float32.
"""
import hashlib
import math
import struct
import sys

NN, MM = 312, 156
MATRIX_A = 0xB5026F5AA96619E9
UM, LM = 0xFFFFFFFF80000000, 0x7FFFFFFF
MASK = (1 << 64) - 1


class MT64:
    def __init__(self, seed):
        self.mt = [0] * NN
        self.mt[0] = seed & MASK
        for i in range(1, NN):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.mti = NN

    def next(self):
        if self.mti >= NN:
            for i in range(NN):
                x = (self.mt[i] & UM) | (self.mt[(i + 1) % NN] & LM)
                xa = x >> 1
                if x & 1:
                    xa ^= MATRIX_A
                self.mt[i] = self.mt[(i + MM) % NN] ^ xa
            self.mti = 0
        x = self.mt[self.mti]
        self.mti += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & MASK


def unit_vector(data: bytes, dim: int):
    seed = int.from_bytes(hashlib.sha256(data).digest()[:8], "little")
    gen = MT64(seed)
    v = [2.0 * ((gen.next() >> 11) * 2.0 ** -53) - 1.0 for _ in range(dim)]
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v]


def f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


CASES = [
    ("text:abc", b"abc", 8),
    ("text:a cat sits on a table", b"a cat sits on a table", 12),
    # 2x1 image, BGR rows: (1,2,3) (4,5,6)
    ("image:2x1", b"IMG:2x1x3:" + bytes([1, 2, 3, 4, 5, 6]), 8),
]

if __name__ == "__main__":
    out = sys.stdout
    for label, data, dim in CASES:
        v = unit_vector(data, dim)
        out.write(f"{label}\t{dim}\t" + " ".join(f"{x:.17g}" for x in v) + "\t"
                  + " ".join(f"{f32(x):.9g}" for x in v) + "\n")
