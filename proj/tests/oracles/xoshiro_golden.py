#!/usr/bin/env python3
"""Independent reference for the library PRNG (SplitMix64 seed expansion +
xoshiro256**). Regenerates tests/golden/rng_seed1.json."""
import json
import sys

M = (1 << 64) - 1


def splitmix(x):
    x = (x + 0x9E3779B97F4A7C15) & M
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return x, z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M


def draws(seed, n):
    x, s = seed, []
    for _ in range(4):
        x, v = splitmix(x)
        s.append(v)
    out = []
    for _ in range(n):
        r = (rotl((s[1] * 5) & M, 7) * 9) & M
        t = (s[1] << 17) & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        out.append(r)
    return out


if __name__ == "__main__":
    u64 = draws(1, 3)
    doc = {"seed": 1, "u64": [str(v) for v in u64],
           "uniform": [(v >> 11) * 2.0 ** -53 for v in u64]}
    json.dump(doc, sys.stdout, indent=2)
    print()
