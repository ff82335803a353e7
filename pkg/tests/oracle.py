"""Independent reference decoder for the relay's XOR mapping."""

import itertools
import math

POINTS = {
    (b0, b1): complex(1 - 2 * b0, 1 - 2 * b1) / math.sqrt(2)
    for b0, b1 in itertools.product((0, 1), repeat=2)
}


def brute_force_xor(y, h_a, h_b, sigma2):
    """Sum exp(-d^2/sigma2) over the 16 (s_A, s_B) pairs grouped by XOR; smallest value wins ties."""
    d2 = {
        (pa, pb): abs(y - h_a * sa - h_b * sb) ** 2
        for (pa, sa), (pb, sb) in itertools.product(POINTS.items(), repeat=2)
    }
    ref = min(d2.values())
    totals = {}
    for (pa, pb), d in d2.items():
        x = (pa[0] ^ pb[0], pa[1] ^ pb[1])
        totals.setdefault(x, []).append(math.exp(-(d - ref) / sigma2))
    scores = {x: math.fsum(v) for x, v in totals.items()}
    best = max(sorted(scores), key=lambda x: scores[x])
    return 2 * best[0] + best[1]


def min_distance_xor(y, h_a, h_b):
    best = None
    for (pa, sa), (pb, sb) in itertools.product(POINTS.items(), repeat=2):
        d = abs(y - h_a * sa - h_b * sb)
        x = 2 * (pa[0] ^ pb[0]) + (pa[1] ^ pb[1])
        if best is None or (d, x) < best:
            best = (d, x)
    return best[1]
