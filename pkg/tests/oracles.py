"""Independent reference implementations the tests compare against.

Everything here is written from the defining formulas with the dumbest
possible algorithms (explicit subset enumeration, gcd counting, Stirling
recurrences) so that agreement with the package is meaningful.
"""
import itertools
import math

import numpy as np


def fubini_stirling(n):
    """Ordered set partitions via sum_k k! * S(n,k) with the Stirling recurrence."""
    stirling = [[0] * (n + 1) for _ in range(n + 1)]
    stirling[0][0] = 1
    for i in range(1, n + 1):
        for k in range(1, i + 1):
            stirling[i][k] = k * stirling[i - 1][k] + stirling[i - 1][k - 1]
    return sum(math.factorial(k) * stirling[n][k] for k in range(n + 1))


def totient_bruteforce(n):
    return sum(1 for z in range(1, n) if math.gcd(z, n) == 1)


def b2(x):
    return x * x - x + 1.0 / 6.0


def cbc_error_direct(z, n, weights, u_max=6):
    """Shift-averaged squared error of the rule z by explicit subset sums.

    e^2 = sum over nonempty u with |u| <= u_max of
          gamma_u * (1/n) sum_k prod_{j in u} B2({k z_j / n}).
    """
    z = list(z)
    s = len(z)
    cap = min(u_max, s)
    order, coord = weights.pod_factors(s, cap)
    k = np.arange(n)
    per_coord = [b2(((k * zj) % n) / float(n)) for zj in z]
    total = 0.0
    for r in range(1, cap + 1):
        for u in itertools.combinations(range(s), r):
            gamma_u = order[r] * math.prod(coord[j] for j in u)
            prod = np.ones(n)
            for j in u:
                prod = prod * per_coord[j]
            total += gamma_u * float(prod.mean())
    return total


def admissible(n):
    return [z for z in range(1, n) if math.gcd(z, n) == 1]


def cbc_greedy_exhaustive(n, s, weights, u_max=6):
    """Greedy CBC by exhaustive candidate scan using cbc_error_direct.

    Returns (z, per-dimension minimal squared errors), ties to smallest z.
    """
    z = []
    errs = []
    for _ in range(s):
        best = None
        for cand in admissible(n):
            e = cbc_error_direct(z + [cand], n, weights, u_max)
            if best is None or e < best[1] - 1e-15:
                best = (cand, e)
        z.append(best[0])
        errs.append(best[1])
    return z, errs
