"""Brute-force reference computations, written with plain loops.

Nothing here imports the library's numerical code; models are passed as
nested numpy arrays and walked cell by cell.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def cells(joint):
    """Yield (index tuple, probability) for every cell of an array."""
    for idx in itertools.product(*(range(n) for n in joint.shape)):
        yield idx, float(joint[idx])


def brute_min_risk(joint, cost, l1, l2, enumerate_h=False):
    """Minimum risk over every (not only canonical) quantizer pair.

    ``joint[t, x1, x2]``. With ``enumerate_h`` every fusion table is tried
    too, otherwise the best estimate is picked cell by cell.
    """
    nt, n1, n2 = joint.shape
    ne = cost.shape[1]
    best = math.inf
    for g1 in itertools.product(range(l1), repeat=n1):
        for g2 in itertools.product(range(l2), repeat=n2):
            # expected cost per (u1, u2, estimate)
            acc = [[[0.0] * ne for _ in range(l2)] for _ in range(l1)]
            for (t, a, b), p in cells(joint):
                if p:
                    for e in range(ne):
                        acc[g1[a]][g2[b]][e] += p * cost[t][e]
            if enumerate_h:
                for h in itertools.product(range(ne), repeat=l1 * l2):
                    r = sum(acc[u][v][h[u * l2 + v]] for u in range(l1) for v in range(l2))
                    best = min(best, r)
            else:
                best = min(best, sum(min(acc[u][v]) for u in range(l1) for v in range(l2)))
    return best


def brute_risk(joint, cost, g1, g2, h):
    total = 0.0
    for (t, a, b), p in cells(joint):
        total += p * cost[t][h[g1[a]][g2[b]]]
    return total


def posterior_deviation(joint, codes):
    """max over positive-mass x of max_t |p(t|x) - p(t|T(x))| for ``joint[t, x]``."""
    nt, nx = joint.shape
    pooled = {}
    for x in range(nx):
        for t in range(nt):
            pooled[(codes[x], t)] = pooled.get((codes[x], t), 0.0) + joint[t, x]
    worst = 0.0
    for x in range(nx):
        px = sum(joint[t, x] for t in range(nt))
        if px <= 0:
            continue
        pc = sum(pooled[(codes[x], t)] for t in range(nt))
        for t in range(nt):
            worst = max(worst, abs(joint[t, x] / px - pooled[(codes[x], t)] / pc))
    return worst


def ci_deviation(joint, a, b, c):
    """max |p(a,b|c) - p(a|c)p(b|c)| with single integer axes a, b and a tuple c."""
    tab = {}
    for idx, p in cells(joint):
        key = (idx[a], idx[b], tuple(idx[i] for i in c))
        tab[key] = tab.get(key, 0.0) + p
    pc, pa, pb = {}, {}, {}
    for (va, vb, vc), p in tab.items():
        pc[vc] = pc.get(vc, 0.0) + p
        pa[(va, vc)] = pa.get((va, vc), 0.0) + p
        pb[(vb, vc)] = pb.get((vb, vc), 0.0) + p
    worst = 0.0
    for (va, vb, vc), p in tab.items():
        if pc[vc] > 0:
            worst = max(worst, abs(p / pc[vc] - pa[(va, vc)] * pb[(vb, vc)] / pc[vc] ** 2))
    return worst


def mutual_information_bits(pxy):
    px = [sum(r) for r in pxy]
    py = [sum(col) for col in zip(*pxy)]
    mi = 0.0
    for i, row in enumerate(pxy):
        for j, p in enumerate(row):
            if p > 0:
                mi += p * math.log2(p / (px[i] * py[j]))
    return mi


def all_partitions(n):
    """Every set partition of range(n) as a canonical code tuple."""
    out = []

    def rec(prefix, k):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for c in range(k + 1):
            rec(prefix + [c], max(k, c + 1))

    rec([], 0)
    return out


def bell(n):
    # Bell triangle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def qpsk_energy_error(t):
    """Single-sensor error of the |X|^2 > t test: QPSK, unit fading and noise, equal priors."""
    return 0.5 * (math.exp(-t) + 1 - math.exp(-t / 2))
