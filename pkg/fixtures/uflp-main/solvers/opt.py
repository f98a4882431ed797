#!/usr/bin/env python3
import sys
from fractions import Fraction
from itertools import combinations

toks = sys.stdin.read().split()
nf, nc = int(toks[0]), int(toks[1])
vals = [Fraction(t) for t in toks[2:]]
f = vals[:nf]
c = [vals[nf + i * nf : nf + (i + 1) * nf] for i in range(nc)]
best = None
for size in range(1, nf + 1):
    for subset in combinations(range(nf), size):
        assign = [min(subset, key=lambda j: (c[i][j], j)) for i in range(nc)]
        cost = sum(f[j] for j in subset) + sum(c[i][assign[i]] for i in range(nc))
        if best is None or cost < best[0]:
            best = (cost, subset, assign)
print(" ".join(str(j) for j in best[1]))
print(" ".join(str(j) for j in best[2]))
