#!/usr/bin/env python3
import sys
from fractions import Fraction

toks = sys.stdin.read().split()
nf, nc = int(toks[0]), int(toks[1])
f = [Fraction(t) for t in toks[2 : 2 + nf]]
j = min(range(nf), key=lambda k: (f[k], k))
print(j)
print(" ".join([str(j)] * nc))
