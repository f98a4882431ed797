#!/usr/bin/env python3
import sys, math
from fractions import Fraction

toks = sys.stdin.read().split()
n, s, e = int(toks[0]), int(toks[1]), int(toks[2])
B = Fraction(toks[3])
nodes = [tuple(int(toks[4 + 3 * i + k]) for k in range(3)) for i in range(n)]

def dist(a, b):
    dx, dy = nodes[a][0] - nodes[b][0], nodes[a][1] - nodes[b][1]
    return Fraction(round(math.sqrt(dx * dx + dy * dy) * 10000), 10000)

# stops at the start node instead of reaching the required endpoint
print(s)
