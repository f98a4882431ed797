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

cur = s
used = {s}
length = Fraction(0)
path = [s]
while True:
    candidates = []
    for v in range(n):
        if v in used or v == e:
            continue
        d1 = dist(cur, v)
        if length + d1 + dist(v, e) <= B:
            candidates.append((-nodes[v][2], d1, v))
    if not candidates:
        break
    _, d1, v = min(candidates)
    length += d1
    used.add(v)
    path.append(v)
    cur = v
path.append(e)
print(" ".join(map(str, path)))
