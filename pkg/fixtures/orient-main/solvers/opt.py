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

best = [None]
path = [s]
used = {s}

def rec(cur, length, prize):
    if cur == e:
        if best[0] is None or prize > best[0][0]:
            best[0] = (prize, list(path))
        return
    for v in range(n):
        if v in used:
            continue
        d = dist(cur, v)
        if length + d > B:
            continue
        used.add(v)
        path.append(v)
        rec(v, length + d, prize + nodes[v][2])
        path.pop()
        used.remove(v)

rec(s, Fraction(0), Fraction(nodes[s][2]))
print(" ".join(map(str, best[0][1])))
