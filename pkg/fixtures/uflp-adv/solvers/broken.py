#!/usr/bin/env python3
import sys

toks = sys.stdin.read().split()
nf, nc = int(toks[0]), int(toks[1])
print(0)
print(" ".join([str(nf - 1)] * nc))
