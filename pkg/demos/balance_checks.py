"""Structural balance on small signed graphs.

Run: python3 demos/balance_checks.py
"""
import numpy as np

from multiplex_balance import (
    SignPattern,
    enumerate_balanced_configs,
    layer_balanced_cycles,
    layer_balanced_triads,
    node_balanced,
    triad_balance_fraction,
)

# Two factions {0, 1} and {2, 3}: friends inside, enemies across.
side = np.array([1, 1, -1, -1])
s = np.outer(side, side)
np.fill_diagonal(s, 0)
print(s)
print("triad check:", layer_balanced_triads(s), " cycle check:", layer_balanced_cycles(s))

# Flip one friendly link and the triads touching it go bad.
s[0, 1] = s[1, 0] = -1
print("after flip, fraction of balanced triads:", triad_balance_fraction(s))
print("node balance:", [node_balanced(s, i) for i in range(4)])

# Sparse graphs: a square with an odd number of negative edges is unbalanced.
square = SignPattern.from_edges(4, [(0, 1, 1), (1, 2, -1), (2, 3, 1), (3, 0, 1)])
print("square (one negative edge):", layer_balanced_cycles(square))

# Every balanced complete graph is a two-faction split, so K_n has 2**(n-1) of them.
for n in range(3, 6):
    print(f"K_{n}: {enumerate_balanced_configs(n)} balanced sign patterns")
