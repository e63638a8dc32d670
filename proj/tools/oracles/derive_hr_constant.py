#!/usr/bin/env python3
"""Calibrate the default Hardy-Ramanujan constant.

c = max over 1 <= m <= 1000 of p(m) * 4*sqrt(3)*m * exp(-pi*sqrt(2m/3)),
computed with exact partition numbers and 50-digit arithmetic.
"""
import mpmath as mp

mp.mp.dps = 50
M = 1000

p = [0] * (M + 1)
p[0] = 1
for part in range(1, M + 1):
    for m in range(part, M + 1):
        p[m] += p[m - part]

best, arg = mp.mpf(0), 0
for m in range(1, M + 1):
    r = p[m] * 4 * mp.sqrt(3) * m * mp.exp(-mp.pi * mp.sqrt(mp.mpf(2 * m) / 3))
    if r > best:
        best, arg = r, m
print(f"argmax m = {arg}")
print(f"c = {mp.nstr(best, 20)}")
