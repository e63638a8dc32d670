#!/usr/bin/env python3
"""Independent reference values frozen into the C++ test suite.

Every number printed here comes from a route that shares no code with the
library: exhaustive enumeration, mpmath or QUADPACK quadrature, or
brute-force search.
"""
import functools
import itertools
import math

import mpmath as mp
import numpy as np
from scipy import integrate

mp.mp.dps = 30


def out(*a):
    print(*a, flush=True)


@functools.lru_cache(maxsize=None)
def partitions_exact(m, parts, largest):
    if parts == 0:
        return 1 if m == 0 else 0
    return sum(partitions_exact(m - first, parts - 1, first)
               for first in range(1, min(m, largest) + 1))


def p_exact(m, parts):
    return partitions_exact(m, parts, m)


def hr(m, c=1):
    return c * mp.exp(mp.pi * mp.sqrt(mp.mpf(2 * m) / 3)) / (4 * mp.sqrt(3) * m)


def llr(x, y, rho):
    s2 = (1 - rho) * (1 + rho)
    return -0.5 * math.log(s2) - rho * rho * (x * x + y * y) / (2 * s2) + rho * x * y / s2


def psi_q_quad(lam, rho):
    f = lambda y, x: math.exp(lam * llr(x, y, rho) - 0.5 * (x * x + y * y)) / (2 * math.pi)
    v, _ = integrate.dblquad(f, -np.inf, np.inf, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12)
    return math.log(v)


def psi_p_quad(lam, rho):
    s2 = (1 - rho) * (1 + rho)
    f = lambda y, x: math.exp(lam * llr(x, y, rho) - (x * x - 2 * rho * x * y + y * y) / (2 * s2)) / (
        2 * math.pi * math.sqrt(s2))
    v, _ = integrate.dblquad(f, -np.inf, np.inf, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-12)
    return math.log(v)


def tv_quad(v1, v2):
    g = lambda t: mp.npdf(t, 0, mp.sqrt(v1)) - mp.npdf(t, 0, mp.sqrt(v2))
    f = lambda t: abs(g(t)) / 2
    # The kinks of |g| must be interval ends, otherwise quad loses ~1e-8.
    # Locate them by bisection on g, not by the closed form under test.
    c = mp.findroot(g, (mp.mpf("0.01"), mp.mpf(10)), solver="bisect")
    return mp.quad(f, [-mp.inf, -c, 0, c, mp.inf])


def cycles(perm):
    seen, res = [False] * len(perm), []
    for i in range(len(perm)):
        if not seen[i]:
            c, j = [], i
            while not seen[j]:
                seen[j] = True
                c.append(j)
                j = perm[j]
            res.append(c)
    return res


def second_moment_direct(n, k, d, r2):
    # E_{sigma,K} prod over cycles of sigma inside [k] cap K of (1-r2^|C|)^-d:
    # the closed components of the pairing graph with sigma'=id, K'=[k].
    tot, cnt = mp.mpf(0), 0
    for p in itertools.permutations(range(n)):
        cs = cycles(p)
        for K in itertools.combinations(range(n), k):
            s = set(K) & set(range(k))
            f = mp.mpf(1)
            for c in cs:
                if set(c) <= s:
                    f /= (1 - mp.mpf(r2) ** len(c)) ** d
            tot += f
            cnt += 1
    return tot / cnt


def tail_semi_analytic(r2, under_p, tau=0):
    # P[L_I >= tau] for d = 1: at fixed x the event is an interval in y.
    r2 = mp.mpf(r2)
    rho = mp.sqrt(r2)
    s2 = 1 - r2
    c0 = -mp.log(s2) / 2

    def inner(x):
        rad = mp.sqrt(s2 * (x * x + 2 * (c0 - tau)))
        lo = (rho * x - rho * rad) / r2
        hi = (rho * x + rho * rad) / r2
        if under_p:
            sd = mp.sqrt(s2)
            return mp.npdf(x) * (mp.ncdf((hi - rho * x) / sd) - mp.ncdf((lo - rho * x) / sd))
        return mp.npdf(x) * (mp.ncdf(hi) - mp.ncdf(lo))

    return mp.quad(inner, [-mp.inf, 0, mp.inf])


out("Par(4,2), Par(3,3):", p_exact(4, 2), p_exact(3, 3))
out("p(5), p(60):", sum(p_exact(5, l) for l in range(6)), sum(p_exact(60, l) for l in range(61)))
out("HR(5,1) =", mp.nstr(hr(5), 17), " HR(1,1) =", mp.nstr(hr(1), 17))

out("psi_Q(0.5, 0.6) =", repr(psi_q_quad(0.5, 0.6)))
out("psi_P(0.5, 0.6) =", repr(psi_p_quad(0.5, 0.6)))
out("TV(1, 0.5) =", mp.nstr(tv_quad(1, mp.mpf("0.5")), 17))

# E_P(0) at rho^2 = 0.5 by brute-force grid maximisation over lambda.
rho = math.sqrt(0.5)
lam = np.linspace(-1 / rho, 1 / rho, 10 ** 6 + 1)[1:-1]
vals = (lam / 2) * math.log(1 - rho * rho) + 0.5 * np.log(1 - lam * lam * rho * rho)
out("E_P(0) at rho2=0.5 grid =", repr(float(vals.max())), "at lambda", repr(float(lam[vals.argmax()])))

for args in [(2, 2, 1, 0.5), (2, 1, 1, 0.25), (4, 2, 1, 0.3), (3, 3, 1, 0.4), (4, 2, 2, 0.25),
             (5, 3, 3, 0.2), (4, 1, 1, 0.5)]:
    out("second moment", args, "=", mp.nstr(second_moment_direct(*args), 17))

for r2 in ["0.9", "0.5"]:
    out(f"P_rho(rho2={r2}, tau=0) =", mp.nstr(tail_semi_analytic(r2, True), 17))
    out(f"Q_rho(rho2={r2}, tau=0) =", mp.nstr(tail_semi_analytic(r2, False), 17))
