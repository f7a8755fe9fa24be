#!/usr/bin/env python3
"""Independent numpy model of the fire-monitoring scenario.

Used to calibrate configs/reference.json and to produce frozen expected
values for the C++ tests. Shares no code with the library: the induced
chains are enumerated directly from the slot protocol and solved with a
dense least-squares stationary solve.
"""
import itertools
import json
import sys

import numpy as np

IGNITE = 0.05
ESCALATE = [0.30, 0.10, 0.05]
EXTINGUISH = [0.10, 0.50, 0.70]
DEESCALATE = [0.05, 0.30, 0.60]
C1 = [0.0, 20.0, 200.0]
C3 = [0.0, 5.0, 12.0]
GAIN_RATE = 12.0


def kernels():
    ks = []
    for d in range(3):
        p = np.zeros((3, 3))
        p[0, 1] = IGNITE
        p[0, 0] = 1 - IGNITE
        p[1, 2] = ESCALATE[d]
        p[1, 0] = EXTINGUISH[d]
        p[1, 1] = 1 - ESCALATE[d] - EXTINGUISH[d]
        p[2, 1] = DEESCALATE[d]
        p[2, 2] = 1 - DEESCALATE[d]
        ks.append(p)
    return ks


def c2(x, d):
    return -GAIN_RATE * d * x


def got_tensor(literal=False):
    t = np.zeros((3, 3))
    for x in range(3):
        for xh in range(3):
            d = xh
            if literal:
                t[x, xh] = max(C1[x] + C3[d], 0.0) + c2(x, d)
            else:
                t[x, xh] = max(C1[x] + c2(x, d), 0.0) + C3[d]
    return t


def mse_tensor():
    return np.array([[(a - b) ** 2 for b in range(3)] for a in range(3)], float)


def stationary(p):
    n = p.shape[0]
    a = np.vstack([p.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi


def exact(policy, tensor, eps, lam, ks):
    """policy(state, x, xhp) -> (sample, next_state_fn).

    Enumerates the augmented chain (x, xhp, mem) reachable from (0, 0, init).
    """
    init = (0, 0, policy.init)
    index = {init: 0}
    order = [init]
    rows = []
    costs = []
    rates = []
    fires = []
    i = 0
    while i < len(order):
        x, xhp, mem = order[i]
        a = policy.decide(mem, x, xhp)
        outcomes = []  # (prob, delivered)
        if a:
            outcomes = [(1 - eps, True), (eps, False)]
        else:
            outcomes = [(1.0, False)]
        row = {}
        cost = lam * a
        fire = 0.0
        for pr, dlv in outcomes:
            if pr == 0:
                continue
            xh = x if dlv else xhp
            cost += pr * tensor[x, xh]
            nmem = policy.advance(mem, x, xhp, a, dlv)
            d = xh
            for xn in range(3):
                q = ks[d][x, xn]
                if q == 0:
                    continue
                if x == 0 and xn > 0:
                    fire += pr * q
                key = (xn, xh, nmem)
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                row[index[key]] = row.get(index[key], 0.0) + pr * q
        rows.append(row)
        costs.append(cost)
        rates.append(float(a))
        fires.append(fire)
        i += 1
    n = len(order)
    p = np.zeros((n, n))
    for s, row in enumerate(rows):
        for k, v in row.items():
            p[s, k] = v
    pi = stationary(p)
    return dict(loss=float(pi @ costs), rate=float(pi @ rates),
                fire=float(pi @ fires), states=n)


class Uniform:
    def __init__(self, period):
        self.period = period
        self.init = 0

    def decide(self, mem, x, xhp):
        return 1 if mem == 0 else 0

    def advance(self, mem, x, xhp, a, dlv):
        return (mem + 1) % self.period


class AgeAware:
    def __init__(self, threshold):
        self.threshold = threshold
        self.init = 0  # pre-decision age, saturated at threshold

    def decide(self, mem, x, xhp):
        return 1 if mem >= self.threshold else 0

    def advance(self, mem, x, xhp, a, dlv):
        return min((0 if dlv else mem) + 1, self.threshold)


class ChangeAware:
    init = -1

    def decide(self, mem, x, xhp):
        return 1 if (mem == -1 or mem != x) else 0

    def advance(self, mem, x, xhp, a, dlv):
        return x


class Discrepancy:
    init = 0

    def decide(self, mem, x, xhp):
        return 1 if x != xhp else 0

    def advance(self, mem, x, xhp, a, dlv):
        return 0


class Table:
    init = 0

    def __init__(self, table):
        self.table = table

    def decide(self, mem, x, xhp):
        return self.table[x * 3 + xhp]

    def advance(self, mem, x, xhp, a, dlv):
        return 0


def compile_mdp(tensor, eps, lam, ks):
    n = 9
    c = np.zeros((n, 2))
    p = np.zeros((2, n, n))
    for x in range(3):
        for xhp in range(3):
            s = x * 3 + xhp
            c[s, 0] = tensor[x, xhp]
            c[s, 1] = lam + (1 - eps) * tensor[x, x] + eps * tensor[x, xhp]
            for xn in range(3):
                p[0, s, xn * 3 + xhp] += ks[xhp][x, xn]
                p[1, s, xn * 3 + x] += (1 - eps) * ks[x][x, xn]
                p[1, s, xn * 3 + xhp] += eps * ks[xhp][x, xn]
    return c, p


def brute_force(c, p):
    n = c.shape[0]
    best = None
    for acts in itertools.product([0, 1], repeat=n):
        pol = Table(list(acts))
        # evaluate directly on compiled model from state 0
        pm = np.array([p[acts[s], s] for s in range(n)])
        cm = np.array([c[s, acts[s]] for s in range(n)])
        # reachable from 0
        reach = {0}
        stack = [0]
        while stack:
            s = stack.pop()
            for k in np.nonzero(pm[s])[0]:
                if k not in reach:
                    reach.add(int(k))
                    stack.append(int(k))
        r = sorted(reach)
        sub = pm[np.ix_(r, r)]
        pi = stationary(sub)
        g = float(pi @ cm[r])
        if best is None or g < best[0] - 1e-12:
            best = (g, acts, pi, r)
    return best


def main():
    ks = kernels()
    eps = 0.1
    lam = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
    got = got_tensor()
    print("GoT intent\n", got)
    print("GoT literal\n", got_tensor(True))
    g_got, acts_got, _, _ = brute_force(*compile_mdp(got, eps, lam, ks))
    g_mse, acts_mse, _, _ = brute_force(*compile_mdp(mse_tensor(), eps, lam, ks))
    print("optimal GoT policy", acts_got, g_got)
    print("optimal MMSE policy", acts_mse, g_mse)
    pols = [("uniform", Uniform(5)), ("age_aware", AgeAware(5)),
            ("change_aware", ChangeAware()), ("optimal_mmse", Table(acts_mse)),
            ("optimal_aoii", Discrepancy()), ("optimal_got", Table(acts_got))]
    out = {}
    for name, pol in pols:
        r = exact(pol, got, eps, lam, ks)
        out[name] = r
        print(f"{name:14s} loss={r['loss']:.17g} rate={r['rate']:.17g} "
              f"fire={r['fire']:.6g} states={r['states']}")
    for lam2 in [0, 0.5, 1, 2, 5]:
        g, acts, pi, r = brute_force(*compile_mdp(got, eps, lam2, ks))
        e = exact(Table(acts), got, eps, lam2, ks)
        print(f"lambda={lam2} gain={g:.17g} rate={e['rate']:.17g} policy={acts}")
    json.dump(out, sys.stdout if False else open("/dev/null", "w"))


if __name__ == "__main__":
    main()
