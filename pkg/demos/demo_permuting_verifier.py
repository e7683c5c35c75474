#!/usr/bin/env python3
"""Permuting ZX verifier: strong completeness at desk scale.

Builds the fixed measurement multiset for a 2-local ZX instance, runs the
verifier on ground and excited witnesses, and compares the observed
acceptance with the Hoeffding and binomial models.
"""

import numpy as np

from qmalab import permver, zxham
from qmalab.simstate import StateVector
from qmalab.zxham import HamTerm, HamiltonianInstance

rng = np.random.default_rng(7)

h = HamiltonianInstance(2, (HamTerm(0, 1, "Z", 0, 0.5), HamTerm(0, 1, "X", 1, 0.5)))
energy, ground = zxham.ground_state(h)
print("instance terms:", [(t.i, t.j, t.basis, t.beta, t.p) for t in h.terms])
print("ground energy :", round(energy, 12))

k = 6
v = permver.build(h, k)
print(f"\nk = {k}: measurement list of length {v.list_len}, thresholds a={v.a:.3f} b={v.b:.3f}")
print("accept when at least", round(v.threshold, 3), "sub-measurements accept")

trials = 5000
yes = sum(permver.verify_product(v, ground, rng) for _ in range(trials)) / trials
excited = StateVector.basis(2, 0)
no = sum(permver.verify_product(v, excited, rng) for _ in range(trials)) / trials
print(f"\nground-state acceptance over {trials} runs : {yes:.4f}")
print("Hoeffding completeness bound            :", round(permver.hoeffding_completeness_bound(v), 4))
print(f"excited-state acceptance                 : {no:.4f}")

e = zxham.acceptance_operator(h)
q = float(np.real(np.vdot(excited.amplitudes, e @ excited.amplitudes)))
print("binomial model for the excited state     :", round(permver.binomial_accept_tail(v, q), 4))

print("\nrepetition calculator at full parameters (n=2, gap 0.5, |J|=2):",
      permver.recommended_k(2, 1.0, 0.5, 2), "registers")
print("vector-Bernstein tail d=1,R=1,n=100,t=50 :",
      permver.bernstein_tail(permver.BernsteinParams(d=1, R=1.0, n=100, t=50.0)))
