"""Exponentially weighted Gauss-Radau quadrature in action.

The time stepper integrates slab quantities against the weight
exp(-2 rho s).  This script builds the rules, shows their nodes drifting
left as rho grows, and verifies the advertised exactness degree against
closed-form moments.
"""

import numpy as np

from parahyp import exponential_moments, weighted_gauss_radau

tau = 0.5
print(f"Rules with q+1 nodes on (0, {tau}], right endpoint always included\n")
for q in (0, 1, 2):
    for rho in (0.0, 1.0, 4.0):
        rule = weighted_gauss_radau(q, rho, tau)
        nodes = ", ".join(f"{s:.6f}" for s in rule.nodes)
        print(f"q={q} rho={rho:>3}: nodes [{nodes}]")
    print()

print("Exactness check: rule vs closed-form moments of s^k e^(-2 rho s)")
q, rho = 3, 2.0
rule = weighted_gauss_radau(q, rho, tau)
mu = exponential_moments(rho, tau, 2 * q)
for k in range(2 * q + 1):
    got = np.dot(rule.weights, rule.nodes**k)
    print(f"  k={k}: quadrature {got:.15f}  moment {mu[k]:.15f}  "
          f"rel err {abs(got - mu[k]) / mu[k]:.2e}")

print("\nDegree 2q+1 is no longer exact (as expected for a Radau rule):")
k = 2 * q + 1
mu_hi = exponential_moments(rho, tau, k)[k]
got = np.dot(rule.weights, rule.nodes**k)
print(f"  k={k}: quadrature {got:.12f}  moment {mu_hi:.12f}  "
      f"rel err {abs(got - mu_hi) / mu_hi:.2e}")
