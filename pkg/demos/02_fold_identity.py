"""The arity-2 fold computed by the 13-step kernel equals evaluating the folded polynomial.

For f(X) = f_even(X^2) + X f_odd(X^2) the fold of f(x) and f(-x) under challenge
beta is g(x^2) with g = f_even + beta * f_odd.  Here we check it for one
polynomial by hand and then for every degree-4 polynomial over F_7.

    python3 demos/02_fold_identity.py
"""

import itertools

import numpy as np

from frikt import specs, targets
from frikt.evaluator import CompiledUnit

p = 7
m = specs.PrimeModulus(p)
unit = targets.load_corpus(names=["fold_step"])[0].unit
fold = CompiledUnit(unit).raw("fold_step")

f = specs.DensePoly((3, 1, 4, 1, 5), m)
x, beta = 2, 6
g = specs.fold_poly(f, beta)
lo, hi = specs.poly_eval(f, x), specs.poly_eval(f, p - x)
kernel = fold(p, lo, hi, beta, m.inverse(x), m.inverse(2), [1 << 20])
print(f"f = {f.coeffs}, g = {g.coeffs}")
print(f"kernel fold = {kernel}, g(x^2) = {specs.poly_eval(g, x * x % p)}")

# %% Every f of degree <= 4, every x != 0 and every beta, vectorised over f.
coeffs = np.array(list(itertools.product(range(p), repeat=5)), dtype=np.uint64).T
table = np.zeros((p, p, p, p), dtype=np.uint64)
for lo, hi, beta, x in itertools.product(range(p), range(p), range(p), range(1, p)):
    table[lo, hi, beta, x] = fold(p, lo, hi, beta, m.inverse(x), m.inverse(2), [1 << 20])

mismatches = 0
for x in range(1, p):
    lo = specs.poly_eval_batch(coeffs, x, p)
    hi = specs.poly_eval_batch(coeffs, p - x, p)
    for beta in range(p):
        want = specs.poly_eval_batch(specs.fold_poly_batch(coeffs, beta, p), x * x % p, p)
        mismatches += int(np.count_nonzero(table[lo, hi, beta, x] != want))
print(f"{coeffs.shape[1] * (p - 1) * p} cases, {mismatches} mismatches")
