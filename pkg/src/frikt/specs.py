"""Executable mathematical specifications the corpus kernels are checked against.

Scalar functions take and return plain ints (or the small dataclasses below).
``poly_eval_batch`` and ``fold_poly_batch`` are numpy forms of the polynomial
specs used by exhaustive sweeps; they are cross-checked against the scalar
forms in the test-suite.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeModulus:
    p: int

    def __post_init__(self):
        if not 2 <= self.p <= 1 << 32:
            raise ValueError(f"modulus {self.p} outside [2, 2^32]")
        if self.p * self.p > MASK64:
            raise ValueError(f"modulus {self.p} violates p^2 <= 2^64 - 1")
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")

    def elem(self, value: int) -> "FieldElem":
        return FieldElem(value % self.p, self)

    def inverse(self, value: int) -> int:
        if value % self.p == 0:
            raise ZeroDivisionError("zero has no inverse")
        return pow(value, -1, self.p)


MERSENNE31 = PrimeModulus(2**31 - 1)
# Standard KoalaBear constant; taken from the field's usual definition.
KOALABEAR = PrimeModulus(2**31 - 2**24 + 1)


@dataclass(frozen=True)
class FieldElem:
    value: int
    modulus: PrimeModulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.p:
            raise ValueError(f"{self.value} is not reduced modulo {self.modulus.p}")

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.modulus != self.modulus:
                raise ValueError("mixed moduli")
            return other.value
        return other % self.modulus.p

    def __add__(self, other):
        return FieldElem((self.value + self._coerce(other)) % self.modulus.p, self.modulus)

    def __sub__(self, other):
        return FieldElem((self.value - self._coerce(other)) % self.modulus.p, self.modulus)

    def __mul__(self, other):
        return FieldElem(self.value * self._coerce(other) % self.modulus.p, self.modulus)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(-self.value % self.modulus.p, self.modulus)

    def inverse(self) -> "FieldElem":
        return FieldElem(self.modulus.inverse(self.value), self.modulus)

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class DensePoly:
    """Coefficient ``i`` multiplies ``X**i``; trailing zeros are allowed."""

    coeffs: tuple
    modulus: PrimeModulus

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if any(not 0 <= c < self.modulus.p for c in self.coeffs):
            raise ValueError("coefficient not reduced")

    @property
    def degree(self) -> int:
        """Degree ignoring trailing zeros; -1 for the zero polynomial."""
        d = len(self.coeffs) - 1
        while d >= 0 and self.coeffs[d] == 0:
            d -= 1
        return d


@dataclass(frozen=True)
class FoldInputs:
    lo: int
    hi: int
    beta: int
    x_inv: int
    two_inv: int


@dataclass(frozen=True)
class ArityInputs:
    log_current_height: int
    next_input_log_height: Optional[int]
    log_final_height: int
    max_log_arity: int


class Side(enum.Enum):
    RIGHT = 0  # sibling hashed on the right: H(acc, sibling)
    LEFT = 1   # sibling hashed on the left:  H(sibling, acc)


@dataclass(frozen=True)
class MerkleInstance:
    leaf: int
    path: tuple  # tuple[tuple[int, Side], ...]
    claimed_root: int

    def __post_init__(self):
        if len(self.path) > 64:
            raise ValueError("Merkle path deeper than 64")

    @property
    def siblings(self):
        return tuple(s for s, _ in self.path)

    @property
    def sides(self):
        return tuple(side.value for _, side in self.path)


# ---------------------------------------------------------------------------
# FRI round scheduling


def arity_spec(inputs: ArityInputs) -> Optional[int]:
    """Log-arity chosen for a round, or None where a subtraction would underflow."""
    cur = inputs.log_current_height
    if inputs.log_final_height > cur:
        return None
    max_fold = cur - inputs.log_final_height
    nxt = inputs.next_input_log_height
    if nxt is not None:
        if nxt > cur:
            return None
        max_fold = min(cur - nxt, max_fold)
    return min(max_fold, inputs.max_log_arity)


# ---------------------------------------------------------------------------
# Arity-2 FRI fold


def fold_step_spec(inputs: FoldInputs, modulus: PrimeModulus) -> int:
    p = modulus.p
    lo, hi = inputs.lo, inputs.hi
    return (lo + hi + inputs.beta * (lo - hi) * inputs.x_inv) * inputs.two_inv % p


def fold_inputs_for(f: DensePoly, x: int, beta: int) -> FoldInputs:
    """Evaluations of ``f`` at ``x`` and ``-x`` packaged with the needed inverses."""
    m = f.modulus
    if x % m.p == 0:
        raise ZeroDivisionError("x must be invertible")
    return FoldInputs(
        lo=poly_eval(f, x),
        hi=poly_eval(f, (m.p - x) % m.p),
        beta=beta,
        x_inv=m.inverse(x),
        two_inv=m.inverse(2),
    )


def poly_eval(f: DensePoly, x: int) -> int:
    """Naive sum of c_i * x^i mod p."""
    p = f.modulus.p
    acc, power = 0, 1
    for c in f.coeffs:
        acc = (acc + c * power) % p
        power = power * x % p
    return acc


def horner_spec(f: DensePoly, x: int) -> int:
    p = f.modulus.p
    acc = 0
    for c in reversed(f.coeffs):
        acc = (acc * x + c) % p
    return acc


def fold_poly(f: DensePoly, beta: int) -> DensePoly:
    """g(Y) = f_even(Y) + beta * f_odd(Y) where f(X) = f_even(X^2) + X f_odd(X^2)."""
    p = f.modulus.p
    even = f.coeffs[0::2]
    odd = f.coeffs[1::2]
    out = [(c + beta * (odd[i] if i < len(odd) else 0)) % p for i, c in enumerate(even)]
    return DensePoly(tuple(out), f.modulus)


@lru_cache(maxsize=64)
def _lagrange_basis(xs: tuple, p: int) -> tuple:
    """Coefficient vectors of the Lagrange basis polynomials for nodes ``xs``."""
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation nodes must be distinct")
    basis = []
    for i, xi in enumerate(xs):
        num = [1]
        denom = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            # num *= (X - xj)
            num = [((num[k - 1] if k else 0) - xj * (num[k] if k < len(num) else 0)) % p
                   for k in range(len(num) + 1)]
            denom = denom * (xi - xj) % p
        inv = pow(denom, -1, p)
        basis.append(tuple(c * inv % p for c in num))
    return tuple(basis)


def interpolate(xs: Sequence[int], ys: Sequence[int], modulus: PrimeModulus) -> DensePoly:
    """The unique polynomial of degree < len(xs) through the points (xs[i], ys[i])."""
    p = modulus.p
    basis = _lagrange_basis(tuple(x % p for x in xs), p)
    coeffs = [0] * len(xs)
    for y, b in zip(ys, basis):
        for k, c in enumerate(b):
            coeffs[k] += y * c
    return DensePoly(tuple(c % p for c in coeffs), modulus)


def fold_round_spec(evals: Sequence[int], x_invs: Sequence[int], beta: int, modulus: PrimeModulus) -> list:
    """Folded evaluations g(x_i^2) for evals = f(x_0..x_{h-1}) ++ f(-x_0..-x_{h-1}).

    ``f`` is recovered by interpolation, folded with :func:`fold_poly` and the
    result evaluated at the squared points.
    """
    p = modulus.p
    half = len(evals) // 2
    if len(evals) != 2 * half or len(x_invs) < half:
        raise ValueError("need an even number of evaluations and one inverse per pair")
    xs = [modulus.inverse(v) for v in x_invs[:half]]
    nodes = xs + [(p - x) % p for x in xs]
    f = interpolate(nodes, evals, modulus)
    g = fold_poly(f, beta)
    return [poly_eval(g, x * x % p) for x in xs]


def poly_eval_batch(coeffs: np.ndarray, x, p: int) -> np.ndarray:
    """Evaluate many polynomials at once.

    ``coeffs`` has shape ``(n_coeffs, *batch)``; ``x`` broadcasts against
    ``batch``.  Values are uint64 and every intermediate stays below p^2.
    """
    coeffs = np.asarray(coeffs, dtype=np.uint64)
    x = np.asarray(x, dtype=np.uint64) % np.uint64(p)
    pp = np.uint64(p)
    acc = np.zeros(np.broadcast_shapes(coeffs.shape[1:], x.shape), dtype=np.uint64)
    power = np.ones_like(acc)
    for c in coeffs:
        acc = (acc + (c * power) % pp) % pp
        power = (power * x) % pp
    return acc


def fold_poly_batch(coeffs: np.ndarray, beta, p: int) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.uint64)
    pp = np.uint64(p)
    beta = np.asarray(beta, dtype=np.uint64) % pp
    even = coeffs[0::2]
    odd = coeffs[1::2]
    if odd.shape[0] < even.shape[0]:
        pad = np.zeros((even.shape[0] - odd.shape[0],) + odd.shape[1:], dtype=np.uint64)
        odd = np.concatenate([odd, pad])
    return (even + (beta * odd) % pp) % pp


# ---------------------------------------------------------------------------
# Merkle inclusion

MERKLE_K1 = 0x9E3779B97F4A7C15
MERKLE_K2 = 0xBF58476D1CE4E5B9
MERKLE_K3 = 0x94D049BB133111EB
MERKLE_LEAF_TAG = 0x5AFE5AFE5AFE5AFE


def rotl64(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def merkle_hash(left: int, right: int) -> int:
    mixed = rotl64(((left * MERKLE_K1) & MASK64) ^ right, 13)
    return ((mixed * MERKLE_K2) & MASK64) ^ MERKLE_K3


def merkle_leaf_hash(leaf: int) -> int:
    return merkle_hash(leaf, MERKLE_LEAF_TAG)


def merkle_root_spec(leaf: int, path: Sequence) -> int:
    if len(path) > 64:
        raise ValueError("Merkle path deeper than 64")
    acc = merkle_leaf_hash(leaf)
    for sibling, side in path:
        side = Side(side) if not isinstance(side, Side) else side
        acc = merkle_hash(acc, sibling) if side is Side.RIGHT else merkle_hash(sibling, acc)
    return acc


def merkle_verify_spec(instance: MerkleInstance) -> bool:
    return merkle_root_spec(instance.leaf, instance.path) == instance.claimed_root


# ---------------------------------------------------------------------------
# Add with carry and small-field arithmetic


def adc_spec(a: int, b: int, carry_in: int) -> tuple:
    if carry_in not in (0, 1):
        raise ValueError("carry_in must be a bit")
    w = a + b + carry_in
    return w & MASK32, int(w > MASK32)


def field_add_spec(a: int, b: int, modulus: PrimeModulus) -> int:
    return (a + b) % modulus.p


def field_mul_spec(a: int, b: int, modulus: PrimeModulus) -> int:
    return a * b % modulus.p


def mersenne31_add_spec(a: int, b: int) -> int:
    return field_add_spec(a, b, MERSENNE31)


def mersenne31_mul_spec(a: int, b: int) -> int:
    return field_mul_spec(a, b, MERSENNE31)


def koalabear_add_spec(a: int, b: int) -> int:
    return field_add_spec(a, b, KOALABEAR)


def koalabear_mul_spec(a: int, b: int) -> int:
    return field_mul_spec(a, b, KOALABEAR)
