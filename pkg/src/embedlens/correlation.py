"""k-wise correlations over product powers, exact and Monte Carlo.

Three evaluation routes, chosen by input type: tuples of exact-phase
characters are folded column-by-column in rational arithmetic (the result
is an exact complex rational whenever all phase sums stay on the quarter
circle); tuples of product functions use the per-coordinate factorization;
anything else enumerates support columns under a term guard.

Also hosts the alternating-ascent search for the best-correlating
1-bounded product function and the random-restriction correlation
experiment built on it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iter_product
from math import fsum, log, sqrt
from typing import Sequence

import numpy as np

from .distributions import ExactChooser, JointDistribution, ProductPowerSampler
from .errors import SizeGuardError, ValidationError
from .functions import (
    CharacterProduct,
    ProductFunction,
    TableFunction,
    _measure_weights,
    _unit,
    restrict,
)

CONFIDENCE = 0.01  # fixed 99% confidence for every Monte Carlo half-width
EXACT_TERM_GUARD = 10 ** 8

AnyFunction = TableFunction | ProductFunction | CharacterProduct


def hoeffding_half_width(samples: int) -> float:
    return sqrt(log(2 / CONFIDENCE) / (2 * samples))


@dataclass
class CorrelationResult:
    value: complex
    mode: str  # "exact" | "monte-carlo"
    samples: int = 0
    half_width: float = 0.0
    # (re, im) as exact rationals; populated only on the character path when
    # every column's phase mass stays on multiples of 1/4.
    exact: tuple[Fraction, Fraction] | None = None

    def to_json(self) -> dict:
        out = {
            "value": [self.value.real, self.value.imag],
            "mode": self.mode,
            "samples": self.samples,
            "half_width": self.half_width,
        }
        if self.exact is not None:
            re, im = self.exact
            out["exact"] = [[re.numerator, re.denominator], [im.numerator, im.denominator]]
        return out


def _check_shapes(dist: JointDistribution, functions: Sequence[AnyFunction], n: int) -> None:
    if len(functions) != dist.k:
        raise ValidationError(f"expected {dist.k} functions, got {len(functions)}")
    for i, f in enumerate(functions):
        if f.n != n:
            raise ValidationError(f"function {i} has arity {f.n}, expected {n}")
        if f.alphabet != dist.alphabets[i]:
            raise ValidationError(f"function {i} alphabet mismatch")


def exact_correlation(dist: JointDistribution, functions: Sequence[AnyFunction],
                      n: int, term_guard: int = EXACT_TERM_GUARD) -> CorrelationResult:
    """E over the n-fold product power of the product of the k functions."""
    _check_shapes(dist, functions, n)
    if all(isinstance(f, CharacterProduct) for f in functions):
        return _exact_characters(dist, functions, n)
    if all(isinstance(f, (ProductFunction, CharacterProduct)) for f in functions):
        prods = [f.to_product() if isinstance(f, CharacterProduct) else f for f in functions]
        return _exact_products(dist, prods, n)
    return _exact_tables(dist, functions, n, term_guard)


def _exact_characters(dist, functions, n) -> CorrelationResult:
    masses = list(dist.atoms.items())
    exact_re, exact_im = Fraction(1), Fraction(0)
    exact_ok = True
    value = 1 + 0j
    quarters = {Fraction(0): (1, 0), Fraction(1, 4): (0, 1),
                Fraction(1, 2): (-1, 0), Fraction(3, 4): (0, -1)}
    for j in range(n):
        buckets: dict[Fraction, Fraction] = {}
        for atom, mass in masses:
            ph = sum((f.phase_at(j, atom[i]) for i, f in enumerate(functions)),
                     Fraction(0)) % 1
            buckets[ph] = buckets.get(ph, Fraction(0)) + mass
        col = complex(fsum(float(m) * _unit(ph).real for ph, m in buckets.items()),
                      fsum(float(m) * _unit(ph).imag for ph, m in buckets.items()))
        value *= col
        if exact_ok and all(ph in quarters for ph in buckets):
            cre = sum((m * quarters[ph][0] for ph, m in buckets.items()), Fraction(0))
            cim = sum((m * quarters[ph][1] for ph, m in buckets.items()), Fraction(0))
            exact_re, exact_im = (exact_re * cre - exact_im * cim,
                                  exact_re * cim + exact_im * cre)
        else:
            exact_ok = False
    if exact_ok:
        return CorrelationResult(complex(float(exact_re), float(exact_im)), "exact",
                                 exact=(exact_re, exact_im))
    return CorrelationResult(value, "exact")


def _exact_products(dist, prods: Sequence[ProductFunction], n) -> CorrelationResult:
    masses = [(x, float(m)) for x, m in dist.atoms.items()]
    value = 1 + 0j
    for j in range(n):
        terms = []
        for atom, m in masses:
            t = m + 0j
            for i, f in enumerate(prods):
                t *= f.factors[j, f.alphabet.index(atom[i])]
            terms.append(t)
        value *= complex(fsum(t.real for t in terms), fsum(t.imag for t in terms))
    return CorrelationResult(value, "exact")


def _exact_tables(dist, functions, n, term_guard) -> CorrelationResult:
    terms = len(dist.support) ** n
    if terms > term_guard:
        raise SizeGuardError(
            f"exact correlation needs {terms} weighted terms, guard is {term_guard}")
    massf = {x: float(m) for x, m in dist.atoms.items()}
    res, ims = [], []
    for cols in iter_product(dist.support, repeat=n):
        w = 1.0
        for c in cols:
            w *= massf[c]
        val = complex(w)
        for i, f in enumerate(functions):
            row = tuple(c[i] for c in cols)
            val *= f.evaluate(row)
        res.append(val.real)
        ims.append(val.imag)
    return CorrelationResult(complex(fsum(res), fsum(ims)), "exact")


def mc_correlation(dist: JointDistribution, functions: Sequence[AnyFunction],
                   n: int, samples: int, seed: int) -> CorrelationResult:
    """Empirical mean of the k-wise product over seeded i.i.d. column draws."""
    _check_shapes(dist, functions, n)
    if samples <= 0:
        raise ValidationError("samples must be positive")
    sampler = ProductPowerSampler(dist, n, seed)
    res, ims = [], []
    for _ in range(samples):
        rows = sampler.sample()
        val = 1 + 0j
        for f, row in zip(functions, rows):
            val *= f.evaluate(row)
        res.append(val.real)
        ims.append(val.imag)
    mean = complex(fsum(res) / samples, fsum(ims) / samples)
    return CorrelationResult(mean, "monte-carlo", samples, hoeffding_half_width(samples))


# ---------------------------------------------------------------------------
# Best-correlating product search (alternating coordinate ascent)

@dataclass
class AscentResult:
    value: float
    product: ProductFunction
    trace: list[float] = field(default_factory=list)  # objective after each sweep


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def best_product_correlation(nu: JointDistribution, f: TableFunction,
                             restarts: int = 8, max_iters: int = 200,
                             tol: float = 1e-9, seed: int = 0) -> AscentResult:
    """Maximize |E_{nu^n}[f * prod_i P_i]| over 1-bounded product functions.

    With all factors but one fixed the objective is linear in the remaining
    factor, so the optimal update is the unit-modulus conjugate phase of the
    coefficient vector (coefficient 0 maps to 1). The objective never
    decreases; local optima are possible and accepted, so the best of
    `restarts` seeded unimodular initializations is returned (the first
    start is all-ones).
    """
    a = len(f.alphabet)
    n = f.n
    if n > len(_LETTERS):
        raise SizeGuardError("ascent supports at most 52 coordinates")
    if n == 0:
        empty = ProductFunction(f.alphabet, np.zeros((0, a), dtype=np.complex128))
        v = abs(complex(f.values[0]))
        return AscentResult(v, empty, [v])
    w = _measure_weights(nu, f.alphabet)
    weight = np.ones(1)
    for _ in range(n):
        weight = np.multiply.outer(weight, w).ravel()
    g = (f.values * weight).reshape((a,) * n)
    rng = random.Random(seed)
    best: AscentResult | None = None
    for r in range(max(1, restarts)):
        if r == 0:
            factors = np.ones((n, a), dtype=np.complex128)
        else:
            factors = np.exp(2j * np.pi * np.array(
                [[rng.random() for _ in range(a)] for _ in range(n)]))
        trace: list[float] = []
        prev = -1.0
        for _ in range(max_iters):
            obj = 0.0
            for t in range(n):
                c = _coefficient(g, factors, t)
                mags = np.abs(c)
                newf = np.ones(a, dtype=np.complex128)
                nz = mags > 0
                newf[nz] = np.conj(c[nz]) / mags[nz]
                factors[t] = newf
                obj = float(np.sum(mags))
            if obj < prev - 1e-12:
                raise AssertionError("ascent objective decreased")
            trace.append(obj)
            if obj - prev < tol:
                break
            prev = obj
        cand = AscentResult(trace[-1], ProductFunction(f.alphabet, factors.copy()), trace)
        if best is None or cand.value > best.value:
            best = cand
    return best


def _coefficient(g: np.ndarray, factors: np.ndarray, t: int) -> np.ndarray:
    n = g.ndim
    subs = _LETTERS[:n]
    operands = [g]
    script = [subs]
    for i in range(n):
        if i != t:
            operands.append(factors[i])
            script.append(subs[i])
    return np.einsum(",".join(script) + "->" + subs[t], *operands)


def restricted_product_correlation(f: TableFunction, nu: JointDistribution,
                                   delta: float | Fraction, trials: int, seed: int,
                                   threshold: float, restarts: int = 8,
                                   max_iters: int = 200, tol: float = 1e-9) -> float:
    """Fraction of random restrictions whose best product correlation clears the threshold.

    Each coordinate enters the restricted set I independently with
    probability 1 - delta; the fixed values z are drawn from `nu`, which is
    also the measure of the remaining free coordinates.
    """
    if trials <= 0:
        raise ValidationError("trials must be positive")
    keep_prob = 1 - float(delta)
    rng = random.Random(seed)
    chooser = ExactChooser(nu.support, [nu.atoms[x] for x in nu.support])
    hits = 0
    for _ in range(trials):
        assignment = {
            i: chooser.draw(rng)[0]
            for i in range(f.n)
            if rng.random() < keep_prob
        }
        g = restrict(f, assignment)
        res = best_product_correlation(nu, g, restarts=restarts, max_iters=max_iters,
                                       tol=tol, seed=rng.getrandbits(32))
        if res.value >= threshold:
            hits += 1
    return hits / trials
