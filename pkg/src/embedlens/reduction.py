"""Reduction constructions on k-ary distributions, verified at small n.

The pipeline: pair the first k-1 coordinates through the last one
(build_paired_copies), split off the diagonal as an exact mixture, and
assemble the three-branch star coupling over (sigma, sigma, pairs + star)
whose three-wise correlation identity ties a product of restrictions of
f1 to a noise-stability average; check_coupling_identity verifies that
identity by exhaustive enumeration. The conditional-expectation
companions (given the last row, given the first row) implement the
Cauchy-Schwarz and correlation-transfer steps, and product_smoothness
evaluates the resampling smoothness of a product function in closed form
from factor statistics.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from math import fsum, log
from typing import Sequence

import numpy as np

from .correlation import exact_correlation
from .distributions import (
    Alphabet,
    Atom,
    ExactChooser,
    JointDistribution,
    alphabet as make_alphabet,
)
from .errors import SizeGuardError, ValidationError
from .functions import (
    ProductFunction,
    TableFunction,
    _lex_tuples,
    _measure_weights,
    restrict,
    stability,
)

STAR = "*"
PAIR_SEP = "|"


@dataclass(frozen=True)
class StarAlphabet:
    """(Sigma x Sigma) extended by the distinguished resampling symbol."""

    base: Alphabet
    alphabet: Alphabet

    @classmethod
    def build(cls, base: Alphabet) -> "StarAlphabet":
        if any(PAIR_SEP in s or s == STAR for s in base.symbols):
            raise ValidationError(f"base symbols may not contain {PAIR_SEP!r} or equal {STAR!r}")
        pairs = [pair_symbol(a, b) for a in base.symbols for b in base.symbols]
        return cls(base, make_alphabet(pairs + [STAR]))


def pair_symbol(a: str, b: str) -> str:
    return f"{a}{PAIR_SEP}{b}"


def decode_symbol(sym: str) -> tuple[str, str] | None:
    """The encoded pair, or None for the star symbol."""
    if sym == STAR:
        return None
    a, b = sym.split(PAIR_SEP)
    return a, b


@dataclass
class StarCouplingParams:
    """Branch weights and constituents of the three-branch construction."""

    p_nu: Fraction     # probability of the correlated-pair branch
    p_star: Fraction   # within the diagonal branch, probability of the star leg
    nu1: JointDistribution  # pair distribution over Sigma x Sigma
    mu1: JointDistribution  # first-coordinate marginal over Sigma

    def __post_init__(self):
        self.p_nu = Fraction(self.p_nu)
        self.p_star = Fraction(self.p_star)
        if not (0 <= self.p_nu <= 1 and 0 <= self.p_star <= 1):
            raise ValidationError("branch probabilities must lie in [0, 1]")
        if self.nu1.k != 2 or self.mu1.k != 1:
            raise ValidationError("nu1 must be binary, mu1 univariate")
        sigma = self.mu1.alphabets[0]
        if self.nu1.alphabets != (sigma, sigma):
            raise ValidationError("nu1 must live on Sigma x Sigma for mu1's Sigma")


def diagonal_pairing(dist: JointDistribution) -> JointDistribution:
    """The measure on doubled coordinates carried by atoms (y, y)."""
    return JointDistribution(dist.alphabets * 2,
                             {x + x: p for x, p in dist.atoms.items()})


def build_paired_copies(dist: JointDistribution) -> JointDistribution:
    """Two conditionally independent copies of the first k-1 coordinates.

    Sample the last coordinate, then two independent draws of the rest
    conditioned on it. The diagonal carries at least the squared marginal
    mass, which is what makes the alpha^2 mixture split below possible.
    """
    if dist.k < 2:
        raise ValidationError("need at least two coordinates")
    last = dist.k - 1
    muk = dist.marginal([last])
    out: dict[Atom, Fraction] = {}
    for (v,), w in muk.atoms.items():
        cond = dist.condition(last, v)
        for y, p in cond.atoms.items():
            for y2, p2 in cond.atoms.items():
                key = y + y2
                out[key] = out.get(key, Fraction(0)) + w * p * p2
    return JointDistribution(dist.alphabets[:last] * 2, out)


def star_coupling_params(dist: JointDistribution, p_star: Fraction) -> StarCouplingParams:
    """Derive the branch weights and constituents from a k-ary distribution.

    p_nu is 1 - alpha^2 for alpha the minimum atom mass; nu1 is the
    (first, first') marginal of the off-diagonal mixture component. The
    degenerate alpha = 1 case (single atom) has an empty pair branch.
    """
    alpha = dist.min_atom_mass()
    a2 = alpha * alpha
    paired = build_paired_copies(dist)
    first_pair = [0, dist.k - 1]
    mu1 = dist.marginal([0])
    if a2 == 1:
        return StarCouplingParams(Fraction(0), Fraction(p_star), paired.marginal(first_pair), mu1)
    from .distributions import decompose_mixture

    diag = diagonal_pairing(dist.marginal(list(range(dist.k - 1))))
    nu = decompose_mixture(paired, diag, a2)
    return StarCouplingParams(1 - a2, Fraction(p_star), nu.marginal(first_pair), mu1)


def build_star_coupling(params: StarCouplingParams) -> JointDistribution:
    """Exact three-branch mixture over Sigma x Sigma x Sigma^+."""
    sigma = params.mu1.alphabets[0]
    star = StarAlphabet.build(sigma)
    atoms: dict[Atom, Fraction] = {}

    def add(key: Atom, mass: Fraction):
        if mass > 0:
            atoms[key] = atoms.get(key, Fraction(0)) + mass

    for (a, b), m in params.nu1.atoms.items():
        add((a, b, pair_symbol(a, b)), params.p_nu * m)
    diag_w = 1 - params.p_nu
    for (x,), m in params.mu1.atoms.items():
        add((x, x, pair_symbol(x, x)), diag_w * (1 - params.p_star) * m)
        add((x, x, STAR), diag_w * params.p_star * m)
    return JointDistribution([sigma, sigma, star.alphabet], atoms)


def star_sample(x_plus: Sequence[str], mu1: JointDistribution,
                seed: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Decode a word over Sigma^+ into a coupled pair over Sigma^n.

    Non-star positions split deterministically into their two components;
    each star position gets one fresh shared draw from mu1.
    """
    chooser = ExactChooser(mu1.support, [mu1.atoms[x] for x in mu1.support])
    rng = random.Random(seed)
    x: list[str] = []
    xp: list[str] = []
    for sym in x_plus:
        pair = decode_symbol(sym)
        if pair is None:
            (v,) = chooser.draw(rng)
            x.append(v)
            xp.append(v)
        else:
            x.append(pair[0])
            xp.append(pair[1])
    return tuple(x), tuple(xp)


def build_g(f1: TableFunction, mu1: JointDistribution,
            size_guard: int = 10 ** 6) -> TableFunction:
    """g(x+) = E over star fills of f1(x) * conj(f1(x')), exactly.

    The fill is shared between the two copies, so star positions contribute
    diagonal second moments rather than squared means.
    """
    sigma = f1.alphabet
    star = StarAlphabet.build(sigma)
    n = f1.n
    if len(star.alphabet) ** n > size_guard:
        raise SizeGuardError(f"g table would need {len(star.alphabet) ** n} entries")
    fills = [(x, float(m)) for (x,), m in mu1.atoms.items()]
    values = []
    for xplus in _lex_tuples(star.alphabet, n):
        stars = [j for j, sym in enumerate(xplus) if decode_symbol(sym) is None]
        base_x = [None] * n
        base_xp = [None] * n
        for j, sym in enumerate(xplus):
            pair = decode_symbol(sym)
            if pair is not None:
                base_x[j], base_xp[j] = pair
        res, ims = [], []
        for fill in iter_product(fills, repeat=len(stars)):
            w = 1.0
            for _, m in fill:
                w *= m
            for j, (v, _) in zip(stars, fill):
                base_x[j] = v
                base_xp[j] = v
            t = w * f1.evaluate(base_x) * f1.evaluate(base_xp).conjugate()
            res.append(t.real)
            ims.append(t.imag)
        values.append(complex(fsum(res), fsum(ims)))
    return TableFunction(n, star.alphabet, values)


@dataclass
class CouplingIdentityReport:
    lhs: complex
    rhs: float
    gap: float
    restriction_rate: Fraction
    p_star: Fraction


def check_coupling_identity(dist: JointDistribution, f1: TableFunction, n: int,
                            restriction_rate: Fraction, p_star: Fraction,
                            n_guard: int = 3) -> CouplingIdentityReport:
    """Exhaustively compare the coupling's three-wise correlation with its stability form.

    lhs: E over the coupling's n-fold power of f1(x) conj(f1(x')) conj(g(x+)).
    rhs: E over restricted sets I (each coordinate kept with probability
    `restriction_rate`) and pairs (z, z') from nu1^I of the stability at
    1 - p_star of restrict(f1, z) * conj(restrict(f1, z')) under mu1.
    No sampling: subsets and assignments are enumerated exactly.
    """
    if n > n_guard:
        raise SizeGuardError(f"identity check enumerates 2^n subsets; n <= {n_guard}")
    if f1.n != n:
        raise ValidationError("f1 arity must equal n")
    rate = Fraction(restriction_rate)
    params = star_coupling_params(dist, p_star)
    coupling = build_star_coupling(params)
    g = build_g(f1, params.mu1)
    lhs = exact_correlation(coupling, [f1, f1.conj(), g.conj()], n).value

    rho = float(1 - params.p_star)
    pairs = list(params.nu1.atoms.items())
    terms = []
    for mask in range(2 ** n):
        inside = [j for j in range(n) if mask >> j & 1]
        w_i = rate ** len(inside) * (1 - rate) ** (n - len(inside))
        if w_i == 0:
            continue
        for assign in iter_product(pairs, repeat=len(inside)):
            w_z = Fraction(1)
            z: dict[int, str] = {}
            zp: dict[int, str] = {}
            for j, ((a, b), m) in zip(inside, assign):
                w_z *= m
                z[j] = a
                zp[j] = b
            h = restrict(f1, z) * restrict(f1, zp).conj()
            terms.append(float(w_i * w_z) * stability(h, rho, params.mu1))
    rhs = fsum(terms)
    return CouplingIdentityReport(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs),
                                  restriction_rate=rate, p_star=Fraction(p_star))


def conditional_product_given_last(dist: JointDistribution,
                                   functions: Sequence[TableFunction],
                                   term_guard: int = 10 ** 7) -> TableFunction:
    """Conditional expectation of the (k-1)-wise product given the last row.

    Exact enumeration over conditional supports, column by column; requires
    every last-coordinate symbol to carry positive marginal mass.
    """
    k = dist.k
    if len(functions) != k - 1:
        raise ValidationError(f"expected {k - 1} functions, got {len(functions)}")
    n = functions[0].n
    for i, f in enumerate(functions):
        if f.n != n or f.alphabet != dist.alphabets[i]:
            raise ValidationError(f"function {i} shape mismatch")
    last = k - 1
    sigma_k = dist.alphabets[last]
    muk = dist.marginal([last])
    conds: dict[str, list[tuple[Atom, float]]] = {}
    for v in sigma_k.symbols:
        if muk.mass((v,)) == 0:
            raise ValidationError(f"zero-probability conditioning cell: symbol {v!r}")
        cond = dist.condition(last, v)
        conds[v] = [(y, float(m)) for y, m in cond.atoms.items()]
    if len(dist.support) ** n > term_guard:
        raise SizeGuardError("conditional product expectation exceeds term guard")
    values = []
    for x in _lex_tuples(sigma_k, n):
        res, ims = [], []
        for combo in iter_product(*[conds[v] for v in x]):
            w = 1.0
            for _, m in combo:
                w *= m
            val = complex(w)
            for i, f in enumerate(functions):
                row = tuple(col[0][i] for col in combo)
                val *= f.evaluate(row)
            res.append(val.real)
            ims.append(val.imag)
        values.append(complex(fsum(res), fsum(ims)))
    return TableFunction(n, sigma_k, values)


def conditional_product_given_first(dist: JointDistribution,
                                    products: Sequence[ProductFunction]) -> ProductFunction:
    """Conditional expectation of a product of products given the first row.

    Factorizes coordinate by coordinate, so the result is again a product
    function; symbols with zero first-coordinate mass get factor 0.
    """
    k = dist.k
    if len(products) != k - 1:
        raise ValidationError(f"expected {k - 1} product functions, got {len(products)}")
    n = products[0].n
    for i, p in enumerate(products):
        if p.n != n or p.alphabet != dist.alphabets[i + 1]:
            raise ValidationError(f"product {i} shape mismatch")
    sigma1 = dist.alphabets[0]
    mu1 = dist.marginal([0])
    conds: dict[str, list[tuple[Atom, float]]] = {}
    for s in sigma1.symbols:
        if mu1.mass((s,)) > 0:
            conds[s] = [(y, float(m)) for y, m in dist.condition(0, s).atoms.items()]
    rows = np.zeros((n, len(sigma1)), dtype=np.complex128)
    for si, s in enumerate(sigma1.symbols):
        if s not in conds:
            continue
        for j in range(n):
            res, ims = [], []
            for y, m in conds[s]:
                t = complex(m)
                for i, p in enumerate(products):
                    t *= p.factors[j, p.alphabet.index(y[i])]
                res.append(t.real)
                ims.append(t.imag)
            rows[j, si] = complex(fsum(res), fsum(ims))
    return ProductFunction(sigma1, rows)


def product_smoothness(p: ProductFunction, mu1: JointDistribution, gamma: float) -> float:
    """E |P(x) - P(y)|^2 for y a (1-gamma)-resample of x, in closed form.

    Expanding the squared difference reduces everything to per-factor
    second moments s_j and squared means |m_j|^2:
        E = 2 prod_j s_j - 2 prod_j ((1-gamma) s_j + gamma |m_j|^2),
    so no enumeration of alphabet^n is needed.
    """
    if not 0 <= gamma <= 1:
        raise ValidationError("gamma must lie in [0, 1]")
    w = _measure_weights(mu1, p.alphabet)
    s_prod = 1.0
    r_prod = 1.0
    for j in range(p.n):
        fj = p.factors[j]
        sj = fsum(float(wi) * abs(v) ** 2 for wi, v in zip(w, fj))
        mj = complex(fsum(float(wi) * v.real for wi, v in zip(w, fj)),
                     fsum(float(wi) * v.imag for wi, v in zip(w, fj)))
        s_prod *= sj
        r_prod *= (1 - gamma) * sj + gamma * abs(mj) ** 2
    return 2 * s_prod - 2 * r_prod


def product_smoothness_bruteforce(p: ProductFunction, mu1: JointDistribution,
                                  gamma: float, size_guard: int = 10 ** 6) -> float:
    """Two-point enumeration oracle for the closed form (tiny n only)."""
    a = len(p.alphabet)
    if a ** (2 * p.n) > size_guard:
        raise SizeGuardError("brute-force smoothness exceeds guard")
    w = _measure_weights(mu1, p.alphabet)
    terms = []
    for x in _lex_tuples(p.alphabet, p.n):
        for y in _lex_tuples(p.alphabet, p.n):
            weight = 1.0
            for xj, yj in zip(x, y):
                trans = gamma * w[p.alphabet.index(yj)]
                if xj == yj:
                    trans += 1 - gamma
                weight *= w[p.alphabet.index(xj)] * trans
            terms.append(weight * abs(p.evaluate(x) - p.evaluate(y)) ** 2)
    return fsum(terms)


@dataclass
class StabilityTransferReport:
    delta: float
    gamma: float
    stab: float
    bound: float
    ok: bool


def stability_transfer_check(dist: JointDistribution, f: TableFunction,
                             products: Sequence[ProductFunction],
                             c: float = 1e-2) -> StabilityTransferReport:
    """Spot-check of the stability-transfer chain, not a proof.

    delta is the exact correlation of f with the supplied products; gamma
    is c * delta^2 / log(1/delta) (capped at 1/2), and the claim checked is
    Stab_{1-gamma}(f) >= delta^2 / 4 under the first marginal.
    """
    n = f.n
    corr = exact_correlation(dist, [f, *products], n)
    delta = abs(corr.value)
    if delta <= 0:
        raise ValidationError("transfer check needs a nonzero correlation")
    if delta >= 1:
        gamma = min(c, 0.5)
    else:
        gamma = min(c * delta * delta / log(1 / delta), 0.5)
    mu1 = dist.marginal([0])
    stab = stability(f, 1 - gamma, mu1)
    bound = delta * delta / 4
    return StabilityTransferReport(delta=delta, gamma=gamma, stab=stab,
                                   bound=bound, ok=stab >= bound - 1e-12)
