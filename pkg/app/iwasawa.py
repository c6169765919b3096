########################
# Iwasawa Algebra      #
########################

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Any, Dict, List, Optional, Tuple, Union

from app.certificates import Certificate
from app.exceptions import PrecisionError, ValidationError
from app.localfield import ExtElement, ExtFraction, log_principal
from app.lubin_tate import TorsionTower
from app.padic import (
    INFINITY,
    PAdicConfig,
    PAdicFraction,
    PAdicInt,
    PAdicRing,
    exp_p,
    log1p,
    principal_part,
    teichmuller,
)
from app.series import TruncatedSeries

# Branch of Λ(Z_p^×) carrying the characters ψ*<ψ*>^s.
PSI_STAR_BRANCH = 1

# Highest group order the theta congruence is meant to run at.
THETA_ORDER_LIMIT = 500


def primitive_root(p: int) -> int:
    """Smallest generator of (Z/p)^×."""
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in _prime_factors(p - 1)):
            return g
    return 1


def _prime_factors(n: int) -> List[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class GammaDatum:
    """
    The generator γ of the Galois group, through its character value c = ψ*(γ).

    c = ω(g0)·exp_p(p) for a primitive root g0 mod p, so that log_p(c) = p and
    the Teichmüller part of c generates the residue classes. Series in
    T = γ - 1 are read on the pro-p part, where T stands for <c>·exp(ps) - 1
    at the character ψ*<ψ*>^s.
    """

    config: PAdicConfig
    primitive_root: int
    c: PAdicInt
    branch: int = PSI_STAR_BRANCH

    @classmethod
    def build(cls, config: PAdicConfig, g0: Optional[int] = None) -> 'GammaDatum':
        """
        Raises:
            ValidationError: If g0 is not a primitive root mod p.
        """
        p = config.prime
        g0 = primitive_root(p) if g0 is None else g0
        if g0 % p == 0 or any(pow(g0, (p - 1) // q, p) == 1 for q in _prime_factors(p - 1)):
            raise ValidationError(f"{g0} is not a primitive root mod {p}")
        ring = config.ring()
        c = teichmuller(ring(g0)) * exp_p(ring(p))
        return cls(config, g0, c)

    @property
    def prime(self) -> int:
        return self.config.prime

    @property
    def ring(self) -> PAdicRing:
        return self.config.ring()

    @property
    def principal(self) -> PAdicInt:
        """<c> = exp_p(p)."""
        return principal_part(self.c)

    def check(self) -> Certificate:
        ok = log1p(self.principal - 1) == self.prime
        ok = ok and teichmuller(self.c) == teichmuller(self.ring(self.primitive_root))
        return Certificate("log_p(c) = p", ok, self.c.precision)

    def character_point(self, s: Union[int, PAdicInt]) -> PAdicInt:
        """The value of T at ψ*<ψ*>^s."""
        s = self.ring(s)
        return self.principal * exp_p(s * self.prime) - 1

    def element(self, coeffs, exact: bool = True) -> 'IwasawaElement':
        ring = self.ring
        series = (TruncatedSeries.polynomial(ring, coeffs, cap=max(self.config.degree_cap, len(coeffs) - 1))
                  if exact else TruncatedSeries(ring, coeffs, self.config.degree_cap))
        return IwasawaElement(series, self)

    def constant(self, value: Any) -> 'IwasawaElement':
        return self.element([value])

    def random(self, rng, degree: Optional[int] = None, density: float = 0.5) -> 'IwasawaElement':
        """Random sparse polynomial in T of degree at most `degree`."""
        degree = self.config.degree_cap if degree is None else degree
        ring = self.ring
        coeffs = [ring.random(rng) if rng.random() < density else 0 for _ in range(degree + 1)]
        return self.element(coeffs)


@dataclass(frozen=True, eq=False)
class IwasawaElement:
    """Element of the ψ*-branch of the Iwasawa algebra, as a series in T = γ - 1."""

    series: TruncatedSeries
    gamma: GammaDatum
    branch: int = PSI_STAR_BRANCH

    def _check(self, other: 'IwasawaElement') -> None:
        if self.branch != other.branch or self.gamma.c != other.gamma.c:
            raise ValidationError("elements live on different branches or generators")

    def __add__(self, other: 'IwasawaElement') -> 'IwasawaElement':
        self._check(other)
        return IwasawaElement(self.series + other.series, self.gamma, self.branch)

    def __sub__(self, other: 'IwasawaElement') -> 'IwasawaElement':
        self._check(other)
        return IwasawaElement(self.series - other.series, self.gamma, self.branch)

    def __neg__(self) -> 'IwasawaElement':
        return IwasawaElement(-self.series, self.gamma, self.branch)

    def __mul__(self, other: Any) -> 'IwasawaElement':
        if isinstance(other, IwasawaElement):
            self._check(other)
            return IwasawaElement(self.series * other.series, self.gamma, self.branch)
        return IwasawaElement(self.series.scale(other), self.gamma, self.branch)

    def __pow__(self, exponent: int) -> 'IwasawaElement':
        if exponent < 0:
            raise ValidationError("only non-negative powers")
        return IwasawaElement(self.series ** exponent, self.gamma, self.branch)


def theta_element(gamma: GammaDatum) -> IwasawaElement:
    """
    ϑ* = γ·ψ*(γ)^(-1) - 1 on the pro-p part: (1 + T)·<c>^(-1) - 1.

    It vanishes exactly at ψ* and generates the kernel of evaluation there.
    """
    e = gamma.principal.inverse()
    return gamma.element([e - 1, e])


def eval_character(F: IwasawaElement, s: Union[int, PAdicInt]) -> PAdicInt:
    """
    F(ψ*<ψ*>^s): substitute T = <c>·exp_p(ps) - 1 and evaluate.

    Raises:
        ValidationError: If F is not on the ψ*-branch.
        PrecisionError: If a truncated F certifies no digit.
    """
    if F.branch != F.gamma.branch:
        raise ValidationError("element and character are on different branches")
    return F.series.evaluate(F.gamma.character_point(s))


def _s_series(gamma: GammaDatum, m: int) -> TruncatedSeries:
    """<c>·(exp(ps) - 1) to s-degree m: the substituted T minus its value at s = 0."""
    ring = gamma.ring
    p = gamma.prime
    coeffs: List[Any] = [0]
    factorial = 1
    for k in range(1, m + 1):
        factorial *= k
        coeffs.append(gamma.principal * ring(p ** k) * ring(factorial).inverse())
    return TruncatedSeries(ring, coeffs, m)


def D_star(F: IwasawaElement, m: int) -> PAdicInt:
    """
    D^{*(m)}F(ψ*): the m-th Taylor coefficient in s of F(ψ*<ψ*>^s).

    F is re-centred at T0 = <c> - 1 and composed with <c>(exp(ps) - 1).

    Raises:
        ValidationError: If m < 0 or p <= m (factorial denominators).
    """
    p = F.gamma.prime
    if m < 0:
        raise ValidationError("m must be non-negative")
    if p <= m:
        raise ValidationError(f"D* of order {m} needs p > {m}")
    if F.branch != F.gamma.branch:
        raise ValidationError("element and character are on different branches")
    if m == 0:
        return eval_character(F, 0)
    shifted = F.series.taylor_shift(F.gamma.character_point(0))
    return shifted.compose(_s_series(F.gamma, m))[m]


def check_character_homomorphism(F: IwasawaElement, G: IwasawaElement, s: Union[int, PAdicInt] = 0) -> Certificate:
    """Evaluation at ψ*<ψ*>^s respects sums and products."""
    fs, gs = eval_character(F, s), eval_character(G, s)
    total = eval_character(F + G, s)
    product = eval_character(F * G, s)
    ok = total == fs + gs and product == fs * gs
    return Certificate("evaluation is a ring homomorphism", ok, min(total.precision, product.precision),
                       {"s": int(s)})


def verify_dertheta(F: IwasawaElement, m: int) -> Certificate:
    """D^{*(m)}(ϑ*^m·F)(ψ*) = p^m·F(ψ*), decided at the joint precision."""
    if m not in (1, 2, 3):
        raise ValidationError("the derivative identity is checked for m in 1..3")
    theta = theta_element(F.gamma)
    left = D_star(theta ** m * F, m)
    right = eval_character(F, 0) * F.gamma.prime ** m
    precision = min(left.precision, right.precision)
    return Certificate("dertheta", left == right, precision, {"m": m})


def check_leibniz(F: IwasawaElement, G: IwasawaElement) -> Certificate:
    """D*(FG, 1) = D*(F, 1)·G(ψ*) + F(ψ*)·D*(G, 1)."""
    left = D_star(F * G, 1)
    right = D_star(F, 1) * eval_character(G, 0) + eval_character(F, 0) * D_star(G, 1)
    return Certificate("leibniz", left == right, min(left.precision, right.precision))


def check_theta_divides(F: IwasawaElement) -> Certificate:
    """
    Synthetic division of F - F(ψ*) by ϑ* = a + bT: solve for the quotient
    from the top degree down and check the remainder vanishes.

    Each downward step multiplies the truncation error by a, of valuation
    one, so a truncated F is decided to about cap + 1 digits.
    """
    theta = theta_element(F.gamma).series
    a, b = theta[0], theta[1]
    H = F.series - eval_character(F, 0)
    cap = H.cap if not H.exact else max(H.degree(), 0)
    b_inv = b.inverse()
    q = H.ring.zero
    for k in range(cap, 0, -1):
        q = (H[k] - a * q) * b_inv
    remainder = H[0] - a * q
    limit = remainder.precision if H.exact else min(remainder.precision, cap + 1)
    remainder = remainder.with_precision(limit)
    return Certificate("theta divides F - F(psi*)", remainder.is_zero(), limit)


# ----------------------------------------------------------------------
# Finite level: the group algebra Z_p[(Z/p^n)^×]
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GroupAlgebraElement:
    """
    Element of Z_p[(Z/p^n)^×], keyed by least positive residues prime to p.
    """

    prime: int
    level: int
    coefficients: Dict[int, PAdicInt] = field(default_factory=dict)

    @property
    def modulus(self) -> int:
        return self.prime ** self.level

    @property
    def order(self) -> int:
        return self.prime ** (self.level - 1) * (self.prime - 1)

    def group(self) -> List[int]:
        return [b for b in range(1, self.modulus) if b % self.prime]

    @classmethod
    def basis(cls, prime: int, level: int, b: int, coefficient: PAdicInt) -> 'GroupAlgebraElement':
        b %= prime ** level
        if b % prime == 0:
            raise ValidationError(f"{b} is not a unit mod {prime}^{level}")
        return cls(prime, level, {b: coefficient})

    def __add__(self, other: 'GroupAlgebraElement') -> 'GroupAlgebraElement':
        out = dict(self.coefficients)
        for b, c in other.coefficients.items():
            out[b] = out[b] + c if b in out else c
        return GroupAlgebraElement(self.prime, self.level, out)

    def __neg__(self) -> 'GroupAlgebraElement':
        return GroupAlgebraElement(self.prime, self.level, {b: -c for b, c in self.coefficients.items()})

    def __sub__(self, other: 'GroupAlgebraElement') -> 'GroupAlgebraElement':
        return self + (-other)

    def __mul__(self, other: 'GroupAlgebraElement') -> 'GroupAlgebraElement':
        out: Dict[int, PAdicInt] = {}
        for b1, c1 in self.coefficients.items():
            for b2, c2 in other.coefficients.items():
                key = b1 * b2 % self.modulus
                term = c1 * c2
                out[key] = out[key] + term if key in out else term
        return GroupAlgebraElement(self.prime, self.level, out)

    def scale(self, factor: Any) -> 'GroupAlgebraElement':
        return GroupAlgebraElement(self.prime, self.level,
                                   {b: c * factor for b, c in self.coefficients.items()})

    def coefficient(self, b: int) -> Optional[PAdicInt]:
        return self.coefficients.get(b % self.modulus)


def theta_congruence(n: int, gamma: GammaDatum, control_shift: int = 0) -> Certificate:
    """
    Decide ϑ_n·Σ_b ψ^(-1)(b)·σ_b ≡ -(p-1)p^n modulo p^n·ℐ_n in Z_p[(Z/p^n)^×].

    σ_b is lifted to the integer b in [1, p^n), so ψ(σ_b) = b and
    ϑ_n = c^(-1)·σ_{c mod p^n} - 1. ℐ_n is spanned by σ_b - b·1 and p^n.
    X = LHS + (p-1)p^n lies in p^n·ℐ_n exactly when every coefficient is
    divisible by p^n and Y = X/p^n solves the membership system
    Y = Σ_b t_b(σ_b - b) + p^n·u. Eliminating t_b = y_b (b ≠ 1) leaves
    p^n·u = Σ_b y_b·b, whose residue mod p^n is reported.

    control_shift adds control_shift·p^n to the constant (the negative
    control uses 1).

    Raises:
        ValidationError: If n < 1 or the working precision is below 2n.
    """
    p = gamma.prime
    if n < 1:
        raise ValidationError("level must be at least 1")
    ring = gamma.ring
    if ring.precision < 2 * n:
        raise ValidationError(f"precision {ring.precision} too small for level {n}")
    modulus = p ** n
    algebra = GroupAlgebraElement(p, n)
    if algebra.order > THETA_ORDER_LIMIT:
        logging.warning(f"theta congruence at order {algebra.order} is beyond desk scale")
    one = ring.one
    r = int(gamma.c) % modulus
    theta_n = GroupAlgebraElement.basis(p, n, r, gamma.c.inverse()) - GroupAlgebraElement.basis(p, n, 1, one)
    twisted = GroupAlgebraElement(p, n, {b: ring(b).inverse() for b in algebra.group()})
    constant = -(p - 1) * modulus + control_shift * modulus
    x = theta_n * twisted - GroupAlgebraElement.basis(p, n, 1, ring(constant))
    details: Dict[str, Any] = {
        "order": algebra.order,
        "convention": "psi(sigma_b) = b, least positive residue; theta_n = c^-1 sigma_(c mod p^n) - 1",
    }
    y: Dict[int, PAdicInt] = {}
    for b in algebra.group():
        c = x.coefficient(b)
        c = ring.zero if c is None else c
        if c.valuation() < n:
            details["undivisible"] = b
            return Certificate("theta congruence", False, ring.precision - n, details)
        y[b] = c.divide_by_p_power(n)
    residual = ring.zero
    for b, coefficient in y.items():
        residual = residual + coefficient * b
    details["residual"] = int(residual) % modulus
    passed = residual.with_precision(n).is_zero()
    return Certificate("theta congruence", passed, ring.precision - n, details)


# ----------------------------------------------------------------------
# Unit towers and the ι functionals
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class UnitTowerData:
    """Principal units u_1, ..., u_n along a torsion tower, with its Galois action."""

    tower: TorsionTower
    units: Tuple[ExtElement, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        for k, u in enumerate(self.units, start=1):
            if u.ring is not self.tower.ring(k):
                raise ValidationError(f"u_{k} must lie in the level-{k} ring")
            if (u - 1).valuation() <= 0:
                raise ValidationError(f"u_{k} is not a principal unit")

    @property
    def levels(self) -> int:
        return len(self.units)

    def power(self, exponent: int) -> 'UnitTowerData':
        return UnitTowerData(self.tower, tuple(u ** exponent for u in self.units), f"{self.name}^{exponent}")

    def check_norm_coherence(self) -> Certificate:
        """N_{k+1/k}(u_{k+1}) = u_k."""
        passed = True
        precision: Union[int, float] = INFINITY
        for k in range(1, self.levels):
            norm = self.units[k].norm()
            passed = passed and norm == self.units[k - 1]
            precision = min(precision, norm.precision)
        return Certificate("unit norm coherence", passed, precision if precision != INFINITY else None)

    def check_galois_composition(self, b1: int, b2: int) -> Certificate:
        """σ_{b1}(σ_{b2}(ŵ_n)) = σ_{b1 b2}(ŵ_n) at the top level."""
        n = self.tower.levels
        w = self.tower.generator(n)
        composed = self.tower.galois(b1)(self.tower.galois(b2)(w))
        direct = self.tower.galois(b1 * b2 % self.tower.law.prime ** n)(w)
        return Certificate("galois composition", composed == direct, composed.precision,
                           {"b1": b1, "b2": b2})


def cyclotomic_unit_tower(tower: TorsionTower, a: int) -> UnitTowerData:
    """
    u_k = ω(a)^(-1)·(ζ_k^a - 1)/(ζ_k - 1) with ζ_k = 1 + ŵ_k, for the
    multiplicative law.

    Raises:
        ValidationError: If the law is not multiplicative or p divides a.
    """
    law = tower.law
    if law.name != "multiplicative":
        raise ValidationError("cyclotomic units need the multiplicative law")
    if a % law.prime == 0:
        raise ValidationError("a must be prime to p")
    omega_inv = teichmuller(law.ring(a)).inverse()
    units = []
    for k in range(1, tower.levels + 1):
        ring = tower.ring(k)
        zeta = tower.generator(k) + 1
        acc, power = ring.zero, ring.one
        for _ in range(a):
            acc, power = acc + power, power * zeta
        units.append(acc * omega_inv)
    return UnitTowerData(tower, tuple(units), f"cyclotomic:a={a}")


@dataclass
class IotaStarResult:
    """S_1, ..., S_n (scaled) and the valuations of their successive differences."""

    partials: List[ExtFraction]
    valuations: List[Union[Any, float]]

    @property
    def value(self) -> ExtFraction:
        return self.partials[-1]

    def is_nondecreasing(self) -> bool:
        return all(a <= b for a, b in zip(self.valuations, self.valuations[1:]))


def _euler_factor(x: ExtFraction, prime: int, unit_root: PAdicInt) -> ExtFraction:
    # (1 - u0/p)·x = (p - u0)·x / p
    return ExtFraction(x.numerator * (prime - unit_root), x.shift + 1)


def galois_log_sum(data: UnitTowerData, level: int) -> ExtFraction:
    """Σ_{b ∈ (Z/p^level)^×} b^(-1)·log(σ_b(u_level)), in the top ring."""
    tower = data.tower
    p = tower.law.prime
    ring = tower.law.ring
    top = tower.top
    u = data.units[level - 1]
    total = ExtFraction(top.zero, 0)
    for b in range(1, p ** level):
        if b % p == 0:
            continue
        conjugate = tower.galois(b)(u)
        total = total + log_principal(conjugate).scale(ring(b).inverse())
    return total


def iota_star(data: UnitTowerData, n: Optional[int] = None, unit_root: Union[int, PAdicInt] = 1) -> IotaStarResult:
    """
    The partial sums S_k = (1 - u0/p)·Σ_τ ψ*^(-1)(τ)·log(u_k^τ) for k = 1..n,
    computed in the top ring, with v(S_{k+1} - S_k) as convergence evidence.

    Raises:
        ValidationError: If n exceeds the tower or the units.
    """
    n = data.levels if n is None else n
    if not 1 <= n <= min(data.levels, data.tower.levels):
        raise ValidationError(f"level {n} is outside the unit tower")
    u0 = data.tower.law.ring(unit_root)
    p = data.tower.law.prime
    partials = [_euler_factor(galois_log_sum(data, k), p, u0) for k in range(1, n + 1)]
    valuations = [(b - a).valuation() for a, b in zip(partials, partials[1:])]
    logging.info(f"iota* on {data.name}: successive difference valuations {valuations}")
    return IotaStarResult(partials, valuations)


def iota_w(beta_delta: Union[PAdicInt, PAdicFraction], omega: PAdicInt,
           unit_root: Union[int, PAdicInt]) -> PAdicFraction:
    """
    (1 - u0/p)·Ω·δ_w; the division by p is carried as one shift.

    Raises:
        ValidationError: If Ω is not a unit.
    """
    if not omega.is_unit():
        raise ValidationError("the period must be a unit")
    value = beta_delta if isinstance(beta_delta, PAdicFraction) else PAdicFraction(beta_delta)
    return PAdicFraction(value.numerator * (value.prime - unit_root) * omega, value.shift + 1)


def check_iota_scaling(data: UnitTowerData, exponent: int, unit_root: Union[int, PAdicInt] = 1) -> Certificate:
    """ι*(u^λ) = λ·ι*(u) for an integer λ."""
    base = iota_star(data, unit_root=unit_root).value
    scaled = iota_star(data.power(exponent), unit_root=unit_root).value
    diff = scaled - base.scale(exponent)
    return Certificate("iota* scaling", diff.is_zero(), diff.absolute_precision, {"exponent": exponent})
