########################
# Lubin-Tate Groups    #
########################

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
import logging
import math
from typing import Any, Callable, Dict, List, Optional, Union

from app.certificates import Certificate
from app.exceptions import PrecisionError, ValidationError
from app.localfield import EisensteinTower, ExtElement, ExtRing, eisenstein_from_torsion
from app.padic import (
    FractionRing,
    PAdicConfig,
    PAdicFraction,
    PAdicInt,
    PAdicRing,
    factorial_valuation,
    int_valuation,
)
from app.series import TruncatedSeries, ring_of


def reciprocal(k: int, prime: int, precision: int) -> PAdicFraction:
    """1/k as an exact PAdicFraction."""
    e = int_valuation(k, prime)
    unit = k // prime ** e
    return PAdicFraction(PAdicInt(prime, precision, pow(unit, -1, prime ** precision)), e)


def to_fractions(series: TruncatedSeries) -> TruncatedSeries:
    """Carry a Z_p series into FractionRing so it can meet logarithm coefficients."""
    ring = series.ring
    if isinstance(ring, FractionRing):
        return series
    return series.change_ring(FractionRing(ring.prime, ring.precision), PAdicFraction)


def check_lubin_tate(frobenius: TruncatedSeries, uniformizer: PAdicInt) -> None:
    """
    Check f ≡ πZ mod degree 2 and f ≡ Z^p mod p.

    Raises:
        ValidationError: If either condition fails or π is not a uniformizer.
    """
    p = uniformizer.prime
    if uniformizer.valuation() != 1:
        raise ValidationError(f"{uniformizer!r} is not a uniformizer")
    if frobenius.nvars != 1 or frobenius.cap < p:
        raise ValidationError("Frobenius series must be univariate with cap at least p")
    if not frobenius[0].is_zero() or frobenius[1] != uniformizer:
        raise ValidationError("Frobenius series must be πZ mod degree 2")
    for k in range(2, frobenius.cap + 1):
        c = frobenius[k]
        residue = int(c) % p
        if residue != (1 if k == p else 0):
            raise ValidationError(f"Frobenius series is not Z^{p} mod {p} (degree {k})")


def special_frobenius(config: PAdicConfig, uniformizer: Optional[int] = None) -> TruncatedSeries:
    """The polynomial πZ + Z^p."""
    ring = config.ring()
    p = config.prime
    pi = ring(uniformizer if uniformizer is not None else p)
    coeffs: List[Any] = [0] * (p + 1)
    coeffs[1] = pi
    coeffs[p] = 1
    return TruncatedSeries.polynomial(ring, coeffs, cap=max(config.degree_cap, p))


def multiplicative_frobenius(config: PAdicConfig) -> TruncatedSeries:
    """The polynomial (1 + Z)^p - 1 of the multiplicative twin."""
    ring = config.ring()
    p = config.prime
    coeffs = [0] + [math.comb(p, k) for k in range(1, p + 1)]
    return TruncatedSeries.polynomial(ring, coeffs, cap=max(config.degree_cap, p))


def _commuting_lift(frobenius: TruncatedSeries, uniformizer: PAdicInt,
                    start: TruncatedSeries, cap: int) -> TruncatedSeries:
    """
    Extend a degree-one seed S to the unique series with f(S) = S(f, ...).

    At degree k the correction is E_k / (π^k - π), where E_k is the degree-k
    part of f(S) - S(f); the division is by π times a unit and must be exact.
    """
    ring = start.ring
    nvars = start.nvars
    coeffs: Dict[Any, Any] = {key: c for key, c in start.items() if not c.is_zero()}
    for k in range(2, cap + 1):
        f_k = TruncatedSeries(ring, frobenius.with_cap(k).coefficients(), k)
        if nvars == 1:
            approx = TruncatedSeries(ring, [coeffs.get(i, 0) for i in range(k + 1)], k)
            error = f_k.compose(approx) - approx.compose(f_k)
            keys: List[Any] = [k]
        else:
            approx = TruncatedSeries(ring, coeffs, k, nvars=2)
            error = f_k.compose(approx) - approx.substitute(f_k.lift(0), f_k.lift(1))
            keys = [(i, k - i) for i in range(k + 1)]
        divisor = uniformizer ** k - uniformizer
        for key in keys:
            e = error[key]
            try:
                coeffs[key] = e.exact_div(divisor)
            except PrecisionError as exc:
                raise PrecisionError(f"degree {k}: {exc}") from exc
    return TruncatedSeries(ring, coeffs if nvars == 2 else [coeffs.get(i, 0) for i in range(cap + 1)],
                           cap, nvars=nvars)


@dataclass(frozen=True)
class FormalGroupLaw:
    """
    Height-one Lubin-Tate formal group over Z_p.

    Attributes:
        config: Prime, precision, degree cap and slack.
        uniformizer: π, of valuation one.
        frobenius: f ≡ πZ mod degree 2, f ≡ Z^p mod p.
        law: F(X, Y), the unique law with f an endomorphism.
        name: Label used in reports.
    """

    config: PAdicConfig
    uniformizer: PAdicInt
    frobenius: TruncatedSeries
    law: TruncatedSeries
    name: str = "custom"

    @property
    def prime(self) -> int:
        return self.config.prime

    @property
    def ring(self) -> PAdicRing:
        return self.config.ring()

    @property
    def cap(self) -> int:
        return self.config.degree_cap

    @cached_property
    def invariant_differential(self) -> TruncatedSeries:
        """∂F/∂Y (Z, 0), which equals 1/λ′(Z)."""
        return self.law.derive(1).restrict(0)

    @cached_property
    def logarithm(self) -> TruncatedSeries:
        """λ = ∫ dZ / F_Y(Z, 0); coefficient k carries at most ⌊log_p k⌋ denominators."""
        derivative = self.invariant_differential.mul_inverse()
        w = self.config.working_precision
        coeffs: List[Any] = [0]
        for k in range(1, self.cap + 1):
            coeffs.append(PAdicFraction(derivative[k - 1]) * reciprocal(k, self.prime, w))
        return TruncatedSeries(FractionRing(self.prime, w), coeffs, self.cap)

    @cached_property
    def exponential(self) -> TruncatedSeries:
        return self.logarithm.revert()

    def at_precision(self, precision: int) -> 'FormalGroupLaw':
        """Rebuild the law from the integer lifts of f and π at another precision."""
        config = replace(self.config, precision=precision)
        if self.name == "multiplicative":
            return multiplicative_law(config)
        ring = config.ring()
        f = TruncatedSeries(ring, [int(c) for c in self.frobenius.coefficients()],
                            self.frobenius.cap, exact=self.frobenius.exact)
        return group_law(f, int(self.uniformizer), config, self.name)

    def add(self, x: Any, y: Any) -> Any:
        """Formal group sum F(x, y) of two points of positive valuation."""
        return self.law.evaluate2(x, y)

    def multiply_point(self, b: int, x: Any) -> Any:
        """[b](x) for a non-negative integer b, by doubling and adding."""
        if b < 0:
            raise ValidationError("multiply_point needs b >= 0")
        result = ring_of(x).zero
        addend = x
        while b:
            if b & 1:
                result = self.add(result, addend)
            b >>= 1
            if b:
                addend = self.add(addend, addend)
        return result

    # ------------------------------------------------------------------
    # Certificates
    # ------------------------------------------------------------------

    def check_unit(self) -> Certificate:
        x = TruncatedSeries.variable(self.ring, self.cap)
        ok = self.law.restrict(0) == x and self.law.restrict(1) == x
        return Certificate("unit law", ok, self.law.precision)

    def check_commutativity(self) -> Certificate:
        return Certificate("commutativity", self.law == self.law.swap(), self.law.precision)

    def check_associativity(self, rng) -> Certificate:
        """F(F(X, Y), W) = F(X, F(Y, W)) with W = cX + dY for random c, d."""
        ring = self.ring
        c, d = ring.random(rng), ring.random(rng)
        w = TruncatedSeries.bivariate_polynomial(ring, {(1, 0): c, (0, 1): d}, self.cap)
        x = TruncatedSeries.variable(ring, self.cap, 0, 2)
        y = TruncatedSeries.variable(ring, self.cap, 1, 2)
        left = self.law.substitute(self.law, w)
        right = self.law.substitute(x, self.law.substitute(y, w))
        diff = left - right
        return Certificate("associativity", diff.is_zero(), diff.precision,
                           {"c": int(c), "d": int(d)})

    def check_logarithm_frobenius(self) -> Certificate:
        lam = self.logarithm
        diff = lam.compose(to_fractions(self.frobenius)) - lam.scale(self.uniformizer)
        return Certificate("log(f) = pi*log", diff.is_zero(), diff.precision)

    def check_logarithm_homomorphism(self) -> Certificate:
        lam = self.logarithm
        diff = lam.compose(to_fractions(self.law)) - (lam.lift(0) + lam.lift(1))
        return Certificate("log(F(X,Y)) = log X + log Y", diff.is_zero(), diff.precision)


def group_law(frobenius: TruncatedSeries, uniformizer: Union[int, PAdicInt],
              config: PAdicConfig, name: str = "custom") -> FormalGroupLaw:
    """
    Solve for F with F ≡ X + Y mod degree 2 and f(F(X, Y)) = F(f(X), f(Y)).

    Raises:
        ValidationError: If f fails the Lubin-Tate conditions.
        PrecisionError: If a division by π^k - π is not exact to precision.
    """
    ring = config.ring()
    pi = ring(uniformizer)
    check_lubin_tate(frobenius, pi)
    seed = TruncatedSeries(ring, {(1, 0): 1, (0, 1): 1}, 1, nvars=2)
    law = _commuting_lift(frobenius, pi, seed, config.degree_cap)
    logging.info(f"built Lubin-Tate law {name} over Z_{config.prime} to degree {config.degree_cap}")
    return FormalGroupLaw(config, pi, frobenius, law, name)


def special_law(config: PAdicConfig, uniformizer: Optional[int] = None) -> FormalGroupLaw:
    """Law attached to f = πZ + Z^p."""
    pi = uniformizer if uniformizer is not None else config.prime
    return group_law(special_frobenius(config, pi), pi, config, name="special")


def multiplicative_law(config: PAdicConfig) -> FormalGroupLaw:
    """
    The multiplicative twin, f = (1 + Z)^p - 1 and π = p.

    The recursion is run and certified against X + Y + XY; the exact
    polynomial is then kept so that evaluations at torsion points lose nothing.

    Raises:
        ValidationError: If the recursion disagrees with the closed form.
    """
    ring = config.ring()
    f = multiplicative_frobenius(config)
    solved = group_law(f, config.prime, config, name="multiplicative")
    closed = TruncatedSeries.bivariate_polynomial(ring, {(1, 0): 1, (0, 1): 1, (1, 1): 1}, config.degree_cap)
    if solved.law != closed:
        raise ValidationError("multiplicative law recursion disagrees with X + Y + XY")
    return FormalGroupLaw(config, solved.uniformizer, f, closed, "multiplicative")


def mult_by(a: Union[int, PAdicInt], law: FormalGroupLaw) -> TruncatedSeries:
    """
    The endomorphism [a]: the unique series ≡ aZ mod degree 2 commuting with f.

    Raises:
        PrecisionError: If the degree recursion runs out of precision.
    """
    ring = law.ring
    seed = TruncatedSeries(ring, [0, ring(a)], 1)
    return _commuting_lift(law.frobenius, law.uniformizer, seed, law.cap)


def logarithm(law: FormalGroupLaw) -> TruncatedSeries:
    """The formal logarithm λ = Z + ..., coefficients as PAdicFractions."""
    return law.logarithm


def binomial_series(a: Union[int, PAdicInt], ring: PAdicRing, cap: int) -> TruncatedSeries:
    """(1 + Z)^a - 1 expanded with p-adic binomial coefficients."""
    p = ring.prime
    if isinstance(a, int) and a >= 0:
        return TruncatedSeries(ring, [0] + [math.comb(a, k) for k in range(1, cap + 1)], cap,
                               exact=a <= cap)
    a = ring(a)
    coeffs: List[Any] = [0]
    falling = ring.one
    fact_unit = 1
    for k in range(1, cap + 1):
        falling = falling * (a - (k - 1))
        part = k
        while part % p == 0:
            part //= p
        fact_unit *= part
        coeffs.append(falling.divide_by_p_power(factorial_valuation(k, p)) * ring(fact_unit).inverse())
    return TruncatedSeries(ring, coeffs, cap)


def log_one_plus(ring: PAdicRing, cap: int) -> TruncatedSeries:
    """log(1 + Z) = Z - Z^2/2 + Z^3/3 - ... over FractionRing."""
    p, w = ring.prime, ring.precision
    coeffs: List[Any] = [0]
    for k in range(1, cap + 1):
        term = reciprocal(k, p, w)
        coeffs.append(term if k % 2 else -term)
    return TruncatedSeries(FractionRing(p, w), coeffs, cap)


@dataclass(frozen=True)
class TorsionTower:
    """
    Torsion generators ŵ_1, ..., ŵ_n of a Lubin-Tate law in their Eisenstein
    tower: [π](ŵ_1) = 0, ŵ_1 ≠ 0 and [π](ŵ_{k+1}) = ŵ_k.
    """

    law: FormalGroupLaw
    tower: EisensteinTower

    @property
    def levels(self) -> int:
        return self.tower.levels

    def ring(self, level: int) -> ExtRing:
        return self.tower.rings[level - 1]

    def generator(self, level: int) -> ExtElement:
        return self.tower.generators[level - 1]

    @property
    def top(self) -> ExtRing:
        return self.tower.rings[-1]

    def certify(self) -> Certificate:
        f = self.law.frobenius
        first = self.generator(1)
        ok = f.evaluate(first).is_zero() and not first.is_zero()
        for k in range(1, self.levels):
            upper = self.generator(k + 1)
            ok = ok and f.evaluate(upper) == self.ring(k + 1)(self.generator(k))
        return Certificate("torsion tower", ok, self.top.precision, {"levels": self.levels})

    def conjugate(self, b: int, level: int) -> ExtElement:
        """[b](ŵ_level), the image of ŵ_level under the Galois element indexed by b."""
        return self.law.multiply_point(b, self.generator(level))

    def galois(self, b: int) -> Callable[[Any], ExtElement]:
        """
        Automorphism σ_b of the top ring with σ_b(ŵ_k) = [b](ŵ_k).

        Only the top image is computed through the group law; the lower images
        follow by applying f, since ŵ_k = [π^(n-k)](ŵ_n).
        """
        if b % self.law.prime == 0:
            raise ValidationError("Galois elements are indexed by units")
        f = self.law.frobenius
        images = [self.conjugate(b, self.levels)]
        for _ in range(self.levels - 1):
            images.append(f.evaluate(images[-1]))
        images.reverse()
        sigma: Optional[Callable[[Any], Any]] = None
        for k in range(1, self.levels + 1):
            sigma = self.ring(k).hom(images[k - 1], sigma)
        top = self.top

        def apply(x: Any) -> ExtElement:
            return top(sigma(x))
        return apply


def torsion_tower(law: FormalGroupLaw, n: int) -> TorsionTower:
    """
    Build and certify the torsion tower of a law up to level n.

    Raises:
        ValidationError: Propagated Eisenstein failures, or a tower whose
            defining relations do not hold.
    """
    tower = TorsionTower(law, eisenstein_from_torsion(law, n, base=law.ring))
    if not tower.certify():
        raise ValidationError("torsion tower failed its defining relations")
    return tower


@dataclass(frozen=True)
class LTIsomorphism:
    """
    η: source → target between laws with the same uniformizer, with
    period Ω = η′(0).
    """

    source: FormalGroupLaw
    target: FormalGroupLaw
    eta: TruncatedSeries
    omega: PAdicInt

    def check_homomorphism(self) -> Certificate:
        eta = self.eta
        left = eta.compose(self.source.law)
        right = self.target.law.substitute(eta.lift(0), eta.lift(1))
        diff = left - right
        return Certificate("eta(F_s) = F_t(eta, eta)", diff.is_zero(), diff.precision)

    def check_endomorphism(self, a: Union[int, PAdicInt]) -> Certificate:
        left = self.eta.compose(mult_by(a, self.source))
        right = mult_by(a, self.target).compose(self.eta)
        diff = left - right
        return Certificate("eta o [a] = [a] o eta", diff.is_zero(), diff.precision, {"a": int(a)})

    def check_frobenius(self) -> Certificate:
        diff = self.eta.compose(self.source.frobenius) - self.target.frobenius.compose(self.eta)
        return Certificate("eta o f_s = f_t o eta", diff.is_zero(), diff.precision)

    def check_compare_logs(self) -> Certificate:
        """λ_target(η(Z)) = Ω·λ_source(Z)."""
        left = self.target.logarithm.compose(to_fractions(self.eta))
        diff = left - self.source.logarithm.scale(self.omega)
        return Certificate("log_t(eta) = Omega*log_s", diff.is_zero(), diff.precision)


def lt_isomorphism(source: FormalGroupLaw, target: FormalGroupLaw,
                   omega: Union[int, PAdicInt] = 1) -> LTIsomorphism:
    """
    η = exp_target ∘ (Ω·λ_source), certified integral.

    Raises:
        ValidationError: If the laws differ in prime or uniformizer, or Ω is
            not a unit.
        IntegralityError: If a coefficient of η keeps a denominator.
    """
    if source.prime != target.prime or source.uniformizer != target.uniformizer:
        raise ValidationError("isomorphisms are only built between laws with the same uniformizer")
    omega = source.ring(omega)
    if not omega.is_unit():
        raise ValidationError("the period must be a unit")
    composed = target.exponential.compose(source.logarithm.scale(omega))
    eta = composed.change_ring(source.ring, lambda c: c.to_integral())
    logging.info(f"built isomorphism {source.name} -> {target.name} with period {int(omega)}")
    return LTIsomorphism(source, target, eta, omega)


def torsion_correspondence(iso: LTIsomorphism, tower_source: Optional[TorsionTower],
                           tower_target: Optional[TorsionTower], n: int) -> Certificate:
    """
    Certify that η carries ŵ_n of the source to a point of exact level n of
    the target: [π^n] kills η(ŵ_n) and [π^(n-1)] does not.

    The value is computed in the source's level-n ring, which is also the
    target's level-n field since the uniformizers agree.

    Raises:
        PrecisionError: If evaluating η at ŵ_n certifies no digit.
    """
    if n == 0:
        return Certificate("torsion correspondence", iso.eta[0].is_zero(), iso.eta.precision, {"level": 0})
    if tower_source is None or tower_source.levels < n:
        raise ValidationError(f"source tower must reach level {n}")
    f_target = (tower_target.law if tower_target is not None else iso.target).frobenius
    x = iso.eta.evaluate(tower_source.generator(n))
    images = [x]
    for _ in range(n):
        images.append(f_target.evaluate(images[-1]))
    passed = (not x.is_zero()) and images[n].is_zero() and not images[n - 1].is_zero()
    return Certificate("torsion correspondence", passed, x.precision,
                       {"level": n, "valuation": str(x.valuation())})
