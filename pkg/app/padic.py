########################
# p-adic Integers      #
########################

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Any, Union

from app.exceptions import PrecisionError, ValidationError, IntegralityError

# Valuation of an element that is zero to its known precision.
INFINITY = math.inf


def int_valuation(n: int, p: int) -> Union[int, float]:
    """Return the exponent of p in the integer n (INFINITY for n = 0)."""
    if n == 0:
        return INFINITY
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def factorial_valuation(k: int, p: int) -> int:
    """Legendre's formula for v_p(k!)."""
    v, q = 0, p
    while q <= k:
        v += k // q
        q *= p
    return v


def floor_log(k: int, p: int) -> int:
    """Largest e with p^e <= k."""
    e = 0
    while p ** (e + 1) <= k:
        e += 1
    return e


def is_prime(n: int) -> bool:
    """Trial division; the harness only ever asks about small primes."""
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
class PAdicConfig:
    """
    Working parameters shared by the series modules.

    Attributes:
        prime: The prime p.
        precision: Target precision N; results are certified modulo p^N.
        degree_cap: Degree cap D for truncated series.
        slack: Extra digits carried through recursions that divide by the
            uniformizer, so that results still hold modulo p^N.
    """

    prime: int
    precision: int
    degree_cap: int = 16
    slack: int = 16

    def __post_init__(self) -> None:
        if not is_prime(self.prime) or self.prime <= 2:
            raise ValidationError(f"p must be an odd prime, got {self.prime}")
        if self.precision <= 0:
            raise ValidationError("precision must be positive")
        if self.degree_cap <= 0:
            raise ValidationError("degree_cap must be positive")
        if self.slack < 0:
            raise ValidationError("slack must be non-negative")

    @property
    def working_precision(self) -> int:
        return self.precision + self.slack

    def ring(self) -> 'PAdicRing':
        """The base ring at working precision."""
        return PAdicRing(self.prime, self.working_precision)


@dataclass(frozen=True, eq=False)
class PAdicInt:
    """
    Element of Z_p known modulo p^precision.

    The residue is always reduced into [0, p^precision). Binary operations
    between elements of different precision resolve to the smaller one, and
    integers are coerced at the precision of the PAdicInt they meet.
    """

    prime: int
    precision: int
    residue: int

    def __post_init__(self) -> None:
        if self.precision <= 0:
            raise PrecisionError("precision exhausted")
        object.__setattr__(self, 'residue', self.residue % self.prime ** self.precision)

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    def _coerce(self, other: Any) -> 'PAdicInt':
        if isinstance(other, PAdicInt):
            if other.prime != self.prime:
                raise ValidationError(
                    f"Cannot combine elements of Z_{self.prime} and Z_{other.prime}"
                )
            return other
        if isinstance(other, int):
            return PAdicInt(self.prime, self.precision, other)
        return NotImplemented

    def _binary(self, other: Any, op) -> 'PAdicInt':
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = min(self.precision, other.precision)
        return PAdicInt(self.prime, n, op(self.residue, other.residue))

    def __add__(self, other: Any) -> 'PAdicInt':
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other: Any) -> 'PAdicInt':
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other: Any) -> 'PAdicInt':
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other: Any) -> 'PAdicInt':
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self) -> 'PAdicInt':
        return PAdicInt(self.prime, self.precision, -self.residue)

    def __pow__(self, exponent: int) -> 'PAdicInt':
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return PAdicInt(self.prime, self.precision, pow(self.residue, exponent, self.modulus))

    def __eq__(self, other: Any) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        n = min(self.precision, other.precision)
        return (self.residue - other.residue) % self.prime ** n == 0

    def __ne__(self, other: Any) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None  # equality is only defined up to the common precision

    def __int__(self) -> int:
        return self.residue

    def __repr__(self) -> str:
        return f"PAdicInt({self.residue} mod {self.prime}^{self.precision})"

    def is_zero(self) -> bool:
        return self.residue == 0

    def is_unit(self) -> bool:
        return self.residue % self.prime != 0

    def valuation(self) -> Union[int, float]:
        return valuation(self)

    def inverse(self) -> 'PAdicInt':
        if not self.is_unit():
            raise ValidationError(f"{self!r} is not a unit")
        return PAdicInt(self.prime, self.precision, pow(self.residue, -1, self.modulus))

    def with_precision(self, precision: int) -> 'PAdicInt':
        """Forget digits beyond p^precision (never adds digits)."""
        return PAdicInt(self.prime, min(precision, self.precision), self.residue)

    def times_p_power(self, e: int) -> 'PAdicInt':
        """Exact multiplication by p^e; the product is known to e more digits."""
        return PAdicInt(self.prime, self.precision + e, self.residue * self.prime ** e)

    def divide_by_p_power(self, e: int) -> 'PAdicInt':
        """Exact division by p^e; loses e digits of precision."""
        if e == 0:
            return self
        v = self.valuation()
        if v < e:
            raise PrecisionError(f"{self!r} is not divisible by {self.prime}^{e}")
        if self.precision - e <= 0:
            raise PrecisionError(f"dividing {self!r} by {self.prime}^{e} exhausts precision")
        return PAdicInt(self.prime, self.precision - e, self.residue // self.prime ** e)

    def unit_part(self) -> 'PAdicInt':
        v = self.valuation()
        if v == INFINITY:
            raise ValidationError("zero has no unit part")
        return self.divide_by_p_power(v)

    def exact_div(self, other: Any) -> 'PAdicInt':
        """
        Divide by an element of valuation e, requiring exactness.

        Raises:
            PrecisionError: If self is not divisible by p^e to its precision.
        """
        other = self._coerce(other)
        e = other.valuation()
        if e == INFINITY:
            raise PrecisionError("division by an element that is zero to its precision")
        return self.divide_by_p_power(e) * other.divide_by_p_power(e).inverse()


def valuation(x: PAdicInt) -> Union[int, float]:
    """Largest v with p^v | x, or INFINITY when x is zero modulo p^N."""
    if x.residue == 0:
        return INFINITY
    return int_valuation(x.residue, x.prime)


def teichmuller(a: PAdicInt) -> PAdicInt:
    """The (p-1)-st root of unity congruent to a modulo p."""
    if not a.is_unit():
        raise ValidationError("Teichmüller representative needs a unit")
    x = a.residue
    modulus = a.modulus
    for _ in range(a.precision):
        nxt = pow(x, a.prime, modulus)
        if nxt == x:
            break
        x = nxt
    return PAdicInt(a.prime, a.precision, x)


def principal_part(a: PAdicInt) -> PAdicInt:
    """<a> = a / ω(a), the projection of a unit to 1 + pZ_p."""
    return a * teichmuller(a).inverse()


def _require_small(x: PAdicInt) -> int:
    v = valuation(x)
    if v < 1:
        raise ValidationError(f"{x!r} must be divisible by p")
    return min(v, x.precision)


def log1p(x: PAdicInt) -> PAdicInt:
    """
    p-adic logarithm of 1 + x for x in pZ_p.

    For p > 2 the logarithm is an isometry of 1 + pZ_p onto pZ_p, so the
    result is known to the full precision of x. Each term x^k/k is formed with
    exact integer division by p^{v(k)}.
    """
    v = _require_small(x)
    p, n = x.prime, x.precision
    modulus = p ** n
    total = 0
    k = 1
    while k * v - floor_log(k, p) < n:
        e = int_valuation(k, p)
        numerator = pow(x.residue, k, modulus * p ** e) // p ** e
        term = numerator * pow(k // p ** e, -1, modulus)
        total += term if k % 2 else -term
        k += 1
        if k > 64 * n * p:
            raise PrecisionError("logarithm series did not stabilise")
    return PAdicInt(p, n, total)


def exp_p(x: PAdicInt) -> PAdicInt:
    """
    p-adic exponential of x in pZ_p.

    Terms x^k/k! are formed exactly; v_p(k!) <= (k-1)/(p-1) < k so every term
    is integral and the series stops once k*v - (k-1)/(p-1) reaches N.
    """
    v = _require_small(x)
    p, n = x.prime, x.precision
    modulus = p ** n
    total = 1
    k = 1
    fact_unit = 1
    while k * v - (k - 1) / (p - 1) < n + 1:
        e = factorial_valuation(k, p)
        part = k
        while part % p == 0:
            part //= p
        fact_unit = fact_unit * part % modulus
        numerator = pow(x.residue, k, modulus * p ** e) // p ** e
        total += numerator * pow(fact_unit, -1, modulus)
        k += 1
        if k > 64 * n * p:
            raise PrecisionError("exponential series did not stabilise")
    return PAdicInt(p, n, total)


def log_unit(u: PAdicInt) -> PAdicInt:
    """Iwasawa logarithm of a unit: log(u) = log(<u>), with log(ω(u)) = 0."""
    return log1p(principal_part(u) - 1)


@dataclass(frozen=True)
class PAdicRing:
    """Descriptor for Z_p at a fixed precision; coerces integers into it."""

    prime: int
    precision: int

    @property
    def zero(self) -> PAdicInt:
        return PAdicInt(self.prime, self.precision, 0)

    @property
    def one(self) -> PAdicInt:
        return PAdicInt(self.prime, self.precision, 1)

    def __call__(self, value: Any) -> PAdicInt:
        if isinstance(value, PAdicInt):
            return value
        if isinstance(value, int):
            return PAdicInt(self.prime, self.precision, value)
        raise ValidationError(f"Cannot coerce {value!r} into Z_{self.prime}")

    def random(self, rng) -> PAdicInt:
        return self(rng.randrange(self.prime ** self.precision))

    def random_unit(self, rng) -> PAdicInt:
        while True:
            x = self.random(rng)
            if x.is_unit():
                return x

    def random_small(self, rng) -> PAdicInt:
        """Random element of pZ_p."""
        return self(self.prime * rng.randrange(self.prime ** (self.precision - 1)))


@dataclass(frozen=True, eq=False)
class PAdicFraction:
    """
    The number numerator / p^shift in Q_p.

    Absolute precision is numerator.precision - shift: the value is known
    modulo p^(numerator.precision - shift). Used wherever a formula leaves
    Z_p: logarithm coefficients, traces divided by π^n and the (u0/p - 1)
    factors.
    """

    numerator: PAdicInt
    shift: int = 0

    def __post_init__(self) -> None:
        num, shift = self.numerator, self.shift
        if shift < 0:
            num, shift = num.times_p_power(-shift), 0
        while shift > 0 and num.precision > 1 and num.residue % num.prime == 0:
            num = PAdicInt(num.prime, num.precision - 1, num.residue // num.prime)
            shift -= 1
        object.__setattr__(self, 'numerator', num)
        object.__setattr__(self, 'shift', shift)

    @property
    def prime(self) -> int:
        return self.numerator.prime

    @property
    def absolute_precision(self) -> int:
        return self.numerator.precision - self.shift

    def _coerce(self, other: Any) -> 'PAdicFraction':
        if isinstance(other, PAdicFraction):
            return other
        if isinstance(other, PAdicInt):
            return PAdicFraction(other)
        if isinstance(other, int):
            return PAdicFraction(PAdicInt(self.prime, self.numerator.precision, other))
        return NotImplemented

    def __add__(self, other: Any) -> 'PAdicFraction':
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = (self, other) if self.shift >= other.shift else (other, self)
        lifted = b.numerator.times_p_power(a.shift - b.shift)
        return PAdicFraction(a.numerator + lifted, a.shift)

    __radd__ = __add__

    def __neg__(self) -> 'PAdicFraction':
        return PAdicFraction(-self.numerator, self.shift)

    def __sub__(self, other: Any) -> 'PAdicFraction':
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> 'PAdicFraction':
        return (-self) + other

    def __mul__(self, other: Any) -> 'PAdicFraction':
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return PAdicFraction(self.numerator * other.numerator, self.shift + other.shift)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> 'PAdicFraction':
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = PAdicFraction(PAdicInt(self.prime, self.numerator.precision, 1))
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other: Any) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        diff = self - other
        return diff.numerator.is_zero()

    def __ne__(self, other: Any) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __repr__(self) -> str:
        if self.shift == 0:
            return f"PAdicFraction({self.numerator!r})"
        return f"PAdicFraction({self.numerator!r} / {self.prime}^{self.shift})"

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def valuation(self) -> Union[int, float]:
        v = self.numerator.valuation()
        return v if v == INFINITY else v - self.shift

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def is_integral(self) -> bool:
        return self.shift == 0 or self.numerator.is_zero()

    def to_integral(self) -> PAdicInt:
        """
        Return the value as a PAdicInt.

        Raises:
            IntegralityError: If a denominator survives.
        """
        if self.shift == 0:
            return self.numerator
        if self.numerator.is_zero() and self.absolute_precision > 0:
            return PAdicInt(self.prime, self.absolute_precision, 0)
        raise IntegralityError(f"{self!r} is not integral")

    def inverse(self) -> 'PAdicFraction':
        v = self.numerator.valuation()
        if v == INFINITY:
            raise PrecisionError("cannot invert a value that is zero to its precision")
        unit = self.numerator.divide_by_p_power(v)
        return PAdicFraction(unit.inverse(), v - self.shift)

    def with_precision(self, absolute: int) -> 'PAdicFraction':
        return PAdicFraction(self.numerator.with_precision(absolute + self.shift), self.shift)


@dataclass(frozen=True)
class FractionRing:
    """Descriptor for Q_p values carried as PAdicFractions."""

    prime: int
    precision: int

    @property
    def zero(self) -> PAdicFraction:
        return PAdicFraction(PAdicInt(self.prime, self.precision, 0))

    @property
    def one(self) -> PAdicFraction:
        return PAdicFraction(PAdicInt(self.prime, self.precision, 1))

    def __call__(self, value: Any) -> PAdicFraction:
        if isinstance(value, PAdicFraction):
            return value
        if isinstance(value, PAdicInt):
            return PAdicFraction(value)
        if isinstance(value, int):
            return PAdicFraction(PAdicInt(self.prime, self.precision, value))
        raise ValidationError(f"Cannot coerce {value!r} into Q_{self.prime}")
