########################
# Weil Pairing         #
########################

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import logging
from pathlib import Path
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union

from dotenv import dotenv_values, set_key

from app.certificates import Certificate
from app.exceptions import DegenerateDivisorError, ValidationError
from app.localfield import find_irreducible_mod_p, is_irreducible_mod_p
from app.padic import is_prime
from app.rng import SplitMix64

# The first normalization display as printed; the adjointness form is what gets checked.
PRINTED_ADJOINTNESS = "e_n(pi^* s_n, s_n^*) = e_n(s_n, pi s_n)"
CHECKED_ADJOINTNESS = "e_N(phi P, Q) = e_N(P, phi^ Q)"

DEFAULT_MAX_SIZE = 1 << 20


# ----------------------------------------------------------------------
# Finite fields
# ----------------------------------------------------------------------

def _poly_mulmod(a: Sequence[int], b: Sequence[int], modulus: Sequence[int], ell: int) -> Tuple[int, ...]:
    m = len(modulus) - 1
    prod = [0] * (2 * m - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    for k in range(len(prod) - 1, m - 1, -1):
        top = prod[k] % ell
        if top:
            for i in range(m):
                prod[k - m + i] -= top * modulus[i]
    return tuple(c % ell for c in prod[:m])


@dataclass(frozen=True)
class FiniteField:
    """
    F_{ℓ^m} as F_ℓ[x] modulo a monic irreducible polynomial.

    Attributes:
        ell: The characteristic ℓ.
        modulus: Monic modulus, coefficients low to high; (0, 1) gives F_ℓ.
    """

    ell: int
    modulus: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not is_prime(self.ell):
            raise ValidationError(f"characteristic {self.ell} is not prime")
        if len(self.modulus) < 2 or self.modulus[-1] != 1:
            raise ValidationError("field modulus must be monic of positive degree")
        if not is_irreducible_mod_p(self.modulus, self.ell):
            raise ValidationError(f"modulus {self.modulus} is reducible mod {self.ell}")

    @classmethod
    def build(cls, ell: int, degree: int) -> 'FiniteField':
        """The field of size ℓ^degree with the first irreducible modulus found."""
        return cls(ell, tuple(find_irreducible_mod_p(ell, degree)))

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    @property
    def order(self) -> int:
        return self.ell ** self.degree

    @property
    def zero(self) -> 'FiniteFieldElement':
        return FiniteFieldElement(self, (0,) * self.degree)

    @property
    def one(self) -> 'FiniteFieldElement':
        return self(1)

    def __call__(self, value: Any) -> 'FiniteFieldElement':
        if isinstance(value, FiniteFieldElement):
            if value.field != self:
                raise ValidationError("element belongs to another field")
            return value
        if isinstance(value, int):
            return FiniteFieldElement(self, (value % self.ell,) + (0,) * (self.degree - 1))
        coeffs = [int(c) % self.ell for c in value]
        if len(coeffs) > self.degree:
            raise ValidationError(f"too many coefficients for a degree-{self.degree} field")
        return FiniteFieldElement(self, tuple(coeffs) + (0,) * (self.degree - len(coeffs)))

    def from_index(self, k: int) -> 'FiniteFieldElement':
        """The element whose coefficients are the base-ℓ digits of k."""
        coeffs = []
        for _ in range(self.degree):
            k, r = divmod(k, self.ell)
            coeffs.append(r)
        return FiniteFieldElement(self, tuple(coeffs))

    def elements(self) -> Iterator['FiniteFieldElement']:
        for k in range(self.order):
            yield self.from_index(k)

    def random(self, rng: SplitMix64) -> 'FiniteFieldElement':
        return self.from_index(rng.randrange(self.order))

    @cached_property
    def nonresidue(self) -> 'FiniteFieldElement':
        half = (self.order - 1) // 2
        for k in range(1, self.order):
            z = self.from_index(k)
            if z ** half != self.one:
                return z
        raise ValidationError("field has no quadratic non-residue")

    def sqrt(self, a: 'FiniteFieldElement') -> Optional['FiniteFieldElement']:
        """A square root of a (Tonelli-Shanks), or None for a non-square."""
        if a.is_zero():
            return a
        q = self.order
        one = self.one
        if a ** ((q - 1) // 2) != one:
            return None
        s, t = 0, q - 1
        while t % 2 == 0:
            s, t = s + 1, t // 2
        m, c = s, self.nonresidue ** t
        x, b = a ** ((t + 1) // 2), a ** t
        while b != one:
            i, b2 = 0, b
            while b2 != one:
                b2, i = b2 * b2, i + 1
            e = c ** (1 << (m - i - 1))
            x, c, m = x * e, e * e, i
            b = b * c
        return x


@dataclass(frozen=True, eq=False)
class FiniteFieldElement:
    field: FiniteField
    coeffs: Tuple[int, ...]

    def _coerce(self, other: Any) -> Optional['FiniteFieldElement']:
        if isinstance(other, FiniteFieldElement):
            return other if other.field == self.field else None
        if isinstance(other, int):
            return self.field(other)
        return None

    def __add__(self, other: Any) -> 'FiniteFieldElement':
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        ell = self.field.ell
        return FiniteFieldElement(self.field, tuple((x + y) % ell for x, y in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> 'FiniteFieldElement':
        ell = self.field.ell
        return FiniteFieldElement(self.field, tuple(-x % ell for x in self.coeffs))

    def __sub__(self, other: Any) -> 'FiniteFieldElement':
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> 'FiniteFieldElement':
        return (-self) + other

    def __mul__(self, other: Any) -> 'FiniteFieldElement':
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        f = self.field
        if f.degree == 1:
            return FiniteFieldElement(f, (self.coeffs[0] * other.coeffs[0] % f.ell,))
        return FiniteFieldElement(f, _poly_mulmod(self.coeffs, other.coeffs, f.modulus, f.ell))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> 'FiniteFieldElement':
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = self.field.one, self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def inverse(self) -> 'FiniteFieldElement':
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.order - 2)

    def __truediv__(self, other: Any) -> 'FiniteFieldElement':
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __eq__(self, other: Any) -> bool:
        other = self._coerce(other)
        return other is not None and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.field.ell, self.coeffs))

    def __repr__(self) -> str:
        return f"F{self.field.order}{list(self.coeffs)}"

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def frobenius(self) -> 'FiniteFieldElement':
        """x -> x^ℓ, the generator of Gal(F_{ℓ^m}/F_ℓ)."""
        return self ** self.field.ell


def root_of_unity_order(z: FiniteFieldElement, n: int) -> int:
    """
    Order of z, which must satisfy z^n = 1.

    Raises:
        ValidationError: If z is not an n-th root of unity.
    """
    if z ** n != z.field.one:
        raise ValidationError(f"{z!r} is not a {n}-th root of unity")
    for d in _divisors(n):
        if z ** d == z.field.one:
            return d
    return n


def _divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


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


# ----------------------------------------------------------------------
# Curves
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticCurve:
    """Short Weierstrass curve y^2 = x^3 + a x + b over a finite field of characteristic > 3."""

    field: FiniteField
    a: FiniteFieldElement
    b: FiniteFieldElement

    def __post_init__(self) -> None:
        if self.field.ell <= 3:
            raise ValidationError("characteristic must exceed 3")
        if (self.a ** 3 * 4 + self.b * self.b * 27).is_zero():
            raise ValidationError("curve is singular")

    @classmethod
    def over(cls, field: FiniteField, a: int, b: int) -> 'EllipticCurve':
        return cls(field, field(a), field(b))

    @property
    def infinity(self) -> 'CurvePoint':
        return CurvePoint(self, None, None)

    def rhs(self, x: FiniteFieldElement) -> FiniteFieldElement:
        return x * x * x + self.a * x + self.b

    def point(self, x: Any, y: Any) -> 'CurvePoint':
        """
        Raises:
            ValidationError: If (x, y) is not on the curve.
        """
        x, y = self.field(x), self.field(y)
        if y * y != self.rhs(x):
            raise ValidationError(f"({x!r}, {y!r}) is not on the curve")
        return CurvePoint(self, x, y)

    def random_point(self, rng: SplitMix64) -> 'CurvePoint':
        while True:
            x = self.field.random(rng)
            y = self.field.sqrt(self.rhs(x))
            if y is None:
                continue
            return CurvePoint(self, x, -y if rng.random() < 0.5 else y)

    def base_coefficients(self) -> Tuple[int, int]:
        """(a, b) as integers, when the curve is defined over the prime field."""
        for c in (self.a, self.b):
            if any(c.coeffs[1:]):
                raise ValidationError("curve is not defined over the prime field")
        return self.a.coeffs[0], self.b.coeffs[0]

    def count_points(self) -> int:
        """#E(F_{ℓ^m}) from the Frobenius trace over F_ℓ."""
        a, b = self.base_coefficients()
        return count_points(self.field.ell, a, b, self.field.degree)


def frobenius_trace(ell: int, a: int, b: int) -> int:
    """ℓ + 1 - #E(F_ℓ), by summing Legendre symbols."""
    total = 0
    for x in range(ell):
        v = (x * x * x + a * x + b) % ell
        if v:
            total += 1 if pow(v, (ell - 1) // 2, ell) == 1 else -1
    return -total


def count_points(ell: int, a: int, b: int, degree: int) -> int:
    """#E(F_{ℓ^degree}) via s_m = t·s_{m-1} - ℓ·s_{m-2}."""
    t = frobenius_trace(ell, a, b)
    s_prev, s = 2, t
    for _ in range(degree - 1):
        s_prev, s = s, t * s - ell * s_prev
    return ell ** degree + 1 - s


@dataclass(frozen=True)
class CurvePoint:
    """Affine point, or the point at infinity when x and y are None."""

    curve: EllipticCurve
    x: Optional[FiniteFieldElement]
    y: Optional[FiniteFieldElement]

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __neg__(self) -> 'CurvePoint':
        if self.is_infinity:
            return self
        return CurvePoint(self.curve, self.x, -self.y)

    def __add__(self, other: 'CurvePoint') -> 'CurvePoint':
        if self.is_infinity:
            return other
        if other.is_infinity:
            return self
        if self.x == other.x and (self.y + other.y).is_zero():
            return self.curve.infinity
        slope = _slope(self, other)
        x3 = slope * slope - self.x - other.x
        y3 = slope * (self.x - x3) - self.y
        return CurvePoint(self.curve, x3, y3)

    def __sub__(self, other: 'CurvePoint') -> 'CurvePoint':
        return self + (-other)

    def __mul__(self, k: int) -> 'CurvePoint':
        if k < 0:
            return (-self) * (-k)
        result, base = self.curve.infinity, self
        while k:
            if k & 1:
                result = result + base
            k >>= 1
            if k:
                base = base + base
        return result

    __rmul__ = __mul__

    def frobenius(self) -> 'CurvePoint':
        if self.is_infinity:
            return self
        return CurvePoint(self.curve, self.x.frobenius(), self.y.frobenius())

    def order(self, multiple: int) -> int:
        """Exact order, given a multiple of it."""
        if not (self * multiple).is_infinity:
            raise ValidationError(f"{multiple} does not kill the point")
        for q in _prime_factors(multiple):
            while multiple % q == 0 and (self * (multiple // q)).is_infinity:
                multiple //= q
        return multiple

    def __repr__(self) -> str:
        return "O" if self.is_infinity else f"({self.x!r}, {self.y!r})"


def _slope(A: CurvePoint, B: CurvePoint) -> FiniteFieldElement:
    if A.x == B.x:
        return (A.x * A.x * 3 + A.curve.a) / (A.y * 2)
    return (B.y - A.y) / (B.x - A.x)


# ----------------------------------------------------------------------
# Miller's algorithm
# ----------------------------------------------------------------------

def _line_ratio(A: CurvePoint, B: CurvePoint, R: CurvePoint) -> FiniteFieldElement:
    """Value at R of the line through A, B divided by the vertical through A + B."""
    one = R.curve.field.one
    if A.is_infinity or B.is_infinity:
        return one
    if A.x == B.x and (A.y + B.y).is_zero():
        value = R.x - A.x
    else:
        slope = _slope(A, B)
        C = A + B
        den = R.x - C.x
        if den.is_zero():
            raise DegenerateDivisorError("evaluation point lies on a vertical line of the divisor")
        value = (R.y - A.y - slope * (R.x - A.x)) / den
    if value.is_zero():
        raise DegenerateDivisorError("evaluation point lies on a line of the divisor")
    return value


def miller_function(P: CurvePoint, n: int, R: CurvePoint) -> FiniteFieldElement:
    """f_{n,P}(R) where div f_{n,P} = n[P] - [nP] - (n-1)[O]."""
    if R.is_infinity:
        raise DegenerateDivisorError("cannot evaluate a Miller function at infinity")
    T, f = P, R.curve.field.one
    for bit in bin(n)[3:]:
        f = f * f * _line_ratio(T, T, R)
        T = T + T
        if bit == '1':
            f = f * _line_ratio(T, P, R)
            T = T + P
    return f


def miller_pairing(P: CurvePoint, Q: CurvePoint, N: int, rng: Optional[SplitMix64] = None,
                   attempts: int = 16) -> FiniteFieldElement:
    """
    Weil pairing e_N(P, Q) = [f_P(Q+S)/f_P(S)] / [f_Q(P-S)/f_Q(-S)] for a random S.

    Raises:
        ValidationError: If N is divisible by the characteristic or does not kill P and Q.
        DegenerateDivisorError: If every auxiliary point hits the divisor support.
    """
    curve = P.curve
    if N % curve.field.ell == 0:
        raise ValidationError(f"N = {N} must be prime to the characteristic")
    if not (P * N).is_infinity or not (Q * N).is_infinity:
        raise ValidationError(f"pairing arguments must be {N}-torsion")
    if P.is_infinity or Q.is_infinity:
        return curve.field.one
    rng = rng or SplitMix64(N)
    for _ in range(attempts):
        S = curve.random_point(rng)
        try:
            left = miller_function(P, N, Q + S) / miller_function(P, N, S)
            right = miller_function(Q, N, P - S) / miller_function(Q, N, -S)
        except DegenerateDivisorError:
            logging.debug("Miller evaluation hit the divisor support, retrying")
            continue
        return left / right
    raise DegenerateDivisorError(f"no usable auxiliary point after {attempts} attempts")


# ----------------------------------------------------------------------
# CM endomorphisms of y^2 = x^3 + a x
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CMEndomorphism:
    """
    a + b·ι on y^2 = x^3 + Ax, with ι(x, y) = (-x, i·y) and i^2 = -1.
    """

    curve: EllipticCurve
    i: FiniteFieldElement
    a: int
    b: int = 0

    @classmethod
    def on(cls, curve: EllipticCurve, a: int, b: int = 0) -> 'CMEndomorphism':
        """
        Raises:
            ValidationError: If the curve has b != 0 or -1 is not a square.
        """
        if not curve.b.is_zero():
            raise ValidationError("ι needs a curve of the form y^2 = x^3 + Ax")
        i = curve.field.sqrt(-curve.field.one)
        if i is None:
            raise ValidationError("the field does not contain a square root of -1")
        return cls(curve, i, a, b)

    @property
    def norm(self) -> int:
        return self.a * self.a + self.b * self.b

    def iota(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return P
        return CurvePoint(self.curve, -P.x, self.i * P.y)

    def __call__(self, P: CurvePoint) -> CurvePoint:
        return P * self.a + self.iota(P) * self.b

    def dual(self) -> 'CMEndomorphism':
        return CMEndomorphism(self.curve, self.i, self.a, -self.b)

    def check_iota_square(self, points: Sequence[CurvePoint]) -> Certificate:
        ok = all(self.iota(self.iota(P)) == -P for P in points)
        return Certificate("iota^2 = [-1]", ok, details={"points": len(points)})

    def check_norm(self, points: Sequence[CurvePoint]) -> Certificate:
        """φ̂∘φ = [a^2 + b^2] on the given points."""
        dual = self.dual()
        ok = all(dual(self(P)) == P * self.norm for P in points)
        return Certificate("dual composition is the norm", ok, details={"norm": self.norm, "points": len(points)})


# ----------------------------------------------------------------------
# Torsion discovery
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TorsionSetup:
    """A curve with full rational N-torsion and a basis (P, Q) of E[N]."""

    curve: EllipticCurve
    N: int
    P: CurvePoint
    Q: CurvePoint

    def points(self) -> List[CurvePoint]:
        """All of E[N], as iP + jQ."""
        out = []
        row = self.curve.infinity
        for _ in range(self.N):
            point = row
            for _ in range(self.N):
                out.append(point)
                point = point + self.Q
            row = row + self.P
        return out

    def subgroup(self, divisor: int) -> List[CurvePoint]:
        """E[N / divisor], the image of E[N] under [divisor]."""
        seen, out = set(), []
        for R in self.points():
            S = R * divisor
            if S not in seen:
                seen.add(S)
                out.append(S)
        return out

    def pairing(self, P: CurvePoint, Q: CurvePoint, N: Optional[int] = None) -> FiniteFieldElement:
        return miller_pairing(P, Q, self.N if N is None else N)


def _torsion_part(R: CurvePoint, group_order: int, N: int) -> CurvePoint:
    """Project R into E[N]: kill the prime-to-N part, then reduce the order to divide N."""
    primes = _prime_factors(N)
    cofactor = group_order
    for q in primes:
        while cofactor % q == 0:
            cofactor //= q
    R = R * cofactor
    order = R.order(group_order // cofactor)
    g = _gcd(order, N)
    return R * (order // g)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def find_torsion_basis(curve: EllipticCurve, N: int, rng: SplitMix64, attempts: int = 64) -> Optional[Tuple[CurvePoint, CurvePoint]]:
    """
    A basis of E[N], certified by e_N(P, Q) having exact order N; None if the
    attempts run out (E[N] is then most likely not rational).
    """
    group_order = curve.count_points()
    if group_order % (N * N):
        return None
    P = None
    for _ in range(attempts):
        R = _torsion_part(curve.random_point(rng), group_order, N)
        if R.order(N) == N:
            P = R
            break
    if P is None:
        return None
    for _ in range(attempts):
        Q = _torsion_part(curve.random_point(rng), group_order, N)
        if Q.is_infinity:
            continue
        if root_of_unity_order(miller_pairing(P, Q, N), N) == N:
            return P, Q
    return None


def minimal_torsion_degree(ell: int, a: int, b: int, N: int, max_degree: int = 12) -> Optional[int]:
    """Smallest m with q = ℓ^m ≡ 1 mod N and N^2 | #E(F_q), the necessary conditions for E[N] ⊂ E(F_q)."""
    for m in range(1, max_degree + 1):
        q = ell ** m
        if (q - 1) % N == 0 and count_points(ell, a, b, m) % (N * N) == 0:
            return m
    return None


def find_torsion_field(N: int, a: int = -1, b: int = 0, rng: Optional[SplitMix64] = None,
                       max_degree: int = 2, max_size: int = DEFAULT_MAX_SIZE,
                       need_i: bool = True) -> TorsionSetup:
    """
    Brute-force search over ℓ ascending and degrees 1..max_degree for the
    smallest field of size at most max_size with full rational N-torsion
    on y^2 = x^3 + ax + b (and i = sqrt(-1) when need_i).

    Raises:
        ValidationError: If nothing is found within the bounds.
    """
    rng = rng or SplitMix64(N)
    ell = 4
    while ell <= max_size:
        ell += 1
        if not is_prime(ell) or N % ell == 0:
            continue
        if (4 * a ** 3 + 27 * b * b) % ell == 0:
            continue
        for m in range(1, max_degree + 1):
            q = ell ** m
            if q > max_size:
                break
            if (q - 1) % N or (need_i and q % 4 != 1):
                continue
            if count_points(ell, a, b, m) % (N * N):
                continue
            curve = EllipticCurve.over(FiniteField.build(ell, m), a, b)
            basis = find_torsion_basis(curve, N, rng)
            if basis is not None:
                logging.info(f"Found full {N}-torsion over F_{ell}^{m}")
                return TorsionSetup(curve, N, *basis)
    raise ValidationError(f"no field of size <= {max_size} with full {N}-torsion")


# ----------------------------------------------------------------------
# Fixtures
# ----------------------------------------------------------------------

def _encode_element(x: FiniteFieldElement) -> str:
    return ":".join(str(c) for c in x.coeffs)


def _encode_point(P: CurvePoint) -> str:
    return f"{_encode_element(P.x)};{_encode_element(P.y)}"


def _decode_point(curve: EllipticCurve, text: str) -> CurvePoint:
    x, y = text.split(";")
    return curve.point([int(c) for c in x.split(":")], [int(c) for c in y.split(":")])


def save_fixture(path: Union[str, Path], setup: TorsionSetup, max_degree: int, max_size: int) -> None:
    """Record the field, curve, basis and search bounds as key=value lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.touch(exist_ok=True)
    a, b = setup.curve.base_coefficients()
    prefix = f"WEIL_N{setup.N}_"
    values = {
        "ELL": str(setup.curve.field.ell),
        "MODULUS": ",".join(str(c) for c in setup.curve.field.modulus),
        "CURVE": f"{a},{b}",
        "P": _encode_point(setup.P),
        "Q": _encode_point(setup.Q),
        "SEARCH": f"max_degree={max_degree};max_size={max_size}",
    }
    for key, value in values.items():
        set_key(str(path), prefix + key, value, quote_mode="never")


def load_fixture(path: Union[str, Path], N: int) -> Optional[TorsionSetup]:
    """
    Raises:
        ValidationError: If the recorded data no longer describes an N-torsion basis.
    """
    path = Path(path)
    if not path.exists():
        return None
    values = dotenv_values(path)
    prefix = f"WEIL_N{N}_"
    if not values.get(prefix + "ELL"):
        return None
    ell = int(values[prefix + "ELL"])
    modulus = tuple(int(c) for c in values[prefix + "MODULUS"].split(","))
    a, b = (int(c) for c in values[prefix + "CURVE"].split(","))
    curve = EllipticCurve.over(FiniteField(ell, modulus), a, b)
    P = _decode_point(curve, values[prefix + "P"])
    Q = _decode_point(curve, values[prefix + "Q"])
    if not (P * N).is_infinity or not (Q * N).is_infinity:
        raise ValidationError(f"fixture basis for N = {N} is not {N}-torsion")
    return TorsionSetup(curve, N, P, Q)


def torsion_setup(N: int, fixture_path: Optional[Union[str, Path]] = None, rng: Optional[SplitMix64] = None,
                  a: int = -1, b: int = 0, max_degree: int = 2, max_size: int = DEFAULT_MAX_SIZE) -> TorsionSetup:
    """Load a cached setup for N, or search for one and cache it."""
    if fixture_path is not None:
        cached = load_fixture(fixture_path, N)
        if cached is not None:
            return cached
    setup = find_torsion_field(N, a, b, rng, max_degree, max_size)
    if fixture_path is not None:
        save_fixture(fixture_path, setup, max_degree, max_size)
    return setup


# ----------------------------------------------------------------------
# Certificates
# ----------------------------------------------------------------------

def check_alternation(setup: TorsionSetup) -> Certificate:
    """e(P, P) = 1 over all of E[N], and e(P, Q)·e(Q, P) = 1 on the basis."""
    failures = sum(1 for R in setup.points() if setup.pairing(R, R) != 1)
    antisymmetric = setup.pairing(setup.P, setup.Q) * setup.pairing(setup.Q, setup.P) == 1
    return Certificate("alternation", failures == 0 and antisymmetric,
                       details={"failures": failures, "antisymmetric": antisymmetric})


def check_bilinearity(setup: TorsionSetup, rng: SplitMix64, trials: int = 20) -> Certificate:
    grid = setup.points()
    failures = 0
    for _ in range(trials):
        P1, P2, Q = rng.choice(grid), rng.choice(grid), rng.choice(grid)
        e = setup.pairing
        if e(P1 + P2, Q) != e(P1, Q) * e(P2, Q) or e(Q, P1 + P2) != e(Q, P1) * e(Q, P2):
            failures += 1
    return Certificate("bilinearity", failures == 0, details={"trials": trials, "failures": failures})


def check_galois_equivariance(setup: TorsionSetup, rng: SplitMix64, trials: int = 20) -> Certificate:
    """e(P, Q)^ℓ = e(P^σ, Q^σ) for the ℓ-power Frobenius σ."""
    grid = setup.points()
    failures = 0
    for _ in range(trials):
        P, Q = rng.choice(grid), rng.choice(grid)
        if setup.pairing(P, Q).frobenius() != setup.pairing(P.frobenius(), Q.frobenius()):
            failures += 1
    return Certificate("galois equivariance", failures == 0, details={"trials": trials, "failures": failures})


def check_nondegeneracy(setup: TorsionSetup) -> Certificate:
    """e_N(P, Q) has exact order N, and no nonzero point pairs trivially with both basis points."""
    order = root_of_unity_order(setup.pairing(setup.P, setup.Q), setup.N)
    degenerate = 0
    for R in setup.points():
        if R.is_infinity:
            continue
        if setup.pairing(R, setup.P) == 1 and setup.pairing(R, setup.Q) == 1:
            degenerate += 1
    return Certificate("non-degeneracy", order == setup.N and degenerate == 0,
                       details={"order": order, "degenerate": degenerate})


def cm_adjointness(setup: TorsionSetup, phi: CMEndomorphism,
                   pairs: Optional[Sequence[Tuple[CurvePoint, CurvePoint]]] = None) -> Certificate:
    """e_N(φP, Q) = e_N(P, φ̂Q) over a grid of torsion pairs (all of E[N]^2 by default)."""
    if pairs is None:
        grid = setup.points()
        pairs = [(P, Q) for P in grid for Q in grid]
    dual = phi.dual()
    failures = sum(1 for P, Q in pairs if setup.pairing(phi(P), Q) != setup.pairing(P, dual(Q)))
    return Certificate("cm adjointness", failures == 0, details={
        "a": phi.a, "b": phi.b, "pairs": len(pairs), "failures": failures,
        "printed": PRINTED_ADJOINTNESS, "checked": CHECKED_ADJOINTNESS,
    })


def _integer_root(n: int, k: int) -> int:
    r = round(n ** (1.0 / k))
    for c in (r - 1, r, r + 1):
        if c > 1 and c ** k == n:
            return c
    raise ValidationError(f"{n} is not a perfect {k}-th power")


def level_compatibility(setup: TorsionSetup, pi_star: CMEndomorphism, n: int) -> Certificate:
    """
    e_{p^(n+1)}(P, Q) = e_{p^n}(P, π*Q) for P in E[p^n] and Q in E[p^(n+1)].

    setup.N must be p^(n+1). A pair whose π*Q is not p^n-torsion counts as a
    failure, since the right side is then undefined.
    """
    p = _integer_root(setup.N, n + 1)
    small = p ** n
    lower = setup.subgroup(p)
    upper = setup.points()
    failures = outside = 0
    for Q in upper:
        image = pi_star(Q)
        if not (image * small).is_infinity:
            outside += len(lower)
            continue
        for P in lower:
            if setup.pairing(P, Q) != miller_pairing(P, image, small):
                failures += 1
    passed = failures == 0 and outside == 0
    return Certificate("level compatibility", passed, details={
        "p": p, "n": n, "a": pi_star.a, "b": pi_star.b,
        "pairs": len(lower) * len(upper), "failures": failures, "outside": outside,
    })


def require_full_torsion(curve: EllipticCurve, N: int, rng: SplitMix64) -> Tuple[CurvePoint, CurvePoint]:
    """
    Raises:
        ValidationError: If E[N] is not rational over the curve's field; the
            message names the minimal extension degree where it could be.
    """
    basis = find_torsion_basis(curve, N, rng)
    if basis is None:
        a, b = curve.base_coefficients()
        m = minimal_torsion_degree(curve.field.ell, a, b, N)
        raise ValidationError(f"E[{N}] is not rational over F_{curve.field.order}; minimal degree found: {m}")
    return basis
