########################
# Local Field Towers   #
########################

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import itertools
import logging
from typing import Any, Callable, List, Optional, Sequence, Tuple, Union

from app.exceptions import PrecisionError, ValidationError
from app.padic import INFINITY, PAdicRing, floor_log, int_valuation

UNRAMIFIED = 'unramified'
EISENSTEIN = 'eisenstein'


def normalized_valuation(x: Any) -> Union[Fraction, float]:
    """Valuation with v(p) = 1 for PAdicInts and ExtElements alike."""
    v = x.valuation()
    return v if v == INFINITY else Fraction(v)


def ramification_index(ring: Any) -> int:
    return ring.ramification_index if isinstance(ring, ExtRing) else 1


def residue_degree(ring: Any) -> int:
    return ring.residue_degree if isinstance(ring, ExtRing) else 1


def _poly_rem_mod_p(a: List[int], b: List[int], p: int) -> List[int]:
    """Remainder of a by the monic b over F_p (coefficients low to high)."""
    a = [c % p for c in a]
    db = len(b) - 1
    while len(a) - 1 >= db:
        top = a[-1]
        if top:
            shift = len(a) - 1 - db
            for i, c in enumerate(b):
                a[shift + i] = (a[shift + i] - top * c) % p
        a.pop()
    return a


def is_irreducible_mod_p(coeffs: Sequence[int], p: int) -> bool:
    """
    Brute-force irreducibility test for a monic polynomial over F_p.

    Tries every monic divisor of degree up to half the degree, which is fine
    for the small degrees used here.
    """
    poly = [int(c) % p for c in coeffs]
    d = len(poly) - 1
    if d <= 0 or poly[-1] != 1:
        return False
    for k in range(1, d // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            if not any(_poly_rem_mod_p(poly, list(low) + [1], p)):
                return False
    return True


def find_irreducible_mod_p(p: int, degree: int) -> List[int]:
    """Lexicographically first monic irreducible polynomial of the given degree."""
    for low in itertools.product(range(p), repeat=degree):
        candidate = list(reversed(low)) + [1]
        if is_irreducible_mod_p(candidate, p):
            return candidate
    raise ValidationError(f"no irreducible polynomial of degree {degree} mod {p}")


class ExtRing:
    """
    Quotient ring base[t] / (g(t)) for a monic g, presenting the ring of
    integers of a finite extension relative to its coefficient ring.

    The coefficient ring is either a PAdicRing or another ExtRing, so towers
    are built as nested relative presentations. Rings compare by identity.

    Args:
        base: Coefficient ring descriptor.
        modulus: Coefficients of g, low degree first; g must be monic.
        kind: UNRAMIFIED or EISENSTEIN.
        name: Optional label used in reprs and reports.

    Raises:
        ValidationError: If g is not monic, not Eisenstein for EISENSTEIN rings,
            or not irreducible mod p for UNRAMIFIED rings.
    """

    def __init__(self, base: Any, modulus: Sequence[Any], kind: str, name: Optional[str] = None) -> None:
        if kind not in (UNRAMIFIED, EISENSTEIN):
            raise ValidationError(f"unknown extension kind {kind!r}")
        self.base = base
        self.modulus: Tuple[Any, ...] = tuple(base(c) for c in modulus)
        self.degree = len(self.modulus) - 1
        self.kind = kind
        self.name = name or f"{kind}[{self.degree}]"
        if self.degree < 1:
            raise ValidationError("defining polynomial must have degree at least 1")
        if self.modulus[-1] != base.one:
            raise ValidationError("defining polynomial must be monic")
        e_base = ramification_index(base)
        if kind == EISENSTEIN:
            self.ramification_index = e_base * self.degree
            self.residue_degree = residue_degree(base)
            self._check_eisenstein(e_base)
        else:
            self.ramification_index = e_base
            self.residue_degree = residue_degree(base) * self.degree
            self._check_unramified()
        self._frobenius_image: Optional[ExtElement] = None
        if kind == UNRAMIFIED:
            self._frobenius_image = self._lift_frobenius()

    # ------------------------------------------------------------------
    # Construction checks
    # ------------------------------------------------------------------

    def _check_eisenstein(self, e_base: int) -> None:
        const = normalized_valuation(self.modulus[0])
        if const != Fraction(1, e_base):
            raise ValidationError(
                f"{self.name}: constant term has valuation {const}, expected {Fraction(1, e_base)}"
            )
        for i, c in enumerate(self.modulus[1:-1], start=1):
            if normalized_valuation(c) <= 0:
                raise ValidationError(f"{self.name}: coefficient {i} is a unit")

    def _check_unramified(self) -> None:
        if not isinstance(self.base, PAdicRing):
            raise ValidationError("unramified extensions are built over Z_p only")
        if not is_irreducible_mod_p([int(c) for c in self.modulus], self.prime):
            raise ValidationError(f"{self.name}: defining polynomial is reducible mod {self.prime}")

    def _lift_frobenius(self) -> 'ExtElement':
        # Newton-lift the root of g congruent to t^p, starting from t^p itself.
        root = self.gen ** self.prime
        for _ in range(self.precision.bit_length() + 2):
            value = self.evaluate_modulus(root)
            if value.is_zero():
                break
            root = root - value * self.evaluate_modulus_derivative(root).inverse()
        return root

    # ------------------------------------------------------------------
    # Descriptor protocol
    # ------------------------------------------------------------------

    @property
    def prime(self) -> int:
        return self.base.prime

    @property
    def precision(self) -> int:
        return self.base.precision

    @property
    def absolute_degree(self) -> int:
        return self.ramification_index * self.residue_degree

    @property
    def zero(self) -> 'ExtElement':
        return ExtElement(self, [self.base.zero] * self.degree)

    @property
    def one(self) -> 'ExtElement':
        return self.constant(self.base.one)

    @property
    def gen(self) -> 'ExtElement':
        """The class of t; for Eisenstein rings, a uniformizer."""
        if self.degree == 1:
            return self.constant(-self.modulus[0])
        coeffs = [self.base.zero] * self.degree
        coeffs[1] = self.base.one
        return ExtElement(self, coeffs)

    def constant(self, value: Any) -> 'ExtElement':
        coeffs = [self.base.zero] * self.degree
        coeffs[0] = self.base(value)
        return ExtElement(self, coeffs)

    def is_over(self, ring: Any) -> bool:
        """True if ring occurs somewhere below self in the tower."""
        current = self.base
        while True:
            if current is ring or (isinstance(ring, PAdicRing) and isinstance(current, PAdicRing)):
                return True
            if not isinstance(current, ExtRing):
                return False
            current = current.base

    def __call__(self, value: Any) -> 'ExtElement':
        if isinstance(value, ExtElement):
            if value.ring is self:
                return value
            if not self.is_over(value.ring):
                raise ValidationError(f"cannot embed an element of {value.ring.name} into {self.name}")
        return self.constant(value)

    embed = __call__

    def from_coefficients(self, coeffs: Sequence[Any]) -> 'ExtElement':
        coeffs = [self.base(c) for c in coeffs]
        if len(coeffs) > self.degree:
            raise ValidationError("too many coefficients")
        coeffs += [self.base.zero] * (self.degree - len(coeffs))
        return ExtElement(self, coeffs)

    def random(self, rng) -> 'ExtElement':
        return ExtElement(self, [self.base.random(rng) for _ in range(self.degree)])

    def random_unit(self, rng) -> 'ExtElement':
        while True:
            x = self.random(rng)
            if x.is_unit():
                return x

    def tower(self) -> List[Any]:
        """Rings from Z_p up to self."""
        chain = [self]
        while isinstance(chain[-1], ExtRing):
            chain.append(chain[-1].base)
        return list(reversed(chain))

    def evaluate_modulus(self, x: 'ExtElement') -> 'ExtElement':
        acc = self.zero
        for c in reversed(self.modulus):
            acc = acc * x + c
        return acc

    def evaluate_modulus_derivative(self, x: 'ExtElement') -> 'ExtElement':
        acc = self.zero
        for i in range(self.degree, 0, -1):
            acc = acc * x + self.modulus[i] * i
        return acc

    def hom(self, gen_image: Any, base_map: Optional[Callable[[Any], Any]] = None) -> Callable[['ExtElement'], Any]:
        """
        Ring homomorphism out of self sending t to gen_image.

        Coefficients are sent through base_map first (identity by default), so
        automorphisms of a whole tower are assembled level by level.
        """
        def apply(x: 'ExtElement') -> Any:
            x = self(x)
            acc = None
            for c in reversed(x.coeffs):
                image = base_map(c) if base_map is not None else c
                acc = image if acc is None else acc * gen_image + image
            return acc
        return apply

    def __repr__(self) -> str:
        return f"ExtRing({self.name} over {self.base!r})"


class ExtElement:
    """
    Element of an ExtRing: a coefficient vector over the base ring in the
    power basis 1, t, ..., t^(d-1). Immutable.
    """

    __slots__ = ('ring', 'coeffs')

    def __init__(self, ring: ExtRing, coeffs: Sequence[Any]) -> None:
        if len(coeffs) != ring.degree:
            raise ValidationError("coefficient vector length must equal the degree")
        object.__setattr__(self, 'ring', ring)
        object.__setattr__(self, 'coeffs', tuple(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("ExtElement is immutable")

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _coerce(self, other: Any) -> Optional['ExtElement']:
        if isinstance(other, ExtElement) and other.ring is self.ring:
            return other
        try:
            return self.ring(other)
        except ValidationError:
            return None

    def __add__(self, other: Any) -> 'ExtElement':
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return ExtElement(self.ring, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> 'ExtElement':
        return ExtElement(self.ring, [-a for a in self.coeffs])

    def __sub__(self, other: Any) -> 'ExtElement':
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return ExtElement(self.ring, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other: Any) -> 'ExtElement':
        return (-self) + other

    def __mul__(self, other: Any) -> 'ExtElement':
        if isinstance(other, ExtElement) and other.ring is self.ring:
            return ExtElement(self.ring, _mul_reduce(self.ring, self.coeffs, other.coeffs))
        if isinstance(other, ExtElement) and not self.ring.is_over(other.ring):
            return NotImplemented
        try:
            scalar = self.ring.base(other)
        except ValidationError:
            return NotImplemented
        return ExtElement(self.ring, [a * scalar for a in self.coeffs])

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> 'ExtElement':
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.ring.one
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other: Any) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).is_zero()

    def __ne__(self, other: Any) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __repr__(self) -> str:
        return f"ExtElement({self.ring.name}: {list(self.coeffs)!r})"

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @property
    def precision(self) -> int:
        return min(c.precision for c in self.coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def is_unit(self) -> bool:
        if self.ring.kind == EISENSTEIN:
            return self.coeffs[0].is_unit()
        return any(c.is_unit() for c in self.coeffs)

    def valuation(self) -> Union[Fraction, float]:
        """Normalized valuation, v(p) = 1; INFINITY if zero to precision."""
        step = Fraction(1, self.ring.ramification_index) if self.ring.kind == EISENSTEIN else 0
        best: Union[Fraction, float] = INFINITY
        for i, c in enumerate(self.coeffs):
            v = normalized_valuation(c)
            if v != INFINITY:
                best = min(best, v + i * step)
        return best

    def with_precision(self, precision: int) -> 'ExtElement':
        return ExtElement(self.ring, [c.with_precision(precision) for c in self.coeffs])

    def divide_by_p_power(self, e: int) -> 'ExtElement':
        """Exact division by p^e, coefficient by coefficient."""
        return ExtElement(self.ring, [c.divide_by_p_power(e) for c in self.coeffs])

    # ------------------------------------------------------------------
    # Linear algebra over the base
    # ------------------------------------------------------------------

    def multiplication_matrix(self) -> List[List[Any]]:
        """M[i][j] = coefficient i of self * t^j."""
        columns = []
        v = list(self.coeffs)
        for _ in range(self.ring.degree):
            columns.append(v)
            v = _times_gen(self.ring, v)
        d = self.ring.degree
        return [[columns[j][i] for j in range(d)] for i in range(d)]

    def trace(self) -> Any:
        """Trace to the coefficient ring: trace of multiplication-by-self."""
        matrix = self.multiplication_matrix()
        acc = self.ring.base.zero
        for i in range(self.ring.degree):
            acc = acc + matrix[i][i]
        return acc

    def charpoly(self) -> List[Any]:
        """Characteristic polynomial over the base, highest degree first."""
        return _berkowitz(self.multiplication_matrix(), self.ring.base.zero, self.ring.base.one)

    def norm(self) -> Any:
        """Norm to the coefficient ring: determinant of multiplication-by-self."""
        poly = self.charpoly()
        d = self.ring.degree
        return poly[d] if d % 2 == 0 else -poly[d]

    def trace_to(self, ring: Any = None) -> Any:
        """Iterated trace down to `ring` (Z_p when omitted)."""
        x: Any = self
        while isinstance(x, ExtElement) and x.ring is not ring:
            x = x.trace()
        return x

    def norm_to(self, ring: Any = None) -> Any:
        x: Any = self
        while isinstance(x, ExtElement) and x.ring is not ring:
            x = x.norm()
        return x

    def inverse(self) -> 'ExtElement':
        """
        Solve self * y = 1 by elimination with unit pivots.

        Raises:
            ValidationError: If self is not a unit.
            PrecisionError: If no unit pivot survives the elimination.
        """
        if not self.is_unit():
            raise ValidationError(f"{self!r} is not a unit")
        base = self.ring.base
        d = self.ring.degree
        matrix = self.multiplication_matrix()
        rhs = [base.one] + [base.zero] * (d - 1)
        rows = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
        for col in range(d):
            pivot = next((r for r in range(col, d) if rows[r][col].is_unit()), None)
            if pivot is None:
                raise PrecisionError("no unit pivot while inverting; precision exhausted")
            rows[col], rows[pivot] = rows[pivot], rows[col]
            inv = rows[col][col].inverse()
            rows[col] = [x * inv for x in rows[col]]
            for r in range(d):
                if r != col and not rows[r][col].is_zero():
                    factor = rows[r][col]
                    rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
        return ExtElement(self.ring, [rows[i][d] for i in range(d)])

    def frobenius(self) -> 'ExtElement':
        """
        Arithmetic Frobenius of an unramified ring over Z_p.

        Raises:
            ValidationError: If the parent ring is not unramified.
        """
        if self.ring.kind != UNRAMIFIED:
            raise ValidationError("Frobenius is defined on unramified rings only")
        return self.ring.hom(self.ring._frobenius_image)(self)


def _times_gen(ring: ExtRing, coeffs: Sequence[Any]) -> List[Any]:
    d = ring.degree
    top = coeffs[-1]
    shifted = [ring.base.zero] + list(coeffs[:-1])
    if top.is_zero():
        return shifted
    return [shifted[i] - top * ring.modulus[i] for i in range(d)]


def _mul_reduce(ring: ExtRing, a: Sequence[Any], b: Sequence[Any]) -> List[Any]:
    d = ring.degree
    zero = ring.base.zero
    product = [zero] * (2 * d - 1)
    nonzero_b = [(j, y) for j, y in enumerate(b) if not y.is_zero()]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in nonzero_b:
            product[i + j] = product[i + j] + x * y
    for k in range(2 * d - 2, d - 1, -1):
        top = product[k]
        if top.is_zero():
            continue
        for i in range(d):
            product[k - d + i] = product[k - d + i] - top * ring.modulus[i]
    return product[:d]


def _berkowitz(matrix: List[List[Any]], zero: Any, one: Any) -> List[Any]:
    """
    Division-free characteristic polynomial (Samuelson-Berkowitz), built up
    one leading principal block at a time. Returns [1, c_1, ..., c_n].
    """
    n = len(matrix)
    poly = [one]
    for k in range(n):
        a = matrix[k][k]
        row = matrix[k][:k]
        v = [matrix[i][k] for i in range(k)]
        moments = []
        for _ in range(k):
            acc = zero
            for r, x in zip(row, v):
                acc = acc + r * x
            moments.append(acc)
            v = [_dot(matrix[i][:k], v, zero) for i in range(k)]
        nxt = [one]
        for l in range(1, k + 1):
            nxt.append(poly[l] - a * poly[l - 1])
        nxt.append(-(a * poly[k]))
        for i in range(k):
            acc = zero
            for j in range(i + 1):
                acc = acc + poly[j] * moments[i - j]
            nxt[i + 2] = nxt[i + 2] - acc
        poly = nxt
    return poly


def _dot(row: Sequence[Any], vec: Sequence[Any], zero: Any) -> Any:
    acc = zero
    for r, x in zip(row, vec):
        acc = acc + r * x
    return acc


def unramified_extension(base: PAdicRing, degree: int) -> ExtRing:
    """Z_p[t]/(g) for the first monic irreducible g mod p, lifted verbatim."""
    modulus = find_irreducible_mod_p(base.prime, degree)
    logging.debug(f"unramified degree-{degree} ring over Z_{base.prime} with modulus {modulus}")
    return ExtRing(base, modulus, UNRAMIFIED, name=f"unr{degree}")


@dataclass(frozen=True)
class EisensteinTower:
    """Rings R_1 ⊂ ... ⊂ R_n and the torsion generator classes ŵ_k ∈ R_k."""

    rings: Tuple[ExtRing, ...]
    generators: Tuple[ExtElement, ...]

    @property
    def levels(self) -> int:
        return len(self.rings)


def eisenstein_from_torsion(law: Any, n: int, base: Optional[PAdicRing] = None) -> EisensteinTower:
    """
    Build the chain of Eisenstein rings carrying the torsion generators of a
    Lubin-Tate law with Frobenius polynomial f.

    Level 1 is defined by f(Z)/Z over Z_p and level k + 1 by f(Z) - ŵ_k over
    level k. The Frobenius series must be an exact polynomial of degree p.

    Args:
        law: A FormalGroupLaw (its `frobenius` is used) or the series f itself.
        n: Number of levels, at least 1.
        base: Coefficient ring; defaults to f's coefficient ring.

    Raises:
        ValidationError: If n < 1, f is not a degree-p polynomial, or some
            level fails the Eisenstein criterion.
    """
    f = getattr(law, 'frobenius', law)
    if n < 1:
        raise ValidationError("tower level must be at least 1")
    base = base or f.ring
    p = base.prime
    if not f.exact or f.degree() != p:
        raise ValidationError("torsion towers need an exact Frobenius polynomial of degree p")
    coeffs = [base(c) for c in f.coefficients()[:p + 1]]
    lead_inv = coeffs[p].inverse()
    coeffs = [c * lead_inv for c in coeffs]
    rings: List[ExtRing] = []
    gens: List[ExtElement] = []
    level1 = ExtRing(base, coeffs[1:], EISENSTEIN, name="level1")
    rings.append(level1)
    gens.append(level1.gen)
    for k in range(2, n + 1):
        below = rings[-1]
        modulus = [below(c) for c in coeffs]
        modulus[0] = modulus[0] - gens[-1] * lead_inv
        ring = ExtRing(below, modulus, EISENSTEIN, name=f"level{k}")
        rings.append(ring)
        gens.append(ring.gen)
    logging.debug(f"built torsion tower over Z_{p} with {n} level(s)")
    return EisensteinTower(tuple(rings), tuple(gens))


@dataclass(frozen=True)
class ExtFraction:
    """numerator / p^shift for numerators in an ExtRing (values off the integers)."""

    numerator: ExtElement
    shift: int = 0

    @property
    def ring(self) -> ExtRing:
        return self.numerator.ring

    def _aligned(self, other: 'ExtFraction') -> Tuple[ExtElement, ExtElement, int]:
        p = self.ring.prime
        shift = max(self.shift, other.shift)
        a = self.numerator * p ** (shift - self.shift)
        b = self.ring(other.numerator) * p ** (shift - other.shift)
        return a, b, shift

    def __add__(self, other: 'ExtFraction') -> 'ExtFraction':
        a, b, shift = self._aligned(other)
        return ExtFraction(a + b, shift)

    def __sub__(self, other: 'ExtFraction') -> 'ExtFraction':
        a, b, shift = self._aligned(other)
        return ExtFraction(a - b, shift)

    def __neg__(self) -> 'ExtFraction':
        return ExtFraction(-self.numerator, self.shift)

    def scale(self, factor: Any) -> 'ExtFraction':
        return ExtFraction(self.numerator * factor, self.shift)

    def embed(self, ring: ExtRing) -> 'ExtFraction':
        return ExtFraction(ring(self.numerator), self.shift)

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def valuation(self) -> Union[Fraction, float]:
        v = self.numerator.valuation()
        return v if v == INFINITY else v - self.shift

    @property
    def absolute_precision(self) -> int:
        return self.numerator.precision - self.shift


def log_principal(x: ExtElement, max_raise: int = 64) -> ExtFraction:
    """
    p-adic logarithm of a principal unit of an ExtRing.

    x is raised to p^j until x^(p^j) - 1 has valuation at least 1; there the
    series converges with integral terms, and log x = log(x^(p^j)) / p^j.

    Raises:
        ValidationError: If x is not a principal unit.
        PrecisionError: If precision runs out before the series settles.
    """
    ring = x.ring
    p = ring.prime
    y = x - 1
    if normalized_valuation(y) <= 0:
        raise ValidationError("logarithm needs a principal unit")
    j = 0
    while normalized_valuation(y) < 1:
        x = x ** p
        y = x - 1
        j += 1
        if j > max_raise:
            raise PrecisionError("principal unit did not approach 1")
    v = normalized_valuation(y)
    if v == INFINITY:
        return ExtFraction(ring.zero, 0)
    n = y.precision
    total = ring.zero
    power = ring.one
    k = 1
    while k * v - floor_log(k, p) < n:
        power = power * y
        e = int_valuation(k, p)
        term = power.divide_by_p_power(e) * pow(k // p ** e, -1, p ** n)
        total = total + term if k % 2 else total - term
        k += 1
    return ExtFraction(total, j)
