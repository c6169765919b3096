########################
# Truncated Series     #
########################

from __future__ import annotations

from fractions import Fraction
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from app.exceptions import PrecisionError, ValidationError
from app.padic import INFINITY, PAdicFraction, PAdicInt, PAdicRing, FractionRing

Exponent = Union[int, Tuple[int, int]]


def ring_of(x: Any):
    """Return the ring descriptor an element lives in."""
    if isinstance(x, PAdicInt):
        return PAdicRing(x.prime, x.precision)
    if isinstance(x, PAdicFraction):
        return FractionRing(x.prime, x.numerator.precision)
    ring = getattr(x, 'ring', None)
    if ring is None:
        raise ValidationError(f"{x!r} does not belong to a known ring")
    return ring


def element_valuation(x: Any) -> Union[Fraction, float]:
    """Normalized valuation (v(p) = 1) of a ring element."""
    v = x.valuation()
    return v if v == INFINITY else Fraction(v)


def coefficient_precision(c: Any) -> int:
    """Digits to which a coefficient is known (absolute, for fractions)."""
    if isinstance(c, PAdicFraction):
        return c.absolute_precision
    return c.precision


def tail_precision(cap: int, v: Union[Fraction, float]) -> Union[int, float]:
    """
    Digits certified when a series truncated at `cap` with integral
    coefficients is evaluated at a point of valuation v: the dropped tail has
    valuation at least (cap + 1) * v.
    """
    if v == INFINITY:
        return INFINITY
    return math.floor((cap + 1) * v)


class TruncatedSeries:
    """
    Formal power series in one or two variables, truncated at a degree cap.

    Univariate coefficients are stored densely up to `cap`; bivariate ones in a
    triangular dict keyed by (i, j) with i + j <= cap. A series flagged `exact`
    is a polynomial: every coefficient past its stored degree is known to vanish,
    so it can be padded to any cap and evaluated without a tail bound.
    """

    def __init__(
        self,
        ring: Any,
        coeffs: Union[Sequence[Any], Dict[Tuple[int, int], Any]],
        cap: int,
        nvars: int = 1,
        exact: bool = False,
    ) -> None:
        if nvars not in (1, 2):
            raise ValidationError("only one or two variables are supported")
        if cap < 0:
            raise ValidationError("degree cap must be non-negative")
        self.ring = ring
        self.cap = cap
        self.nvars = nvars
        self.exact = exact
        zero = ring.zero
        if nvars == 1:
            values = [ring(c) for c in list(coeffs)[:cap + 1]]
            if exact and any(not ring(c).is_zero() for c in list(coeffs)[cap + 1:]):
                raise ValidationError("exact series exceeds its cap")
            values += [zero] * (cap + 1 - len(values))
            self._coeffs: Any = tuple(values)
        else:
            table = {}
            for i in range(cap + 1):
                for j in range(cap + 1 - i):
                    c = coeffs.get((i, j))
                    table[(i, j)] = zero if c is None else ring(c)
            self._coeffs = table

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def polynomial(cls, ring: Any, coeffs: Sequence[Any], cap: Optional[int] = None) -> 'TruncatedSeries':
        """An exact univariate polynomial (cap defaults to its length)."""
        coeffs = list(coeffs)
        if cap is None:
            cap = max(len(coeffs) - 1, 0)
        return cls(ring, coeffs, cap, exact=True)

    @classmethod
    def bivariate_polynomial(cls, ring: Any, coeffs: Dict[Tuple[int, int], Any], cap: int) -> 'TruncatedSeries':
        return cls(ring, coeffs, cap, nvars=2, exact=True)

    @classmethod
    def constant(cls, ring: Any, value: Any, cap: int, nvars: int = 1) -> 'TruncatedSeries':
        if nvars == 1:
            return cls(ring, [value], cap, exact=True)
        return cls(ring, {(0, 0): value}, cap, nvars=2, exact=True)

    @classmethod
    def variable(cls, ring: Any, cap: int, index: int = 0, nvars: int = 1) -> 'TruncatedSeries':
        """The series Z (univariate), or X / Y (bivariate, index 0 / 1)."""
        if nvars == 1:
            return cls(ring, [0, 1], cap, exact=True)
        key = (1, 0) if index == 0 else (0, 1)
        return cls(ring, {key: 1}, cap, nvars=2, exact=True)

    @classmethod
    def random(cls, ring: Any, cap: int, rng, density: float = 0.5,
               constant: Any = None, valuation: int = 0) -> 'TruncatedSeries':
        """Random sparse univariate series; `constant` pins the constant term."""
        coeffs: List[Any] = []
        for k in range(cap + 1):
            if k < valuation or rng.random() > density:
                coeffs.append(0)
            else:
                coeffs.append(ring.random(rng))
        if constant is not None and valuation == 0:
            coeffs[0] = constant
        return cls(ring, coeffs, cap)

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    def __getitem__(self, key: Exponent) -> Any:
        if self.nvars == 1:
            if key > self.cap:
                if self.exact:
                    return self.ring.zero
                raise PrecisionError(f"coefficient {key} lies beyond cap {self.cap}")
            return self._coeffs[key]
        i, j = key
        if i + j > self.cap:
            if self.exact:
                return self.ring.zero
            raise PrecisionError(f"coefficient {key} lies beyond cap {self.cap}")
        return self._coeffs[key]

    def coefficients(self) -> List[Any]:
        if self.nvars != 1:
            raise ValidationError("coefficients() is for univariate series")
        return list(self._coeffs)

    def items(self) -> Iterable[Tuple[Exponent, Any]]:
        if self.nvars == 1:
            return enumerate(self._coeffs)
        return self._coeffs.items()

    def degree(self) -> int:
        """Highest (total) degree with a nonzero stored coefficient, -1 for zero."""
        best = -1
        for key, c in self.items():
            if not c.is_zero():
                d = key if self.nvars == 1 else key[0] + key[1]
                best = max(best, d)
        return best

    def is_zero(self) -> bool:
        return self.degree() < 0

    @property
    def precision(self) -> int:
        """Smallest coefficient precision."""
        return min(coefficient_precision(c) for _, c in self.items())

    def constant_term(self) -> Any:
        return self[0] if self.nvars == 1 else self[(0, 0)]

    def with_cap(self, cap: int) -> 'TruncatedSeries':
        """Truncate to a smaller cap; exact series may also be padded."""
        if cap > self.cap and not self.exact:
            raise PrecisionError(f"cannot raise cap {self.cap} of a truncated series to {cap}")
        exact = self.exact and self.degree() <= cap
        if self.nvars == 1:
            return TruncatedSeries(self.ring, self._coeffs[:cap + 1], cap, exact=exact)
        kept = {k: c for k, c in self._coeffs.items() if k[0] + k[1] <= cap}
        return TruncatedSeries(self.ring, kept, cap, nvars=2, exact=exact)

    def map_coefficients(self, func, ring: Any = None) -> 'TruncatedSeries':
        ring = ring or self.ring
        if self.nvars == 1:
            return TruncatedSeries(ring, [func(c) for c in self._coeffs], self.cap, exact=self.exact)
        return TruncatedSeries(ring, {k: func(c) for k, c in self._coeffs.items()},
                               self.cap, nvars=2, exact=self.exact)

    def with_precision(self, precision: int) -> 'TruncatedSeries':
        return self.map_coefficients(lambda c: c.with_precision(precision))

    def lift(self, index: int) -> 'TruncatedSeries':
        """View a univariate s(Z) as the bivariate s(X) (index 0) or s(Y) (index 1)."""
        if self.nvars != 1:
            raise ValidationError("lift() is for univariate series")
        table = {((k, 0) if index == 0 else (0, k)): c for k, c in enumerate(self._coeffs)}
        return TruncatedSeries(self.ring, table, self.cap, nvars=2, exact=self.exact)

    def restrict(self, index: int) -> 'TruncatedSeries':
        """Set the other variable to zero: F(Z, 0) for index 0, F(0, Z) for index 1."""
        if self.nvars != 2:
            raise ValidationError("restrict() is for bivariate series")
        coeffs = [self._coeffs[(k, 0) if index == 0 else (0, k)] for k in range(self.cap + 1)]
        return TruncatedSeries(self.ring, coeffs, self.cap, exact=self.exact)

    def swap(self) -> 'TruncatedSeries':
        """F(Y, X)."""
        if self.nvars != 2:
            raise ValidationError("swap() is for bivariate series")
        return TruncatedSeries(self.ring, {(j, i): c for (i, j), c in self._coeffs.items()},
                               self.cap, nvars=2, exact=self.exact)

    def change_ring(self, ring: Any, func=None) -> 'TruncatedSeries':
        """Move coefficients into another ring, through func when given."""
        return self.map_coefficients(func or ring, ring)

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _aligned(self, other: 'TruncatedSeries') -> Tuple['TruncatedSeries', 'TruncatedSeries', int]:
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.ring, other, self.cap, self.nvars)
        if other.nvars != self.nvars:
            raise ValidationError("cannot combine series in different numbers of variables")
        if self.exact and other.exact:
            cap = max(self.cap, other.cap)
        elif self.exact:
            cap = other.cap
        elif other.exact:
            cap = self.cap
        else:
            cap = min(self.cap, other.cap)
        return self.with_cap(cap), other.with_cap(cap), cap

    def __add__(self, other: Any) -> 'TruncatedSeries':
        a, b, cap = self._aligned(other)
        exact = a.exact and b.exact
        if self.nvars == 1:
            return TruncatedSeries(self.ring, [x + y for x, y in zip(a._coeffs, b._coeffs)], cap, exact=exact)
        return TruncatedSeries(self.ring, {k: a._coeffs[k] + b._coeffs[k] for k in a._coeffs},
                               cap, nvars=2, exact=exact)

    __radd__ = __add__

    def __neg__(self) -> 'TruncatedSeries':
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other: Any) -> 'TruncatedSeries':
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.ring, other, self.cap, self.nvars)
        return self + (-other)

    def __rsub__(self, other: Any) -> 'TruncatedSeries':
        return (-self) + other

    def scale(self, factor: Any) -> 'TruncatedSeries':
        return self.map_coefficients(lambda c: c * factor)

    def __mul__(self, other: Any) -> 'TruncatedSeries':
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        if self.exact and other.exact and self.nvars == other.nvars:
            # Polynomials multiply without truncation.
            cap = max(self.cap, other.cap, max(self.degree(), 0) + max(other.degree(), 0))
            a, b = self.with_cap(cap), other.with_cap(cap)
        else:
            a, b, cap = self._aligned(other)
        exact = a.exact and b.exact and a.degree() + b.degree() <= cap
        if self.nvars == 1:
            out = [self.ring.zero] * (cap + 1)
            right = [(j, y) for j, y in enumerate(b._coeffs) if not y.is_zero()]
            for i, x in enumerate(a._coeffs):
                if x.is_zero():
                    continue
                for j, y in right:
                    if i + j > cap:
                        break
                    out[i + j] = out[i + j] + x * y
            return TruncatedSeries(self.ring, out, cap, exact=exact)
        table: Dict[Tuple[int, int], Any] = {}
        right2 = [(k, y) for k, y in b._coeffs.items() if not y.is_zero()]
        for (i1, j1), x in a._coeffs.items():
            if x.is_zero():
                continue
            for (i2, j2), y in right2:
                if i1 + i2 + j1 + j2 > cap:
                    continue
                key = (i1 + i2, j1 + j2)
                table[key] = table[key] + x * y if key in table else x * y
        return TruncatedSeries(self.ring, table, cap, nvars=2, exact=exact)

    def __rmul__(self, other: Any) -> 'TruncatedSeries':
        return self.scale(other)

    def __pow__(self, exponent: int) -> 'TruncatedSeries':
        if exponent < 0:
            return self.mul_inverse() ** (-exponent)
        result = TruncatedSeries.constant(self.ring, self.ring.one, self.cap, self.nvars)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        a, b, _ = self._aligned(other)
        return (a - b).is_zero()

    def __ne__(self, other: Any) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __repr__(self) -> str:
        terms = []
        for key, c in self.items():
            if not c.is_zero():
                terms.append(f"{c!r}*Z^{key}" if self.nvars == 1 else f"{c!r}*X^{key[0]}Y^{key[1]}")
        body = " + ".join(terms) or "0"
        return f"TruncatedSeries({body}; cap={self.cap}{', exact' if self.exact else ''})"

    # ------------------------------------------------------------------
    # Series operations
    # ------------------------------------------------------------------

    def mul_inverse(self) -> 'TruncatedSeries':
        """
        Multiplicative inverse modulo degree cap + 1.

        Raises:
            ValidationError: If the constant term is not a unit.
        """
        if self.nvars != 1:
            raise ValidationError("mul_inverse is implemented for univariate series")
        a = self._coeffs
        if not a[0].is_unit():
            raise ValidationError("constant term is not a unit")
        inv0 = a[0].inverse()
        b = [inv0]
        for k in range(1, self.cap + 1):
            acc = self.ring.zero
            for i in range(1, k + 1):
                if not a[i].is_zero():
                    acc = acc + a[i] * b[k - i]
            b.append(-(acc * inv0))
        exact = self.exact and self.degree() == 0
        return TruncatedSeries(self.ring, b, self.cap, exact=exact)

    def derive(self, var: int = 0) -> 'TruncatedSeries':
        """Formal derivative; the cap drops by one."""
        cap = max(self.cap - 1, 0)
        if self.nvars == 1:
            coeffs = [self._coeffs[k] * k for k in range(1, self.cap + 1)]
            return TruncatedSeries(self.ring, coeffs, cap, exact=self.exact)
        table = {}
        for (i, j), c in self._coeffs.items():
            e = i if var == 0 else j
            if e == 0 or i + j - 1 > cap:
                continue
            key = (i - 1, j) if var == 0 else (i, j - 1)
            table[key] = c * e
        return TruncatedSeries(self.ring, table, cap, nvars=2, exact=self.exact)

    def compose(self, inner: 'TruncatedSeries') -> 'TruncatedSeries':
        """
        outer(inner) for a univariate outer series.

        Raises:
            ValidationError: If inner has a nonzero constant term.
        """
        if self.nvars != 1:
            raise ValidationError("outer series must be univariate; use substitute()")
        if not inner.constant_term().is_zero():
            raise ValidationError("inner series must have zero constant term")
        caps = [s.cap for s in (self, inner) if not s.exact]
        if caps:
            cap = min(caps)
        else:
            cap = max(self.cap, max(self.degree(), 0) * max(inner.degree(), 1))
        exact = not caps
        outer = self.with_cap(cap) if self.exact or self.cap >= cap else self
        inner = inner.with_cap(cap)
        top = min(outer.degree(), cap)
        if top < 0:
            return TruncatedSeries.constant(self.ring, self.ring.zero, cap, inner.nvars).with_cap(cap)
        result = TruncatedSeries.constant(self.ring, outer._coeffs[top], cap, inner.nvars)
        for k in range(top - 1, -1, -1):
            result = result * inner + outer._coeffs[k]
        result = result.with_cap(cap)
        result.exact = exact
        return result

    def substitute(self, s: 'TruncatedSeries', t: 'TruncatedSeries') -> 'TruncatedSeries':
        """
        F(s, t) for a bivariate F and inner series s, t with zero constant terms.

        When s involves only X and t only Y (the pattern F(f(X), f(Y))), the
        result is assembled from outer products of univariate powers.
        """
        if self.nvars != 2:
            raise ValidationError("substitute() needs a bivariate outer series")
        if s.nvars != t.nvars:
            raise ValidationError("inner series must have the same number of variables")
        if not s.constant_term().is_zero() or not t.constant_term().is_zero():
            raise ValidationError("inner series must have zero constant term")
        caps = [x.cap for x in (self, s, t) if not x.exact]
        cap = min(caps) if caps else max(self.cap, s.cap, t.cap)
        if s.nvars == 2 and s._pure_in(0) and t._pure_in(1):
            return self._substitute_separated(s, t, cap, exact=not caps)
        s, t = s.with_cap(cap), t.with_cap(cap)
        s_pows = [TruncatedSeries.constant(self.ring, self.ring.one, cap, s.nvars)]
        t_pows = [TruncatedSeries.constant(self.ring, self.ring.one, cap, s.nvars)]
        for _ in range(cap):
            s_pows.append((s_pows[-1] * s).with_cap(cap))
            t_pows.append((t_pows[-1] * t).with_cap(cap))
        # Group by the power of s: sum_i s^i * (sum_j c_ij t^j).
        result = TruncatedSeries.constant(self.ring, self.ring.zero, cap, s.nvars)
        for i in range(min(cap, self.cap) + 1):
            inner = None
            for j in range(self.cap + 1 - i):
                c = self._coeffs[(i, j)]
                if c.is_zero() or i + j > cap:
                    continue
                term = t_pows[j].scale(c)
                inner = term if inner is None else inner + term
            if inner is not None:
                result = result + s_pows[i] * inner
        result = result.with_cap(cap)
        result.exact = not caps and self.degree() * max(s.degree(), t.degree(), 1) <= cap
        return result

    def _pure_in(self, index: int) -> bool:
        for (i, j), c in self._coeffs.items():
            if not c.is_zero() and (j if index == 0 else i) != 0:
                return False
        return True

    def _substitute_separated(self, s: 'TruncatedSeries', t: 'TruncatedSeries',
                              cap: int, exact: bool) -> 'TruncatedSeries':
        one = self.ring.one
        sx = TruncatedSeries(self.ring, [s[(k, 0)] if k <= s.cap else 0 for k in range(cap + 1)], cap,
                             exact=s.exact)
        ty = TruncatedSeries(self.ring, [t[(0, k)] if k <= t.cap else 0 for k in range(cap + 1)], cap,
                             exact=t.exact)
        s_pows = [TruncatedSeries.constant(self.ring, one, cap)]
        t_pows = [TruncatedSeries.constant(self.ring, one, cap)]
        for _ in range(cap):
            s_pows.append((s_pows[-1] * sx).with_cap(cap))
            t_pows.append((t_pows[-1] * ty).with_cap(cap))
        table: Dict[Tuple[int, int], Any] = {}
        for (i, j), c in self._coeffs.items():
            if c.is_zero() or i + j > cap:
                continue
            left = [(a, x) for a, x in enumerate(s_pows[i].coefficients()) if not x.is_zero()]
            right = [(b, y) for b, y in enumerate(t_pows[j].coefficients()) if not y.is_zero()]
            for a, x in left:
                for b, y in right:
                    if a + b > cap:
                        break
                    term = c * x * y
                    table[(a, b)] = table[(a, b)] + term if (a, b) in table else term
        result = TruncatedSeries(self.ring, table, cap, nvars=2)
        result.exact = exact and self.degree() * max(s.degree(), t.degree(), 1) <= cap
        return result

    def revert(self) -> 'TruncatedSeries':
        """
        Compositional inverse by Newton iteration t <- t - (s(t) - Z) / s'(t).

        Raises:
            ValidationError: If s is not u*Z + ... with u a unit.
        """
        if self.nvars != 1:
            raise ValidationError("revert() is for univariate series")
        if not self.constant_term().is_zero():
            raise ValidationError("series to revert must have zero constant term")
        u = self[1]
        if not u.is_unit():
            raise ValidationError("linear coefficient is not a unit")
        cap = self.cap
        s = self if not self.exact else self.with_cap(cap)
        z = TruncatedSeries.variable(self.ring, cap)
        t = TruncatedSeries(self.ring, [0, u.inverse()], cap)
        # s(t) - Z is O(Z^2), so the unknown degree-cap coefficient of s' never
        # reaches degree cap and the derivative can be padded back to cap.
        ds = s.derive()
        ds = TruncatedSeries(self.ring, ds.coefficients(), cap)
        accurate = 2
        while accurate <= cap:
            residual = s.compose(t) - z
            t = t - residual * ds.compose(t).mul_inverse()
            accurate *= 2
        return TruncatedSeries(self.ring, t.coefficients(), cap)

    def taylor_shift(self, c: Any) -> 'TruncatedSeries':
        """
        The series Z -> self(c + Z), re-centred at a topologically nilpotent c.

        The result lives over the ring of c. For a truncated (non-exact) series
        the dropped tail limits coefficient m to about (cap + 1 - m) * v(c)
        digits, so the result cap is cut where that bound reaches zero.
        """
        if self.nvars != 1:
            raise ValidationError("taylor_shift() is for univariate series")
        ring = ring_of(c)
        v = element_valuation(c)
        if v == INFINITY:
            return self.map_coefficients(lambda x: ring.zero + x, ring)
        if v <= 0:
            raise ValidationError("re-centring needs a point of positive valuation")
        top = self.cap if not self.exact else max(self.degree(), 0)
        out_cap = self.cap
        limits: List[Union[int, float]] = []
        if not self.exact:
            while out_cap >= 0 and tail_precision(self.cap - out_cap, v) < 1:
                out_cap -= 1
            if out_cap < 0:
                raise PrecisionError("re-centring leaves no certified coefficient")
            limits = [tail_precision(self.cap - m, v) for m in range(out_cap + 1)]
        c_pows = [ring.one]
        for _ in range(top):
            c_pows.append(c_pows[-1] * c)
        out = []
        for m in range(out_cap + 1):
            acc = ring.zero
            for k in range(m, top + 1):
                a = self._coeffs[k]
                if a.is_zero():
                    continue
                acc = acc + c_pows[k - m] * a * math.comb(k, m)
            if limits:
                acc = acc.with_precision(limits[m])
            out.append(acc)
        return TruncatedSeries(ring, out, out_cap, exact=self.exact)

    def evaluate(self, x: Any) -> Any:
        """
        Evaluate a univariate series at a ring element of positive valuation.

        Exact series are evaluated as polynomials. Otherwise the result is
        certified only to the tail bound floor((cap + 1) * v(x)).

        Raises:
            PrecisionError: If the tail bound certifies no digit.
        """
        if self.nvars != 1:
            raise ValidationError("use evaluate2() for bivariate series")
        top = self.degree()
        if top < 0:
            return ring_of(x).zero + self._coeffs[0]
        acc = ring_of(x).zero + self._coeffs[top]
        for k in range(top - 1, -1, -1):
            acc = acc * x + self._coeffs[k]
        if self.exact:
            return acc
        limit = tail_precision(self.cap, element_valuation(x))
        if limit < 1:
            raise PrecisionError(f"truncation at degree {self.cap} certifies no digit at this point")
        return acc if limit == INFINITY else acc.with_precision(limit)

    def evaluate2(self, x: Any, y: Any) -> Any:
        """Evaluate a bivariate series at (x, y), with the same tail discipline."""
        if self.nvars != 2:
            raise ValidationError("evaluate2() is for bivariate series")
        ring = ring_of(x)
        x_pows, y_pows = [ring.one], [ring.one]
        for _ in range(self.cap):
            x_pows.append(x_pows[-1] * x)
            y_pows.append(y_pows[-1] * y)
        acc = ring.zero
        for (i, j), c in self._coeffs.items():
            if not c.is_zero():
                acc = acc + x_pows[i] * y_pows[j] * c
        if self.exact:
            return acc
        v = min(element_valuation(x), element_valuation(y))
        limit = tail_precision(self.cap, v)
        if limit < 1:
            raise PrecisionError(f"truncation at degree {self.cap} certifies no digit at this point")
        return acc if limit == INFINITY else acc.with_precision(limit)
