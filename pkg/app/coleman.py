########################
# Coleman Series       #
########################

from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Tuple, Union

from app.certificates import Certificate
from app.exceptions import PrecisionError, ValidationError
from app.localfield import ExtElement, ExtRing, eisenstein_from_torsion
from app.lubin_tate import FormalGroupLaw, TorsionTower, torsion_tower
from app.padic import INFINITY, PAdicFraction, PAdicInt
from app.series import TruncatedSeries, tail_precision


@dataclass(frozen=True)
class ColemanData:
    """
    A candidate Coleman series g with the unit values β_1, ..., β_n it should
    take at the torsion generators of a tower.

    Attributes:
        tower: Torsion tower of the law.
        betas: β_k in the level-k ring, units.
        series: Candidate g over Z_p with unit constant term.
        name: Dataset label (for instance "cyclotomic:a=2").
    """

    tower: TorsionTower
    betas: Tuple[ExtElement, ...]
    series: TruncatedSeries
    name: str = "custom"

    def __post_init__(self) -> None:
        if len(self.betas) > self.tower.levels:
            raise ValidationError("more unit values than tower levels")
        for k, beta in enumerate(self.betas, start=1):
            if beta.ring is not self.tower.ring(k):
                raise ValidationError(f"beta_{k} must lie in the level-{k} ring")
            if not beta.is_unit():
                raise ValidationError(f"beta_{k} is not a unit")

    @property
    def law(self) -> FormalGroupLaw:
        return self.tower.law

    def check_norm_coherence(self) -> Certificate:
        """N_{k+1/k}(β_{k+1}) = β_k for consecutive levels."""
        passed = True
        precision: Union[int, float] = INFINITY
        for k in range(1, len(self.betas)):
            norm = self.betas[k].norm()
            passed = passed and norm == self.betas[k - 1]
            precision = min(precision, norm.precision)
        return Certificate("norm coherence", passed, precision if precision != INFINITY else None)


def kernel_points(law: FormalGroupLaw, ring: ExtRing) -> List[ExtElement]:
    """The π-torsion of the law in the level-1 ring: 0 and [b](ŵ_1) for 0 < b < p."""
    w1 = ring.gen
    return [ring.zero] + [law.multiply_point(b, w1) for b in range(1, law.prime)]


def _translate(law: FormalGroupLaw, point: ExtElement, cap: int) -> TruncatedSeries:
    """F(Z, point) - point as a series in Z over the ring of the point."""
    ring = point.ring
    F = law.law
    powers = [ring.one]
    for _ in range(F.cap):
        powers.append(powers[-1] * point)
    v = point.valuation()
    coeffs = [ring.zero]
    out_cap = min(cap, F.cap)
    for i in range(1, out_cap + 1):
        acc = ring.zero
        for j in range(F.cap + 1 - i):
            c = F[(i, j)]
            if not c.is_zero():
                acc = acc + powers[j] * c
        if not F.exact:
            # Terms with j > cap - i were truncated away.
            limit = tail_precision(F.cap - i, v)
            if limit < 1:
                out_cap = i - 1
                break
            acc = acc.with_precision(limit)
        coeffs.append(acc)
    return TruncatedSeries(ring, coeffs[:out_cap + 1], out_cap)


def coleman_norm(g: TruncatedSeries, law: FormalGroupLaw, tower: Optional[TorsionTower] = None) -> TruncatedSeries:
    """
    The norm operator: the unique N g with (N g)(f(Z)) = ∏_{λ ∈ ker[π]} g(F(Z, λ)).

    The product is formed over the level-1 ring, its coefficients must
    descend to Z_p, and then h ∘ f = product is solved degree by degree.

    Raises:
        ValidationError: If g(0) is not a unit.
        PrecisionError: If a coefficient of the product fails to descend, or a
            division by π^k is not exact.
    """
    if not g[0].is_unit():
        raise ValidationError("norm operator needs a unit constant term")
    ring1 = tower.ring(1) if tower is not None else eisenstein_from_torsion(law, 1, base=law.ring).rings[0]
    product: Optional[TruncatedSeries] = None
    for point in kernel_points(law, ring1):
        if point.is_zero():
            factor = g.change_ring(ring1)
        else:
            factor = g.taylor_shift(point).compose(_translate(law, point, law.cap))
        product = factor if product is None else product * factor
    cap = product.cap if not product.exact else law.cap
    descended = []
    for k in range(cap + 1):
        c = product[k]
        if any(not x.is_zero() for x in c.coeffs[1:]):
            raise PrecisionError(f"coefficient {k} of the norm product does not descend to Z_p")
        descended.append(c.coeffs[0])
    pi = law.uniformizer
    f = TruncatedSeries(law.ring, law.frobenius.with_cap(cap).coefficients(), cap)
    f_pows = [TruncatedSeries.constant(law.ring, 1, cap)]
    for _ in range(cap):
        f_pows.append(f_pows[-1] * f)
    h: List[PAdicInt] = []
    for k in range(cap + 1):
        acc = descended[k]
        for j in range(k):
            acc = acc - _tracked_product(h[j], f_pows[j][k])
        try:
            h.append(acc.exact_div(pi ** k))
        except PrecisionError:
            if k < 2:
                raise
            logging.warning(f"norm operator truncated at degree {k - 1}: precision exhausted")
            break
    return TruncatedSeries(law.ring, h, len(h) - 1)


def _tracked_product(x: PAdicInt, y: PAdicInt) -> PAdicInt:
    """x*y known to min(prec(x) + v(y), prec(y) + v(x)) digits rather than the smaller precision."""
    vx, vy = x.valuation(), y.valuation()
    vx = x.precision if vx == INFINITY else vx
    vy = y.precision if vy == INFINITY else vy
    precision = min(x.precision + vy, y.precision + vx)
    return PAdicInt(x.prime, precision, x.residue * y.residue)


def check_interpolation(data: ColemanData) -> Certificate:
    """
    Compare g(ŵ_k) with β_k at every level; failures are reported, not raised.

    The certificate's details hold the precision decided at each level.
    """
    per_level = []
    passed = True
    for k, beta in enumerate(data.betas, start=1):
        try:
            value = data.series.evaluate(data.tower.generator(k))
        except PrecisionError as exc:
            per_level.append({"level": k, "passed": False, "precision": 0, "reason": str(exc)})
            passed = False
            continue
        ok = value == beta
        precision = min(value.precision, beta.precision)
        per_level.append({"level": k, "passed": ok, "precision": precision})
        passed = passed and ok
    precision = min((entry["precision"] for entry in per_level), default=None)
    return Certificate(f"interpolation {data.name}", passed, precision, {"levels": per_level})


def check_norm_interpolation(data: ColemanData, level: int) -> Certificate:
    """∏_λ g(F(ŵ_{k+1}, λ)) = β_k, computed in the level-(k+1) ring."""
    tower = data.tower
    upper = tower.ring(level + 1)
    w = tower.generator(level + 1)
    product = upper.one
    for point in kernel_points(data.law, tower.ring(1)):
        product = product * data.series.evaluate(data.law.add(w, upper(point)))
    ok = product == upper(data.betas[level - 1])
    return Certificate("norm interpolation", ok, product.precision, {"level": level})


def check_norm_multiplicative(g: TruncatedSeries, h: TruncatedSeries, law: FormalGroupLaw,
                              tower: Optional[TorsionTower] = None) -> Certificate:
    """N(gh) = (N g)(N h) coefficientwise."""
    left = coleman_norm(g * h, law, tower)
    right = coleman_norm(g, law, tower) * coleman_norm(h, law, tower)
    return Certificate("N(gh) = (N g)(N h)", left == right, min(left.precision, right.precision),
                       {"cap": min(left.cap, right.cap)})


def _unit_constant(g: TruncatedSeries) -> None:
    if not g[0].is_unit():
        raise ValidationError("series must have a unit constant term")


def delta(g: TruncatedSeries, law: FormalGroupLaw) -> TruncatedSeries:
    """
    δg = g′ / (g·λ′).

    λ′ is certified integral before use, so the whole computation stays in Z_p.

    Raises:
        ValidationError: If g(0) is not a unit.
        IntegralityError: If λ′ keeps a denominator at this precision.
    """
    _unit_constant(g)
    lam_prime = law.logarithm.derive().change_ring(law.ring, lambda c: c.to_integral())
    return g.derive() * (g * lam_prime).mul_inverse()


def delta_at_zero(g: TruncatedSeries, law: FormalGroupLaw) -> PAdicInt:
    """δ_w = g′(0)/g(0), using λ′(0) = 1."""
    _unit_constant(g)
    return g[1] * g[0].inverse()


def delta_value(g: TruncatedSeries, law: FormalGroupLaw, point: ExtElement) -> ExtElement:
    """δg at a point, as g′(x)·F_Y(x, 0)·g(x)^(-1)."""
    numerator = g.derive().evaluate(point) * law.invariant_differential.evaluate(point)
    return numerator * g.evaluate(point).inverse()


def _trace_delta_once(g: TruncatedSeries, tower: TorsionTower, n: int) -> PAdicFraction:
    law = tower.law
    trace = delta_value(g, law, tower.generator(n)).trace_to(None)
    unit = law.uniformizer.unit_part()
    result = PAdicFraction(trace * unit.inverse() ** n, n)
    if result.absolute_precision < 1:
        raise PrecisionError(f"level-{n} trace keeps no digit after dividing by pi^{n}")
    return result


def trace_delta_level(g: TruncatedSeries, tower: TorsionTower, n: int) -> PAdicFraction:
    """
    π^(-n)·Tr(δg(ŵ_n)) down to Q_p.

    The value need not be integral, so it is returned as a PAdicFraction.
    A precision failure triggers one retry with the law rebuilt at twice the
    precision; a second failure propagates.

    Raises:
        ValidationError: If n is outside the tower.
        PrecisionError: If the retry also runs out of precision.
    """
    if not 1 <= n <= tower.levels:
        raise ValidationError(f"level {n} is outside the tower (1..{tower.levels})")
    _unit_constant(g)
    try:
        return _trace_delta_once(g, tower, n)
    except PrecisionError as exc:
        law = tower.law
        doubled = 2 * law.config.precision
        logging.warning(f"trace at level {n} ran out of precision ({exc}); retrying at precision {doubled}")
        bigger = law.at_precision(doubled)
        lifted = g.change_ring(bigger.ring, lambda c: bigger.ring(int(c)))
        return _trace_delta_once(lifted, torsion_tower(bigger, tower.levels), n)


def expected_trace(g: TruncatedSeries, law: FormalGroupLaw, unit_root: Union[int, PAdicInt] = 1) -> PAdicFraction:
    """(1 - u0/p)·δ_w(g), the level-independent value of the normalized trace."""
    u0 = law.ring(unit_root)
    return PAdicFraction((law.prime - u0) * delta_at_zero(g, law), 1)


def check_trace_stability(g: TruncatedSeries, tower: TorsionTower, levels: Optional[List[int]] = None,
                          unit_root: Union[int, PAdicInt] = 1) -> Certificate:
    """Normalized traces agree across levels and with (1 - u0/p)·δ_w(g)."""
    levels = levels or list(range(1, tower.levels + 1))
    expected = expected_trace(g, tower.law, unit_root)
    values = [(n, trace_delta_level(g, tower, n)) for n in levels]
    passed = all(value == expected for _, value in values)
    precision = min(value.absolute_precision for _, value in values)
    details = {
        "levels": [{"level": n, "precision": value.absolute_precision, "valuation": str(value.valuation())}
                   for n, value in values],
    }
    return Certificate("trace stability", passed, precision, details)


def dual_exp(g: TruncatedSeries, law: FormalGroupLaw, unit_root: Union[int, PAdicInt]) -> PAdicFraction:
    """
    (u0/p - 1)·δ_w(g); the factor lives in p^(-1)Z_p, carried as one shift.

    Raises:
        ValidationError: If the unit root is not a unit or g(0) is not.
    """
    u0 = law.ring(unit_root)
    if not u0.is_unit():
        raise ValidationError("unit root must be a unit")
    return PAdicFraction((u0 - law.prime) * delta_at_zero(g, law), 1)


# ----------------------------------------------------------------------
# Built-in datasets
# ----------------------------------------------------------------------

def cyclotomic_series(a: int, law: FormalGroupLaw) -> TruncatedSeries:
    """g_a = ((1 + Z)^a - 1)/Z as an exact polynomial."""
    return TruncatedSeries.polynomial(law.ring, [math.comb(a, k + 1) for k in range(a)])


def parse_dataset_name(name: str) -> Tuple[str, int]:
    """'cyclotomic:a=2' -> ('cyclotomic', 2)."""
    try:
        kind, assignment = name.split(':', 1)
        _, value = assignment.split('=', 1)
        return kind.strip(), int(value)
    except ValueError as exc:
        raise ValidationError(f"malformed dataset name {name!r}") from exc


def builtin_dataset(name: str, tower: TorsionTower) -> ColemanData:
    """
    Coleman data addressed by name: cyclotomic:a=<a>, tautological:c=<c> or
    constant:k=<k>. Cyclotomic data needs the multiplicative law, where
    1 + ŵ_k is a primitive p^k-th root of unity.

    Raises:
        ValidationError: For unknown names, non-units or a wrong law.
    """
    kind, value = parse_dataset_name(name)
    law = tower.law
    p = law.prime
    levels = range(1, tower.levels + 1)
    if kind == "cyclotomic":
        if law.name != "multiplicative":
            raise ValidationError("cyclotomic data needs the multiplicative law")
        if value % p == 0:
            raise ValidationError("a must be prime to p")
        g = cyclotomic_series(value, law)
        betas = []
        for k in levels:
            zeta = tower.generator(k) + 1
            acc, power = tower.ring(k).zero, tower.ring(k).one
            for _ in range(value):
                acc, power = acc + power, power * zeta
            betas.append(acc)
    elif kind == "tautological":
        if value % p == 0:
            raise ValidationError("c must be a unit")
        g = TruncatedSeries.polynomial(law.ring, [value, 1])
        betas = [tower.generator(k) + value for k in levels]
    elif kind == "constant":
        if value % p == 0:
            raise ValidationError("k must be a unit")
        g = TruncatedSeries.polynomial(law.ring, [value])
        betas = [tower.ring(k)(value) for k in levels]
    else:
        raise ValidationError(f"unknown dataset kind {kind!r}")
    return ColemanData(tower, tuple(betas), g, name)
