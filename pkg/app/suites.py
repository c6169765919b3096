########################
# Verification Suites  #
########################

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache, partial
import logging
import math
import time
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from app.certificates import Certificate
from app.coleman import (
    ColemanData,
    builtin_dataset,
    check_interpolation,
    check_norm_interpolation,
    check_norm_multiplicative,
    check_trace_stability,
    coleman_norm,
    delta,
    delta_at_zero,
    delta_value,
    expected_trace,
)
from app.exceptions import ConfigurationError, ToolkitError
from app.iwasawa import (
    GammaDatum,
    THETA_ORDER_LIMIT,
    D_star,
    IotaStarResult,
    UnitTowerData,
    check_character_homomorphism,
    check_iota_scaling,
    check_leibniz,
    check_theta_divides,
    cyclotomic_unit_tower,
    eval_character,
    iota_star,
    iota_w,
    primitive_root,
    theta_congruence,
    theta_element,
    verify_dertheta,
)
from app.localfield import EISENSTEIN, ExtRing, eisenstein_from_torsion, log_principal, unramified_extension
from app.lubin_tate import (
    FormalGroupLaw,
    TorsionTower,
    binomial_series,
    group_law,
    log_one_plus,
    lt_isomorphism,
    mult_by,
    multiplicative_frobenius,
    multiplicative_law,
    special_law,
    torsion_correspondence,
    torsion_tower,
)
from app.padic import PAdicConfig, PAdicFraction, exp_p, log1p, log_unit, teichmuller
from app.reports import FAIL, CaseResult, SuiteReport
from app.rng import SplitMix64
from app.series import TruncatedSeries
from app.verify_config import VerifyConfig
from app.weil import CMEndomorphism, cm_adjointness, check_alternation, check_bilinearity
from app.weil import check_galois_equivariance, check_nondegeneracy, level_compatibility, torsion_setup

Case = Tuple[str, Callable[[], Certificate]]


@lru_cache(maxsize=None)
def cached_special_law(config: PAdicConfig) -> FormalGroupLaw:
    return special_law(config)


@lru_cache(maxsize=None)
def cached_multiplicative_law(config: PAdicConfig) -> FormalGroupLaw:
    return multiplicative_law(config)


@lru_cache(maxsize=None)
def cached_tower(config: PAdicConfig, levels: int) -> TorsionTower:
    """Torsion tower of the multiplicative law."""
    return torsion_tower(cached_multiplicative_law(config), levels)


@dataclass
class SuiteContext:
    """What a suite's cases draw on: the run config, the prime and the suite's own RNG stream."""

    config: VerifyConfig
    rng: SplitMix64
    prime: Optional[int] = None
    levels: List[int] = field(default_factory=list)

    @property
    def padic(self) -> PAdicConfig:
        return self.config.padic_config(self.prime)

    @property
    def target(self) -> int:
        return self.config.precision

    @property
    def top_level(self) -> int:
        return max(self.levels or self.config.levels)


def aggregate(name: str, certificates: Iterable[Certificate], **details: Any) -> Certificate:
    """Fold the trials of a randomized check into one certificate."""
    certificates = list(certificates)
    failures = sum(1 for c in certificates if not c.passed)
    precisions = [c.precision for c in certificates if c.precision is not None]
    precision = min(precisions) if precisions else None
    return Certificate(name, failures == 0, precision,
                       {"trials": len(certificates), "failures": failures, **details})


def expect_failure(certificate: Certificate) -> Certificate:
    """A negative control passes when the wrapped check fails."""
    details = dict(certificate.details)
    details["control"] = True
    details["control_outcome"] = "fail" if not certificate.passed else "pass"
    return Certificate(f"{certificate.name} (control)", not certificate.passed, None, details)


def control(check: Callable[..., Certificate], *args: Any) -> Certificate:
    """Run check(*args) as a negative control."""
    return expect_failure(check(*args))


def equality(name: str, left: Any, right: Any, **details: Any) -> Certificate:
    diff = left - right
    precision = getattr(diff, 'absolute_precision', None)
    if precision is None:
        precision = diff.precision
    return Certificate(name, diff.is_zero(), precision, details)


class Suite(ABC):
    """
    Abstract base class for verification suites.

    A suite lists named cases; each case is a thunk returning a Certificate.
    Cases run in order, so their random draws are fixed by the seed.
    """

    name: str = ''
    # False for suites whose cases do not depend on p; they run once.
    sweeps_primes: bool = True

    @abstractmethod
    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        """
        Yield (case label, check) pairs.

        Args:
            ctx (SuiteContext): Config and the suite's RNG stream.
        """
        pass  # pragma: no cover

    def floor(self, config: VerifyConfig) -> int:
        """Digits below which a passing case counts as a failure."""
        return max(1, config.precision // 2)

    def parameters(self, config: VerifyConfig) -> Dict[str, Any]:
        parameters = config.to_dict()
        parameters['primes'] = config.primes_for(self.name)
        parameters['levels'] = config.levels_for(self.name)
        return parameters

    def run(self, config: VerifyConfig) -> SuiteReport:
        """
        Run every case once per prime of the suite's grid; a precision or
        validation error inside a case fails that case only.

        With more than one prime, labels are prefixed "p=<p>/" and each
        prime draws from its own fork of the suite's RNG stream.
        """
        primes: List[Optional[int]] = list(config.primes_for(self.name)) if self.sweeps_primes else [None]
        levels = config.levels_for(self.name)
        stream = SplitMix64(config.seed).fork(self.name)
        report = SuiteReport(self.name, self.parameters(config), config.seed)
        floor = self.floor(config)
        start = time.perf_counter()
        for p in primes:
            swept = len(primes) > 1
            ctx = SuiteContext(config, stream.fork(f"p={p}") if swept else stream, p, levels)
            prefix = f"p={p}/" if swept else ""
            for label, check in self.cases(ctx):
                report.cases.append(self._run_case(prefix + label, check, ctx, floor))
        report.wall_time = time.perf_counter() - start
        return report

    def _run_case(self, label: str, check: Callable[[], Certificate], ctx: SuiteContext, floor: int) -> CaseResult:
        try:
            certificate = check()
        except ToolkitError as e:
            logging.warning(f"{self.name}/{label} raised {type(e).__name__}: {e}")
            return CaseResult(label, FAIL, 0, {"error": f"{type(e).__name__}: {e}"}, ctx.prime)
        result = CaseResult.from_certificate(label, certificate, ctx.target, floor, ctx.prime)
        logging.debug(f"{self.name}/{label}: {result.status} at precision {result.precision}")
        return result

    def __str__(self) -> str:
        return self.__class__.__name__


class PAdicSuite(Suite):
    """Logarithm, exponential and Teichmüller identities in Z_p."""

    name = 'padic'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        ring = ctx.padic.ring()
        p = ring.prime
        trials = ctx.config.trials
        rng = ctx.rng

        def log_exp() -> Certificate:
            checks = []
            for _ in range(trials):
                x = ring.random_small(rng)
                checks.append(equality("exp(log(1 + x)) = 1 + x", exp_p(log1p(x)), x + 1))
                checks.append(equality("log(exp(x)) = x", log1p(exp_p(x) - 1), x))
            return aggregate("log/exp inverse", checks)

        def log_homomorphism() -> Certificate:
            checks = []
            for _ in range(trials):
                u, v = ring.random_unit(rng), ring.random_unit(rng)
                checks.append(equality("log(uv)", log_unit(u * v), log_unit(u) + log_unit(v)))
            return aggregate("log homomorphism", checks)

        def teichmuller_roots() -> Certificate:
            checks = []
            for _ in range(trials):
                u = ring.random_unit(rng)
                t = teichmuller(u)
                ok = t ** (p - 1) == 1 and (t - u).valuation() >= 1
                checks.append(Certificate("teichmuller", ok, t.precision))
            return aggregate("teichmuller", checks)

        def fractions() -> Certificate:
            checks = []
            for _ in range(trials):
                x = PAdicFraction(ring.random_unit(rng), 2)
                y = PAdicFraction(ring.random_unit(rng), 1)
                checks.append(equality("(xy)/y = x", (x * y) * y.inverse(), x))
                checks.append(equality("x + y - y = x", x + y - y, x))
            return aggregate("fraction arithmetic", checks)

        yield "log-exp-inverse", log_exp
        yield "log-homomorphism", log_homomorphism
        yield "teichmuller", teichmuller_roots
        yield "fraction-arithmetic", fractions


class LocalFieldSuite(Suite):
    """Traces, norms, Frobenius and logarithms in extension rings."""

    name = 'localfield'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        base = pc.ring()
        p = base.prime
        rng = ctx.rng
        trials = ctx.config.trials

        def eisenstein_trace_norm() -> Certificate:
            # Z^2 + pZ + p: trace -p, norm p
            ring = ExtRing(base, [p, p, 1], EISENSTEIN)
            z = ring.gen
            ok = z.trace() == -p and z.norm() == p
            return Certificate("trace and norm of a uniformizer", ok, base.precision,
                               {"valuation": str(z.valuation())})

        def unramified_frobenius() -> Certificate:
            ring = unramified_extension(base, 2)
            checks = []
            for _ in range(trials):
                x = ring.random_unit(rng)
                phi = x.frobenius()
                ok = (phi - x ** p).valuation() >= 1 and phi.frobenius() == x
                ok = ok and x * x.inverse() == 1
                checks.append(Certificate("frobenius", ok, x.precision))
            return aggregate("unramified frobenius", checks)

        def norm_multiplicative() -> Certificate:
            top = eisenstein_from_torsion(multiplicative_frobenius(pc), 2).rings[1]
            checks = []
            for _ in range(max(1, trials // 4)):
                x, y = top.random_unit(rng), top.random_unit(rng)
                left = (x * y).norm()
                checks.append(equality("N(xy) = N(x)N(y)", left, x.norm() * y.norm()))
            return aggregate("norm multiplicativity", checks)

        def log_homomorphism() -> Certificate:
            ring = eisenstein_from_torsion(multiplicative_frobenius(pc), 1).rings[0]
            checks = []
            for _ in range(trials):
                u = ring.random(rng) * ring.gen + 1
                v = ring.random(rng) * ring.gen + 1
                diff = log_principal(u * v) - (log_principal(u) + log_principal(v))
                checks.append(Certificate("log(uv)", diff.is_zero(), diff.absolute_precision))
            return aggregate("principal log homomorphism", checks)

        yield "eisenstein-trace-norm", eisenstein_trace_norm
        yield "unramified-frobenius", unramified_frobenius
        yield "norm-multiplicativity", norm_multiplicative
        yield "log-homomorphism", log_homomorphism


class SeriesSuite(Suite):
    """Reversion, composition, inversion and re-centring of truncated series."""

    name = 'series'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        ring = ctx.padic.ring()
        cap = ctx.padic.degree_cap
        rng = ctx.rng
        trials = ctx.config.trials
        z = TruncatedSeries.variable(ring, cap)

        def catalan() -> Certificate:
            # Z - Z^2 reverts to Σ C_(k-1) Z^k
            reverted = TruncatedSeries.polynomial(ring, [0, 1, -1], cap).revert()
            expected = TruncatedSeries(ring, [0] + [math.comb(2 * k, k) // (k + 1) for k in range(cap)], cap)
            return Certificate("catalan reversion", reverted == expected, reverted.precision)

        def compose_revert() -> Certificate:
            checks = []
            for _ in range(trials):
                s = TruncatedSeries.random(ring, cap, rng, valuation=2) + z.scale(ring.random_unit(rng))
                checks.append(Certificate("s(s^-1) = Z", s.compose(s.revert()) == z, s.precision))
            return aggregate("compose after revert", checks)

        def inverse() -> Certificate:
            checks = []
            for _ in range(trials):
                g = TruncatedSeries.random(ring, cap, rng, constant=ring.random_unit(rng))
                one = TruncatedSeries.constant(ring, 1, cap)
                checks.append(Certificate("g/g = 1", g * g.mul_inverse() == one, g.precision))
            return aggregate("multiplicative inverse", checks)

        def shift() -> Certificate:
            checks = []
            for _ in range(trials):
                poly = TruncatedSeries.polynomial(ring, [ring.random(rng) for _ in range(cap + 1)])
                c, x = ring.random_small(rng), ring.random_small(rng)
                checks.append(equality("P(c + Z)(x) = P(c + x)", poly.taylor_shift(c).evaluate(x),
                                       poly.evaluate(c + x)))
            return aggregate("taylor shift", checks)

        yield "catalan-reversion", catalan
        yield "compose-revert", compose_revert
        yield "mul-inverse", inverse
        yield "taylor-shift", shift


class FormalGroupSuite(Suite):
    """Axioms of the special and multiplicative Lubin-Tate laws."""

    name = 'formal-group'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        for label, build in (("special", cached_special_law), ("multiplicative", cached_multiplicative_law)):
            law = build(pc)
            yield f"{label}/unit", law.check_unit
            yield f"{label}/commutativity", law.check_commutativity
            yield f"{label}/associativity", partial(law.check_associativity, ctx.rng)
            yield f"{label}/log-frobenius", law.check_logarithm_frobenius
            yield f"{label}/log-homomorphism", law.check_logarithm_homomorphism
            yield f"{label}/endomorphism-composition", partial(self._compose_endomorphisms, law, ctx)

    @staticmethod
    def _compose_endomorphisms(law: FormalGroupLaw, ctx: SuiteContext) -> Certificate:
        """[a]∘[b] = [ab] for random a, b."""
        ring = law.ring
        checks = []
        for _ in range(ctx.config.trials):
            a, b = ring.random(ctx.rng), ring.random(ctx.rng)
            left = mult_by(a, law).compose(mult_by(b, law))
            checks.append(Certificate("[a][b] = [ab]", left == mult_by(a * b, law), left.precision))
        return aggregate("[a][b] = [ab]", checks)


class GmClosedFormsSuite(Suite):
    """The multiplicative law, its endomorphisms and logarithm against closed forms."""

    name = 'gm-closed-forms'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        ring = pc.ring()
        p = pc.prime

        def law_closed_form() -> Certificate:
            solved = group_law(multiplicative_frobenius(pc), p, pc, "multiplicative")
            closed = TruncatedSeries.bivariate_polynomial(ring, {(1, 0): 1, (0, 1): 1, (1, 1): 1}, pc.degree_cap)
            return Certificate("F = X + Y + XY", solved.law == closed, solved.law.precision)

        def endomorphisms() -> Certificate:
            law = cached_multiplicative_law(pc)
            exponents = [2, p + 1, int(ring.random_unit(ctx.rng))]
            checks = []
            for a in exponents:
                series = mult_by(a, law)
                checks.append(Certificate("[a] = (1+Z)^a - 1", series == binomial_series(a, ring, pc.degree_cap),
                                          series.precision, {"a": a}))
            return aggregate("[a] closed form", checks, exponents=exponents)

        def logarithm() -> Certificate:
            law = cached_multiplicative_law(pc)
            return Certificate("log = log(1 + Z)", law.logarithm == log_one_plus(ring, pc.degree_cap),
                               law.logarithm.precision)

        yield "law", law_closed_form
        yield "endomorphisms", endomorphisms
        yield "logarithm", logarithm


class IsomorphismSuite(Suite):
    """η from the multiplicative law to the special law, with period 1."""

    name = 'isomorphism'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        source = cached_multiplicative_law(pc)
        iso = lt_isomorphism(source, cached_special_law(pc), 1)
        a = int(pc.ring().random_unit(ctx.rng))
        yield "homomorphism", iso.check_homomorphism
        yield "endomorphism", partial(iso.check_endomorphism, a)
        yield "frobenius", iso.check_frobenius
        yield "compare-logs", iso.check_compare_logs
        yield "torsion-level-0", partial(torsion_correspondence, iso, None, None, 0)
        yield "torsion-level-1", partial(torsion_correspondence, iso, cached_tower(pc, 1), None, 1)


def _prime_to(values: Iterable[int], p: int) -> List[int]:
    return [v for v in values if v % p]


class ColemanSuite(Suite):
    """Cyclotomic Coleman series: interpolation, the norm operator and δ."""

    name = 'coleman'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        p = pc.prime
        tower = cached_tower(pc, ctx.top_level)
        law = tower.law
        ring = law.ring
        for a in _prime_to((2, 4, 7), p):
            data = builtin_dataset(f"cyclotomic:a={a}", tower)
            yield f"a={a}/interpolation", partial(check_interpolation, data)
            yield f"a={a}/norm-coherence", data.check_norm_coherence
            if tower.levels >= 2:
                yield f"a={a}/norm-interpolation", partial(check_norm_interpolation, data, 1)
            yield f"a={a}/norm-operator", partial(self._norm_fixed, data)
            yield f"a={a}/delta-w", partial(self._delta_w, data, a)
        g, h = (builtin_dataset(f"cyclotomic:a={a}", tower).series for a in _prime_to((2, 4, 7), p)[:2])
        yield "norm-multiplicative", partial(check_norm_multiplicative, g, h, law, tower)

        def additivity() -> Certificate:
            checks = []
            for _ in range(ctx.config.trials):
                g1 = TruncatedSeries.random(ring, pc.degree_cap, ctx.rng, constant=ring.random_unit(ctx.rng))
                g2 = TruncatedSeries.random(ring, pc.degree_cap, ctx.rng, constant=ring.random_unit(ctx.rng))
                left = delta(g1 * g2, law)
                checks.append(Certificate("δ(g1 g2) = δg1 + δg2", left == delta(g1, law) + delta(g2, law),
                                          left.precision))
            return aggregate("delta additivity", checks)

        def constant_delta() -> Certificate:
            data = builtin_dataset("constant:k=2", tower)
            value = delta(data.series, law)
            return Certificate("δ(constant) = 0", value.is_zero(), value.precision)

        def perturbed() -> Certificate:
            data = builtin_dataset(f"cyclotomic:a={_prime_to((2, 4, 7), p)[0]}", tower)
            betas = (data.betas[0] + tower.generator(1),) + data.betas[1:]
            return expect_failure(check_interpolation(ColemanData(tower, betas, data.series, "perturbed")))

        yield "delta-additivity", additivity
        yield "constant-delta", constant_delta
        yield "tautological-interpolation", partial(check_interpolation, builtin_dataset("tautological:c=1", tower))
        yield "perturbed-beta", perturbed

    @staticmethod
    def _norm_fixed(data: ColemanData) -> Certificate:
        """N g = g coefficientwise."""
        normed = coleman_norm(data.series, data.law, data.tower)
        return equality("N g = g", normed, data.series)

    @staticmethod
    def _delta_w(data: ColemanData, a: int) -> Certificate:
        """δ_w(g_a) = (a - 1)/2, from the constant term of δg and from g′(0)/g(0)."""
        law = data.law
        ring = law.ring
        expected = ring(a - 1) * ring(2).inverse()
        from_series = delta(data.series, law)[0]
        from_values = delta_at_zero(data.series, law)
        ok = from_series == expected and from_values == expected
        return Certificate("δ_w = (a - 1)/2", ok, min(from_series.precision, from_values.precision), {"a": a})


class TraceStabilitySuite(Suite):
    """π^(-n)·Tr(δg(ŵ_n)) is independent of n and equals (1 - 1/p)·δ_w(g)."""

    name = 'trace-stability'

    def floor(self, config: VerifyConfig) -> int:
        return 1

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        tower = cached_tower(pc, ctx.top_level)
        levels = list(ctx.levels)
        for name in self.datasets(pc.prime):
            data = builtin_dataset(name, tower)
            yield f"{name}/levels", partial(check_trace_stability, data.series, tower, levels, 1)
            yield f"{name}/conjugate-sum", partial(self._conjugate_sum, data)

    @staticmethod
    def datasets(p: int) -> List[str]:
        """Norm-coherent built-in data: cyclotomic units and a constant."""
        a = _prime_to((2, 4, 7), p)[0]
        return [f"cyclotomic:a={a}", "constant:k=1"]

    @staticmethod
    def _conjugate_sum(data: ColemanData) -> Certificate:
        """At level 1 the trace is Σ_b δg([b]ŵ_1), summed directly over the conjugates."""
        tower, law = data.tower, data.law
        p = law.prime
        total = tower.ring(1).zero
        for b in range(1, p):
            total = total + delta_value(data.series, law, tower.conjugate(b, 1))
        descends = all(c.is_zero() for c in total.coeffs[1:])
        value = PAdicFraction(total.coeffs[0] * law.uniformizer.unit_part().inverse(), 1)
        expected = expected_trace(data.series, law, 1)
        return Certificate("conjugate sum", descends and value == expected, value.absolute_precision,
                           {"value": str(value)})


class DerthetaSuite(Suite):
    """D^{*(m)} against ϑ*-powers, Leibniz and divisibility by ϑ*."""

    name = 'dertheta'

    def floor(self, config: VerifyConfig) -> int:
        return max(1, config.precision - 3)

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        gamma = GammaDatum.build(ctx.padic)
        p = gamma.prime
        ring = gamma.ring
        trials = ctx.config.trials
        rng = ctx.rng
        orders = [m for m in (1, 2, 3) if m < p]
        theta = theta_element(gamma)

        def theta_powers() -> Certificate:
            checks = [equality("D*(ϑ*^m, m) = p^m", D_star(theta ** m, m), ring(p ** m), m=m) for m in orders]
            return aggregate("theta powers", checks)

        def random_trials(check: Callable[..., Certificate], arity: int, name: str) -> Certificate:
            results = []
            for _ in range(trials):
                elements = [gamma.random(rng) for _ in range(arity)]
                results.append(check(*elements))
            return aggregate(name, results)

        def evaluation() -> Certificate:
            one = eval_character(theta, 1)
            zero = eval_character(theta, 0)
            ok = one == exp_p(ring(p)) - 1 and zero.is_zero()
            return Certificate("ϑ*(ψ*<ψ*>) = exp(p) - 1", ok, min(one.precision, zero.precision))

        yield "gamma", gamma.check
        yield "theta-powers", theta_powers
        for m in orders:
            yield f"dertheta-m{m}", partial(random_trials, partial(verify_dertheta, m=m), 1, f"dertheta m={m}")
        yield "leibniz", partial(random_trials, check_leibniz, 2, "leibniz")
        s = int(ring.random(rng))
        yield "character-homomorphism", partial(
            random_trials, partial(check_character_homomorphism, s=s), 2, "character homomorphism")
        yield "theta-divides", partial(random_trials, check_theta_divides, 1, "theta divides")
        yield "theta-evaluation", evaluation


class ThetaCongruenceSuite(Suite):
    """The ϑ_n congruence in Z_p[(Z/p^n)^×], with a shifted negative control."""

    name = 'theta-congruence'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        gamma = GammaDatum.build(pc)
        p = pc.prime
        runnable = [n for n in ctx.levels
                    if p ** (n - 1) * (p - 1) <= THETA_ORDER_LIMIT and pc.working_precision >= 2 * n]
        skipped = sorted(set(ctx.levels) - set(runnable))
        if skipped:
            logging.info(f"theta congruence skips levels {skipped} (order or precision)")
        for n in runnable:
            yield f"n={n}", partial(theta_congruence, n, gamma)
        if runnable:
            yield f"n={runnable[0]}/control", partial(control, theta_congruence, runnable[0], gamma, 1)


class WeilSuite(Suite):
    """Weil pairing on y^2 = x^3 - x over brute-force-found fields."""

    name = 'weil'
    sweeps_primes = False

    def parameters(self, config: VerifyConfig) -> Dict[str, Any]:
        return {"seed": config.seed, "trials": config.trials, "curve": "y^2 = x^3 - x", "N": [5, 9]}

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        fixture = ctx.config.fixture_file
        trials = ctx.config.trials
        setup = torsion_setup(5, fixture, ctx.rng.fork("N=5"))
        yield "N=5/alternation", partial(check_alternation, setup)
        yield "N=5/bilinearity", partial(check_bilinearity, setup, ctx.rng, trials)
        yield "N=5/galois-equivariance", partial(check_galois_equivariance, setup, ctx.rng, trials)
        yield "N=5/non-degeneracy", partial(check_nondegeneracy, setup)
        grid = setup.points()
        yield "N=5/iota-square", partial(CMEndomorphism.on(setup.curve, 0, 1).check_iota_square, grid)
        for a, b in ((2, 1), (3, 4)):
            yield f"N=5/norm-{a}+{b}i", partial(CMEndomorphism.on(setup.curve, a, b).check_norm, grid)
        for a, b in ((1, 0), (2, 0), (2, 1), (3, 4)):
            yield f"N=5/adjointness-{a}+{b}i", partial(cm_adjointness, setup, CMEndomorphism.on(setup.curve, a, b))
        setup9 = torsion_setup(9, fixture, ctx.rng.fork("N=9"))
        yield "N=9/level-compatibility", partial(level_compatibility, setup9, CMEndomorphism.on(setup9.curve, 3, 0), 1)
        yield "N=9/level-compatibility/control", partial(
            control, level_compatibility, setup9, CMEndomorphism.on(setup9.curve, 3, 3), 1)


class IotaStarSuite(Suite):
    """ι* partial sums on cyclotomic unit towers."""

    name = 'iota-star'

    def cases(self, ctx: SuiteContext) -> Iterable[Case]:
        pc = ctx.padic
        p = pc.prime
        unit_root = ctx.config.unit_root
        tower = cached_tower(pc, ctx.top_level)
        a = _prime_to((2, 4, 7), p)[0]
        data = cyclotomic_unit_tower(tower, a)

        def stabilization() -> Certificate:
            result: IotaStarResult = iota_star(data, unit_root=unit_root)
            return Certificate("iota* stabilization", result.is_nondecreasing(), result.value.absolute_precision,
                               {"valuations": [str(v) for v in result.valuations]})

        def trivial() -> Certificate:
            ones = UnitTowerData(tower, tuple(tower.ring(k).one for k in range(1, tower.levels + 1)), "trivial")
            value = iota_star(ones, unit_root=unit_root).value
            return Certificate("iota*(1) = 0", value.is_zero(), value.absolute_precision)

        def iota_w_value() -> Certificate:
            g = builtin_dataset(f"cyclotomic:a={a}", tower).series
            law = tower.law
            value = iota_w(delta_at_zero(g, law), law.ring.one, unit_root)
            return equality("iota_w = (1 - u0/p)·δ_w", value, expected_trace(g, law, unit_root))

        yield "stabilization", stabilization
        for exponent in (2, p + 1):
            yield f"scaling-{exponent}", partial(check_iota_scaling, data, exponent, unit_root)
        yield "trivial-units", trivial
        yield "galois-composition", partial(data.check_galois_composition, primitive_root(p), p + 1)
        yield "norm-coherence", data.check_norm_coherence
        yield "iota-w", iota_w_value


class SuiteFactory:
    """
    Factory class for creating suite instances by name.

    Mirrors the operation registry: suites are looked up in a class-level
    table that new suites can be registered into.
    """

    _suites: Dict[str, type] = {
        'padic': PAdicSuite,
        'localfield': LocalFieldSuite,
        'series': SeriesSuite,
        'formal-group': FormalGroupSuite,
        'gm-closed-forms': GmClosedFormsSuite,
        'isomorphism': IsomorphismSuite,
        'coleman': ColemanSuite,
        'trace-stability': TraceStabilitySuite,
        'dertheta': DerthetaSuite,
        'theta-congruence': ThetaCongruenceSuite,
        'weil': WeilSuite,
        'iota-star': IotaStarSuite,
    }

    @classmethod
    def register_suite(cls, name: str, suite_class: type) -> None:
        """
        Register a new suite type.

        Raises:
            TypeError: If suite_class does not inherit from Suite.
            ValueError: If the name is already taken.
        """
        if not isinstance(suite_class, type) or not issubclass(suite_class, Suite):
            raise TypeError("Suite class must inherit from Suite")
        if name.lower() in cls._suites:
            raise ValueError(f"Suite already registered: {name}")
        cls._suites[name.lower()] = suite_class

    @classmethod
    def create_suite(cls, name: str) -> Suite:
        """
        Raises:
            ConfigurationError: If the suite name is unknown.
        """
        suite_class = cls._suites.get(name.lower())
        if not suite_class:
            raise ConfigurationError(f"Unknown suite: {name}")
        return suite_class()

    @classmethod
    def available(cls) -> List[str]:
        return sorted(cls._suites)
