from functools import lru_cache

import pytest

from app.coleman import builtin_dataset, delta_at_zero, expected_trace
from app.exceptions import ValidationError
from app.iwasawa import (
    D_star,
    GammaDatum,
    GroupAlgebraElement,
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
from app.lubin_tate import multiplicative_law, torsion_tower
from app.padic import PAdicConfig, exp_p
from app.rng import SplitMix64

CONFIG = PAdicConfig(5, 8, degree_cap=6, slack=6)
TOWER_CONFIG = PAdicConfig(3, 6, degree_cap=6, slack=6)


@lru_cache(maxsize=None)
def gamma_at(p):
    """The γ datum at p, built once per module."""
    return GammaDatum.build(PAdicConfig(p, 8, degree_cap=6, slack=6))


@pytest.fixture(scope="module")
def gamma():
    return GammaDatum.build(CONFIG)


@pytest.fixture
def rng():
    return SplitMix64(31)


@pytest.fixture(scope="module")
def tower():
    return torsion_tower(multiplicative_law(TOWER_CONFIG), 2)


@pytest.fixture(scope="module")
def units(tower):
    return cyclotomic_unit_tower(tower, 2)


# ---------------------------------------------------------------------------
# γ and ϑ*
# ---------------------------------------------------------------------------

def test_primitive_root():
    assert primitive_root(3) == 2
    assert primitive_root(5) == 2
    assert primitive_root(7) == 3


def test_gamma_datum(gamma):
    assert gamma.primitive_root == 2
    assert gamma.check()


@pytest.mark.parametrize("g0", [4, 5])
def test_gamma_needs_primitive_root(g0):
    with pytest.raises(ValidationError, match="not a primitive root"):
        GammaDatum.build(CONFIG, g0)


def test_theta_evaluation(gamma):
    theta = theta_element(gamma)
    assert eval_character(theta, 0).is_zero()
    assert eval_character(theta, 1) == exp_p(gamma.ring(5)) - 1


@pytest.mark.parametrize("m", [1, 2, 3])
def test_D_star_of_theta_powers(gamma, m):
    assert D_star(theta_element(gamma) ** m, m) == 5 ** m


def test_D_star_order_zero_is_evaluation(gamma, rng):
    F = gamma.random(rng)
    assert D_star(F, 0) == eval_character(F, 0)


class TestDStarErrors:
    """Orders outside the range where D* is defined."""

    cases = {
        "negative": (-1, "non-negative"),
        "order at p": (5, "needs p > 5"),
    }

    def test_rejected(self, gamma):
        theta = theta_element(gamma)
        for name, (m, message) in self.cases.items():
            with pytest.raises(ValidationError, match=message):
                D_star(theta, m)


def check_dertheta_trials(p, m, trials):
    gamma, rng = gamma_at(p), SplitMix64(p * 100 + m)
    for _ in range(trials):
        certificate = verify_dertheta(gamma.random(rng), m)
        assert certificate.passed
        assert certificate.details == {"m": m}


@pytest.mark.parametrize("p", [5, 7])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_verify_dertheta(p, m):
    check_dertheta_trials(p, m, 20)


@pytest.mark.slow
@pytest.mark.parametrize("p", [5, 7])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_verify_dertheta_full_trials(p, m):
    check_dertheta_trials(p, m, 200)


def test_verify_dertheta_order_range(gamma):
    with pytest.raises(ValidationError, match="1..3"):
        verify_dertheta(gamma.constant(1), 4)


def test_verify_dertheta_on_constant(gamma):
    # D*(ϑ*, 1) = p
    assert verify_dertheta(gamma.constant(1), 1)


def test_leibniz(gamma, rng):
    for _ in range(3):
        assert check_leibniz(gamma.random(rng), gamma.random(rng))


def test_character_homomorphism(gamma, rng):
    for s in (0, 1, 7):
        certificate = check_character_homomorphism(gamma.random(rng), gamma.random(rng), s)
        assert certificate.passed
        assert certificate.details == {"s": s}


def test_theta_divides(gamma, rng):
    assert check_theta_divides(theta_element(gamma))
    for _ in range(3):
        assert check_theta_divides(gamma.random(rng))


def test_negative_power_rejected(gamma):
    with pytest.raises(ValidationError, match="non-negative"):
        theta_element(gamma) ** -1


def test_elements_on_other_generators_do_not_mix(gamma):
    other = GammaDatum.build(CONFIG, 3)
    with pytest.raises(ValidationError, match="different branches"):
        theta_element(gamma) + theta_element(other)


# ---------------------------------------------------------------------------
# Group algebra and the ϑ_n congruence
# ---------------------------------------------------------------------------

def test_group_algebra_basis_and_product(gamma):
    one = gamma.ring.one
    x = GroupAlgebraElement.basis(5, 2, 2, one * 3)
    y = GroupAlgebraElement.basis(5, 2, 3, one * 4)
    product = x * y
    assert product.coefficient(6) == 12
    assert product.coefficient(7) is None
    assert (x - x).coefficient(2).is_zero()


def test_group_algebra_reduces_keys(gamma):
    x = GroupAlgebraElement.basis(5, 2, 27, gamma.ring.one)
    assert x.coefficient(2) == 1
    assert x.order == 20
    assert len(x.group()) == 20


def test_group_algebra_rejects_non_units(gamma):
    with pytest.raises(ValidationError, match="not a unit"):
        GroupAlgebraElement.basis(5, 2, 10, gamma.ring.one)


@pytest.mark.parametrize("p, n", [(5, 1), (5, 2), (7, 1)])
def test_theta_congruence_holds(p, n):
    certificate = theta_congruence(n, gamma_at(p))
    assert certificate.passed
    assert certificate.details["residual"] == 0
    assert certificate.details["order"] == (p - 1) * p ** (n - 1)


@pytest.mark.parametrize("p", [5, 7])
def test_theta_congruence_control_fails(p):
    assert not theta_congruence(1, gamma_at(p), control_shift=1).passed


def test_theta_congruence_needs_level(gamma):
    with pytest.raises(ValidationError, match="at least 1"):
        theta_congruence(0, gamma)


def test_theta_congruence_needs_precision():
    small = GammaDatum.build(PAdicConfig(5, 2, degree_cap=2, slack=0))
    with pytest.raises(ValidationError, match="too small"):
        theta_congruence(2, small)


# ---------------------------------------------------------------------------
# Unit towers and ι*
# ---------------------------------------------------------------------------

def test_cyclotomic_units_are_norm_coherent(units):
    assert units.check_norm_coherence()


def test_cyclotomic_units_need_prime_to_p(tower):
    with pytest.raises(ValidationError, match="prime to p"):
        cyclotomic_unit_tower(tower, 3)


def test_unit_tower_rejects_non_principal(tower):
    with pytest.raises(ValidationError, match="principal unit"):
        UnitTowerData(tower, (tower.ring(1).one * 2,))


def test_galois_composition(units):
    assert units.check_galois_composition(2, 4)


def test_iota_star_partials(units):
    result = iota_star(units)
    assert len(result.partials) == 2
    assert len(result.valuations) == 1


@pytest.mark.slow
def test_iota_star_stabilizes_over_four_levels():
    deep = torsion_tower(multiplicative_law(TOWER_CONFIG), 4)
    result = iota_star(cyclotomic_unit_tower(deep, 2))
    assert len(result.partials) == 4
    assert len(result.valuations) == 3
    assert result.is_nondecreasing()


def test_iota_star_level_outside_tower(units):
    with pytest.raises(ValidationError, match="outside the unit tower"):
        iota_star(units, 3)


@pytest.mark.parametrize("exponent", [2, 4])
def test_iota_scaling(units, exponent):
    assert check_iota_scaling(units, exponent)


def test_iota_of_trivial_units(tower):
    ones = UnitTowerData(tower, (tower.ring(1).one, tower.ring(2).one), "trivial")
    assert iota_star(ones).value.is_zero()


def test_is_nondecreasing():
    assert IotaStarResult([], [1, 2, 2]).is_nondecreasing()
    assert not IotaStarResult([], [2, 1]).is_nondecreasing()


def test_iota_w_matches_expected_trace(tower):
    law = tower.law
    g = builtin_dataset("cyclotomic:a=2", tower).series
    assert iota_w(delta_at_zero(g, law), law.ring.one, 1) == expected_trace(g, law, 1)


def test_iota_w_needs_unit_period(tower):
    with pytest.raises(ValidationError, match="period must be a unit"):
        iota_w(tower.law.ring.one, tower.law.ring(3), 1)
