from functools import lru_cache
import logging

import pytest

from app.coleman import (
    ColemanData,
    builtin_dataset,
    check_interpolation,
    check_norm_interpolation,
    check_norm_multiplicative,
    check_trace_stability,
    coleman_norm,
    cyclotomic_series,
    delta,
    delta_at_zero,
    dual_exp,
    expected_trace,
    kernel_points,
    parse_dataset_name,
    trace_delta_level,
)
from app.exceptions import PrecisionError, ValidationError
from app.lubin_tate import multiplicative_law, special_law, torsion_tower
from app.padic import PAdicConfig, PAdicInt
from app.rng import SplitMix64
from app.series import TruncatedSeries

CONFIG = PAdicConfig(3, 6, degree_cap=6, slack=6)


@lru_cache(maxsize=None)
def gm_tower(p, levels):
    """Torsion tower of the multiplicative law at p, shared across tests."""
    return torsion_tower(multiplicative_law(PAdicConfig(p, 6, degree_cap=6, slack=6)), levels)


@pytest.fixture(scope="module")
def gm():
    return multiplicative_law(CONFIG)


@pytest.fixture(scope="module")
def tower(gm):
    return torsion_tower(gm, 2)


@pytest.fixture(scope="module")
def g2(tower):
    return builtin_dataset("cyclotomic:a=2", tower)


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

def test_parse_dataset_name():
    assert parse_dataset_name("cyclotomic:a=2") == ("cyclotomic", 2)
    assert parse_dataset_name("constant:k=5") == ("constant", 5)
    with pytest.raises(ValidationError, match="malformed"):
        parse_dataset_name("cyclotomic")


def test_cyclotomic_series_coefficients(gm):
    # ((1 + Z)^4 - 1)/Z = 4 + 6Z + 4Z^2 + Z^3
    assert [int(c) for c in cyclotomic_series(4, gm).coefficients()] == [4, 6, 4, 1]


class TestDatasetErrors:
    """Dataset names that cannot be built."""

    cases = {
        "a divisible by p": ("cyclotomic:a=3", "prime to p"),
        "non-unit constant": ("constant:k=6", "unit"),
        "non-unit shift": ("tautological:c=3", "unit"),
        "unknown kind": ("elliptic:a=2", "unknown dataset kind"),
    }

    def test_rejected(self, tower):
        for name, (dataset, message) in self.cases.items():
            with pytest.raises(ValidationError, match=message):
                builtin_dataset(dataset, tower)


def test_cyclotomic_needs_multiplicative_law():
    tower = torsion_tower(special_law(CONFIG), 1)
    with pytest.raises(ValidationError, match="multiplicative"):
        builtin_dataset("cyclotomic:a=2", tower)


def test_coleman_data_rejects_non_unit(tower, g2):
    with pytest.raises(ValidationError, match="not a unit"):
        ColemanData(tower, (tower.generator(1),), g2.series)


def test_coleman_data_rejects_wrong_ring(tower, g2):
    with pytest.raises(ValidationError, match="level-1 ring"):
        ColemanData(tower, (g2.betas[1],), g2.series)


# ---------------------------------------------------------------------------
# Interpolation and the norm operator
# ---------------------------------------------------------------------------

def test_cyclotomic_interpolation(g2):
    certificate = check_interpolation(g2)
    assert certificate.passed
    assert [entry["level"] for entry in certificate.details["levels"]] == [1, 2]


def test_betas_are_norm_coherent(g2):
    assert g2.check_norm_coherence()


def test_norm_interpolation(g2):
    assert check_norm_interpolation(g2, 1)


def test_tautological_interpolation(tower):
    assert check_interpolation(builtin_dataset("tautological:c=1", tower))


def test_perturbed_beta_fails(tower, g2):
    betas = (g2.betas[0] + tower.generator(1),) + g2.betas[1:]
    certificate = check_interpolation(ColemanData(tower, betas, g2.series, "perturbed"))
    assert not certificate.passed
    assert certificate.details["levels"][1]["passed"]


def test_kernel_points(gm, tower):
    points = kernel_points(gm, tower.ring(1))
    assert len(points) == 3
    assert points[0].is_zero()
    assert all(gm.multiply_point(3, point).is_zero() for point in points)


@pytest.mark.parametrize("p, a", [(3, 2), (3, 4), (3, 7), (5, 2), (5, 4), (5, 7)])
def test_norm_fixes_cyclotomic_series(p, a):
    tower = gm_tower(p, 1)
    g = builtin_dataset(f"cyclotomic:a={a}", tower).series
    assert coleman_norm(g, tower.law, tower) == g


def test_norm_multiplicative(gm, tower, g2):
    g4 = builtin_dataset("cyclotomic:a=4", tower).series
    assert coleman_norm(g2.series * g4, gm, tower) == coleman_norm(g2.series, gm, tower) * coleman_norm(g4, gm, tower)
    certificate = check_norm_multiplicative(g2.series, g4, gm, tower)
    assert certificate.passed


def test_norm_multiplicative_at_p5():
    tower = gm_tower(5, 1)
    g2, g4 = (builtin_dataset(f"cyclotomic:a={a}", tower).series for a in (2, 4))
    assert check_norm_multiplicative(g2, g4, tower.law, tower)


def test_norm_truncation_is_logged(gm, tower, g2, monkeypatch, caplog):
    exact_div = PAdicInt.exact_div

    def shallow(self, other):
        if other.valuation() >= 3:
            raise PrecisionError("no digits left")
        return exact_div(self, other)

    monkeypatch.setattr(PAdicInt, 'exact_div', shallow)
    with caplog.at_level(logging.WARNING):
        normed = coleman_norm(g2.series, gm, tower)
    assert "norm operator truncated at degree 2" in caplog.text
    assert normed.cap == 2
    assert all(normed[k] == g2.series[k] for k in range(3))


def test_norm_needs_unit_constant(gm, tower):
    with pytest.raises(ValidationError, match="unit constant term"):
        coleman_norm(TruncatedSeries.polynomial(gm.ring, [3, 1]), gm, tower)


# ---------------------------------------------------------------------------
# δ and the normalized traces
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("a", [2, 4, 5])
def test_delta_w_of_cyclotomic_series(gm, a):
    ring = gm.ring
    expected = ring(a - 1) * ring(2).inverse()
    g = cyclotomic_series(a, gm)
    assert delta_at_zero(g, gm) == expected
    assert delta(g, gm)[0] == expected


def test_delta_is_additive(gm):
    ring = gm.ring
    rng = SplitMix64(12)
    for _ in range(3):
        g1 = TruncatedSeries.random(ring, CONFIG.degree_cap, rng, constant=ring.random_unit(rng))
        g2 = TruncatedSeries.random(ring, CONFIG.degree_cap, rng, constant=ring.random_unit(rng))
        assert delta(g1 * g2, gm) == delta(g1, gm) + delta(g2, gm)


def test_delta_of_constant_is_zero(gm):
    assert delta(TruncatedSeries.polynomial(gm.ring, [2]), gm).is_zero()


def test_delta_needs_unit_constant(gm):
    with pytest.raises(ValidationError, match="unit constant term"):
        delta(TruncatedSeries.polynomial(gm.ring, [3, 1]), gm)


def test_expected_trace_value(gm, g2):
    # (1 - 1/3)·(1/2)
    value = expected_trace(g2.series, gm)
    assert value.valuation() == -1
    assert value * 3 == 1


TRACE_GRID = (
    [(3, a, n) for a in (2, 4, 7) for n in (1, 2)]
    + [pytest.param(3, a, 3, marks=pytest.mark.slow) for a in (2, 4, 7)]
    + [(5, a, 1) for a in (2, 4, 7)]
    + [pytest.param(5, a, 2, marks=pytest.mark.slow) for a in (2, 4, 7)]
)


@pytest.mark.parametrize("p, a, n", TRACE_GRID)
def test_trace_at_each_level(p, a, n):
    tower = gm_tower(p, n)
    g = builtin_dataset(f"cyclotomic:a={a}", tower).series
    assert trace_delta_level(g, tower, n) == expected_trace(g, tower.law)


@pytest.mark.slow
def test_trace_stability_over_three_levels():
    tower = gm_tower(3, 3)
    certificate = check_trace_stability(builtin_dataset("cyclotomic:a=4", tower).series, tower)
    assert certificate.passed
    assert [entry["level"] for entry in certificate.details["levels"]] == [1, 2, 3]


def test_trace_level_outside_tower(tower, g2):
    with pytest.raises(ValidationError, match="outside the tower"):
        trace_delta_level(g2.series, tower, 3)


def test_trace_stability_certificate(tower, g2):
    certificate = check_trace_stability(g2.series, tower)
    assert certificate.passed
    assert [entry["level"] for entry in certificate.details["levels"]] == [1, 2]


def test_dual_exp_is_negated_trace(gm, g2):
    assert (dual_exp(g2.series, gm, 1) + expected_trace(g2.series, gm, 1)).is_zero()


def test_dual_exp_needs_unit_root(gm, g2):
    with pytest.raises(ValidationError, match="unit root"):
        dual_exp(g2.series, gm, 3)
