import pytest

from app.exceptions import ValidationError
from app.rng import SplitMix64
from app.weil import (
    DEFAULT_MAX_SIZE,
    CMEndomorphism,
    EllipticCurve,
    FiniteField,
    check_alternation,
    check_bilinearity,
    check_galois_equivariance,
    check_nondegeneracy,
    cm_adjointness,
    count_points,
    find_torsion_field,
    frobenius_trace,
    level_compatibility,
    load_fixture,
    require_full_torsion,
    root_of_unity_order,
    save_fixture,
    torsion_setup,
)


@pytest.fixture
def f5():
    return FiniteField(5, (0, 1))


@pytest.fixture
def curve5(f5):
    # y^2 = x^3 - x over F_5
    return EllipticCurve.over(f5, -1, 0)


@pytest.fixture
def points5(curve5):
    affine = [(0, 0), (1, 0), (4, 0), (2, 1), (2, 4), (3, 2), (3, 3)]
    return [curve5.infinity] + [curve5.point(x, y) for x, y in affine]


@pytest.fixture(scope="module")
def setup5():
    return find_torsion_field(5, rng=SplitMix64(5))


@pytest.fixture(scope="module")
def setup9():
    return find_torsion_field(9, rng=SplitMix64(9))


# ---------------------------------------------------------------------------
# Finite fields
# ---------------------------------------------------------------------------

def test_field_sizes():
    f25 = FiniteField.build(5, 2)
    assert f25.degree == 2
    assert f25.order == 25
    assert len(list(f25.elements())) == 25


def test_multiplicative_group_order():
    f25 = FiniteField.build(5, 2)
    assert all(x ** 24 == 1 for x in f25.elements() if not x.is_zero())
    assert all(x * x.inverse() == 1 for x in f25.elements() if not x.is_zero())


def test_sqrt(f5):
    root = f5.sqrt(f5(4))
    assert root * root == 4
    assert f5.sqrt(f5(2)) is None
    assert f5.sqrt(f5.zero).is_zero()


def test_sqrt_in_extension():
    f25 = FiniteField.build(5, 2)
    for x in f25.elements():
        root = f25.sqrt(x * x)
        assert root * root == x * x


def test_frobenius_fixes_prime_field(f5):
    assert all(x.frobenius() == x for x in f5.elements())


def test_inverse_of_zero(f5):
    with pytest.raises(ZeroDivisionError):
        f5.zero.inverse()


def test_root_of_unity_order(f5):
    assert root_of_unity_order(f5.one, 5) == 1
    assert root_of_unity_order(f5(4), 2) == 2
    with pytest.raises(ValidationError, match="root of unity"):
        root_of_unity_order(f5(2), 2)


class TestFieldErrors:
    """Moduli that do not define a field."""

    cases = {
        "composite characteristic": (4, (0, 1), "not prime"),
        "not monic": (5, (0, 2), "monic"),
        "reducible": (5, (1, 0, 1), "reducible"),
    }

    def test_rejected(self):
        for name, (ell, modulus, message) in self.cases.items():
            with pytest.raises(ValidationError, match=message):
                FiniteField(ell, modulus)


def test_foreign_element_rejected(f5):
    f7 = FiniteField(7, (0, 1))
    with pytest.raises(ValidationError, match="another field"):
        f5(f7.one)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

def test_point_count_over_f5(curve5):
    assert frobenius_trace(5, -1, 0) == -2
    assert curve5.count_points() == 8
    assert count_points(5, -1, 0, 2) == 32


def test_curve_rejects_small_characteristic():
    with pytest.raises(ValidationError, match="exceed 3"):
        EllipticCurve.over(FiniteField(3, (0, 1)), -1, 0)


def test_curve_rejects_singular(f5):
    with pytest.raises(ValidationError, match="singular"):
        EllipticCurve.over(f5, 0, 0)


def test_point_must_lie_on_curve(curve5):
    with pytest.raises(ValidationError, match="not on the curve"):
        curve5.point(2, 2)


def test_group_law(curve5, points5):
    P = curve5.point(2, 1)
    assert P + P == curve5.point(0, 0)
    assert (P * 4).is_infinity
    assert P.order(8) == 4
    assert P - P == curve5.infinity
    assert all((R * 8).is_infinity for R in points5)


def test_order_needs_a_multiple(curve5):
    with pytest.raises(ValidationError, match="does not kill"):
        curve5.point(2, 1).order(2)


def test_random_points_lie_on_curve(curve5):
    rng = SplitMix64(3)
    for _ in range(10):
        R = curve5.random_point(rng)
        assert R.y * R.y == curve5.rhs(R.x)


# ---------------------------------------------------------------------------
# CM endomorphisms
# ---------------------------------------------------------------------------

def test_iota_squares_to_minus_one(curve5, points5):
    assert CMEndomorphism.on(curve5, 0, 1).check_iota_square(points5)


@pytest.mark.parametrize("a, b", [(2, 1), (3, 4), (1, 0)])
def test_dual_composition_is_norm(curve5, points5, a, b):
    certificate = CMEndomorphism.on(curve5, a, b).check_norm(points5)
    assert certificate.passed
    assert certificate.details["norm"] == a * a + b * b


def test_cm_needs_b_zero(f5):
    with pytest.raises(ValidationError, match="x\\^3 \\+ Ax"):
        CMEndomorphism.on(EllipticCurve.over(f5, 1, 1), 1, 1)


def test_cm_needs_sqrt_minus_one():
    curve = EllipticCurve.over(FiniteField(7, (0, 1)), -1, 0)
    with pytest.raises(ValidationError, match="square root of -1"):
        CMEndomorphism.on(curve, 0, 1)


# ---------------------------------------------------------------------------
# Torsion and the pairing
# ---------------------------------------------------------------------------

def test_five_torsion_field(setup5):
    assert setup5.curve.field.ell == 19
    assert len(setup5.points()) == 25
    assert all((R * 5).is_infinity for R in setup5.points())


def test_pairing_properties(setup5):
    rng = SplitMix64(17)
    assert check_alternation(setup5)
    assert check_bilinearity(setup5, rng, 5)
    assert check_galois_equivariance(setup5, rng, 5)
    certificate = check_nondegeneracy(setup5)
    assert certificate.passed
    assert certificate.details["order"] == 5


@pytest.mark.parametrize("a, b", [(2, 1), (3, 4)])
def test_cm_adjointness(setup5, a, b):
    grid = setup5.points()
    pairs = [(P, Q) for P in grid[:6] for Q in grid[:6]]
    certificate = cm_adjointness(setup5, CMEndomorphism.on(setup5.curve, a, b), pairs)
    assert certificate.passed
    assert certificate.details["pairs"] == 36


def test_pairing_needs_torsion_arguments(setup5):
    with pytest.raises(ValidationError, match="4-torsion"):
        setup5.pairing(setup5.P, setup5.Q, 4)


def test_require_full_torsion(curve5):
    with pytest.raises(ValidationError, match="is not rational"):
        require_full_torsion(curve5, 5, SplitMix64(1))


def test_nine_torsion_subgroup(setup9):
    assert setup9.curve.field.ell == 71
    assert len(setup9.subgroup(3)) == 9


def test_level_compatibility(setup9):
    certificate = level_compatibility(setup9, CMEndomorphism.on(setup9.curve, 3, 0), 1)
    assert certificate.passed
    assert certificate.details["p"] == 3
    assert certificate.details["pairs"] == 9 * 81


def test_level_compatibility_control(setup9):
    certificate = level_compatibility(setup9, CMEndomorphism.on(setup9.curve, 3, 3), 1)
    assert not certificate.passed


# ---------------------------------------------------------------------------
# Fixtures on disk
# ---------------------------------------------------------------------------

def test_fixture_round_trip(setup5, tmp_path):
    path = tmp_path / "weil.env"
    save_fixture(path, setup5, 2, DEFAULT_MAX_SIZE)
    loaded = load_fixture(path, 5)
    assert loaded.curve == setup5.curve
    assert (loaded.P, loaded.Q) == (setup5.P, setup5.Q)
    assert load_fixture(path, 9) is None


def test_missing_fixture(tmp_path):
    assert load_fixture(tmp_path / "absent.env", 5) is None


def test_torsion_setup_prefers_fixture(setup5, tmp_path):
    path = tmp_path / "weil.env"
    save_fixture(path, setup5, 2, DEFAULT_MAX_SIZE)
    assert torsion_setup(5, path).P == setup5.P
