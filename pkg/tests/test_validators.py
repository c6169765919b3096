import pytest
from app.exceptions import ValidationError
from app.input_validators import InputValidator

# Test cases for InputValidator.validate_int

def test_validate_int_from_string():
    assert InputValidator.validate_int("seed", "42") == 42

def test_validate_int_trimmed_string():
    assert InputValidator.validate_int("seed", "  7  ") == 7

def test_validate_int_from_int():
    assert InputValidator.validate_int("seed", 3) == 3

def test_validate_int_not_a_number():
    with pytest.raises(ValidationError, match="seed must be an integer"):
        InputValidator.validate_int("seed", "abc")

def test_validate_int_below_minimum():
    with pytest.raises(ValidationError, match="trials must be at least 1, got 0"):
        InputValidator.validate_int("trials", "0", minimum=1)

# Test cases for InputValidator.validate_prime

def test_validate_prime():
    assert InputValidator.validate_prime("7") == 7

@pytest.mark.parametrize("value", ["2", "9", "1", "-5"])
def test_validate_prime_rejects(value):
    with pytest.raises(ValidationError, match="odd prime"):
        InputValidator.validate_prime(value)

# Test cases for InputValidator.validate_suites

def test_validate_suites_comma_list():
    assert InputValidator.validate_suites("padic, Series,,weil") == ["padic", "series", "weil"]

def test_validate_suites_list():
    assert InputValidator.validate_suites(["trace-stability", " coleman "]) == ["trace-stability", "coleman"]

def test_validate_suites_empty():
    assert InputValidator.validate_suites("") == []
    assert InputValidator.validate_suites(None) == []

def test_validate_suites_malformed():
    with pytest.raises(ValidationError, match="malformed suite name"):
        InputValidator.validate_suites("padic,trace_stability")

# Test cases for InputValidator.validate_levels

def test_validate_levels_range():
    assert InputValidator.validate_levels("1-3") == [1, 2, 3]

def test_validate_levels_list_is_sorted_and_unique():
    assert InputValidator.validate_levels("3,1,3") == [1, 3]

def test_validate_levels_int():
    assert InputValidator.validate_levels(2) == [1, 2]

def test_validate_levels_zero():
    with pytest.raises(ValidationError, match="levels must be positive"):
        InputValidator.validate_levels("0,1")

def test_validate_levels_empty():
    with pytest.raises(ValidationError, match="levels must be positive"):
        InputValidator.validate_levels("")

def test_validate_levels_not_a_number():
    with pytest.raises(ValidationError, match="levels must be an integer"):
        InputValidator.validate_levels("1,x")
