import pytest

from app.rng import SplitMix64


def test_same_seed_same_stream():
    a, b = SplitMix64(42), SplitMix64(42)
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]


def test_different_seeds_differ():
    assert SplitMix64(1).next_u64() != SplitMix64(2).next_u64()


def test_outputs_are_64_bit():
    rng = SplitMix64(0)
    assert all(0 <= rng.next_u64() < 1 << 64 for _ in range(100))


def test_randrange_bounds():
    rng = SplitMix64(3)
    draws = [rng.randrange(3, 10) for _ in range(200)]
    assert min(draws) >= 3 and max(draws) < 10
    assert set(draws) == set(range(3, 10))


def test_randrange_single_argument():
    rng = SplitMix64(3)
    assert all(0 <= rng.randrange(4) < 4 for _ in range(50))


def test_randrange_empty():
    with pytest.raises(ValueError, match="empty range"):
        SplitMix64(0).randrange(5, 5)


def test_randint_inclusive():
    rng = SplitMix64(5)
    assert {rng.randint(1, 2) for _ in range(100)} == {1, 2}


def test_random_unit_interval():
    rng = SplitMix64(9)
    assert all(0.0 <= rng.random() < 1.0 for _ in range(100))


def test_randbits_width():
    rng = SplitMix64(9)
    assert all(rng.randbits(100) < 1 << 100 for _ in range(20))


def test_choice():
    rng = SplitMix64(9)
    assert rng.choice(["a", "b", "c"]) in {"a", "b", "c"}


def test_fork_is_deterministic_and_label_dependent():
    base = SplitMix64(20240601)
    first = base.fork("coleman").next_u64()
    assert SplitMix64(20240601).fork("coleman").next_u64() == first
    assert SplitMix64(20240601).fork("weil").next_u64() != first


def test_fork_leaves_parent_untouched():
    base = SplitMix64(8)
    state = base.state
    base.fork("x")
    assert base.state == state
