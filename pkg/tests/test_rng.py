import numpy as np

from pqdm.rng import SplitMix64, random_density, random_unitary


def test_reference_first_output():
    assert SplitMix64(1234567).next_u64() == 6457827717110365317


def test_same_seed_same_stream():
    a, b = SplitMix64(99), SplitMix64(99)
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]
    assert SplitMix64(1).next_u64() != SplitMix64(2).next_u64()


def test_uniform_range_and_mean():
    r = SplitMix64(5)
    xs = np.array([r.uniform() for _ in range(20000)])
    assert xs.min() >= 0 and xs.max() < 1
    assert abs(xs.mean() - 0.5) < 0.01


def test_normal_moments():
    r = SplitMix64(6)
    xs = np.array([r.normal() for _ in range(20000)])
    assert abs(xs.mean()) < 0.03
    assert abs(xs.var() - 1) < 0.05


def test_integers_in_range():
    r = SplitMix64(7)
    xs = {r.integers(2, 5) for _ in range(200)}
    assert xs == {2, 3, 4}


def test_random_unitary_and_density():
    r = SplitMix64(8)
    u = random_unitary(r, 4)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    rho = random_density(r, 3, rank=1)
    assert np.trace(rho).real == 1.0 or abs(np.trace(rho).real - 1) < 1e-14
    assert np.sum(np.linalg.eigvalsh(rho) > 1e-12) == 1
