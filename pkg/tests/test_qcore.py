import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pqdm.qcore import (BasisPair, DensityMatrix, Ket, OperatorMatrix, apply, basis_ket, fidelity,
                        identity, is_unitary, ket_new, kron, partial_trace, permute_subsystems,
                        project, trace_distance)
from pqdm.rng import SplitMix64, random_density, random_ket, random_unitary

seeds = st.integers(min_value=0, max_value=2**63)
dims_lists = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=4)


def _ket(rng, dims):
    return Ket(random_ket(rng, math.prod(dims)), tuple(dims))


def _dm(rng, dims):
    return DensityMatrix(random_density(rng, math.prod(dims)), tuple(dims))


def test_ket_new_normalizes():
    k = ket_new([3, 4j])
    assert np.allclose(k.amplitudes, [0.6, 0.8j])
    assert k.dims == (2,)


def test_ket_new_rejects_zero_and_bad_dims():
    with pytest.raises(ValueError):
        ket_new([0, 0])
    with pytest.raises(ValueError):
        ket_new([1, 0, 0], dims=(2, 2))


def test_ket_rejects_unnormalized():
    with pytest.raises(ValueError):
        Ket(np.array([1.0, 1.0]), (2,))
    assert Ket.unnormalized([1.0, 1.0], (2,)).weight == pytest.approx(2.0)


def test_kets_are_immutable():
    k = basis_ket(0, 2)
    with pytest.raises(ValueError):
        k.amplitudes[0] = 2


def test_kron_ordering_is_mixed_radix():
    a, b = basis_ket(1, 2), basis_ket(2, 3)
    ab = kron(a, b)
    assert ab.dims == (2, 3)
    assert ab.amplitudes[1 * 3 + 2] == 1


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]), (2,))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]), (2,))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.5]), (2,), weight=0.3)
    assert DensityMatrix(np.diag([0.1, 0.2]), (2,)).weight == pytest.approx(0.3)


def test_operator_unitary_flag_checked():
    with pytest.raises(ValueError):
        OperatorMatrix(np.diag([1.0, 2.0]), (2,), unitary=True)
    assert identity((2, 3)).dim == 6


def test_partial_trace_of_product():
    rng = SplitMix64(3)
    a, b = _dm(rng, (2,)), _dm(rng, (3,))
    ab = kron(a, b)
    assert np.allclose(partial_trace(ab, [0]).entries, a.entries, atol=1e-14)
    assert np.allclose(partial_trace(ab, [1]).entries, b.entries, atol=1e-14)


def test_partial_trace_bad_keep():
    rho = basis_ket(0, 4).density_matrix()
    with pytest.raises(ValueError):
        partial_trace(rho, [])
    with pytest.raises(ValueError):
        partial_trace(rho, [3])


def test_project_bell_state():
    bell = ket_new([1, 0, 0, 1], (2, 2))
    branch, prob = project(bell, 0, basis_ket(1, 2))
    assert prob == pytest.approx(0.5)
    assert branch.subnormalized
    assert np.allclose(branch.amplitudes, [0, 1 / math.sqrt(2)])
    kept, _ = project(bell, 0, basis_ket(1, 2), keep=True)
    assert kept.dims == (2, 2)
    assert np.allclose(kept.amplitudes, [0, 0, 0, 1 / math.sqrt(2)])


def test_project_dimension_errors():
    psi = basis_ket(0, 4)
    with pytest.raises(ValueError):
        project(Ket(psi.amplitudes, (2, 2)), 2, basis_ket(0, 2))
    with pytest.raises(ValueError):
        project(Ket(psi.amplitudes, (2, 2)), 0, basis_ket(0, 3))


def test_apply_acts_on_named_subsystem():
    x = OperatorMatrix(np.array([[0, 1], [1, 0]]), (2,), unitary=True)
    psi = kron(basis_ket(0, 2), basis_ket(0, 3))
    out = apply(x, Ket(psi.amplitudes, (2, 3)), [0])
    assert np.allclose(out.amplitudes, kron(basis_ket(1, 2), basis_ket(0, 3)).amplitudes)


def test_apply_target_order_matters():
    cnot = np.eye(4)[[0, 1, 3, 2]]
    op = OperatorMatrix(cnot, (2, 2), unitary=True)
    psi = kron(basis_ket(0, 2), basis_ket(1, 2))
    # control on subsystem 1 (|1>), target subsystem 0
    out = apply(op, psi, [1, 0])
    assert np.allclose(out.amplitudes, kron(basis_ket(1, 2), basis_ket(1, 2)).amplitudes)
    with pytest.raises(ValueError):
        apply(op, psi, [0, 0])


def test_trace_distance_known_value():
    a = basis_ket(0, 2).density_matrix()
    b = ket_new([1, 1]).density_matrix()
    assert trace_distance(a, b) == pytest.approx(1 / math.sqrt(2), abs=1e-14)
    with pytest.raises(ValueError):
        trace_distance(a, basis_ket(0, 3).density_matrix())


def test_basis_pair_reference_and_orthogonality():
    b0 = BasisPair(0.0)
    assert np.allclose(b0.psi.amplitudes, [1, 0])
    assert np.allclose(b0.psi_bar.amplitudes, [0, 1])
    for theta in np.linspace(0.01, math.pi, 9):
        b = BasisPair(theta)
        assert abs(b.psi.inner(b.psi_bar)) < 1e-15


@settings(max_examples=60, deadline=None)
@given(seeds, dims_lists)
def test_partial_trace_preserves_trace_and_psd(seed, dims):
    rng = SplitMix64(seed)
    rho = _dm(rng, dims)
    keep = [i for i in range(len(dims)) if rng.uniform() < 0.5] or [0]
    red = partial_trace(rho, keep)
    assert abs(np.trace(red.entries).real - 1.0) < 1e-12
    assert red.eigenvalues()[0] > -1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, dims_lists)
def test_permutation_roundtrip(seed, dims):
    rng = SplitMix64(seed)
    psi = _ket(rng, dims)
    order = list(range(len(dims)))
    for i in range(len(order) - 1, 0, -1):
        j = rng.integers(0, i + 1)
        order[i], order[j] = order[j], order[i]
    inverse = list(np.argsort(order))
    back = permute_subsystems(permute_subsystems(psi, order), inverse)
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-15)
    rho = psi.density_matrix()
    assert np.allclose(permute_subsystems(rho, order).entries,
                       permute_subsystems(psi, order).density_matrix().entries, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=6))
def test_unitaries_preserve_norm(seed, d):
    rng = SplitMix64(seed)
    u = random_unitary(rng, d)
    assert is_unitary(u, 1e-12)
    psi = Ket(random_ket(rng, d), (d,))
    out = apply(OperatorMatrix(u, (d,), unitary=True), psi, [0])
    assert abs(out.weight - 1.0) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=3))
def test_local_unitary_does_not_change_other_marginal(seed, da, db):
    rng = SplitMix64(seed)
    psi = _ket(rng, (da, db))
    u = OperatorMatrix(random_unitary(rng, da), (da,), unitary=True)
    before = partial_trace(psi.density_matrix(), [1])
    after = partial_trace(apply(u, psi, [0]).density_matrix(), [1])
    assert trace_distance(before, after) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=5))
def test_trace_distance_is_a_metric(seed, d):
    rng = SplitMix64(seed)
    a, b, c = (_dm(rng, (d,)) for _ in range(3))
    dab = trace_distance(a, b)
    assert 0 <= dab <= 1 + 1e-12
    assert trace_distance(a, a) < 1e-12
    assert abs(dab - trace_distance(b, a)) < 1e-12
    assert trace_distance(a, c) <= dab + trace_distance(b, c) + 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=5))
def test_fidelity_bounds_and_phase(seed, d):
    rng = SplitMix64(seed)
    a, b = _ket(rng, (d,)), _ket(rng, (d,))
    f = fidelity(a, b)
    assert -1e-15 <= f <= 1 + 1e-12
    phased = Ket(np.exp(0.7j) * a.amplitudes, a.dims)
    assert fidelity(a, phased) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_projection_probabilities_sum_to_one(seed):
    rng = SplitMix64(seed)
    psi = _ket(rng, (2, 3, 2))
    total = sum(project(psi, 1, basis_ket(j, 3))[1] for j in range(3))
    assert total == pytest.approx(1.0, abs=1e-12)
