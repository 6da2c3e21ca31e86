import math

import numpy as np
import pytest

import oracles
from pqdm.bounds import (BipartiteEnsemble, check_bound, closed_form_overlap, deleted_state,
                         ensemble_state, failure_state, zeta)
from pqdm.instances import equiangular_state_set, random_state_set
from pqdm.machine import (MachineSpec, StateSet, basis_pair_states, max_uniform_probability,
                          synthesize, two_state_set)
from pqdm.qcore import BasisPair, Ket, basis_ket, ket_new
from pqdm.rng import SplitMix64


def _setup(states, p=None):
    p = max_uniform_probability(states) if p is None else p
    m = synthesize(MachineSpec.uniform(states, p))
    return BipartiteEnsemble.with_computational_alice(states), m


def test_orthogonal_perfect_machine_saturates():
    e, m = _setup(basis_pair_states(BasisPair(0)), 1.0)
    (rep,) = check_bound(e, m)
    assert rep.lhs == pytest.approx(1.0)
    assert rep.rhs == pytest.approx(1.0, abs=1e-12)
    assert rep.slack == pytest.approx(0.0, abs=1e-12)
    assert rep.satisfied


def test_two_state_frozen_slack():
    # p* = (1 - s)^2 (1 + s) / (1 + s^2); the rhs evaluates to 1 + s for N = 2
    s = 0.3
    e, m = _setup(two_state_set(s))
    (rep,) = check_bound(e, m)
    pstar = oracles.two_state_max_probability_closed_form(s)
    assert rep.lhs == pytest.approx(pstar, abs=1e-8)
    assert rep.rhs == pytest.approx(1 + s, abs=1e-9)
    assert rep.slack == pytest.approx(1.3 - 0.5844036697, abs=1e-8)


def test_zeta_norms():
    e, m = _setup(two_state_set(0.4))
    xi = deleted_state(e, m)
    assert xi.dims == (2, 2, 2, 2, 4)
    for i in range(2):
        assert zeta(xi, e, i).weight == pytest.approx(1 / 4, abs=1e-12)
    with pytest.raises(IndexError):
        zeta(xi, e, 2)


def test_identity_against_closed_form():
    rng = SplitMix64(11)
    for n in (2, 3):
        states = random_state_set(rng, n, n)
        e, m = _setup(states)
        xi = deleted_state(e, m)
        for i in range(n):
            for j in range(n):
                sim = n * n * zeta(xi, e, i).inner(zeta(xi, e, j))
                assert abs(sim - closed_form_overlap(m, i, j)) < 1e-9


def test_failure_state_normalized():
    e, m = _setup(two_state_set(0.2), 0.5)
    for i in range(2):
        assert np.linalg.norm(failure_state(m, i)) == pytest.approx(1.0)


def test_ensemble_state_normalized_and_rejects_dependent():
    e = BipartiteEnsemble.with_computational_alice(equiangular_state_set(3, 0.2))
    assert ensemble_state(e).weight == pytest.approx(1.0)
    dep = StateSet((ket_new([1, 0]), ket_new([0, 1]), ket_new([1, 1])))
    with pytest.raises(ValueError):
        ensemble_state(BipartiteEnsemble.with_computational_alice(dep))


def test_ensemble_validation():
    states = two_state_set(0.3)
    with pytest.raises(ValueError):
        BipartiteEnsemble((basis_ket(0, 2),), states)
    with pytest.raises(ValueError):
        BipartiteEnsemble((basis_ket(0, 2), basis_ket(0, 2)), states)
    with pytest.raises(ValueError):
        BipartiteEnsemble((basis_ket(0, 2),), StateSet((basis_ket(0, 2),)))
    # a non-computational orthonormal Alice basis is accepted
    a = BasisPair(0.7).vectors
    BipartiteEnsemble(a, states)


def test_rotated_alice_basis_gives_same_reports():
    states = two_state_set(0.5)
    _, m = _setup(states)
    e1 = BipartiteEnsemble.with_computational_alice(states)
    e2 = BipartiteEnsemble(BasisPair(0.7).vectors, states)
    r1, r2 = check_bound(e1, m)[0], check_bound(e2, m)[0]
    assert r1.rhs == pytest.approx(r2.rhs, abs=1e-12)


def test_machine_must_match_ensemble():
    _, m = _setup(two_state_set(0.5))
    e = BipartiteEnsemble.with_computational_alice(two_state_set(0.4))
    with pytest.raises(ValueError):
        check_bound(e, m)


def test_degenerate_pair_raises():
    v = basis_ket(0, 2)
    s = StateSet((v, Ket(np.exp(0.3j) * v.amplitudes, (2,))))
    states = StateSet(s.states)
    e = BipartiteEnsemble.with_computational_alice(states)
    _, m = _setup(basis_pair_states(BasisPair(0)), 1.0)
    with pytest.raises(ValueError, match="degenerate"):
        check_bound(e, m)


def test_bound_holds_on_random_sample():
    rng = SplitMix64(5)
    for trial in range(30):
        n = 2 + trial % 2
        e, m = _setup(random_state_set(rng, n, n))
        for rep in check_bound(e, m):
            assert rep.slack >= -1e-9
            assert math.isfinite(rep.rhs)
