import math

import numpy as np
import pytest

from lpbounds import matcore
from lpbounds.errors import EigenvalueOutOfUnitInterval
from lpbounds.measure import DensityOperator, Povm, joint_overlap, lpi_check
from lpbounds.metrics import BUILTIN_NAMES
from lpbounds.randgen import (
    RngStream,
    haar_unitary,
    random_mixed_states,
    random_povm,
    random_pure_states,
    random_pvm,
)
from lpbounds.verify import (
    classical_lpi,
    dilate_element,
    direct_uncertainties,
    embed_povm,
    embed_state,
    embedded_uncertainties,
    oracle_max_state_prob,
    oracle_overlap,
    purified_uncertainties,
    purify,
    sampled_max_state_prob,
)

from conftest import H2, basis_pvm, random_psd


# --------------------------------------------------------------------------
# purification


def test_purify_pure_input():
    pure = purify(np.diag([1.0, 0.0]))
    np.testing.assert_allclose(np.abs(pure.vector), [1, 0, 0, 0], atol=1e-15)


def test_purify_maximally_mixed():
    pure = purify(np.eye(2) / 2)
    np.testing.assert_allclose(pure.reduced(), np.eye(2) / 2, atol=1e-15)
    assert np.linalg.norm(pure.vector) == pytest.approx(1, abs=1e-12)


def test_purify_round_trip():
    for rho in random_mixed_states(3, 50, RngStream(1)):
        pure = purify(DensityOperator(rho))
        assert (pure.dim_system, pure.dim_aux) == (3, 3)
        assert np.linalg.norm(pure.vector) == pytest.approx(1, abs=1e-12)
        np.testing.assert_allclose(pure.reduced(), rho, atol=1e-10)


# --------------------------------------------------------------------------
# dilation into projectors


def test_dilate_projector_has_no_cross_block():
    e, c, s = dilate_element(np.diag([1.0, 0.0]))
    np.testing.assert_allclose(s, 0, atol=1e-15)
    np.testing.assert_allclose(e + c, np.eye(2), atol=1e-15)


def test_dilate_half_identity():
    p = embed_povm(Povm([np.eye(2) / 2] * 2), Povm([np.eye(2) / 2] * 2))
    blk = p.p_blocks[0]
    i2, z = np.eye(2), np.zeros((2, 2))
    np.testing.assert_allclose(blk, 0.5 * np.block([[i2, i2, z], [i2, i2, z], [z, z, z]]), atol=1e-15)
    assert p.idempotency_deviation() <= 1e-14


def test_dilate_rejects_large_eigenvalue():
    with pytest.raises(EigenvalueOutOfUnitInterval):
        dilate_element(np.diag([1.0 + 1e-6, 0.2]))


def test_dilate_clamps_roundoff():
    e, c, s = dilate_element(np.diag([1.0 + 5e-11, 0.3]))
    assert np.max(np.abs(e)) <= 1.0


def test_embedding_random_pair():
    rng = RngStream(2)
    a, b = random_povm(3, 4, rng), random_povm(3, 5, rng)
    pair = embed_povm(a, b)
    assert pair.dim_extended == 9
    assert pair.idempotency_deviation() <= 1e-8
    for psi in random_pure_states(3, 100, rng):
        phi = embed_state(psi)
        for blocks, els in ((pair.p_blocks, a.elements), (pair.q_blocks, b.elements)):
            lhs = np.einsum("i,kij,j->k", phi.conj(), blocks, phi).real
            rhs = np.einsum("i,kij,j->k", psi.conj(), els, psi).real
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_three_paths_agree():
    rng = RngStream(3)
    a, b = random_povm(3, 3, rng), random_povm(3, 4, rng)
    pair = embed_povm(a, b)
    for psi in random_pure_states(3, 30, rng):
        rho = np.outer(psi, psi.conj())
        for k in BUILTIN_NAMES:
            direct = direct_uncertainties(k, a, b, rho)
            np.testing.assert_allclose(embedded_uncertainties(k, pair, psi), direct, atol=1e-9)
            np.testing.assert_allclose(purified_uncertainties(k, a, b, rho), direct, atol=1e-9)


def test_norm_lifting():
    rng = RngStream(4)
    a, b = random_povm(3, 3, rng), random_povm(3, 3, rng)
    for sa in a.sqrt_elements:
        for sb in b.sqrt_elements:
            m = sa @ sb
            lifted = matcore.kron(m, np.eye(3))
            assert matcore.op_norm(lifted) == pytest.approx(matcore.op_norm(m), abs=1e-10)


def test_truncated_projector_sets():
    # projector sets that do not resolve the identity still obey the bound on pure states
    rng = RngStream(5)
    for _ in range(100):
        a = Povm(random_pvm(4, rng).elements[:2], check=False)
        b = Povm(random_pvm(4, rng).elements[1:], check=False)
        psi = random_pure_states(4, 1, rng)[0]
        for k in BUILTIN_NAMES:
            assert lpi_check(k, a, b, np.outer(psi, psi.conj())).slack >= -1e-9


def test_cauchy_schwarz_chain():
    rng = RngStream(6)
    a, b = random_povm(3, 3, rng), random_povm(3, 4, rng)
    pair = embed_povm(a, b)
    p, q = pair.as_povms()
    c_pq = joint_overlap(p, q)[0]
    for psi in random_pure_states(3, 50, rng):
        phi = embed_state(psi)
        for pi in pair.p_blocks:
            for qj in pair.q_blocks:
                lhs = abs(phi.conj() @ pi @ qj @ phi)
                rhs = np.linalg.norm(pi @ phi) * np.linalg.norm(qj @ phi) * c_pq
                assert lhs <= rhs + 1e-9


# --------------------------------------------------------------------------
# oracles


def test_oracle_max_state_prob_examples():
    assert oracle_max_state_prob(np.diag([1.0, 0.0])) == pytest.approx(1.0)
    assert oracle_max_state_prob(np.diag([0.3, 0.7])) == pytest.approx(0.7, abs=1e-15)


def test_sampled_oracle_approaches_from_below():
    rng = RngStream(7)
    el = random_povm(2, 3, rng).elements[0]
    exact = oracle_max_state_prob(el)
    sampled = sampled_max_state_prob(el, 100_000, RngStream(7, 1))
    assert sampled <= exact + 1e-12
    assert exact - sampled <= 1e-3


def test_sampled_oracle_matches_numpy():
    el = random_psd(RngStream(8), 3)
    el /= np.linalg.eigvalsh(el)[-1]
    assert oracle_max_state_prob(el) == pytest.approx(1.0, abs=1e-12)


def test_oracle_overlap_mub():
    a, b = basis_pvm(np.eye(2)), basis_pvm(H2)
    val = oracle_overlap(a, b, 100_000, RngStream(9))
    assert abs(val - 1 / math.sqrt(2)) <= 5e-3
    assert val <= 1 / math.sqrt(2) + 1e-10


def test_oracle_overlap_identical():
    p = random_pvm(3, RngStream(10))
    assert abs(oracle_overlap(p, p, 100_000, RngStream(11)) - 1.0) <= 5e-3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_oracle_overlap_brackets_exact(n):
    rng = RngStream(12, n)
    for _ in range(3):
        a, b = random_povm(n, 3, rng), random_povm(n, 4, rng)
        exact = joint_overlap(a, b)[0]
        val = oracle_overlap(a, b, 100_000, rng)
        assert exact - 5e-3 <= val <= exact + 1e-10


def test_oracle_overlap_without_refinement_is_lower_bound():
    rng = RngStream(13)
    a, b = random_povm(3, 3, rng), random_povm(3, 3, rng)
    raw = oracle_overlap(a, b, 2000, RngStream(14), refine_steps=0)
    assert raw <= joint_overlap(a, b)[0] + 1e-10


# --------------------------------------------------------------------------
# textbook inequality


def test_classical_lpi_mub():
    lhs, rhs = classical_lpi(np.eye(2), H2, np.array([1.0, 0.0]))
    assert lhs == pytest.approx(math.pi / 4, abs=1e-12)
    assert rhs == pytest.approx(math.pi / 4, abs=1e-12)


def test_classical_lpi_matches_pipeline():
    rng = RngStream(15)
    for _ in range(100):
        ua, ub = haar_unitary(3, rng), haar_unitary(3, rng)
        psi = random_pure_states(3, 1, rng)[0]
        lhs, rhs = classical_lpi(ua, ub, psi)
        rec = lpi_check("wootters", basis_pvm(ua), basis_pvm(ub), np.outer(psi, psi.conj()))
        assert rec.u_sum == pytest.approx(lhs, abs=1e-10)
        assert rec.bound == pytest.approx(rhs, abs=1e-10)
        assert lhs >= rhs - 1e-10
