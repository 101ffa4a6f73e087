"""Pauli-channel algebra: eigenvalues, twirl projections, bounds."""

import numpy as np
import pytest

from subrb.channels import (
    VARIANT_CNOT_L3,
    VARIANT_CNOT_L12,
    VARIANT_REAL,
    BlockChannel,
    DenseChi,
    PauliChannel,
    asymptotic_lambdas,
    average_infidelity,
    block_eigenvalue,
    closed_form_lambdas,
    dense_group_twirl,
    dense_pauli_twirl,
    depolarizing_lambda,
    eigenvalue_table,
    infidelity_bounds,
    pauli_eigenvalue,
    twirl_to_blocks,
    worst_case_factor,
)
from subrb.errors import ConfigError
from subrb.orbits import anticommutation_census, compute_blocks
from subrb.pauli import PauliOperator, enumerate_paulis
from subrb.tableau import group_by_name, unsigned_action_index


def test_pauli_eigenvalue_frozen_example():
    # weights I:0.97, X:0.01, Z:0.01, Y:0.01; commuting {I,X} minus
    # anticommuting {Z,Y} gives 0.98 - 0.02
    c = PauliChannel.from_weight_map(1, {"X": 0.01, "Z": 0.01, "Y": 0.01})
    assert c.weights[0] == pytest.approx(0.97)
    lam = pauli_eigenvalue(c, PauliOperator.from_string("X"))
    assert lam == pytest.approx(0.96, abs=1e-15)


def test_depolarizing_eigenvalues_are_uniform():
    c = PauliChannel.depolarizing(1, 0.03)
    for s in ("X", "Y", "Z"):
        assert pauli_eigenvalue(c, PauliOperator.from_string(s)) == pytest.approx(
            1 - 4 * 0.03 / 3
        )
    assert pauli_eigenvalue(c, PauliOperator.identity(1)) == pytest.approx(1.0)


def test_eigenvalue_table_matches_single_lookups():
    rng = np.random.default_rng(20)
    w = rng.random(16)
    w /= w.sum()
    c = PauliChannel(2, w)
    table = eigenvalue_table(c)
    assert table.shape == (16,)
    for p in enumerate_paulis(2):
        assert table[p.index] == pytest.approx(pauli_eigenvalue(c, p), abs=1e-14)
    assert table[0] == pytest.approx(1.0)


def test_channel_validation():
    with pytest.raises(ConfigError):
        PauliChannel(1, np.array([0.5, 0.5]))  # wrong length
    with pytest.raises(ConfigError):
        PauliChannel(1, np.array([0.9, 0.2, -0.1, 0.0]))  # negative
    with pytest.raises(ConfigError):
        PauliChannel(1, np.array([0.5, 0.1, 0.1, 0.1]))  # not normalized
    with pytest.raises(ConfigError):
        PauliChannel.from_weight_map(1, {"XX": 0.1})  # wrong size
    with pytest.raises(ConfigError):
        PauliChannel.from_weight_map(1, {"-X": 0.1})  # signed entry


def test_channel_json_round_trip(tmp_path):
    c = PauliChannel.from_weight_map(2, {"XI": 0.02, "ZZ": 0.01, "YX": 0.005})
    d = PauliChannel.from_json_dict(c.to_json_dict())
    assert c == d
    path = tmp_path / "chan.json"
    c.save(path)
    assert PauliChannel.load(path) == c
    with pytest.raises(ConfigError):
        PauliChannel.from_json_dict({"weights": []})
    with pytest.raises(ConfigError):
        PauliChannel.from_json_dict({"n": 1, "weights": [{"pauli": "X"}]})


def test_block_sums_frozen_example():
    c = PauliChannel.from_weight_map(1, {"X": 0.02, "Z": 0.01, "Y": 0.005})
    d = compute_blocks(group_by_name("real"), 1)
    b = twirl_to_blocks(c, d)
    assert b.block_weights[0] == pytest.approx(0.03)
    assert b.block_weights[1] == pytest.approx(0.005)
    assert b.infidelity == pytest.approx(0.035)
    assert c.infidelity == pytest.approx(0.035)


def test_twirl_uniform_channel_frozen_example():
    # x_X = 0.02, x_Z = 0 -> 0.01 / 0.01 after the real-set twirl; x_Y unchanged
    c = PauliChannel.from_weight_map(1, {"X": 0.02, "Y": 0.007})
    d = compute_blocks(group_by_name("real"), 1)
    t = twirl_to_blocks(c, d).uniform_channel()
    x = PauliOperator.from_string("X").index
    z = PauliOperator.from_string("Z").index
    y = PauliOperator.from_string("Y").index
    assert t.weights[x] == pytest.approx(0.01)
    assert t.weights[z] == pytest.approx(0.01)
    assert t.weights[y] == pytest.approx(0.007)


def test_block_channel_validation():
    d = compute_blocks(group_by_name("real"), 1)
    with pytest.raises(ConfigError):
        BlockChannel(d, 0.9, (0.05,))  # wrong weight count
    with pytest.raises(ConfigError):
        BlockChannel(d, 0.9, (0.2, 0.05))  # not normalized
    d1 = compute_blocks(group_by_name("cnot-pauli"), 1)
    with pytest.raises(ConfigError):
        BlockChannel(d1, 0.95, (0.02, 0.02, 0.01, 0.0))  # weight on empty block


def test_closed_form_lambda_examples():
    lam = closed_form_lambdas("real", 2, [0.01, 0.005])
    assert lam[0] == pytest.approx(1 - 0.01 * 16 / 18 - 0.005 * 4 / 3, abs=1e-12)
    assert lam[0] == pytest.approx(0.984444, abs=5e-7)
    lam3 = closed_form_lambdas("cnot-pauli", 2, [0.01, 0.01, 0.0, 0.0])[2]
    # at n=2 the own-block coefficient (16-16)/(16-12+2) vanishes
    assert lam3 == pytest.approx(1 - 0.02 * 4 / 3, abs=1e-12)
    assert lam3 == pytest.approx(0.973333, abs=5e-7)
    lam1 = closed_form_lambdas("cnot-pauli", 2, [0.0, 0.004, 0.002, 0.003])[0]
    assert lam1 == pytest.approx(1 - (0.004 + 0.002 + 0.003) * 4 / 3, abs=1e-12)


def test_closed_form_lambda_validation():
    with pytest.raises(ConfigError):
        closed_form_lambdas("real", 2, [0.01])
    with pytest.raises(ConfigError):
        closed_form_lambdas("cnot-pauli", 1, [0.01, 0.01, 0.5, 0.0])  # p3 != 0 at n=1
    with pytest.raises(ConfigError):
        closed_form_lambdas("pauli", 1, [0.01])
    assert np.isnan(closed_form_lambdas("cnot-pauli", 1, [0.01, 0.01, 0.0, 0.02])[2])


def test_closed_forms_match_census_route():
    # two independent computations of the same eigenvalues: algebraic closed
    # form vs the counting formula through the anticommutation census
    rng = np.random.default_rng(21)
    for name, k in (("real", 2), ("cnot-pauli", 4)):
        group = group_by_name(name)
        for n in (2, 3):
            d = compute_blocks(group, n)
            census = anticommutation_census(d)
            p = rng.random(k) * 0.02
            total = p.sum()
            b = BlockChannel(d, 1.0 - total, tuple(p))
            closed = closed_form_lambdas(group, n, p)
            for j in range(1, d.block_count):
                lam_census = block_eigenvalue(b, census, j)
                assert closed[j - 1] == pytest.approx(lam_census, abs=1e-12)


def test_depolarizing_lambda_frozen_values():
    assert depolarizing_lambda(1, 0.01) == pytest.approx(0.986667, abs=1e-6)
    assert depolarizing_lambda(2, 0.015) == pytest.approx(0.984, abs=1e-12)
    # oracle: eigenvalue of the explicit uniform channel
    c = PauliChannel.depolarizing(1, 0.01)
    assert pauli_eigenvalue(c, PauliOperator.from_string("Y")) == pytest.approx(
        depolarizing_lambda(1, 0.01), abs=1e-14
    )


def test_average_infidelity_frozen_values():
    assert average_infidelity(0.01, 1) == pytest.approx(0.006667, abs=1e-6)
    assert average_infidelity(0.01, 2) == pytest.approx(0.008, abs=1e-12)


def test_infidelity_bounds_frozen_examples():
    b = infidelity_bounds(VARIANT_REAL, 2, [0.99])
    assert b.lower == pytest.approx(0.0075, abs=1e-12)
    assert b.upper == pytest.approx(0.01125, abs=1e-12)
    assert b.point_estimate == b.upper
    b3 = infidelity_bounds(VARIANT_CNOT_L3, 3, [0.99])
    assert b3.lower == pytest.approx(0.00875, abs=1e-12)
    assert b3.upper == pytest.approx(0.013125, abs=1e-12)
    z = infidelity_bounds(VARIANT_CNOT_L12, 2, [1.0, 1.0])
    assert z.lower == z.upper == 0.0


def test_infidelity_bounds_validation():
    with pytest.raises(ConfigError):
        infidelity_bounds(VARIANT_REAL, 2, [0.99, 0.98])
    with pytest.raises(ConfigError):
        infidelity_bounds(VARIANT_CNOT_L12, 2, [0.99])
    with pytest.raises(ConfigError):
        infidelity_bounds(VARIANT_CNOT_L3, 2, [0.99])  # needs n > 2
    with pytest.raises(ConfigError):
        infidelity_bounds("magic", 2, [0.99])


def test_bounds_bracket_true_infidelity():
    # spot check (the acceptance suite sweeps 10^4 channels): random block
    # channels, exact eigenvalues in, recovered interval must contain p
    rng = np.random.default_rng(22)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        pr = rng.random(2) * 0.03
        lam = closed_form_lambdas("real", n, pr)
        lower, upper, point = infidelity_bounds(VARIANT_REAL, n, [lam[0]])
        p_true = pr.sum()
        assert lower <= p_true + 1e-12
        assert p_true <= upper + 1e-12
        assert upper <= p_true * worst_case_factor(VARIANT_REAL, n) + 1e-12
        pc = rng.random(4) * 0.02
        lamc = closed_form_lambdas("cnot-pauli", n, pc)
        lo, hi, _ = infidelity_bounds(VARIANT_CNOT_L12, n, lamc[:2])
        assert lo <= pc.sum() + 1e-12 and pc.sum() <= hi + 1e-12
        assert hi <= pc.sum() * worst_case_factor(VARIANT_CNOT_L12, n) + 1e-12
        if n > 2:
            lo3, hi3, _ = infidelity_bounds(VARIANT_CNOT_L3, n, [lamc[2]])
            assert lo3 <= pc.sum() + 1e-12 and pc.sum() <= hi3 + 1e-12
            assert hi3 <= pc.sum() * worst_case_factor(VARIANT_CNOT_L3, n) + 1e-12


def test_worst_case_factors():
    assert worst_case_factor(VARIANT_REAL, 2) == pytest.approx(6 / 4)
    assert worst_case_factor(VARIANT_CNOT_L12, 5) == 2.0
    assert worst_case_factor(VARIANT_CNOT_L3, 3) == pytest.approx(6 / 4)
    with pytest.raises(ConfigError):
        worst_case_factor(VARIANT_CNOT_L3, 2)


def test_asymptotic_lambdas_truncation_error_scaling():
    # truncating after the 2^-n term leaves an error shrinking like 4^-n
    p_real = [0.012, 0.004]
    errs = []
    ns = range(2, 9)
    for n in ns:
        exact = np.array(closed_form_lambdas("real", n, p_real))
        approx = np.array(asymptotic_lambdas("real", n, p_real))
        errs.append(np.abs(exact - approx).max())
    slope = np.polyfit(ns, np.log2(errs), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.3)
    with pytest.raises(ConfigError):
        asymptotic_lambdas("full", 2, [0.01])


def test_dense_pauli_twirl_annihilates_off_diagonals():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 0.98
    m[2, 2] = 0.02  # X weight
    x, z = PauliOperator.from_string("X").index, PauliOperator.from_string("Z").index
    m[x, z] = 0.01
    m[z, x] = 0.01
    chi = DenseChi(1, m)
    out = dense_pauli_twirl(chi)
    off = out.matrix - np.diag(np.diag(out.matrix))
    assert np.abs(off).max() < 1e-15
    # diagonal untouched
    np.testing.assert_allclose(np.diag(out.matrix), np.diag(m), atol=1e-15)
    c = out.diagonal_channel()
    assert c.weights[x] == pytest.approx(0.02)


def test_dense_chi_validation():
    with pytest.raises(ConfigError):
        DenseChi(3, np.eye(64, dtype=complex) / 64)  # beyond oracle size
    bad = np.diag([0.99, 0.01, 0.0, 0.0]).astype(complex)
    bad[0, 1] = 0.5  # not Hermitian
    with pytest.raises(ConfigError):
        DenseChi(1, bad)
    with pytest.raises(ConfigError):
        DenseChi(1, np.diag([0.5, 0.1, 0.0, 0.0]).astype(complex))  # trace != 1
    herm = np.diag([0.99, 0.01, 0.0, 0.0]).astype(complex)
    herm[1, 2] = herm[2, 1] = 0.3
    with pytest.raises(ConfigError):
        DenseChi(1, herm).diagonal_channel()


def test_dense_group_twirl_matches_block_route():
    # brute-force average over explicit group permutations must agree with
    # the block-sum shortcut on every Pauli eigenvalue
    rng = np.random.default_rng(23)
    for name in ("real", "cnot-pauli"):
        group = group_by_name(name)
        perms = unsigned_action_index(group, 2)
        d = compute_blocks(group, 2)
        census = anticommutation_census(d)
        w = rng.random(16) * 0.004
        w[0] = 0.0
        w[0] = 1.0 - w.sum()
        c = PauliChannel(2, w)
        averaged = dense_group_twirl(c, perms)
        b = twirl_to_blocks(c, d)
        uniform = b.uniform_channel()
        np.testing.assert_allclose(averaged.weights, uniform.weights, atol=1e-15)
        for j in range(1, d.block_count):
            rep = d.representative(j)
            assert pauli_eigenvalue(averaged, rep) == pytest.approx(
                block_eigenvalue(b, census, j), abs=1e-12
            )


def test_dense_group_twirl_validation():
    c = PauliChannel.depolarizing(1, 0.01)
    with pytest.raises(ConfigError):
        dense_group_twirl(c, [])


def test_channel_equality_and_hash():
    a = PauliChannel.depolarizing(1, 0.01)
    b = PauliChannel.depolarizing(1, 0.01)
    assert a == b and hash(a) == hash(b)
    assert a != PauliChannel.depolarizing(1, 0.02)
