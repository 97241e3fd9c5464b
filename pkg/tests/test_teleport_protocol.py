import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magnon_teleport.channel_builder import (
    build_ghz,
    build_modified_w,
    build_n_magnon_channel,
    build_one_magnon_channel,
    build_symmetric_w,
    build_w_like,
)
from magnon_teleport.quantum_core import (
    CapacityError,
    DensityMatrix,
    PureState,
    density_from_pure,
    random_density_matrix,
)
from magnon_teleport.spin_bath import BathSpec, decohere
from magnon_teleport.teleport_protocol import (
    AXIAL_INPUTS,
    DecompositionError,
    ProtocolError,
    TeleportSetup,
    analyze_channel,
    average_fidelity,
    average_fidelity_bloch,
    brute_force_teleport,
    build_measurement_basis,
    haar_inputs,
    prepare_scheme,
    run_teleport,
    run_teleport_mixed,
    xi_decompose,
)

S2 = 1 / math.sqrt(2)
BELL = PureState(2, np.array([S2, 0, 0, S2]))
SYM_W_FIDELITY = 2 / 3 + 2 * math.sqrt(2) / 9


def random_magnon_channel(n: int, seed: int) -> PureState:
    """Generic one-magnon state; Bob's branches are orthogonal by magnon number."""
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    amps = np.zeros(2**n, dtype=complex)
    for site in range(1, n + 1):
        amps[1 << (n - site)] = c[site - 1]
    return PureState.from_amplitudes(amps)


def oracle_suite():
    return [
        ("bell", BELL, 2),
        ("bell-bob1", BELL, 1),
        ("modified-w", build_modified_w(), 3),
        ("modified-w-phase", build_modified_w(phi=0.7, bob=2), 2),
        ("symmetric-w", build_symmetric_w(3), 3),
        ("w-like", build_w_like(), 3),
        ("ghz3", build_ghz(3), 3),
        ("ghz4", build_ghz(4), 2),
        ("one-magnon-5", build_one_magnon_channel(5, 2), 2),
        ("one-magnon-6-minus", build_one_magnon_channel(6, 6, "-"), 6),
        ("two-magnon-5", build_n_magnon_channel(5, 2, 3), 3),
        ("three-magnon-6", build_n_magnon_channel(6, 3, 1), 1),
        ("random-magnon-4", random_magnon_channel(4, 11), 4),
        ("random-magnon-5", random_magnon_channel(5, 12), 1),
        ("symmetric-w-4", build_symmetric_w(4), 2),
    ]


def assert_reports_equal(a, b, tol):
    assert len(a.outcomes) == len(b.outcomes)
    assert np.max(np.abs(a.probabilities - b.probabilities)) < tol
    for oa, ob in zip(a.outcomes, b.outcomes):
        if oa.fidelity_after_correction is None or ob.fidelity_after_correction is None:
            assert oa.probability < 1e-10 and ob.probability < 1e-10
        else:
            assert abs(oa.fidelity_after_correction - ob.fidelity_after_correction) < tol
    assert abs(a.average_fidelity - b.average_fidelity) < tol


# -- setup and decomposition ------------------------------------------------


def test_setup_validation():
    with pytest.raises(ValueError):
        TeleportSetup(BELL, 2, (1, 1))
    with pytest.raises(ValueError):
        TeleportSetup(BELL, 3, (1, 0))


def test_xi_norms():
    norms = [np.linalg.norm(x) for x in xi_decompose(BELL, 2)]
    assert norms == pytest.approx([S2] * 4)
    mw = [np.linalg.norm(x) ** 2 for x in xi_decompose(build_modified_w(), 3)]
    assert mw[0] == pytest.approx(0.5) and mw[3] == pytest.approx(0.5)
    sw = [np.linalg.norm(x) ** 2 for x in xi_decompose(build_symmetric_w(), 3)]
    assert sw[0] == pytest.approx(2 / 3) and sw[3] == pytest.approx(1 / 3)


def test_bell_basis_is_standard():
    basis = build_measurement_basis(xi_decompose(BELL, 2))
    v = basis.vectors
    bell = np.array([[1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, -1, 1, 0]]).T * S2
    overlap = np.abs(v.conj().T @ bell)
    assert overlap == pytest.approx(np.eye(4), abs=1e-12)


def test_basis_orthonormal_n5():
    basis = build_measurement_basis(xi_decompose(build_one_magnon_channel(5, 5), 5))
    v = basis.vectors
    assert v.shape == (32, 32)
    assert v.conj().T @ v == pytest.approx(np.eye(32), abs=1e-10)


def test_modified_w_primary_vectors_match_product_terms():
    # input x channel expands as sum_m <v_m| . |v_m> (x) U_m^dag (a|0> + b|1>) / 2 with unitary U_m
    psi = build_modified_w()
    scheme = prepare_scheme(psi, 3)
    ops = scheme.analysis.operators[:4]
    for op in ops:
        assert op.conj().T @ op == pytest.approx(0.25 * np.eye(2), abs=1e-12)
    assert scheme.basis.balanced


def test_non_orthogonal_branches_raise():
    product = PureState(2, np.array([0.5, 0.5, 0.5, 0.5]))
    with pytest.raises(DecompositionError):
        analyze_channel(product, 2)


def test_zero_branch_raises():
    with pytest.raises(ProtocolError):
        analyze_channel(PureState.basis("00"), 2)


# -- protocol ---------------------------------------------------------------


def test_bell_random_inputs():
    for a, b in haar_inputs(10, 3):
        rep = run_teleport(TeleportSetup(BELL, 2, (a, b)))
        assert rep.primary_probabilities == pytest.approx([0.25] * 4, abs=1e-12)
        assert rep.primary_fidelities == pytest.approx([1.0] * 4, abs=1e-12)
        assert rep.perfect


def test_modified_w_input_independent():
    psi = build_modified_w()
    scheme = prepare_scheme(psi, 3)
    for a, b in haar_inputs(20, 4):
        rep = run_teleport(TeleportSetup(psi, 3, (a, b)), scheme)
        assert rep.primary_probabilities == pytest.approx([0.25] * 4, abs=1e-12)
        assert rep.average_fidelity == pytest.approx(1.0, abs=1e-12)
        assert rep.complement_probability < 1e-12


def test_basis_input_fidelity_one():
    rep = run_teleport(TeleportSetup(build_modified_w(), 3, (1, 0)))
    assert rep.average_fidelity == pytest.approx(1.0, abs=1e-12)


def test_symmetric_w_imperfect():
    psi = build_symmetric_w()
    analysis = analyze_channel(psi, 3)
    assert analysis.verdict == "probabilistic"
    assert average_fidelity(psi, 3) == pytest.approx(SYM_W_FIDELITY, abs=1e-12)
    # a basis-state input passes exactly; a superposition does not
    assert run_teleport(TeleportSetup(psi, 3, (1, 0))).average_fidelity == pytest.approx(1.0)
    assert run_teleport(TeleportSetup(psi, 3, (S2, S2))).average_fidelity < 1 - 1e-3


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6))
@settings(max_examples=30, deadline=None)
def test_probabilities_sum_to_one(seed, n):
    psi = random_magnon_channel(n, seed)
    a, b = haar_inputs(1, seed)[0]
    rep = run_teleport(TeleportSetup(psi, 1 + seed % n, (a, b)))
    assert abs(rep.probabilities.sum() - 1) < 1e-10
    assert 0 <= rep.average_fidelity <= 1


@given(phases=st.lists(st.floats(-math.pi, math.pi), min_size=4, max_size=4), bob=st.integers(1, 5))
@settings(max_examples=30, deadline=None)
def test_phase_profile_invariance(phases, bob):
    psi = build_one_magnon_channel(5, bob, "+", phases)
    assert analyze_channel(psi, bob).verdict == "perfect"


@pytest.mark.parametrize("n", range(2, 9))
def test_one_magnon_perfect_every_bob(n):
    for bob in range(1, n + 1):
        assert analyze_channel(build_one_magnon_channel(n, bob), bob).perfect


@pytest.mark.parametrize("n, k", [(4, 2), (5, 2), (6, 3)])
def test_n_magnon_perfect(n, k):
    assert analyze_channel(build_n_magnon_channel(n, k, n), n).perfect


# -- oracle -----------------------------------------------------------------


@pytest.mark.parametrize("name, channel, bob", oracle_suite(), ids=[c[0] for c in oracle_suite()])
def test_run_teleport_matches_brute_force(name, channel, bob):
    for a, b in list(haar_inputs(3, 7)) + [(1, 0), (S2, 1j * S2)]:
        setup = TeleportSetup(channel, bob, (a, b))
        assert_reports_equal(run_teleport(setup), brute_force_teleport(setup), 1e-10)


def test_brute_force_capacity():
    with pytest.raises(CapacityError):
        brute_force_teleport(TeleportSetup(build_ghz(7), 1, (1, 0)))


# -- mixed channels ---------------------------------------------------------


def test_mixed_matches_pure():
    psi = build_symmetric_w()
    scheme = prepare_scheme(psi, 3)
    for a, b in haar_inputs(5, 9):
        pure = run_teleport(TeleportSetup(psi, 3, (a, b)), scheme)
        mixed = run_teleport_mixed(density_from_pure(psi), scheme, (a, b))
        assert_reports_equal(pure, mixed, 1e-10)


def test_fully_depolarized_gives_half():
    scheme = prepare_scheme(build_modified_w(), 3)
    assert average_fidelity(DensityMatrix.maximally_mixed(3), 3, scheme) == pytest.approx(0.5, abs=1e-12)


def test_dephased_bell_is_classical():
    dephased = DensityMatrix(2, np.diag([0.5, 0, 0, 0.5]))
    scheme = prepare_scheme(BELL, 2)
    assert average_fidelity(dephased, 2, scheme) == pytest.approx(2 / 3, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_product_channels_at_most_classical(seed):
    rng = np.random.default_rng(seed)
    a = random_density_matrix(1, rng).matrix
    b = random_density_matrix(1, rng).matrix
    product = DensityMatrix(2, np.kron(a, b))
    scheme = prepare_scheme(BELL, 2)
    assert average_fidelity(product, 2, scheme) <= 2 / 3 + 1e-9


def test_mixed_dimension_mismatch():
    scheme = prepare_scheme(BELL, 2)
    with pytest.raises(ValueError):
        run_teleport_mixed(DensityMatrix.maximally_mixed(3), scheme, (1, 0))


def test_decohered_modified_w_between_half_and_one():
    psi = build_modified_w()
    rho = decohere(psi, BathSpec.uniform(3, 1.0), 1.0)
    f = average_fidelity(rho, 3, prepare_scheme(psi, 3))
    assert 0.5 < f < 1


def test_perfect_channel_average_is_one():
    assert average_fidelity(build_ghz(3), 1) == pytest.approx(1.0, abs=1e-12)


def test_axial_equals_bloch_average():
    ideal = random_magnon_channel(3, 22)
    scheme = prepare_scheme(ideal, 2)
    rho = decohere(ideal, BathSpec((0.8, 1.0, 1.3)), 0.6)
    assert average_fidelity(rho, 2, scheme) == pytest.approx(average_fidelity_bloch(rho, 2, scheme), abs=1e-12)


def test_monte_carlo_agrees_with_axial():
    ideal = build_modified_w()
    scheme = prepare_scheme(ideal, 3)
    rho = decohere(ideal, BathSpec.uniform(3, 1.0), 0.5)
    exact = average_fidelity(rho, 3, scheme)
    mean, err = average_fidelity(rho, 3, scheme, mode="monte_carlo", samples=100_000, seed=5)
    assert abs(mean - exact) < 3 * err
    assert abs(mean - exact) < 1e-3


def test_monte_carlo_seeded():
    psi = build_symmetric_w()
    a = average_fidelity(psi, 3, mode="monte_carlo", samples=500, seed=1)
    b = average_fidelity(psi, 3, mode="monte_carlo", samples=500, seed=1)
    assert a == b
    with pytest.raises(ValueError):
        average_fidelity(psi, 3, mode="bogus")


def test_axial_inputs_are_pauli_eigenstates():
    assert len(AXIAL_INPUTS) == 6
    for v in AXIAL_INPUTS:
        assert np.linalg.norm(v) == pytest.approx(1.0)


def test_report_dict():
    d = run_teleport(TeleportSetup(BELL, 2, (1, 0))).to_dict()
    assert d["perfect"] is True
    assert len(d["outcomes"]) == 4
