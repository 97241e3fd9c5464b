import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from magnon_teleport.channel_builder import build_ghz, build_modified_w, build_symmetric_w
from magnon_teleport.quantum_core import (
    CapacityError,
    CorrelatorTable,
    PureState,
    density_from_pure,
    pauli_expand,
    pauli_reconstruct,
    permute_qubits,
    random_density_matrix,
)
from magnon_teleport.spin_bath import (
    BathSpec,
    ExactBathModel,
    apply_transfer_matrix,
    compare_ghz_w,
    correlation_decay_report,
    decohere,
    decohere_table,
    envelope,
    exact_attenuation,
    exact_bath_evolve,
    fidelity_vs_time,
    sector_attenuation,
    sector_propagator_coefficients,
    tau_from_coupling,
)
from magnon_teleport.teleport_protocol import average_fidelity, prepare_scheme

S2 = 1 / math.sqrt(2)
BELL = PureState(2, np.array([S2, 0, 0, S2]))


def depolarize_oracle(rho: np.ndarray, factors) -> np.ndarray:
    """Apply rho -> f rho + (1 - f) Tr_k(rho) x I/2 site by site with explicit Kraus operators."""
    n = len(factors)
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    out = rho.astype(complex)
    for k, f in enumerate(factors):
        p = 3 * (1 - f) / 4
        weights = [1 - p, p / 3, p / 3, p / 3]
        acc = np.zeros_like(out)
        for w, s in zip(weights, paulis):
            mats = [np.eye(2)] * n
            mats[k] = s
            op = mats[0]
            for m in mats[1:]:
                op = np.kron(op, m)
            acc += w * op @ out @ op.conj().T
        out = acc
    return out


def spin_matrices(spin: float):
    """Standard spin-I matrices in the |I, m> basis, m descending."""
    m = np.arange(spin, -spin - 1, -1)
    d = m.size
    jp = np.zeros((d, d))
    for i in range(1, d):
        jp[i - 1, i] = math.sqrt(spin * (spin + 1) - m[i] * (m[i] + 1))
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / (2j)
    return jx, jy, np.diag(m)


# -- envelope ---------------------------------------------------------------


def test_envelope_examples():
    assert envelope(0.0, 1.3) == 1.0
    assert envelope(2.0, 2.0) == 1 / 3
    assert envelope(4.0, 2.0) == pytest.approx(1 / 3 - 2 * math.exp(-2), abs=1e-12)
    assert envelope(4.0, 2.0) == pytest.approx(0.06266, abs=1e-5)


def test_envelope_errors():
    with pytest.raises(ValueError):
        envelope(1.0, 0.0)
    with pytest.raises(ValueError):
        envelope(-1.0, 1.0)


def test_envelope_minimum():
    ts = np.linspace(0, 10, 100_001)
    f = np.array([envelope(t, 1.0) for t in ts])
    i = int(np.argmin(f))
    assert ts[i] == pytest.approx(math.sqrt(3), abs=1e-3)
    assert envelope(math.sqrt(3), 1.0) == pytest.approx(1 / 3 - (4 / 3) * math.exp(-1.5), abs=1e-15)
    assert f[i] >= envelope(math.sqrt(3), 1.0)
    assert f.min() == pytest.approx(0.0358, abs=1e-4)
    assert envelope(1e3, 1.0) == pytest.approx(1 / 3)


@given(t=st.floats(0, 1e3), tau=st.floats(1e-3, 1e3))
def test_envelope_range(t, tau):
    f = envelope(t, tau)
    assert 0 < f <= 1


# -- bath parameters --------------------------------------------------------


def test_bath_spec():
    assert tau_from_coupling(0.5, 16) == pytest.approx(1.0, abs=1e-12)
    bath = BathSpec.from_couplings([0.5, 1.0], [16, 4])
    assert bath.taus == pytest.approx((1.0, 1.0), abs=1e-12)
    with pytest.raises(ValueError):
        BathSpec((1.0, 0.0))
    with pytest.raises(ValueError):
        BathSpec(())
    with pytest.raises(ValueError):
        BathSpec.from_couplings([1.0], [1, 2])
    with pytest.raises(ValueError):
        tau_from_coupling(-1, 3)


# -- decoherence map --------------------------------------------------------


def test_decohere_t0_is_identity():
    rho = random_density_matrix(3, np.random.default_rng(0))
    assert decohere(rho, BathSpec.uniform(3), 0.0).matrix == pytest.approx(rho.matrix, abs=1e-12)


def test_decohere_large_t_limit():
    table = pauli_expand(density_from_pure(build_ghz(3)))
    out = pauli_expand(decohere(table, BathSpec.uniform(3), 1e3))
    assert out["ZZI"] == pytest.approx(1 / 9)
    assert out["XXX"] == pytest.approx(1 / 27)
    assert out["III"] == pytest.approx(1.0)


def test_decohere_bell_at_tau():
    out = pauli_expand(decohere(BELL, BathSpec.uniform(2, 1.0), 1.0))
    assert out.entries() == pytest.approx({"II": 1, "XX": 1 / 9, "YY": -1 / 9, "ZZ": 1 / 9})


def test_decohere_site_mismatch():
    with pytest.raises(ValueError):
        decohere(BELL, BathSpec.uniform(3), 1.0)


@pytest.mark.parametrize("seed", range(4))
def test_decohere_matches_kraus_oracle(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(3, rng)
    bath = BathSpec(tuple(rng.uniform(0.5, 2.0, size=3)))
    t = float(rng.uniform(0, 3))
    expected = depolarize_oracle(rho.matrix, bath.factors(t))
    assert decohere(rho, bath, t).matrix == pytest.approx(expected, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 20))
@settings(max_examples=40, deadline=None)
def test_decohere_physical(seed, t):
    rho = random_density_matrix(3, np.random.default_rng(seed))
    out = decohere(rho, BathSpec((0.7, 1.0, 1.9)), t)
    assert abs(out.trace() - 1) < 1e-12
    assert out.eigenvalues().min() >= -1e-10


def test_decohere_permutation_invariant_for_symmetric_state():
    psi = build_symmetric_w()
    out = decohere(psi, BathSpec.uniform(3, 1.0), 0.8)
    for order in ([2, 1, 3], [3, 1, 2]):
        assert permute_qubits(out, order).matrix == pytest.approx(out.matrix, abs=1e-12)


def test_decohere_table_round_trip():
    table = CorrelatorTable.from_entries(1, {"I": 1, "X": 0.5})
    out = decohere_table(table, BathSpec.uniform(1, 1.0), 1.0)
    assert out["X"] == pytest.approx(0.5 / 3)


# -- decay reports ----------------------------------------------------------


def test_decay_report_weights():
    table = pauli_expand(density_from_pure(build_modified_w()))
    times = np.linspace(0, 5, 51)
    rep = correlation_decay_report(table, BathSpec.uniform(3, 1.0), times)
    assert set(rep.per_weight) == {1, 2, 3}
    assert np.all(rep.per_weight[3] <= rep.per_weight[2] + 1e-15)
    assert np.all(rep.per_weight[2] <= rep.per_weight[1] + 1e-15)
    at_tau = correlation_decay_report(table, BathSpec.uniform(3, 1.0), [1.0])
    for w, vals in at_tau.per_weight.items():
        assert vals[0] == pytest.approx(3.0**-w, abs=1e-15)


def test_decay_report_unequal_taus():
    table = pauli_expand(density_from_pure(build_ghz(3)))
    bath = BathSpec((0.5, 1.0, 2.0))
    rep = correlation_decay_report(table, bath, [0.7])
    assert rep.per_string["ZIZ"][0] == pytest.approx(envelope(0.7, 0.5) * envelope(0.7, 2.0))
    assert rep.per_string["XXX"][0] == pytest.approx(math.prod(envelope(0.7, t) for t in bath.taus))


# -- fidelity curves --------------------------------------------------------


def test_fidelity_vs_time_start_and_limit():
    psi = build_modified_w()
    bath = BathSpec.uniform(3, 1.0)
    rep = fidelity_vs_time(psi, 3, bath, [0.0, 1e3])
    assert rep.fidelities[0] == pytest.approx(1.0, abs=1e-12)
    # limit: every weight-w correlator scaled by 3**-w
    table = pauli_expand(density_from_pure(psi))
    limit = CorrelatorTable(3, table.coeffs * (1 / 3) ** table.weights())
    expected = average_fidelity(pauli_reconstruct(limit), 3, prepare_scheme(psi, 3))
    assert rep.fidelities[1] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("channel", [build_modified_w(), build_ghz(3)], ids=["modified-w", "ghz"])
def test_fidelity_non_increasing_before_envelope_minimum(channel):
    times = np.linspace(0, math.sqrt(3), 60)
    f = fidelity_vs_time(channel, 3, BathSpec.uniform(3, 1.0), times).fidelities
    assert np.all(np.diff(f) <= 1e-12)


def test_compare_ghz_w_basics():
    cmp = compare_ghz_w(BathSpec.uniform(3, 1.0), np.linspace(0, 3, 31))
    assert cmp.modified_w[0] == pytest.approx(1.0, abs=1e-12)
    assert cmp.ghz[0] == pytest.approx(1.0, abs=1e-12)
    assert cmp.w_histogram == {0: 1, 1: 2, 2: 8, 3: 7}
    assert cmp.ghz_histogram == {0: 1, 2: 3, 3: 4}
    with pytest.raises(ValueError):
        compare_ghz_w(BathSpec.uniform(2), [0.0])


# -- exact central-spin oracle ----------------------------------------------


def test_exact_model_validation():
    with pytest.raises(CapacityError):
        ExactBathModel(1.0, 11)
    with pytest.raises(ValueError):
        ExactBathModel(0.0, 2)
    with pytest.raises(ValueError):
        ExactBathModel(1.0, 0)


@pytest.mark.parametrize("m", [1, 2, 5, 8])
def test_sector_weights_sum_to_one(m):
    model = ExactBathModel(1.0, m)
    assert model.sector_weights().sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.array([model.precession(s) for s in model.sector_spins()]) > 0)


def test_exact_identity_at_zero():
    assert exact_bath_evolve(ExactBathModel(1.0, 3), 0.0) == pytest.approx(np.eye(4), abs=1e-12)


def test_exact_transfer_matrix_is_isotropic_and_unital():
    r = exact_bath_evolve(ExactBathModel(0.9, 4), 1.3)
    assert r[0] == pytest.approx([1, 0, 0, 0], abs=1e-12)
    assert r[:, 0] == pytest.approx([1, 0, 0, 0], abs=1e-12)
    off = r[1:, 1:] - np.diag(np.diag(r[1:, 1:]))
    assert np.max(np.abs(off)) < 1e-12
    assert np.ptp(np.diag(r)[1:]) < 1e-12


def test_exact_single_nucleus_oscillates():
    model = ExactBathModel(1.0, 1)
    assert exact_attenuation(model, math.pi) == pytest.approx(0.0, abs=1e-12)
    assert exact_attenuation(model, 2 * math.pi) == pytest.approx(1.0, abs=1e-12)


def test_exact_against_dense_expm():
    # electron plus two nuclei, built from Kronecker products and scipy expm
    k, t = 1.3, 0.9
    sx, sy, sz = (np.array([[0, 1], [1, 0]]) / 2, np.array([[0, -1j], [1j, 0]]) / 2, np.diag([0.5, -0.5]))
    e = np.eye(2)
    h = sum(
        k * np.kron(np.kron(s, s), e) + k * np.kron(np.kron(s, e), s) for s in (sx, sy, sz)
    )
    u = expm(-1j * h * t)
    rho_e = np.array([[0.8, 0.3 - 0.1j], [0.3 + 0.1j, 0.2]])
    full = u @ np.kron(rho_e, np.eye(4) / 4) @ u.conj().T
    reduced = np.einsum("aibi->ab", full.reshape(2, 4, 2, 4))
    ours = apply_transfer_matrix(exact_bath_evolve(ExactBathModel(k, 2), t), rho_e)
    assert ours == pytest.approx(reduced, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 6])
def test_sector_formula_matches_exact(m):
    model = ExactBathModel(0.7, m)
    for t in (0.0, 0.4, 1.7, 5.0):
        assert sector_attenuation(model, t) == pytest.approx(exact_attenuation(model, t), abs=1e-12)


@pytest.mark.parametrize("spin", [0.5, 1.0, 1.5, 2.0])
def test_sector_propagator_coefficients(spin):
    k, t = 0.8, 2.1
    ix, iy, iz = spin_matrices(spin)
    s = [np.array([[0, 1], [1, 0]]) / 2, np.array([[0, -1j], [1j, 0]]) / 2, np.diag([0.5, -0.5])]
    sdoti = sum(np.kron(a, b) for a, b in zip(s, (ix, iy, iz)))
    a, b = sector_propagator_coefficients(k, spin, t)
    u = expm(-1j * k * t * sdoti)
    assert u == pytest.approx(a * np.eye(sdoti.shape[0]) + b * sdoti, abs=1e-12)


def test_exact_m8_short_times_near_envelope():
    model = ExactBathModel(1.0, 8)
    for frac in (0.1, 0.25, 0.5):
        t = frac * model.tau
        assert abs(exact_attenuation(model, t) - envelope(t, model.tau)) < 0.05
