"""Nuclear-spin-bath decoherence of channel states.

Each qubit couples isotropically to its own unpolarized bath, ``K S.I``. In
the large-bath limit every spin component of site i is attenuated by

    f_i(t) = 1/3 + (2/3) (1 - t^2 / tau_i^2) exp(-t^2 / (2 tau_i^2)),
    tau_i = 2 / (K_i sqrt(N_i)),

so a Pauli correlator is multiplied by the product of ``f_i`` over its
support. Since ``0 < f <= 1`` this is a product of depolarizing channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import channel_builder
from .quantum_core import (
    CapacityError,
    CorrelatorTable,
    DensityMatrix,
    PauliString,
    PureState,
    X,
    Y,
    Z,
    density_from_pure,
    pauli_expand,
    pauli_reconstruct,
)
from .teleport_protocol import average_fidelity, prepare_scheme

EXACT_BATH_MAX = 10


@dataclass(frozen=True)
class BathSpec:
    taus: tuple[float, ...]

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if not taus:
            raise ValueError("bath needs at least one site")
        if any(not t > 0 for t in taus):
            raise ValueError(f"every tau must be positive, got {taus}")
        object.__setattr__(self, "taus", taus)

    @classmethod
    def uniform(cls, n_sites: int, tau: float = 1.0) -> "BathSpec":
        return cls((tau,) * n_sites)

    @classmethod
    def from_couplings(cls, couplings: Sequence[float], spin_counts: Sequence[int]) -> "BathSpec":
        if len(couplings) != len(spin_counts):
            raise ValueError("couplings and spin counts differ in length")
        return cls(tuple(tau_from_coupling(k, n) for k, n in zip(couplings, spin_counts)))

    @property
    def n_sites(self) -> int:
        return len(self.taus)

    def factors(self, t: float) -> np.ndarray:
        return np.array([envelope(t, tau) for tau in self.taus])


def tau_from_coupling(coupling: float, n_spins: int) -> float:
    if coupling <= 0 or n_spins <= 0:
        raise ValueError("coupling and nuclear spin count must be positive")
    return 2.0 / (coupling * math.sqrt(n_spins))


def envelope(t: float, tau: float) -> float:
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    r2 = (t / tau) ** 2
    return 1 / 3 + (2 / 3) * (1 - r2) * math.exp(-r2 / 2)


def _attenuation_array(factors: np.ndarray) -> np.ndarray:
    """Outer product over sites of (1, f, f, f)."""
    out = np.ones(())
    for f in factors:
        out = np.multiply.outer(out, np.array([1.0, f, f, f]))
    return out


def decohere_table(table: CorrelatorTable, bath: BathSpec, t: float) -> CorrelatorTable:
    if bath.n_sites != table.n_qubits:
        raise ValueError(f"bath has {bath.n_sites} sites, state has {table.n_qubits}")
    return CorrelatorTable(table.n_qubits, table.coeffs * _attenuation_array(bath.factors(t)))


def decohere(state, bath: BathSpec, t: float) -> DensityMatrix:
    """Attenuate every correlator by the envelopes of the sites it touches."""
    if isinstance(state, PureState):
        state = density_from_pure(state)
    table = state if isinstance(state, CorrelatorTable) else pauli_expand(state)
    return pauli_reconstruct(decohere_table(table, bath, t))


@dataclass(frozen=True)
class DecayReport:
    times: np.ndarray = field(repr=False)
    per_weight: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    per_string: dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    fidelities: np.ndarray | None = field(default=None, repr=False)


def correlation_decay_report(table: CorrelatorTable, bath: BathSpec, times) -> DecayReport:
    """Attenuation of each correlator present in ``table``, grouped by weight.

    ``per_weight[w]`` holds, per time, the largest factor among weight-w
    strings (the slowest-decaying member of the group).
    """
    if bath.n_sites != table.n_qubits:
        raise ValueError(f"bath has {bath.n_sites} sites, state has {table.n_qubits}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    keys = [k for k in table.entries() if PauliString(k).weight > 0]
    per_string = {}
    for key in keys:
        support = PauliString(key).support
        per_string[key] = np.array(
            [math.prod(envelope(t, bath.taus[s - 1]) for s in support) for t in times]
        )
    per_weight: dict[int, np.ndarray] = {}
    for key, vals in per_string.items():
        w = PauliString(key).weight
        per_weight[w] = vals if w not in per_weight else np.maximum(per_weight[w], vals)
    return DecayReport(times, dict(sorted(per_weight.items())), per_string)


def fidelity_vs_time(channel: PureState, bob: int, bath: BathSpec, times) -> DecayReport:
    """Average teleportation fidelity of the decohered channel.

    Alice's basis and Bob's corrections stay those of the ideal channel.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    scheme = prepare_scheme(channel, bob)
    table = pauli_expand(density_from_pure(channel))
    fids = np.array(
        [average_fidelity(decohere(table, bath, t), bob, scheme=scheme) for t in times]
    )
    return DecayReport(times, fidelities=fids)


@dataclass(frozen=True)
class GhzWComparison:
    times: np.ndarray = field(repr=False)
    modified_w: np.ndarray = field(repr=False)
    ghz: np.ndarray = field(repr=False)
    first_w_advantage: float | None
    w_histogram: dict[int, int]
    ghz_histogram: dict[int, int]


def compare_ghz_w(bath: BathSpec, times, bob: int = 3, margin: float = 1e-12) -> GhzWComparison:
    """Fidelity curves of the three-qubit modified-W channel and GHZ under one bath."""
    if bath.n_sites != 3:
        raise ValueError("comparison uses three-qubit channels")
    w = channel_builder.build_modified_w(bob=bob)
    ghz = channel_builder.build_ghz(3)
    fw = fidelity_vs_time(w, bob, bath, times)
    fg = fidelity_vs_time(ghz, bob, bath, times)
    ahead = np.nonzero(fw.fidelities > fg.fidelities + margin)[0]
    first = float(fw.times[ahead[0]]) if ahead.size else None
    return GhzWComparison(
        fw.times,
        fw.fidelities,
        fg.fidelities,
        first,
        pauli_expand(density_from_pure(w)).weight_histogram(),
        pauli_expand(density_from_pure(ghz)).weight_histogram(),
    )


# -- exact central-spin oracle ------------------------------------------------


@dataclass(frozen=True)
class ExactBathModel:
    """One electron spin coupled by ``K S.I`` to ``bath_size`` nuclear spins 1/2."""

    coupling: float
    bath_size: int

    def __post_init__(self):
        if self.coupling <= 0:
            raise ValueError("coupling must be positive")
        if self.bath_size < 1:
            raise ValueError("bath needs at least one spin")
        if self.bath_size > EXACT_BATH_MAX:
            raise CapacityError(f"exact bath limited to {EXACT_BATH_MAX} spins")

    @property
    def tau(self) -> float:
        return tau_from_coupling(self.coupling, self.bath_size)

    def sector_spins(self) -> np.ndarray:
        m = self.bath_size
        return np.arange(m % 2 / 2, m / 2 + 0.25, 1.0)

    def sector_weights(self) -> np.ndarray:
        """Probability of total bath spin I in the unpolarized ensemble."""
        m = self.bath_size
        out = []
        for spin in self.sector_spins():
            k = int(round(m / 2 - spin))
            mult = math.comb(m, k) - (math.comb(m, k - 1) if k >= 1 else 0)
            out.append(mult * (2 * spin + 1) / 2**m)
        return np.array(out)

    def precession(self, spin: float) -> float:
        """``Lambda`` with ``2 Lambda = K (I + 1/2)``."""
        return self.coupling * (spin + 0.5) / 2


@lru_cache(maxsize=16)
def _bath_eigensystem(coupling: float, m: int):
    n = m + 1  # electron is site 0
    d = 2**n
    idx = np.arange(d)
    e_bit = idx >> m
    h = np.zeros((d, d))
    for k in range(1, n):
        shift = m - k
        k_bit = (idx >> shift) & 1
        # S_0.S_k = (SWAP - 1/2) / 2: +1/4 aligned, -1/4 anti-aligned plus a flip term
        h[idx, idx] += coupling * np.where(e_bit == k_bit, 0.25, -0.25)
        anti = idx[e_bit != k_bit]
        h[anti, anti ^ ((1 << m) | (1 << shift))] += coupling * 0.5
    evals, evecs = np.linalg.eigh(h)
    half = evecs.reshape(2, d // 2, d)
    paulis = [np.eye(d, dtype=complex)]
    for p in (X, Y, Z):
        # electron Pauli acts on the leading axis only
        applied = np.einsum("ij,jkd->ikd", p, half).reshape(d, d)
        paulis.append(evecs.T @ applied)
    return evals, paulis


def exact_bath_evolve(model: ExactBathModel, t: float) -> np.ndarray:
    """Pauli transfer matrix ``R[i, j] = Tr(s_i Phi(s_j)) / 2`` of the reduced qubit map.

    ``Phi(rho) = Tr_bath[U (rho x 1/2^m) U^dag]`` with ``U = exp(-i K S.I t)``.
    """
    evals, paulis = _bath_eigensystem(float(model.coupling), model.bath_size)
    d = evals.size
    phase = np.exp(-1j * np.subtract.outer(evals, evals) * t)  # (a, b) -> e^{-i(Ea - Eb) t}
    r = np.empty((4, 4))
    for j in range(4):
        evolved = phase * paulis[j]  # U s_j U^dag in the eigenbasis
        for i in range(4):
            r[i, j] = np.real(np.sum(paulis[i].T * evolved)) / d
    return r


def apply_transfer_matrix(r: np.ndarray, rho: np.ndarray) -> np.ndarray:
    bloch = np.array([np.real(np.trace(rho @ p)) for p in (np.eye(2), X, Y, Z)])
    out = r @ bloch
    return (out[0] * np.eye(2) + out[1] * X + out[2] * Y + out[3] * Z) / 2


def exact_attenuation(model: ExactBathModel, t: float) -> float:
    """Isotropic attenuation: mean of the x, y, z diagonal of the transfer matrix."""
    r = exact_bath_evolve(model, t)
    return float(np.mean(np.diag(r)[1:]))


def sector_attenuation(model: ExactBathModel, t: float) -> float:
    """Closed-form attenuation from the total-bath-spin sectors.

    Within a sector of spin I the electron precesses at ``2 Lambda`` and
    ``g_I = 1 - 2 I (I + 1) / (3 (I + 1/2)^2) * (1 - cos(2 Lambda t))``.
    """
    total = 0.0
    for spin, w in zip(model.sector_spins(), model.sector_weights()):
        lam = model.precession(spin)
        g = 1 - 2 * spin * (spin + 1) / (3 * (spin + 0.5) ** 2) * (1 - math.cos(2 * lam * t))
        total += w * g
    return total


def sector_propagator_coefficients(coupling: float, spin: float, t: float) -> tuple[complex, complex]:
    """``(a, b)`` with ``exp(-i K S.I t) = a + b S.I`` inside a bath-spin-I sector."""
    lam = coupling * (spin + 0.5) / 2
    glob = np.exp(1j * coupling * t / 4)
    a = glob * (math.cos(lam * t) - 1j * coupling * math.sin(lam * t) / (4 * lam))
    b = -glob * 1j * coupling * math.sin(lam * t) / lam
    return complex(a), complex(b)
