"""One-magnon dynamics on the three-site Delta-chain and the N-site ring.

Time is the dimensionless ``theta = J t``. For an exchange of 0.01 eV,
``theta = 1`` corresponds to ``hbar / J`` ~ 0.0658 ps (see ``theta_to_ps``).

Hamiltonians use ``S = sigma / 2``:

* three sites: ``S1.S2 + S2.S3 + delta * S1.S3``
* ring: ``sum_i S_i.S_{i+1}`` with site ``N + 1 == 1``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .quantum_core import MAX_QUBITS, CapacityError, PureState, X, Y, Z

HBAR_EV_PS = 6.582119569e-4  # eV * ps
BESSEL_MAX_ARG = 50.0
INF = math.inf


def theta_to_ps(theta: float, exchange_ev: float = 0.01) -> float:
    """Convert dimensionless time to picoseconds for an exchange energy in eV."""
    return theta * HBAR_EV_PS / exchange_ev


@dataclass(frozen=True)
class ChainSpec:
    """A ring of ``n_qubits`` spins; for three sites ``delta`` scales the 1-3 bond."""

    n_qubits: int
    delta: float = 1.0
    topology: str = "ring"

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError(f"need at least 2 sites, got {self.n_qubits}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if self.n_qubits != 3 and self.delta != 1.0:
            raise ValueError("delta other than 1 is only defined for three sites")
        if self.topology != "ring":
            raise ValueError(f"unsupported topology {self.topology!r}")

    def bonds(self) -> list[tuple[int, int, float]]:
        """(site_a, site_b, coupling) with 1-based sites."""
        n = self.n_qubits
        if n == 3:
            return [(1, 2, 1.0), (2, 3, 1.0), (1, 3, self.delta)]
        # for N == 2 the periodic ring visits the single bond twice
        return [(i, i % n + 1, 1.0) for i in range(1, n + 1)]


@dataclass(frozen=True)
class TriSpectrum:
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)  # columns


@dataclass(frozen=True)
class MagnonAmplitudes:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, copy=True).ravel()
        if v.size < 2:
            raise ValueError("need at least two sites")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_sites(self) -> int:
        return self.values.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.values)

    def to_state(self) -> PureState:
        """Embed in the full register: a flip at site n is basis index ``2**(N - n)``."""
        n = self.n_sites
        amps = np.zeros(2**n, dtype=complex)
        for site, a in enumerate(self.values, start=1):
            amps[1 << (n - site)] = a
        return PureState(n, amps)


def _check_delta(delta: float) -> None:
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")


def tri_spectrum(delta: float) -> TriSpectrum:
    """Closed-form eigenpairs of the one-magnon block of the three-site chain."""
    _check_delta(delta)
    evals = np.array([(2 + delta) / 4, -3 * delta / 4, (delta - 4) / 4])
    evecs = np.column_stack(
        [
            np.array([1, 1, 1]) / math.sqrt(3),
            np.array([1, 0, -1]) / math.sqrt(2),
            np.array([1, -2, 1]) / math.sqrt(6),
        ]
    ).astype(float)
    return TriSpectrum(evals, evecs)


def tri_magnon_block(delta: float) -> np.ndarray:
    """One-magnon block of the three-site Hamiltonian, built bond by bond."""
    _check_delta(delta)
    return one_magnon_block(ChainSpec(3, delta))


def one_magnon_block(spec: ChainSpec) -> np.ndarray:
    n = spec.n_qubits
    h = np.zeros((n, n))
    for a, b, j in spec.bonds():
        # S_a.S_b = (SWAP - 1/2) / 2 on the pair; +1/4 aligned, -1/4 anti-aligned
        for site in range(1, n + 1):
            h[site - 1, site - 1] += j * (-0.25 if site in (a, b) else 0.25)
        h[a - 1, b - 1] += j / 2
        h[b - 1, a - 1] += j / 2
    return h


def tri_evolve(theta: float, delta: float) -> MagnonAmplitudes:
    """Amplitudes on |100>, |010>, |001> after evolving |100> for time ``theta``."""
    spec = tri_spectrum(delta)
    phases = np.exp(-1j * theta * spec.eigenvalues)
    v = spec.eigenvectors
    return MagnonAmplitudes(v @ (phases * v[0, :]))


def _ring_energies(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = 2 * np.pi * np.arange(n) / n
    return k, 1.0 - np.cos(k)


def ring_evolve(n: int, theta: float) -> MagnonAmplitudes:
    """Ring amplitudes after evolving a flip on site 1.

    ``alpha_n = (1/N) sum_k exp(i theta E_k) exp(i k (n - 1))`` with
    ``E_k = 1 - cos k`` measured from the ferromagnetic level. Relative to
    the full Hamiltonian this drops the global phase ``exp(-i theta N / 4)``.
    """
    if n < 2:
        raise ValueError(f"ring needs at least 2 sites, got {n}")
    k, e = _ring_energies(n)
    sites = np.arange(n)
    vals = np.exp(1j * theta * e)[None, :] * np.exp(1j * np.outer(sites, k))
    return MagnonAmplitudes(vals.sum(axis=1) / n)


def ring_return_probability(n, theta) -> np.ndarray:
    """``|alpha_1(theta)|**2`` for an array of times; ``n = inf`` gives ``J0**2``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if n == INF:
        return np.array([alpha1_large_N(t) for t in theta])
    n = int(n)
    if n < 2:
        raise ValueError(f"ring needs at least 2 sites, got {n}")
    _, e = _ring_energies(n)
    out = np.empty(theta.shape)
    # chunk to bound memory for long grids on large rings
    step = max(1, 2_000_000 // n)
    for i in range(0, theta.size, step):
        amp = np.exp(1j * np.outer(theta[i : i + step], e)).mean(axis=1)
        out[i : i + step] = np.abs(amp) ** 2
    return out


def _spin_ops(n: int):
    """Full-register S^x, S^y, S^z for each site (1-based list index - 1)."""
    eye = np.eye(2)
    ops = []
    for q in range(n):
        row = []
        for p in (X, Y, Z):
            m = np.ones((1, 1), dtype=complex)
            for r in range(n):
                m = np.kron(m, p / 2 if r == q else eye)
            row.append(m)
        ops.append(row)
    return ops


def hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense ``2**N`` exchange Hamiltonian in units of J (real symmetric)."""
    n = spec.n_qubits
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
    ops = _spin_ops(n)
    h = np.zeros((2**n, 2**n), dtype=complex)
    for a, b, j in spec.bonds():
        for s in range(3):
            h += j * ops[a - 1][s] @ ops[b - 1][s]
    return h.real


@lru_cache(maxsize=32)
def _eig(spec: ChainSpec):
    evals, evecs = np.linalg.eigh(hamiltonian(spec))
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return evals, evecs


def dense_evolve(spec: ChainSpec, theta: float, psi0: PureState) -> PureState:
    """``exp(-i H theta) psi0`` by full diagonalization."""
    if psi0.n_qubits != spec.n_qubits:
        raise ValueError("initial state does not match the chain size")
    evals, evecs = _eig(spec)
    coeff = evecs.T @ psi0.amplitudes
    out = evecs @ (np.exp(-1j * theta * evals) * coeff)
    return PureState(spec.n_qubits, out)


def total_sz(n: int) -> np.ndarray:
    """Diagonal of sum_k S^z_k in the computational basis (|0> is spin up)."""
    idx = np.arange(2**n)
    ones = np.array([bin(i).count("1") for i in idx])
    return (n - 2 * ones) / 2


def _j0_series(x: float) -> float:
    q = -(x * x) / 4.0
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)):
            return total


def _j0_miller(x: float) -> float:
    # backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by
    # J_0 + 2 sum J_{2k} = 1
    m = 2 * ((int(x) + 40) // 2)
    jp1, jk = 0.0, 1e-30
    norm = 0.0
    j0 = 0.0
    for k in range(m, 0, -1):
        jm1 = (2 * k / x) * jk - jp1
        jp1, jk = jk, jm1
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * jk
        if abs(jk) > 1e250:
            jp1 *= 1e-250
            jk *= 1e-250
            norm *= 1e-250
        if k - 1 == 0:
            j0 = jk
    norm += j0
    return j0 / norm


def bessel_j0(x: float) -> float:
    """Zeroth-order Bessel function of the first kind for ``|x| <= 50``."""
    x = abs(float(x))
    if x > BESSEL_MAX_ARG:
        raise ValueError(f"|x| = {x} exceeds the supported range {BESSEL_MAX_ARG}")
    if x <= 8.0:
        return _j0_series(x)
    return _j0_miller(x)


def alpha1_large_N(theta: float) -> float:
    """Infinite-ring limit of ``|alpha_1|**2``, i.e. ``J0(theta)**2``."""
    if theta < 0:
        raise ValueError("theta must be non-negative")
    return bessel_j0(theta) ** 2


def revival_time(n: int, threshold: float = 0.01, step: float = 0.01, max_theta: float | None = None):
    """First time after the initial drop below 1/2 at which the return
    probability of an ``n``-site ring exceeds the infinite-ring curve by
    ``threshold``, i.e. when the wave that went around the ring comes back.

    The infinite-ring reference is a ring of ``3 n`` sites, whose own echo
    lies beyond the search range. Returns ``None`` if no revival occurs
    before ``max_theta`` (default ``2 n + 10``).
    """
    if n < 2:
        raise ValueError(f"ring needs at least 2 sites, got {n}")
    max_theta = 2 * n + 10 if max_theta is None else max_theta
    grid = step * np.arange(int(math.ceil(max_theta / step)) + 1)
    dropped = False
    chunk = 2000
    for i in range(0, grid.size, chunk):
        g = grid[i : i + chunk]
        p = ring_return_probability(n, g)
        ref = ring_return_probability(3 * n, g)
        for j in range(g.size):
            if not dropped:
                dropped = p[j] < 0.5
            elif p[j] - ref[j] > threshold:
                return float(g[j])
    return None
