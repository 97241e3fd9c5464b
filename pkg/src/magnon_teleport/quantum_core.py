"""Dense state-vector and density-matrix algebra for small qubit registers.

Basis convention: qubit 1 is the leftmost symbol of a ket and the most
significant bit of the basis index, so ``|q1 q2 ... qN>`` has index
``sum(q_k * 2**(N - k))``. Internally a register reshapes to ``(2,) * N``
with axis ``k - 1`` belonging to qubit ``k``.

Correlator tables hold Pauli (sigma) coefficients ``c_P = Tr(rho P)`` so that
``rho = 2**-N * sum_P c_P P``. A product of spin operators ``S = sigma / 2``
of weight ``w`` therefore carries an extra factor ``2**-w`` relative to the
Pauli string with the same letters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 12
NORM_TOL = 1e-10
UNITARY_TOL = 1e-10

PAULI_LETTERS = "IXYZ"
PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
I2, X, Y, Z = PAULIS


class CapacityError(ValueError):
    """Register larger than the dense cap."""


def _check_size(n_qubits: int) -> None:
    if n_qubits < 1:
        raise ValueError(f"need at least one qubit, got {n_qubits}")
    if n_qubits > MAX_QUBITS:
        raise CapacityError(f"{n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_size(self.n_qubits)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = True) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError(f"length {amps.size} is not a power of two")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("zero vector cannot be normalized")
            amps = amps / norm
        return cls(n, amps)

    @classmethod
    def basis(cls, bits: str) -> "PureState":
        """Computational basis state from a bit string such as ``"100"``."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_size(self.n_qubits)
        mat = _frozen(self.matrix)
        d = 2**self.n_qubits
        if mat.shape != (d, d):
            raise ValueError(f"expected {d}x{d} matrix, got {mat.shape}")
        if not np.allclose(mat, mat.conj().T, atol=NORM_TOL, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, not 1")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        d = 2**n_qubits
        return cls(n_qubits, np.eye(d) / d)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        if not self.letters or set(self.letters) - set(PAULI_LETTERS):
            raise ValueError(f"invalid Pauli string {self.letters!r}")

    @property
    def weight(self) -> int:
        return sum(ch != "I" for ch in self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        """1-based sites carrying a non-identity letter."""
        return tuple(i + 1 for i, ch in enumerate(self.letters) if ch != "I")

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for ch in self.letters:
            out = np.kron(out, PAULIS[PAULI_LETTERS.index(ch)])
        return out

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True)
class CorrelatorTable:
    """Pauli coefficients ``c_P`` stored densely as a real ``(4,) * N`` array.

    Axis ``k - 1`` indexes the letter (I, X, Y, Z) on qubit ``k``.
    """

    n_qubits: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_size(self.n_qubits)
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.shape != (4,) * self.n_qubits:
            raise ValueError(f"expected shape {(4,) * self.n_qubits}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_entries(cls, n_qubits: int, entries: dict) -> "CorrelatorTable":
        c = np.zeros((4,) * n_qubits)
        for key, value in entries.items():
            letters = str(key)
            if len(letters) != n_qubits:
                raise ValueError(f"{letters!r} does not act on {n_qubits} qubits")
            PauliString(letters)
            c[tuple(PAULI_LETTERS.index(ch) for ch in letters)] = value
        return cls(n_qubits, c)

    def __getitem__(self, key) -> float:
        letters = str(key)
        return float(self.coeffs[tuple(PAULI_LETTERS.index(ch) for ch in letters)])

    def entries(self, atol: float = 1e-12) -> dict[str, float]:
        """Nonzero coefficients keyed by Pauli string."""
        out = {}
        for idx in zip(*np.nonzero(np.abs(self.coeffs) > atol)):
            out["".join(PAULI_LETTERS[i] for i in idx)] = float(self.coeffs[idx])
        return out

    def weights(self) -> np.ndarray:
        """Weight of every entry, same shape as ``coeffs``."""
        grids = np.meshgrid(*([np.arange(4)] * self.n_qubits), indexing="ij")
        return sum((g != 0).astype(int) for g in grids)

    def weight_histogram(self, atol: float = 1e-12) -> dict[int, int]:
        w = self.weights()[np.abs(self.coeffs) > atol]
        return {int(k): int(v) for k, v in zip(*np.unique(w, return_counts=True))}

    def spin_coefficients(self, atol: float = 1e-12) -> dict[str, float]:
        """Coefficients of ``rho`` on spin-operator products ``S_P = P / 2**w``.

        ``rho = sum_P s_P S_P`` with ``s_P = c_P * 2**(w - N)``.
        """
        return {
            key: val * 2.0 ** (PauliString(key).weight - self.n_qubits)
            for key, val in self.entries(atol).items()
        }


def tensor(a: PureState, b: PureState) -> PureState:
    return PureState(a.n_qubits + b.n_qubits, np.kron(a.amplitudes, b.amplitudes))


def density_from_pure(psi: PureState) -> DensityMatrix:
    return DensityMatrix(psi.n_qubits, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def _check_sites(sites, n_qubits: int) -> list[int]:
    sites = [int(s) for s in sites]
    if not sites:
        raise ValueError("site list is empty")
    if len(set(sites)) != len(sites):
        raise ValueError(f"repeated sites in {sites}")
    for s in sites:
        if not 1 <= s <= n_qubits:
            raise ValueError(f"site {s} outside 1..{n_qubits}")
    return sites


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduce ``rho`` onto ``keep`` (1-based sites), kept in ascending order."""
    keep = sorted(_check_sites(keep, rho.n_qubits))
    n = rho.n_qubits
    t = rho.matrix.reshape((2,) * (2 * n))
    ket = list(range(n))
    bra = list(range(n, 2 * n))
    for q in range(n):
        if q + 1 not in keep:
            bra[q] = ket[q]
    out_ket = [q for q in range(n) if q + 1 in keep]
    out_bra = [q + n for q in out_ket]
    reduced = np.einsum(t, ket + bra, out_ket + out_bra)
    d = 2 ** len(keep)
    return DensityMatrix(len(keep), reduced.reshape(d, d))


def pauli_expand(rho: DensityMatrix) -> CorrelatorTable:
    """``c_P = Tr(rho P)`` for all ``4**N`` Pauli strings."""
    n = rho.n_qubits
    t = rho.matrix.reshape((2,) * (2 * n))
    # contract one site at a time; each contraction moves a Pauli index to the back
    for q in range(n):
        # remaining ket axis of site q is 0, bra axis is n - q
        t = np.tensordot(t, PAULIS, axes=([0, n - q], [2, 1]))
    coeffs = t.reshape((4,) * n)
    if np.max(np.abs(coeffs.imag), initial=0.0) > 1e-10:
        raise ValueError("correlators are not real; matrix is not Hermitian")
    return CorrelatorTable(n, coeffs.real)


def pauli_reconstruct(table: CorrelatorTable) -> DensityMatrix:
    """``rho = 2**-N * sum_P c_P P``."""
    n = table.n_qubits
    t = table.coeffs.astype(complex)
    for _ in range(n):
        # leading Pauli index -> (ket, bra) pair appended at the back
        t = np.tensordot(t, PAULIS, axes=([0], [0]))
    # axes are now (k1, b1, k2, b2, ...); gather kets then bras
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    d = 2**n
    mat = t.transpose(order).reshape(d, d) / d
    return DensityMatrix(n, mat)


def fidelity_pure(psi: PureState, rho: DensityMatrix) -> float:
    if psi.n_qubits != rho.n_qubits:
        raise ValueError(
            f"dimension mismatch: {psi.n_qubits}-qubit state vs {rho.n_qubits}-qubit matrix"
        )
    v = psi.amplitudes
    f = float(np.real(np.vdot(v, rho.matrix @ v)))
    return min(max(f, 0.0), 1.0)


def check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"single-qubit gate must be 2x2, got {u.shape}")
    if not np.allclose(u.conj().T @ u, I2, atol=UNITARY_TOL, rtol=0):
        raise ValueError("gate is not unitary")
    return u


def _apply_on_axis(t: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(u, t, axes=([1], [axis])), 0, axis)


def apply_local_unitary(state, site: int, u):
    """Apply a 2x2 unitary on ``site`` of a PureState or DensityMatrix."""
    u = check_unitary(u)
    n = state.n_qubits
    _check_sites([site], n)
    q = site - 1
    if isinstance(state, PureState):
        t = _apply_on_axis(state.tensor(), u, q)
        return PureState(n, t.ravel())
    if isinstance(state, DensityMatrix):
        t = state.matrix.reshape((2,) * (2 * n))
        t = _apply_on_axis(t, u, q)
        t = _apply_on_axis(t, u.conj(), q + n)
        return DensityMatrix(n, t.reshape(state.dim, state.dim))
    raise TypeError(f"unsupported state type {type(state).__name__}")


def permute_qubits(state, order):
    """Reorder qubits so that new qubit ``k`` is old qubit ``order[k - 1]``."""
    n = state.n_qubits
    order = _check_sites(order, n)
    if len(order) != n:
        raise ValueError("order must list every site exactly once")
    axes = [s - 1 for s in order]
    if isinstance(state, PureState):
        return PureState(n, state.tensor().transpose(axes).ravel())
    t = state.matrix.reshape((2,) * (2 * n)).transpose(axes + [a + n for a in axes])
    return DensityMatrix(n, t.reshape(state.dim, state.dim))


def all_pauli_strings(n_qubits: int):
    for letters in itertools.product(PAULI_LETTERS, repeat=n_qubits):
        yield PauliString("".join(letters))


def random_pure_state(n_qubits: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return PureState.from_amplitudes(v)


def random_density_matrix(n_qubits: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    d = 2**n_qubits
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(n_qubits, m / np.trace(m).real)
