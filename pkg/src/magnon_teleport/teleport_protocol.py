"""Single-qubit teleportation through an N-qubit channel.

Alice holds the unknown input qubit plus every channel qubit except Bob's.
Her register is ordered input-first, then the remaining channel sites in
register order. Writing the channel as ``|phi0>|0>_B + |phi1>|1>_B``:

    xi1 = |0>|phi0>    xi2 = |0>|phi1>    xi3 = |1>|phi0>    xi4 = |1>|phi1>

and ``(a|0> + b|1>) x channel = xi1 a|0> + xi2 a|1> + xi3 b|0> + xi4 b|1>``.
Alice measures along ``xi1 +- xi4`` and ``xi2 +- xi3`` (each xi normalized
first, so the four directions stay orthonormal for imbalanced channels) and
the orthogonal complement of their span.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .quantum_core import CapacityError, DensityMatrix, I2, PureState, X, Y, Z, permute_qubits

PERFECT_TOL = 1e-9
ZERO_TOL = 1e-12
ORTHO_TOL = 1e-10
BRUTE_FORCE_MAX = 6

OUTCOME_LABELS = ("xi1+xi4", "xi1-xi4", "xi2+xi3", "xi3-xi2")

AXIAL_INPUTS = (
    (1.0, 0.0),
    (0.0, 1.0),
    (1 / math.sqrt(2), 1 / math.sqrt(2)),
    (1 / math.sqrt(2), -1 / math.sqrt(2)),
    (1 / math.sqrt(2), 1j / math.sqrt(2)),
    (1 / math.sqrt(2), -1j / math.sqrt(2)),
)


class ProtocolError(ValueError):
    """Channel cannot support the protocol (a branch has zero weight)."""


class DecompositionError(ProtocolError):
    """Bob's two branches are not orthogonal, so the xi directions clash."""


@dataclass(frozen=True)
class TeleportSetup:
    channel: PureState | DensityMatrix
    bob_site: int
    input: tuple[complex, complex]

    def __post_init__(self):
        a, b = (complex(v) for v in self.input)
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-12:
            raise ValueError("input amplitudes are not normalized")
        object.__setattr__(self, "input", (a, b))
        if not 1 <= self.bob_site <= self.channel.n_qubits:
            raise ValueError(f"bob site {self.bob_site} outside 1..{self.channel.n_qubits}")

    @property
    def input_vector(self) -> np.ndarray:
        return np.array(self.input, dtype=complex)


@dataclass(frozen=True)
class MeasurementBasis:
    vectors: np.ndarray = field(repr=False)  # columns, Alice register order
    primary_count: int = 4
    balanced: bool = True


@dataclass(frozen=True)
class OutcomeRecord:
    index: int
    label: str
    probability: float
    bob_state: DensityMatrix | None
    correction: np.ndarray = field(repr=False)
    fidelity_after_correction: float | None


@dataclass(frozen=True)
class ProtocolReport:
    outcomes: list[OutcomeRecord]
    average_fidelity: float
    perfect: bool
    success_probability: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes])

    @property
    def primary_probabilities(self) -> np.ndarray:
        return self.probabilities[:4]

    @property
    def primary_fidelities(self) -> list[float | None]:
        return [o.fidelity_after_correction for o in self.outcomes[:4]]

    @property
    def complement_probability(self) -> float:
        return float(self.probabilities[4:].sum())

    def to_dict(self) -> dict:
        return {
            "average_fidelity": self.average_fidelity,
            "perfect": self.perfect,
            "success_probability": self.success_probability,
            "outcomes": [
                {
                    "index": o.index,
                    "label": o.label,
                    "probability": o.probability,
                    "fidelity": o.fidelity_after_correction,
                }
                for o in self.outcomes
                if o.index < 4 or o.probability > ZERO_TOL
            ],
        }


@dataclass(frozen=True)
class ChannelAnalysis:
    operators: np.ndarray = field(repr=False)  # (outcomes, 2, 2), Bob x input
    singular_values: np.ndarray = field(repr=False)  # (outcomes, 2), descending
    verdict: str

    @property
    def perfect(self) -> bool:
        return self.verdict == "perfect"


@dataclass(frozen=True)
class TeleportScheme:
    """Alice's basis and Bob's corrections, frozen from an ideal channel."""

    n_qubits: int
    bob_site: int
    basis: MeasurementBasis
    corrections: np.ndarray = field(repr=False)  # (outcomes, 2, 2)
    analysis: ChannelAnalysis


# -- decomposition ---------------------------------------------------------


def bob_last(channel, bob: int):
    """Reorder the channel so Bob's qubit is last, other sites in order."""
    n = channel.n_qubits
    order = [s for s in range(1, n + 1) if s != bob] + [bob]
    return permute_qubits(channel, order)


def bob_branches(channel: PureState, bob: int) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized ``phi0, phi1`` with ``channel = phi0|0>_B + phi1|1>_B``."""
    t = bob_last(channel, bob).amplitudes.reshape(-1, 2)
    return t[:, 0].copy(), t[:, 1].copy()


def xi_decompose(channel: PureState, bob: int):
    phi0, phi1 = bob_branches(channel, bob)
    zero = np.zeros_like(phi0)
    xi1 = np.concatenate([phi0, zero])
    xi2 = np.concatenate([phi1, zero])
    xi3 = np.concatenate([zero, phi0])
    xi4 = np.concatenate([zero, phi1])
    return xi1, xi2, xi3, xi4


def build_measurement_basis(xis) -> MeasurementBasis:
    xi1, xi2, xi3, xi4 = (np.asarray(v, dtype=complex) for v in xis)
    n1, n2 = np.linalg.norm(xi1), np.linalg.norm(xi2)
    if n1 < ZERO_TOL or n2 < ZERO_TOL:
        raise ProtocolError("a Bob branch has zero weight; channel carries no entanglement")
    if abs(np.vdot(xi1, xi2)) > ORTHO_TOL:
        raise DecompositionError("Bob's branches phi0 and phi1 are not orthogonal")
    u1, u2 = xi1 / n1, xi2 / n2
    u3, u4 = xi3 / np.linalg.norm(xi3), xi4 / np.linalg.norm(xi4)
    primary = np.column_stack(
        [(u1 + u4), (u1 - u4), (u2 + u3), (u3 - u2)]
    ) / math.sqrt(2)
    complement = scipy.linalg.null_space(primary.conj().T)
    vectors = np.hstack([primary, complement])
    balanced = abs(n1**2 - np.linalg.norm(xi4) ** 2) <= PERFECT_TOL
    return MeasurementBasis(vectors, 4, bool(balanced))


def conditional_operators(channel: PureState, bob: int, basis: MeasurementBasis) -> np.ndarray:
    """``M[m]`` maps the input ``(a, b)`` to Bob's unnormalized state on outcome m."""
    xi1, xi2, xi3, xi4 = xi_decompose(channel, bob)
    # rows of proj: <v_m|xi_j>
    proj = basis.vectors.conj().T @ np.column_stack([xi1, xi2, xi3, xi4])
    ops = np.empty((proj.shape[0], 2, 2), dtype=complex)
    ops[:, 0, 0] = proj[:, 0]
    ops[:, 1, 0] = proj[:, 1]
    ops[:, 0, 1] = proj[:, 2]
    ops[:, 1, 1] = proj[:, 3]
    return ops


def _verdict(svals: np.ndarray) -> str:
    equal = np.abs(svals[:, 0] - svals[:, 1]) <= PERFECT_TOL
    if equal.all():
        return "perfect"
    nonzero = svals[:, 0] > ZERO_TOL
    if (svals[nonzero, 1] > ZERO_TOL).all():
        return "probabilistic"
    return "broken"


def analyze_channel(channel: PureState, bob: int) -> ChannelAnalysis:
    """Perfect iff every conditional operator is proportional to a unitary."""
    basis = build_measurement_basis(xi_decompose(channel, bob))
    ops = conditional_operators(channel, bob, basis)
    svals = np.linalg.svd(ops, compute_uv=False)
    return ChannelAnalysis(ops, svals, _verdict(svals))


def _polar_corrections(ops: np.ndarray) -> np.ndarray:
    u, s, vh = np.linalg.svd(ops)
    corr = np.conj(np.swapaxes(u @ vh, 1, 2))
    corr[s[:, 0] <= ZERO_TOL] = I2
    return corr


def prepare_scheme(channel: PureState, bob: int) -> TeleportScheme:
    basis = build_measurement_basis(xi_decompose(channel, bob))
    ops = conditional_operators(channel, bob, basis)
    svals = np.linalg.svd(ops, compute_uv=False)
    analysis = ChannelAnalysis(ops, svals, _verdict(svals))
    return TeleportScheme(channel.n_qubits, bob, basis, _polar_corrections(ops), analysis)


# -- protocol --------------------------------------------------------------


def _label(m: int) -> str:
    return OUTCOME_LABELS[m] if m < 4 else f"complement-{m - 4}"


def _report(bob_unnormalized_dm: np.ndarray, scheme: TeleportScheme, psi_in: np.ndarray) -> ProtocolReport:
    outcomes = []
    avg = 0.0
    perfect = True
    for m, rho in enumerate(bob_unnormalized_dm):
        p = float(np.real(np.trace(rho)))
        c = scheme.corrections[m]
        if p > ZERO_TOL:
            corrected = c @ (rho / p) @ c.conj().T
            corrected = (corrected + corrected.conj().T) / 2
            fid = float(np.real(np.vdot(psi_in, corrected @ psi_in)))
            fid = min(max(fid, 0.0), 1.0)
            state = DensityMatrix(1, corrected / np.trace(corrected).real)
            avg += p * fid
            perfect &= fid >= 1 - PERFECT_TOL
        else:
            p = max(p, 0.0)
            fid, state = None, None
        outcomes.append(OutcomeRecord(m, _label(m), p, state, c, fid))
    success = float(sum(o.probability for o in outcomes[:4]))
    return ProtocolReport(outcomes, float(avg), bool(perfect), success)


def _pure_bob_states(channel: PureState, scheme: TeleportScheme, psi_in: np.ndarray) -> np.ndarray:
    joint = np.kron(psi_in, bob_last(channel, scheme.bob_site).amplitudes).reshape(-1, 2)
    bob = scheme.basis.vectors.conj().T @ joint  # (outcomes, 2)
    return np.einsum("mi,mj->mij", bob, bob.conj())


def run_teleport(setup: TeleportSetup, scheme: TeleportScheme | None = None) -> ProtocolReport:
    """Teleport the setup's input through a pure channel."""
    if not isinstance(setup.channel, PureState):
        raise TypeError("run_teleport needs a pure channel; use run_teleport_mixed")
    scheme = scheme or prepare_scheme(setup.channel, setup.bob_site)
    psi = setup.input_vector
    return _report(_pure_bob_states(setup.channel, scheme, psi), scheme, psi)


def run_teleport_mixed(channel: DensityMatrix, scheme: TeleportScheme, input) -> ProtocolReport:
    """Teleport through a mixed channel with the basis and corrections of ``scheme``."""
    if channel.n_qubits != scheme.n_qubits:
        raise ValueError(
            f"channel has {channel.n_qubits} qubits, scheme expects {scheme.n_qubits}"
        )
    psi = np.asarray(input, dtype=complex)
    if abs(np.vdot(psi, psi).real - 1) > 1e-12:
        raise ValueError("input amplitudes are not normalized")
    rho_ch = bob_last(channel, scheme.bob_site).matrix
    joint = np.kron(np.outer(psi, psi.conj()), rho_ch)
    d = joint.shape[0] // 2
    joint = joint.reshape(d, 2, d, 2)
    v = scheme.basis.vectors
    half = np.einsum("am,abcd->mbcd", v.conj(), joint, optimize=True)
    bob = np.einsum("mbcd,cm->mbd", half, v, optimize=True)
    return _report(bob, scheme, psi)


def average_fidelity(
    channel,
    bob: int,
    scheme: TeleportScheme | None = None,
    mode: str = "axial",
    samples: int = 100_000,
    seed: int = 0,
):
    """Input-averaged teleportation fidelity.

    ``axial`` averages the six Pauli eigenstates, which is exact for the
    uniform average since the fidelity is quadratic in the input state.
    ``monte_carlo`` returns ``(mean, standard_error)`` over Haar inputs.
    """
    if scheme is None:
        if not isinstance(channel, PureState):
            raise ValueError("a mixed channel needs a scheme from its ideal counterpart")
        scheme = prepare_scheme(channel, bob)
    if mode == "axial":
        inputs = AXIAL_INPUTS
    elif mode == "monte_carlo":
        inputs = haar_inputs(samples, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "axial":
        return float(np.mean([_fidelity_for_input(channel, scheme, psi) for psi in inputs]))
    # the corrected output is linear in the input density matrix, so build that
    # map once and evaluate all samples against it
    sup = _corrected_map(channel, scheme)
    rho_in = np.einsum("si,sj->sij", inputs, inputs.conj())
    out = np.einsum("abij,sij->sab", sup, rho_in)
    fids = np.real(np.einsum("sa,sab,sb->s", inputs.conj(), out, inputs))
    return float(fids.mean()), float(fids.std(ddof=1) / math.sqrt(len(fids)))


def _corrected_map(channel, scheme: TeleportScheme) -> np.ndarray:
    """``E[a, b, i, j]``: Bob's corrected output summed over outcomes for input ``|i><j|``."""
    sup = np.empty((2, 2, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1
            bob = _bob_blocks(channel, scheme, unit)
            sup[:, :, i, j] = sum(c @ r @ c.conj().T for c, r in zip(scheme.corrections, bob))
    return sup


def _bob_blocks(channel, scheme: TeleportScheme, rho_in: np.ndarray) -> np.ndarray:
    """Bob's unnormalized states per outcome for an input operator ``rho_in``."""
    if isinstance(channel, PureState):
        amps = bob_last(channel, scheme.bob_site).amplitudes
        rho_ch = np.outer(amps, amps.conj())
    else:
        rho_ch = bob_last(channel, scheme.bob_site).matrix
    d = rho_ch.shape[0]
    joint = np.kron(rho_in, rho_ch).reshape(d, 2, d, 2)
    v = scheme.basis.vectors
    return np.einsum("mbcd,cm->mbd", np.einsum("am,abcd->mbcd", v.conj(), joint), v)


def _fidelity_for_input(channel, scheme: TeleportScheme, psi) -> float:
    if isinstance(channel, PureState):
        psi = np.asarray(psi, dtype=complex)
        return _report(_pure_bob_states(channel, scheme, psi), scheme, psi).average_fidelity
    return run_teleport_mixed(channel, scheme, psi).average_fidelity


def haar_inputs(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def average_fidelity_bloch(channel, bob: int, scheme: TeleportScheme | None = None) -> float:
    """Uniform-average fidelity from the affine Bloch map (cross-check for ``average_fidelity``).

    Teleportation with fixed corrections acts on the input Bloch vector r as
    ``r -> T r + t``; the sphere average of ``(1 + r.(T r + t)) / 2`` is
    ``1/2 + Tr(T) / 6``.
    """
    if scheme is None:
        scheme = prepare_scheme(channel, bob)
    paulis = (X, Y, Z)
    cols = []
    for k, p in enumerate(paulis):
        plus = _bloch_out(channel, scheme, _eigvec(p, +1))
        minus = _bloch_out(channel, scheme, _eigvec(p, -1))
        cols.append((plus - minus) / 2)
    return 0.5 + float(np.trace(np.column_stack(cols))) / 6


def _eigvec(p: np.ndarray, sign: int) -> np.ndarray:
    w, v = np.linalg.eigh(p)
    return v[:, int(np.argmin(np.abs(w - sign)))]


def _bloch_out(channel, scheme: TeleportScheme, psi: np.ndarray) -> np.ndarray:
    if isinstance(channel, PureState):
        bob = _pure_bob_states(channel, scheme, psi)
    else:
        bob = _bob_blocks(channel, scheme, np.outer(psi, psi.conj()))
    out = sum(c @ r @ c.conj().T for c, r in zip(scheme.corrections, bob))
    return np.array([np.real(np.trace(out @ p)) for p in (X, Y, Z)])


# -- independent oracle ---------------------------------------------------


def brute_force_teleport(setup: TeleportSetup) -> ProtocolReport:
    """Protocol from first principles with explicit loops and projectors.

    Shares no code with ``run_teleport``: the joint state is built in natural
    qubit order (input qubit first, then channel sites 1..N), the measurement
    directions and their completion are recomputed here, and Bob's states come
    from explicit projector arithmetic on the full joint density matrix.
    """
    ch = setup.channel
    if not isinstance(ch, PureState):
        raise TypeError("brute_force_teleport needs a pure channel")
    n = ch.n_qubits
    if n > BRUTE_FORCE_MAX:
        raise CapacityError(f"brute-force oracle limited to {BRUTE_FORCE_MAX} channel qubits")
    bob = setup.bob_site
    total = n + 1  # joint register: qubit 0 is the input
    dim_alice = 2**n

    def bits_of(index: int, width: int) -> list[int]:
        return [(index >> (width - 1 - k)) & 1 for k in range(width)]

    # Bob branches of the channel, Alice-side index runs over non-Bob sites
    phi = np.zeros((2, 2 ** (n - 1)), dtype=complex)
    for idx in range(2**n):
        bits = bits_of(idx, n)
        rest = [bits[s] for s in range(n) if s != bob - 1]
        r = 0
        for bit in rest:
            r = 2 * r + bit
        phi[bits[bob - 1], r] += ch.amplitudes[idx]

    xi = {}
    for name, x_bit, b in (("1", 0, 0), ("2", 0, 1), ("3", 1, 0), ("4", 1, 1)):
        vec = np.zeros(dim_alice, dtype=complex)
        for r in range(2 ** (n - 1)):
            vec[x_bit * 2 ** (n - 1) + r] = phi[b, r]
        nrm = math.sqrt(sum(abs(c) ** 2 for c in vec))
        if nrm < ZERO_TOL:
            raise ProtocolError("a Bob branch has zero weight")
        xi[name] = vec / nrm
    dirs = [
        (xi["1"] + xi["4"]) / math.sqrt(2),
        (xi["1"] - xi["4"]) / math.sqrt(2),
        (xi["2"] + xi["3"]) / math.sqrt(2),
        (xi["3"] - xi["2"]) / math.sqrt(2),
    ]
    q, _ = np.linalg.qr(np.column_stack(dirs + [np.eye(dim_alice)[:, k] for k in range(dim_alice)]))
    dirs = dirs + [q[:, k] for k in range(4, dim_alice)]

    # joint state in natural order
    joint = np.kron(setup.input_vector, ch.amplitudes)

    # map Alice-register index + Bob bit to natural joint index
    def joint_index(alice_idx: int, bob_bit: int) -> int:
        a_bits = bits_of(alice_idx, n)
        x_bit, rest = a_bits[0], a_bits[1:]
        chan = list(rest[: bob - 1]) + [bob_bit] + list(rest[bob - 1 :])
        out = x_bit
        for bit in chan:
            out = 2 * out + bit
        return out

    lookup = np.array([[joint_index(a, b) for b in (0, 1)] for a in range(dim_alice)])
    rho_joint = np.outer(joint, joint.conj())

    def bob_operator(v: np.ndarray, psi_in: np.ndarray) -> np.ndarray:
        # Bob amplitudes (<v| x 1) |psi_in x channel>
        full = np.kron(psi_in, ch.amplitudes)
        return np.array([sum(v[a].conjugate() * full[lookup[a, b]] for a in range(dim_alice)) for b in (0, 1)])

    outcomes = []
    avg = 0.0
    perfect = True
    psi_in = setup.input_vector
    for m, v in enumerate(dirs):
        proj = np.zeros((2**total, 2**total), dtype=complex)
        for b in (0, 1):
            for a in range(dim_alice):
                for a2 in range(dim_alice):
                    if v[a] != 0 and v[a2] != 0:
                        proj[lookup[a, b], lookup[a2, b]] += v[a] * v[a2].conjugate()
        post = proj @ rho_joint @ proj
        p = float(np.real(np.trace(post)))
        rho_b = np.zeros((2, 2), dtype=complex)
        for b in (0, 1):
            for b2 in (0, 1):
                rho_b[b, b2] = sum(post[lookup[a, b], lookup[a, b2]] for a in range(dim_alice))
        cond = np.column_stack(
            [bob_operator(v, np.array([1, 0], dtype=complex)), bob_operator(v, np.array([0, 1], dtype=complex))]
        )
        if np.linalg.norm(cond) > ZERO_TOL * 10:
            w, _ = scipy.linalg.polar(cond)
            corr = w.conj().T
        else:
            corr = np.eye(2, dtype=complex)
        if p > ZERO_TOL:
            out = corr @ rho_b @ corr.conj().T / p
            fid = float(np.real(psi_in.conj() @ out @ psi_in))
            fid = min(max(fid, 0.0), 1.0)
            avg += p * fid
            perfect &= fid >= 1 - PERFECT_TOL
            state = DensityMatrix(1, (out + out.conj().T) / 2 / np.real(np.trace(out)))
        else:
            p, fid, state = max(p, 0.0), None, None
        outcomes.append(OutcomeRecord(m, _label(m), p, state, corr, fid))
    success = float(sum(o.probability for o in outcomes[:4]))
    return ProtocolReport(outcomes, float(avg), bool(perfect), success)
