"""Teleportation channel states, their perfect-teleportation conditions, and
the switch-off times at which exchange dynamics produces them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .magnon_dynamics import INF, MagnonAmplitudes, bessel_j0, ring_return_probability
from .quantum_core import PureState

CONDITION_TOL = 1e-9
BRACKET_WIDTH = 1e-12
ARCCOS_M18 = math.acos(-1 / 8)


@dataclass(frozen=True)
class ConditionReport:
    residual: float
    tolerance: float = CONDITION_TOL

    @property
    def satisfied(self) -> bool:
        return abs(self.residual) <= self.tolerance


@dataclass(frozen=True)
class RootSearch:
    window: tuple[float, float] = (0.0, 20.0)
    grid_step: float = 0.01
    tolerance: float = CONDITION_TOL
    max_roots: int | None = None

    def __post_init__(self):
        lo, hi = self.window
        if not lo < hi:
            raise ValueError(f"empty window {self.window}")
        if self.grid_step <= 0 or self.tolerance <= 0:
            raise ValueError("grid_step and tolerance must be positive")

    def grid(self) -> np.ndarray:
        lo, hi = self.window
        n = int(math.ceil((hi - lo) / self.grid_step - 1e-9))
        g = lo + self.grid_step * np.arange(n + 1)
        g[-1] = hi
        return g


def _check_site(site: int, n: int) -> None:
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside 1..{n}")


def _sign_value(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be + or -, got {sign!r}")


# -- conditions ------------------------------------------------------------


def one_magnon_condition(c, bob: int, tolerance: float = CONDITION_TOL) -> ConditionReport:
    """Residual ``|C_bob|^2 - sum_{i != bob} |C_i|^2`` over one-magnon amplitudes."""
    values = c.values if isinstance(c, MagnonAmplitudes) else np.asarray(c, dtype=complex)
    _check_site(bob, values.size)
    p = np.abs(values) ** 2
    return ConditionReport(float(2 * p[bob - 1] - p.sum()), tolerance)


def magnon_amplitudes(state: PureState) -> MagnonAmplitudes:
    """Project a register state onto its one-magnon components."""
    n = state.n_qubits
    return MagnonAmplitudes([state.amplitudes[1 << (n - s)] for s in range(1, n + 1)])


def magnon_numbers(state: PureState, atol: float = 1e-12) -> set[int]:
    idx = np.nonzero(np.abs(state.amplitudes) > atol)[0]
    return {bin(int(i)).count("1") for i in idx}


# -- channel states ----------------------------------------------------------


def _phases(profile, n: int) -> np.ndarray:
    if isinstance(profile, str):
        j = np.arange(1, n)
        if profile == "fourier":
            return 2 * np.pi * j / n
        if profile == "uniform":
            return np.zeros(n - 1)
        raise ValueError(f"unknown phase profile {profile!r}")
    phases = np.asarray(profile, dtype=float)
    if phases.shape != (n - 1,):
        raise ValueError(f"explicit profile needs {n - 1} phases, got {phases.shape}")
    return phases


def build_one_magnon_channel(n: int, bob: int | None = None, sign="+", phase_profile="fourier") -> PureState:
    """Equal-weight one-magnon channel with half the weight on Bob's flip.

    Non-Bob sites are numbered ``j = 1 .. N-1`` in register order and carry
    phase ``phi_j`` from the profile.
    """
    if n < 2:
        raise ValueError(f"channel needs at least 2 qubits, got {n}")
    bob = n if bob is None else bob
    _check_site(bob, n)
    s = _sign_value(sign)
    phases = _phases(phase_profile, n)
    vals = np.zeros(n, dtype=complex)
    others = [site for site in range(1, n + 1) if site != bob]
    vals[np.array(others) - 1] = np.exp(1j * phases) / math.sqrt(2 * (n - 1))
    vals[bob - 1] = s / math.sqrt(2)
    return MagnonAmplitudes(vals).to_state()


def build_n_magnon_channel(n: int, magnons: int, bob: int | None = None, sign="+", strict: bool = False) -> PureState:
    """Equal-weight n-magnon channel split evenly on Bob's qubit.

    With ``strict`` the builder refuses ``N < 2n``, where the state is only the
    spin-flipped mirror of a fewer-magnon channel.
    """
    if not 1 <= magnons <= n - 1:
        raise ValueError(f"magnon count {magnons} outside 1..{n - 1}")
    if strict and n < 2 * magnons:
        raise ValueError(f"{magnons} magnons need at least {2 * magnons} qubits")
    bob = n if bob is None else bob
    _check_site(bob, n)
    s = _sign_value(sign)
    others = [site for site in range(1, n + 1) if site != bob]
    norm = 1 / math.sqrt(2 * math.comb(n - 1, magnons))
    weight = math.sqrt((n - magnons) / magnons)
    amps = np.zeros(2**n, dtype=complex)

    def index(flipped) -> int:
        return sum(1 << (n - site) for site in flipped)

    for flipped in combinations(others, magnons):
        amps[index(flipped)] += norm
    for flipped in combinations(others, magnons - 1):
        amps[index(flipped + (bob,))] += s * weight * norm
    return PureState(n, amps)


def build_w_like() -> PureState:
    """(|100> + |010> + |001> + |111>) / 2."""
    amps = np.zeros(8, dtype=complex)
    amps[[4, 2, 1, 7]] = 0.5
    return PureState(3, amps)


def build_ghz(n: int) -> PureState:
    if n < 2:
        raise ValueError(f"GHZ state needs at least 2 qubits, got {n}")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return PureState(n, amps)


def build_symmetric_w(n: int = 3) -> PureState:
    """Equal-weight one-magnon state, which is not a perfect channel for N > 2."""
    return MagnonAmplitudes(np.full(n, 1 / math.sqrt(n))).to_state()


def build_modified_w(phi: float = 0.0, bob: int = 3) -> PureState:
    """Three-qubit channel with weight 1/2 on Bob's flip and equal phase ``phi``
    on the two other flips.

    ``bob = 3`` with ``phi = 0`` gives (|100> + |010> + sqrt2 |001>) / 2.
    """
    _check_site(bob, 3)
    vals = np.full(3, 0.5 * np.exp(1j * phi), dtype=complex)
    vals[bob - 1] = 1 / math.sqrt(2)
    return MagnonAmplitudes(vals).to_state()


# -- switch-off conditions ---------------------------------------------------


def tri_condition_lhs(theta, delta: float):
    """``3 cos(theta (1 + 2 delta) / 2) + cos(3 theta / 2) + 1.5 cos((1 - delta) theta) - 1``.

    Equals ``4.5 * (|a1|^2 - |a2|^2 - |a3|^2)`` for the three-site amplitudes.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    t = np.asarray(theta, dtype=float)
    out = (
        3 * np.cos(t * (1 + 2 * delta) / 2)
        + np.cos(3 * t / 2)
        + 1.5 * np.cos((1 - delta) * t)
        - 1
    )
    return float(out) if out.ndim == 0 else out


def ring_condition_lhs(n, theta):
    """``2 |alpha_1|^2 - 1`` for the ring; ``n = inf`` uses ``2 J0^2 - 1``."""
    if n != INF and int(n) < 2:
        raise ValueError(f"ring needs at least 2 sites, got {n}")
    scalar = np.ndim(theta) == 0
    out = 2 * ring_return_probability(n, theta) - 1
    return float(out[0]) if scalar else out


def closed_form_tau(n: int) -> float:
    """Switch-off times ``(2/3)(2 pi n + arccos(-1/8))`` of the closed three-site chain."""
    if n < 0:
        raise ValueError("period index must be non-negative")
    return 2 / 3 * (2 * math.pi * n + ARCCOS_M18)


def bisect(f: Callable[[float], float], lo: float, hi: float, width: float = BRACKET_WIDTH) -> float:
    flo = f(lo)
    if flo == 0:
        return lo
    if f(hi) == 0:
        return hi
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def find_roots(f: Callable, search: RootSearch, vector_f: Callable | None = None) -> list[float]:
    """All zeros of ``f`` in the window: sign changes on the grid refined by
    bisection, plus grazing zeros found as local minima of ``|f|``."""
    grid = search.grid()
    vals = np.asarray(vector_f(grid) if vector_f else [f(t) for t in grid], dtype=float)
    roots: list[float] = []

    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            r = bisect(f, grid[i], grid[i + 1])
            if abs(f(r)) <= search.tolerance:
                roots.append(r)
    if vals[-1] == 0:
        roots.append(float(grid[-1]))

    mag = np.abs(vals)
    for i in range(1, len(grid) - 1):
        if mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1] and vals[i - 1] * vals[i + 1] > 0 and vals[i] != 0:
            if vals[i - 1] * vals[i] < 0 or vals[i] * vals[i + 1] < 0:
                continue
            res = minimize_scalar(
                lambda t: abs(f(t)),
                bounds=(grid[i - 1], grid[i + 1]),
                method="bounded",
                options={"xatol": BRACKET_WIDTH},
            )
            if abs(f(res.x)) <= search.tolerance:
                roots.append(float(res.x))

    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > search.grid_step / 2:
            merged.append(r)
    if search.max_roots is not None:
        merged = merged[: search.max_roots]
    return merged


def solve_tri_times(delta: float, search: RootSearch = RootSearch()) -> list[float]:
    """Switch-off times of the three-site chain in ``search.window``."""
    return find_roots(
        lambda t: tri_condition_lhs(t, delta),
        search,
        vector_f=lambda g: tri_condition_lhs(g, delta),
    )


def solve_ring_times(n, search: RootSearch = RootSearch()) -> list[float]:
    """Switch-off times of the ring; ``n = inf`` solves ``J0(theta)^2 = 1/2``."""
    if n == INF:
        f = lambda t: 2 * bessel_j0(t) ** 2 - 1  # noqa: E731
        return find_roots(f, search)
    return find_roots(
        lambda t: ring_condition_lhs(n, t),
        search,
        vector_f=lambda g: ring_condition_lhs(n, g),
    )


def first_root(roots: Sequence[float]) -> float | None:
    return roots[0] if roots else None
