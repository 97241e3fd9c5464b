"""Teleportation channels generated by Heisenberg exchange dynamics, the
teleportation protocol through them, and their nuclear-spin-bath decoherence."""

__version__ = "0.1.0"

from .channel_builder import (  # noqa: E402
    ConditionReport,
    RootSearch,
    build_ghz,
    build_modified_w,
    build_n_magnon_channel,
    build_one_magnon_channel,
    build_symmetric_w,
    build_w_like,
    closed_form_tau,
    one_magnon_condition,
    ring_condition_lhs,
    solve_ring_times,
    solve_tri_times,
    tri_condition_lhs,
)
from .magnon_dynamics import (  # noqa: E402
    INF,
    ChainSpec,
    MagnonAmplitudes,
    alpha1_large_N,
    bessel_j0,
    dense_evolve,
    ring_evolve,
    tri_evolve,
)
from .quantum_core import (  # noqa: E402
    CorrelatorTable,
    DensityMatrix,
    PauliString,
    PureState,
    density_from_pure,
    fidelity_pure,
    partial_trace,
    pauli_expand,
    pauli_reconstruct,
    tensor,
)
from .spin_bath import BathSpec, compare_ghz_w, decohere, envelope, fidelity_vs_time  # noqa: E402
from .teleport_protocol import (  # noqa: E402
    TeleportSetup,
    analyze_channel,
    average_fidelity,
    brute_force_teleport,
    run_teleport,
    run_teleport_mixed,
)
