"""JSON channel files (``magnon-channel/1``).

::

    {"format": "magnon-channel/1", "n_qubits": 3, "bob_qubit": 3,
     "amplitudes": [{"basis_index": 1, "re": 0.707..., "im": 0.0}, ...]}

Only nonzero amplitudes are written, in ascending basis order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .quantum_core import PureState

FORMAT_TAG = "magnon-channel/1"
LOAD_NORM_TOL = 1e-9


class ChannelFormatError(ValueError):
    pass


def channel_to_dict(state: PureState, bob: int) -> dict:
    amps = []
    for idx in np.nonzero(state.amplitudes)[0]:
        a = state.amplitudes[idx]
        amps.append({"basis_index": int(idx), "re": float(a.real), "im": float(a.imag)})
    return {"format": FORMAT_TAG, "n_qubits": state.n_qubits, "bob_qubit": int(bob), "amplitudes": amps}


def dumps_channel(state: PureState, bob: int) -> str:
    return json.dumps(channel_to_dict(state, bob), indent=2) + "\n"


def save_channel(state: PureState, bob: int, path) -> None:
    Path(path).write_text(dumps_channel(state, bob), encoding="utf-8")


def channel_from_dict(data: dict) -> tuple[PureState, int]:
    try:
        if data["format"] != FORMAT_TAG:
            raise ChannelFormatError(f"unsupported format tag {data['format']!r}")
        n = int(data["n_qubits"])
        bob = int(data["bob_qubit"])
        if n < 1 or not 1 <= bob <= n:
            raise ChannelFormatError(f"bob qubit {bob} invalid for {n} qubits")
        amps = np.zeros(2**n, dtype=complex)
        for entry in data["amplitudes"]:
            idx = int(entry["basis_index"])
            if not 0 <= idx < 2**n:
                raise ChannelFormatError(f"basis index {idx} out of range")
            amps[idx] += complex(float(entry["re"]), float(entry["im"]))
    except (KeyError, TypeError) as exc:
        raise ChannelFormatError(f"malformed channel file: {exc}") from exc
    norm = float(np.vdot(amps, amps).real)
    if abs(norm - 1) > LOAD_NORM_TOL:
        raise ChannelFormatError(f"amplitudes have norm^2 {norm}, expected 1")
    return PureState(n, amps / np.sqrt(norm)), bob


def load_channel(path) -> tuple[PureState, int]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ChannelFormatError(f"{path}: expected a JSON object")
    return channel_from_dict(data)
