"""Pure states, two-outcome observables and their joint outcome statistics.

Dense numpy matrices throughout; the largest space needed is three qubits.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidObservable,
    NonCommutingContext,
    NonHermitian,
)
from .probability import PLUS_MINUS, TOL, ZERO_ONE, Distribution, VariableSet

PROJECTOR = "projector"
SIGN = "sign"

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    return _PAULI[axis.upper()].copy()


def tensor(*factors) -> np.ndarray:
    """Kronecker product of any number of matrices or vectors."""
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def embed(op, site: int, n_qubits: int) -> np.ndarray:
    """Single-qubit ``op`` acting on qubit ``site`` of an ``n_qubits`` register."""
    factors = [_PAULI["I"]] * n_qubits
    factors[site] = np.asarray(op, dtype=complex)
    return tensor(*factors)


def spin_along(direction: Sequence[float]) -> np.ndarray:
    """n . sigma for a unit vector ``direction`` = (x, y, z)."""
    x, y, z = direction
    return x * _PAULI["X"] + y * _PAULI["Y"] + z * _PAULI["Z"]


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ b - b @ a)))


def is_hermitian(m: np.ndarray, tol: float = TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    tol: float = field(default=TOL, repr=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > self.tol:
            raise ValueError(f"state has norm {norm:.12f}; use PureState.normalized")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, vector) -> "PureState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm <= TOL:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class YesNoObservable:
    """Two-outcome observable.

    ``convention`` is ``"projector"`` (eigenvalues 0, 1) or ``"sign"``
    (eigenvalues -1, +1).
    """

    name: str
    matrix: np.ndarray
    convention: str = PROJECTOR
    tol: float = field(default=TOL, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"observable {self.name} must be square, got {m.shape}")
        if self.convention not in (PROJECTOR, SIGN):
            raise InvalidObservable(f"unknown convention {self.convention!r}")
        if not is_hermitian(m, self.tol):
            raise NonHermitian(f"observable {self.name} is not Hermitian")
        target = m if self.convention == PROJECTOR else np.eye(m.shape[0])
        if np.max(np.abs(m @ m - target)) > self.tol:
            what = "M^2 = M" if self.convention == PROJECTOR else "M^2 = I"
            raise InvalidObservable(f"observable {self.name} violates {what}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def projector(self) -> np.ndarray:
        """Projector onto the outcome 1 (resp. +1)."""
        if self.convention == PROJECTOR:
            return self.matrix
        return (np.eye(self.dim) + self.matrix) / 2

    @property
    def domain(self) -> str:
        return ZERO_ONE if self.convention == PROJECTOR else PLUS_MINUS


@dataclass(frozen=True)
class Context:
    """Jointly measurable observables; commutativity is checked on construction."""

    observables: tuple[YesNoObservable, ...]
    tol: float = field(default=TOL, repr=False)

    def __post_init__(self):
        obs = tuple(self.observables)
        object.__setattr__(self, "observables", obs)
        if not obs:
            raise ValueError("empty context")
        dims = {o.dim for o in obs}
        if len(dims) != 1:
            raise DimensionMismatch(f"observables act on different dimensions {sorted(dims)}")
        names = [o.name for o in obs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate observable names {names}")
        conventions = {o.convention for o in obs}
        if len(conventions) != 1:
            raise InvalidObservable("all observables in a context must share one convention")
        for a, b in itertools.combinations(obs, 2):
            c = commutator_norm(a.matrix, b.matrix)
            if c > self.tol:
                raise NonCommutingContext(f"{a.name} and {b.name} do not commute (|[.,.]| = {c:.3g})")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.observables)

    @property
    def dim(self) -> int:
        return self.observables[0].dim

    @property
    def domain(self) -> str:
        return self.observables[0].domain


def expectation(state: PureState, m, tol: float = TOL) -> float:
    """<psi|M|psi> for Hermitian ``M``."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape != (state.dim, state.dim):
        raise DimensionMismatch(f"operator shape {m.shape} does not match state dimension {state.dim}")
    if not is_hermitian(m, tol):
        raise NonHermitian("expectation requires a Hermitian operator")
    psi = state.amplitudes
    value = np.vdot(psi, m @ psi)
    if abs(value.imag) > tol:
        raise NonHermitian(f"expectation has imaginary part {value.imag:.3g}")
    return float(value.real)


def product(observables: Iterable[YesNoObservable], dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    for o in observables:
        out = out @ o.matrix
    return out


def joint_distribution(state: PureState, context: Context) -> Distribution:
    """Outcome statistics of a commuting set of observables.

    The weight of an atom is ``<psi| prod_i P_i^{x_i} |psi>`` with
    ``P^1 = P`` and ``P^0 = I - P``. Sign observables are handled through
    their +1 projectors and the result is reported in the +/-1 domain.
    """
    if state.dim != context.dim:
        raise DimensionMismatch(f"state dimension {state.dim} != observable dimension {context.dim}")
    eye = np.eye(context.dim, dtype=complex)
    projectors = [o.projector for o in context.observables]
    psi = state.amplitudes
    n = len(projectors)
    weights = np.empty(2**n)
    for index, bits in enumerate(itertools.product((0, 1), repeat=n)):
        v = psi
        for p, bit in zip(projectors, bits):
            v = (p if bit else eye - p) @ v
        weights[index] = np.vdot(psi, v).real
    weights[np.abs(weights) < 1e-15] = 0.0
    vars = VariableSet(context.names, context.domain)
    return Distribution(vars, np.clip(weights, 0.0, None) / weights.sum())


def _encode_complex(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _decode_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(state: PureState) -> list:
    return _encode_complex(state.amplitudes)


def state_from_json(data) -> PureState:
    return PureState.normalized(_decode_complex(data))


def observable_to_json(obs: YesNoObservable) -> dict:
    return {"matrix": _encode_complex(obs.matrix), "convention": obs.convention}


def observable_from_json(name: str, data: Mapping) -> YesNoObservable:
    return YesNoObservable(name, _decode_complex(data["matrix"]), data.get("convention", PROJECTOR))
