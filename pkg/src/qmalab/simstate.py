"""Dense statevector simulator for the coset-state constructions.

Amplitude index convention: qubit 0 is the most significant bit of the
basis-state index, matching the little-endian bit vectors of :mod:`qmalab.gf2`
(coordinate 0 first).  States are immutable; every operation returns a fresh
normalized state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gf2 import BitVector, CosetPair

QUBIT_CAP = 22
NORM_TOL = 1e-9
BRANCH_EPS = 1e-12

_SQRT2_INV = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class StateVector:
    """Pure state over num_qubits qubits as a dense complex amplitude vector."""

    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (2**self.num_qubits,):
            raise ValueError("amplitude length must be 2**num_qubits")
        n = np.linalg.norm(a)
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {n} deviates from 1 beyond {NORM_TOL}")
        a = a / n
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_amplitudes(cls, amps) -> StateVector:
        a = np.asarray(amps, dtype=np.complex128)
        m = int(np.log2(a.size))
        if 2**m != a.size:
            raise ValueError("amplitude length must be a power of two")
        return cls(a, m)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> StateVector:
        a = np.zeros(2**num_qubits, dtype=np.complex128)
        a[index] = 1.0
        return cls(a, num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def fidelity(self, other: StateVector) -> float:
        """|<self|other>|^2 (global-phase insensitive)."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def debug_dump(self) -> list[list[float]]:
        return [[float(z.real), float(z.imag)] for z in self.amplitudes]


@dataclass(frozen=True)
class BasisPredicate:
    """Pure boolean function on computational-basis labels of fixed arity."""

    eval: Callable[[tuple[int, ...]], int]
    arity: int
    table_fn: Callable[[], np.ndarray] | None = None

    def table(self) -> np.ndarray:
        """Boolean acceptance mask over all 2**arity basis indices."""
        if self.table_fn is not None:
            t = np.asarray(self.table_fn(), dtype=bool)
            if t.shape != (2**self.arity,):
                raise ValueError("predicate table has the wrong length")
            return t
        out = np.zeros(2**self.arity, dtype=bool)
        for idx in range(2**self.arity):
            bits = tuple((idx >> (self.arity - 1 - j)) & 1 for j in range(self.arity))
            out[idx] = bool(self.eval(bits))
        return out

    def complement(self) -> BasisPredicate:
        f = self.eval
        tf = self.table_fn
        return BasisPredicate(
            eval=lambda bits: 1 - int(f(bits)),
            arity=self.arity,
            table_fn=(lambda: ~np.asarray(tf(), dtype=bool)) if tf is not None else None,
        )


def predicate_from_table(table: np.ndarray) -> BasisPredicate:
    table = np.asarray(table, dtype=bool)
    arity = int(np.log2(table.size))
    if 2**arity != table.size:
        raise ValueError("table length must be a power of two")

    def _eval(bits: tuple[int, ...]) -> int:
        idx = 0
        for b in bits:
            idx = (idx << 1) | (int(b) & 1)
        return int(table[idx])

    return BasisPredicate(eval=_eval, arity=arity, table_fn=lambda: table)


def constant_predicate(arity: int, value: int) -> BasisPredicate:
    v = bool(value)
    return BasisPredicate(
        eval=lambda bits: int(v),
        arity=arity,
        table_fn=lambda: np.full(2**arity, v, dtype=bool),
    )


def _mask_int(mask: BitVector, num_qubits: int) -> int:
    if len(mask) != num_qubits:
        raise ValueError("mask length must equal the qubit count")
    return mask.to_index()


def apply_pauli(s: StateVector, x_mask: BitVector, z_mask: BitVector) -> StateVector:
    """X^x Z^z with the phase convention (-1)^(z . basis) applied before the flip."""
    m = s.num_qubits
    x = _mask_int(x_mask, m)
    z = _mask_int(z_mask, m)
    idx = np.arange(2**m, dtype=np.int64)
    phases = np.where(_popcount_parity(idx & z), -1.0, 1.0)
    out = np.empty_like(s.amplitudes)
    out[idx ^ x] = s.amplitudes * phases
    return StateVector(out, m)


def _popcount_parity(a: np.ndarray) -> np.ndarray:
    v = a.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return (v & 1).astype(bool)


def apply_hadamard(s: StateVector, theta_mask: BitVector) -> StateVector:
    """Hadamard on every qubit i with theta_i = 1."""
    m = s.num_qubits
    _mask_int(theta_mask, m)
    amps = s.amplitudes.copy()
    for q, bit in enumerate(theta_mask.bits):
        if not bit:
            continue
        shaped = amps.reshape(2**q, 2, 2 ** (m - q - 1))
        lo = shaped[:, 0, :].copy()
        hi = shaped[:, 1, :].copy()
        shaped[:, 0, :] = (lo + hi) * _SQRT2_INV
        shaped[:, 1, :] = (lo - hi) * _SQRT2_INV
    return StateVector(amps, m)


def coset_superposition(c: CosetPair, bit: int) -> StateVector:
    """Uniform superposition over the coset S + bit*delta."""
    m = c.ambient_dim
    if m > QUBIT_CAP:
        raise ValueError(f"ambient dimension exceeds the {QUBIT_CAP}-qubit cap")
    amps = np.zeros(2**m, dtype=np.complex128)
    shift = c.delta if bit else BitVector.zeros(m)
    scale = 2 ** (-c.s.dim / 2)
    for v in c.s.elements():
        amps[(v ^ shift).to_index()] = scale
    return StateVector(amps, m)


def project_predicate(
    s: StateVector, p: BasisPredicate
) -> tuple[float, StateVector | None, StateVector | None]:
    """Coherent projection onto {basis states with p = 1} and its complement.

    Returns (prob_one, post_one, post_zero); a branch with probability below
    1e-12 is reported as None.
    """
    if p.arity != s.num_qubits:
        raise ValueError("predicate arity must equal the qubit count")
    mask = p.table()
    amps = s.amplitudes
    prob_one = float(np.sum(np.abs(amps[mask]) ** 2))
    prob_zero = float(np.sum(np.abs(amps[~mask]) ** 2))

    def _branch(keep: np.ndarray, prob: float) -> StateVector | None:
        if prob < BRANCH_EPS:
            return None
        out = np.where(keep, amps, 0.0) / np.sqrt(prob)
        return StateVector(out, s.num_qubits)

    return prob_one, _branch(mask, prob_one), _branch(~mask, prob_zero)


def measure_zx(
    s: StateVector, theta: BitVector, f: BasisPredicate
) -> tuple[float, StateVector | None]:
    """Binary-outcome measurement {M[theta,f], I - M[theta,f]}.

    M[theta,f] conjugates the f-acceptance projector by Hadamards on the
    qubits selected by theta; the post state is returned in the computational
    basis with the trailing Hadamard layer already applied.
    """
    rotated = apply_hadamard(s, theta)
    prob, post_one, _ = project_predicate(rotated, f)
    if post_one is None:
        return prob, None
    return prob, apply_hadamard(post_one, theta)


def measure_zx_both(
    s: StateVector, theta: BitVector, f: BasisPredicate
) -> tuple[float, StateVector | None, StateVector | None]:
    """Like measure_zx but also returns the rejected branch."""
    rotated = apply_hadamard(s, theta)
    prob, post_one, post_zero = project_predicate(rotated, f)
    back = lambda st: apply_hadamard(st, theta) if st is not None else None
    return prob, back(post_one), back(post_zero)


def tensor(a: StateVector, b: StateVector, cap: int = QUBIT_CAP) -> StateVector:
    """Kronecker product with qubit ordering a-then-b."""
    total = a.num_qubits + b.num_qubits
    if total > cap:
        raise ValueError(f"tensor product spans {total} qubits, above the cap {cap}")
    return StateVector(np.kron(a.amplitudes, b.amplitudes), total)


def tensor_many(states: list[StateVector], cap: int = QUBIT_CAP) -> StateVector:
    out = states[0]
    for st in states[1:]:
        out = tensor(out, st, cap=cap)
    return out


def trace_distance_pure(a: StateVector, b: StateVector) -> float:
    """Trace distance between two pure states: sqrt(1 - |<a|b>|^2)."""
    return float(np.sqrt(max(0.0, 1.0 - a.fidelity(b))))


def hadamard_matrix(theta: BitVector) -> np.ndarray:
    """Dense H^theta (Hadamard on the selected qubits, identity elsewhere)."""
    h1 = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
    eye = np.eye(2, dtype=np.complex128)
    out = np.array([[1.0 + 0.0j]])
    for bit in theta.bits:
        out = np.kron(out, h1 if bit else eye)
    return out


def zx_projector(theta: BitVector, f: BasisPredicate) -> np.ndarray:
    """Dense M[theta, f] = H^theta diag(f) H^theta (small registers only)."""
    if f.arity != len(theta):
        raise ValueError("arity mismatch")
    h = hadamard_matrix(theta)
    return h @ np.diag(f.table().astype(np.complex128)) @ h
