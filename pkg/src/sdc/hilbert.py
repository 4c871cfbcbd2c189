"""Position-basis indexing, state vectors, and operator application.

The single-particle space of 2N channels is indexed by a fixed embedding of
the signed labels: +n -> n-1 and -n -> N+n-1, so each half-axis occupies a
contiguous block and the ladder shift becomes block-cyclic.  Two-particle
states are flat complex vectors with a dims header; operators are either
signed permutations (one +-phase entry per column), dense matrices, or scipy
sparse matrices for the large structured two-particle unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, LabelOutOfRange

__all__ = [
    "TOL_EXACT",
    "TOL_CHAINED",
    "label_to_index",
    "index_to_label",
    "StateVector",
    "SignedPermutationOp",
    "DenseOp",
    "identity_perm",
    "compose_perms",
    "apply",
    "apply_full",
    "inner",
    "tensor",
    "partial_trace",
    "basis_state",
    "state_to_dict",
    "state_from_dict",
    "dense_of",
]

# Tolerances: quantities derived from exact +-1 arithmetic vs. chained
# floating-point operator products.
TOL_EXACT = 1e-12
TOL_CHAINED = 1e-10


def label_to_index(n: int, N: int) -> int:
    """Map signed channel label to basis index: +n -> n-1, -n -> N+n-1."""
    if n == 0 or abs(n) > N:
        raise LabelOutOfRange(f"label {n} outside +-1..+-{N}")
    return n - 1 if n > 0 else N + (-n) - 1


def index_to_label(i: int, N: int) -> int:
    """Inverse of label_to_index on 0..2N-1."""
    if not 0 <= i < 2 * N:
        raise LabelOutOfRange(f"index {i} outside 0..{2 * N - 1}")
    return i + 1 if i < N else -(i - N + 1)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a tensor product of position factors."""

    dims: tuple[int, ...]
    amp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        amp = np.asarray(self.amp, dtype=np.complex128).reshape(-1)
        if amp.size != int(np.prod(self.dims)):
            raise DimensionMismatch(
                f"{amp.size} amplitudes for dims {self.dims}"
            )
        object.__setattr__(self, "amp", amp)
        amp.setflags(write=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def grid(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amp.reshape(self.dims)


def basis_state(dims: tuple[int, ...], indices: tuple[int, ...]) -> StateVector:
    amp = np.zeros(int(np.prod(dims)), dtype=np.complex128)
    grid = amp.reshape(dims)
    grid[tuple(indices)] = 1.0
    return StateVector(dims, amp)


@dataclass(frozen=True)
class SignedPermutationOp:
    """Unitary with exactly one unit-modulus entry per row and column.

    Acts as |i> -> phase[i] |target[i]>.  `target` must be a bijection of
    0..dim-1 and every phase must have modulus 1; both are checked.
    """

    dim: int
    target: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        target = np.asarray(self.target, dtype=np.intp)
        phase = np.asarray(self.phase, dtype=np.complex128)
        if target.shape != (self.dim,) or phase.shape != (self.dim,):
            raise DimensionMismatch("target/phase length must equal dim")
        if not np.array_equal(np.sort(target), np.arange(self.dim)):
            raise DimensionMismatch("target is not a permutation")
        if np.max(np.abs(np.abs(phase) - 1.0)) > TOL_EXACT:
            raise DimensionMismatch("phases must have unit modulus")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "phase", phase)
        target.setflags(write=False)
        phase.setflags(write=False)

    def dense(self) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=np.complex128)
        m[self.target, np.arange(self.dim)] = self.phase
        return m

    def inverse(self) -> "SignedPermutationOp":
        inv_target = np.empty(self.dim, dtype=np.intp)
        inv_target[self.target] = np.arange(self.dim)
        inv_phase = np.empty(self.dim, dtype=np.complex128)
        inv_phase[self.target] = np.conj(self.phase)
        return SignedPermutationOp(self.dim, inv_target, inv_phase)


def identity_perm(dim: int) -> SignedPermutationOp:
    return SignedPermutationOp(dim, np.arange(dim), np.ones(dim, dtype=np.complex128))


def compose_perms(outer: SignedPermutationOp, inner: SignedPermutationOp) -> SignedPermutationOp:
    """Signed permutation equal to applying `inner` first, then `outer`."""
    if outer.dim != inner.dim:
        raise DimensionMismatch("composed permutations must share dim")
    return SignedPermutationOp(
        outer.dim,
        outer.target[inner.target],
        inner.phase * outer.phase[inner.target],
    )


@dataclass(frozen=True)
class DenseOp:
    """Plain dense operator; carrier for the small non-permutation gates."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"matrix shape {m.shape} for dim {self.dim}")
        object.__setattr__(self, "matrix", m)
        m.setflags(write=False)

    def dense(self) -> np.ndarray:
        return self.matrix


def dense_of(op) -> np.ndarray:
    """Materialize any supported operator form as a dense ndarray."""
    if isinstance(op, (SignedPermutationOp, DenseOp)):
        return op.dense()
    if sp.issparse(op):
        return op.toarray()
    return np.asarray(op, dtype=np.complex128)


def apply(op, subsystem: int, s: StateVector) -> StateVector:
    """Apply a single-factor operator to one tensor factor of a state.

    The operator acts on `dims[subsystem]` and as the identity elsewhere.
    Signed permutations are applied by index relocation, dense operators by a
    tensor contraction; neither path ever materializes an operator on the
    full product space.
    """
    if not 0 <= subsystem < len(s.dims):
        raise DimensionMismatch(f"no subsystem {subsystem} in dims {s.dims}")
    if op.dim != s.dims[subsystem]:
        raise DimensionMismatch(
            f"operator dim {op.dim} != subsystem dim {s.dims[subsystem]}"
        )
    moved = np.moveaxis(s.grid(), subsystem, 0)
    if isinstance(op, SignedPermutationOp):
        out = np.zeros_like(moved)
        out[op.target] = op.phase.reshape((-1,) + (1,) * (moved.ndim - 1)) * moved
    else:
        out = np.tensordot(dense_of(op), moved, axes=(1, 0))
    return StateVector(s.dims, np.moveaxis(out, 0, subsystem).reshape(-1))


def apply_full(op, s: StateVector) -> StateVector:
    """Apply an operator defined on the whole product space."""
    dim = s.amp.size
    if isinstance(op, SignedPermutationOp):
        if op.dim != dim:
            raise DimensionMismatch(f"operator dim {op.dim} != state dim {dim}")
        out = np.zeros_like(s.amp)
        out[op.target] = op.phase * s.amp
        return StateVector(s.dims, out)
    if sp.issparse(op):
        if op.shape != (dim, dim):
            raise DimensionMismatch(f"operator shape {op.shape} != state dim {dim}")
        return StateVector(s.dims, op @ s.amp)
    m = dense_of(op)
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"operator shape {m.shape} != state dim {dim}")
    return StateVector(s.dims, m @ s.amp)


def inner(a: StateVector, b: StateVector) -> complex:
    """Hermitian inner product <a|b>."""
    if a.dims != b.dims:
        raise DimensionMismatch(f"dims {a.dims} vs {b.dims}")
    return complex(np.vdot(a.amp, b.amp))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.dims + b.dims, np.kron(a.amp, b.amp))


def partial_trace(s: StateVector, keep: int) -> np.ndarray:
    """Reduced density matrix of one factor of a two-factor pure state."""
    if len(s.dims) != 2:
        raise DimensionMismatch(f"partial trace needs two subsystems, got dims {s.dims}")
    if keep not in (0, 1):
        raise DimensionMismatch(f"keep must be 0 or 1, got {keep}")
    m = s.grid()
    if keep == 0:
        return m @ m.conj().T
    return m.T @ m.conj()


def state_to_dict(s: StateVector) -> dict:
    """JSON-ready form: dims header plus [re, im] amplitude pairs."""
    return {
        "dims": list(s.dims),
        "amplitudes": [[float(a.real), float(a.imag)] for a in s.amp],
    }


def state_from_dict(d: dict) -> StateVector:
    amp = np.array([complex(re, im) for re, im in d["amplitudes"]], dtype=np.complex128)
    return StateVector(tuple(d["dims"]), amp)
