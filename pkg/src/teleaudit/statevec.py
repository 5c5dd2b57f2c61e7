"""Pure-state linear algebra over labeled qubit registers.

States are dense complex vectors indexed so that the first label in the
register is the most significant bit of the basis-state index.  Every
operation is a pure function returning new immutable values; norms are
re-checked after each step so drift surfaces immediately instead of
corrupting downstream branch probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

NORM_TOL = 1e-12
PRUNE_TOL = 1e-14

SQ2 = 1.0 / sqrt(2.0)

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQ2

NAMED_GATES = {"i": I2, "x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z, "h": HADAMARD}


class LabelError(ValueError):
    """A qubit label is missing, duplicated, or conflicts between registers."""


class UnitarityError(ValueError):
    """A supplied 2x2 matrix is not unitary within tolerance."""


class BasisError(ValueError):
    """A measurement basis is malformed (arity, orthonormality, span)."""


class InvariantViolation(RuntimeError):
    """An internal contract broke: norm drift, probability leak, bad density matrix."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over an ordered tuple of distinct qubit labels."""

    labels: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate qubit labels in {labels}")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2 ** len(labels),):
            raise ValueError(
                f"amplitude vector has length {amps.shape}, expected {2 ** len(labels)}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise InvariantViolation("non-finite amplitude")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantViolation(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def axis(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LabelError(f"label {label} not in register {self.labels}") from None

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape([2] * self.n_qubits)

    def reorder(self, new_labels) -> "PureState":
        """Same state with the register permuted to ``new_labels``."""
        new_labels = tuple(new_labels)
        if set(new_labels) != set(self.labels):
            raise LabelError(f"cannot reorder {self.labels} to {new_labels}")
        perm = [self.labels.index(l) for l in new_labels]
        t = self.tensor_view().transpose(perm)
        return PureState(new_labels, t.reshape(-1))

    def amplitude(self, bits: str) -> complex:
        if len(bits) != self.n_qubits:
            raise ValueError(f"bitstring {bits!r} has wrong length for {self.labels}")
        return complex(self.amps[int(bits, 2)])

    def __repr__(self):
        terms = []
        for i, a in enumerate(self.amps):
            if abs(a) > 1e-9:
                terms.append(f"({a:.4g})|{format(i, f'0{self.n_qubits}b')}>")
        body = " + ".join(terms) if terms else "0"
        return f"PureState{self.labels}: {body}"


def from_terms(labels, terms: dict[str, complex], normalize: bool = False) -> PureState:
    """Build a state from a sparse ``{bitstring: amplitude}`` map."""
    labels = tuple(labels)
    amps = np.zeros(2 ** len(labels), dtype=complex)
    for bits, coeff in terms.items():
        if len(bits) != len(labels):
            raise ValueError(f"term {bits!r} does not match register {labels}")
        amps[int(bits, 2)] += coeff
    if normalize:
        n = np.linalg.norm(amps)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        amps = amps / n
    return PureState(labels, amps)


def basis_state(labels, bits: str) -> PureState:
    return from_terms(labels, {bits: 1.0})


def tensor(a: PureState, b: PureState) -> PureState:
    """Kronecker product; register order is a.labels followed by b.labels."""
    overlap = set(a.labels) & set(b.labels)
    if overlap:
        raise LabelError(f"registers share labels {sorted(overlap)}")
    return PureState(a.labels + b.labels, np.kron(a.amps, b.amps))


def _check_unitary(u: np.ndarray):
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise UnitarityError(f"expected a 2x2 matrix, got shape {u.shape}")
    if np.max(np.abs(u.conj().T @ u - I2)) > NORM_TOL:
        raise UnitarityError("matrix is not unitary within 1e-12")
    return u


def apply_1q(s: PureState, label: int, u: np.ndarray) -> PureState:
    """Apply a single-qubit unitary to one labeled qubit."""
    u = _check_unitary(u)
    ax = s.axis(label)
    t = s.tensor_view()
    t = np.moveaxis(t, ax, -1)
    t = t @ u.T
    t = np.moveaxis(t, -1, ax)
    return PureState(s.labels, t.reshape(-1))


def apply_cnot(s: PureState, control: int, target: int) -> PureState:
    """Flip the target bit on every basis state whose control bit is 1."""
    if control == target:
        raise LabelError("control and target must differ")
    ac, at = s.axis(control), s.axis(target)
    t = s.tensor_view().copy()
    # slice out the control=1 subspace and swap the target slices inside it
    idx0 = [slice(None)] * s.n_qubits
    idx1 = [slice(None)] * s.n_qubits
    idx0[ac] = 1
    idx1[ac] = 1
    idx0[at] = 0
    idx1[at] = 1
    block0 = t[tuple(idx0)].copy()
    t[tuple(idx0)] = t[tuple(idx1)]
    t[tuple(idx1)] = block0
    return PureState(s.labels, t.reshape(-1))


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal, complete basis for a projective measurement on ``arity`` qubits."""

    name: str
    arity: int
    vectors: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        dim = 2 ** self.arity
        if len(self.vectors) != dim:
            raise BasisError(f"basis {self.name!r} has {len(self.vectors)} vectors, needs {dim}")
        mat = np.array([v for _, v in self.vectors])
        if mat.shape != (dim, dim):
            raise BasisError(f"basis {self.name!r} vectors have wrong dimension")
        gram = mat.conj() @ mat.T
        if np.max(np.abs(gram - np.eye(dim))) > NORM_TOL:
            raise BasisError(f"basis {self.name!r} is not orthonormal within 1e-12")
        frozen = []
        for outcome, v in self.vectors:
            v = np.asarray(v, dtype=complex).copy()
            v.flags.writeable = False
            frozen.append((outcome, v))
        object.__setattr__(self, "vectors", tuple(frozen))


def computational_basis(arity: int) -> MeasurementBasis:
    vecs = []
    for i in range(2 ** arity):
        v = np.zeros(2 ** arity, dtype=complex)
        v[i] = 1.0
        vecs.append((format(i, f"0{arity}b"), v))
    return MeasurementBasis("computational", arity, tuple(vecs))


def bell_basis() -> MeasurementBasis:
    vecs = (
        ("Φ+", np.array([SQ2, 0, 0, SQ2], dtype=complex)),
        ("Φ-", np.array([SQ2, 0, 0, -SQ2], dtype=complex)),
        ("Ψ+", np.array([0, SQ2, SQ2, 0], dtype=complex)),
        ("Ψ-", np.array([0, SQ2, -SQ2, 0], dtype=complex)),
    )
    return MeasurementBasis("bell", 2, vecs)


def pm_basis() -> MeasurementBasis:
    """Product basis of |+->-type vectors; |±> = (|0> ± |1>)/√2."""
    plus = np.array([SQ2, SQ2])
    minus = np.array([SQ2, -SQ2])
    order = (("++", plus, plus), ("-+", minus, plus), ("--", minus, minus), ("+-", plus, minus))
    vecs = tuple((o, np.kron(u, v).astype(complex)) for o, u, v in order)
    return MeasurementBasis("pm", 2, vecs)


BASES = {"computational": None, "bell": bell_basis, "pm": pm_basis}


def get_basis(name: str, arity: int) -> MeasurementBasis:
    if name == "computational":
        return computational_basis(arity)
    if name not in BASES:
        raise BasisError(f"unknown basis {name!r}")
    basis = BASES[name]()
    if basis.arity != arity:
        raise BasisError(f"basis {name!r} has arity {basis.arity}, measurement needs {arity}")
    return basis


@dataclass(frozen=True)
class Branch:
    """One projective-measurement outcome: label string, probability, residual state."""

    outcome: str
    probability: float
    post_state: PureState | None  # None only when every label was measured


def measure(s: PureState, labels, basis: MeasurementBasis) -> list[Branch]:
    """Project onto every basis vector over ``labels``; measured labels leave the register.

    Branches below the pruning threshold are dropped.  Post-states carry no
    phase beyond the raw projection (renormalization divides by a positive
    real), so sign patterns survive for correction solving.
    """
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise LabelError(f"measured labels {labels} contain duplicates")
    axes = [s.axis(l) for l in labels]
    if basis.arity != len(labels):
        raise BasisError(
            f"basis {basis.name!r} has arity {basis.arity}, but {len(labels)} labels measured"
        )
    rest_axes = [i for i in range(s.n_qubits) if i not in axes]
    rest_labels = tuple(s.labels[i] for i in rest_axes)
    t = s.tensor_view().transpose(axes + rest_axes).reshape(2 ** len(labels), -1)

    branches = []
    total = 0.0
    for outcome, v in basis.vectors:
        proj = v.conj() @ t
        p = float(np.real(np.vdot(proj, proj)))
        total += p
        if p < PRUNE_TOL:
            continue
        if rest_labels:
            post = PureState(rest_labels, proj / sqrt(p))
        else:
            post = None
        branches.append(Branch(outcome, p, post))
    if abs(total - 1.0) > NORM_TOL:
        raise InvariantViolation(f"branch probabilities sum to {total!r}, expected 1")
    return branches


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 after aligning registers; invariant under global phase."""
    if set(a.labels) != set(b.labels):
        raise LabelError(f"label sets differ: {a.labels} vs {b.labels}")
    if a.labels != b.labels:
        b = b.reorder(a.labels)
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced density operator over an ordered label tuple."""

    labels: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        m = np.asarray(self.entries, dtype=complex)
        dim = 2 ** len(labels)
        if m.shape != (dim, dim):
            raise ValueError(f"density matrix shape {m.shape}, expected {(dim, dim)}")
        if np.max(np.abs(m - m.conj().T)) > NORM_TOL:
            raise InvariantViolation("density matrix is not Hermitian within 1e-12")
        if abs(np.trace(m).real - 1.0) > NORM_TOL or abs(np.trace(m).imag) > NORM_TOL:
            raise InvariantViolation("density matrix trace deviates from 1")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise InvariantViolation("density matrix has eigenvalue below -1e-10")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)


def reduce(s: PureState, keep) -> DensityMatrix:
    """Partial trace onto the ``keep`` labels (in the order given)."""
    keep = tuple(keep)
    axes = [s.axis(l) for l in keep]
    rest = [i for i in range(s.n_qubits) if i not in axes]
    t = s.tensor_view().transpose(axes + rest).reshape(2 ** len(keep), -1)
    return DensityMatrix(keep, t @ t.conj().T)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2)||a - b||_1 via eigenvalues of the Hermitian difference."""
    if a.labels != b.labels:
        raise LabelError(f"density matrices over different labels: {a.labels} vs {b.labels}")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a.entries - b.entries))))
