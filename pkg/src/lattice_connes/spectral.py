"""Dirac operators on ``H = A(L) (+) A(L)``, commutators and spectral norms.

Matrices act on spinors stacked as (upper block, lower block), so index
``c*N + k`` is component ``c`` at site ``k``. ``SIGMA_PLUS`` maps the lower
component into the upper one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .algebra import link_field
from .eigen import jacobi_eigh
from .lattice import LatticeSpec, backward_diff, build_shift, forward_diff

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = (SIGMA_1 + 1j * SIGMA_2) / 2
SIGMA_MINUS = (SIGMA_1 - 1j * SIGMA_2) / 2


class Family(str, enum.Enum):
    DM = "dm"
    NAIVE = "naive"
    WILSON = "wilson"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        key = {"dmgeneralized": "dm", "dm_generalized": "dm", "generalized": "dm"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown operator family {value!r}; expected one of "
                             f"{[f.value for f in cls]}") from None


@dataclass(frozen=True)
class DiracOperator:
    """Self-adjoint ``2N x 2N`` matrix with the data it was built from.

    ``link`` and ``lattice`` are kept so that distance code can use the
    closed-form constraint for the DM family.
    """

    matrix: np.ndarray
    family: Family
    lattice: LatticeSpec
    link: np.ndarray | None = field(default=None, compare=False)

    @property
    def sites(self) -> int:
        return self.matrix.shape[0] // 2


def _embed(block2: np.ndarray, op: np.ndarray) -> np.ndarray:
    return np.kron(block2, op)


def build_dirac_dm(omega, spec: LatticeSpec, T: np.ndarray | None = None) -> DiracOperator:
    """Generalized DM operator ``omega T sigma+ + T^dagger conj(omega) sigma-``.

    With ``omega = 1`` this is the free DM operator ``T sigma+ + T^dagger sigma-``.
    """
    w = link_field(omega, spec)
    if T is None:
        T = build_shift(spec)
    hop = w[:, None] * T
    m = _embed(SIGMA_PLUS, hop) + _embed(SIGMA_MINUS, hop.conj().T)
    return DiracOperator(m, Family.DM, spec, w)


def build_dirac_naive(spec: LatticeSpec) -> DiracOperator:
    """Symmetric difference ``i (T - T^dagger) / 2`` placed with ``sigma_1``."""
    T = build_shift(spec)
    nabla = 0.5j * (T - T.T)
    return DiracOperator(_embed(SIGMA_1, nabla), Family.NAIVE, spec)


def build_dirac_wilson(spec: LatticeSpec, r: float = 1.0) -> DiracOperator:
    """Naive operator plus ``-(r/2)(T + T^dagger - 2)`` placed with ``sigma_3``."""
    T = build_shift(spec)
    naive = build_dirac_naive(spec).matrix
    lap = T + T.T - 2.0 * np.eye(spec.sites)
    return DiracOperator(naive + _embed(SIGMA_3, -0.5 * r * lap), Family.WILSON, spec)


def build_dirac(family, spec: LatticeSpec, omega=None, r: float = 1.0) -> DiracOperator:
    family = Family.parse(family)
    if family is Family.DM:
        if omega is None:
            omega = np.ones(spec.sites, dtype=complex)
        return build_dirac_dm(omega, spec)
    if family is Family.NAIVE:
        return build_dirac_naive(spec)
    return build_dirac_wilson(spec, r)


def _matrix(D) -> np.ndarray:
    return D.matrix if isinstance(D, DiracOperator) else np.asarray(D)


def multiplication(f) -> np.ndarray:
    """``f`` acting diagonally on both spinor components."""
    f = np.asarray(f)
    return np.diag(np.concatenate([f, f]))


def commutator(D, f) -> np.ndarray:
    """``[D, f] = D f - f D``."""
    m = _matrix(D)
    f = np.asarray(f)
    if m.shape != (2 * f.size, 2 * f.size):
        raise ValueError(f"operator of shape {m.shape} does not act on {f.size} sites")
    ff = np.concatenate([f, f])
    # D @ diag(ff) - diag(ff) @ D without forming the diagonal matrices
    return m * ff[None, :] - ff[:, None] * m


def dm_commutator_closed_form(omega, spec: LatticeSpec, f) -> np.ndarray:
    """``omega (d+ f) T sigma+ + T^dagger conj(omega) (-d+ f) sigma-``."""
    T = build_shift(spec)
    hop = (np.asarray(omega) * forward_diff(spec, f))[:, None] * T
    return _embed(SIGMA_PLUS, hop) - _embed(SIGMA_MINUS, hop.conj().T)


def f_hamiltonian(D, f) -> np.ndarray:
    """``H(f) = [D, f]^dagger [D, f]``."""
    c = commutator(D, f)
    return c.conj().T @ c


def dm_hamiltonian_diagonal(omega, spec: LatticeSpec, f) -> np.ndarray:
    """Diagonal of ``H(f)`` for the DM family, upper block then lower block.

    Upper block ``|omega d+ f|^2``; lower block ``|T^dagger omega|^2 |d- f|^2``.
    """
    w = np.asarray(omega)
    upper = np.abs(w * forward_diff(spec, f)) ** 2
    shifted = build_shift(spec).T @ w
    lower = np.abs(shifted) ** 2 * np.abs(backward_diff(spec, f)) ** 2
    return np.concatenate([upper, lower])


def eigvalsh(h, method: str = "jacobi") -> np.ndarray:
    if method == "jacobi":
        return jacobi_eigh(h, vectors=False)
    if method == "lapack":
        return np.linalg.eigvalsh(h)
    raise ValueError(f"unknown eigensolver {method!r}")


def spectral_norm(m, method: str = "jacobi") -> float:
    """Operator norm ``sqrt(max eig(M^dagger M))``."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if m.size == 0:
        return 0.0
    lam = eigvalsh(m.conj().T @ m, method)
    return float(np.sqrt(max(lam[-1], 0.0)))


def dm_commutator_norm(omega, spec: LatticeSpec, f) -> float:
    """``max_k |omega(k) (d+ f)(k)|``, the DM-family commutator norm."""
    return float(np.max(np.abs(np.asarray(omega) * forward_diff(spec, f))))


def matrix_to_json(m) -> list:
    """Nested list of ``[re, im]`` pairs."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim != 3 or a.shape[-1] != 2:
        raise ValueError(f"expected rows of [re, im] pairs, got shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]
