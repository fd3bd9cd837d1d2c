"""Site functions, link fields, spinors and the U(1) gauge action.

A link field ``omega`` assigns one complex number to every link ``k -> k+1``.
Its modulus is an inverse lattice spacing and its phase a U(1) parallel
transport; ``omega`` need not be unitary.

All site-indexed quantities are plain numpy arrays of length ``N``; the only
structured value types are :class:`PolarizedLink` and :class:`SpinorField`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec


class SingularLinkError(ValueError):
    """A used link has zero amplitude."""

    def __init__(self, index: int, message: str | None = None):
        self.index = int(index)
        super().__init__(message or f"link field is singular at link {self.index}")


class GaugeError(ValueError):
    """A gauge transformation is not a unitary element of the algebra."""


def site_function(values, spec: LatticeSpec | None = None) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    if f.ndim != 1:
        raise ValueError(f"site function must be one-dimensional, got shape {f.shape}")
    if spec is not None and f.size != spec.sites:
        raise ValueError(f"expected {spec.sites} site values, got {f.size}")
    if not np.all(np.isfinite(f)):
        raise ValueError("site function has non-finite entries")
    return f


def link_field(values, spec: LatticeSpec | None = None) -> np.ndarray:
    """Coerce ``values`` to a complex link array and check it is non-singular.

    With ``spec`` given only the links the topology uses are checked; the
    last entry of an open chain may be zero.
    """
    w = np.asarray(values, dtype=complex)
    if w.ndim != 1:
        raise ValueError(f"link field must be one-dimensional, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("link field has non-finite entries")
    if spec is not None:
        if w.size != spec.sites:
            raise ValueError(f"expected {spec.sites} link values, got {w.size}")
        check_nonsingular(w, spec)
    return w


def check_nonsingular(omega, spec: LatticeSpec) -> None:
    amp = np.abs(np.asarray(omega))[spec.used_links]
    bad = np.flatnonzero(amp == 0)
    if bad.size:
        raise SingularLinkError(bad[0])


def unit_link(spec: LatticeSpec) -> np.ndarray:
    return np.ones(spec.sites, dtype=complex)


def random_link(spec: LatticeSpec, rng: np.random.Generator,
                amplitude_range=(0.5, 2.0), phase_range=(-np.pi, np.pi)) -> np.ndarray:
    """Random link field, log-uniform amplitudes and uniform phases."""
    lo, hi = amplitude_range
    if not 0 < lo <= hi:
        raise ValueError(f"amplitude range must satisfy 0 < lo <= hi, got {amplitude_range}")
    amp = np.exp(rng.uniform(np.log(lo), np.log(hi), spec.sites))
    # uniform on (lo, hi]: flip the half-open end of numpy's [lo, hi)
    plo, phi = phase_range
    phase = phi - rng.uniform(0.0, phi - plo, spec.sites)
    return amp * np.exp(1j * phase)


@dataclass(frozen=True)
class PolarizedLink:
    """``omega = a_plus**-1 * exp(1j * a_plus * potential)``.

    ``a_plus`` is the local lattice spacing and ``potential`` the U(1) gauge
    potential. The phase ``a_plus * potential`` lies in ``(-pi, pi]``, so the
    potential is only defined modulo ``2*pi / a_plus``.
    """

    a_plus: np.ndarray
    potential: np.ndarray

    @property
    def phase(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            ph = self.a_plus * self.potential
        ph = np.where(np.isinf(self.a_plus), 0.0, ph)
        # the product can round one ulp outside the branch
        ph = np.minimum(ph, np.pi)
        return np.where(ph <= -np.pi, np.pi, ph)

    def reconstruct(self) -> np.ndarray:
        return np.exp(1j * self.phase) / self.a_plus


def principal_arg(z) -> np.ndarray:
    """``angle(z)`` mapped into ``(-pi, pi]``."""
    a = np.angle(z)
    return np.where(a <= -np.pi, np.pi, a)


def polar_decompose(omega, spec: LatticeSpec | None = None) -> PolarizedLink:
    """Split a link field into spacing ``a_plus = 1/|omega|`` and potential.

    Raises
    ------
    SingularLinkError
        If a used link has zero amplitude. Without ``spec`` every link counts
        as used; an unused zero link of an open chain gets ``a_plus = inf``.
    """
    w = np.asarray(omega, dtype=complex)
    if spec is None:
        bad = np.flatnonzero(w == 0)
        if bad.size:
            raise SingularLinkError(bad[0])
    else:
        check_nonsingular(w, spec)
    amp = np.abs(w)
    with np.errstate(divide="ignore"):
        a_plus = 1.0 / amp
    potential = principal_arg(w) * amp
    return PolarizedLink(a_plus, potential)


def _gauge(u, n: int | None = None) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 1 or (n is not None and u.size != n):
        raise GaugeError(f"gauge transformation must have {n} entries, got shape {u.shape}")
    dev = np.max(np.abs(np.abs(u) - 1.0)) if u.size else 0.0
    if dev > 1e-10:
        raise GaugeError(f"gauge transformation is not unitary (max ||u|-1| = {dev:.3g})")
    return u


def random_gauge(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.exp(1j * rng.uniform(-np.pi, np.pi, n))


def _shift_targets(T) -> np.ndarray:
    """For each row of a shift matrix, the column holding its 1 (or -1)."""
    T = np.asarray(T)
    has = np.abs(T).sum(axis=1) > 0
    return np.where(has, np.argmax(np.abs(T), axis=1), -1)


def gauge_transform_link(omega, u, T) -> np.ndarray:
    """``omega'(k) = u(k) * omega(k) * conj(u(k+1))`` with ``k+1`` the shift target.

    A link with no target (the free end of an open chain) is left untouched.
    """
    w = np.asarray(omega, dtype=complex)
    u = _gauge(u, w.size)
    tgt = _shift_targets(T)
    if tgt.size != w.size:
        raise ValueError(f"shift acts on {tgt.size} sites but link field has {w.size}")
    out = w.copy()
    used = tgt >= 0
    out[used] = u[used] * w[used] * np.conj(u[tgt[used]])
    return out


def wilson_loop(omega) -> complex:
    """Product of link phases around a ring."""
    w = np.asarray(omega, dtype=complex)
    return complex(np.prod(w / np.abs(w)))


@dataclass(frozen=True)
class SpinorField:
    """Element of ``H = A(L) (+) A(L)``, stored as two site arrays."""

    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        up = np.asarray(self.upper, dtype=complex)
        lo = np.asarray(self.lower, dtype=complex)
        if up.shape != lo.shape or up.ndim != 1:
            raise ValueError("spinor components must be equal-length vectors, "
                             f"got {up.shape}, {lo.shape}")
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "lower", lo)

    @property
    def sites(self) -> int:
        return self.upper.size

    def as_vector(self) -> np.ndarray:
        """Stacked as (upper block, lower block)."""
        return np.concatenate([self.upper, self.lower])

    @classmethod
    def from_vector(cls, v) -> "SpinorField":
        v = np.asarray(v, dtype=complex)
        n = v.size // 2
        if v.ndim != 1 or 2 * n != v.size:
            raise ValueError(f"spinor vector must have even length, got shape {v.shape}")
        return cls(v[:n], v[n:])

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SpinorField":
        z = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
        return cls(z[0], z[1])

    def inner(self, other: "SpinorField") -> complex:
        """Sesquilinear pairing, antilinear in ``self``."""
        return complex(np.vdot(self.as_vector(), other.as_vector()))

    def norm2(self) -> float:
        return self.inner(self).real


def gauge_transform_spinor(psi: SpinorField, u) -> SpinorField:
    u = _gauge(u, psi.sites)
    return SpinorField(u * psi.upper, u * psi.lower)


def transport_operator(omega, T) -> np.ndarray:
    """Phase-only transport ``U = diag(omega/|omega|) T`` on ``A(L)``.

    Links of zero amplitude (necessarily unused) get phase 1.
    """
    w = np.asarray(omega, dtype=complex)
    amp = np.abs(w)
    phase = np.divide(w, amp, out=np.ones_like(w), where=amp > 0)
    return phase[:, None] * np.asarray(T)


def transport_isometry_check(omega, T, tol: float = 1e-12) -> tuple[bool, float]:
    """Check ``<U psi, U psi> = <T psi, T psi>`` for all spinors.

    Equivalent to ``U^dagger U = T^dagger T`` on each spinor component; the
    returned deviation is the operator norm of the difference.
    """
    U = transport_operator(omega, T)
    T = np.asarray(T)
    gram = np.kron(np.eye(2), U.conj().T @ U - T.conj().T @ T)
    dev = float(np.linalg.norm(gram, 2)) if gram.size else 0.0
    return dev <= tol, dev


def amplitude_only(omega) -> np.ndarray:
    """``|omega|`` as a (phase-free) link field."""
    return np.abs(np.asarray(omega)).astype(complex)


def link_to_json(omega, form: str = "pairs") -> list:
    """Serialize as ``[[re, im], ...]`` or ``[{"amplitude": a, "phase": p}, ...]``."""
    w = np.asarray(omega, dtype=complex)
    if form == "pairs":
        return [[float(z.real), float(z.imag)] for z in w]
    if form == "polar":
        return [{"amplitude": float(a), "phase": float(p)}
                for a, p in zip(np.abs(w), principal_arg(w))]
    raise ValueError(f"unknown link format {form!r}")


def link_from_json(data) -> np.ndarray:
    """Parse either form written by :func:`link_to_json`; plain reals are accepted too."""
    if not isinstance(data, list) or not data:
        raise ValueError("link values must be a non-empty list")
    out = []
    for k, item in enumerate(data):
        if isinstance(item, dict):
            try:
                amp, phase = float(item["amplitude"]), float(item.get("phase", 0.0))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"link {k}: expected {{amplitude, phase}}, got {item!r}") from exc
            if amp < 0:
                raise ValueError(f"link {k}: negative amplitude {amp}")
            out.append(amp * np.exp(1j * phase))
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            out.append(complex(float(item[0]), float(item[1])))
        elif isinstance(item, (int, float)) and not isinstance(item, bool):
            out.append(complex(item))
        else:
            raise ValueError(f"link {k}: expected [re, im] or {{amplitude, phase}}, got {item!r}")
    return np.array(out, dtype=complex)


__all__ = [
    "GaugeError", "PolarizedLink", "SingularLinkError", "SpinorField",
    "amplitude_only", "check_nonsingular", "gauge_transform_link", "gauge_transform_spinor",
    "link_field", "link_from_json", "link_to_json", "polar_decompose", "principal_arg",
    "random_gauge", "random_link",
    "site_function", "transport_isometry_check", "transport_operator", "unit_link",
    "wilson_loop",
]
