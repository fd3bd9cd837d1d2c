"""Connes distances on one-dimensional lattices.

Three independent routes are provided for the DM family:

* :func:`closed_form_distance` -- sums of inverse link amplitudes along the
  (shorter) path between two sites;
* :func:`saturating_function` -- an explicit algebra element that attains the
  closed form while keeping ``||[D, f]|| <= 1``;
* :func:`~lattice_connes.optimize.numerical_distance` -- a generic convex
  optimizer over ``f`` that only sees the Dirac operator matrix.

Naive and Wilson operators only have the numerical route.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import check_nonsingular, link_field
from .lattice import LatticeError, LatticeSpec, Topology
from .optimize import OptimizerConfig, make_solver, numerical_distance
from .spectral import Family, build_dirac

__all__ = [
    "DistanceMatrix", "MetricError", "Method", "PairError", "TriangleReport",
    "check_metric", "closed_form_distance", "distance_table", "numerical_distance",
    "path_length", "saturating_function", "sub_lattice", "triangle_condition_check",
]


class Method(str, enum.Enum):
    CLOSED = "closed"
    NUMERICAL = "numerical"
    SATURATING = "saturating"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        key = {"closedform": "closed", "closed_form": "closed"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown method {value!r}; expected one of "
                             f"{[m.value for m in cls]}") from None


class MetricError(ValueError):
    """A distance matrix violates a metric axiom."""


class PairError(RuntimeError):
    """A pairwise computation failed; carries the pair."""

    def __init__(self, i: int, j: int, cause: Exception):
        self.pair = (i, j)
        self.cause = cause
        super().__init__(f"pair ({i}, {j}): {type(cause).__name__}: {cause}")


def _inverse_amplitudes(omega, spec: LatticeSpec) -> np.ndarray:
    w = link_field(omega, spec)
    amp = np.abs(w)
    with np.errstate(divide="ignore"):
        return 1.0 / amp


def path_length(omega, spec: LatticeSpec, i: int, j: int) -> float:
    """Sum of ``1/|omega|`` over the links ``i, i+1, ..., j-1``.

    On a ring the path wraps around; on a chain it requires ``i <= j``.
    """
    i, j = spec.check_site(i), spec.check_site(j)
    inv = _inverse_amplitudes(omega, spec)
    if spec.is_cyclic:
        links = (i + np.arange((j - i) % spec.sites)) % spec.sites
    else:
        if i > j:
            raise LatticeError(f"no directed path from {i} to {j} on an open chain")
        links = np.arange(i, j)
    return math.fsum(inv[links])


def sub_lattice(omega, spec: LatticeSpec, i: int, j: int):
    """Window used for a ``LINE`` query.

    Returns ``(sub_omega, sub_spec, offset)``; sites of the window are the
    original sites minus ``offset``. Other topologies are returned unchanged.
    """
    lo, hi = spec.window(i, j)
    if spec.topology is not Topology.LINE:
        return np.asarray(omega, dtype=complex), spec, 0
    return np.asarray(omega, dtype=complex)[lo:hi], LatticeSpec(Topology.OPEN, hi - lo), lo


def closed_form_distance(omega, spec: LatticeSpec, i: int, j: int) -> float:
    """Path sum between ``i`` and ``j``; the shorter of the two arcs on a ring."""
    i, j = spec.check_site(i), spec.check_site(j)
    check_nonsingular(omega, spec)
    if i == j:
        return 0.0
    if spec.is_cyclic:
        return min(path_length(omega, spec, i, j), path_length(omega, spec, j, i))
    w, sub, off = sub_lattice(omega, spec, i, j)
    a, b = sorted((i - off, j - off))
    return path_length(w, sub, a, b)


def _cumulative(steps: np.ndarray) -> np.ndarray:
    out = np.zeros(steps.size + 1)
    acc = []
    for s in steps:
        acc.append(s)
        out[len(acc)] = math.fsum(acc)
    return out


def saturating_function(omega, spec: LatticeSpec, i: int, j: int) -> np.ndarray:
    """Site function attaining the closed-form distance between ``i`` and ``j``.

    Open chain: ``f(0) = 0`` and ``f(k+1) = f(k) + 1/|omega(k)|``.
    Line: the same recursion anchored at ``f(min(i, j)) = 0`` and run in both
    directions.
    Ring: ``f`` climbs with slope ``1/|omega|`` along the shorter arc and
    descends along the longer arc with slope scaled by ``l_short / l_long``,
    so it closes up after one turn.
    """
    i, j = spec.check_site(i), spec.check_site(j)
    inv = _inverse_amplitudes(omega, spec)
    check_nonsingular(omega, spec)
    n = spec.sites

    if spec.topology is Topology.OPEN:
        return _cumulative(inv[: n - 1])

    if spec.topology is Topology.LINE:
        a = min(i, j)
        f = np.zeros(n)
        f[a:] = _cumulative(inv[a: n - 1])
        f[:a + 1] = 0.0 - _cumulative(inv[:a][::-1])[::-1]
        return f

    if i == j:
        raise LatticeError("a saturating function on a ring needs two distinct sites")
    fwd, bwd = path_length(omega, spec, i, j), path_length(omega, spec, j, i)
    start, stop = (i, j) if fwd <= bwd else (j, i)
    short, long_ = min(fwd, bwd), max(fwd, bwd)
    ratio = short / long_
    f = np.zeros(n)
    up = (start + np.arange((stop - start) % n)) % n
    down = (stop + np.arange((start - stop) % n)) % n
    climb = _cumulative(inv[up])
    f[np.append(up, stop)] = climb
    descent = climb[-1] - ratio * _cumulative(inv[down])
    f[down[1:]] = descent[1:-1]
    return f


@dataclass(frozen=True)
class TriangleReport:
    """Outcome of :func:`triangle_condition_check`.

    ``margin`` is ``min_k (sum of other inverse amplitudes - own)``; the
    condition holds iff it is non-negative. ``nearest`` holds the actual
    ``d(k, k+1)`` for every link.
    """

    ok: bool
    margin: float
    violating: tuple[int, ...]
    nearest: np.ndarray


def triangle_condition_check(omega, spec: LatticeSpec) -> TriangleReport:
    if not spec.is_cyclic:
        raise LatticeError("the triangle condition only applies to a ring")
    inv = _inverse_amplitudes(omega, spec)
    check_nonsingular(omega, spec)
    slack = np.array([math.fsum(np.delete(inv, k)) - inv[k] for k in range(spec.sites)])
    nearest = np.array([closed_form_distance(omega, spec, k, (k + 1) % spec.sites)
                        for k in range(spec.sites)])
    bad = tuple(int(k) for k in np.flatnonzero(slack < 0))
    return TriangleReport(not bad, float(slack.min()), bad, nearest)


@dataclass
class DistanceMatrix:
    """Pairwise distances plus, for numerical runs, the optimal functions."""

    values: np.ndarray
    method: Method
    certificates: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def sites(self) -> int:
        return self.values.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site"] + list(range(self.sites)))
        for i, row in enumerate(self.values):
            w.writerow([i] + [repr(float(x)) for x in row])
        return buf.getvalue()

    def to_json(self) -> dict:
        out = {
            "method": self.method.value,
            "sites": self.sites,
            "values": [[float(x) for x in row] for row in self.values],
        }
        if self.certificates:
            out["certificates"] = [
                {"pair": [int(i), int(j)],
                 "f": [None if np.isnan(x) else float(x) for x in f]}
                for (i, j), f in sorted(self.certificates.items())
            ]
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_json(cls, data: dict) -> "DistanceMatrix":
        certs = {tuple(c["pair"]): np.asarray(c["f"], dtype=float)
                 for c in data.get("certificates", [])}
        return cls(np.asarray(data["values"], dtype=float), Method.parse(data["method"]),
                   certs, dict(data.get("meta", {})))


def check_metric(d, rtol: float = 1e-9) -> None:
    """Raise :class:`MetricError` unless ``d`` is a metric up to ``rtol``."""
    d = np.asarray(d, dtype=float)
    scale = max(float(np.max(np.abs(d))), 1.0) if d.size else 1.0
    atol = rtol * scale
    if np.any(np.diag(d) != 0):
        raise MetricError("non-zero diagonal")
    if np.any(d < -atol):
        raise MetricError("negative distance")
    asym = np.abs(d - d.T)
    if np.max(asym, initial=0.0) > atol:
        i, j = np.unravel_index(np.argmax(asym), d.shape)
        raise MetricError(f"asymmetric at ({i}, {j})")
    # d[i, k] <= d[i, j] + d[j, k] for all triples
    excess = d[:, None, :] - d[:, :, None] - d[None, :, :]
    if np.max(excess, initial=0.0) > atol:
        i, j, k = np.unravel_index(np.argmax(excess), excess.shape)
        raise MetricError(f"triangle inequality fails for ({i}, {k}) via {j}")


def distance_table(omega, spec: LatticeSpec, method="closed", family="dm", *,
                   cfg: OptimizerConfig | None = None, wilson_r: float = 1.0,
                   validate: bool = True, window_check: bool = True) -> DistanceMatrix:
    """All pairwise distances by one method.

    ``omega`` is only used by the DM family. Numerical runs reuse one solver
    per operator so cuts found for one pair speed up the rest. Naive and
    Wilson distances on a ``LINE`` depend on the window; with
    ``window_check`` they are recomputed with two more padding sites and
    stored under ``meta["alt_values"]``.
    """
    method = Method.parse(method)
    family = Family.parse(family)
    n = spec.sites
    if family is Family.DM:
        omega = link_field(omega, spec)
    elif method is not Method.NUMERICAL:
        raise ValueError(f"method {method.value!r} is only available for the DM family")
    cfg = cfg or OptimizerConfig()

    d = np.zeros((n, n))
    certs = {}
    meta = {}
    solvers: dict = {}

    def solver_for(sub_w, sub_spec, off):
        key = (off, sub_spec.sites)
        if key not in solvers:
            D = build_dirac(family, sub_spec, sub_w if family is Family.DM else None, wilson_r)
            solvers[key] = make_solver(D, cfg)
        return solvers[key]

    for i in range(n):
        for j in range(i + 1, n):
            try:
                if method is Method.CLOSED:
                    d[i, j] = closed_form_distance(omega, spec, i, j)
                elif method is Method.SATURATING:
                    f = saturating_function(omega, spec, i, j)
                    d[i, j] = abs(f[j] - f[i])
                    certs[(i, j)] = f
                else:
                    sub_w, sub_spec, off = sub_lattice(omega if family is Family.DM
                                                       else np.ones(n), spec, i, j)
                    res = solver_for(sub_w, sub_spec, off).solve(i - off, j - off)
                    d[i, j] = res.value
                    f = np.full(n, np.nan)
                    f[off:off + sub_spec.sites] = res.certificate
                    certs[(i, j)] = f
                    if not res.converged:
                        meta.setdefault("unconverged", []).append([i, j])
            except Exception as exc:  # noqa: BLE001 - re-raised with the pair attached
                raise PairError(i, j, exc) from exc
            d[j, i] = d[i, j]

    if (window_check and method is Method.NUMERICAL and family is not Family.DM
            and spec.topology is Topology.LINE):
        wider = LatticeSpec(spec.topology, n, spec.window_pad + 2)
        alt = distance_table(omega, wider, method, family, cfg=cfg, wilson_r=wilson_r,
                             validate=False, window_check=False)
        meta.update(window_dependent=True, alt_window_pad=wider.window_pad,
                    alt_values=alt.values.tolist())

    if validate:
        tol = 1e-9 if method is not Method.NUMERICAL else max(10 * cfg.tol, 1e-9)
        check_metric(d, tol)
    return DistanceMatrix(d, method, certs, meta)
