"""One-dimensional lattices and their shift operator.

Three topologies are supported:

``OPEN``
    Finite chain with free ends, ``(Tf)(i) = f(i+1)`` and ``(Tf)(N-1) = 0``.
``CYCLIC``
    Finite ring, ``(Tf)(N-1) = f(0)``; ``T`` is the circulant one-step shift.
``LINE``
    A finite segment of the infinite lattice. Behaves like ``OPEN`` but
    distance queries are evaluated on a window of ``window_pad`` extra sites
    around the queried pair.

Sites are labelled ``0, ..., N-1`` for every topology.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class LatticeError(ValueError):
    """Invalid lattice specification or site index."""


class Topology(str, enum.Enum):
    OPEN = "open"
    CYCLIC = "cyclic"
    LINE = "line"

    @classmethod
    def parse(cls, value: "str | Topology") -> "Topology":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"truncated": "line", "truncatedline": "line", "truncated_line": "line",
                   "closed": "cyclic", "ring": "cyclic"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise LatticeError(
                f"unknown topology {value!r}; expected one of "
                f"{[t.value for t in cls]}") from None


@dataclass(frozen=True)
class LatticeSpec:
    """Topology plus number of sites.

    Attributes
    ----------
    topology : Topology
    sites : int
        Number of sites ``N >= 2``.
    window_pad : int
        Extra sites kept on each side of a queried pair (``LINE`` only).
    """

    topology: Topology
    sites: int
    window_pad: int = 2

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        if isinstance(self.sites, bool) or int(self.sites) != self.sites:
            raise LatticeError(f"sites must be an integer, got {self.sites!r}")
        object.__setattr__(self, "sites", int(self.sites))
        if self.sites < 2:
            raise LatticeError(f"a lattice needs at least 2 sites, got {self.sites}")
        if int(self.window_pad) != self.window_pad or self.window_pad < 0:
            raise LatticeError("window_pad must be a non-negative integer, "
                               f"got {self.window_pad!r}")
        object.__setattr__(self, "window_pad", int(self.window_pad))

    @property
    def is_cyclic(self) -> bool:
        return self.topology is Topology.CYCLIC

    @property
    def used_links(self) -> np.ndarray:
        """Indices ``k`` whose link ``k -> k+1`` exists."""
        n = self.sites if self.is_cyclic else self.sites - 1
        return np.arange(n)

    def check_site(self, i) -> int:
        if isinstance(i, bool) or int(i) != i or not 0 <= int(i) < self.sites:
            raise LatticeError(f"site {i!r} out of range for {self.sites} sites")
        return int(i)

    def target(self, k: int) -> int | None:
        """Site reached from ``k`` by the shift, or None at a free end."""
        if k == self.sites - 1:
            return 0 if self.is_cyclic else None
        return k + 1

    def window(self, i: int, j: int) -> tuple[int, int]:
        """Half-open site range ``[lo, hi)`` used for a ``LINE`` query.

        For other topologies the whole lattice is returned.
        """
        i, j = self.check_site(i), self.check_site(j)
        if self.topology is not Topology.LINE:
            return 0, self.sites
        lo = max(0, min(i, j) - self.window_pad)
        hi = min(self.sites, max(i, j) + self.window_pad + 1)
        return lo, hi

    def to_record(self) -> dict:
        rec = {"topology": self.topology.value, "sites": self.sites}
        if self.topology is Topology.LINE:
            rec["window_pad"] = self.window_pad
        return rec

    @classmethod
    def from_record(cls, record: dict) -> "LatticeSpec":
        """Parse ``{"topology": ..., "sites": N, "window_pad": k}``."""
        if not isinstance(record, dict):
            raise LatticeError(f"lattice record must be an object, got {type(record).__name__}")
        unknown = set(record) - {"topology", "sites", "window_pad"}
        if unknown:
            raise LatticeError(f"unknown lattice fields: {sorted(unknown)}")
        for key in ("topology", "sites"):
            if key not in record:
                raise LatticeError(f"lattice record is missing {key!r}")
        return cls(record["topology"], record["sites"], record.get("window_pad", 2))


def build_shift(spec: LatticeSpec) -> np.ndarray:
    """Matrix of the shift ``(Tf)(i) = f(i+1)`` acting on column vectors."""
    n = spec.sites
    T = np.zeros((n, n))
    rows = np.arange(n - 1)
    T[rows, rows + 1] = 1.0
    if spec.is_cyclic:
        T[n - 1, 0] = 1.0
    return T


def _as_site_function(spec: LatticeSpec, f) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (spec.sites,):
        raise LatticeError(f"expected {spec.sites} site values, got shape {f.shape}")
    return f


def forward_diff(spec: LatticeSpec, f) -> np.ndarray:
    """``Tf - f``; the last entry is 0 on a chain with a free end."""
    f = _as_site_function(spec, f)
    d = np.roll(f, -1) - f
    if not spec.is_cyclic:
        d[-1] = 0
    return d


def backward_diff(spec: LatticeSpec, f) -> np.ndarray:
    """``T^dagger f - f``; the first entry is 0 on a chain with a free end."""
    f = _as_site_function(spec, f)
    d = np.roll(f, 1) - f
    if not spec.is_cyclic:
        d[0] = 0
    return d
