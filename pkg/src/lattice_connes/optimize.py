"""Numerical Connes distance for an arbitrary Dirac operator matrix.

The distance between sites ``i`` and ``j`` is

    d(i, j) = sup { f(j) - f(i) : f real, ||[D, f]|| <= 1 }.

``g(f) = ||[D, f]||`` is a seminorm, so this is a convex program; constants
lie in the kernel of ``g``, so ``f(i) = 0`` is fixed throughout. Two solvers
are provided:

:class:`CuttingPlaneSolver`
    Outer approximation. For unit vectors ``u, v`` the linear function
    ``Re <u, [D, f] v>`` is bounded by ``g``, so ``Re <u, [D, f] v> <= 1`` is
    a valid cut; cuts from the top singular pairs of ``[D, f_k]`` support
    the unit ball at ``f_k / g(f_k)``. LP optimum (upper bound) and its
    rescaling onto the ball (lower bound) meet after finitely many steps when
    the ball is a polytope, which is the case for the DM family. Cuts do not
    depend on the pair, so one solver is reused for a whole table.
:class:`BarrierSolver`
    Interior-point method on the linear matrix inequality
    ``[[1, C(f)], [C(f)^dagger, 1]] >= 0`` with the log-det barrier. Handles
    curved unit balls (naive and Wilson operators) where cutting planes
    converge slowly. Its duality gap bound ``4N / t`` certifies the result.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .eigen import jacobi_eigh
from .spectral import DiracOperator, Family, commutator

log = logging.getLogger(__name__)

# default HiGHS tolerances (1e-7) let the LP point sit on the wrong side of a
# fresh cut, which stalls the upper bound
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}

ALGORITHMS = ("auto", "cutting-plane", "barrier")


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`numerical_distance`.

    Attributes
    ----------
    tol : float
        Relative gap between the certified upper bound and the feasible
        value at which the iteration stops.
    max_iters : int
        Cap on LP solves (cutting planes) or Newton steps (barrier).
    algorithm : str
        ``"cutting-plane"``, ``"barrier"`` or ``"auto"`` (cutting planes for
        the DM family, barrier otherwise).
    fast_path : bool
        DM family only: seed the cuts with the faces
        ``|omega(k)| |f(k+1) - f(k)| <= 1`` and evaluate the constraint from
        the link amplitudes instead of an eigensolve.
    eigensolver : str
        ``"lapack"`` or ``"jacobi"``, used by the cutting-plane solver.
    box : float
        Bound on ``|f|`` keeping the first LPs bounded.
    """

    tol: float = 1e-8
    max_iters: int = 50000
    algorithm: str = "auto"
    fast_path: bool = True
    eigensolver: str = "lapack"
    box: float = 1e6

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.eigensolver not in ("lapack", "jacobi"):
            raise ValueError(f"unknown eigensolver {self.eigensolver!r}")
        if not self.box > 0:
            raise ValueError("box must be positive")


@dataclass
class NumericalResult:
    """Outcome of one distance optimization.

    ``value`` is attained by ``certificate`` (so it is a lower bound on the
    distance); ``upper_bound`` comes from the relaxation or the duality gap.
    A run that hits ``max_iters`` keeps its best feasible value and sets
    ``converged = False``.
    """

    value: float
    upper_bound: float
    certificate: np.ndarray
    constraint: float
    iterations: int
    converged: bool

    def __float__(self):
        return float(self.value)


def _check_pair(n: int, i: int, j: int) -> None:
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"pair ({i}, {j}) out of range for {n} sites")


def _trivial(n: int) -> NumericalResult:
    return NumericalResult(0.0, 0.0, np.zeros(n), 0.0, 0, True)


class CuttingPlaneSolver:
    """Distance solver for one Dirac operator; accumulates cuts across queries."""

    def __init__(self, D: DiracOperator, cfg: OptimizerConfig | None = None):
        self.D = D
        self.cfg = cfg or OptimizerConfig()
        self.n = D.sites
        self._m = np.asarray(D.matrix)
        self._rows: list[np.ndarray] = []
        self._fast = self.cfg.fast_path and D.family is Family.DM and D.link is not None
        if self._fast:
            self._amp = np.abs(D.link)
            self._links = D.lattice.used_links
            self._target = (self._links + 1) % self.n
            for k in self._links:
                row = np.zeros(self.n)
                row[self._target[k]] = self._amp[k]
                row[k] = -self._amp[k]
                self._rows += [row, -row]
        else:
            for k in range(self.n):
                e = np.zeros(self.n)
                e[k] = 1.0
                self._rows.extend(self._cuts(e)[1])

    @property
    def n_cuts(self) -> int:
        return len(self._rows)

    def constraint(self, f) -> float:
        """``||[D, f]||``."""
        f = np.asarray(f, dtype=float)
        if self._fast:
            return float(np.max(self._amp[self._links] * np.abs(f[self._target] - f[self._links])))
        return self._cuts(f)[0]

    def _cuts(self, f):
        c = commutator(self._m, f)
        h = c.conj().T @ c
        if self.cfg.eigensolver == "jacobi":
            lam, vecs = jacobi_eigh(h)
        else:
            lam, vecs = np.linalg.eigh(h)
        sig = np.sqrt(np.clip(lam, 0.0, None))
        top = sig[-1]
        if top == 0.0:
            return 0.0, []
        # every pair above the bound, and at least the top one
        pick = np.flatnonzero(sig >= min(top * (1 - 1e-9), 1.0))
        rows = []
        for s in pick:
            v = vecs[:, s]
            u = c @ v / sig[s]
            coef = (u.conj() @ self._m) * v - u.conj() * (self._m @ v)
            rows.append(coef.real.reshape(2, self.n).sum(axis=0))
        return float(top), rows

    def _lp(self, i: int, j: int):
        c = np.zeros(self.n)
        c[i] += 1.0
        c[j] -= 1.0
        bounds = [(-self.cfg.box, self.cfg.box)] * self.n
        bounds[i] = (0.0, 0.0)
        res = linprog(c, A_ub=np.array(self._rows), b_ub=np.ones(len(self._rows)),
                      bounds=bounds, method="highs", options=_LP_OPTIONS)
        return res.x if res.status == 0 else None, res.message

    def solve(self, i: int, j: int) -> NumericalResult:
        n = self.n
        _check_pair(n, i, j)
        if i == j:
            return _trivial(n)

        best = None
        for it in range(1, self.cfg.max_iters + 1):
            f, msg = self._lp(i, j)
            if f is None:
                if best is None:
                    raise RuntimeError(f"LP failed for pair ({i}, {j}): {msg}")
                log.warning("pair (%d, %d): LP failed after %d steps (%s)", i, j, it - 1, msg)
                break
            upper = f[j] - f[i]
            if self._fast:
                g = self.constraint(f)
            else:
                g, rows = self._cuts(f)
                if g > 1.0 + self.cfg.tol:
                    self._rows.extend(rows)
            scale = max(g, 1.0)
            value = upper / scale
            if best is None or value > best.value:
                best = NumericalResult(value, upper, f / scale, g / scale, it, False)
            best.upper_bound = min(best.upper_bound, upper)
            best.iterations = it
            gap = best.upper_bound - best.value
            if g <= 1.0 + self.cfg.tol or gap <= self.cfg.tol * best.value:
                best.converged = True
                break
            if self._fast:
                # every face is present from the start, so any excess is LP
                # round-off and the rescaled point is already optimal
                best.converged = g <= 1.0 + 1e-6
                break
        else:
            log.warning("pair (%d, %d): no convergence after %d LPs, gap %.3g",
                        i, j, self.cfg.max_iters, best.upper_bound - best.value)

        if np.max(np.abs(best.certificate)) > 0.5 * self.cfg.box:
            raise RuntimeError(f"pair ({i}, {j}): distance not bounded within box {self.cfg.box:g}")
        return best


class BarrierSolver:
    """Log-det barrier method for ``max f(j) - f(i)`` s.t. ``||[D, f]|| <= 1``.

    With ``C(f) = sum_k f_k [D, P_k]`` (``P_k`` the projector on site ``k``)
    the constraint is ``Z(f) = [[1, C], [C^dagger, 1]] >= 0``. For increasing
    ``t`` the solver minimizes ``-t (f(j) - f(i)) - log det Z(f)`` by damped
    Newton steps; on the central path the optimal value lies within
    ``4N / t`` of the current objective.
    """

    mu = 8.0
    newton_tol = 1e-10

    def __init__(self, D: DiracOperator, cfg: OptimizerConfig | None = None):
        self.D = D
        self.cfg = cfg or OptimizerConfig()
        self.n = D.sites
        m = np.asarray(D.matrix)
        self.nu = 2 * m.shape[0]
        eye = np.eye(self.n)
        self._B = np.stack([commutator(m, eye[k]) for k in range(self.n)])
        zero = np.zeros_like(m)
        self._Zk = np.stack([np.block([[zero, b], [b.conj().T, zero]]) for b in self._B])

    def _Z(self, f):
        return np.eye(self.nu) + np.tensordot(f, self._Zk, axes=1)

    def _logdet(self, f):
        """``log det Z(f)``, or None outside the feasible set."""
        try:
            L = np.linalg.cholesky(self._Z(f))
        except np.linalg.LinAlgError:
            return None
        return 2.0 * float(np.sum(np.log(np.diag(L).real)))

    def constraint(self, f) -> float:
        c = np.tensordot(np.asarray(f, dtype=float), self._B, axes=1)
        return float(np.linalg.norm(c, 2))

    def solve(self, i: int, j: int) -> NumericalResult:
        n = self.n
        _check_pair(n, i, j)
        if i == j:
            return _trivial(n)

        free = np.array([k for k in range(n) if k != i])
        obj = np.zeros(n)
        obj[j] = 1.0
        obj = obj[free]
        Zk = self._Zk[free]

        f = np.zeros(n)
        t = 1.0
        steps = 0
        converged = False
        while steps < self.cfg.max_iters:
            ld = self._logdet(f)
            while steps < self.cfg.max_iters:
                Zinv = np.linalg.inv(self._Z(f))
                W = np.einsum("ab,kbc->kac", Zinv, Zk)
                grad = -t * obj - np.einsum("kaa->k", W).real
                H = np.einsum("kab,lba->kl", W, W).real
                try:
                    step = -np.linalg.solve(H, grad)
                except np.linalg.LinAlgError:
                    step = -np.linalg.lstsq(H, grad, rcond=None)[0]
                dec = float(-grad @ step)
                steps += 1
                if dec / 2 <= self.newton_tol:
                    break
                alpha = 1.0 if dec < 0.25 else 1.0 / (1.0 + np.sqrt(dec))
                phi0 = -t * float(obj @ f[free]) - ld
                accepted = None
                while alpha >= 1e-14:
                    trial = f.copy()
                    trial[free] += alpha * step
                    ld_t = self._logdet(trial)
                    if ld_t is not None:
                        phi_t = -t * float(obj @ trial[free]) - ld_t
                        if phi_t <= phi0 - 0.25 * alpha * dec:
                            accepted = trial, ld_t
                            break
                    alpha *= 0.5
                if accepted is None:
                    # no progress possible at working precision
                    break
                f, ld = accepted
            value = f[j] - f[i]
            if self.nu / t <= self.cfg.tol * max(value, 1e-300):
                converged = True
                break
            t *= self.mu

        g = self.constraint(f)
        if not converged:
            log.warning("pair (%d, %d): barrier stopped after %d Newton steps, gap %.3g",
                        i, j, steps, self.nu / t)
        if g > 1.0:
            f = f / g
            g = 1.0
        value = float(f[j] - f[i])
        return NumericalResult(value, value + self.nu / t, f, g, steps, converged)


def make_solver(D: DiracOperator, cfg: OptimizerConfig | None = None):
    cfg = cfg or OptimizerConfig()
    algo = cfg.algorithm
    if algo == "auto":
        algo = "cutting-plane" if D.family is Family.DM else "barrier"
    return CuttingPlaneSolver(D, cfg) if algo == "cutting-plane" else BarrierSolver(D, cfg)


def numerical_distance(D: DiracOperator, i: int, j: int,
                       cfg: OptimizerConfig | None = None) -> NumericalResult:
    """Best feasible ``f(j) - f(i)`` with ``||[D, f]|| <= 1``, plus certificate."""
    return make_solver(D, cfg).solve(int(i), int(j))
