import numpy as np
import pytest

from lattice_connes.algebra import random_link, unit_link
from lattice_connes.distance import closed_form_distance
from lattice_connes.lattice import LatticeSpec, Topology
from lattice_connes.optimize import (BarrierSolver, CuttingPlaneSolver, OptimizerConfig,
                                     make_solver, numerical_distance)
from lattice_connes.spectral import (build_dirac_dm, build_dirac_naive, build_dirac_wilson,
                                     commutator, spectral_norm)

from oracles import complex_probe, grid_distance

GENERIC = OptimizerConfig(fast_path=False)


def test_unit_open_four_sites_end_to_end():
    spec = LatticeSpec("open", 4)
    res = numerical_distance(build_dirac_dm(unit_link(spec), spec), 0, 3)
    assert res.value == pytest.approx(3.0, abs=1e-6)
    assert res.converged


@pytest.mark.parametrize("cfg", [OptimizerConfig(), GENERIC,
                                 OptimizerConfig(fast_path=False, eigensolver="jacobi")],
                         ids=["fast", "generic", "jacobi"])
def test_random_cyclic_six_all_pairs(cfg):
    spec = LatticeSpec("cyclic", 6)
    w = random_link(spec, np.random.default_rng(3))
    D = build_dirac_dm(w, spec)
    solver = make_solver(D, cfg)
    for i in range(6):
        for j in range(6):
            if i == j:
                continue
            ref = closed_form_distance(w, spec, i, j)
            res = solver.solve(i, j)
            assert abs(res.value - ref) <= 1e-6 * ref
            assert res.value <= res.upper_bound * (1 + 1e-12)


def test_barrier_on_dm_matches_closed_form():
    spec = LatticeSpec("cyclic", 5)
    w = random_link(spec, np.random.default_rng(3))
    res = numerical_distance(build_dirac_dm(w, spec), 0, 2, OptimizerConfig(algorithm="barrier"))
    ref = closed_form_distance(w, spec, 0, 2)
    assert res.converged
    assert abs(res.value - ref) <= 1e-6 * ref
    assert res.value <= ref * (1 + 1e-12) <= res.upper_bound * (1 + 1e-9)


def test_solver_selection():
    spec = LatticeSpec("cyclic", 4)
    assert isinstance(make_solver(build_dirac_dm(np.ones(4), spec)), CuttingPlaneSolver)
    assert isinstance(make_solver(build_dirac_naive(spec)), BarrierSolver)
    cfg = OptimizerConfig(algorithm="cutting-plane")
    assert isinstance(make_solver(build_dirac_naive(spec), cfg), CuttingPlaneSolver)


@pytest.mark.parametrize("topology", list(Topology))
def test_certificate_is_feasible(topology):
    spec = LatticeSpec(topology, 7)
    w = random_link(spec, np.random.default_rng(11))
    D = build_dirac_dm(w, spec)
    for cfg in (OptimizerConfig(), GENERIC, OptimizerConfig(algorithm="barrier")):
        res = numerical_distance(D, 1, 5, cfg)
        f = res.certificate
        assert f[1] == 0.0
        assert spectral_norm(commutator(D, f)) <= 1 + 1e-10
        assert f[5] - f[1] == pytest.approx(res.value, rel=1e-12)


def test_degenerate_pair_skips_optimizer():
    spec = LatticeSpec("open", 3)
    res = numerical_distance(build_dirac_dm(np.ones(3), spec), 2, 2)
    assert res.value == 0.0 and res.iterations == 0 and res.converged


def test_pair_out_of_range():
    spec = LatticeSpec("open", 3)
    with pytest.raises(IndexError):
        numerical_distance(build_dirac_dm(np.ones(3), spec), 0, 3)


def test_iteration_cap_returns_lower_bound():
    spec = LatticeSpec("cyclic", 6)
    D = build_dirac_naive(spec)
    full = numerical_distance(D, 0, 3)
    res = numerical_distance(D, 0, 3, OptimizerConfig(max_iters=3))
    assert not res.converged
    assert 0 < res.value <= full.upper_bound
    assert spectral_norm(commutator(D, res.certificate)) <= 1 + 1e-10


def test_cuts_are_shared_between_pairs():
    spec = LatticeSpec("cyclic", 6)
    solver = CuttingPlaneSolver(build_dirac_dm(random_link(spec, np.random.default_rng(2)),
                                               spec), GENERIC)
    solver.solve(0, 3)
    before = solver.n_cuts
    first = solver.solve(0, 3)
    assert solver.n_cuts == before
    assert first.iterations == 1


@pytest.mark.parametrize("bad", [dict(tol=0), dict(max_iters=0), dict(algorithm="newton"),
                                 dict(eigensolver="arpack"), dict(box=-1)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        OptimizerConfig(**bad)


def test_naive_cyclic_four_against_grid():
    spec = LatticeSpec("cyclic", 4)
    D = build_dirac_naive(spec)
    solver = make_solver(D)
    for j in (1, 2, 3):
        res = solver.solve(0, j)
        grid, _ = grid_distance(D.matrix, 4, 0, j)
        # grid points are feasible after rescaling, so they bound from below
        assert grid <= res.upper_bound * (1 + 1e-9)
        assert res.value == pytest.approx(grid, rel=1e-6)
    d01, d12, d02 = (solver.solve(*p).value for p in [(0, 1), (1, 2), (0, 2)])
    assert d02 < d01 + d12 - 1e-3


def test_naive_open_chain_against_grid():
    spec = LatticeSpec("open", 4)
    D = build_dirac_naive(spec)
    solver = make_solver(D)
    values = []
    for j in (1, 2, 3):
        res = solver.solve(0, j)
        assert res.converged
        grid, _ = grid_distance(D.matrix, 4, 0, j, half_width=4.0, step=0.25)
        assert grid <= res.upper_bound * (1 + 1e-9)
        assert res.value == pytest.approx(grid, rel=5e-3)
        values.append(res.value)
    assert values == sorted(values)


def test_wilson_is_a_metric_on_small_ring():
    from lattice_connes.distance import check_metric, distance_table
    d = distance_table(None, LatticeSpec("cyclic", 5), "numerical", "wilson").values
    check_metric(d, 1e-7)
    assert np.all(d[~np.eye(5, dtype=bool)] > 0)
    assert np.isfinite(d).all()
    assert build_dirac_wilson(LatticeSpec("cyclic", 5)).matrix.shape == (10, 10)


@pytest.mark.parametrize("seed", range(3))
def test_complex_functions_do_not_beat_real_optimum(seed):
    rng = np.random.default_rng(seed)
    spec = LatticeSpec("cyclic", 3)
    w = random_link(spec, rng)
    D = build_dirac_dm(w, spec)
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        res = numerical_distance(D, i, j)
        probe = complex_probe(D.matrix, 3, i, j, rng, refine=res.certificate.astype(complex))
        assert probe <= res.value * (1 + 1e-8)
