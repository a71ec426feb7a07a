import os
import pytest
import numpy as np
from scipy.integrate import trapezoid
from entroscope.utils import C, SolverError
from entroscope.lattice import Bond, Lattice, make_partition
from entroscope.hamiltonian import ModelSpec, make_model
from entroscope.eigensolver import SolverOptions
from entroscope import sweep_analysis, gaussian_ising
from entroscope.sweep_analysis import EntropyCurve, Thresholds, run_sweep, derivative, detect_transitions, \
    cached_point, compute_point, hubbard_phase_scan, boundary_row


def make_curve(grid, s_over_n, parameter=C.LAMBDA):
    grid = np.asarray(grid, dtype=float)
    s = np.asarray(s_over_n, dtype=float)
    zeros = np.zeros(len(grid))
    return EntropyCurve(parameter, grid, s, s, zeros, zeros + 1, np.zeros(len(grid), dtype=bool), 'synthetic', 1)


def bump(grid, center, width=0.1):
    return np.exp(-(grid - center) ** 2 / width ** 2)


def test_derivative_of_quadratic():
    grid = np.round(np.arange(0, 21) * 0.1, 12)
    deriv = derivative(make_curve(grid, grid ** 2))
    assert abs(deriv.values[10] - 2.0) <= 1e-12
    assert np.allclose(deriv.values, 2 * grid, rtol=0, atol=1e-12)


def test_derivative_of_constant():
    grid = np.linspace(0, 1, 11)
    deriv = derivative(make_curve(grid, np.full(11, 0.3)))
    assert np.all(deriv.values == 0.0)
    assert detect_transitions(make_curve(grid, np.full(11, 0.3)), deriv).candidates == ()


def test_derivative_preconditions():
    with pytest.raises(ValueError, match='uniform'):
        derivative(make_curve([0, 0.1, 0.2, 0.4, 0.5], np.zeros(5)))
    with pytest.raises(ValueError, match='at least 5'):
        derivative(make_curve([0, 0.1, 0.2, 0.3], np.zeros(4)))
    with pytest.raises(ValueError, match='strictly increasing'):
        make_curve([0, 0.1, 0.1, 0.3, 0.4], np.zeros(5))


def test_single_spike_is_first_order():
    grid = np.arange(5, dtype=float)
    curve = make_curve(grid, [0, 0, 1, 0, 0])
    report = detect_transitions(curve, derivative(curve))
    # derivative extrema one step from the spike are suppressed
    assert len(report.candidates) == 1
    candidate = report.candidates[0]
    assert (candidate.location, candidate.order, candidate.extremum_kind, candidate.source) == (2.0, 1, 'max', C.CURVE)
    assert candidate.prominence == 1.0
    assert candidate.curvature == 2.0
    assert candidate.index == 2


def test_endpoints_never_qualify():
    grid = np.linspace(0, 1, 21)
    curve = make_curve(grid, grid ** 3)
    report = detect_transitions(curve, derivative(curve))
    assert report.candidates == ()


def test_ripple_below_threshold():
    grid = np.linspace(0, 1, 21)
    s = 0.5 - 0.1 * grid
    s[10] += 1e-6
    curve = make_curve(grid, s)
    assert detect_transitions(curve, derivative(curve)).candidates == ()


def test_sigmoid_gives_second_order_candidate():
    grid = np.round(np.arange(0, 101) * 0.02, 12)
    s = 0.5 - 0.4 / (1 + np.exp(-(grid - 1.0) / 0.1))
    curve = make_curve(grid, s)
    report = detect_transitions(curve, derivative(curve))
    assert report.of_order(1) == []
    [candidate] = report.of_order(2)
    assert candidate.extremum_kind == 'min'
    assert abs(candidate.location - 1.0) <= 0.02
    assert candidate.source == C.DERIVATIVE


def test_peak_with_flanking_derivative_extrema():
    grid = np.round(np.arange(0, 101) * 0.01, 12)
    curve = make_curve(grid, 0.2 + 0.05 * bump(grid, 0.5))
    report = detect_transitions(curve, derivative(curve))
    [peak] = report.of_order(1)
    assert abs(peak.location - 0.5) <= 1e-12
    low, high = [c.location for c in report.of_order(2)]
    assert low < 0.5 < high
    assert abs(low + high - 1.0) <= 0.011
    row = boundary_row(4.0, report)
    assert (row.first_order, row.second_order_low, row.second_order_high) == (peak.location, low, high)


@pytest.mark.parametrize('scale', [1e-6, 1e-3, 1.0, 1e3])
def test_relative_thresholds_are_scale_invariant(scale):
    grid = np.round(np.arange(0, 101) * 0.01, 12)
    base = 0.2 + 0.05 * bump(grid, 0.5) + 0.01 * bump(grid, 0.8, 0.05)
    thresholds = Thresholds(curve=0.01, derivative=0.01, relative=True)

    def signature(s):
        curve = make_curve(grid, s)
        return [(c.location, c.order, c.extremum_kind) for c in
                detect_transitions(curve, derivative(curve), thresholds).candidates]

    assert signature(scale * base) == signature(base)
    assert len(signature(base)) > 0


def test_absolute_thresholds_drop_small_curves():
    grid = np.round(np.arange(0, 101) * 0.01, 12)
    curve = make_curve(grid, 1e-6 * bump(grid, 0.5))
    assert detect_transitions(curve, derivative(curve)).candidates == ()


def test_trapezoid_reconstruction():
    grid = np.linspace(0, 2, 101)
    h = grid[1] - grid[0]
    s = 0.5 + 0.2 * np.sin(3 * grid)
    deriv = derivative(make_curve(grid, s))
    bound = 2 * h * np.abs(np.gradient(np.gradient(s, h), h)).max()
    assert abs(trapezoid(deriv.values, grid) - (s[-1] - s[0])) <= bound


def test_misaligned_derivative():
    curve = make_curve(np.linspace(0, 1, 11), np.zeros(11))
    other = derivative(make_curve(np.linspace(0, 2, 11), np.zeros(11)))
    with pytest.raises(ValueError, match='does not match'):
        detect_transitions(curve, other)


def test_thresholds_validation():
    with pytest.raises(ValueError):
        Thresholds(curve=-1.0)


def test_resolve_method():
    assert sweep_analysis.resolve_method(make_model(C.ISING_CHAIN, 22)) == 'gaussian'
    assert sweep_analysis.resolve_method(make_model(C.ISING_CHAIN, 10)) == 'gaussian'
    assert sweep_analysis.resolve_method(make_model(C.ISING_CHAIN, 10), 'dense') == 'dense'
    assert sweep_analysis.resolve_method(make_model(C.HUBBARD_CHAIN, 6)) == 'lanczos'
    assert sweep_analysis.resolve_method(make_model(C.HUBBARD_CHAIN, 6), 'dense') == 'dense'
    with pytest.raises(ValueError, match='only available'):
        sweep_analysis.resolve_method(make_model(C.HUBBARD_CHAIN, 6), 'gaussian')
    with pytest.raises(ValueError, match='not supported'):
        sweep_analysis.resolve_method(make_model(C.HUBBARD_CHAIN, 6), 'qr')


def test_ising_sweep():
    spec = make_model(C.ISING_CHAIN, 8)
    curve = run_sweep(spec, C.LAMBDA, np.round(np.arange(0, 21) * 0.1, 12))
    # lambda = 0: the even sites share no covariance, so each of their modes carries one bit
    assert abs(curve.entropy_bits[0] - 4.0) <= 1e-10
    assert np.all(np.diff(curve.s_over_n) < 0)
    assert np.allclose(curve.entropy_bits, curve.s_over_n * 8, rtol=1e-15, atol=0)
    assert curve.num_sites == 8
    assert not curve.degenerate.any()


def test_exact_ising_sweep_cross_checks_free_fermions():
    spec = make_model(C.ISING_CHAIN, 8)
    grid = np.round(np.arange(0, 9) * 0.25, 12)
    free = run_sweep(spec, C.LAMBDA, grid)
    exact = run_sweep(spec, C.LAMBDA, grid, method='dense')
    assert np.allclose(free.energy, exact.energy, rtol=0, atol=1e-9)
    # lambda = 0: the even cat state leaves exactly one bit on the spins of the sublattice
    assert abs(exact.entropy_bits[0] - 1.0) <= 1e-10
    assert free.fingerprint != exact.fingerprint


def test_hubbard_levels_stay_apart_near_the_boundary():
    # the six-site ring has an avoided crossing around V = U/2, not a degenerate point
    spec = make_model(C.HUBBARD_CHAIN, 6, U=4.0)
    curve = run_sweep(spec, C.V, np.round(1.5 + np.arange(0, 5) * 0.25, 12), method='dense')
    assert not curve.degenerate.any()
    assert curve.gap[2] > 1.0
    assert np.all(curve.gap > 0.5)


def test_lanczos_and_dense_sweeps_agree():
    spec = make_model(C.HUBBARD_CHAIN, 6, U=4.0)
    grid = np.round(np.arange(0, 5) * 0.5, 12)
    a = run_sweep(spec, C.V, grid, method='dense')
    b = run_sweep(spec, C.V, grid, method='lanczos')
    assert np.allclose(a.energy, b.energy, rtol=0, atol=1e-10)
    assert a.fingerprint != b.fingerprint


def test_gaussian_sweep():
    spec = make_model(C.ISING_CHAIN, 40)
    curve = run_sweep(spec, C.LAMBDA, np.round(np.arange(0, 101) * 0.02, 12))
    report = detect_transitions(curve, derivative(curve))
    assert any(abs(c.location - 1.0) <= 0.1 for c in report.of_order(2))
    assert abs(curve.entropy_bits[0] - 20.0) <= 1e-10
    assert curve.energy[50] == gaussian_ising.ground_energy(40, 1.0)
    assert curve.gap[50] == gaussian_ising.excitation_gap(40, 1.0)


def test_sweep_preconditions():
    spec = make_model(C.ISING_CHAIN, 8)
    with pytest.raises(ValueError, match='not a coupling'):
        run_sweep(spec, C.U, np.linspace(0, 1, 5))
    with pytest.raises(ValueError, match='at least 5'):
        run_sweep(spec, C.LAMBDA, np.linspace(0, 1, 4))
    with pytest.raises(ValueError, match='strictly increasing'):
        run_sweep(spec, C.LAMBDA, [0, 0.5, 0.4, 0.6, 0.7])


def test_degenerate_points_are_flagged():
    # a singlet on (0, 1) next to two free spins: twofold degenerate at Sz=0
    lattice = Lattice(4, 1, (4,), (Bond(0, 1, C.J),), 'singlet_and_free_pair')
    spec = ModelSpec(C.CHECKERBOARD_2D, {}, lattice)
    with pytest.warns(UserWarning, match='Degenerate'):
        curve = run_sweep(spec, C.J, np.linspace(0.8, 1.2, 5), partition=make_partition(lattice, (0, 2)),
                          method='dense')
    assert curve.degenerate.all()
    assert np.all(curve.gap < 1e-6)


def test_solver_failure_names_the_point():
    spec = make_model(C.HUBBARD_CHAIN, 6)
    with pytest.raises(SolverError, match='V=0.0'):
        run_sweep(spec, C.V, np.linspace(0, 1, 5), opts=SolverOptions(max_iter=3))


def test_threads_merge_in_grid_order():
    spec = make_model(C.ISING_CHAIN, 10)
    grid = np.round(np.arange(0, 8) * 0.25, 12)
    serial = run_sweep(spec, C.LAMBDA, grid)
    threaded = run_sweep(spec, C.LAMBDA, grid, threads=4)
    assert np.array_equal(serial.grid, threaded.grid)
    assert np.allclose(serial.s_over_n, threaded.s_over_n, rtol=0, atol=1e-12)
    assert serial.fingerprint == threaded.fingerprint


def test_cache_coherence(tmp_path):
    cache = str(tmp_path / 'cache')
    spec = make_model(C.ISING_CHAIN, 8)
    grid = np.round(np.arange(5, 10) * 0.1, 12)
    fresh = run_sweep(spec, C.LAMBDA, grid, cache_dir=cache)
    assert len(os.listdir(cache)) == 5
    cached = run_sweep(spec, C.LAMBDA, grid, cache_dir=cache)
    assert np.array_equal(fresh.s_over_n, cached.s_over_n)
    assert np.array_equal(fresh.energy, cached.energy)
    assert np.array_equal(fresh.gap, cached.gap)

    # a different sublattice is a different model
    run_sweep(spec, C.LAMBDA, grid, partition=make_partition(spec.lattice, (0, 1, 2, 3)), cache_dir=cache)
    assert len(os.listdir(cache)) == 10


def test_cached_point_matches_sweep(tmp_path):
    cache = str(tmp_path)
    spec = make_model(C.HUBBARD_CHAIN, 6, U=4.0)
    curve = run_sweep(spec, C.V, np.round(np.arange(0, 5) * 0.25, 12), cache_dir=cache)
    partition = make_partition(spec.lattice, (0, 2, 4))
    point = cached_point(spec.with_couplings(V=0.0), partition, cache_dir=cache)
    assert point.entropy_bits == curve.entropy_bits[0]
    assert point == compute_point(spec.with_couplings(V=0.0), partition)


def test_unreadable_cache_file(tmp_path):
    spec = make_model(C.ISING_CHAIN, 8)
    partition = make_partition(spec.lattice, (0, 2, 4, 6))
    first = cached_point(spec, partition, cache_dir=str(tmp_path))
    [name] = os.listdir(str(tmp_path))
    with open(os.path.join(str(tmp_path), name), 'w') as f:
        f.write('{not json')
    with pytest.warns(UserWarning, match='unreadable'):
        again = cached_point(spec, partition, cache_dir=str(tmp_path))
    assert again == first


def test_phase_scan_rows():
    grid = np.round(np.arange(0, 41) * 0.1, 12)
    rows, curves = hubbard_phase_scan([4.0, -2.0], grid, 6)
    assert [row.U for row in rows] == [4.0, -2.0]
    assert set(curves) == {4.0, -2.0}
    for row in rows:
        if row.first_order is None:
            assert row.second_order_low is None and row.second_order_high is None
            continue
        assert row.second_order_low is None or row.second_order_low < row.first_order
        assert row.second_order_high is None or row.second_order_high > row.first_order
    assert rows[0].to_dict()[C.U] == 4.0
    assert np.array_equal(curves[4.0].grid, grid)


def test_phase_scan_without_interaction_has_no_edge_peak():
    grid = np.round(np.arange(0, 11) * 0.1, 12)
    rows, _ = hubbard_phase_scan([0.0], grid, 6)
    assert all(c.location > 0.0 for c in rows[0].candidates)
