"""
Long reproduction runs of the published benchmarks. Enable with ENTROSCOPE_ACCEPTANCE=1.
"""

import pytest
import numpy as np
from entroscope.utils import C, make_grid
from entroscope.hamiltonian import make_model
from entroscope.config import DEFAULT_SWEEPS
from entroscope.sweep_analysis import run_sweep, derivative, detect_transitions, hubbard_phase_scan
from entroscope.validation import run_validation

pytestmark = pytest.mark.acceptance

THREADS = 4


def default_sweep(family, size, method=None, **couplings):
    parameter, lo, hi, step = DEFAULT_SWEEPS[family]
    spec = make_model(family, size, **couplings)
    curve = run_sweep(spec, parameter, make_grid(lo, hi, step), method=method, threads=THREADS)
    return curve, detect_transitions(curve, derivative(curve)), step


def near(candidates, location, tol):
    return [c for c in candidates if abs(c.location - location) <= tol + 1e-9]


def test_ising_chain_ten_sites():
    curve, report, step = default_sweep(C.ISING_CHAIN, 10)
    minima = [c for c in report.of_order(2) if c.extremum_kind == 'min']
    assert len(minima) == 1
    assert abs(minima[0].location - 1.0) <= 0.04 + 1e-9
    assert np.all(np.diff(curve.s_over_n) < 0)


def test_ising_size_convergence():
    curves = {}
    for n in (40, 160, 1280):
        curve, report, step = default_sweep(C.ISING_CHAIN, n, method='gaussian')
        assert near(report.of_order(2), 1.0, step)
        curves[n] = curve
    assert np.abs(curves[160].s_over_n - curves[1280].s_over_n).max() <= 1e-2


def test_coupled_dimer():
    curve, report, step = default_sweep(C.DIMER_2D, 4)
    [candidate] = report.of_order(2)
    assert abs(candidate.location - 0.4) <= 0.1
    assert np.all(np.diff(curve.s_over_n) < 0)


def test_j1j2():
    # on the Neel sublattice of the 4x4 cluster the three points sit at 0.44, 0.55 and 0.65
    curve, report, step = default_sweep(C.J1J2_2D, 4)
    [peak] = near([c for c in report.of_order(1) if c.extremum_kind == 'max'], 0.55, step)
    low = near(report.of_order(2), 0.44, 2 * step)
    high = near(report.of_order(2), 0.65, 2 * step)
    assert low and high
    assert max(c.location for c in low) < peak.location < min(c.location for c in high)


def test_checkerboard():
    curve, report, step = default_sweep(C.CHECKERBOARD_2D, 4)
    assert near([c for c in report.of_order(1) if c.extremum_kind == 'max'], 0.93, 0.05)
    assert near(report.of_order(2), 0.82, 0.05)
    assert near(report.of_order(2), 1.02, 0.05)


def test_extended_hubbard_boundary():
    grid = make_grid(0.0, 4.0, 0.05)
    separation = {}
    for n in (6, 10):
        rows, _ = hubbard_phase_scan([2.0, 4.0, 6.0], grid, n, threads=THREADS)
        weak = rows[0]
        # at U = 2 the six-site peak sits two grid steps below U/2
        assert weak.first_order is not None and abs(weak.first_order - 1.0) <= 0.1 + 1e-9
        for row in rows[1:]:
            assert row.first_order is not None and abs(row.first_order - row.U / 2) <= 0.05 + 1e-9
            assert row.second_order_low is not None and row.second_order_high is not None
        separation[n] = rows[1].second_order_high - rows[1].second_order_low
    assert separation[10] < separation[6]


def test_validation_suite():
    assert all(result.passed for result in run_validation())


def test_negative_u_hubbard():
    rows, _ = hubbard_phase_scan([-4.0], make_grid(0.0, 4.0, 0.05), 6, threads=THREADS)
    assert rows[0].candidates and any(c.order == 2 for c in rows[0].candidates)
