"""
Copyright 2024 The entroscope developers
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

import os
import sys
import json
import warnings
from dataclasses import dataclass, field, asdict
from concurrent.futures import ThreadPoolExecutor
import numpy as np
from scipy.signal import peak_prominences
from entroscope.utils import C, SolverError, fingerprint, canonical_json, write_atomic
from entroscope import hilbert, hamiltonian, eigensolver, entanglement, gaussian_ising
from entroscope.lattice import make_partition, preset_partition
from entroscope.eigensolver import SolverOptions

METHODS = ('lanczos', 'dense', 'gaussian')


@dataclass(frozen=True)
class Thresholds:
    """
    Minimum prominence of curve and derivative extrema. With relative=True both are fractions of the
    value range of the curve they apply to.
    """

    curve: float = 1e-4
    derivative: float = 1e-3
    relative: bool = False

    def __post_init__(self):
        if self.curve < 0 or self.derivative < 0:
            raise ValueError('Thresholds must be nonnegative, got curve=%g derivative=%g' % (self.curve, self.derivative))


@dataclass(frozen=True)
class PointResult:
    energy: float
    gap: float
    entropy_bits: float
    degenerate: bool


@dataclass(frozen=True, eq=False)
class EntropyCurve:
    parameter: str
    grid: np.ndarray = field(repr=False)
    s_over_n: np.ndarray = field(repr=False)
    entropy_bits: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    gap: np.ndarray = field(repr=False)
    degenerate: np.ndarray = field(repr=False)
    fingerprint: str = ''
    num_sites: int = 0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if np.any(np.diff(grid) <= 0):
            raise ValueError('Sweep grid must be strictly increasing')
        for name in ('s_over_n', 'entropy_bits', 'energy', 'gap', 'degenerate'):
            if len(getattr(self, name)) != len(grid):
                raise ValueError('Curve column %s has %d values for a grid of %d' % (name, len(getattr(self, name)), len(grid)))


@dataclass(frozen=True, eq=False)
class DerivativeCurve:
    parameter: str
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Candidate:
    location: float
    order: int
    extremum_kind: str
    prominence: float
    source: str
    curvature: float
    index: int

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TransitionReport:
    candidates: tuple = ()

    def of_order(self, order):
        return [c for c in self.candidates if c.order == order]

    def to_dict(self):
        return {'candidates': [c.to_dict() for c in self.candidates]}


def model_fingerprint(spec, partition, sector, method, opts):
    """
    Hash of everything that fixes a point result except the coupling values
    """

    return fingerprint({'model': spec.model_dict(), 'partition': partition.to_dict(),
                        'sector': sector, 'method': method, 'solver': asdict(opts)})


def point_key(model_fp, couplings):
    return fingerprint({'model': model_fp, C.COUPLINGS: dict(sorted(couplings.items()))})


def resolve_method(spec, method=None):
    if method is None:
        # the Ising chain is always solved as free fermions; ED stays available as a cross-check
        if spec.family == C.ISING_CHAIN:
            return 'gaussian'
        return 'lanczos'
    if method not in METHODS:
        raise ValueError('Method "%s" is not supported; choose one of %s' % (method, ', '.join(METHODS)))
    if method == 'gaussian' and spec.family != C.ISING_CHAIN:
        raise ValueError('Method gaussian is only available for %s' % C.ISING_CHAIN)
    return method


def compute_point(spec, partition, basis=None, method=None, opts=None):
    """
    Ground state energy, gap and sublattice entropy of one model instance
    """

    opts = SolverOptions() if opts is None else opts
    method = resolve_method(spec, method)

    if method == 'gaussian':
        n, lam = spec.num_sites, spec.couplings[C.LAMBDA]
        gap = gaussian_ising.excitation_gap(n, lam)
        bits = gaussian_ising.subsystem_entropy(gaussian_ising.build_kernel(n, lam), partition.r_sites).bits
        return PointResult(gaussian_ising.ground_energy(n, lam), gap, bits, bool(gap < opts.degeneracy_tol))

    if basis is None:
        basis = hilbert.enumerate_sector(spec.basis_kind, spec.num_sites, spec.default_sector())
    H = hamiltonian.build_hamiltonian(spec, basis)
    if method == 'dense':
        ground = eigensolver.dense_ground_state(H, opts)
    else:
        ground = eigensolver.lanczos_lowest(H, k=2, opts=opts)
    bits = entanglement.sublattice_entropy(ground, basis, partition).bits
    return PointResult(ground.energy, ground.gap, bits, ground.degenerate_flag)


def _read_cache(path):
    try:
        with open(path, 'r') as f:
            payload = json.load(f)
        return PointResult(float(payload[C.ENERGY]), float(payload[C.GAP]), float(payload[C.ENTROPY_BITS]),
                           bool(payload[C.DEGENERATE]))
    except FileNotFoundError:
        return None
    except (ValueError, KeyError, TypeError) as e:
        warnings.warn('Ignoring unreadable cache file %s: %s' % (path, e))
        return None


def _write_cache(path, value, couplings, result):
    payload = {'schema': C.CACHE_SCHEMA, C.PARAM: value, C.ENERGY: result.energy, C.GAP: result.gap,
               C.ENTROPY_BITS: result.entropy_bits, C.DEGENERATE: result.degenerate,
               C.COUPLINGS: dict(sorted(couplings.items()))}
    write_atomic(path, canonical_json(payload))


def cached_point(spec, partition, basis=None, sector=None, method=None, opts=None, cache_dir=None, value=None):
    """
    compute_point behind an optional content-addressed cache directory
    """

    opts = SolverOptions() if opts is None else opts
    method = resolve_method(spec, method)
    sector = spec.default_sector() if sector is None else sector
    if basis is None and method != 'gaussian':
        basis = hilbert.enumerate_sector(spec.basis_kind, spec.num_sites, sector)
    path = None
    if cache_dir is not None:
        key = point_key(model_fingerprint(spec, partition, sector, method, opts), spec.couplings)
        path = os.path.join(cache_dir, key + '.json')
        hit = _read_cache(path)
        if hit is not None:
            return hit
    result = compute_point(spec, partition, basis, method, opts)
    if path is not None:
        _write_cache(path, value, spec.couplings, result)
    return result


def run_sweep(spec, parameter, grid, partition=None, sector=None, method=None, opts=None, cache_dir=None,
              threads=1, verbose=False):
    """
    Sweep one coupling over grid and record energy, gap and S_N/N at every point.

    Points are independent and may run on several threads; results are merged in grid order.
    """

    if parameter not in spec.couplings:
        raise ValueError('Sweep parameter "%s" is not a coupling of %s (couplings: %s)'
                         % (parameter, spec.family, ', '.join(sorted(spec.couplings))))
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 5:
        raise ValueError('Sweep grid needs at least 5 points, got %d' % grid.size)
    if np.any(np.diff(grid) <= 0):
        raise ValueError('Sweep grid must be strictly increasing')
    opts = SolverOptions() if opts is None else opts
    method = resolve_method(spec, method)
    sector = spec.default_sector() if sector is None else sector
    partition = preset_partition(spec.lattice) if partition is None else partition
    partition = make_partition(spec.lattice, partition.r_sites)
    basis = None
    if method != 'gaussian':
        basis = hilbert.enumerate_sector(spec.basis_kind, spec.num_sites, sector)

    curve_fp = fingerprint({'model': model_fingerprint(spec, partition, sector, method, opts), 'parameter': parameter,
                            'fixed': {k: v for k, v in sorted(spec.couplings.items()) if k != parameter}})
    if verbose:
        sys.stdout.write('Sweeping %s over %d points of %s (N=%d, method %s) ...\n'
                         % (parameter, len(grid), spec.family, spec.num_sites, method))

    def solve(value):
        point_spec = spec.with_couplings(**{parameter: float(value)})
        try:
            result = cached_point(point_spec, partition, basis, sector, method, opts, cache_dir, float(value))
        except (SolverError, ValueError, np.linalg.LinAlgError) as e:
            raise SolverError('Solve failed at %s=%r: %s' % (parameter, float(value), e)) from e
        if verbose:
            sys.stdout.write('  %s=%g  E0=%.10f  gap=%.3e  S=%.8f\n'
                             % (parameter, value, result.energy, result.gap, result.entropy_bits))
        return result

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, grid))
    else:
        results = [solve(value) for value in grid]

    for value, result in zip(grid, results):
        if result.degenerate:
            warnings.warn('Degenerate ground state at %s=%g (gap %.3e); entropy of the converged state is kept'
                          % (parameter, value, result.gap))

    bits = np.array([r.entropy_bits for r in results])
    return EntropyCurve(parameter=parameter, grid=grid, s_over_n=bits / spec.num_sites, entropy_bits=bits,
                        energy=np.array([r.energy for r in results]), gap=np.array([r.gap for r in results]),
                        degenerate=np.array([r.degenerate for r in results]), fingerprint=curve_fp,
                        num_sites=spec.num_sites)


def uniform_step(grid):
    grid = np.asarray(grid, dtype=float)
    steps = np.diff(grid)
    h = (grid[-1] - grid[0]) / (len(grid) - 1)
    if not np.allclose(steps, h, rtol=1e-9, atol=1e-12):
        raise ValueError('Derivative needs a uniform grid; steps range from %g to %g' % (steps.min(), steps.max()))
    return h


def derivative(curve):
    """
    d(S_N/N)/dparam by central differences inside and second-order one-sided stencils at the endpoints
    """

    if len(curve.grid) < 5:
        raise ValueError('Derivative needs at least 5 grid points, got %d' % len(curve.grid))
    h = uniform_step(curve.grid)
    return DerivativeCurve(curve.parameter, np.asarray(curve.grid, dtype=float),
                           np.gradient(np.asarray(curve.s_over_n, dtype=float), h, edge_order=2))


def _extrema(values, grid, threshold, relative, order, source):
    values = np.asarray(values, dtype=float)
    span = values.max() - values.min()
    if relative:
        threshold = threshold * span
    if span == 0:
        return []
    h = grid[1] - grid[0]
    candidates = []
    for i in range(1, len(values) - 1):
        if values[i] > values[i - 1] and values[i] > values[i + 1]:
            kind, signal = 'max', values
        elif values[i] < values[i - 1] and values[i] < values[i + 1]:
            kind, signal = 'min', -values
        else:
            continue
        prominence = float(peak_prominences(signal, [i])[0][0])
        if prominence < threshold:
            continue
        curvature = abs(values[i + 1] - 2 * values[i] + values[i - 1]) / h ** 2
        candidates.append(Candidate(float(grid[i]), order, kind, prominence, source, float(curvature), i))
    return candidates


def detect_transitions(curve, deriv=None, thresholds=None):
    """
    Extrema of S_N/N are first-order candidates, extrema of its derivative second-order candidates.
    Endpoints never qualify, and a derivative extremum within one grid step of a curve extremum is dropped.
    """

    thresholds = Thresholds() if thresholds is None else thresholds
    grid = np.asarray(curve.grid, dtype=float)
    if len(grid) < 3:
        return TransitionReport()
    first = _extrema(curve.s_over_n, grid, thresholds.curve, thresholds.relative, 1, C.CURVE)
    second = []
    if deriv is not None:
        if len(deriv.grid) != len(grid) or not np.allclose(deriv.grid, grid, rtol=0, atol=1e-12):
            raise ValueError('Derivative grid does not match the curve grid')
        h = grid[1] - grid[0]
        second = [c for c in _extrema(deriv.values, grid, thresholds.derivative, thresholds.relative, 2, C.DERIVATIVE)
                  if all(abs(c.location - f.location) > h * (1 + 1e-9) for f in first)]
    return TransitionReport(tuple(sorted(first + second, key=lambda c: (c.location, c.order))))


@dataclass(frozen=True)
class BoundaryRow:
    U: float
    first_order: float
    second_order_low: float
    second_order_high: float
    candidates: tuple = ()

    def to_dict(self):
        return {C.U: self.U, 'first_order': self.first_order, 'second_order_low': self.second_order_low,
                'second_order_high': self.second_order_high, 'candidates': [c.to_dict() for c in self.candidates]}


def boundary_row(u_value, report):
    """
    Strongest S_N maximum and the nearest derivative extrema on either side of it
    """

    maxima = [c for c in report.of_order(1) if c.extremum_kind == 'max']
    first = max(maxima, key=lambda c: c.prominence).location if maxima else None
    low = high = None
    if first is not None:
        below = [c.location for c in report.of_order(2) if c.location < first]
        above = [c.location for c in report.of_order(2) if c.location > first]
        low = max(below) if below else None
        high = min(above) if above else None
    return BoundaryRow(float(u_value), first, low, high, report.candidates)


def hubbard_phase_scan(u_values, v_grid, num_sites, partition=None, thresholds=None, opts=None, cache_dir=None,
                       threads=1, method=None, verbose=False):
    """
    V sweeps of the half-filled extended Hubbard chain at fixed U, one boundary row per U.
    Negative U is accepted.
    """

    rows, curves = [], {}
    for u_value in u_values:
        spec = hamiltonian.make_model(C.HUBBARD_CHAIN, num_sites, **{C.U: float(u_value), C.V: float(v_grid[0])})
        curve = run_sweep(spec, C.V, v_grid, partition=partition, method=method, opts=opts, cache_dir=cache_dir,
                          threads=threads, verbose=verbose)
        report = detect_transitions(curve, derivative(curve), thresholds)
        rows.append(boundary_row(u_value, report))
        curves[float(u_value)] = curve
    return rows, curves
