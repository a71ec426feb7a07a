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

import sys
import warnings
from dataclasses import dataclass, field
import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import aslinearoperator
from entroscope.utils import ConvergenceError

DENSE_MAX_DIM = 4096
# Krylov basis storage cap, in floats
MAX_BASIS_FLOATS = 25_000_000
START_VECTORS = ('ones', 'random')


@dataclass(frozen=True)
class SolverOptions:
    """
    max_iter bounds the matrix-vector products spent on each eigenpair. tol is the relative size of a
    Lanczos recurrence vector below which the Krylov space counts as invariant. A Ritz pair is accepted
    once its explicit residual is at most residual_tol.
    """

    max_iter: int = 500
    krylov_dim: int = 200
    tol: float = 1e-12
    residual_tol: float = 1e-9
    degeneracy_tol: float = 1e-6
    start: str = 'ones'
    seed: int = 20050101

    def __post_init__(self):
        if self.max_iter < 1 or self.krylov_dim < 2:
            raise ValueError('Solver needs max_iter >= 1 and krylov_dim >= 2, got %d and %d'
                             % (self.max_iter, self.krylov_dim))
        if min(self.tol, self.residual_tol, self.degeneracy_tol) <= 0:
            raise ValueError('Solver tolerances must be positive')
        if self.start not in START_VECTORS:
            raise ValueError('Start vector "%s" is not supported; choose %s' % (self.start, ' or '.join(START_VECTORS)))


@dataclass(frozen=True, eq=False)
class GroundState:
    energy: float
    vector: np.ndarray = field(repr=False)
    gap: float
    iterations: int
    residual: float
    degenerate_flag: bool
    energies: tuple = ()


def _project_out(w, basis_rows, deflate):
    # classical Gram-Schmidt applied twice
    for _ in range(2):
        if len(basis_rows):
            w -= basis_rows.T @ (basis_rows @ w)
        for u in deflate:
            w -= (u @ w) * u
    return w


def _random_direction(rng, dim, basis_rows, deflate):
    w = _project_out(rng.standard_normal(dim), basis_rows, deflate)
    norm = np.linalg.norm(w)
    return w / norm if norm > 1e-8 else None


def _lowest_pair(op, start, deflate, opts, rng):
    """
    Restarted Lanczos with full reorthogonalization for the lowest eigenpair orthogonal to deflate
    """

    dim = op.shape[0]
    space = dim - len(deflate)
    v = _project_out(np.array(start, dtype=float), np.zeros((0, dim)), deflate)
    norm = np.linalg.norm(v)
    v = v / norm if norm > 1e-8 else _random_direction(rng, dim, np.zeros((0, dim)), deflate)

    iterations, best = 0, (np.inf, None, None)
    while iterations < opts.max_iter:
        m = min(opts.krylov_dim, max(20, MAX_BASIS_FLOATS // dim), opts.max_iter - iterations, space)
        Q = np.zeros((m, dim))
        Q[0] = v
        alpha, beta = [], []
        for j in range(m):
            w = op.matvec(Q[j])
            iterations += 1
            scale = np.linalg.norm(w)
            alpha.append(Q[j] @ w)
            w = _project_out(w, Q[:j + 1], deflate)
            b = np.linalg.norm(w)
            if j == m - 1:
                break
            if b <= opts.tol * max(scale, 1.0):
                # invariant subspace reached; continue in a fresh direction
                q = _random_direction(rng, dim, Q[:j + 1], deflate)
                if q is None:
                    break
                Q[j + 1], b = q, 0.0
            else:
                Q[j + 1] = w / b
            beta.append(b)
            if j % 10 == 9 and b > 0:
                theta, S = eigh_tridiagonal(np.array(alpha), np.array(beta[:-1]), select='i', select_range=(0, 0))
                if b * abs(S[-1, 0]) < 1e-2 * opts.residual_tol:
                    break

        steps = len(alpha)
        if steps == 1:
            theta, S = np.array(alpha), np.ones((1, 1))
        else:
            theta, S = eigh_tridiagonal(np.array(alpha), np.array(beta[:steps - 1]))
        ritz = S[:, 0] @ Q[:steps]
        ritz /= np.linalg.norm(ritz)
        residual = float(np.linalg.norm(op.matvec(ritz) - theta[0] * ritz))
        if residual < best[0]:
            best = (residual, theta[0], ritz)
        if residual <= opts.residual_tol:
            return float(theta[0]), ritz, iterations, residual
        v = ritz if steps < 2 else S[:, 0] @ Q[:steps] + S[:, 1] @ Q[:steps]
        v = _project_out(v, np.zeros((0, dim)), deflate)
        v /= np.linalg.norm(v)

    raise ConvergenceError('Lanczos did not converge within %d iterations' % opts.max_iter, best[0])


def lanczos_lowest(H, k=2, opts=None, verbose=False):
    """
    Lowest k eigenpairs of a symmetric operator by successive deflated Lanczos runs.

    H is a sparse matrix, dense array or anything scipy can wrap as a LinearOperator.
    The first run starts from the normalized all-ones vector (opts.start='ones'); later runs and
    Krylov breakdowns draw from a pseudorandom generator seeded with opts.seed, so results are
    reproducible.
    """

    opts = SolverOptions() if opts is None else opts
    op = aslinearoperator(H)
    dim = op.shape[0]
    if op.shape[1] != dim:
        raise ValueError('Operator must be square, got shape %s' % (op.shape,))
    if dim < max(k, 2):
        raise ValueError('Lanczos needs dimension >= max(k, 2), got dimension %d for k=%d' % (dim, k))
    rng = np.random.default_rng(opts.seed)

    energies, vectors, residuals, iterations = [], [], [], 0
    n_pairs, reordered = k, False
    while len(energies) < n_pairs:
        if len(energies) == 0 and opts.start == 'ones':
            start = np.ones(dim)
        else:
            start = rng.standard_normal(dim)
        energy, vector, its, residual = _lowest_pair(op, start, vectors, opts, rng)
        iterations += its
        if verbose:
            sys.stdout.write('Eigenpair %d: E = %.12f after %d iterations (residual %.2e)\n'
                             % (len(energies), energy, its, residual))
        if len(energies) and energy < energies[-1] - opts.residual_tol:
            # an earlier run missed part of the spectrum; one more pair recovers the k lowest
            if not reordered:
                warnings.warn('Start vector missed the lowest eigenvector; reordering Ritz pairs')
                reordered = True
                n_pairs = min(n_pairs + 1, dim)
        energies.append(energy)
        vectors.append(vector)
        residuals.append(residual)

    order = np.argsort(energies, kind='stable')[:k]
    energies = [energies[i] for i in order]
    vector, residual = vectors[order[0]], residuals[order[0]]
    gap = energies[1] - energies[0] if k >= 2 else float('nan')
    return GroundState(energy=energies[0], vector=vector, gap=gap, iterations=iterations, residual=residual,
                       degenerate_flag=bool(gap < opts.degeneracy_tol), energies=tuple(energies))


def dense_lowest(H, k=None):
    """
    Full spectrum of a materialized symmetric matrix, ascending, optionally cut to the k lowest
    """

    dim = H.shape[0]
    if dim > DENSE_MAX_DIM:
        raise ValueError('Dense diagonalization is limited to dimension %d, got %d' % (DENSE_MAX_DIM, dim))
    A = H.toarray() if sp.issparse(H) else np.asarray(H, dtype=float)
    values, vectors = eigh(A)
    if k is not None:
        values, vectors = values[:k], vectors[:, :k]
    return values, vectors


def dense_ground_state(H, opts=None):
    """
    GroundState from dense diagonalization, used as the oracle and for tiny sectors
    """

    opts = SolverOptions() if opts is None else opts
    values, vectors = dense_lowest(H, k=2)
    vector = vectors[:, 0]
    residual = float(np.linalg.norm(H @ vector - values[0] * vector))
    gap = float(values[1] - values[0]) if len(values) > 1 else float('nan')
    return GroundState(energy=float(values[0]), vector=vector, gap=gap, iterations=0, residual=residual,
                       degenerate_flag=bool(gap < opts.degeneracy_tol), energies=tuple(float(x) for x in values))
