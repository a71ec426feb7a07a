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

Oracle checks that exercise the solver chain against independent computations.
Every check returns a CheckResult and never raises on a numerical mismatch.
"""

import sys
import itertools
from dataclasses import dataclass
import numpy as np
from entroscope.utils import C
from entroscope import hilbert, hamiltonian, eigensolver, entanglement, gaussian_ising
from entroscope.lattice import Bond, Lattice, make_partition

VALIDATION_SEED = 20050101


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name, error, tol):
    return CheckResult(name, bool(error <= tol), 'max deviation %.3e (tolerance %.0e)' % (error, tol))


def _ring(n, label):
    return Lattice(n, 1, (n,), tuple(Bond(i, (i + 1) % n, label) for i in range(n)), 'ring_%d' % n)


def _ground(spec, sector=None):
    basis = hilbert.enumerate_sector(spec.basis_kind, spec.num_sites,
                                     spec.default_sector() if sector is None else sector)
    H = hamiltonian.build_hamiltonian(spec, basis)
    return basis, H


def _oracle_matrices():
    rng = np.random.default_rng(VALIDATION_SEED)
    A = rng.standard_normal((50, 50))
    yield 'random symmetric 50x50', (A + A.T) / 2
    heisenberg = hamiltonian.ModelSpec(C.CHECKERBOARD_2D, {C.J: 1.0}, _ring(8, C.J))
    yield 'Heisenberg ring N=8', _ground(heisenberg)[1]
    hubbard = hamiltonian.make_model(C.HUBBARD_CHAIN, 6, **{C.U: 4.0, C.V: 1.0})
    yield 'Hubbard N=6 U=4 V=1', _ground(hubbard)[1]
    ising = hamiltonian.make_model(C.ISING_CHAIN, 10, **{C.LAMBDA: 1.0})
    yield 'Ising N=10 lambda=1', _ground(ising)[1]


def check_dense_vs_lanczos(tol=1e-10):
    error = 0.0
    for _, H in _oracle_matrices():
        dense = eigensolver.dense_lowest(H, k=1)[0][0]
        error = max(error, abs(eigensolver.lanczos_lowest(H).energy - dense))
    return _result('dense_vs_lanczos', error, tol)


def _spin_digit(code, site):
    return 0 if (code >> site) & 1 else 1


def brute_force_spin_rho(amplitudes, num_sites, r_sites):
    """
    rho[r, r'] = sum_b <r b|psi><psi|r' b> with each block index read digit by digit
    """

    b_sites = [s for s in range(num_sites) if s not in r_sites]
    M = np.zeros((2 ** len(r_sites), 2 ** len(b_sites)))
    for code, amplitude in enumerate(amplitudes):
        r_index = b_index = 0
        for s in r_sites:
            r_index = 2 * r_index + _spin_digit(code, s)
        for s in b_sites:
            b_index = 2 * b_index + _spin_digit(code, s)
        M[r_index, b_index] += amplitude
    rho = np.zeros((M.shape[0], M.shape[0]))
    for b in range(M.shape[1]):
        rho += np.outer(M[:, b], M[:, b])
    return rho


def _bubble_sign(keys):
    keys, sign = list(keys), 1
    for end in range(len(keys) - 1, 0, -1):
        for k in range(end):
            if keys[k] > keys[k + 1]:
                keys[k], keys[k + 1] = keys[k + 1], keys[k]
                sign = -sign
    return sign


def brute_force_fermion_rho(amplitudes, num_sites, r_sites):
    """
    Same contraction for fermions, with each creation string sorted into site order by explicit swaps
    """

    n = num_sites
    b_sites = [s for s in range(n) if s not in r_sites]
    order = list(r_sites) + b_sites
    M = np.zeros((4 ** len(r_sites), 4 ** len(b_sites)))
    for code in np.flatnonzero(amplitudes):
        modes = [m for m in range(2 * n) if (code >> m) & 1]
        # target position of mode m: its site's slot in order, up before down
        keys = [2 * order.index(m % n) + (m >= n) for m in modes]
        digits = {s: ((code >> s) & 1) + 2 * ((code >> (n + s)) & 1) for s in range(n)}
        r_index = b_index = 0
        for s in r_sites:
            r_index = 4 * r_index + digits[s]
        for s in b_sites:
            b_index = 4 * b_index + digits[s]
        M[r_index, b_index] += _bubble_sign(keys) * amplitudes[code]
    rho = np.zeros((M.shape[0], M.shape[0]))
    for b in range(M.shape[1]):
        rho += np.outer(M[:, b], M[:, b])
    return rho


def random_sector_state(rng, kind, num_sites):
    if kind == C.SPIN_HALF:
        basis = hilbert.enumerate_sector(kind, num_sites)
    else:
        sector = tuple(int(x) for x in rng.integers(0, num_sites + 1, size=2))
        basis = hilbert.enumerate_sector(kind, num_sites, sector)
    v = rng.standard_normal(basis.dimension)
    return hilbert.embed_full(v / np.linalg.norm(v), basis)


def _random_partition(rng, num_sites):
    size = int(rng.integers(1, num_sites))
    r_sites = [int(s) for s in rng.permutation(num_sites)[:size]]
    lattice = _ring(num_sites, C.HOP)
    return make_partition(lattice, r_sites)


def check_brute_force_partial_trace(n_states=100, tol=1e-12, seed=VALIDATION_SEED):
    rng = np.random.default_rng(seed)
    error = 0.0
    for trial in range(n_states):
        kind = C.SPIN_HALF if trial % 2 == 0 else C.FERMION_SITE4
        n = int(rng.integers(4, 7))
        state = random_sector_state(rng, kind, n)
        partition = _random_partition(rng, n)
        rho = entanglement.partial_trace(state, partition).matrix
        oracle = brute_force_spin_rho if kind == C.SPIN_HALF else brute_force_fermion_rho
        error = max(error, np.abs(rho - oracle(state.amplitudes, n, list(partition.r_sites))).max())
    return _result('brute_force_partial_trace', error, tol)


def check_complement_symmetry(tol=1e-10, seed=VALIDATION_SEED):
    rng = np.random.default_rng(seed)
    error = 0.0
    states = [random_sector_state(rng, kind, 6) for kind in (C.SPIN_HALF, C.FERMION_SITE4) for _ in range(5)]
    for spec in (hamiltonian.make_model(C.HUBBARD_CHAIN, 6, **{C.U: 4.0, C.V: 1.0}),
                 hamiltonian.make_model(C.ISING_CHAIN, 10, **{C.LAMBDA: 0.8})):
        basis, H = _ground(spec)
        states.append(hilbert.embed_full(eigensolver.lanczos_lowest(H).vector, basis))
    for state in states:
        partition = _random_partition(rng, state.num_sites)
        s_r = entanglement.von_neumann_entropy(entanglement.partial_trace(state, partition)).bits
        s_b = entanglement.von_neumann_entropy(entanglement.partial_trace(state, partition.complement())).bits
        error = max(error, abs(s_r - s_b))
    return _result('complement_symmetry', error, tol)


def check_fermion_relabel(tol_order=1e-12, tol_relabel=1e-10):
    """
    Hubbard N=6 ground state: the R entropy must not depend on the internal order of r_sites, nor on a
    relabelling of the lattice that makes R the leading block of sites
    """

    spec = hamiltonian.make_model(C.HUBBARD_CHAIN, 6, **{C.U: 4.0, C.V: 0.5})
    basis, H = _ground(spec)
    ground = eigensolver.dense_ground_state(H)
    r_sites = (0, 2, 4)
    reference = entanglement.sublattice_entropy(ground, basis, make_partition(spec.lattice, r_sites)).bits

    order_error = 0.0
    for order in itertools.permutations(r_sites):
        bits = entanglement.sublattice_entropy(ground, basis, make_partition(spec.lattice, order)).bits
        order_error = max(order_error, abs(bits - reference))

    b_sites = [s for s in range(spec.num_sites) if s not in r_sites]
    new_label = [0] * spec.num_sites
    for position, site in enumerate(list(r_sites) + b_sites):
        new_label[site] = position
    relabelled = hamiltonian.ModelSpec(spec.family, spec.couplings, spec.lattice.relabel(new_label))
    basis2, H2 = _ground(relabelled)
    ground2 = eigensolver.dense_ground_state(H2)
    partition2 = make_partition(relabelled.lattice, range(len(r_sites)))
    relabel_error = abs(entanglement.sublattice_entropy(ground2, basis2, partition2).bits - reference)

    passed = order_error <= tol_order and relabel_error <= tol_relabel
    return CheckResult('fermion_relabel_invariance', passed,
                       'internal order deviation %.3e (tolerance %.0e), relabelled lattice deviation %.3e '
                       '(tolerance %.0e)' % (order_error, tol_order, relabel_error, tol_relabel))


def check_hopping_oracle(tol=1e-8):
    spec = hamiltonian.make_model(C.HUBBARD_CHAIN, 6)
    basis, H = _ground(spec)
    ground = eigensolver.lanczos_lowest(H)
    r_sites = (0, 2, 4)
    bits = entanglement.sublattice_entropy(ground, basis, make_partition(spec.lattice, r_sites)).bits
    oracle = gaussian_ising.hopping_entropy(spec.lattice, r_sites).bits
    return _result('free_fermion_oracle', abs(bits - oracle), tol)


def check_gaussian_vs_ed(sizes=(8, 12), lams=(0.7, 1.0), tol=1e-8):
    error = 0.0
    for n, lam in itertools.product(sizes, lams):
        spec = hamiltonian.make_model(C.ISING_CHAIN, n, **{C.LAMBDA: lam})
        basis, H = _ground(spec, 'even')
        ground = eigensolver.dense_ground_state(H)
        error = max(error, abs(ground.energy - gaussian_ising.ground_energy(n, lam)))
        kernel = gaussian_ising.build_kernel(n, lam)
        for length in range(1, n // 2 + 1):
            block = tuple(range(length))
            ed = entanglement.sublattice_entropy(ground, basis, make_partition(spec.lattice, block)).bits
            error = max(error, abs(ed - gaussian_ising.subsystem_entropy(kernel, block).bits))
    return _result('gaussian_vs_ed', error, tol)


CHECKS = (check_dense_vs_lanczos, check_brute_force_partial_trace, check_complement_symmetry,
          check_fermion_relabel, check_hopping_oracle, check_gaussian_vs_ed)


def run_validation(verbose=False):
    results = []
    for check in CHECKS:
        result = check()
        if verbose:
            sys.stdout.write('%-28s %s  %s\n' % (result.name, 'PASS' if result.passed else 'FAIL', result.detail))
        results.append(result)
    return results
