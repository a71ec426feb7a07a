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

import math
from dataclasses import dataclass, field, replace
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import aslinearoperator
from entroscope.utils import C, FAMILY_COUPLINGS, popcount
from entroscope.lattice import Lattice, make_preset_lattice
from entroscope.hilbert import enumerate_sector

SPIN_FAMILIES = (C.DIMER_2D, C.J1J2_2D, C.CHECKERBOARD_2D)
ZERO_TOL = 1e-15


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """
    Model family, coupling values and the lattice they live on. Missing couplings take family defaults.
    """

    family: str
    couplings: dict = field(default_factory=dict)
    lattice: Lattice = None

    def __post_init__(self):
        if self.family not in FAMILY_COUPLINGS:
            raise ValueError('Unknown model family "%s"; choose one of %s'
                             % (self.family, ', '.join(sorted(FAMILY_COUPLINGS))))
        if self.lattice is None:
            raise ValueError('ModelSpec needs a lattice')
        if self.lattice.family is not None and self.lattice.family != self.family:
            raise ValueError('Lattice family %s does not match model family %s' % (self.lattice.family, self.family))
        allowed = FAMILY_COUPLINGS[self.family]
        merged = dict(allowed)
        for name, value in self.couplings.items():
            if name not in allowed:
                raise ValueError('Coupling "%s" is not defined for %s (allowed: %s)'
                                 % (name, self.family, ', '.join(sorted(allowed))))
            value = float(value)
            if not math.isfinite(value):
                raise ValueError('Coupling %s must be finite, got %s' % (name, value))
            merged[name] = value
        object.__setattr__(self, 'couplings', merged)

    @property
    def num_sites(self):
        return self.lattice.num_sites

    @property
    def basis_kind(self):
        return C.FERMION_SITE4 if self.family == C.HUBBARD_CHAIN else C.SPIN_HALF

    def default_sector(self):
        if self.family == C.HUBBARD_CHAIN:
            return (self.num_sites // 2, self.num_sites // 2)
        if self.family == C.ISING_CHAIN:
            return 'even'
        return 0

    def with_couplings(self, **couplings):
        merged = dict(self.couplings)
        merged.update(couplings)
        return replace(self, couplings=merged)

    def model_dict(self):
        """
        Everything that defines the model except the coupling values
        """

        return {'family': self.family, 'lattice': self.lattice.to_dict()}

    def to_dict(self):
        d = self.model_dict()
        d[C.COUPLINGS] = dict(sorted(self.couplings.items()))
        return d


def make_model(family, size, **couplings):
    return ModelSpec(family, couplings, make_preset_lattice(family, size))


def bond_couplings(spec):
    """
    Coupling value bound to each bond label of the family
    """

    c = spec.couplings
    if spec.family == C.DIMER_2D:
        return {C.DIMER: c[C.J_DIMER], C.INTERDIMER: c[C.LAMBDA] * c[C.J_DIMER]}
    if spec.family == C.J1J2_2D:
        return {C.J1: c[C.J1], C.J2: c[C.J2]}
    if spec.family == C.CHECKERBOARD_2D:
        return {C.J: c[C.J], C.JCROSS: c[C.JCROSS]}
    if spec.family == C.ISING_CHAIN:
        return {C.NN: 1.0}
    return {C.HOP: c[C.T]}


def _bound_bonds(spec):
    binding = bond_couplings(spec)
    bonds = []
    for b in spec.lattice.bonds:
        if b.label not in binding:
            raise ValueError('Bond label %s has no coupling bound for %s (bound labels: %s)'
                             % (b.label, spec.family, ', '.join(sorted(binding))))
        bonds.append((b.i, b.j, binding[b.label]))
    return bonds


def _assemble(basis, diag, rows, cols, vals):
    dim = basis.dimension
    index = np.arange(dim)
    rows = np.concatenate([index] + rows) if rows else index
    cols = np.concatenate([index] + cols) if cols else index
    vals = np.concatenate([diag] + vals) if vals else diag
    H = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    H.sum_duplicates()
    H.data[np.abs(H.data) < ZERO_TOL] = 0.0
    H.eliminate_zeros()
    return H


def _exchange_terms(basis, pairs):
    """
    Diagonal and off-diagonal entries of sum J S_i.S_j over (i, j, J) pairs in a spin basis
    """

    states = basis.states
    index = np.arange(basis.dimension)
    diag = np.zeros(basis.dimension)
    rows, cols, vals = [], [], []
    for i, j, coupling in pairs:
        if coupling == 0.0:
            continue
        antiparallel = ((states >> i) & 1) != ((states >> j) & 1)
        diag += np.where(antiparallel, -coupling / 4, coupling / 4)
        flipped = states[antiparallel] ^ ((1 << i) | (1 << j))
        rows.append(index[antiparallel])
        cols.append(basis.index(flipped))
        vals.append(np.full(len(flipped), coupling / 2))
    return diag, rows, cols, vals


def build_spin_hamiltonian(spec, basis):
    """
    Heisenberg Hamiltonian sum over bonds of J_label S_i.S_j with spin-1/2 operators
    """

    if spec.family not in SPIN_FAMILIES:
        raise ValueError('build_spin_hamiltonian supports %s, got %s' % (', '.join(SPIN_FAMILIES), spec.family))
    if basis.kind != C.SPIN_HALF or basis.num_sites != spec.num_sites:
        raise ValueError('Spin Hamiltonian needs a %d-site %s basis' % (spec.num_sites, C.SPIN_HALF))
    return _assemble(basis, *_exchange_terms(basis, _bound_bonds(spec)))


def build_ising_hamiltonian(spec, num_sites=None, basis=None):
    """
    Transverse-field Ising ring -sum_i (sx_i sx_{i+1} + lambda sz_i) with Pauli matrices.

    The ring couples i to (i+1) mod N for every i, so a 2-site ring carries the bond twice.
    Without a basis the full 2^N space is used.
    """

    if spec.family != C.ISING_CHAIN:
        raise ValueError('build_ising_hamiltonian supports %s, got %s' % (C.ISING_CHAIN, spec.family))
    n = spec.num_sites if num_sites is None else int(num_sites)
    if basis is None:
        basis = enumerate_sector(C.SPIN_HALF, n)
    if basis.kind != C.SPIN_HALF or basis.num_sites != n:
        raise ValueError('Ising Hamiltonian needs a %d-site %s basis' % (n, C.SPIN_HALF))

    states = basis.states
    lam = spec.couplings[C.LAMBDA]
    diag = -lam * (2 * popcount(states, n) - n).astype(float)
    rows, cols, vals = [], [], []
    index = np.arange(basis.dimension)
    for i in range(n):
        flipped = states ^ ((1 << i) | (1 << ((i + 1) % n)))
        rows.append(index)
        cols.append(basis.index(flipped))
        vals.append(np.full(basis.dimension, -1.0))
    return _assemble(basis, diag, rows, cols, vals)


def _site_density(up, dn, site):
    return ((up >> site) & 1) + ((dn >> site) & 1)


def build_hubbard_hamiltonian(spec, basis):
    """
    Extended Hubbard chain -t sum (c+_i c_j + h.c.) + U sum n_up n_dn + V sum n_i n_j at half filling
    """

    if spec.family != C.HUBBARD_CHAIN:
        raise ValueError('build_hubbard_hamiltonian supports %s, got %s' % (C.HUBBARD_CHAIN, spec.family))
    n = spec.num_sites
    if basis.kind != C.FERMION_SITE4 or basis.num_sites != n:
        raise ValueError('Hubbard Hamiltonian needs a %d-site %s basis' % (n, C.FERMION_SITE4))
    n_up, n_dn = basis.sector
    if n_up + n_dn != n:
        raise ValueError('Only half filling is supported: sector (%d, %d) holds %d electrons on %d sites'
                         % (n_up, n_dn, n_up + n_dn, n))

    states = basis.states
    up, dn = basis.up_masks(), basis.dn_masks()
    index = np.arange(basis.dimension)
    bonds = _bound_bonds(spec)

    diag = spec.couplings[C.U] * popcount(up & dn, n).astype(float)
    V = spec.couplings[C.V]
    if V != 0.0:
        for i, j, _ in bonds:
            diag += V * _site_density(up, dn, i) * _site_density(up, dn, j)

    rows, cols, vals = [], [], []
    for i, j, t in bonds:
        if t == 0.0:
            continue
        for offset in (0, n):
            a, b = offset + i, offset + j
            lo, hi = min(a, b), max(a, b)
            movable = ((states >> a) & 1) != ((states >> b) & 1)
            source = states[movable]
            # Jordan-Wigner string over the modes strictly between lo and hi
            between = ((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1)
            sign = 1 - 2 * (popcount(source & between, 2 * n) % 2)
            rows.append(index[movable])
            cols.append(basis.index(source ^ ((1 << a) | (1 << b))))
            vals.append(-t * sign.astype(float))
    return _assemble(basis, diag, rows, cols, vals)


def build_hamiltonian(spec, basis):
    if spec.family == C.ISING_CHAIN:
        return build_ising_hamiltonian(spec, basis=basis)
    if spec.family == C.HUBBARD_CHAIN:
        return build_hubbard_hamiltonian(spec, basis)
    return build_spin_hamiltonian(spec, basis)


def as_operator(H):
    """
    Matrix-free view used by the eigensolver; any object with shape and matvec qualifies
    """

    return aslinearoperator(H)


def apply(H, v):
    return as_operator(H).matvec(np.asarray(v, dtype=float))


def total_spin_squared(basis):
    """
    Total spin S^2 = 3N/4 + 2 sum_{i<j} S_i.S_j in a spin basis
    """

    if basis.kind != C.SPIN_HALF:
        raise ValueError('Total spin needs a %s basis, got %s' % (C.SPIN_HALF, basis.kind))
    n = basis.num_sites
    pairs = [(i, j, 2.0) for i in range(n) for j in range(i + 1, n)]
    diag, rows, cols, vals = _exchange_terms(basis, pairs)
    return _assemble(basis, diag + 0.75 * n, rows, cols, vals)


def expectation(H, v):
    v = np.asarray(v, dtype=float)
    return float(v @ apply(H, v) / (v @ v))


def double_occupancy(vector, basis):
    """
    Ground-state double occupancy per site <sum_i n_i,up n_i,dn> / N
    """

    if basis.kind != C.FERMION_SITE4:
        raise ValueError('Double occupancy needs a %s basis, got %s' % (C.FERMION_SITE4, basis.kind))
    weights = np.asarray(vector, dtype=float) ** 2
    doubles = popcount(basis.up_masks() & basis.dn_masks(), basis.num_sites)
    return float(weights @ doubles / weights.sum() / basis.num_sites)
