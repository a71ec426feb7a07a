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

from dataclasses import dataclass, field
import numpy as np
from scipy.stats import entropy
from entroscope.utils import C
from entroscope import hilbert

CLAMP_TOL = 1e-12
TRACE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    """
    Density matrix of the sites in r_sites. Row index digits follow r_sites, first site most significant;
    local states are (up, down) for spins and (empty, up, down, up+down) for fermion sites.
    """

    matrix: np.ndarray = field(repr=False)
    sites: tuple
    local_dim: int

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def trace(self):
        return float(np.trace(self.matrix))


@dataclass(frozen=True, eq=False)
class EntropyValue:
    bits: float
    eigen_spectrum: np.ndarray = field(repr=False)


def _check_partition(partition, n):
    if sorted(partition.r_sites + partition.b_sites) != list(range(n)):
        raise ValueError('Partition %s / %s does not cover the %d sites exactly once'
                         % (list(partition.r_sites), list(partition.b_sites), n))


def partial_trace(state, partition, kind=None):
    """
    Trace out partition.b_sites of a pure state given in the full product basis
    """

    kind = state.kind if kind is None else kind
    if kind != state.kind:
        raise ValueError('State of kind %s cannot be traced as %s' % (state.kind, kind))
    n = state.num_sites
    _check_partition(partition, n)
    r_sites, b_sites = list(partition.r_sites), list(partition.b_sites)
    amplitudes = np.asarray(state.amplitudes, dtype=float)

    if kind == C.SPIN_HALF:
        local_dim = 2
        if amplitudes.size != 2 ** n:
            raise ValueError('Spin state of %d sites needs %d amplitudes, got %d' % (n, 2 ** n, amplitudes.size))
        # reversed order puts up (bit 1) at local index 0; axis k then holds site n-1-k
        tensor = amplitudes[::-1].reshape((2,) * n)
        axes = [n - 1 - s for s in r_sites + b_sites]
    elif kind == C.FERMION_SITE4:
        local_dim = 4
        if amplitudes.size != 4 ** n:
            raise ValueError('Fermion state of %d sites needs %d amplitudes, got %d' % (n, 4 ** n, amplitudes.size))
        # creation strings reordered to site order r_sites then b_sites, up before down on each site
        modes = [m for s in r_sites + b_sites for m in (s, n + s)]
        occupied = np.flatnonzero(amplitudes)
        amplitudes = amplitudes.copy()
        amplitudes[occupied] *= hilbert.fermion_reorder_sign(occupied, modes)
        tensor = amplitudes.reshape((2,) * (2 * n))
        # up mode of site s is axis 2n-1-s, down mode axis n-1-s; local index n_up + 2 n_dn
        axes = [a for s in r_sites + b_sites for a in (n - 1 - s, 2 * n - 1 - s)]
    else:
        raise ValueError('Unknown basis kind "%s"' % kind)

    M = tensor.transpose(axes).reshape(local_dim ** len(r_sites), local_dim ** len(b_sites))
    return ReducedDensityMatrix(M @ M.T, tuple(r_sites), local_dim)


def von_neumann_entropy(rho):
    """
    S = -tr(rho log2 rho) in bits
    """

    matrix = rho.matrix if isinstance(rho, ReducedDensityMatrix) else np.asarray(rho, dtype=float)
    trace = np.trace(matrix)
    if abs(trace - 1.0) > TRACE_TOL:
        raise ValueError('Reduced density matrix has trace %.12f, expected 1' % trace)
    p = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    if p.min() < -CLAMP_TOL:
        raise ValueError('Reduced density matrix has eigenvalue %.3e below -%.0e' % (p.min(), CLAMP_TOL))
    p = np.sort(np.clip(p, 0.0, 1.0))[::-1]
    return EntropyValue(bits=float(entropy(p, base=2)), eigen_spectrum=p)


def sublattice_entropy(ground, basis, partition):
    """
    Entropy of the R sublattice of a sector ground state; ground is a GroundState or a bare vector
    """

    vector = getattr(ground, 'vector', ground)
    return von_neumann_entropy(partial_trace(hilbert.embed_full(vector, basis), partition))
