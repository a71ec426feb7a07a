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

Free-fermion treatment of the transverse-field Ising ring -sum_i (sx_i sx_{i+1} + lambda sz_i).

After the Jordan-Wigner transformation the even-parity ground state is a Gaussian state over the
antiperiodic momenta k = +-(2m-1) pi / N. Its Majorana covariance is generated by the kernel g(r),
and the entropy of any set of fermionic modes follows from the spectrum of the restricted covariance.
"""

from dataclasses import dataclass, field
import numpy as np
from scipy.linalg import eigh
from entroscope.utils import C, binary_entropy
from entroscope import hamiltonian, hilbert, eigensolver, entanglement
from entroscope.lattice import make_partition
from entroscope.entanglement import EntropyValue

MAX_SITES = 4096


@dataclass(frozen=True, eq=False)
class IsingGaussianState:
    num_sites: int
    lam: float
    momenta: np.ndarray = field(repr=False)
    g_values: np.ndarray = field(repr=False)

    def g(self, r):
        """
        Kernel at integer offsets r in (-N, N); antiperiodic, g(r - N) = -g(r)
        """

        r = np.asarray(r)
        return np.where(r >= 0, self.g_values[r % self.num_sites], -self.g_values[r % self.num_sites])


@dataclass(frozen=True, eq=False)
class RestrictedCovariance:
    sites: tuple
    matrix: np.ndarray = field(repr=False)


def antiperiodic_momenta(num_sites):
    m = np.arange(1, num_sites // 2 + 1)
    k = (2 * m - 1) * np.pi / num_sites
    return np.concatenate([-k[::-1], k])


def _check_size(num_sites):
    if int(num_sites) != num_sites or num_sites % 2 != 0 or not 4 <= num_sites <= MAX_SITES:
        raise ValueError('Gaussian Ising chain needs an even N with 4 <= N <= %d, got %s' % (MAX_SITES, num_sites))


def build_kernel(num_sites, lam):
    _check_size(num_sites)
    if not lam >= 0:
        raise ValueError('Transverse field must satisfy lambda >= 0, got %s' % lam)
    n = int(num_sites)
    k = antiperiodic_momenta(n)
    phase = (np.cos(k) - lam - 1j * np.sin(k)) / np.sqrt((np.cos(k) - lam) ** 2 + np.sin(k) ** 2)
    r = np.arange(n)
    g = np.exp(-1j * np.outer(r, k)) @ phase / n
    # +k and -k terms are complex conjugates
    return IsingGaussianState(n, float(lam), k, np.real(g))


def _check_sites(sites, n):
    sites = tuple(int(s) for s in sites)
    if len(set(sites)) != len(sites) or any(not 0 <= s < n for s in sites):
        raise ValueError('Sites must be distinct indices in [0, %d), got %s' % (n, sites))
    if len(sites) == 0 or len(sites) == n:
        raise ValueError('Subsystem must be a nonempty proper subset of the %d sites' % n)
    return sites


def restricted_covariance(state, sites):
    """
    Majorana covariance of the modes on sites, ordered (a_s, b_s) per site
    """

    sites = _check_sites(sites, state.num_sites)
    s = np.array(sites)
    offsets = s[:, None] - s[None, :]
    gamma = np.zeros((2 * len(s), 2 * len(s)))
    gamma[0::2, 1::2] = state.g(offsets)
    gamma[1::2, 0::2] = -state.g(-offsets)
    return RestrictedCovariance(sites, gamma)


def subsystem_entropy(state, sites):
    """
    Entropy in bits of the fermionic modes on sites.

    The eigen_spectrum of the result holds the mode occupation probabilities (1 + nu) / 2, sorted descending.
    """

    gamma = restricted_covariance(state, sites).matrix
    x = np.clip(eigh(1j * gamma, eigvals_only=True), -1.0, 1.0)
    p = (1.0 + x) / 2
    return EntropyValue(bits=float(0.5 * binary_entropy(p).sum()), eigen_spectrum=np.sort(p)[::-1])


def single_particle_energies(num_sites, lam):
    k = antiperiodic_momenta(num_sites)
    return 2 * np.sqrt(1 + lam ** 2 - 2 * lam * np.cos(k))


def ground_energy(num_sites, lam):
    """
    E0 = -1/2 sum over all antiperiodic k of eps_k
    """

    _check_size(num_sites)
    return float(-0.5 * single_particle_energies(num_sites, lam).sum())


def excitation_gap(num_sites, lam):
    """
    Lowest excitation within the even-parity sector: two quasi-particles
    """

    _check_size(num_sites)
    eps = np.sort(single_particle_energies(num_sites, lam))
    return float(eps[0] + eps[1])


def hopping_entropy(lattice, sites, t=1.0, n_particles=None):
    """
    Entropy of both spin species of a half-filled free hopping model on the given sites,
    from the single-particle correlation matrix. Requires a closed shell.
    """

    n = lattice.num_sites
    sites = _check_sites(sites, n)
    n_particles = n // 2 if n_particles is None else int(n_particles)
    h = np.zeros((n, n))
    for b in lattice.bonds:
        h[b.i, b.j] -= t
        h[b.j, b.i] -= t
    energies, orbitals = eigh(h)
    if 0 < n_particles < n and energies[n_particles] - energies[n_particles - 1] < 1e-10:
        raise ValueError('Open shell: %d particles leave a degenerate Fermi level at %.6f'
                         % (n_particles, energies[n_particles]))
    occupied = orbitals[:, :n_particles]
    correlation = occupied @ occupied.T
    nu = np.clip(np.linalg.eigvalsh(correlation[np.ix_(sites, sites)]), 0.0, 1.0)
    p = np.sort(np.concatenate([nu, nu]))[::-1]
    return EntropyValue(bits=float(2 * binary_entropy(nu).sum()), eigen_spectrum=p)


def jordan_wigner_discrepancy(num_sites, lam, sites):
    """
    Fermionic-mode entropy minus exact spin entropy of the same sites, in bits.
    Zero up to round-off for contiguous blocks, nonzero in general otherwise.
    """

    sites = _check_sites(sites, num_sites)
    spec = hamiltonian.make_model(C.ISING_CHAIN, num_sites, **{C.LAMBDA: lam})
    basis = hilbert.enumerate_sector(C.SPIN_HALF, num_sites, 'even')
    H = hamiltonian.build_ising_hamiltonian(spec, basis=basis)
    if basis.dimension <= eigensolver.DENSE_MAX_DIM:
        ground = eigensolver.dense_ground_state(H)
    else:
        ground = eigensolver.lanczos_lowest(H)
    partition = make_partition(spec.lattice, sites)
    spin_bits = entanglement.sublattice_entropy(ground, basis, partition).bits
    fermion_bits = subsystem_entropy(build_kernel(num_sites, lam), sites).bits
    return fermion_bits - spin_bits
