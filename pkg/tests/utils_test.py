import numpy as np
from entroscope.utils import C
from entroscope.lattice import Bond, Lattice
from entroscope import hilbert, hamiltonian, eigensolver


def ring(n, label, name='ring'):
    return Lattice(n, 1, (n,), tuple(Bond(i, (i + 1) % n, label) for i in range(n)), name)


def pair(label, name='pair'):
    return Lattice(2, 1, (2,), (Bond(0, 1, label),), name)


def heisenberg(lattice, J=1.0):
    return hamiltonian.ModelSpec(C.CHECKERBOARD_2D, {C.J: J}, lattice)


def ground_state(spec, sector=None, dense=True):
    basis = hilbert.enumerate_sector(spec.basis_kind, spec.num_sites,
                                     spec.default_sector() if sector is None else sector)
    H = hamiltonian.build_hamiltonian(spec, basis)
    solve = eigensolver.dense_ground_state if dense else eigensolver.lanczos_lowest
    return basis, H, solve(H)


def random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def full_state(amplitudes, kind, num_sites):
    amplitudes = np.asarray(amplitudes, dtype=float)
    return hilbert.FullStateVector(amplitudes / np.linalg.norm(amplitudes), kind, num_sites)
