import pytest
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh
import utils_test
from entroscope.utils import C, ConvergenceError, SolverError
from entroscope.hilbert import enumerate_sector
from entroscope import hamiltonian
from entroscope.eigensolver import SolverOptions, lanczos_lowest, dense_lowest, dense_ground_state


def heisenberg_ring(n, sector):
    spec = utils_test.heisenberg(utils_test.ring(n, C.J))
    return hamiltonian.build_spin_hamiltonian(spec, enumerate_sector(C.SPIN_HALF, n, sector))


def test_diagonal_matrix():
    ground = lanczos_lowest(np.diag([3.0, 1.0, 2.0]))
    assert abs(ground.energy - 1.0) <= 1e-12
    assert abs(ground.gap - 1.0) <= 1e-12
    assert abs(abs(ground.vector[1]) - 1.0) <= 1e-12
    assert not ground.degenerate_flag


def test_start_vector_is_eigenvector():
    # the all-ones start is the excited state; the Krylov breakdown must not stop the search
    ground = lanczos_lowest(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert abs(ground.energy + 1.0) <= 1e-12
    assert abs(ground.gap - 2.0) <= 1e-12
    assert abs(ground.vector[0] + ground.vector[1]) <= 1e-12


@pytest.mark.parametrize('seed', range(3))
def test_random_matrix_against_dense(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((50, 50))
    A = (A + A.T) / 2
    ground = lanczos_lowest(A)
    values = dense_lowest(A)[0]
    assert abs(ground.energy - values[0]) <= 1e-10
    assert abs(ground.gap - (values[1] - values[0])) <= 1e-8
    assert abs(np.linalg.norm(ground.vector) - 1) <= 1e-12


def test_rayleigh_bound():
    rng = np.random.default_rng(3)
    H = heisenberg_ring(10, 0)
    ground = lanczos_lowest(H)
    for _ in range(10):
        v = utils_test.random_unit(rng, H.shape[0])
        assert ground.energy <= hamiltonian.expectation(H, v) + 1e-12


def test_residual_is_honest():
    spec = hamiltonian.make_model(C.J1J2_2D, 4, J2=0.5)
    H = hamiltonian.build_spin_hamiltonian(spec, enumerate_sector(C.SPIN_HALF, 16, 0))
    ground = lanczos_lowest(H)
    residual = np.linalg.norm(H @ ground.vector - ground.energy * ground.vector)
    assert residual <= SolverOptions().residual_tol
    assert abs(residual - ground.residual) <= 1e-10
    assert ground.iterations >= 2


def test_spin_flip_sectors_agree():
    up = lanczos_lowest(heisenberg_ring(8, 2))
    down = lanczos_lowest(heisenberg_ring(8, -2))
    assert abs(up.energy - down.energy) <= 1e-10
    assert abs(up.energy - dense_lowest(heisenberg_ring(8, 2), k=1)[0][0]) <= 1e-10


def test_heisenberg_ring_ground_energy():
    # 8-site ring, E0 = -3.651093408937
    ground = lanczos_lowest(heisenberg_ring(8, 0))
    assert abs(ground.energy + 3.651093408937) <= 1e-9


def test_degenerate_ground_state():
    H = np.diag([0.0, 0.0, 1.0, 2.0])
    ground = lanczos_lowest(H)
    assert abs(ground.energy) <= 1e-12
    assert ground.degenerate_flag
    assert dense_ground_state(H).degenerate_flag


def test_dense_ground_state_matches_lanczos():
    H = heisenberg_ring(10, 0)
    dense, krylov = dense_ground_state(H), lanczos_lowest(H)
    assert abs(dense.energy - krylov.energy) <= 1e-10
    assert abs(dense.gap - krylov.gap) <= 1e-8
    assert abs(abs(dense.vector @ krylov.vector) - 1) <= 1e-8
    assert dense.residual <= 1e-10


def test_square_cluster_against_arpack():
    # 4x4 Heisenberg antiferromagnet, E0 = -11.228483208
    spec = hamiltonian.make_model(C.J1J2_2D, 4)
    H = hamiltonian.build_hamiltonian(spec, enumerate_sector(C.SPIN_HALF, 16, 0))
    assert H.shape == (12870, 12870)
    ground = lanczos_lowest(H)
    reference = np.sort(eigsh(H, k=2, which='SA', return_eigenvectors=False))
    assert abs(ground.energy - reference[0]) <= 1e-8
    assert abs(ground.energies[1] - reference[1]) <= 1e-6
    assert abs(ground.energy + 11.228483208) <= 1e-6
    assert ground.residual <= 1e-9


def test_lowest_k():
    values = np.arange(10, dtype=float)[::-1]
    ground = lanczos_lowest(np.diag(values), k=4)
    assert np.allclose(ground.energies, [0, 1, 2, 3], rtol=0, atol=1e-10)


def test_convergence_failure():
    spec = hamiltonian.make_model(C.J1J2_2D, 4, J2=0.5)
    H = hamiltonian.build_spin_hamiltonian(spec, enumerate_sector(C.SPIN_HALF, 16, 0))
    with pytest.raises(ConvergenceError) as e:
        lanczos_lowest(H, opts=SolverOptions(max_iter=5))
    assert isinstance(e.value, SolverError)
    assert e.value.residual > SolverOptions().residual_tol


def test_random_start_is_reproducible():
    opts = SolverOptions(start='random', seed=7)
    H = heisenberg_ring(8, 0)
    a, b = lanczos_lowest(H, opts=opts), lanczos_lowest(H, opts=opts)
    assert a.energy == b.energy
    assert np.array_equal(a.vector, b.vector)


def test_verbose(capsys):
    lanczos_lowest(heisenberg_ring(6, 0), verbose=True)
    out = capsys.readouterr().out
    assert 'Eigenpair 0' in out and 'Eigenpair 1' in out


def test_invalid_input():
    with pytest.raises(ValueError, match='dimension'):
        lanczos_lowest(np.ones((1, 1)))
    with pytest.raises(ValueError, match='square'):
        lanczos_lowest(np.ones((3, 2)))
    with pytest.raises(ValueError):
        SolverOptions(max_iter=0)
    with pytest.raises(ValueError):
        SolverOptions(residual_tol=0.0)
    with pytest.raises(ValueError, match='not supported'):
        SolverOptions(start='zeros')
    with pytest.raises(ValueError, match='limited'):
        dense_lowest(sp.identity(5000, format='csr'))
