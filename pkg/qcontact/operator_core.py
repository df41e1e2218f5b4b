""" Dense operator algebra: tensor products, partial traces, matrix functions and superoperators

Conventions
-----------
- Operators are dense complex ``numpy.ndarray`` of shape (d, d).
- Tensor products follow ``numpy.kron``: the left factor is the slower index, so for a bipartite operator
  ``m.reshape(d_left, d_right, d_left, d_right)`` exposes (i_left, i_right, j_left, j_right).
- Vectorization stacks rows (``vec(X)[i * d + j] = X[i, j]``, numpy's native ``reshape``). Under this convention
  vec(A X B) = (A kron B^T) vec(X), hence X -> -i[H, X] has the matrix -i (H kron I - I kron H^T).
"""
import logging
from itertools import product
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import linalg

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-12
SPECTRUM_TOL = 1e-10
CHANNEL_TOL = 1e-10
BRANCH_TOL = 1e-10
NORMALITY_TOL = 1e-12

__all__ = ('HermitianOperator', 'DensityMatrix', 'Superoperator', 'BranchCutError', 'DimensionError',
           'tensor_product', 'partial_trace', 'matrix_exponential', 'principal_matrix_logarithm',
           'superoperator_from_action', 'commutator', 'dagger', 'max_norm', 'allclose_max', 'is_hermitian',
           'vectorize', 'unvectorize', 'trace_distance', 'swap_operator', 'pauli', 'random_hermitian',
           'random_density_matrix', 'random_unitary')


class BranchCutError(ValueError):
    """ principal matrix logarithm undefined: eigenvalue at zero or on the closed negative real axis """


class DimensionError(ValueError):
    """ operator dimensions do not match """


def dagger(m: np.ndarray):
    return np.conj(np.transpose(m))


def max_norm(m: np.ndarray):
    """ entrywise maximum modulus """
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m)))


def allclose_max(a: np.ndarray, b: np.ndarray, atol: float = SPECTRUM_TOL):
    """ elementwise equality within an absolute tolerance """
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    return max_norm(a - b) <= atol


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL):
    return max_norm(m - dagger(m)) <= tol


def _as_square(m, name: str = 'matrix'):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError('{} should be square, got shape {}'.format(name, m.shape))
    return m


def commutator(a: np.ndarray, b: np.ndarray):
    return a @ b - b @ a


def tensor_product(a: np.ndarray, b: np.ndarray):
    """ Kronecker product, left factor is the slower index """
    return np.kron(_as_square(a, 'left factor'), _as_square(b, 'right factor'))


def partial_trace(m: np.ndarray, dims: Tuple[int, int], keep: str = 'left'):
    """ Reduced operator of a bipartite operator

     Parameter
    -----------
    m: (d_left * d_right, d_left * d_right) array
    dims: (d_left, d_right)
    keep: str
        'left' traces out the right factor, 'right' traces out the left factor
    """
    m = _as_square(m)
    d_left, d_right = dims
    if m.shape[0] != d_left * d_right:
        raise DimensionError('operator of dimension {} can not be split into {} x {}'.format(
            m.shape[0], d_left, d_right))
    blocks = m.reshape(d_left, d_right, d_left, d_right)
    if keep == 'left':
        return np.einsum('ijkj->ik', blocks)
    elif keep == 'right':
        return np.einsum('ijil->jl', blocks)
    raise ValueError('unknown subsystem to keep: {}'.format(keep))


def _is_normal(m: np.ndarray):
    scale = max(max_norm(m), 1.0) ** 2
    return max_norm(m @ dagger(m) - dagger(m) @ m) <= NORMALITY_TOL * scale


def matrix_exponential(m: np.ndarray):
    """ exp(m): unitary diagonalization for normal input, scaling-and-squaring (scipy) otherwise """
    m = _as_square(m)
    if is_hermitian(m, tol=0.0):
        energies, vectors = np.linalg.eigh(m)
        return (vectors * np.exp(energies)) @ dagger(vectors)
    if _is_normal(m):
        # complex Schur form of a normal matrix is diagonal
        t, z = linalg.schur(m, output='complex')
        return (z * np.exp(np.diag(t))) @ dagger(z)
    return linalg.expm(m)


def principal_matrix_logarithm(m: np.ndarray, tol: float = BRANCH_TOL):
    """ Principal branch Log(m), eigenvalue arguments in (-pi, pi)

    Raise BranchCutError if an eigenvalue lies within `tol` of zero or of the closed negative real axis.
    """
    m = _as_square(m)
    eigenvalues = np.linalg.eigvals(m)
    singular = np.abs(eigenvalues) <= tol
    on_cut = (np.real(eigenvalues) < 0) & (np.abs(np.imag(eigenvalues)) <= tol)
    if np.any(singular) or np.any(on_cut):
        bad = eigenvalues[singular | on_cut]
        raise BranchCutError('principal logarithm undefined, eigenvalues on the branch cut: {}'.format(bad))
    return np.asarray(linalg.logm(m), dtype=complex)


def vectorize(x: np.ndarray):
    """ row stacking """
    return np.asarray(x, dtype=complex).reshape(-1)


def unvectorize(v: np.ndarray, dim: int = None):
    v = np.asarray(v, dtype=complex).reshape(-1)
    dim = int(round(np.sqrt(v.size))) if dim is None else dim
    if dim * dim != v.size:
        raise DimensionError('vector of length {} is not a vectorized {}x{} operator'.format(v.size, dim, dim))
    return v.reshape(dim, dim)


def matrix_unit(dim: int, i: int, j: int):
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e


def trace_distance(rho: np.ndarray, sigma: np.ndarray):
    """ half the trace norm of the difference """
    rho = rho.matrix if isinstance(rho, DensityMatrix) else rho
    sigma = sigma.matrix if isinstance(sigma, DensityMatrix) else sigma
    diff = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((diff + dagger(diff)) / 2))))


class HermitianOperator:
    """ Hermitian matrix with a cached ascending spectrum """

    def __init__(self, matrix, tol: float = HERMITIAN_TOL):
        matrix = _as_square(matrix, 'hermitian operator')
        deviation = max_norm(matrix - dagger(matrix))
        if deviation > tol:
            raise ValueError('operator is not hermitian: |M - M^dag|_max = {}'.format(deviation))
        self.matrix = (matrix + dagger(matrix)) / 2
        self.matrix.setflags(write=False)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(self.matrix)
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def reconstruct(self):
        """ sum_n E_n |n><n| """
        return (self.eigenvectors * self.eigenvalues) @ dagger(self.eigenvectors)

    def spectral_norm(self):
        return float(np.max(np.abs(self.eigenvalues)))

    def scaled(self, factor: float):
        return HermitianOperator(self.matrix * factor)

    def __truediv__(self, factor: float):
        return self.scaled(1.0 / factor)

    def __add__(self, other):
        return HermitianOperator(self.matrix + _matrix_of(other))

    def __repr__(self):
        return 'HermitianOperator(dim={}, spectrum={})'.format(self.dim, np.round(self.eigenvalues, 6).tolist())


class DensityMatrix:
    """ Positive semi-definite unit-trace operator """

    def __init__(self, matrix, tol: float = POSITIVITY_TOL):
        """ Positive semi-definite unit-trace operator

         Parameter
        -----------
        matrix: (d, d) array
        tol: float
            tolerance on hermiticity, trace and the minimum eigenvalue
        """
        matrix = _as_square(matrix, 'density matrix')
        deviation = max_norm(matrix - dagger(matrix))
        if deviation > tol:
            raise ValueError('density matrix is not hermitian: |M - M^dag|_max = {}'.format(deviation))
        matrix = (matrix + dagger(matrix)) / 2
        trace = np.real(np.trace(matrix))
        if abs(trace - 1) > max(tol, TRACE_TOL):
            raise ValueError('density matrix trace {} differs from one'.format(trace))
        self.populations = np.linalg.eigvalsh(matrix)
        if self.populations[0] < -tol:
            raise ValueError('density matrix has negative eigenvalue {}'.format(self.populations[0]))
        self.matrix = matrix
        self.matrix.setflags(write=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int):
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def pure(cls, vector):
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        vector = vector / np.linalg.norm(vector)
        return cls(np.outer(vector, np.conj(vector)))

    def expectation(self, observable):
        return float(np.real(np.trace(_matrix_of(observable) @ self.matrix)))

    def __repr__(self):
        return 'DensityMatrix(dim={}, populations={})'.format(self.dim, np.round(self.populations, 6).tolist())


def _matrix_of(x):
    if isinstance(x, (HermitianOperator, DensityMatrix)):
        return x.matrix
    return np.asarray(x, dtype=complex)


class Superoperator:
    """ Linear map on d x d operators stored as a d^2 x d^2 matrix acting on row-stacked vectors """

    def __init__(self, matrix, dim: int = None):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError('superoperator matrix should be square, got {}'.format(matrix.shape))
        dim = int(round(np.sqrt(matrix.shape[0]))) if dim is None else dim
        if dim * dim != matrix.shape[0]:
            raise DimensionError('superoperator of size {} does not act on {}x{} operators'.format(
                matrix.shape[0], dim, dim))
        self.dim = dim
        self.matrix = matrix

    @classmethod
    def identity(cls, dim: int):
        return cls(np.eye(dim * dim, dtype=complex), dim)

    @classmethod
    def zeros(cls, dim: int):
        return cls(np.zeros((dim * dim, dim * dim), dtype=complex), dim)

    @classmethod
    def commutator_generator(cls, hamiltonian):
        """ X -> -i[H, X] """
        h = _matrix_of(hamiltonian)
        eye = np.eye(h.shape[0])
        return cls(-1j * (np.kron(h, eye) - np.kron(eye, h.T)), h.shape[0])

    @classmethod
    def conjugation(cls, unitary):
        """ X -> U X U^dag """
        u = _as_square(unitary)
        return cls(np.kron(u, np.conj(u)), u.shape[0])

    def apply(self, x):
        x = _matrix_of(x)
        if x.shape != (self.dim, self.dim):
            raise DimensionError('superoperator acts on {0}x{0} operators, got {1}'.format(self.dim, x.shape))
        return unvectorize(self.matrix @ vectorize(x), self.dim)

    def __call__(self, x):
        return self.apply(x)

    def _check(self, other):
        if not isinstance(other, Superoperator):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError('superoperators act on different dimensions: {} vs {}'.format(self.dim, other.dim))
        return other

    def __matmul__(self, other):
        """ composition: (A @ B)[X] = A[B[X]] """
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Superoperator(self.matrix @ other.matrix, self.dim)

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Superoperator(self.matrix + other.matrix, self.dim)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Superoperator(self.matrix - other.matrix, self.dim)

    def __mul__(self, scalar):
        return Superoperator(self.matrix * scalar, self.dim)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Superoperator(self.matrix / scalar, self.dim)

    def __neg__(self):
        return Superoperator(-self.matrix, self.dim)

    def power(self, n: int):
        return Superoperator(np.linalg.matrix_power(self.matrix, n), self.dim)

    def distance(self, other):
        """ max-norm distance between matrices """
        return max_norm(self.matrix - self._check(other).matrix)

    def choi(self):
        """ Choi matrix sum_ij |i><j| kron Phi(|i><j|) """
        d = self.dim
        # matrix[(a, b), (c, e)] maps X[c, e] to Y[a, b]; Choi[(c, a), (e, b)]
        return self.matrix.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)

    def trace_functional(self):
        """ row vector t with t . vec(X) = Tr(X) """
        return vectorize(np.eye(self.dim))

    def trace_defect(self):
        """ max |Tr(Phi[E_ij]) - Tr(E_ij)| over matrix units """
        t = self.trace_functional()
        return max_norm(t @ self.matrix - t)

    def is_trace_preserving(self, tol: float = CHANNEL_TOL):
        return self.trace_defect() <= tol

    def is_trace_annihilating(self, tol: float = CHANNEL_TOL):
        """ generator condition Tr(L[X]) = 0 """
        return max_norm(self.trace_functional() @ self.matrix) <= tol

    def is_completely_positive(self, tol: float = CHANNEL_TOL):
        choi = self.choi()
        return float(np.min(np.linalg.eigvalsh((choi + dagger(choi)) / 2))) >= -tol

    def eigenvalues(self):
        return np.linalg.eigvals(self.matrix)

    def __repr__(self):
        return 'Superoperator(dim={})'.format(self.dim)


def superoperator_from_action(action: Callable, dim: int):
    """ Materialize a linear map on d x d operators by its action on the d^2 matrix units

     Parameter
    -----------
    action: callable
        linear function taking and returning (dim, dim) arrays (linearity is the caller's contract)
    dim: int
        operator dimension
    """
    matrix = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i, j in product(range(dim), range(dim)):
        image = np.asarray(action(matrix_unit(dim, i, j)), dtype=complex)
        if image.shape != (dim, dim):
            raise DimensionError('action maps {0}x{0} operators to shape {1}'.format(dim, image.shape))
        matrix[:, i * dim + j] = vectorize(image)
    logging.debug('materialized superoperator on dimension {}'.format(dim))
    return Superoperator(matrix, dim)


def swap_operator(dim: int):
    """ SWAP on C^dim kron C^dim """
    swap = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i, j in product(range(dim), range(dim)):
        swap[j * dim + i, i * dim + j] = 1.0
    return swap


def pauli(label: str):
    """ 'i', 'x', 'y' or 'z' """
    table = {
        'i': np.eye(2, dtype=complex),
        'x': np.array([[0, 1], [1, 0]], dtype=complex),
        'y': np.array([[0, -1j], [1j, 0]], dtype=complex),
        'z': np.array([[1, 0], [0, -1]], dtype=complex)}
    return table[label.lower()]


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0):
    """ GUE-like hermitian matrix rescaled to spectral norm `scale` """
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + dagger(a)) / 2
    return HermitianOperator(h * scale / np.max(np.abs(np.linalg.eigvalsh(h))))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int = None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return DensityMatrix(rho / np.real(np.trace(rho)))


def random_unitary(dim: int, rng: np.random.Generator):
    """ Haar unitary via QR with phase correction """
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def nested_commutator(operators: Sequence[np.ndarray], x: np.ndarray):
    """ [A_1, [A_2, ... [A_n, X]]] with operators given outermost first """
    out = np.asarray(x, dtype=complex)
    for a in reversed(operators):
        out = commutator(a, out)
    return out
