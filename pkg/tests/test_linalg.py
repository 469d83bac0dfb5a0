import numpy as np
import pytest

from src.error_handler import DomainError
from src.linalg import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Z,
    hermitian_eig,
    kron,
    partial_trace,
    psd_sqrt,
    sym3_inverse_det,
)


def random_hermitian(rng: np.random.Generator, n: int = 4) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2


def test_identity_spectrum() -> None:
    eigenvalues, vectors = hermitian_eig(np.eye(4))
    np.testing.assert_allclose(eigenvalues, np.ones(4), atol=1e-14)
    np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(4), atol=1e-12)


def test_diagonal_matrix_keeps_standard_basis() -> None:
    values = np.array([0.4, 0.1, 0.3, 0.2])
    eigenvalues, vectors = hermitian_eig(np.diag(values))
    np.testing.assert_allclose(eigenvalues, np.sort(values), atol=1e-14)
    np.testing.assert_allclose(np.abs(vectors), np.eye(4)[:, np.argsort(values)])


def test_random_hermitian_spectra(rng: np.random.Generator) -> None:
    for _ in range(1000):
        m = random_hermitian(rng)
        system = hermitian_eig(m)
        eigenvalues, vectors = system
        assert np.all(np.diff(eigenvalues) >= 0)
        reconstruction = np.max(np.abs(system.reconstruct() - m))
        assert reconstruction <= 1e-10, {"reconstruction": reconstruction}
        assert np.max(system.residuals(m)) <= 1e-10
        gram = vectors.conj().T @ vectors
        assert np.max(np.abs(gram - np.eye(4))) <= 1e-10
        assert abs(eigenvalues.sum() - np.trace(m).real) <= 1e-10
        assert abs(np.prod(eigenvalues) - np.linalg.det(m).real) <= 1e-10 * max(
            1.0, abs(np.prod(eigenvalues))
        )


def test_degenerate_cluster_is_orthonormal() -> None:
    # XX + ZZ has a doubly degenerate zero eigenvalue
    m = kron(SIGMA_Z, SIGMA_Z) + kron(SIGMA_X, SIGMA_X)
    eigenvalues, vectors = hermitian_eig(m)
    gram = vectors.conj().T @ vectors
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(eigenvalues, [-2, 0, 0, 2], atol=1e-12)


def test_non_hermitian_input_names_element() -> None:
    m = np.eye(4, dtype=complex)
    m[1, 3] = 1e-6
    with pytest.raises(DomainError, match=r"M\[1,3\]|M\[3,1\]"):
        hermitian_eig(m)


def test_dimension_above_four_rejected() -> None:
    with pytest.raises(DomainError):
        hermitian_eig(np.eye(5))


@pytest.mark.parametrize(
    "q, det, inverse",
    [
        (np.eye(3), 1.0, np.eye(3)),
        (4 * np.eye(3), 64.0, np.eye(3) / 4),
    ],
)
def test_sym3_inverse_det(q: np.ndarray, det: float, inverse: np.ndarray) -> None:
    result = sym3_inverse_det(q)
    assert not result.singular
    assert result.det == pytest.approx(det)
    np.testing.assert_allclose(result.inverse, inverse, atol=1e-15)


def test_rank_deficient_is_singular() -> None:
    result = sym3_inverse_det(np.diag([1.0, 1.0, 0.0]))
    assert result.singular
    assert result.inverse is None


def test_sym3_round_trip(rng: np.random.Generator) -> None:
    for _ in range(1000):
        a = rng.standard_normal((3, 3))
        q = a @ a.T + 0.1 * np.eye(3)
        result = sym3_inverse_det(q)
        assert not result.singular
        np.testing.assert_allclose(q @ result.inverse, np.eye(3), atol=1e-9)
        inverse_det = sym3_inverse_det(result.inverse).det
        assert abs(inverse_det * result.det - 1) <= 1e-8


def test_psd_sqrt_squares_back(rng: np.random.Generator) -> None:
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = z @ z.conj().T
    root = psd_sqrt(m)
    np.testing.assert_allclose(root @ root, m, atol=1e-10)


def test_psd_sqrt_rejects_negative() -> None:
    with pytest.raises(DomainError):
        psd_sqrt(np.diag([1.0, -1.0, 0.0, 0.0]))


def test_partial_trace_of_product() -> None:
    first = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
    second = np.array([[0.5, 0.5], [0.5, 0.5]])
    rho = kron(first, second)
    np.testing.assert_allclose(partial_trace(rho, keep=0), first, atol=1e-15)
    np.testing.assert_allclose(partial_trace(rho, keep=1), second, atol=1e-15)
    maximally_mixed = kron(IDENTITY_2, IDENTITY_2) / 4
    np.testing.assert_allclose(partial_trace(maximally_mixed, 0), IDENTITY_2 / 2)
