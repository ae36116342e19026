"""Gaussian-state machinery: covariance matrices, entanglement measures and
steady states of linear quantum Langevin equations.

Ordering is (x1, p1, x2, p2, ...) and the vacuum covariance is I/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .errors import NonPhysicalCovariance, OptomechError, ParameterError, UnstableSystem
from .params import SystemParams

PHYSICALITY_TOL = 1e-10
LYAPUNOV_RESIDUAL_TOL = 1e-10
STABILITY_FACTOR = 1e-6


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _matrix(V) -> np.ndarray:
    if isinstance(V, CovarianceMatrix):
        return V.matrix
    return np.asarray(V, dtype=float)


def min_uncertainty_eigenvalue(V) -> float:
    """Smallest eigenvalue of V + (i/2) Omega; non-negative for quantum states."""
    V = _matrix(V)
    n = V.shape[0] // 2
    return float(np.linalg.eigvalsh(V + 0.5j * symplectic_form(n))[0])


def is_physical(V, tol: float = PHYSICALITY_TOL) -> bool:
    """Uncertainty relation up to ``tol`` times max(1, largest |entry|)."""
    scale = max(1.0, float(np.max(np.abs(_matrix(V)))))
    return min_uncertainty_eigenvalue(V) >= -tol * scale


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Real symmetric 2N x 2N matrix of symmetrized quadrature moments."""

    matrix: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        V = np.array(self.matrix, dtype=float, copy=True)
        if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
            raise ParameterError(f"covariance must be 2N x 2N, got shape {V.shape}")
        scale = max(1.0, float(np.max(np.abs(V))))
        if np.max(np.abs(V - V.T)) >= 1e-12 * scale:
            raise NonPhysicalCovariance("covariance matrix is not symmetric")
        V = 0.5 * (V + V.T)
        if not is_physical(V):
            raise NonPhysicalCovariance(
                f"V + i Omega/2 has eigenvalue {min_uncertainty_eigenvalue(V):.3e} < 0"
            )
        V.setflags(write=False)
        object.__setattr__(self, "matrix", V)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        return self.matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def reduced(self, modes) -> "CovarianceMatrix":
        idx = [k for m in modes for k in (2 * m, 2 * m + 1)]
        labels = tuple(self.labels[m] for m in modes) if self.labels else ()
        return CovarianceMatrix(self.matrix[np.ix_(idx, idx)], labels)


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic spectrum (one value per mode, ascending)."""
    V = _matrix(V)
    n = V.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ V))
    return np.sort(ev)[::2]


def partial_transpose(V, mode: int = 1) -> np.ndarray:
    """Flip the sign of the momentum of ``mode`` (time reversal on that subsystem)."""
    V = np.array(_matrix(V), dtype=float)
    k = 2 * mode + 1
    V[k, :] *= -1
    V[:, k] *= -1
    return V


def _two_mode(V) -> np.ndarray:
    if isinstance(V, CovarianceMatrix):
        M = V.matrix
    else:
        M = CovarianceMatrix(V).matrix
    if M.shape != (4, 4):
        raise ParameterError("two-mode covariance matrix required")
    return M


def sigma_invariant(V) -> float:
    """Sigma(V) = det V_a + det V_b - 2 det C for the block form [[V_a, C], [C^T, V_b]]."""
    M = _matrix(V)
    return float(
        np.linalg.det(M[:2, :2]) + np.linalg.det(M[2:, 2:]) - 2.0 * np.linalg.det(M[:2, 2:])
    )


def smallest_pt_eigenvalue(V) -> float:
    """eta^- from Sigma and det V."""
    M = _two_mode(V)
    sigma = sigma_invariant(M)
    det = float(np.linalg.det(M))
    disc = max(sigma * sigma - 4.0 * det, 0.0)
    return float(np.sqrt(max(sigma - np.sqrt(disc), 0.0) / 2.0))


def log_negativity(V) -> float:
    """Logarithmic negativity max(0, -ln 2 eta^-) of a two-mode state (nats)."""
    eta = smallest_pt_eigenvalue(V)
    if eta <= 0:
        return float("inf")
    return max(0.0, -float(np.log(2.0 * eta)))


def simon_ppt_entangled(V) -> bool:
    """Simon's PPT test: entangled iff 4 det V < Sigma(V) - 1/4.

    Product states with one vacuum factor sit exactly on the boundary, so
    the gap must exceed roundoff (relative to Sigma) to count.
    """
    M = _two_mode(V)
    sig = sigma_invariant(M)
    gap = sig - 0.25 - 4.0 * np.linalg.det(M)
    return bool(gap > 1e-12 * max(1.0, abs(sig)))


# ---------------------------------------------------------------- states


def vacuum(n_modes: int = 1) -> np.ndarray:
    return 0.5 * np.eye(2 * n_modes)


def thermal_covariance(occupations) -> np.ndarray:
    occ = np.atleast_1d(np.asarray(occupations, dtype=float))
    return np.diag(np.repeat(occ + 0.5, 2))


def two_mode_squeezed_vacuum(s: float) -> np.ndarray:
    c, sh = 0.5 * np.cosh(2 * s), 0.5 * np.sinh(2 * s)
    Z = np.diag([1.0, -1.0])
    return np.block([[c * np.eye(2), sh * Z], [sh * Z, c * np.eye(2)]])


def _xxpp_to_xpxp(n):
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n) + n
    return perm


def orthogonal_symplectic(U: np.ndarray) -> np.ndarray:
    """Passive symplectic matrix for the unitary U acting on mode operators."""
    n = U.shape[0]
    O = np.block([[U.real, -U.imag], [U.imag, U.real]])
    perm = _xxpp_to_xpxp(n)
    return O[np.ix_(perm, perm)]


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_symplectic(n: int, rng: np.random.Generator, max_squeezing: float = 1.5) -> np.ndarray:
    """Random symplectic matrix via the Euler decomposition O1 Z(r) O2."""
    r = rng.uniform(-max_squeezing, max_squeezing, size=n)
    Z = np.diag(np.ravel(np.column_stack([np.exp(r), np.exp(-r)])))
    return orthogonal_symplectic(random_unitary(n, rng)) @ Z @ orthogonal_symplectic(random_unitary(n, rng))


def random_local_symplectic(rng: np.random.Generator, max_squeezing: float = 1.5) -> np.ndarray:
    return np.kron(np.diag([1.0, 0.0]), random_symplectic(1, rng, max_squeezing)) + np.kron(
        np.diag([0.0, 1.0]), random_symplectic(1, rng, max_squeezing)
    )


def random_physical_covariance(
    n_modes: int, rng: np.random.Generator, max_occupation: float = 2.0, max_squeezing: float = 1.5
) -> np.ndarray:
    """S V_thermal S^T with random thermal occupations and random symplectic S."""
    S = random_symplectic(n_modes, rng, max_squeezing)
    V = S @ thermal_covariance(rng.uniform(0.0, max_occupation, size=n_modes)) @ S.T
    return 0.5 * (V + V.T)


# ----------------------------------------------------------- dynamics


@dataclass(frozen=True, eq=False)
class DriftDiffusion:
    """dV/dt = A V + V A^T + D for the linearized fluctuations."""

    drift: np.ndarray
    diffusion: np.ndarray

    def __post_init__(self):
        A = np.array(self.drift, dtype=float)
        D = np.array(self.diffusion, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ParameterError("drift must be square")
        if D.shape != A.shape:
            raise ParameterError("diffusion must match drift dimension")
        if np.max(np.abs(D - D.T), initial=0.0) >= 1e-12 * max(1.0, np.max(np.abs(D))):
            raise ParameterError("diffusion must be symmetric")
        A.setflags(write=False)
        D = 0.5 * (D + D.T)
        D.setflags(write=False)
        object.__setattr__(self, "drift", A)
        object.__setattr__(self, "diffusion", D)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.drift)


def noise_input_matrix(p: SystemParams) -> np.ndarray:
    """Input matrix B (4 x 3) for unit-variance white noises (xi, X_in, Y_in).

    With symmetrized noise correlations I/2 the diffusion is B B^T / 2.
    """
    kappa = p.cavity_decay
    B = np.zeros((4, 3))
    B[1, 0] = np.sqrt(2.0 * p.mech_damping * (2.0 * p.n_th + 1.0))
    B[2, 1] = np.sqrt(2.0 * kappa)
    B[3, 2] = np.sqrt(2.0 * kappa)
    return B


def drift_matrix(p: SystemParams) -> np.ndarray:
    """Drift for (x_m, p_m, X_c, Y_c) of the linearized Langevin equations."""
    Om, Gam, kap, Del = p.mech_freq, p.mech_damping, p.cavity_decay, p.detuning
    g = p.linearized_coupling
    return np.array(
        [
            [0.0, Om, 0.0, 0.0],
            [-Om, -Gam, g, 0.0],
            [0.0, 0.0, -kap, Del],
            [g, 0.0, -Del, -kap],
        ]
    )


def build_drift_diffusion(p: SystemParams) -> DriftDiffusion:
    B = noise_input_matrix(p)
    return DriftDiffusion(drift_matrix(p), 0.5 * B @ B.T)


def stability_epsilon(A) -> float:
    return STABILITY_FACTOR * float(np.max(np.abs(A)))


def is_stable(A) -> bool:
    A = np.asarray(A, dtype=float)
    return bool(np.max(np.linalg.eigvals(A).real) < -stability_epsilon(A))


def check_stable(A) -> None:
    A = np.asarray(A, dtype=float)
    lam = float(np.max(np.linalg.eigvals(A).real))
    eps = stability_epsilon(A)
    if not lam < -eps:
        raise UnstableSystem(
            f"drift has eigenvalue with Re = {lam:.4e} >= -eps_stab = {-eps:.4e}", lam
        )


def lyapunov_residual(A, V, D) -> float:
    R = A @ V + V @ A.T + D
    nd = np.linalg.norm(D)
    return float(np.linalg.norm(R) / nd) if nd > 0 else float(np.linalg.norm(R))


def solve_lyapunov(A, D) -> np.ndarray:
    """Solve A V + V A^T = -D with one step of iterative refinement."""
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    check_stable(A)
    V = solve_continuous_lyapunov(A, -D)
    V = 0.5 * (V + V.T)
    R = A @ V + V @ A.T + D
    if np.linalg.norm(R) > 0:
        dV = solve_continuous_lyapunov(A, -R)
        V = V + 0.5 * (dV + dV.T)
    if lyapunov_residual(A, V, D) >= LYAPUNOV_RESIDUAL_TOL:
        raise OptomechError(
            f"Lyapunov residual {lyapunov_residual(A, V, D):.2e} exceeds {LYAPUNOV_RESIDUAL_TOL}"
        )
    return V


def steady_state_covariance(dd: DriftDiffusion) -> CovarianceMatrix:
    return CovarianceMatrix(solve_lyapunov(dd.drift, dd.diffusion))


def intracavity_entanglement_bound(g: float, kappa: float, gamma_m: float, n_th: float) -> float:
    """ln[(1 + g/sqrt(2 kappa Gamma_M)) / (1 + n_th)] clamped at zero.

    Blue-detuned (Delta = -Omega_M) operation is stable only for
    g < sqrt(2 kappa Gamma_M), which caps the bound at ln 2 for n_th = 0.
    """
    if g < 0 or kappa <= 0 or gamma_m <= 0 or n_th < 0:
        raise ParameterError("bound requires g >= 0, kappa > 0, Gamma_M > 0, n_th >= 0")
    return max(0.0, float(np.log((1.0 + g / np.sqrt(2.0 * kappa * gamma_m)) / (1.0 + n_th))))
