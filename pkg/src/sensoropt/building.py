"""Shear-building structural model and its closed-form dynamic response.

The model is a lumped-mass chain with normalized mass/stiffness pattern
matrices.  Under classical (Rayleigh) damping and sinusoidal ground
acceleration every mode behaves as an independent driven, damped
oscillator, so the displacement response and its derivatives with respect
to the uncertain system parameters are available in closed form.

Uncertain parameters, in fixed order:

==========  =====================================================
name        meaning
==========  =====================================================
``omega0``  nominal natural-frequency scale, rad/s
``alpha``   mass-proportional damping coefficient, 1/s
``beta``    stiffness-proportional damping coefficient, s
``omega``   ground-excitation frequency, rad/s
``a0``      ground-acceleration amplitude, m/s^2
==========  =====================================================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

PARAMETER_NAMES = ("omega0", "alpha", "beta", "omega", "a0")
N_PARAMS = len(PARAMETER_NAMES)

_EIG_RTOL = 1e-10


class UnsupportedDampingError(ValueError):
    """A mode is critically damped or overdamped (damping ratio >= 1).

    The closed-form response assumes oscillatory decay in every mode.
    """


@dataclass(frozen=True)
class SystemParameters:
    """Uncertain system parameters of the stochastic ground-motion model."""

    omega0: float
    alpha: float
    beta: float
    omega: float
    a0: float

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    @classmethod
    def from_array(cls, values) -> "SystemParameters":
        values = np.asarray(values, dtype=float)
        if values.shape != (N_PARAMS,):
            raise ValueError(f"expected {N_PARAMS} parameters, got shape {values.shape}")
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array([self.omega0, self.alpha, self.beta, self.omega, self.a0])


@dataclass(frozen=True)
class TimeGrid:
    """Uniform observation grid t_n = n * dt for n = 1..n_steps."""

    n_steps: int
    dt: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, self.n_steps + 1)


@dataclass(frozen=True)
class ShearBuildingModel:
    """Normalized structural model with cached modal data.

    Attributes
    ----------
    n_dof : int
        Number of stories (lateral degrees of freedom).
    mass_pattern, stiffness_pattern : ndarray, shape (n_dof, n_dof)
        Symmetric positive-definite pattern matrices.  Physical matrices
        are uncertain scalars times these patterns; only the square-root
        ratio of the scalars (``omega0``) enters the response.
    eigenvalues : ndarray, shape (n_dof,)
        Dimensionless squared modal frequency factors, strictly ascending.
    eigenvectors : ndarray, shape (n_dof, n_dof)
        Mode shapes as columns, unit Euclidean norm, sign-canonicalized so
        the largest-magnitude entry of each column is positive.
    modal_masses, modal_stiffnesses : ndarray, shape (n_dof,)
        Diagonal entries of the modal mass/stiffness matrices.
    """

    n_dof: int
    mass_pattern: np.ndarray
    stiffness_pattern: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    modal_masses: np.ndarray
    modal_stiffnesses: np.ndarray


def _canonicalize_signs(vecs: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    return vecs * signs


def _finalize_model(mass, stiffness, evals, vecs) -> ShearBuildingModel:
    order = np.argsort(evals)
    evals = evals[order]
    vecs = vecs[:, order]
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    vecs = _canonicalize_signs(vecs)

    if np.any(evals <= 0) or np.any(np.diff(evals) <= 0):
        raise ValueError("pattern matrices must yield positive, distinct eigenvalues")
    residual = stiffness @ vecs - mass @ vecs * evals
    scale = np.linalg.norm(stiffness @ vecs, axis=0)
    if np.any(np.linalg.norm(residual, axis=0) > _EIG_RTOL * scale):
        raise ValueError("eigendecomposition residual too large; check input matrices")

    mu = np.einsum("ji,jk,ki->i", vecs, mass, vecs)
    kappa = np.einsum("ji,jk,ki->i", vecs, stiffness, vecs)
    for arr in (mass, stiffness, evals, vecs, mu, kappa):
        arr.setflags(write=False)
    return ShearBuildingModel(
        n_dof=mass.shape[0],
        mass_pattern=mass,
        stiffness_pattern=stiffness,
        eigenvalues=evals,
        eigenvectors=vecs,
        modal_masses=mu,
        modal_stiffnesses=kappa,
    )


def build_uniform_shear_model(n_dof: int) -> ShearBuildingModel:
    """Build the uniform shear building with identity mass pattern.

    The stiffness pattern is tridiagonal with 2 on the diagonal (1 in the
    last entry, the free roof) and -1 on the off-diagonals.

    Parameters
    ----------
    n_dof : int
        Number of stories, >= 1.  Story 1 is at the base, story
        ``n_dof`` is the roof.
    """
    if not isinstance(n_dof, (int, np.integer)) or n_dof < 1:
        raise ValueError(f"n_dof must be a positive integer, got {n_dof!r}")
    n_dof = int(n_dof)

    mass = np.eye(n_dof)
    stiffness = 2.0 * np.eye(n_dof)
    stiffness[-1, -1] = 1.0
    idx = np.arange(n_dof - 1)
    stiffness[idx, idx + 1] = -1.0
    stiffness[idx + 1, idx] = -1.0

    if n_dof == 1:
        evals = np.array([1.0])
        vecs = np.array([[1.0]])
    else:
        # Symmetric tridiagonal solver keeps the decomposition exact and
        # bit-reproducible regardless of BLAS threading.
        evals, vecs = eigh_tridiagonal(
            stiffness.diagonal().copy(), np.full(n_dof - 1, -1.0)
        )
    return _finalize_model(mass, stiffness, evals, vecs)


def build_model(mass_pattern, stiffness_pattern) -> ShearBuildingModel:
    """Build a model from general SPD mass/stiffness pattern matrices.

    The generalized symmetric eigenproblem is reduced through a Cholesky
    factorization of the mass pattern (LAPACK's standard reduction).
    """
    mass = np.array(mass_pattern, dtype=float)
    stiffness = np.array(stiffness_pattern, dtype=float)
    if mass.ndim != 2 or mass.shape[0] != mass.shape[1]:
        raise ValueError(f"mass pattern must be square, got shape {mass.shape}")
    if stiffness.shape != mass.shape:
        raise ValueError(
            f"shape mismatch: mass {mass.shape}, stiffness {stiffness.shape}"
        )
    for name, arr in (("mass", mass), ("stiffness", stiffness)):
        if not np.allclose(arr, arr.T, rtol=0, atol=1e-12 * np.abs(arr).max()):
            raise ValueError(f"{name} pattern must be symmetric")
    evals, vecs = eigh(stiffness, mass)
    return _finalize_model(mass, stiffness, evals, vecs)


def _as_times(times) -> np.ndarray:
    if isinstance(times, TimeGrid):
        return times.times
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError(f"times must be a 1-D array, got shape {times.shape}")
    return times


def modal_constants(model: ShearBuildingModel, theta: SystemParameters):
    """Per-mode frequency, damping ratio, damped frequency and forcing amplitude.

    Returns
    -------
    (omega_j, zeta_j, omega_dj, a_j) : tuple of ndarray, each shape (n_dof,)

    Raises
    ------
    UnsupportedDampingError
        If any mode has damping ratio >= 1.
    """
    cj = np.sqrt(model.eigenvalues)
    wj = cj * theta.omega0
    zj = (theta.alpha + theta.beta * wj**2) / (2.0 * wj)
    if np.any(zj >= 1.0):
        worst = int(np.argmax(zj))
        raise UnsupportedDampingError(
            f"mode {worst + 1} has damping ratio {zj[worst]:.6g} >= 1; "
            "the closed-form response requires underdamped modes"
        )
    wd = wj * np.sqrt(1.0 - zj**2)
    participation = model.eigenvectors.sum(axis=0)  # Phi^T 1
    aj = -(theta.a0 / model.modal_masses) * participation
    return wj, zj, wd, aj


def modal_response(model: ShearBuildingModel, theta: SystemParameters, times) -> np.ndarray:
    """Closed-form modal displacements under sinusoidal ground acceleration.

    Each mode solves ``q'' + 2 zeta_j w_j q' + w_j^2 q = a_j sin(w t)``
    with zero initial displacement and velocity.

    Parameters
    ----------
    times : TimeGrid or 1-D array of evaluation times.

    Returns
    -------
    ndarray, shape (n_times, n_dof)
        Modal coordinate histories, one column per mode.
    """
    t = _as_times(times)[:, None]
    wj, zj, wd, aj = modal_constants(model, theta)
    w = theta.omega

    env = np.exp(-zj * wj * t)
    sin_d = np.sin(wd * t)
    cos_d = np.cos(wd * t)
    sin_f = np.sin(w * t)
    cos_f = np.cos(w * t)

    trans_sin = (w**3 + wj**2 * w * (2.0 * zj**2 - 1.0)) / wd
    cross = 2.0 * zj * wj * w
    detune = wj**2 - w**2
    denom = detune**2 + cross**2

    bracket = trans_sin * env * sin_d + cross * env * cos_d + detune * sin_f - cross * cos_f
    return aj * bracket / denom


def physical_response(model: ShearBuildingModel, q: np.ndarray) -> np.ndarray:
    """Map modal coordinates to story displacements, x = q Phi^T (row-wise)."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[1] != model.n_dof:
        raise ValueError(
            f"modal matrix must have shape (n_times, {model.n_dof}), got {q.shape}"
        )
    return np.einsum("nj,ij->ni", q, model.eigenvectors)


def response_sensitivities(
    model: ShearBuildingModel, theta: SystemParameters, times
) -> np.ndarray:
    """Derivatives of story displacements with respect to system parameters.

    Differentiates the closed-form modal response through the chain
    (omega_j, zeta_j, omega_dj, a_j), then maps modes to stories.

    Returns
    -------
    ndarray, shape (n_times, n_dof, 5)
        ``out[n, i, p]`` is the derivative of story ``i``'s displacement
        at time ``t_n`` with respect to parameter ``PARAMETER_NAMES[p]``.
    """
    t = _as_times(times)[:, None]
    wj, zj, wd, aj = modal_constants(model, theta)
    w = theta.omega

    sq = np.sqrt(1.0 - zj**2)
    dwd_dwj = sq
    dwd_dz = -wj * zj / sq

    env = np.exp(-zj * wj * t)
    sin_d = np.sin(wd * t)
    cos_d = np.cos(wd * t)
    sin_f = np.sin(w * t)
    cos_f = np.cos(w * t)

    denv_dwj = -zj * t * env
    denv_dz = -wj * t * env
    dsin_d_dwj = t * cos_d * dwd_dwj
    dsin_d_dz = t * cos_d * dwd_dz
    dcos_d_dwj = -t * sin_d * dwd_dwj
    dcos_d_dz = -t * sin_d * dwd_dz
    dsin_f_dw = t * cos_f
    dcos_f_dw = -t * sin_f

    num_ts = w**3 + wj**2 * w * (2.0 * zj**2 - 1.0)
    trans_sin = num_ts / wd
    dts_dwj = (2.0 * wj * w * (2.0 * zj**2 - 1.0) - trans_sin * dwd_dwj) / wd
    dts_dz = (4.0 * wj**2 * w * zj - trans_sin * dwd_dz) / wd
    dts_dw = (3.0 * w**2 + wj**2 * (2.0 * zj**2 - 1.0)) / wd

    cross = 2.0 * zj * wj * w
    dcross_dwj = 2.0 * zj * w
    dcross_dz = 2.0 * wj * w
    dcross_dw = 2.0 * zj * wj

    detune = wj**2 - w**2
    ddetune_dwj = 2.0 * wj
    ddetune_dw = -2.0 * w

    denom = detune**2 + cross**2
    ddenom_dwj = 2.0 * detune * ddetune_dwj + 2.0 * cross * dcross_dwj
    ddenom_dz = 2.0 * cross * dcross_dz
    ddenom_dw = 2.0 * detune * ddetune_dw + 2.0 * cross * dcross_dw

    bracket = trans_sin * env * sin_d + cross * env * cos_d + detune * sin_f - cross * cos_f
    ratio = bracket / denom

    dbr_dwj = (
        dts_dwj * env * sin_d
        + trans_sin * denv_dwj * sin_d
        + trans_sin * env * dsin_d_dwj
        + dcross_dwj * env * cos_d
        + cross * denv_dwj * cos_d
        + cross * env * dcos_d_dwj
        + ddetune_dwj * sin_f
        - dcross_dwj * cos_f
    )
    dbr_dz = (
        dts_dz * env * sin_d
        + trans_sin * denv_dz * sin_d
        + trans_sin * env * dsin_d_dz
        + dcross_dz * env * cos_d
        + cross * denv_dz * cos_d
        + cross * env * dcos_d_dz
        - dcross_dz * cos_f
    )
    dbr_dw = (
        dts_dw * env * sin_d
        + dcross_dw * env * cos_d
        + ddetune_dw * sin_f
        + detune * dsin_f_dw
        - dcross_dw * cos_f
        - cross * dcos_f_dw
    )

    dq_dwj = aj * (dbr_dwj - ratio * ddenom_dwj) / denom
    dq_dz = aj * (dbr_dz - ratio * ddenom_dz) / denom
    dq_dw = aj * (dbr_dw - ratio * ddenom_dw) / denom

    cj = np.sqrt(model.eigenvalues)
    dz_dwj = theta.beta / 2.0 - theta.alpha / (2.0 * wj**2)
    dq_domega0 = cj * (dq_dwj + dq_dz * dz_dwj)
    dq_dalpha = dq_dz / (2.0 * wj)
    dq_dbeta = dq_dz * (wj / 2.0)

    # a_j is linear in a0, so this derivative stays defined at a0 = 0.
    participation = model.eigenvectors.sum(axis=0)
    daj_da0 = -participation / model.modal_masses
    dq_da0 = daj_da0 * ratio

    dq = np.stack([dq_domega0, dq_dalpha, dq_dbeta, dq_dw, dq_da0], axis=-1)
    return np.einsum("ij,njp->nip", model.eigenvectors, dq)
