"""Fixed-step fourth-order Runge-Kutta propagation of density matrices.

Two code paths share one step rule:

* a :class:`~otto_ion.model.LindbladGenerator` is integrated by a compiled
  kernel acting on the vectorised state with ``L(t) = L0 + B(t) Lz``;
* any other callable ``rhs(t, rho)`` is integrated in plain numpy.

The trace is never renormalised.  Drift and the most negative eigenvalue seen
are reported and checked against :class:`StepPolicy`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .model import EngineParams, LindbladGenerator, RampSchedule, initial_joint_state
from .qcore import hermiticity_error, hermitize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepPolicy:
    step_size: float = 1e-3
    max_trace_drift: float = 1e-8
    max_negativity: float = 1e-9
    # eigenvalue probe spacing, in steps
    eig_check_interval: int = 100

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if not (self.max_trace_drift > 0 and self.max_negativity > 0):
            raise ValueError("integration tolerances must be > 0")
        if self.eig_check_interval < 1:
            raise ValueError("eig_check_interval must be >= 1")


class EvolutionResult(NamedTuple):
    final_state: np.ndarray
    trace_drift: float
    min_eigenvalue_seen: float
    steps_taken: int
    hermiticity_drift: float


class IntegrationError(RuntimeError):
    """Raised when trace drift or negativity exceed the step policy."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


def _step_count(duration, h):
    n = math.ceil(duration / h - 1e-9)
    return max(n, 1)


@numba.njit(cache=True, nogil=True)
def _matvec_affine(l0, lz, b, v, out):
    n = v.shape[0]
    for i in range(n):
        acc = 0j
        for j in range(n):
            acc += (l0[i, j] + b * lz[i, j]) * v[j]
        out[i] = acc


@numba.njit(cache=True, nogil=True)
def _min_eig(v):
    m = v.reshape((4, 4))
    herm = 0.5 * (m + m.conj().T)
    return np.linalg.eigvalsh(herm)[0]


@numba.njit(cache=True, nogil=True)
def _rk4_affine(v0, l0, lz, b0, slope, t_start, t_end, h, n_steps, check_every):
    v = v0.copy()
    n = v.shape[0]
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    min_eig = _min_eig(v)
    for i in range(n_steps):
        t = t_start + i * h
        hi = h
        if i == n_steps - 1:
            hi = t_end - t
        b1 = b0 + slope * t
        b2 = b0 + slope * (t + 0.5 * hi)
        b3 = b0 + slope * (t + hi)
        _matvec_affine(l0, lz, b1, v, k1)
        for j in range(n):
            tmp[j] = v[j] + 0.5 * hi * k1[j]
        _matvec_affine(l0, lz, b2, tmp, k2)
        for j in range(n):
            tmp[j] = v[j] + 0.5 * hi * k2[j]
        _matvec_affine(l0, lz, b2, tmp, k3)
        for j in range(n):
            tmp[j] = v[j] + hi * k3[j]
        _matvec_affine(l0, lz, b3, tmp, k4)
        for j in range(n):
            v[j] = v[j] + hi / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        if (i + 1) % check_every == 0 or i == n_steps - 1:
            e = _min_eig(v)
            if e < min_eig:
                min_eig = e
    return v, min_eig


def _rk4_generic(rho, rhs, t_start, t_end, h, n_steps, check_every):
    rho = rho.copy()
    min_eig = float(np.linalg.eigvalsh(hermitize(rho))[0])
    for i in range(n_steps):
        t = t_start + i * h
        hi = t_end - t if i == n_steps - 1 else h
        k1 = rhs(t, rho)
        k2 = rhs(t + 0.5 * hi, rho + 0.5 * hi * k1)
        k3 = rhs(t + 0.5 * hi, rho + 0.5 * hi * k2)
        k4 = rhs(t + hi, rho + hi * k3)
        rho = rho + hi / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (i + 1) % check_every == 0 or i == n_steps - 1:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(hermitize(rho))[0]))
    return rho, min_eig


def evolve(rho0, t_start, t_end, rhs, policy=None, check=True):
    """Integrate ``drho/dt = rhs(t, rho)`` from ``t_start`` to ``t_end``.

    The last step is shortened so the run lands exactly on ``t_end``.  The
    final state is Hermitised once; its trace is left as integrated.

    Raises
    ------
    IntegrationError
        If ``check`` is set and the trace drift or the most negative
        eigenvalue violate ``policy``.
    """
    policy = policy or StepPolicy()
    rho0 = np.asarray(rho0, dtype=complex)
    if t_end < t_start:
        raise ValueError(f"t_end ({t_end}) must not precede t_start ({t_start})")
    if t_end == t_start:
        lam = float(np.linalg.eigvalsh(hermitize(rho0))[0])
        return EvolutionResult(rho0.copy(), 0.0, lam, 0, 0.0)

    h = policy.step_size
    n_steps = _step_count(t_end - t_start, h)
    if isinstance(rhs, LindbladGenerator) and rho0.shape == (4, 4):
        l0, lz = rhs.liouvillian_parts()
        b0, slope = rhs.field_line()
        v, min_eig = _rk4_affine(
            rho0.reshape(-1).copy(), l0, lz, b0, slope,
            float(t_start), float(t_end), float(h), n_steps, policy.eig_check_interval,
        )
        raw = v.reshape(4, 4)
    else:
        raw, min_eig = _rk4_generic(rho0, rhs, float(t_start), float(t_end), h, n_steps, policy.eig_check_interval)

    herm_drift = hermiticity_error(raw)
    final = hermitize(raw)
    drift = float(abs(np.trace(final) - np.trace(rho0)))
    result = EvolutionResult(final, drift, float(min_eig), n_steps, herm_drift)
    if check:
        if drift > policy.max_trace_drift:
            raise IntegrationError(f"trace drift {drift:.3e} exceeds {policy.max_trace_drift:.1e}", result)
        if min_eig < -policy.max_negativity:
            raise IntegrationError(f"state eigenvalue {min_eig:.3e} below -{policy.max_negativity:.1e}", result)
    logger.debug("evolve %.6g -> %.6g: %d steps, drift %.2e, min eig %.2e", t_start, t_end, n_steps, drift, min_eig)
    return result


class ConvergenceStudy(NamedTuple):
    errors: tuple
    order: float


def convergence_study(generator=None, rho0=None, duration=1.0, step=0.05):
    """Errors at ``step`` and ``step/2`` against a ``step/16`` reference.

    The default probe is the expansion ramp of the default engine compressed
    into ``duration``, started from the initial joint state.
    """
    params = EngineParams()
    if generator is None:
        generator = LindbladGenerator(params, RampSchedule(params.B_high, params.B_low, duration))
    if rho0 is None:
        rho0 = initial_joint_state(params)

    def run(h):
        pol = StepPolicy(step_size=h, max_negativity=1.0, max_trace_drift=1.0)
        return evolve(rho0, 0.0, duration, generator, pol, check=False).final_state

    ref = run(step / 16)
    e1 = float(np.max(np.abs(run(step) - ref)))
    e2 = float(np.max(np.abs(run(step / 2) - ref)))
    return ConvergenceStudy((e1, e2), math.log2(e1 / e2))


def convergence_order(generator=None, rho0=None, duration=1.0, step=0.05):
    """Empirical order of accuracy from step halving; about 4 for RK4."""
    return convergence_study(generator, rho0, duration, step).order
