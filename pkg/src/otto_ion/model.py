"""Hamiltonians, field ramp and Lindblad generator of the single-ion engine.

Units are hbar = k_B = 1 with the trap frequency ``omega`` as the energy scale.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .qcore import (
    ANNIHILATE,
    CREATE,
    ID2,
    ID4,
    PROJ_MINUS,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Z,
    tensor_product,
)


@dataclass(frozen=True)
class EngineParams:
    """Physical constants of the engine.

    Defaults are the parameter set used throughout the reference study:
    ``B_H=10, B_L=5, g=0.2, k=0.1, T_H=10, omega=1, Gamma=0.085, n_th=0.1``.
    ``n_vib0`` is the initial phonon occupation and ``n_cold`` the phonon
    occupation that sets the measurement temperature ``T_L``.
    """

    g: float = 0.2
    k: float = 0.1
    omega: float = 1.0
    gamma: float = 0.085
    n_th: float = 0.1
    T_hot: float = 10.0
    B_high: float = 10.0
    B_low: float = 5.0
    n_vib0: float = 0.0
    n_cold: float = 0.02

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not np.isfinite(val):
                raise ValueError(f"{f.name} must be finite, got {val}")
        for name in ("g", "k", "gamma", "n_th", "n_vib0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("omega", "T_hot", "n_cold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        # B_low == B_high is tolerated for degenerate (no-ramp) checks
        if self.B_low > self.B_high:
            raise ValueError(f"B_low < B_high violated: B_low={self.B_low}, B_high={self.B_high}")


@dataclass(frozen=True)
class RampSchedule:
    """Linear field sweep from ``b_start`` to ``b_end`` over ``duration``."""

    b_start: float
    b_end: float
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"ramp duration must be > 0, got {self.duration}")

    @property
    def slope(self):
        return (self.b_end - self.b_start) / self.duration


def b_field(t, schedule):
    """Field value at time ``t`` of a linear ramp."""
    if t < 0 or t > schedule.duration:
        raise ValueError(f"t={t} outside ramp interval [0, {schedule.duration}]")
    if t == schedule.duration:
        return float(schedule.b_end)
    return schedule.b_start + (schedule.b_end - schedule.b_start) * (t / schedule.duration)


def h_system(b, params):
    """Electronic Hamiltonian ``g sigma_x + b sigma_z``."""
    return params.g * SIGMA_X + b * SIGMA_Z


def _static_parts(params):
    h_ph = params.omega * tensor_product(ID2, CREATE @ ANNIHILATE)
    h_int = params.k * (tensor_product(SIGMA_MINUS, CREATE) + tensor_product(SIGMA_PLUS, ANNIHILATE))
    h_drive = params.g * tensor_product(SIGMA_X, ID2)
    return h_drive + h_ph + h_int, tensor_product(SIGMA_Z, ID2)


def _field_value(t, field):
    if isinstance(field, RampSchedule):
        return b_field(t, field)
    return float(field)


def h_full(t, field, params):
    """Joint Hamiltonian ``H_S(B(t)) x I + omega I x a^+a + k(a^+ s_- + s_+ a)``.

    ``field`` is either a :class:`RampSchedule` or a fixed field value.
    """
    static, zpart = _static_parts(params)
    return static + _field_value(t, field) * zpart


def _sandwich_super(left, right):
    # row-major vec: vec(L X R) = (L kron R^T) vec(X)
    return np.kron(left, right.T)


def _commutator_super(h):
    return -1j * (_sandwich_super(h, ID4) - _sandwich_super(ID4, h))


def _dissipator_super(c, rate):
    cd = c.conj().T
    cdc = cd @ c
    return rate * (_sandwich_super(c, cd) - 0.5 * _sandwich_super(cdc, ID4) - 0.5 * _sandwich_super(ID4, cdc))


@dataclass(frozen=True)
class LindbladGenerator:
    """Right-hand side of the engine master equation for a given field protocol.

    Calling the generator evaluates ``drho/dt`` in matrix form.  Because the
    Hamiltonian is affine in the field and the field is affine in time, the
    same generator is also available as ``L(t) = L0 + B(t) Lz`` acting on the
    row-major vectorised state (see :meth:`liouvillian_parts`).
    """

    params: EngineParams
    field: RampSchedule | float

    def field_at(self, t):
        return _field_value(t, self.field)

    def field_line(self):
        """``(b0, slope)`` such that ``B(t) = b0 + slope * t``."""
        if isinstance(self.field, RampSchedule):
            return float(self.field.b_start), float(self.field.slope)
        return float(self.field), 0.0

    def hamiltonian(self, t):
        return h_full(t, self.field, self.params)

    def jump_operators(self):
        p = self.params
        s_minus = tensor_product(SIGMA_MINUS, ID2)
        s_plus = tensor_product(SIGMA_PLUS, ID2)
        return ((s_minus, (p.n_th + 1.0) * p.gamma), (s_plus, p.n_th * p.gamma))

    def __call__(self, t, rho):
        h = self.hamiltonian(t)
        out = -1j * (h @ rho - rho @ h)
        for c, rate in self.jump_operators():
            if rate == 0.0:
                continue
            cd = c.conj().T
            cdc = cd @ c
            out = out + 0.5 * rate * (2.0 * c @ rho @ cd - cdc @ rho - rho @ cdc)
        return out

    def liouvillian_parts(self):
        """Return ``(L0, Lz)`` with ``L(t) = L0 + B(t) * Lz`` (16x16 each)."""
        static, zpart = _static_parts(self.params)
        l0 = _commutator_super(static)
        for c, rate in self.jump_operators():
            if rate:
                l0 = l0 + _dissipator_super(c, rate)
        return l0, _commutator_super(zpart)


def lindblad_rhs(t, rho, generator):
    """``drho/dt`` of the master equation at time ``t`` for ``generator``."""
    return generator(t, np.asarray(rho, dtype=complex))


def bath_steady_state(b, params):
    """Stationary electronic state under the hot bath at fixed field ``b``.

    This is the fixed point of the electronic master equation with the phonon
    coupling removed: ``-i[H_S(b), rho] + D[rho] = 0`` with unit trace.
    """
    h = h_system(b, params)
    eye = np.eye(2, dtype=complex)

    def sand(left, right):
        return np.kron(left, right.T)

    lv = -1j * (sand(h, eye) - sand(eye, h))
    for c, rate in ((SIGMA_MINUS, (params.n_th + 1.0) * params.gamma), (SIGMA_PLUS, params.n_th * params.gamma)):
        cd = c.conj().T
        cdc = cd @ c
        lv = lv + rate * (sand(c, cd) - 0.5 * sand(cdc, eye) - 0.5 * sand(eye, cdc))
    if params.gamma == 0:
        raise ValueError("bath steady state is undefined for gamma = 0")
    # replace one equation by the trace condition
    a = lv.copy()
    rhs = np.zeros(4, dtype=complex)
    a[0, :] = np.array([1, 0, 0, 1], dtype=complex)
    rhs[0] = 1.0
    rho = np.linalg.solve(a, rhs).reshape(2, 2)
    return 0.5 * (rho + rho.conj().T)


def adiabatic_time_bound(params):
    """Ramp-time scale ``(g/8) |1/B_L^2 - 1/B_H^2|`` for quantum adiabaticity."""
    if params.B_low == 0 or params.B_high == 0:
        raise ValueError("adiabatic time bound needs nonzero B_low and B_high")
    return params.g / 8.0 * abs(1.0 / params.B_low**2 - 1.0 / params.B_high**2)


def effective_temperature(n_bar, omega):
    """Temperature assigned to a mode of frequency ``omega`` with occupation ``n_bar``.

    ``T = omega / ln(1/n_bar + 1)``; tends to zero as ``n_bar -> 0``.
    """
    if not n_bar > 0:
        raise ValueError(f"n_bar must be > 0, got {n_bar}")
    return omega / np.log(1.0 / n_bar + 1.0)


def phonon_initial_state(n_bar):
    """Diagonal two-level phonon state with excited weight ``n/(1+n)``."""
    if n_bar < 0:
        raise ValueError(f"n_bar must be >= 0, got {n_bar}")
    p = n_bar / (1.0 + n_bar)
    return np.diag([1.0 - p, p]).astype(complex)


def initial_joint_state(params):
    """``|-><-|`` for the ion times the initial phonon state."""
    return tensor_product(PROJ_MINUS, phonon_initial_state(params.n_vib0))
