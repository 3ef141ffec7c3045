"""Four-stroke Otto protocol and its thermodynamic bookkeeping.

Stroke order: hot isochore at ``B_H`` (heat ``Q_H``), expansion ramp
``B_H -> B_L`` (``W1``), instantaneous projective measurement of the ion
(heat ``Q_L``), compression ramp ``B_L -> B_H`` (``W2``).  Every energy is the
change of ``Tr[rho_S H_S]`` of the ion over the stroke, and the work output of
a cycle is ``W1 + W2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .integrator import evolve
from .model import (
    EngineParams,
    LindbladGenerator,
    RampSchedule,
    bath_steady_state,
    effective_temperature,
    h_system,
    initial_joint_state,
)
from .qcore import (
    PROJ_MINUS,
    Subsystem,
    eigh2,
    expectation,
    gibbs_state,
    partial_trace,
    project_electronic_ground,
    relative_entropy,
    tensor_product,
)


class StrokeKind(enum.Enum):
    HEATING = "heating"
    EXPANSION = "expansion"
    MEASUREMENT = "measurement"
    COMPRESSION = "compression"


class Direction(enum.Enum):
    EXPAND = "expand"
    COMPRESS = "compress"


class MeasurementPolicy(enum.Enum):
    POST_SELECT_GROUND = "postselect"
    FEEDBACK_PI_PULSE = "feedback"


class IrreversibilityReference(enum.Enum):
    """Thermal state that the relative-entropy irreversible work is measured against.

    ``STEADY`` is the stationary state of the hot-bath dynamics at the final
    field; ``GIBBS`` is the canonical state of ``H_S`` at ``T_hot``.
    """

    STEADY = "steady"
    GIBBS = "gibbs"


class StrokeError(RuntimeError):
    """A stroke could not be carried out (e.g. nothing to post-select)."""


@dataclass(frozen=True)
class StrokeTimes:
    t_heat: float
    tau: float

    def __post_init__(self):
        if not (self.t_heat > 0 and self.tau > 0):
            raise ValueError(f"stroke durations must be > 0, got t_heat={self.t_heat}, tau={self.tau}")

    @property
    def cycle_time(self):
        # the measurement takes no time
        return self.t_heat + 2.0 * self.tau


@dataclass
class StrokeRecord:
    kind: StrokeKind
    b_start: float
    b_end: float
    u_start: float
    u_end: float
    delta_u: float
    q: float
    w: float
    w_ir_energy: float
    w_ir_entropy: float
    end_state_joint: np.ndarray
    end_state_system: np.ndarray
    start_state_system: np.ndarray
    p_minus: float = math.nan
    p_plus: float = math.nan
    meas_cost: float = 0.0
    trace_drift: float = 0.0
    min_eigenvalue: float = 0.0
    steps: int = 0


@dataclass
class CycleRecord:
    strokes: tuple
    q_hot: float
    q_low: float
    w1: float
    w2: float
    w_net: float
    w_ir_total: float
    w_ir_energy_total: float
    eta: float
    eta_ir: float
    meas_cost: float
    eta_m: float
    cycle_time: float
    operational: bool

    @property
    def p_minus(self):
        return self.strokes[2].p_minus

    @property
    def p_plus(self):
        return self.strokes[2].p_plus

    @property
    def end_state_joint(self):
        return self.strokes[-1].end_state_joint

    @property
    def max_trace_drift(self):
        return max(s.trace_drift for s in self.strokes)

    @property
    def min_eigenvalue(self):
        return min(s.min_eigenvalue for s in self.strokes)


@dataclass
class MultiCycleReport:
    cycles: list = field(default_factory=list)
    # index 0 (first cycle) has no predecessor and holds NaN
    eta_avg_pairwise: list = field(default_factory=list)
    power: list = field(default_factory=list)
    work_power: list = field(default_factory=list)


def _system_energy(rho_joint, b, params):
    rho_s = partial_trace(rho_joint, Subsystem.ELECTRONIC)
    return rho_s, expectation(rho_s, h_system(b, params))


def stroke_heating(rho_joint, params, t_heat, step_policy=None):
    """Hot isochore: evolve at fixed ``B_H`` for ``t_heat``; all of ``dU`` is heat."""
    if not t_heat > 0:
        raise ValueError(f"t_heat must be > 0, got {t_heat}")
    b = params.B_high
    rho_s0, u0 = _system_energy(rho_joint, b, params)
    res = evolve(rho_joint, 0.0, t_heat, LindbladGenerator(params, b), step_policy)
    rho_s1, u1 = _system_energy(res.final_state, b, params)
    du = u1 - u0
    return StrokeRecord(
        kind=StrokeKind.HEATING, b_start=b, b_end=b, u_start=u0, u_end=u1, delta_u=du,
        q=du, w=0.0, w_ir_energy=0.0, w_ir_entropy=0.0,
        end_state_joint=res.final_state, end_state_system=rho_s1, start_state_system=rho_s0,
        trace_drift=res.trace_drift, min_eigenvalue=res.min_eigenvalue_seen, steps=res.steps_taken,
    )


def adiabatic_reference_state(rho_s_start, b_start, b_end, params):
    """Endpoint of an infinitely slow sweep: eigen-populations carried over, coherences dropped."""
    v0 = eigh2(h_system(b_start, params)).eigenvectors
    v1 = eigh2(h_system(b_end, params)).eigenvectors
    pops = np.real(np.einsum("ji,jk,ki->i", v0.conj(), np.asarray(rho_s_start, dtype=complex), v0))
    return (v1 * pops) @ v1.conj().T


def irr_work_energy(rho_s_final, rho_s_adia, h_final):
    """Energy excess of the actual endpoint over the adiabatic one."""
    return expectation(rho_s_final, h_final) - expectation(rho_s_adia, h_final)


def irr_work_entropy(rho_s_final, rho_ref, t_hot):
    """``T_hot * S(rho_final || rho_ref)``; infinite if the reference lacks support."""
    return t_hot * relative_entropy(rho_s_final, rho_ref)


def thermal_reference(b, params, reference=IrreversibilityReference.STEADY):
    """Reference state for the irreversible work at field ``b``.

    Without bath coupling (``gamma == 0``) there is no stationary state, and the
    Gibbs state at ``T_hot`` is used for either choice.
    """
    reference = IrreversibilityReference(reference)
    if reference is IrreversibilityReference.STEADY and params.gamma > 0:
        return bath_steady_state(b, params)
    return gibbs_state(h_system(b, params), params.T_hot)


def stroke_ramp(rho_joint, params, direction, tau, step_policy=None, reference=IrreversibilityReference.STEADY):
    """Linear field sweep with the bath left on; ``dU`` of the ion is booked as work."""
    direction = Direction(direction)
    if direction is Direction.EXPAND:
        b0, b1, kind = params.B_high, params.B_low, StrokeKind.EXPANSION
    else:
        b0, b1, kind = params.B_low, params.B_high, StrokeKind.COMPRESSION
    rho_s0, u0 = _system_energy(rho_joint, b0, params)
    gen = LindbladGenerator(params, RampSchedule(b0, b1, tau))
    res = evolve(rho_joint, 0.0, tau, gen, step_policy)
    rho_s1, u1 = _system_energy(res.final_state, b1, params)
    du = u1 - u0
    adia = adiabatic_reference_state(rho_s0, b0, b1, params)
    return StrokeRecord(
        kind=kind, b_start=b0, b_end=b1, u_start=u0, u_end=u1, delta_u=du,
        q=0.0, w=du,
        w_ir_energy=irr_work_energy(rho_s1, adia, h_system(b1, params)),
        w_ir_entropy=irr_work_entropy(rho_s1, thermal_reference(b1, params, reference), params.T_hot),
        end_state_joint=res.final_state, end_state_system=rho_s1, start_state_system=rho_s0,
        trace_drift=res.trace_drift, min_eigenvalue=res.min_eigenvalue_seen, steps=res.steps_taken,
    )


def measurement_cost(p_minus, p_plus, t_low):
    """Landauer-type cost ``-T_L (P_- ln P_- + P_+ ln P_+)`` of recording the outcome."""
    s = 0.0
    for p in (p_minus, p_plus):
        if p > 0:
            s -= p * math.log(p)
    return t_low * s


def stroke_measurement(rho_joint, params, policy=MeasurementPolicy.POST_SELECT_GROUND):
    """Projective measurement of the ion at ``B_L`` leaving it in ``|->``.

    ``POST_SELECT_GROUND`` keeps the phonon state conditioned on the ``|->``
    outcome.  ``FEEDBACK_PI_PULSE`` flips the ``|+>`` branch back to ``|->`` and
    keeps the outcome-averaged phonon state.
    """
    policy = MeasurementPolicy(policy)
    b = params.B_low
    h = h_system(b, params)
    rho_s0 = partial_trace(rho_joint, Subsystem.ELECTRONIC)
    split = project_electronic_ground(rho_joint)
    if policy is MeasurementPolicy.POST_SELECT_GROUND:
        if split.phonon_minus is None:
            raise StrokeError(f"cannot post-select |->: p_minus = {split.p_minus:.3e}")
        phonon = split.phonon_minus
    else:
        phonon = partial_trace(rho_joint, Subsystem.VIBRATIONAL)
    end_joint = tensor_product(PROJ_MINUS, phonon)
    u0 = expectation(rho_s0, h)
    u1 = expectation(PROJ_MINUS, h)
    t_low = effective_temperature(params.n_cold, params.omega)
    lam = float(np.linalg.eigvalsh(end_joint)[0])
    return StrokeRecord(
        kind=StrokeKind.MEASUREMENT, b_start=b, b_end=b, u_start=u0, u_end=u1, delta_u=u1 - u0,
        q=u1 - u0, w=0.0, w_ir_energy=0.0, w_ir_entropy=0.0,
        end_state_joint=end_joint, end_state_system=PROJ_MINUS.copy(), start_state_system=rho_s0,
        p_minus=split.p_minus, p_plus=split.p_plus,
        meas_cost=measurement_cost(split.p_minus, split.p_plus, t_low),
        min_eigenvalue=lam,
    )


def _ratio(num, den):
    return num / den if den > 0 else math.nan


def run_cycle(
    initial_joint,
    params,
    times,
    policy=MeasurementPolicy.POST_SELECT_GROUND,
    step_policy=None,
    reference=IrreversibilityReference.STEADY,
):
    """Run heating, expansion, measurement and compression once.

    Efficiencies are ``W/Q_H`` (``eta``), ``(W - W_ir)/Q_H`` (``eta_ir``) and
    ``W/(Q_H + M)`` (``eta_m``), NaN when ``Q_H <= 0``.  A cycle counts as
    operational when ``0 < W <= Q_H``.
    """
    heat = stroke_heating(initial_joint, params, times.t_heat, step_policy)
    expand = stroke_ramp(heat.end_state_joint, params, Direction.EXPAND, times.tau, step_policy, reference)
    meas = stroke_measurement(expand.end_state_joint, params, policy)
    comp = stroke_ramp(meas.end_state_joint, params, Direction.COMPRESS, times.tau, step_policy, reference)

    q_hot = heat.q
    w_net = expand.w + comp.w
    w_ir = expand.w_ir_entropy + comp.w_ir_entropy
    m = meas.meas_cost
    return CycleRecord(
        strokes=(heat, expand, meas, comp),
        q_hot=q_hot,
        q_low=meas.q,
        w1=expand.w,
        w2=comp.w,
        w_net=w_net,
        w_ir_total=w_ir,
        w_ir_energy_total=expand.w_ir_energy + comp.w_ir_energy,
        eta=_ratio(w_net, q_hot),
        eta_ir=_ratio(w_net - w_ir, q_hot),
        meas_cost=m,
        eta_m=_ratio(w_net, q_hot + m) if q_hot > 0 else math.nan,
        cycle_time=times.cycle_time,
        operational=bool(q_hot > 0 and 0 < w_net <= q_hot),
    )


def pairwise_efficiency(rec, prev):
    """Two-cycle average ``[(W_n + W_{n-1}) - (Wir_n + Wir_{n-1})] / (Q_n + Q_{n-1})``."""
    num = (rec.w_net + prev.w_net) - (rec.w_ir_total + prev.w_ir_total)
    return _ratio(num, rec.q_hot + prev.q_hot)


def iter_cycles(
    n,
    params,
    times,
    policy=MeasurementPolicy.FEEDBACK_PI_PULSE,
    step_policy=None,
    reference=IrreversibilityReference.STEADY,
    initial_joint=None,
):
    """Yield ``n`` chained cycles, each starting from the previous compression endpoint."""
    if n < 1:
        raise ValueError(f"need at least one cycle, got {n}")
    rho = initial_joint_state(params) if initial_joint is None else initial_joint
    for _ in range(n):
        rec = run_cycle(rho, params, times, policy, step_policy, reference)
        yield rec
        rho = rec.end_state_joint


def run_cycles(
    n,
    params,
    times,
    policy=MeasurementPolicy.FEEDBACK_PI_PULSE,
    step_policy=None,
    reference=IrreversibilityReference.STEADY,
    initial_joint=None,
):
    """Chain ``n`` cycles and collect pairwise efficiencies and power.

    The power of cycle ``n >= 2`` is its pairwise efficiency divided by the
    cycle time; ``work_power`` is ``W/T`` per cycle.
    """
    report = MultiCycleReport()
    for rec in iter_cycles(n, params, times, policy, step_policy, reference, initial_joint):
        if report.cycles:
            eta = pairwise_efficiency(rec, report.cycles[-1])
        else:
            eta = math.nan
        report.cycles.append(rec)
        report.eta_avg_pairwise.append(eta)
        report.power.append(eta / rec.cycle_time)
        report.work_power.append(rec.w_net / rec.cycle_time)
    return report


def otto_efficiency(params):
    """Ideal Otto efficiency ``1 - B_L/B_H``."""
    return 1.0 - params.B_low / params.B_high


def curzon_ahlborn(params):
    """Efficiency-at-maximum-power benchmark ``1 - sqrt(B_L/B_H)``."""
    if params.B_low <= 0 or params.B_high <= 0:
        raise ValueError("Curzon-Ahlborn efficiency needs positive fields")
    return 1.0 - math.sqrt(params.B_low / params.B_high)
