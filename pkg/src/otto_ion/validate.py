"""Quick self-checks of the simulator, run by ``otto-ion validate``."""

from __future__ import annotations

import math

import numpy as np

from .engine import StrokeTimes, run_cycle, measurement_cost
from .integrator import StepPolicy, convergence_study, evolve
from .model import EngineParams, LindbladGenerator, effective_temperature, h_system, initial_joint_state
from .qcore import (
    Subsystem,
    gibbs_state,
    partial_trace,
    relative_entropy,
    tensor_product,
)


def _random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def check_partial_trace(rng):
    rho = _random_density(rng, 4)
    o = _random_density(rng, 2)
    lhs = np.trace(partial_trace(rho, Subsystem.ELECTRONIC) @ o)
    rhs = np.trace(rho @ tensor_product(o, np.eye(2)))
    err = abs(lhs - rhs)
    return err < 1e-12, f"|Tr[rho_S O] - Tr[rho (O x I)]| = {err:.1e}"


def check_klein(rng):
    worst = min(relative_entropy(_random_density(rng, 2), _random_density(rng, 2)) for _ in range(200))
    return worst >= -1e-10, f"min S(rho||sigma) over 200 pairs = {worst:.2e}"


def check_generator(rng):
    gen = LindbladGenerator(EngineParams(), 7.5)
    rho = _random_density(rng, 4)
    d = gen(0.0, rho)
    tr = abs(np.trace(d))
    herm = np.max(np.abs(d - d.conj().T))
    return tr < 1e-14 and herm < 1e-13, f"|Tr L(rho)| = {tr:.1e}, Hermiticity error {herm:.1e}"


def check_unitary_oracle(rng):
    p = EngineParams(gamma=0.0)
    gen = LindbladGenerator(p, p.B_high)
    rho0 = _random_density(rng, 4)
    # RK4 global error ~ (E h)^4; at B_H the spread E ~ 20 needs h = 5e-4 for 1e-8
    got = evolve(rho0, 0.0, 10.0, gen, StepPolicy(step_size=5e-4)).final_state
    e, v = np.linalg.eigh(gen.hamiltonian(0.0))
    u = (v * np.exp(-1j * e * 10.0)) @ v.conj().T
    err = np.max(np.abs(got - u @ rho0 @ u.conj().T))
    return err < 1e-8, f"max |RK4 - exp oracle| over dt=10: {err:.1e}"


def check_order(rng):
    study = convergence_study()
    return 3.7 <= study.order <= 4.3, f"empirical order {study.order:.3f}"


def check_gibbs(rng):
    h = h_system(10.0, EngineParams())
    rho = gibbs_state(h, 10.0)
    comm = np.max(np.abs(rho @ h - h @ rho))
    p_ground = 1.0 / (1.0 + math.exp(-2.0 * math.sqrt(0.04 + 100.0) / 10.0))
    pops = np.linalg.eigvalsh(rho)
    ok = comm < 1e-12 and abs(pops[-1] - p_ground) < 1e-12
    return ok, f"[rho, H] = {comm:.1e}, ground population {pops[-1]:.6f}"


def check_cycle_bookkeeping(rng):
    p = EngineParams()
    rec = run_cycle(initial_joint_state(p), p, StrokeTimes(20.0, 8.0), step_policy=StepPolicy(step_size=2e-3))
    worst = 0.0
    for s in rec.strokes:
        u0 = np.real(np.trace(s.start_state_system @ h_system(s.b_start, p)))
        u1 = np.real(np.trace(s.end_state_system @ h_system(s.b_end, p)))
        worst = max(worst, abs((u1 - u0) - s.delta_u))
    t_low = effective_temperature(p.n_cold, p.omega)
    m_ok = rec.meas_cost <= t_low * math.log(2) + 1e-12
    ok = worst < 1e-12 and rec.q_low <= 1e-12 and m_ok and rec.max_trace_drift < 1e-8
    return ok, f"first-law residual {worst:.1e}, Q_L = {rec.q_low:.4f}, M = {rec.meas_cost:.4f}"


def check_measurement_bound(rng):
    t_low = effective_temperature(0.02, 1.0)
    m = measurement_cost(0.5, 0.5, t_low)
    return abs(m - t_low * math.log(2)) < 1e-12, f"M(1/2, 1/2) = {m:.6f}, T_L ln 2 = {t_low * math.log(2):.6f}"


CHECKS = [
    ("partial trace vs expectation", check_partial_trace),
    ("Klein inequality", check_klein),
    ("generator trace/Hermiticity", check_generator),
    ("gibbs state", check_gibbs),
    ("unitary matrix-exponential oracle", check_unitary_oracle),
    ("RK4 convergence order", check_order),
    ("cycle bookkeeping", check_cycle_bookkeeping),
    ("measurement cost maximum", check_measurement_bound),
]


def run_validation(seed=2024, echo=print):
    """Run every check; return ``True`` when all pass."""
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn(rng)
        all_ok &= bool(ok)
        echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok

