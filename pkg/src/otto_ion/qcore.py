"""Dense linear algebra and information measures for the qubit + two-level phonon.

Operators are plain ``numpy`` complex arrays.  The electronic basis is
``(|->, |+>)`` with ``SIGMA_Z = diag(-1, +1)`` so that ``|->`` is the ground
state of ``sigma_z``; the vibrational basis is ``(|0>, |1>)``.  Joint operators
are ordered electronic-first::

    |-,0>, |-,1>, |+,0>, |+,1>
"""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-10
SUPPORT_TOL = 1e-12
PROBABILITY_FLOOR = 1e-14

ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
# sigma_- = |-><+| lowers the electronic state
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T.copy()
# a = |0><1| on the truncated vibrational mode
ANNIHILATE = np.array([[0, 1], [0, 0]], dtype=complex)
CREATE = ANNIHILATE.conj().T.copy()

KET_MINUS = np.array([1, 0], dtype=complex)
KET_PLUS = np.array([0, 1], dtype=complex)
PROJ_MINUS = np.outer(KET_MINUS, KET_MINUS.conj())
PROJ_PLUS = np.outer(KET_PLUS, KET_PLUS.conj())


class Subsystem(enum.Enum):
    ELECTRONIC = "electronic"
    VIBRATIONAL = "vibrational"


class Spectrum2(NamedTuple):
    """Ascending eigenvalues and column eigenvectors of a 2x2 Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class MeasurementSplit(NamedTuple):
    """Outcome probabilities and conditional phonon states of a |->/|+> measurement.

    A conditional state is ``None`` when its outcome probability is below
    ``PROBABILITY_FLOOR``.
    """

    p_minus: float
    p_plus: float
    phonon_minus: np.ndarray | None
    phonon_plus: np.ndarray | None


def _square(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise ValueError(f"{name} must be a 2x2 or 4x4 matrix, got shape {a.shape}")
    return a


def hermiticity_error(a):
    """Largest entrywise deviation ``max |A - A^dagger|``."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a, tol=HERMITIAN_TOL):
    return hermiticity_error(a) <= tol


def hermitize(a):
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def validate_density(rho, trace_tol=1e-8, herm_tol=HERMITIAN_TOL, eig_tol=1e-10):
    """Check that ``rho`` is a density matrix; return it as a complex array.

    Raises
    ------
    ValueError
        If the matrix has the wrong shape, is not Hermitian, does not have unit
        trace, or has an eigenvalue below ``-eig_tol``.
    """
    rho = _square(rho, "density matrix")
    herr = hermiticity_error(rho)
    if herr > herm_tol:
        raise ValueError(f"density matrix is not Hermitian (max |A - A^+| = {herr:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr.real:.12g} differs from 1")
    lam = np.linalg.eigvalsh(hermitize(rho))
    if lam[0] < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
    return rho


def tensor_product(a, b):
    """Kronecker product of two 2x2 operators, electronic factor first."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor_product needs two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def partial_trace(rho, keep):
    """Reduce a 4x4 joint operator onto one of its two-level factors."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"partial_trace needs a 4x4 joint matrix, got {rho.shape}")
    keep = Subsystem(keep)
    r = rho.reshape(2, 2, 2, 2)
    if keep is Subsystem.ELECTRONIC:
        return np.einsum("ajbj->ab", r)
    return np.einsum("jajb->ab", r)


def expectation(rho, h):
    """``Tr[rho h]`` for Hermitian ``h``; the imaginary part must vanish."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if rho.shape != h.shape or rho.ndim != 2:
        raise ValueError(f"dimension mismatch: state {rho.shape}, operator {h.shape}")
    val = np.einsum("ij,ji->", rho, h)
    if abs(val.imag) > HERMITIAN_TOL:
        raise ValueError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)


def _phase_fix(v):
    idx = np.flatnonzero(np.abs(v) > 1e-300)
    if idx.size:
        c = v[idx[0]]
        v = v * (abs(c) / c)
    return v


def eigh2(h):
    """Closed-form eigendecomposition of a 2x2 Hermitian matrix.

    Eigenvalues are returned ascending.  Each eigenvector has its first nonzero
    component real and positive.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise ValueError(f"eigh2 needs a 2x2 matrix, got {h.shape}")
    if not is_hermitian(h):
        raise ValueError("eigh2 input is not Hermitian")
    a = h[0, 0].real
    d = h[1, 1].real
    b = 0.5 * (h[0, 1] + np.conj(h[1, 0]))
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    r = float(np.hypot(half, abs(b)))
    evals = np.array([mean - r, mean + r])
    if abs(b) == 0.0:
        vecs = np.eye(2, dtype=complex) if a <= d else np.array([[0, 1], [1, 0]], dtype=complex)
        return Spectrum2(evals, vecs)
    cols = []
    for lam in evals:
        # two null vectors of (h - lam); keep the better conditioned one
        u = np.array([b, lam - a], dtype=complex)
        w = np.array([lam - d, np.conj(b)], dtype=complex)
        v = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
        cols.append(_phase_fix(v / np.linalg.norm(v)))
    return Spectrum2(evals, np.column_stack(cols))


def gibbs_state(h, temperature, zero_temperature=False):
    """Canonical state ``exp(-h/T)/Z`` of a 2x2 Hamiltonian (``k_B = 1``).

    With ``zero_temperature=True`` the ground-state projector is returned and
    ``temperature`` is ignored.
    """
    spec = eigh2(h)
    v = spec.eigenvectors
    if zero_temperature:
        return np.outer(v[:, 0], v[:, 0].conj())
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    e = spec.eigenvalues
    w = np.exp(-(e - e[0]) / temperature)
    p = w / w.sum()
    return (v * p) @ v.conj().T


def _xlogx(p):
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log(p[nz])
    return out


def von_neumann_entropy(rho):
    """``-Tr[rho ln rho]`` in nats, with ``0 ln 0 = 0``."""
    lam = np.linalg.eigvalsh(hermitize(rho))
    return float(-np.sum(_xlogx(lam)))


def relative_entropy(rho, sigma):
    """Quantum relative entropy ``Tr[rho ln rho] - Tr[rho ln sigma]``.

    Returns ``inf`` when the support of ``rho`` is not contained in the support
    of ``sigma``.
    """
    rho = hermitize(rho)
    sigma = hermitize(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    s, v = np.linalg.eigh(sigma)
    # weight of rho on each eigenvector of sigma
    weights = np.real(np.einsum("ij,ik,kj->j", v.conj(), rho, v))
    if np.any((s < SUPPORT_TOL) & (weights > SUPPORT_TOL)):
        return float("inf")
    keep = weights > 0
    cross = float(np.sum(weights[keep] * np.log(np.clip(s[keep], SUPPORT_TOL, None))))
    own = float(np.sum(_xlogx(np.linalg.eigvalsh(rho))))
    return own - cross


def project_electronic_ground(rho):
    """Split a joint state by a projective ``|->/|+>`` measurement of the ion.

    The conditional phonon states are ``<-|rho|->/p_-`` and ``<+|rho|+>/p_+``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 joint state, got {rho.shape}")
    block_minus = rho[:2, :2]
    block_plus = rho[2:, 2:]
    p_minus = float(np.trace(block_minus).real)
    p_plus = float(np.trace(block_plus).real)
    ph_minus = block_minus / p_minus if p_minus >= PROBABILITY_FLOOR else None
    ph_plus = block_plus / p_plus if p_plus >= PROBABILITY_FLOOR else None
    return MeasurementSplit(p_minus, p_plus, ph_minus, ph_plus)


def fidelity_classical(p, q):
    """Bhattacharyya fidelity ``(sum sqrt(p_i q_i))^2`` of two population vectors."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    return float(np.sum(np.sqrt(p * q)) ** 2)
