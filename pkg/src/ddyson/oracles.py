"""Independent reference computations for validating the expansion machinery.

Everything here recomputes quantities the divided-difference engine
produces, by entirely different numerical routes:

* ``simplex_integral``: the nested time-ordered integral
  (-i)^q \\int_0^t dt_q ... \\int_0^{t_2} dt_1 e^{-i(g_q t_q + ... + g_1 t_1)}
  by nested Gauss-Legendre quadrature on the unit simplex — the left-hand
  side of the Hermite-Genocchi identity that the kernel evaluates in
  closed form.
* ``ode_evolve``: direct adaptive Runge-Kutta integration of
  i dpsi/dt = H(t) psi.
* ``mat_exp_evolve``: e^{-i H t} |z0> by a dense matrix exponential for
  time-independent models.
* ``infidelity``: 1 - |<psi|psi_Q>|^2 against a normalized reference.
* ``exp_dd_highprec``: the divided-difference recursion in >= 50-digit
  arithmetic (distinct nodes only).

Dense oracles are capped at dimension 512: they exist for verification,
not production scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .divdiff import as_nodes
from .engine import StateVector
from .errors import CapacityError, DegenerateNodesError, StiffnessError
from .hamiltonian import HamiltonianModel, eval_H, is_time_independent

DENSE_DIMENSION_CAP = 512
_MAX_SIMPLEX_DEPTH = 5


@dataclass(frozen=True)
class QuadratureSpec:
    """Fixed-order nested Gauss-Legendre configuration."""

    nodes_per_dim: int = 24
    method: str = "gauss-legendre-nested"

    def __post_init__(self):
        if self.nodes_per_dim < 16:
            raise ValueError("nodes_per_dim must be >= 16")


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float


def dd_nodes_from_rates(gammas) -> np.ndarray:
    """Divided-difference nodes matching the time-ordered integral.

    For phase rates (g_1, ..., g_q) the nodes are the suffix sums
    x_j = g_{j+1} + ... + g_q for j = 0..q-1, followed by a literal 0.
    """
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    nodes = np.zeros(g.size + 1, dtype=complex)
    nodes[:-1] = np.cumsum(g[::-1])[::-1]
    return nodes


def _nested_gl(t: float, gammas: np.ndarray, n: int) -> complex:
    # unit-simplex form: (-it)^q int_0^1 ds_q ... int_0^{s_2} ds_1 e^{-it sum g_j s_j}
    x, w = leggauss(n)
    u01 = 0.5 * (x + 1.0)
    w01 = 0.5 * w

    def level(j: int, s: np.ndarray) -> np.ndarray:
        if j == 0:
            return np.ones_like(s, dtype=complex)
        u = np.multiply.outer(s, u01)
        inner = level(j - 1, u.ravel()).reshape(u.shape)
        phase = np.exp(-1j * t * gammas[j - 1] * u)
        return s * ((inner * phase) @ w01)

    q = gammas.size
    return complex((-1j * t) ** q * level(q, np.array([1.0]))[0])


def simplex_integral(t, gammas, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Nested time-ordered integral with an error estimate.

    Cost grows as nodes_per_dim^q, so depth is capped at q = 5.  The
    estimate is the difference between the requested order and an order
    raised by 8; the returned value is the finer one.
    """
    spec = spec or QuadratureSpec()
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    if g.ndim != 1 or g.size == 0:
        raise ValueError("gammas must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(g)):
        raise ValueError("gammas must be finite")
    if g.size > _MAX_SIMPLEX_DEPTH:
        raise CapacityError(
            f"simplex quadrature supports q <= {_MAX_SIMPLEX_DEPTH}, got {g.size}")
    coarse = _nested_gl(t, g, spec.nodes_per_dim)
    fine = _nested_gl(t, g, spec.nodes_per_dim + 8)
    return QuadratureResult(value=fine, error_estimate=abs(fine - coarse))


def _check_dense(model: HamiltonianModel) -> None:
    if model.dimension > DENSE_DIMENSION_CAP:
        raise ValueError(
            f"dense oracles support dimension <= {DENSE_DIMENSION_CAP}, "
            f"got {model.dimension}")


def ode_evolve(model: HamiltonianModel, z0: int, t, tol: float = 1e-10,
               return_steps: bool = False):
    """Schrodinger solution from |z0> by adaptive 4th/5th-order stepping.

    Returns the state at time t (optionally with the accepted step count).
    """
    _check_dense(model)
    if not 0 <= z0 < model.dimension:
        raise ValueError(f"basis index {z0} outside [0, {model.dimension})")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("time must be finite")

    psi0 = np.zeros(model.dimension, dtype=complex)
    psi0[z0] = 1.0
    if t == 0.0:
        return (StateVector(psi0, 0.0), 0) if return_steps else StateVector(psi0, 0.0)

    # scatter data: one (dst, src, d, lam) block per term/factor
    blocks = []
    for tm in model.terms:
        src = np.nonzero(tm.perm.targets >= 0)[0]
        if src.size == 0:
            continue
        dst = tm.perm.targets[src]
        for f in tm.factors:
            blocks.append((dst, src, f.d[dst], f.lam[dst]))
    energies = model.energies

    def rhs(tt, psi):
        hpsi = energies * psi
        for dst, src, d, lam in blocks:
            hpsi[dst] += np.exp(1j * lam * tt) * d * psi[src]
        return -1j * hpsi

    sol = solve_ivp(rhs, (0.0, t), psi0, method="RK45",
                    rtol=tol, atol=tol * 1e-3)
    if not sol.success:
        raise StiffnessError(f"adaptive integration failed: {sol.message}")
    state = StateVector(amplitudes=sol.y[:, -1].copy(), time=t)
    if return_steps:
        return state, int(sol.t.size - 1)
    return state


def mat_exp_evolve(model: HamiltonianModel, z0: int, t) -> StateVector:
    """e^{-i H t} |z0> by dense scaling-and-squaring (time-independent only)."""
    _check_dense(model)
    if not is_time_independent(model):
        raise ValueError("mat_exp_evolve requires a time-independent model")
    if not 0 <= z0 < model.dimension:
        raise ValueError(f"basis index {z0} outside [0, {model.dimension})")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    U = expm(-1j * t * eval_H(model, 0.0))
    return StateVector(amplitudes=U[:, z0].copy(), time=t)


def infidelity(psi: StateVector, psi_q: StateVector) -> float:
    """1 - |<psi|psi_Q>|^2 with psi normalized and psi_Q used as is.

    Not symmetric: the reference is normalized, the truncated-series state
    is deliberately left raw.
    """
    if psi.dimension != psi_q.dimension:
        raise ValueError("states must share a dimension")
    nrm = psi.norm()
    if nrm == 0.0:
        raise ValueError("reference state must be nonzero")
    overlap = np.vdot(psi.amplitudes / nrm, psi_q.amplitudes)
    return float(1.0 - abs(overlap) ** 2)


def exp_dd_highprec(t, inputs, digits: int = 60) -> complex:
    """e^{-i t [x_0, ..., x_q]} by the recursion in ``digits``-digit arithmetic.

    Extended-precision oracle for the production kernel; nodes must be
    pairwise distinct (the recursion divides by gaps).
    """
    x = as_nodes(inputs)
    if np.unique(x).size != x.size:
        raise DegenerateNodesError(
            "extended-precision recursion requires distinct nodes")
    with mp.workdps(digits):
        tt = mp.mpf(float(t))
        xs = [mp.mpc(complex(v)) for v in x]
        col = [mp.exp(-1j * tt * z) for z in xs]
        for span in range(1, len(xs)):
            col = [(col[i + 1] - col[i]) / (xs[i + span] - xs[i])
                   for i in range(len(col) - 1)]
        return complex(col[0])
