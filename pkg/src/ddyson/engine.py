"""Integral-free Dyson expansion over permutation-term paths.

Each expansion order q contributes one path per multi-index
(i_1..i_q, k_1..k_q): a walk through the basis picking one permutation
term and one exponential-sum factor at every step.  The time-ordered
Dyson integral for a path collapses to a single divided-difference
exponential; its interaction-picture node list ends in a literal 0, and
the Schrodinger-picture list is the same shifted by the final free energy:

    alpha = (prod_j d_j) * e^{-i t [x_0, ..., x_{q-1}, 0]}
    beta  = alpha * e^{-i t E_final} = (prod_j d_j) * e^{-i t [y_0, ..., y_q]}

with y_j = E_j - sum_{l>j} lam_l (energies and diagonals read along the
trajectory) and x_j = y_j - E_final.

Enumeration is depth-first with early pruning: a step whose permutation
image leaves the basis, or whose d diagonal vanishes at the landing state,
kills the whole subtree.  Everything here is a pure function of
(model, arguments); the optional parallel mode splits disjoint first-step
subtrees across threads and reduces by addition, so parallel results may
differ from sequential ones at rounding level only.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .divdiff import exp_dd, exp_dd_batch
from .errors import CapacityError, ModelError
from .hamiltonian import HamiltonianModel, is_time_independent, path_energies

_CAPACITY_LIMIT = 2 ** 63
PICTURES = ("schrodinger", "interaction")


@dataclass(frozen=True)
class Path:
    """One expansion summand: term choices, factor choices, basis walk.

    ``terms`` holds 1-based permutation-term indices (i_1..i_q) and
    ``factors`` the aligned 1-based exponential-sum factor indices
    (k_1..k_q); ``trajectory`` caches the visited states including the
    origin, so it always has length q + 1 and is defined by construction.
    """

    origin: int
    terms: tuple
    factors: tuple
    trajectory: tuple

    def __post_init__(self):
        if len(self.terms) != len(self.factors):
            raise ValueError("terms and factors must have equal length")
        if len(self.trajectory) != len(self.terms) + 1:
            raise ValueError("trajectory must hold one state per step plus the origin")

    @property
    def order(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the basis at a fixed time.

    Truncated-series output is not exactly unitary, so no norm constraint
    is imposed.
    """

    amplitudes: np.ndarray
    time: float

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _suffix_lambda_sums(model: HamiltonianModel, path: Path) -> np.ndarray:
    """S_j = sum_{l > j} lam_l for j = 0..q (S_q = 0)."""
    lam = np.array(
        [model.term(i).factors[k - 1].lam[z]
         for i, k, z in zip(path.terms, path.factors, path.trajectory[1:])],
        dtype=complex,
    )
    if lam.size == 0:
        return np.zeros(1, dtype=complex)
    return np.concatenate([np.cumsum(lam[::-1])[::-1], [0.0]])


def y_inputs(model: HamiltonianModel, path: Path) -> np.ndarray:
    """Schrodinger-picture nodes y_j = E_j - sum_{l>j} lam_l, j = 0..q."""
    energies = path_energies(model, path.trajectory).astype(complex)
    return energies - _suffix_lambda_sums(model, path)


def x_inputs(model: HamiltonianModel, path: Path) -> np.ndarray:
    """Interaction-picture nodes [x_0, ..., x_{q-1}, 0], q >= 1.

    x_j = E_j - E_q - sum_{l>j} lam_l; the trailing node is the literal 0.
    """
    if path.order < 1:
        raise ValueError("interaction-picture nodes need order >= 1")
    y = y_inputs(model, path)
    x = y - model.energies[path.trajectory[-1]]
    x[-1] = 0.0
    return x


def d_product(model: HamiltonianModel, path: Path) -> complex:
    """Product of the d diagonals read at each step's landing state."""
    out = 1.0 + 0j
    for i, k, z in zip(path.terms, path.factors, path.trajectory[1:]):
        out *= model.term(i).factors[k - 1].d[z]
    return complex(out)


def alpha(model: HamiltonianModel, path: Path, t) -> complex:
    """Interaction-picture coefficient of one (i_q, k_q) path."""
    if path.order == 0:
        return 1.0 + 0j
    return d_product(model, path) * exp_dd(t, x_inputs(model, path))


def beta(model: HamiltonianModel, path: Path, t) -> complex:
    """Schrodinger-picture coefficient: alpha times e^{-i t E_final}."""
    return d_product(model, path) * exp_dd(t, y_inputs(model, path))


def count_paths_bound(model: HamiltonianModel, max_order: int) -> int:
    """Upper bound sum_q (M K)^q on the number of enumerated paths."""
    mk = model.n_terms * model.n_factors
    return sum(mk ** q for q in range(max_order + 1))


def _check_capacity(model: HamiltonianModel, max_order: int) -> None:
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    if count_paths_bound(model, max_order) >= _CAPACITY_LIMIT:
        raise CapacityError(
            f"path bound sum_q (MK)^q at max_order={max_order} exceeds 2^63; "
            "reduce the expansion order")


def _iter_term_walks(model: HamiltonianModel, z: int, max_order: int,
                     first_term=None):
    """Depth-first (i_1..i_q) walks with defined trajectory.

    Yields (terms, trajectory, d_options) where d_options[j] is the K-vector
    of d diagonals at step j's landing state.  Subtrees are pruned when the
    permutation image leaves the basis or every factor's d vanishes there.
    With ``first_term`` set, only walks starting with that step are yielded
    (and the empty walk is not), which partitions the tree for parallel runs.
    """
    stack_terms: list[int] = []
    stack_states: list[int] = [z]
    stack_dopts: list[np.ndarray] = []

    def _extend(i: int) -> bool:
        term = model.terms[i - 1]
        nxt = term.perm.apply(stack_states[-1])
        if nxt is None:
            return False
        dopt = np.array([f.d[nxt] for f in term.factors], dtype=complex)
        if not np.any(dopt):
            return False
        stack_terms.append(i)
        stack_states.append(nxt)
        stack_dopts.append(dopt)
        return True

    def _walk():
        yield tuple(stack_terms), tuple(stack_states), list(stack_dopts)
        if len(stack_terms) == max_order:
            return
        for i in range(1, model.n_terms + 1):
            if _extend(i):
                yield from _walk()
                stack_terms.pop()
                stack_states.pop()
                stack_dopts.pop()

    if first_term is None:
        yield from _walk()
    elif max_order >= 1 and _extend(first_term):
        yield from _walk()


def enumerate_paths(model: HamiltonianModel, z: int, max_order: int):
    """All defined, non-vanishing paths of order <= max_order from |z>.

    Depth-first: each (i_1..i_q) walk is expanded over every factor
    assignment whose d product is nonzero.  Raises CapacityError when the
    bound sum_q (MK)^q does not fit a 64-bit counter.
    """
    if not 0 <= z < model.dimension:
        raise ValueError(f"basis index {z} outside [0, {model.dimension})")
    _check_capacity(model, max_order)
    K = model.n_factors
    for terms, traj, dopts in _iter_term_walks(model, z, max_order):
        if not terms:
            yield Path(origin=z, terms=(), factors=(), trajectory=traj)
            continue
        for ks in itertools.product(range(1, K + 1), repeat=len(terms)):
            if any(dopts[j][k - 1] == 0 for j, k in enumerate(ks)):
                continue
            yield Path(origin=z, terms=terms, factors=ks, trajectory=traj)


def _walk_coefficient(model: HamiltonianModel, terms, traj, dopts,
                      t: float, picture: str) -> complex:
    """Factor-aggregated coefficient of one (i_1..i_q) walk.

    Sums d-product times the divided-difference exponential over all K^q
    factor assignments, batching the node rows into one kernel call.
    """
    q = len(terms)
    energies = model.energies[np.asarray(traj, dtype=np.int64)].astype(complex)
    if q == 0:
        if picture == "interaction":
            return 1.0 + 0j
        return complex(np.exp(-1j * t * energies[0]))

    K = model.n_factors
    lam_step = np.array(
        [[model.terms[i - 1].factors[k].lam[zl] for k in range(K)]
         for i, zl in zip(terms, traj[1:])],
        dtype=complex,
    )
    d_step = np.asarray(dopts, dtype=complex)

    combos = np.array(list(itertools.product(range(K), repeat=q)), dtype=np.intp)
    d_rows = np.prod(d_step[np.arange(q), combos], axis=1)
    keep = d_rows != 0
    if not np.any(keep):
        return 0j
    combos = combos[keep]
    d_rows = d_rows[keep]

    lam_rows = lam_step[np.arange(q), combos]
    suffix = np.zeros((combos.shape[0], q + 1), dtype=complex)
    suffix[:, :q] = np.cumsum(lam_rows[:, ::-1], axis=1)[:, ::-1]
    nodes = energies[None, :] - suffix
    if picture == "interaction":
        nodes = nodes - energies[-1]
        nodes[:, -1] = 0.0
    values = exp_dd_batch(t, nodes)
    return complex(np.sum(d_rows * values))


def _orders_for_walks(model, z0, t, max_order, picture, walks) -> np.ndarray:
    out = np.zeros((max_order + 1, model.dimension), dtype=complex)
    for terms, traj, dopts in walks:
        out[len(terms), traj[-1]] += _walk_coefficient(
            model, terms, traj, dopts, t, picture)
    return out


def _resolve_workers(max_workers) -> int:
    workers = max_workers or os.cpu_count() or 1
    cap = os.environ.get("DYSON_DD_THREADS")
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def evolve_by_order(model: HamiltonianModel, z0: int, t, max_order: int,
                    picture: str = "schrodinger", parallel: bool = False,
                    max_workers=None) -> np.ndarray:
    """Per-order state contributions, shape (max_order + 1, dimension).

    Row q holds the endpoint-summed coefficients of all order-q paths, so
    partial sums over rows give every truncation at once.  Sequential mode
    is deterministic; parallel mode splits first-step subtrees across
    threads and may differ at rounding level.
    """
    if not 0 <= z0 < model.dimension:
        raise ValueError(f"basis index {z0} outside [0, {model.dimension})")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    if picture not in PICTURES:
        raise ValueError(f"picture must be one of {PICTURES}")
    _check_capacity(model, max_order)

    if not parallel or max_order == 0 or model.n_terms == 1:
        return _orders_for_walks(
            model, z0, t, max_order, picture,
            _iter_term_walks(model, z0, max_order))

    def _subtree(first_term: int) -> np.ndarray:
        return _orders_for_walks(
            model, z0, t, max_order, picture,
            _iter_term_walks(model, z0, max_order, first_term=first_term))

    out = _orders_for_walks(model, z0, t, 0, picture, _iter_term_walks(model, z0, 0))
    padded = np.zeros((max_order + 1, model.dimension), dtype=complex)
    padded[0] = out[0]
    with ThreadPoolExecutor(max_workers=_resolve_workers(max_workers)) as ex:
        for part in ex.map(_subtree, range(1, model.n_terms + 1)):
            padded += part
    return padded


def evolve(model: HamiltonianModel, z0: int, t, max_order: int,
           picture: str = "schrodinger", parallel: bool = False,
           max_workers=None) -> StateVector:
    """State from |z0> summed over all paths of order <= max_order."""
    orders = evolve_by_order(model, z0, t, max_order, picture,
                             parallel=parallel, max_workers=max_workers)
    return StateVector(amplitudes=orders.sum(axis=0), time=float(t))


def transition_amplitude(model: HamiltonianModel, z_in: int, z_fin: int,
                         t, max_order: int) -> complex:
    """<z_fin| state |z_in>: exactly the evolved amplitude at z_fin."""
    if not 0 <= z_fin < model.dimension:
        raise ValueError(f"basis index {z_fin} outside [0, {model.dimension})")
    return complex(evolve(model, z_in, t, max_order).amplitudes[z_fin])


def amplitude_by_order(model: HamiltonianModel, z_in: int, z_fin: int,
                       t, max_order: int) -> np.ndarray:
    """Order-resolved transition amplitudes, length max_order + 1."""
    if not 0 <= z_fin < model.dimension:
        raise ValueError(f"basis index {z_fin} outside [0, {model.dimension})")
    orders = evolve_by_order(model, z_in, t, max_order)
    return orders[:, z_fin].copy()


def evolve_ti(model: HamiltonianModel, z0: int, t, max_order: int) -> StateVector:
    """Time-independent specialization: nodes are the trajectory energies.

    Requires K = 1 and all lam = 0.  Because divided differences are
    invariant under input permutation, walks are grouped by (endpoint,
    energy-visit counts): one kernel evaluation per distinct energy
    multiset instead of one per path, which keeps high orders tractable.
    Agrees with the general engine to rounding.
    """
    if not is_time_independent(model):
        raise ModelError(
            "evolve_ti requires a time-independent model (K = 1, all lam = 0)")
    if not 0 <= z0 < model.dimension:
        raise ValueError(f"basis index {z0} outside [0, {model.dimension})")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    _check_capacity(model, max_order)

    D = model.dimension
    amps = np.zeros(D, dtype=complex)

    # weights[(z, counts)] = summed d products over walks ending at z whose
    # trajectory visits basis state s counts[s] times (origin included).
    start = tuple(1 if s == z0 else 0 for s in range(D))
    weights: dict = {(z0, start): 1.0 + 0j}

    for q in range(max_order + 1):
        if weights:
            keys = sorted(weights)
            rows = np.array(
                [np.repeat(np.arange(D), counts) for _, counts in keys],
                dtype=np.int64,
            )
            values = exp_dd_batch(t, model.energies[rows].astype(complex))
            for key, val in zip(keys, values):
                amps[key[0]] += weights[key] * val
        if q == max_order:
            break
        nxt: dict = {}
        for (z, counts), w in weights.items():
            for tm in model.terms:
                z2 = tm.perm.apply(z)
                if z2 is None:
                    continue
                d = tm.factors[0].d[z2]
                if d == 0:
                    continue
                c2 = list(counts)
                c2[z2] += 1
                key = (z2, tuple(c2))
                nxt[key] = nxt.get(key, 0j) + w * d
        weights = nxt

    return StateVector(amplitudes=amps, time=t)
