"""Numeric ground truth: random network instances, rank tests, and gain recovery.

Identifiability is decided at a generic real point: edge transfer functions
are replaced by scalar gains drawn at random, and the Jacobian of the
input-output map with respect to the gains is rank-tested. Generic rank
equals the rank at a random point with probability one, so verdicts are
taken as the max over a few independent draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .digraph import Digraph, Edge
from .emp import Emp, check_emp_nodes
from .topology import PpnDecomposition

RANK_TOL = 1e-9
NULL_TOL = 1e-6
ENTRY_TOL = 1e-12
RESAMPLE_ATTEMPTS = 5


class MissingEntryError(KeyError):
    """A recovery formula needs a transfer-matrix entry that was not supplied."""


class NonGenericEntryError(ArithmeticError):
    """A recovery formula hit a division by a near-zero transfer entry."""


@dataclass(frozen=True)
class NumericNetwork:
    """A scalar-gain instantiation of a digraph.

    `gains` maps each edge (j, i) to the gain of the transfer from node j to
    node i; `param_order` fixes the enumeration of edges that defines the
    parameter vector.
    """

    graph: Digraph
    gains: Mapping[Edge, float]
    param_order: tuple[Edge, ...]

    def matrix(self) -> np.ndarray:
        """The n x n gain matrix G with G[i-1, j-1] = gain of edge j -> i."""
        n = self.graph.n
        mat = np.zeros((n, n))
        for (j, i), value in self.gains.items():
            mat[i - 1, j - 1] = value
        return mat


@dataclass(frozen=True)
class IoMap:
    """The closed-loop transfer matrix and, when a pattern is given, its visible part.

    `t` is (I - G)^{-1}; `m` selects the measured rows and excited columns
    (both in ascending node order).
    """

    t: np.ndarray
    m: Optional[np.ndarray] = None


def instantiate(g: Digraph, seed: int) -> NumericNetwork:
    """Draw a generic network instance, deterministically from `seed`.

    Each gain is i.i.d. uniform on [-1, -0.1] u [0.1, 1]; if the spectral
    radius of the resulting matrix reaches 0.5 the whole matrix is rescaled
    to bring it there, which keeps I - G comfortably invertible.
    """
    rng = np.random.default_rng(seed)
    order = tuple(sorted(g.edges))
    count = len(order)
    values = rng.uniform(0.1, 1.0, size=count) * (rng.integers(0, 2, size=count) * 2 - 1)
    mat = np.zeros((g.n, g.n))
    for (j, i), value in zip(order, values):
        mat[i - 1, j - 1] = value
    if count:
        rho = float(np.max(np.abs(np.linalg.eigvals(mat))))
        if rho >= 0.5:
            values = values * (0.5 / rho)
    return NumericNetwork(g, dict(zip(order, values)), order)


def transfer(net: NumericNetwork, emp: Optional[Emp] = None) -> IoMap:
    """Compute T = (I - G)^{-1} and, given a pattern, M = C T B."""
    n = net.graph.n
    t = np.linalg.solve(np.eye(n) - net.matrix(), np.eye(n))
    if emp is None:
        return IoMap(t)
    rows = [k - 1 for k in sorted(emp.measured)]
    cols = [k - 1 for k in sorted(emp.excited)]
    return IoMap(t, t[np.ix_(rows, cols)])


def jacobian(net: NumericNetwork, emp: Emp) -> np.ndarray:
    """Analytic Jacobian of vec(M) with respect to the edge gains.

    Since dT/dG_ij = T e_i e_j^T T, the column for edge j -> i is the
    flattened outer product of column i of C T with row j of T B. Rows are
    ordered measured-major: row index = (measured position) * |B| +
    (excited position), both in ascending node order.
    """
    check_emp_nodes(net.graph, emp)
    t = transfer(net).t
    rows = [k - 1 for k in sorted(emp.measured)]
    cols = [k - 1 for k in sorted(emp.excited)]
    u = t[rows, :]
    w = t[:, cols]
    jac = np.empty((len(rows) * len(cols), len(net.param_order)))
    for col, (j, i) in enumerate(net.param_order):
        jac[:, col] = np.outer(u[:, i - 1], w[j - 1, :]).ravel()
    return jac


def numerical_rank(a: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank by singular values above tol * sigma_max."""
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def _resolve_seeds(trials: int, seeds) -> tuple[int, ...]:
    if seeds is None:
        return tuple(range(trials))
    return tuple(int(s) for s in seeds)


def generic_identifiable(
    g: Digraph,
    emp: Emp,
    trials: int = 3,
    tol: float = RANK_TOL,
    seeds: Optional[Sequence[int]] = None,
) -> bool:
    """Decide generic identifiability by the Jacobian rank test.

    True iff, over the trial seeds, the maximal numerical rank of the
    Jacobian equals the number of edges. Patterns with an empty excited or
    measured set are invalid outright.
    """
    check_emp_nodes(g, emp)
    if not emp.excited or not emp.measured:
        return False
    n_edges = len(g.edges)
    for seed in _resolve_seeds(trials, seeds):
        if numerical_rank(jacobian(instantiate(g, seed), emp), tol) == n_edges:
            return True
    return False


def rank_report(
    g: Digraph,
    emp: Emp,
    trials: int = 3,
    tol: float = RANK_TOL,
    seeds: Optional[Sequence[int]] = None,
) -> dict:
    """Per-seed rank diagnostics for the CLI: rank and singular-value gap."""
    check_emp_nodes(g, emp)
    n_edges = len(g.edges)
    per_seed = []
    best = 0
    for seed in _resolve_seeds(trials, seeds):
        entry: dict = {"seed": seed}
        if not emp.excited or not emp.measured:
            entry.update(rank=0, gap=None)
        else:
            s = np.linalg.svd(jacobian(instantiate(g, seed), emp), compute_uv=False)
            rank = (
                0 if s.size == 0 or s[0] == 0.0 else int(np.count_nonzero(s > tol * s[0]))
            )
            gap = None
            if 0 < rank < s.size and s[rank] > 0.0:
                gap = float(s[rank - 1] / s[rank])
            entry.update(rank=rank, gap=gap)
        best = max(best, entry["rank"])
        per_seed.append(entry)
    return {
        "identifiable": bool(best == n_edges and emp.excited and emp.measured),
        "rank": best,
        "n_edges": n_edges,
        "per_seed": per_seed,
    }


def bulk_identifiable(
    g: Digraph,
    excited: np.ndarray,
    measured: np.ndarray,
    trials: int = 3,
    tol: float = RANK_TOL,
    seeds: Optional[Sequence[int]] = None,
    chunk: int = 4096,
) -> np.ndarray:
    """Vectorized `generic_identifiable` over many patterns at once.

    `excited` and `measured` are boolean masks of shape (L, n) with column k
    standing for node k+1. The decision rule is identical to the scalar
    version: empty-side patterns are invalid, and a pattern whose Jacobian
    cannot reach full column rank for size reasons is invalid without a
    factorization. Patterns already confirmed at an earlier seed are not
    recomputed (the max over seeds is an OR).
    """
    n = g.n
    order = tuple(sorted(g.edges))
    n_edges = len(order)
    count = excited.shape[0]
    result = np.zeros(count, dtype=bool)
    nb = excited.sum(axis=1)
    nc = measured.sum(axis=1)
    if n_edges == 0:
        return (nb > 0) & (nc > 0)
    undecided = (nb > 0) & (nc > 0) & (nb * nc >= n_edges)
    cols_i = np.array([i - 1 for _, i in order])
    cols_j = np.array([j - 1 for j, _ in order])
    for seed in _resolve_seeds(trials, seeds):
        pending = np.flatnonzero(undecided & ~result)
        if pending.size == 0:
            break
        t = transfer(instantiate(g, seed)).t
        # base[c, b, e] = T[c, i_e] * T[j_e, b]
        base = t[:, cols_i][:, None, :] * t[cols_j, :].T[None, :, :]
        key = nb[pending] * (n + 1) + nc[pending]
        for group_key in np.unique(key):
            rows = pending[key == group_key]
            g_nb = int(nb[rows[0]])
            g_nc = int(nc[rows[0]])
            b_idx = np.nonzero(excited[rows])[1].reshape(len(rows), g_nb)
            c_idx = np.nonzero(measured[rows])[1].reshape(len(rows), g_nc)
            for lo in range(0, len(rows), chunk):
                sl = slice(lo, lo + chunk)
                jac = base[c_idx[sl, :, None], b_idx[sl, None, :], :]
                jac = jac.reshape(jac.shape[0], g_nc * g_nb, n_edges)
                s = np.linalg.svd(jac, compute_uv=False)
                full = (s > tol * s[:, :1]).sum(axis=1) == n_edges
                result[rows[sl][full]] = True
    return result


def subset_identifiable(
    g: Digraph,
    target_edges,
    emp: Emp,
    known_edges=(),
    trials: int = 3,
    tol: float = RANK_TOL,
    null_tol: float = NULL_TOL,
    seeds: Optional[Sequence[int]] = None,
) -> bool:
    """Decide whether the target edges are locally determined by the visible map.

    Known edges are held fixed at their drawn values (their Jacobian columns
    are dropped). The remaining Jacobian's null space is projected onto the
    target coordinates: the targets are identifiable iff every null
    direction leaves them untouched, even if nuisance parameters are free.
    """
    check_emp_nodes(g, emp)
    target = frozenset(tuple(e) for e in target_edges)
    known = frozenset(tuple(e) for e in known_edges)
    if not target <= g.edges:
        raise ValueError("target_edges must be edges of the graph")
    if not known <= g.edges:
        raise ValueError("known_edges must be edges of the graph")
    if known & target:
        raise ValueError("known_edges and target_edges must not overlap")
    if not target:
        return True
    if not emp.excited or not emp.measured:
        return False
    order = tuple(sorted(g.edges))
    free_cols = [idx for idx, e in enumerate(order) if e not in known]
    free_edges = [order[idx] for idx in free_cols]
    target_pos = [pos for pos, e in enumerate(free_edges) if e in target]
    for seed in _resolve_seeds(trials, seeds):
        jac = jacobian(instantiate(g, seed), emp)[:, free_cols]
        _, s, vh = np.linalg.svd(jac, full_matrices=True)
        cutoff = tol * s[0] if s.size and s[0] > 0.0 else 0.0
        rank = int(np.count_nonzero(s > cutoff)) if s.size else 0
        null_basis = vh[rank:, :]
        if null_basis.size == 0:
            return True
        leakage = np.linalg.norm(null_basis[:, target_pos], axis=1)
        if np.all(leakage <= null_tol):
            return True
    return False


# -- closed-form recovery ------------------------------------------------------


def _entry(t_entries: Mapping[tuple[int, int], float], row: int, col: int) -> float:
    try:
        return t_entries[(row, col)]
    except KeyError:
        raise MissingEntryError(f"transfer entry T[{row},{col}] was not supplied") from None


def _div(num: float, den: float) -> float:
    if abs(den) < ENTRY_TOL:
        raise NonGenericEntryError(
            f"division by near-zero transfer quantity ({den!r}); resample the instance"
        )
    return num / den


def ppn_recover(
    t_entries: Mapping[tuple[int, int], float],
    decomp: PpnDecomposition,
    emp: Emp,
) -> dict[Edge, float]:
    """Recover every PPN edge gain from the visible transfer entries.

    `t_entries` maps (measured node, excited node) to the corresponding
    transfer value. Paths with an excitation weakly preceding a measurement
    are solved by a forward sweep up to the measured anchor and a second
    sweep after it; the one path without such a pair (if any) is solved last,
    its single remaining gain extracted from the source-to-sink entry.
    """
    if decomp.n_paths < 2:
        raise ValueError("a parallel-paths decomposition needs at least two paths")
    source, sink = decomp.source, decomp.sink
    b, c = emp.excited, emp.measured
    nodes = {source, sink}
    for p in decomp.paths:
        nodes.update(p)
    if source not in b or sink not in c or nodes - b - c:
        raise ValueError("EMP does not satisfy the PPN conditions for this decomposition")
    satisfied, exempt = [], []
    for path in decomp.paths:
        (satisfied if _ppn_path_witness(path, emp) else exempt).append(path)
    if len(exempt) > 1:
        raise ValueError("more than one path lacks an excitation preceding a measurement")

    gains: dict[Edge, float] = {}
    full_products: list[float] = []
    for path in satisfied:
        product = _recover_satisfied_path(t_entries, path, source, sink, emp, gains)
        full_products.append(product)
    if exempt:
        _recover_exempt_path(
            t_entries, exempt[0], source, sink, emp, gains, sum(full_products)
        )
    return gains


def _ppn_path_witness(path: tuple[int, ...], emp: Emp) -> Optional[tuple[int, int]]:
    """(first excited internal, last measured internal at or after it), if any."""
    internals = path[1:-1]
    first_excited = None
    for pos, node in enumerate(internals):
        if node in emp.excited:
            first_excited = pos
            break
    if first_excited is None:
        return None
    for pos in range(len(internals) - 1, first_excited - 1, -1):
        if internals[pos] in emp.measured:
            return first_excited, pos
    return None


def _recover_satisfied_path(t_entries, path, source, sink, emp, gains) -> float:
    internals = path[1:-1]
    i_pos, j_pos = _ppn_path_witness(path, emp)
    k_i, k_j = internals[i_pos], internals[j_pos]
    product = 1.0  # running product of recovered gains from the source
    prev = source
    for pos in range(j_pos + 1):
        node = internals[pos]
        if node in emp.measured:
            gain = _div(_entry(t_entries, node, source), product)
        else:
            gain = _div(
                _entry(t_entries, k_j, source),
                _entry(t_entries, k_j, node) * product,
            )
        gains[(prev, node)] = gain
        product *= gain
        prev = node
    tail = _entry(t_entries, k_j, k_i)  # running product from k_i onward
    for pos in range(j_pos + 1, len(internals)):
        node = internals[pos]  # past the anchor every node is excited-only
        gain = _div(
            _entry(t_entries, sink, k_i),
            tail * _entry(t_entries, sink, node),
        )
        gains[(prev, node)] = gain
        tail *= gain
        prev = node
    last = _div(_entry(t_entries, sink, k_i), tail)
    gains[(prev, sink)] = last
    full = 1.0
    for a, b in zip(path, path[1:]):
        full *= gains[(a, b)]
    return full


def _recover_exempt_path(t_entries, path, source, sink, emp, gains, others_total) -> None:
    internals = path[1:-1]
    # the failing path is a measured-only prefix followed by an excited-only suffix
    prefix_len = 0
    while prefix_len < len(internals) and internals[prefix_len] in emp.measured:
        prefix_len += 1
    product = 1.0
    prev = source
    for pos in range(prefix_len):
        node = internals[pos]
        gain = _div(_entry(t_entries, node, source), product)
        gains[(prev, node)] = gain
        product *= gain
        prev = node
    suffix_product = 1.0
    if prefix_len < len(internals):
        for pos in range(prefix_len, len(internals) - 1):
            here, after = internals[pos], internals[pos + 1]
            gain = _div(
                _entry(t_entries, sink, here), _entry(t_entries, sink, after)
            )
            gains[(here, after)] = gain
            suffix_product *= gain
        last = _entry(t_entries, sink, internals[-1])
        gains[(internals[-1], sink)] = last
        suffix_product *= last
        gap = (prev, internals[prefix_len])
    else:
        gap = (prev, sink)
    residual = _entry(t_entries, sink, source) - others_total
    gains[gap] = _div(residual, product * suffix_product)


def ppn_round_trip(
    g: Digraph,
    emp: Emp,
    decomp: PpnDecomposition,
    seed: int = 0,
    attempts: int = RESAMPLE_ATTEMPTS,
) -> tuple[NumericNetwork, dict[Edge, float]]:
    """Instantiate, expose the visible transfer entries, and run the recovery.

    A near-zero division signals a non-generic draw; the instance is
    resampled with the next seed, up to `attempts` times.
    """
    if attempts < 1:
        raise ValueError("attempts must be positive")
    last_error: Optional[NonGenericEntryError] = None
    for offset in range(attempts):
        net = instantiate(g, seed + offset)
        t = transfer(net).t
        entries = {
            (row, col): float(t[row - 1, col - 1])
            for row in emp.measured
            for col in emp.excited
        }
        try:
            return net, ppn_recover(entries, decomp, emp)
        except NonGenericEntryError as exc:
            last_error = exc
    raise last_error


def embedded_recover(
    t_aa: np.ndarray, g_ab: np.ndarray, t_b: np.ndarray, g_ba: np.ndarray
) -> np.ndarray:
    """Recover the subnetwork matrix from its transfer block and the known correction.

    Computes I_A - T_AA^{-1} - G_AB T_B G_BA. Raises
    numpy.linalg.LinAlgError when T_AA is singular.
    """
    t_aa = np.asarray(t_aa, dtype=float)
    if t_aa.ndim != 2 or t_aa.shape[0] != t_aa.shape[1]:
        raise ValueError("T_AA must be square")
    correction = np.asarray(g_ab, dtype=float) @ np.asarray(t_b, dtype=float) @ np.asarray(
        g_ba, dtype=float
    )
    if correction.shape != t_aa.shape:
        raise ValueError("correction term does not conform with T_AA")
    return np.eye(t_aa.shape[0]) - np.linalg.inv(t_aa) - correction


@dataclass(frozen=True)
class Partition:
    """Blocks of a network instance split along a node subset (ascending order)."""

    a_nodes: tuple[int, ...]
    b_nodes: tuple[int, ...]
    g_a: np.ndarray
    g_ab: np.ndarray
    g_ba: np.ndarray
    g_b: np.ndarray
    t_aa: np.ndarray
    t_b: np.ndarray


def partition(net: NumericNetwork, va) -> Partition:
    """Split G and T into the blocks used by the embedding identity."""
    va_set = frozenset(va)
    all_nodes = frozenset(net.graph.nodes)
    if not va_set or not va_set < all_nodes:
        raise ValueError("va must be a proper nonempty subset of the nodes")
    a = [k - 1 for k in sorted(va_set)]
    b = [k - 1 for k in sorted(all_nodes - va_set)]
    mat = net.matrix()
    t = transfer(net).t
    g_b = mat[np.ix_(b, b)]
    t_b = np.linalg.solve(np.eye(len(b)) - g_b, np.eye(len(b)))
    return Partition(
        tuple(k + 1 for k in a),
        tuple(k + 1 for k in b),
        mat[np.ix_(a, a)],
        mat[np.ix_(a, b)],
        mat[np.ix_(b, a)],
        g_b,
        t[np.ix_(a, a)],
        t_b,
    )


def embedded_round_trip(g: Digraph, va, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Instantiate, partition along `va`, and recover G_A from the blocks."""
    net = instantiate(g, seed)
    blocks = partition(net, va)
    recovered = embedded_recover(blocks.t_aa, blocks.g_ab, blocks.t_b, blocks.g_ba)
    return blocks.g_a, recovered
