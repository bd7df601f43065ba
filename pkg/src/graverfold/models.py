"""Instance builders for the two applications and the transposed-form transform."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .matrix import (IntMatrix, Shape, Vector, assemble_four_block, assemble_transposed_form,
                     block_matrix, hstack, vstack)
from .problem import INF, NEG_INF, IPInstance, SeparableObjective, is_finite


class ModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# stochastic multi-commodity flow


@dataclass(frozen=True)
class Scenario:
    capacity: tuple[int, ...]
    penalty: tuple[int, ...]
    probability: Fraction


@dataclass(frozen=True)
class NetworkSpec:
    """Network, commodities and capacity scenarios.

    ``supplies[m][v]`` is the net outflow commodity ``m`` must have at node
    ``v`` (positive at sources, negative at sinks). ``edge_cost`` is charged
    per unit of every commodity; penalties per unit of capacity overflow.
    """

    nodes: int
    edges: tuple[tuple[int, int], ...]
    supplies: tuple[tuple[int, ...], ...]
    edge_cost: tuple[int, ...]
    scenarios: tuple[Scenario, ...]
    penalty_upper: int | None = None

    def __post_init__(self):
        for t, h in self.edges:
            if not (0 <= t < self.nodes and 0 <= h < self.nodes):
                raise ModelError(f"edge ({t}, {h}) uses an unknown node")
        if len(self.edge_cost) != len(self.edges):
            raise ModelError("one first-stage cost per edge required")
        for m, s in enumerate(self.supplies):
            if len(s) != self.nodes:
                raise ModelError(f"commodity {m}: supply vector needs one entry per node")
            if sum(s) != 0:
                raise ModelError(f"commodity {m}: supplies and demands do not balance")
        if not self.scenarios:
            raise ModelError("at least one scenario required")
        for j, sc in enumerate(self.scenarios):
            if len(sc.capacity) != len(self.edges) or len(sc.penalty) != len(self.edges):
                raise ModelError(f"scenario {j}: capacity and penalty need one entry per edge")
            if any(c < 0 for c in sc.capacity):
                raise ModelError(f"scenario {j}: negative capacity")
            if sc.probability <= 0:
                raise ModelError(f"scenario {j}: probability must be positive")
        if sum(sc.probability for sc in self.scenarios) != 1:
            raise ModelError("scenario probabilities must sum to 1")
        if not self.supplies:
            raise ModelError("at least one commodity required")

    @property
    def n_commodities(self) -> int:
        return len(self.supplies)

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)

    def commodity_volume(self, m: int) -> int:
        return sum(x for x in self.supplies[m] if x > 0)

    def total_demand(self) -> int:
        return sum(self.commodity_volume(m) for m in range(self.n_commodities))


def incidence_matrix(nodes: int, edges: Sequence[tuple[int, int]]) -> IntMatrix:
    """+1 at the tail, -1 at the head of every edge."""
    rows = [[0] * len(edges) for _ in range(nodes)]
    for e, (t, h) in enumerate(edges):
        rows[t][e] += 1
        rows[h][e] -= 1
    return IntMatrix.from_rows(rows, len(edges))


def build_multicommodity(spec: NetworkSpec) -> IPInstance:
    """Two-stage multi-commodity flow with capacity-overflow penalties.

    Columns: one flow block per commodity, then per scenario a slack block
    and an overflow block. Per scenario and edge:
    ``Σ_m flow_m + slack - overflow = capacity``. With as many commodities
    as scenarios the matrix is the transposed N-fold form with blocks
    ``A = incidence, B = 0, D = I, C = (I  -I)``.

    Bounds (modeling choice): flow of commodity m in ``[0, volume_m]``,
    slack in ``[0, capacity]``, overflow in ``[0, penalty_upper]`` with the
    total demand as default, which no overflow can exceed.
    """
    E = len(spec.edges)
    Mc, Ns = spec.n_commodities, spec.n_scenarios
    A = incidence_matrix(spec.nodes, spec.edges)
    Bz = IntMatrix.zeros(spec.nodes, 2 * E)
    D = IntMatrix.identity(E)
    C = hstack(IntMatrix.identity(E), IntMatrix.identity(E, -1))
    system = None
    if Mc == Ns:
        system = assemble_transposed_form(A, Bz, C, D, Mc)
        matrix = system.matrix
    else:
        grid = [[A if j == m else None for j in range(Mc)] + [None] * Ns for m in range(Mc)]
        grid += [[D] * Mc + [C if j == s else None for j in range(Ns)] for s in range(Ns)]
        matrix = block_matrix(grid, [spec.nodes] * Mc + [E] * Ns, [E] * Mc + [2 * E] * Ns)

    b = [x for s in spec.supplies for x in s]
    for sc in spec.scenarios:
        b.extend(sc.capacity)

    scale = math.lcm(*(sc.probability.denominator for sc in spec.scenarios))
    linear, lower, upper = [], [], []
    for m in range(Mc):
        linear += [scale * c for c in spec.edge_cost]
        lower += [0] * E
        upper += [spec.commodity_volume(m)] * E
    p_up = spec.total_demand() if spec.penalty_upper is None else spec.penalty_upper
    for sc in spec.scenarios:
        w = sc.probability * scale
        assert w.denominator == 1
        linear += [0] * E + [int(w) * q for q in sc.penalty]
        lower += [0] * (2 * E)
        upper += list(sc.capacity) + [p_up] * E
    return IPInstance(matrix, tuple(b), tuple(lower), tuple(upper),
                      SeparableObjective.linear_only(linear), system=system,
                      objective_scale=scale,
                      meta={"model": "multicommodity", "commodities": Mc, "scenarios": Ns})


def equalize_M_N(spec: NetworkSpec) -> NetworkSpec:
    """Pad to as many commodities as scenarios without changing the optimum.

    Fewer commodities: append zero-demand commodities. Fewer scenarios:
    replace the last scenario by ``M - N + 1`` copies, each carrying that
    fraction of its probability weight.
    """
    Mc, Ns = spec.n_commodities, spec.n_scenarios
    if Mc == Ns:
        return spec
    if Mc < Ns:
        extra = tuple((0,) * spec.nodes for _ in range(Ns - Mc))
        return replace(spec, supplies=spec.supplies + extra)
    copies = Mc - Ns + 1
    last = spec.scenarios[-1]
    split = replace(last, probability=last.probability / copies)
    return replace(spec, scenarios=spec.scenarios[:-1] + (split,) * copies)


# ---------------------------------------------------------------------------
# stochastic programs with second-order dominance constraints


@dataclass(frozen=True)
class SIPSpec:
    """Deterministic equivalent with K benchmark thresholds and L scenarios.

    ``x_bounds``/``y_bounds`` are (lower, upper) lists for the first-stage
    and each second-stage vector; all bounds must be finite so the slack
    variables get finite upper bounds.
    """

    T: IntMatrix
    W: IntMatrix
    g: tuple[int, ...]
    c: tuple[int, ...]
    q: tuple[int, ...]
    a: tuple[int, ...]
    abar: tuple[Fraction, ...]
    z: tuple[tuple[int, ...], ...]
    x_bounds: tuple[tuple[int, ...], tuple[int, ...]]
    y_bounds: tuple[tuple[int, ...], tuple[int, ...]]

    def __post_init__(self):
        nx, m, d = self.T.cols, self.W.cols, self.T.rows
        if self.W.rows != d:
            raise ModelError(f"T has {d} rows but W has {self.W.rows}")
        if len(self.g) != nx or len(self.c) != nx:
            raise ModelError("g and c need one entry per first-stage variable")
        if len(self.q) != m:
            raise ModelError("q needs one entry per second-stage variable")
        if not self.a or len(self.a) != len(self.abar):
            raise ModelError("need K >= 1 thresholds a_k and matching abar_k")
        if not self.z:
            raise ModelError("need L >= 1 scenarios")
        if any(len(zl) != d for zl in self.z):
            raise ModelError("scenario right-hand sides need one entry per row of T")
        for (lo, up), k in ((self.x_bounds, nx), (self.y_bounds, m)):
            if len(lo) != k or len(up) != k:
                raise ModelError("bound vectors have the wrong length")
            if not all(is_finite(v) for v in (*lo, *up)):
                raise ModelError("SIP variable bounds must be finite")

    @property
    def K(self) -> int:
        return len(self.a)

    @property
    def L(self) -> int:
        return len(self.z)

    def shortfall_cap(self, k: int) -> int:
        """Largest admissible value of any shortfall v_lk: Σ_l v_lk <= L abar_k."""
        return max(0, math.floor(self.L * Fraction(self.abar[k])))


def _min_dot(coef, lower, upper) -> int:
    return sum(c * (lo if c >= 0 else up) for c, lo, up in zip(coef, lower, upper))


def sip_layout(spec: SIPSpec) -> dict:
    """Column offsets inside one scenario block of the built instance."""
    m, K = spec.W.cols, spec.K
    per_k = m + 2
    return {"per_k": per_k, "y": 0, "v": m, "slack": m + 1, "pad": K * per_k, "n_A": K * per_k + K}


def build_sip_dominance(spec: SIPSpec) -> IPInstance:
    """Four-block instance for the dominance-constrained program.

    Per scenario l and threshold k the block holds ``(y_lk, v_lk, s_lk)``
    with rows ``T x + W y_lk = z_l`` and ``c x + q y_lk - v_lk + s_lk = a_k``.
    Each scenario block ends with K padding variables that enter only the
    coupling rows ``Σ_l v_lk + pad_k = floor(L abar_k)``; they are pinned to
    zero except in the last scenario, where they act as the slack.
    """
    T, W = spec.T, spec.W
    d, m, nx, K, L = T.rows, W.cols, T.cols, spec.K, spec.L
    lay = sip_layout(spec)
    W_ext = vstack(hstack(W, IntMatrix.zeros(d, 2)),
                   IntMatrix.from_rows([list(spec.q) + [-1, 1]]))
    T_ext = vstack(T, IntMatrix.from_rows([list(spec.c)]))
    Wbar = block_matrix([[W_ext if i == j else None for j in range(K)] for i in range(K)],
                        [d + 1] * K, [m + 2] * K)
    A = hstack(Wbar, IntMatrix.zeros(K * (d + 1), K))
    B = vstack(*([T_ext] * K))
    C = IntMatrix.zeros(K, nx)
    D_rows = [[0] * lay["n_A"] for _ in range(K)]
    for k in range(K):
        D_rows[k][k * lay["per_k"] + lay["v"]] = 1
        D_rows[k][lay["pad"] + k] = 1
    D = IntMatrix.from_rows(D_rows, lay["n_A"])
    system = assemble_four_block(A, B, C, D, L)

    caps = [spec.shortfall_cap(k) for k in range(K)]
    b = [math.floor(L * Fraction(spec.abar[k])) for k in range(K)]
    for zl in spec.z:
        for k in range(K):
            b += list(zl) + [spec.a[k]]

    xlo, xup = spec.x_bounds
    ylo, yup = spec.y_bounds
    lower, upper = list(xlo), list(xup)
    min_cx = _min_dot(spec.c, xlo, xup)
    min_qy = _min_dot(spec.q, ylo, yup)
    for l in range(L):
        for k in range(K):
            slack_cap = spec.a[k] - min_cx - min_qy + caps[k]
            lower += list(ylo) + [0, 0]
            upper += list(yup) + [caps[k], max(0, slack_cap)]
        for k in range(K):
            lower.append(0)
            upper.append(caps[k] if l == L - 1 else 0)
    linear = list(spec.g) + [0] * (L * lay["n_A"])
    return IPInstance.from_system(system, b, lower, upper, SeparableObjective.linear_only(linear),
                                  meta={"model": "sip", "K": K, "L": L})


def sip_project(spec: SIPSpec, z: Sequence[int]) -> tuple[Vector, dict, dict]:
    """Split a point of the built instance into ``x``, ``y[l,k]`` and ``v[l,k]``."""
    nx, m, K = spec.T.cols, spec.W.cols, spec.K
    lay = sip_layout(spec)
    x = tuple(z[:nx])
    y, v = {}, {}
    for l in range(spec.L):
        base = nx + l * lay["n_A"]
        for k in range(K):
            off = base + k * lay["per_k"]
            y[l, k] = tuple(z[off:off + m])
            v[l, k] = z[off + m]
    return x, y, v


# ---------------------------------------------------------------------------
# transposed N-fold form -> four-block form


def _interval_sum(values) -> int | float:
    total = 0
    for x in values:
        if not is_finite(x):
            return x
        total += x
    return total


def corollary_transform(instance: IPInstance) -> IPInstance:
    """Rewrite a transposed-form instance as a four-block instance.

    Adds aggregates ``w_x = Σ x_i`` and ``w_y = Σ y_i`` as first-stage
    variables; the new column order is ``(w_x, w_y, x_1, y_1, ..., x_N, y_N)``
    and row order is the aggregate rows, then per copy i the rows
    ``D w_x + C y_i = b_{N+i}`` and ``B w_y + A x_i = b_i``.
    ``meta["original_columns"][j]`` is the new index of original column j.
    """
    sys_ = instance.system
    if sys_ is None or sys_.shape is not Shape.TRANSPOSED:
        raise ModelError("corollary_transform needs a transposed-form instance")
    A, B, C, D, N = sys_.A, sys_.B, sys_.C, sys_.D, sys_.n
    nA, nB, dA, dC = A.cols, B.cols, A.rows, C.rows
    w = nA + nB
    A2 = block_matrix([[None, C], [A, None]], [dC, dA], [nA, nB])
    B2 = block_matrix([[D, None], [None, B]], [dC, dA], [nA, nB])
    C2 = IntMatrix.identity(w, -1)
    D2 = IntMatrix.identity(w)
    system = assemble_four_block(A2, B2, C2, D2, N)

    mapping = [0] * instance.n
    for i in range(N):
        for k in range(nA):
            mapping[sys_.column_index("x", i, k)] = w + i * w + k
        for k in range(nB):
            mapping[sys_.column_index("y", i, k)] = w + i * w + nA + k

    b = [0] * w
    for i in range(N):
        b += [instance.b[sys_.row_index("C", i, k)] for k in range(dC)]
        b += [instance.b[sys_.row_index("A", i, k)] for k in range(dA)]

    n_new = w + N * w
    lower: list = [0] * n_new
    upper: list = [0] * n_new
    for j, jn in enumerate(mapping):
        lower[jn], upper[jn] = instance.lower[j], instance.upper[j]
    for k in range(nA):
        cols = [sys_.column_index("x", i, k) for i in range(N)]
        lower[k] = _interval_sum(instance.lower[j] for j in cols)
        upper[k] = _interval_sum(instance.upper[j] for j in cols)
    for k in range(nB):
        cols = [sys_.column_index("y", i, k) for i in range(N)]
        lower[nA + k] = _interval_sum(instance.lower[j] for j in cols)
        upper[nA + k] = _interval_sum(instance.upper[j] for j in cols)
    objective = instance.objective.reindexed(n_new, mapping)
    meta = dict(instance.meta)
    meta["original_columns"] = tuple(mapping)
    return IPInstance.from_system(system, b, lower, upper, objective,
                                  objective_scale=instance.objective_scale, meta=meta)


def restore_original(instance: IPInstance, z: Sequence[int]) -> Vector:
    """Map a point of a transformed instance back to the original columns."""
    mapping = instance.meta["original_columns"]
    return tuple(z[j] for j in mapping)


def true_value(instance: IPInstance, value: int) -> Fraction:
    """Objective value in the model's original units."""
    return Fraction(value, instance.objective_scale)
