"""Signed graphs, bilayer multiplex states and Heider balance checks.

Weights live in dense symmetric ``numpy`` arrays with a zero diagonal.
Balance is always judged on signs: a continuous weight matrix is first
thresholded into a :class:`SignPattern`, where ``0`` means the edge is
absent (or too weak to have a definite sign).

Two independent balance checkers are provided. :func:`layer_balanced_triads`
only looks at triangles and is valid on complete graphs;
:func:`layer_balanced_cycles` two-colours the graph and is valid on any
signed graph. :func:`enumerate_balanced_configs` cross-checks them
exhaustively on small complete graphs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

__all__ = [
    "IndeterminateSignError",
    "OracleDisagreement",
    "LayerWeights",
    "SignPattern",
    "MultiplexState",
    "BalanceReport",
    "sign_pattern",
    "triad_balanced",
    "triad_balance_fraction",
    "layer_balanced_triads",
    "layer_balanced_cycles",
    "node_balanced",
    "multiplex_balance_report",
    "enumerate_balanced_configs",
]

DEFAULT_EPS = 0.5
ORACLE_MAX_N = 6


class IndeterminateSignError(ValueError):
    """A complete-graph check met an edge with sign 0."""


class OracleDisagreement(AssertionError):
    """The triad and two-colouring checkers disagreed on a configuration."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _check_square_symmetric(a: np.ndarray, what: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError(f"{what} must be symmetric")
    if np.any(np.diag(a) != 0):
        raise ValueError(f"{what} must have a zero diagonal")


@dataclass(frozen=True)
class LayerWeights:
    """Link weights of one domain layer.

    ``w`` is copied and made read-only on construction.
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        _check_square_symmetric(w, "weight matrix")
        if w.shape[0] < 3:
            raise ValueError(f"a layer needs at least 3 nodes, got {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(np.abs(w) > 1):
            raise ValueError("weights must lie in [-1, 1]")
        object.__setattr__(self, "w", _frozen(w))

    @property
    def n(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class SignPattern:
    """Symmetric matrix of edge signs in {-1, 0, +1}; 0 means no edge."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s)
        if not np.all(np.isin(s, (-1, 0, 1))):
            raise ValueError("sign entries must be -1, 0 or +1")
        s = s.astype(np.int8)
        _check_square_symmetric(s, "sign matrix")
        object.__setattr__(self, "s", _frozen(s))

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @property
    def complete(self) -> bool:
        """True when every off-diagonal entry is nonzero."""
        return int(np.count_nonzero(self.s)) == self.n * (self.n - 1)

    @classmethod
    def from_edges(cls, n: int, edges) -> "SignPattern":
        """Build from ``(i, j, sign)`` triples; unlisted pairs are absent."""
        s = np.zeros((n, n), dtype=np.int8)
        for i, j, v in edges:
            s[i, j] = s[j, i] = v
        return cls(s)


@dataclass(frozen=True)
class MultiplexState:
    """Two layers over the same node set."""

    layer1: LayerWeights
    layer2: LayerWeights

    def __post_init__(self):
        if self.layer1.n != self.layer2.n:
            raise ValueError(
                f"layers must share the node set, got {self.layer1.n} and {self.layer2.n} nodes"
            )

    @property
    def n(self) -> int:
        return self.layer1.n

    @classmethod
    def from_arrays(cls, w1, w2) -> "MultiplexState":
        return cls(LayerWeights(w1), LayerWeights(w2))

    def swapped(self) -> "MultiplexState":
        return MultiplexState(self.layer2, self.layer1)


@dataclass(frozen=True)
class BalanceReport:
    """Balance diagnostics of a bilayer state.

    ``triad_fraction[k]`` is ``None`` when layer ``k`` has a zero sign,
    in which case the layer is reported unbalanced.
    """

    layer_balanced: tuple[bool, bool]
    node_balanced: tuple[tuple[bool, ...], tuple[bool, ...]]
    triad_fraction: tuple[float | None, float | None]
    layers_sign_identical: bool
    multiplex_balanced: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "multiplex_balanced", all(self.layer_balanced))


def sign_pattern(w, eps: float = DEFAULT_EPS) -> SignPattern:
    """Threshold weights into signs: ``sign(w)`` where ``|w| > eps``, else 0."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    a = w.w if isinstance(w, LayerWeights) else np.asarray(w, dtype=float)
    s = np.where(np.abs(a) > eps, np.sign(a), 0).astype(np.int8)
    return SignPattern(s)


def _signs(s) -> np.ndarray:
    return s.s if isinstance(s, SignPattern) else np.asarray(s)


def triad_balanced(s, i: int, j: int, k: int) -> bool | None:
    """Balance of the triangle ``(i, j, k)``; ``None`` if an edge has sign 0."""
    if len({i, j, k}) != 3:
        raise ValueError(f"triad needs three distinct nodes, got ({i}, {j}, {k})")
    a = _signs(s)
    prod = int(a[i, j]) * int(a[j, k]) * int(a[k, i])
    if prod == 0:
        return None
    return prod > 0


@lru_cache(maxsize=None)
def _triads(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx = np.array(list(combinations(range(n), 3)), dtype=np.intp).reshape(-1, 3)
    return idx[:, 0], idx[:, 1], idx[:, 2]


def _triad_products(a: np.ndarray) -> np.ndarray:
    i, j, k = _triads(a.shape[0])
    return a[i, j].astype(int) * a[j, k] * a[k, i]


def _require_complete(s: SignPattern, what: str) -> np.ndarray:
    a = _signs(s)
    off = ~np.eye(a.shape[0], dtype=bool)
    if np.any(a[off] == 0):
        raise IndeterminateSignError(f"{what} requires a complete signed graph (found sign 0)")
    return a


def triad_balance_fraction(s) -> float:
    """Fraction of the ``C(n, 3)`` triangles with positive sign product."""
    a = _require_complete(s, "triad_balance_fraction")
    return float(np.count_nonzero(_triad_products(a) > 0)) / comb(a.shape[0], 3)


def layer_balanced_triads(s) -> bool:
    """Complete-graph balance: every triangle has positive sign product."""
    a = _require_complete(s, "layer_balanced_triads")
    return bool(np.all(_triad_products(a) > 0))


def _two_colour(a: np.ndarray, nodes=None) -> bool:
    # Cartwright-Harary: balanced iff 2-colourable with '+' inside and '-' across.
    nodes = range(a.shape[0]) if nodes is None else nodes
    nodes = list(nodes)
    allowed = set(nodes)
    colour: dict[int, int] = {}
    for root in nodes:
        if root in colour:
            continue
        colour[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(a[u]):
                v = int(v)
                if v not in allowed:
                    continue
                want = colour[u] if a[u, v] > 0 else 1 - colour[u]
                if v not in colour:
                    colour[v] = want
                    queue.append(v)
                elif colour[v] != want:
                    return False
    return True


def layer_balanced_cycles(s) -> bool:
    """General-graph balance: every cycle has positive sign product.

    Decided by two-colouring each connected component; absent edges
    (sign 0) impose no constraint.
    """
    return _two_colour(_signs(s))


def node_balanced(s, i: int) -> bool:
    """Balance of the close neighbourhood of node ``i``.

    The neighbourhood is ``i`` plus every node sharing an edge with it,
    together with all edges among those nodes.
    """
    a = _signs(s)
    hood = [i, *(int(v) for v in np.flatnonzero(a[i]) if v != i)]
    return _two_colour(a, hood)


def multiplex_balance_report(m: MultiplexState, eps: float = 0.0) -> BalanceReport:
    """Per-layer, per-node and multiplex balance of a bilayer state."""
    patterns = (sign_pattern(m.layer1, eps), sign_pattern(m.layer2, eps))
    balanced = []
    fractions = []
    nodes = []
    for p in patterns:
        if p.complete:
            balanced.append(layer_balanced_triads(p))
            fractions.append(triad_balance_fraction(p))
        else:
            balanced.append(False)
            fractions.append(None)
        nodes.append(tuple(node_balanced(p, i) for i in range(p.n)))
    identical = (
        patterns[0].complete
        and patterns[1].complete
        and bool(np.array_equal(patterns[0].s, patterns[1].s))
    )
    return BalanceReport(
        layer_balanced=(balanced[0], balanced[1]),
        node_balanced=(nodes[0], nodes[1]),
        triad_fraction=(fractions[0], fractions[1]),
        layers_sign_identical=identical,
    )


def enumerate_balanced_configs(n: int) -> int:
    """Count balanced sign assignments on ``K_n`` by exhaustive enumeration.

    Every one of the ``2**C(n, 2)`` assignments is checked with both the
    triad and the two-colouring checker, and :class:`OracleDisagreement`
    is raised on the first configuration where they differ.
    """
    if not 3 <= n <= ORACLE_MAX_N:
        raise ValueError(f"n must be in [3, {ORACLE_MAX_N}], got {n}")
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    count = 0
    a = np.zeros((n, n), dtype=np.int8)
    for code in range(1 << m):
        bits = (code >> np.arange(m)) & 1
        a[iu] = 1 - 2 * bits
        a.T[iu] = a[iu]
        by_triads = bool(np.all(_triad_products(a) > 0))
        by_cycles = _two_colour(a)
        if by_triads != by_cycles:
            raise OracleDisagreement(
                f"checkers disagree on n={n} configuration {code:#x}: "
                f"triads={by_triads}, cycles={by_cycles}"
            )
        count += by_triads
    return count
