"""Second-order regression trees (the boosting base learner).

Split search is exact greedy: every midpoint between consecutive distinct
feature values present in a node is a candidate.  The search is run level by
level with per-node histograms over each feature's sorted distinct values,
which enumerates precisely those candidates without re-sorting per node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, InvalidConfig

# relative slack below which a split gain counts as zero
_GAIN_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Array-encoded binary tree.  Node 0 is the root; ``feature == -1`` marks a leaf.

    An input goes left iff ``x[feature] < threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index reached by each row of ``X``."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D array, got shape {X.shape}")
        node = np.zeros(len(X), dtype=np.int64)
        internal = self.feature[node] >= 0
        while internal.any():
            rows = np.nonzero(internal)[0]
            nd = node[rows]
            f = self.feature[nd]
            go_left = X[rows, f] < self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            internal = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        def node(i):
            if self.feature[i] < 0:
                return {"leaf": float(self.value[i])}
            return {
                "feature": int(self.feature[i]),
                "threshold": float(self.threshold[i]),
                "left": node(self.left[i]),
                "right": node(self.right[i]),
            }
        return {"max_depth": self.max_depth, "root": node(0)}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        feature, threshold, left, right, value = [], [], [], [], []

        def add(n):
            i = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            if "leaf" in n:
                value[i] = float(n["leaf"])
            else:
                feature[i] = int(n["feature"])
                threshold[i] = float(n["threshold"])
                left[i] = add(n["left"])
                right[i] = add(n["right"])
            return i

        add(d["root"])
        return cls(
            np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=float),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            np.array(value, dtype=float),
            int(d["max_depth"]),
        )


class BinnedMatrix:
    """Integer codes of each column's sorted distinct values.

    Built once per boosting run and shared by every tree.  Columns come in
    blocks; a block either holds codes per row directly or, for pair data,
    holds codes per sample plus a row -> sample map, so histograms can be
    accumulated per sample first.
    """

    def __init__(self, X: np.ndarray):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] == 0:
            raise DimensionMismatch(f"expected an n x d array with d >= 1, got shape {X.shape}")
        self._setup(len(X), [(X, None)])

    @classmethod
    def from_pairs(cls, table: np.ndarray, first, second) -> "BinnedMatrix":
        """Rows ``[table[first[i]] | table[second[i]]]`` without materializing them."""
        table = np.asarray(table, dtype=float)
        if table.ndim != 2 or table.shape[1] == 0:
            raise DimensionMismatch(f"expected a k x d table, got shape {table.shape}")
        first = np.asarray(first, dtype=np.int64)
        second = np.asarray(second, dtype=np.int64)
        if first.shape != second.shape or first.ndim != 1:
            raise DimensionMismatch("pair index arrays must be 1-D and of equal length")
        self = cls.__new__(cls)
        self._setup(len(first), [(table, first), (table, second)])
        return self

    def _setup(self, n, blocks):
        self.n = n
        self.uniques = []
        col = 0
        raw = []
        for table, rows in blocks:
            tcodes = np.empty(table.shape, dtype=np.int64)
            for f in range(table.shape[1]):
                u, inv = np.unique(table[:, f], return_inverse=True)
                self.uniques.append(u)
                tcodes[:, f] = inv.ravel()
            raw.append((rows, tcodes, col))
            col += table.shape[1]
        self.d = col
        self.n_bins = np.array([len(u) for u in self.uniques], dtype=np.int64)
        # histograms are laid out (node, feature, bin) with bins padded to max_bins
        self.max_bins = int(self.n_bins.max())
        self.codes = np.hstack([t if rows is None else t[rows] for rows, t, _ in raw])
        self.codes_flat = self.codes.ravel()
        self.blocks = []
        for rows, tcodes, col in raw:
            d_b = tcodes.shape[1]
            padded = tcodes + np.arange(d_b) * self.max_bins
            self.blocks.append((rows, padded, col, d_b))

    def histograms(self, active, pos, m, weight_sets):
        """Per-node, per-feature, per-bin sums of each vector in ``weight_sets``.

        ``weight_sets`` holds arrays aligned with ``active`` (``None`` means
        counts).  Returns one ``(m, d, max_bins)`` array per entry.
        """
        nb = self.max_bins
        outs = [np.empty((m, self.d, nb)) for _ in weight_sets]
        pos_k = {}
        for rows, padded, col, d_b in self.blocks:
            stride = d_b * nb
            if rows is None:
                key = (padded[active] + (pos * stride)[:, None]).ravel()
                sums = [np.bincount(key, weights=None if w is None else np.repeat(w, d_b), minlength=m * stride)
                        for w in weight_sets]
            else:
                K = len(padded)
                if K not in pos_k:
                    pos_k[K] = pos * K
                key = pos_k[K] + rows[active]
                aggs = [np.bincount(key, weights=w, minlength=m * K) for w in weight_sets]
                key2 = (padded[None, :, :] + (np.arange(m) * stride)[:, None, None]).ravel()
                sums = [np.bincount(key2, weights=np.repeat(a, d_b), minlength=m * stride) for a in aggs]
            for out, hist in zip(outs, sums):
                out[:, col:col + d_b, :] = hist.reshape(m, d_b, nb)
        return outs


def _leaf_weight(G, H, reg_lambda):
    denom = H + reg_lambda
    return np.where(denom > 0, -G / np.where(denom > 0, denom, 1.0), 0.0)


def _score(G, H, reg_lambda):
    denom = H + reg_lambda
    return np.where(denom > 0, G * G / np.where(denom > 0, denom, 1.0), 0.0)


def grow_tree(
    binned: BinnedMatrix,
    g: np.ndarray,
    h: np.ndarray,
    max_depth: int,
    reg_lambda: float,
    min_child_weight: float,
) -> tuple[RegressionTree, np.ndarray]:
    """Grow one tree; returns it with the leaf node index of every training row."""
    n, nb = binned.n, binned.max_bins
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)

    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    value = [0.0]

    leaf_of = np.zeros(n, dtype=np.int64)  # final node id per row
    active = np.arange(n)  # rows still in an open node
    pos = np.zeros(n, dtype=np.int64)  # frontier slot of each active row
    frontier = [0]  # node ids of open nodes

    for depth in range(max_depth + 1):
        m = len(frontier)
        ga, ha = g[active], h[active]
        G = np.bincount(pos, weights=ga, minlength=m)
        H = np.bincount(pos, weights=ha, minlength=m)

        if depth == max_depth:
            split_ok = np.zeros(m, dtype=bool)
        else:
            Gb, Hb, Cb = binned.histograms(active, pos, m, (ga, ha, None))
            GL = np.cumsum(Gb, axis=2).reshape(m, -1)
            HL = np.cumsum(Hb, axis=2).reshape(m, -1)
            CL = np.cumsum(Cb, axis=2).reshape(m, -1)
            C = np.bincount(pos, minlength=m)
            GR = G[:, None] - GL
            HR = H[:, None] - HL
            parent = _score(G, H, reg_lambda)
            gain = 0.5 * (_score(GL, HL, reg_lambda) + _score(GR, HR, reg_lambda) - parent[:, None])
            valid = (CL > 0) & (CL < C[:, None]) & (HL >= min_child_weight) & (HR >= min_child_weight)
            gain[~valid] = -np.inf
            best = np.argmax(gain, axis=1)  # first maximum: lowest feature, then lowest value
            rows = np.arange(m)
            best_gain = gain[rows, best]
            scale = (parent + _score(GL[rows, best], HL[rows, best], reg_lambda)
                     + _score(GR[rows, best], HR[rows, best], reg_lambda))
            split_ok = best_gain > _GAIN_RTOL * scale

        weights = _leaf_weight(G, H, reg_lambda)
        next_frontier = []
        go_slot = np.full(m, -1, dtype=np.int64)  # slot of the left child; right is +1
        split_feat = np.zeros(m, dtype=np.int64)
        split_code = np.zeros(m, dtype=np.int64)
        for slot, node in enumerate(frontier):
            if not split_ok[slot]:
                value[node] = float(weights[slot])
                continue
            f, local = divmod(int(best[slot]), nb)
            # smallest value present in this node above the split bin
            nxt = local + 1 + int(np.flatnonzero(Cb[slot, f, local + 1:])[0])
            lo, hi = binned.uniques[f][local], binned.uniques[f][nxt]
            thr = lo + (hi - lo) / 2.0
            if not lo < thr:
                thr = hi
            feature[node] = f
            threshold[node] = float(thr)
            for _ in range(2):
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                value.append(0.0)
            left[node] = len(feature) - 2
            right[node] = len(feature) - 1
            go_slot[slot] = len(next_frontier)
            split_feat[slot] = f
            split_code[slot] = local
            next_frontier.extend([left[node], right[node]])

        still_open = go_slot[pos] >= 0
        closed = ~still_open
        leaf_of[active[closed]] = np.asarray(frontier, dtype=np.int64)[pos[closed]]
        if not next_frontier:
            break
        active = active[still_open]
        pos = pos[still_open]
        goes_left = np.take(binned.codes_flat, active * binned.d + split_feat[pos]) <= split_code[pos]
        pos = go_slot[pos] + np.where(goes_left, 0, 1)
        frontier = next_frontier

    tree = RegressionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=float),
        int(max_depth),
    )
    return tree, leaf_of


def fit_tree(
    X,
    gradients,
    hessians,
    max_depth: int = 6,
    reg_lambda: float = 1.0,
    min_child_weight: float = 1.0,
) -> RegressionTree:
    """Fit one tree to first/second-order loss derivatives.

    Split gain is ``0.5 * (GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam))``
    and leaf weights are ``-G/(H+lam)``.  Growth stops at ``max_depth``,
    when no split has positive gain, or when a child's hessian sum would
    fall below ``min_child_weight``.
    """
    X = np.asarray(X, dtype=float)
    g = np.asarray(gradients, dtype=float).ravel()
    h = np.asarray(hessians, dtype=float).ravel()
    if X.ndim != 2 or len(X) != len(g) or len(g) != len(h):
        raise DimensionMismatch(f"X {X.shape}, gradients {g.shape}, hessians {h.shape}")
    if len(g) == 0:
        raise InvalidConfig("cannot fit a tree to zero rows")
    if np.any(h < 0):
        raise InvalidConfig("hessians must be non-negative")
    if max_depth < 0:
        raise InvalidConfig("max_depth must be >= 0")
    tree, _ = grow_tree(BinnedMatrix(X), g, h, max_depth, reg_lambda, min_child_weight)
    return tree
