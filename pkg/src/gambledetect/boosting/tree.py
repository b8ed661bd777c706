"""Histogram-based, best-first (leaf-wise) regression tree on gradient statistics.

For a candidate split with weighted sums (G_L, H_L) and (G_R, H_R):

    gain = 1/2 [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - (G_L+G_R)^2/(H_L+H_R+lam)] - gamma

and a leaf holding (G, H) outputs ``-G / (H + lam)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .binning import BinMapper
from .bundling import Bundling, efb_bundle
from .config import TrainingConfig
from .objective import GradientState


class BinnedData:
    """Training matrix binned once, optionally packed with feature bundling.

    Histograms are built over bundle columns when bundling is on and then
    unpacked per feature; the zero bin of every feature is always derived as
    ``node total - other bins`` so both routes give bit-identical histograms
    when bundles are conflict-free.
    """

    def __init__(self, X: np.ndarray, max_bins: int = 255, enable_efb: bool = False,
                 conflict_threshold: float = 0.0, mapper: Optional[BinMapper] = None):
        X = np.asarray(X, dtype=np.float64)
        self.mapper = mapper or BinMapper.fit(X, max_bins)
        self.bins = self.mapper.transform(X)
        self.n_rows, self.n_features = self.bins.shape
        self.n_bins = self.mapper.max_bins + 1
        self.n_cuts = self.mapper.n_cuts
        self._col_offsets = (np.arange(self.n_features) * self.n_bins).astype(np.int64)
        self.bundling: Optional[Bundling] = None
        self.bundled: Optional[np.ndarray] = None
        if enable_efb and self.n_features > 1 and self.n_rows:
            _, bundled, bundling = efb_bundle(self.bins.astype(np.int64), conflict_threshold)
            if len(bundling.bundles) < self.n_features:
                self.bundling, self.bundled = bundling, bundled
                widths = np.array(bundling.bundle_widths(), dtype=np.int64)
                self._bundle_offsets = np.concatenate([[0], np.cumsum(widths)[:-1]])
                self._bundle_total = int(widths.sum())
                self._gather, self._gather_mask = self._expansion_index()

    def _expansion_index(self):
        """Positions in the flat bundle histogram feeding each (feature, bin)."""
        b = self.bundling
        k = np.arange(self.n_bins)
        base = self._bundle_offsets[b.bundle_of] + b.offsets
        gather = base[:, None] + k[None, :]
        mask = (k[None, :] >= 1) & (k[None, :] <= b.max_values[:, None])
        return np.where(mask, gather, 0), mask

    def histograms(self, rows: np.ndarray, gw: np.ndarray, hw: np.ndarray):
        """Per-feature (G, H, count) histograms, each shaped ``(n_features, n_bins)``."""
        F, B = self.n_features, self.n_bins
        if self.bundled is None:
            flat = (self.bins[rows].astype(np.int64) + self._col_offsets).ravel()
            G = np.bincount(flat, weights=np.repeat(gw, F), minlength=F * B).reshape(F, B)
            H = np.bincount(flat, weights=np.repeat(hw, F), minlength=F * B).reshape(F, B)
            C = np.bincount(flat, minlength=F * B).reshape(F, B)
        else:
            nb = self.bundled.shape[1]
            flat = (self.bundled[rows] + self._bundle_offsets).ravel()
            total = self._bundle_total
            Gb = np.bincount(flat, weights=np.repeat(gw, nb), minlength=total)
            Hb = np.bincount(flat, weights=np.repeat(hw, nb), minlength=total)
            Cb = np.bincount(flat, minlength=total)
            m = self._gather_mask
            G = np.where(m, Gb[self._gather], 0.0)
            H = np.where(m, Hb[self._gather], 0.0)
            C = np.where(m, Cb[self._gather], 0)
        G[:, 0] = gw.sum() - G[:, 1:].sum(axis=1)
        H[:, 0] = hw.sum() - H[:, 1:].sum(axis=1)
        C[:, 0] = len(rows) - C[:, 1:].sum(axis=1)
        return G, H, C


@dataclass
class Tree:
    feature: np.ndarray        # -1 marks a leaf
    threshold: np.ndarray      # go left when x <= threshold
    bin_threshold: np.ndarray  # same test on binned data
    default_left: np.ndarray   # where NaN goes
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray          # leaf weight (0 on internal nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature < 0))

    def _route(self, n, column, go_left):
        node = np.zeros(n, dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            cur = node[active]
            left = go_left(active, self.feature[cur], cur)
            node[active] = np.where(left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return node

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of a raw feature matrix."""
        X = np.asarray(X, dtype=np.float64)

        def go_left(rows, feats, cur):
            x = X[rows, feats]
            return np.where(np.isnan(x), self.default_left[cur], x <= self.threshold[cur])

        return self._route(len(X), X, go_left)

    def apply_binned(self, bins: np.ndarray, missing_bin: int) -> np.ndarray:
        def go_left(rows, feats, cur):
            b = bins[rows, feats]
            return np.where(b == missing_bin, self.default_left[cur], b <= self.bin_threshold[cur])

        return self._route(len(bins), bins, go_left)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def predict_binned(self, bins: np.ndarray, missing_bin: int) -> np.ndarray:
        return self.value[self.apply_binned(bins, missing_bin)]

    def split_features(self) -> np.ndarray:
        return self.feature[self.feature >= 0]


@dataclass
class _Leaf:
    node: int
    pos: np.ndarray            # positions into the sampled row array
    G: float
    H: float
    hist: tuple = None
    gain: float = -np.inf
    feature: int = -1
    bin: int = -1
    default_left: bool = True


def _best_split(leaf: _Leaf, n_cuts: np.ndarray, cfg: TrainingConfig) -> None:
    G, H, C = leaf.hist
    miss = G.shape[1] - 1
    n = len(leaf.pos)
    lam = cfg.l2_reg
    cg = np.cumsum(G[:, :miss], axis=1)
    ch = np.cumsum(H[:, :miss], axis=1)
    cc = np.cumsum(C[:, :miss], axis=1)
    # last axis: 0 = missing goes left, 1 = missing goes right
    GL = np.stack([cg + G[:, miss:], cg], axis=2)
    HL = np.stack([ch + H[:, miss:], ch], axis=2)
    CL = np.stack([cc + C[:, miss:], cc], axis=2)
    GR, HR, CR = leaf.G - GL, leaf.H - HL, n - CL
    parent = leaf.G * leaf.G / (leaf.H + lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent) - cfg.min_split_gain
    b = np.arange(miss)
    valid = (b[None, :] <= n_cuts[:, None])[:, :, None]
    valid = valid & (CL >= cfg.min_samples_leaf) & (CR >= cfg.min_samples_leaf)
    gain = np.where(valid & np.isfinite(gain), gain, -np.inf)
    # first maximum in (feature, bin, direction) order
    k = int(np.argmax(gain))
    best = gain.flat[k]
    if best > 0.0:
        f, rem = divmod(k, miss * 2)
        leaf.gain, leaf.feature = float(best), int(f)
        leaf.bin, leaf.default_left = int(rem // 2), rem % 2 == 0
    else:
        leaf.gain = -np.inf


def grow_tree(data, grads: GradientState, config: TrainingConfig,
              rows: Optional[np.ndarray] = None, weights: Optional[np.ndarray] = None) -> Tree:
    """Fit one tree to (weighted) gradient statistics of ``rows``.

    ``data`` is a :class:`BinnedData` or a raw matrix (binned on the spot).
    ``grads`` is indexed by absolute row number.
    """
    if not isinstance(data, BinnedData):
        data = BinnedData(data, config.max_bins, config.enable_efb, config.efb_conflict_threshold)
    rows = np.arange(data.n_rows) if rows is None else np.asarray(rows, dtype=np.int64)
    w = np.ones(len(rows)) if weights is None else np.asarray(weights, dtype=np.float64)
    gw = grads.grad[rows] * w
    hw = grads.hess[rows] * w
    lam = config.l2_reg
    mapper = data.mapper

    feature: List[int] = [-1]
    bin_thr: List[int] = [0]
    thr: List[float] = [0.0]
    dleft: List[bool] = [True]
    left: List[int] = [-1]
    right: List[int] = [-1]
    value: List[float] = [0.0]

    def make_leaf(node, pos, hist=None):
        leaf = _Leaf(node, pos, float(gw[pos].sum()), float(hw[pos].sum()))
        value[node] = -leaf.G / (leaf.H + lam) if leaf.H + lam > 0 else 0.0
        if len(pos) >= 2 * config.min_samples_leaf:
            leaf.hist = hist if hist is not None else data.histograms(rows[pos], gw[pos], hw[pos])
            _best_split(leaf, data.n_cuts, config)
        return leaf

    leaves = [make_leaf(0, np.arange(len(rows)))]
    while len(leaves) < config.max_leaves:
        best = max(leaves, key=lambda lf: (lf.gain, -lf.node))
        if not best.gain > 0.0:
            break
        leaves.remove(best)
        col = data.bins[rows[best.pos], best.feature]
        missing = col == mapper.missing_bin
        go_left = np.where(missing, best.default_left, col <= best.bin)
        lpos, rpos = best.pos[go_left], best.pos[~go_left]

        node = best.node
        lid, rid = len(feature), len(feature) + 1
        feature[node], bin_thr[node], dleft[node] = best.feature, best.bin, best.default_left
        thr[node] = mapper.threshold(best.feature, best.bin)
        left[node], right[node], value[node] = lid, rid, 0.0
        for _ in range(2):
            feature.append(-1); bin_thr.append(0); thr.append(0.0); dleft.append(True)
            left.append(-1); right.append(-1); value.append(0.0)

        # build the smaller child's histogram, derive the larger by subtraction
        small_is_left = len(lpos) <= len(rpos)
        spos = lpos if small_is_left else rpos
        needs = (len(lpos) >= 2 * config.min_samples_leaf) or (len(rpos) >= 2 * config.min_samples_leaf)
        small_hist = large_hist = None
        if needs:
            small_hist = data.histograms(rows[spos], gw[spos], hw[spos])
            large_hist = tuple(p - s for p, s in zip(best.hist, small_hist))
        lh, rh = (small_hist, large_hist) if small_is_left else (large_hist, small_hist)
        leaves.append(make_leaf(lid, lpos, lh))
        leaves.append(make_leaf(rid, rpos, rh))

    return Tree(
        np.array(feature, dtype=np.int64), np.array(thr, dtype=np.float64),
        np.array(bin_thr, dtype=np.int64), np.array(dleft, dtype=bool),
        np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )
