"""Per-address ego transaction multigraphs and their 16 summary metrics."""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .dataset_io import AddressRecord, LabeledDataset, TransactionRecord, ensure_dir

WEI_PER_ETHER = 10 ** 18

FEATURE_NAMES = (
    "vertex_number", "edge_number", "in_edge_number", "out_edge_number",
    "vertex_degree", "vertex_in_degree", "vertex_out_degree",
    "total_amount", "total_in_amount", "total_out_amount",
    "avg_amount", "avg_in_amount", "avg_out_amount",
    "amount_variance", "in_amount_variance", "out_amount_variance",
)


@dataclass(frozen=True)
class Edge:
    sender: str
    recipient: str
    amount_wei: int
    tx_id: str


@dataclass(frozen=True)
class TransactionGraph:
    ego: str
    edges: Tuple[Edge, ...]

    @property
    def vertices(self) -> frozenset:
        vs = {self.ego}
        for e in self.edges:
            vs.add(e.sender)
            vs.add(e.recipient)
        return frozenset(vs)

    def is_out(self, edge: Edge) -> bool:
        # self-transfers count as outgoing
        return edge.sender == self.ego

    def in_edges(self) -> List[Edge]:
        return [e for e in self.edges if not self.is_out(e)]

    def out_edges(self) -> List[Edge]:
        return [e for e in self.edges if self.is_out(e)]

    def degrees(self) -> Dict[str, Tuple[int, int]]:
        """``vertex -> (in_degree, out_degree)`` counting parallel edges."""
        deg = {v: [0, 0] for v in self.vertices}
        for e in self.edges:
            deg[e.recipient][0] += 1
            deg[e.sender][1] += 1
        return {v: (i, o) for v, (i, o) in deg.items()}


class TransactionIndex:
    """Address -> transactions touching it, built once and read many times."""

    def __init__(self, txs: Iterable[TransactionRecord]):
        self._by_address: Dict[str, List[TransactionRecord]] = defaultdict(list)
        for tx in txs:
            self._by_address[tx.sender].append(tx)
            if tx.recipient != tx.sender:
                self._by_address[tx.recipient].append(tx)

    def get(self, address: str) -> List[TransactionRecord]:
        return self._by_address.get(address, [])


def build_graph(ego: str, txs: Iterable[TransactionRecord]) -> TransactionGraph:
    ego = ego.lower()
    edges = tuple(
        Edge(tx.sender, tx.recipient, tx.value_wei, tx.tx_id)
        for tx in txs
        if tx.sender == ego or tx.recipient == ego
    )
    return TransactionGraph(ego, edges)


def _to_ether(wei: int, count: int = 1) -> float:
    # int / int true division is correctly rounded
    return wei / (count * WEI_PER_ETHER) if count else 0.0


def _amount_stats(amounts: Sequence[int]) -> Tuple[float, float, float]:
    """(total, mean, population variance) in ether, from exact integer sums."""
    n = len(amounts)
    if n == 0:
        return 0.0, 0.0, 0.0
    s1 = sum(amounts)
    s2 = sum(a * a for a in amounts)
    var_num = n * s2 - s1 * s1
    return _to_ether(s1), _to_ether(s1, n), var_num / (n * n * WEI_PER_ETHER ** 2)


def graph_features(g: TransactionGraph) -> np.ndarray:
    """The 16 metrics in :data:`FEATURE_NAMES` order.

    Degree metrics average over every vertex, ego included. Amounts are
    converted to ether only after exact integer aggregation.
    """
    v = len(g.vertices)
    ins = [e.amount_wei for e in g.in_edges()]
    outs = [e.amount_wei for e in g.out_edges()]
    n_edges = len(ins) + len(outs)
    total, avg, var = _amount_stats(ins + outs)
    t_in, a_in, v_in = _amount_stats(ins)
    t_out, a_out, v_out = _amount_stats(outs)
    return np.array([
        v, n_edges, len(ins), len(outs),
        2 * n_edges / v, n_edges / v, n_edges / v,
        total, t_in, t_out,
        avg, a_in, a_out,
        var, v_in, v_out,
    ], dtype=np.float64)


def build_graphs(addresses: Sequence[AddressRecord], txs: Sequence[TransactionRecord]) -> List[TransactionGraph]:
    index = TransactionIndex(txs)
    return [build_graph(a.account, index.get(a.account)) for a in addresses]


def featurize_graphs(graphs: Sequence[TransactionGraph], labels: Mapping[str, int]) -> LabeledDataset:
    rows = [graph_features(g) for g in graphs]
    matrix = np.vstack(rows) if rows else np.zeros((0, len(FEATURE_NAMES)))
    return LabeledDataset(
        [g.ego for g in graphs], matrix, [labels.get(g.ego, -1) for g in graphs],
        list(FEATURE_NAMES), notes="amounts in ether (wei / 10**18); population variance",
    )


# -- persistence: one edge-list file per address plus an index --------------

def write_graphs(graphs: Sequence[TransactionGraph], labels: Mapping[str, int], out_dir) -> None:
    out = ensure_dir(out_dir)
    with open(out / "index.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["account", "label", "edges_file"])
        for g in graphs:
            w.writerow([g.ego, labels.get(g.ego, -1), f"{g.ego}.edges.csv"])
    for g in graphs:
        with open(out / f"{g.ego}.edges.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tx_id", "from", "to", "value_wei"])
            for e in g.edges:
                w.writerow([e.tx_id, e.sender, e.recipient, e.amount_wei])


def read_graphs(in_dir) -> Tuple[List[TransactionGraph], Dict[str, int]]:
    root = Path(in_dir)
    graphs, labels = [], {}
    with open(root / "index.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            ego = row["account"]
            labels[ego] = int(row["label"])
            with open(root / row["edges_file"], newline="", encoding="utf-8") as ef:
                edges = tuple(
                    Edge(r["from"], r["to"], int(r["value_wei"]), r["tx_id"])
                    for r in csv.DictReader(ef)
                )
            graphs.append(TransactionGraph(ego, edges))
    return graphs, labels
