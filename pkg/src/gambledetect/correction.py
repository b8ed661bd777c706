"""Feedback correction of contract predictions using address predictions.

A contract predicted gambling is flipped to non-gambling when fewer than
``threshold`` of its associated, scored addresses are predicted gambling.
Contracts without any scored associated address are left alone, and no
contract is ever flipped towards gambling.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Set

from .dataset_io import TransactionRecord

DEFAULT_THRESHOLD = 0.8


def build_association(txs: Iterable[TransactionRecord], contracts: Iterable[str],
                      addresses: Iterable[str]) -> Dict[str, Set[str]]:
    """contract -> addresses that sent to or received from it at least once."""
    contracts = set(contracts)
    addresses = set(addresses) - contracts
    index: Dict[str, Set[str]] = {c: set() for c in contracts}
    for tx in txs:
        if tx.recipient in contracts and tx.sender in addresses:
            index[tx.recipient].add(tx.sender)
        if tx.sender in contracts and tx.recipient in addresses:
            index[tx.sender].add(tx.recipient)
    return index


@dataclass(frozen=True)
class CorrectionEntry:
    contract: str
    prior: int
    fraction: Optional[float]   # None when there was no evidence
    n_scored: int
    posterior: int

    @property
    def flipped(self) -> bool:
        return self.prior != self.posterior


def apply_correction(contract_preds: Mapping[str, int], address_preds: Mapping[str, int],
                     index: Mapping[str, Set[str]], threshold: float = DEFAULT_THRESHOLD) -> List[CorrectionEntry]:
    report = []
    for contract, prior in contract_preds.items():
        prior = int(prior)
        fraction, scored = None, 0
        posterior = prior
        if prior == 1:
            votes = [address_preds[a] for a in index.get(contract, ()) if a in address_preds]
            scored = len(votes)
            if scored:
                fraction = sum(1 for v in votes if v == 1) / scored
                if fraction < threshold:
                    posterior = 0
        report.append(CorrectionEntry(contract, prior, fraction, scored, posterior))
    return report


def corrected_predictions(report: Iterable[CorrectionEntry]) -> Dict[str, int]:
    return {e.contract: e.posterior for e in report}


def write_report(report: Iterable[CorrectionEntry], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["contract", "prior", "gambling_fraction", "scored_addresses", "posterior", "flipped"])
        for e in report:
            frac = "" if e.fraction is None else repr(e.fraction)
            w.writerow([e.contract, e.prior, frac, e.n_scored, e.posterior, int(e.flipped)])
