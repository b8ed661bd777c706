"""Synthetic stand-ins for the contract/address/transaction corpus.

Used for tests, benchmarks and the demo pipeline. The generator plants the
signals the detector is meant to find (gambling contracts lean on
CALLDATACOPY/EXP/BALANCE and block-derived randomness; gamblers repeat
near-identical payments to the same pools) and mixes in deliberate overlap so
that neither task is trivially separable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .dataset_io import (AddressRecord, ContractRecord, TransactionRecord, ensure_dir, write_addresses,
                         write_contracts, write_transactions)
from .evm_disasm import load_opcode_table

WEI = 10 ** 18

_COMMON = {
    "PUSH1": 40, "PUSH2": 18, "PUSH4": 4, "PUSH20": 1.5, "PUSH32": 1, "DUP1": 10, "DUP2": 8, "DUP3": 4,
    "DUP4": 2, "DUP6": 1, "SWAP1": 9, "SWAP2": 4, "SWAP3": 2, "SWAP7": 0.5, "POP": 10, "MSTORE": 6,
    "MLOAD": 5, "JUMPDEST": 8, "JUMP": 5, "JUMPI": 5, "ADD": 5, "SUB": 3, "MUL": 2, "DIV": 2, "AND": 5,
    "OR": 1.5, "EQ": 3, "ISZERO": 6, "LT": 2, "GT": 2, "NOT": 1, "SLOAD": 4, "SSTORE": 2, "CALLER": 1.5,
    "CALLVALUE": 1, "CALLDATALOAD": 2, "CALLDATASIZE": 1, "SHA3": 2, "RETURN": 1, "REVERT": 1.5,
    "STOP": 1, "LOG1": 0.3, "LOG3": 0.6, "CODECOPY": 0.3, "SHR": 0.6, "SHL": 0.4, "EXTCODESIZE": 0.3,
    "CALL": 0.5, "GAS": 0.6, "RETURNDATASIZE": 0.4, "ADDRESS": 0.3,
}
# extra mass on top of _COMMON, per class
_GAMBLING = {"CALLDATACOPY": 2.0, "EXP": 1.6, "BALANCE": 1.2, "TIMESTAMP": 0.8, "BLOCKHASH": 0.5,
             "NUMBER": 0.6, "DIFFICULTY": 0.4, "MOD": 1.5, "CALL": 0.8, "SHA3": 1.5, "ADDMOD": 0.2}
_OTHER = {"LOG3": 1.5, "LOG2": 0.6, "SSTORE": 1.5, "CALLER": 1.0, "EQ": 1.0, "SLOAD": 1.5,
          "STATICCALL": 0.3, "EXP": 0.4, "CALLDATACOPY": 0.3, "BALANCE": 0.2}


def _distribution(names, rng, gambling: bool, strength: float):
    w = np.array([_COMMON.get(m, 0.0) for m in names])
    extra = _GAMBLING if gambling else _OTHER
    w = w + strength * np.array([extra.get(m, 0.0) for m in names])
    # per-contract idiosyncrasy
    w = w * rng.gamma(4.0, 0.25, size=len(w))
    return w / w.sum()


def synth_bytecode(rng: np.random.Generator, gambling: bool, strength: float = 1.0) -> str:
    table = load_opcode_table()
    by_name = {m: (b, n) for b, (m, n) in table.items()}
    names = sorted(set(_COMMON) | set(_GAMBLING) | set(_OTHER))
    p = _distribution(names, rng, gambling, strength)
    length = int(rng.lognormal(6.3, 0.6))
    out = bytearray()
    for idx in rng.choice(len(names), size=length, p=p):
        op, width = by_name[names[idx]]
        out.append(op)
        out.extend(rng.integers(0, 256, size=width, dtype=np.uint8).tobytes())
    # trailing metadata blob, decoded as noise
    out.extend(bytes.fromhex("a265627a7a72315820"))
    out.extend(rng.integers(0, 256, size=34, dtype=np.uint8).tobytes())
    if rng.random() < 0.1:
        out.append(0x7F)  # dangling PUSH32 at the very end
    return "0x" + out.hex()


def _account(rng) -> str:
    return "0x" + rng.integers(0, 256, size=20, dtype=np.uint8).tobytes().hex()


@dataclass
class SyntheticCorpus:
    contracts: List[ContractRecord]
    addresses: List[AddressRecord]
    transactions: List[TransactionRecord]


def make_corpus(n_gambling_contracts: int = 60, n_other_contracts: int = 240, n_unlabeled_contracts: int = 60,
                n_gamblers: int = 600, n_other_addresses: int = 2400, n_unlabeled_addresses: int = 300,
                seed: int = 0) -> SyntheticCorpus:
    """A labeled corpus with roughly 20% positives in both tasks."""
    rng = np.random.default_rng(seed)

    def contract(label, truth):
        # a few contracts look like the other class
        looks_gambling = truth if rng.random() > 0.12 else not truth
        return ContractRecord(_account(rng), synth_bytecode(rng, looks_gambling, rng.uniform(0.3, 1.4)), label)

    contracts = [contract(1, True) for _ in range(n_gambling_contracts)]
    contracts += [contract(0, False) for _ in range(n_other_contracts)]
    hidden = rng.random(n_unlabeled_contracts) < 0.2
    contracts += [contract(-1, bool(h)) for h in hidden]
    truth_gambling = [c.account for c, t in zip(contracts, [True] * n_gambling_contracts
                                                  + [False] * n_other_contracts + list(hidden)) if t]
    other_contracts = [c.account for c in contracts if c.account not in set(truth_gambling)]

    txs: List[TransactionRecord] = []
    counter = [0]

    def tx(src, dst, wei):
        counter[0] += 1
        txs.append(TransactionRecord(f"0x{counter[0]:064x}", src, dst, int(wei)))

    def ether(x):
        return int(round(x * 1e6)) * 10 ** 12

    peers = [_account(rng) for _ in range(400)]
    addresses = []

    def gambler(label):
        a = _account(rng)
        addresses.append(AddressRecord(a, label))
        pools = rng.choice(truth_gambling, size=min(len(truth_gambling), rng.integers(1, 4)), replace=False)
        stake = float(rng.choice([0.01, 0.05, 0.1, 0.2, 0.5, 1.0]))
        n_bets = int(rng.integers(1, 25))
        for _ in range(n_bets):
            pool = str(rng.choice(pools))
            tx(a, pool, ether(stake * rng.choice([1.0, 1.0, 1.0, 2.0])))
            if rng.random() < 0.3:
                tx(pool, a, ether(stake * rng.uniform(1.5, 3.0)))
        if rng.random() < 0.5:
            tx(str(rng.choice(peers)), a, ether(rng.lognormal(0, 1)))

    def ordinary(label):
        a = _account(rng)
        addresses.append(AddressRecord(a, label))
        for _ in range(int(rng.integers(1, 30))):
            r = rng.random()
            if r < 0.5:
                tx(a, str(rng.choice(peers)), ether(rng.lognormal(-1, 2)))
            elif r < 0.8:
                tx(str(rng.choice(peers)), a, ether(rng.lognormal(-1, 2)))
            else:
                tx(a, str(rng.choice(other_contracts)), ether(rng.lognormal(-3, 1.5)))
        if rng.random() < 0.1:
            # a casual visitor to a gambling pool
            tx(a, str(rng.choice(truth_gambling)), ether(rng.lognormal(-2, 1)))
        if rng.random() < 0.15:
            # salary-like repeated payments look gambler-ish
            dst = str(rng.choice(peers))
            amount = ether(float(rng.choice([0.1, 0.5, 1.0])))
            for _ in range(int(rng.integers(3, 12))):
                tx(a, dst, amount)

    for _ in range(n_gamblers):
        gambler(1)
    for _ in range(n_other_addresses):
        ordinary(0)
    for _ in range(n_unlabeled_addresses):
        (gambler if rng.random() < 0.2 else ordinary)(-1)

    contract_order = rng.permutation(len(contracts))
    address_order = rng.permutation(len(addresses))
    return SyntheticCorpus(
        [contracts[i] for i in contract_order],
        [addresses[i] for i in address_order],
        txs,
    )


def write_corpus(corpus: SyntheticCorpus, out_dir) -> Dict[str, str]:
    """Write contracts.csv, addresses.csv and transactions.csv; returns their paths."""
    out = ensure_dir(out_dir)
    paths = {k: str(out / f"{k}.csv") for k in ("contracts", "addresses", "transactions")}
    write_contracts(corpus.contracts, paths["contracts"])
    write_addresses(corpus.addresses, paths["addresses"])
    write_transactions(corpus.transactions, paths["transactions"])
    return paths


def make_imbalanced(n: int = 1500, n_features: int = 10, positive_rate: float = 0.2,
                    separation: float = 1.2, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Overlapping two-class problem with a nonlinear boundary and label noise."""
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < positive_rate).astype(np.int64)
    X = rng.normal(size=(n, n_features))
    shift = np.zeros(n_features)
    shift[: max(1, n_features // 3)] = separation
    X[y == 1] += shift
    # an interaction only the positives follow
    X[y == 1, -1] = np.abs(X[y == 1, -1]) * np.sign(X[y == 1, 0] + 0.1)
    flip = rng.random(n) < 0.05
    y[flip] = 1 - y[flip]
    return X, y
