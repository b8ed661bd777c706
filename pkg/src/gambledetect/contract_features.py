"""Opcode-occurrence features for contracts."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .dataset_io import ContractRecord, LabeledDataset, schema_digest
from .evm_disasm import InstructionStream, canonical_mnemonics, disassemble

# rarely used families dropped from the default schema
_DISCARDED = re.compile(r"^(PUSH([5-9]|[12][0-9]|3[0-2])|DUP([5-9]|1[0-6])|SWAP([5-9]|1[0-6]))$")


@dataclass(frozen=True)
class FeatureSchema:
    mnemonics: Tuple[str, ...]

    def __post_init__(self):
        if len(set(self.mnemonics)) != len(self.mnemonics):
            raise ValueError("duplicate mnemonic in feature schema")
        known = set(canonical_mnemonics())
        unknown = [m for m in self.mnemonics if m not in known]
        if unknown:
            raise ValueError(f"mnemonics not in opcode table: {', '.join(unknown)}")

    def __len__(self) -> int:
        return len(self.mnemonics)

    def __contains__(self, mnemonic) -> bool:
        return mnemonic in self.mnemonics

    @property
    def digest(self) -> str:
        return schema_digest(self.mnemonics)

    @classmethod
    def from_file(cls, path) -> "FeatureSchema":
        names = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
        return cls(tuple(n for n in names if n and not n.startswith("#")))

    def to_file(self, path) -> None:
        Path(path).write_text("\n".join(self.mnemonics) + "\n", encoding="utf-8")


def default_schema() -> FeatureSchema:
    """All table mnemonics except PUSH5-32, DUP5-16 and SWAP5-16, sorted."""
    return FeatureSchema(tuple(sorted(m for m in canonical_mnemonics() if not _DISCARDED.match(m))))


def featurize_contract(stream: InstructionStream | Iterable[str], schema: FeatureSchema) -> np.ndarray:
    """Occurrence count of every schema mnemonic in ``stream``."""
    mnemonics = stream.mnemonics() if isinstance(stream, InstructionStream) else stream
    counts = Counter(mnemonics)
    return np.array([counts.get(m, 0) for m in schema.mnemonics], dtype=np.int64)


def featurize_contracts(records: Sequence[ContractRecord], schema: FeatureSchema) -> LabeledDataset:
    rows: List[np.ndarray] = [featurize_contract(disassemble(r.code()), schema) for r in records]
    matrix = np.vstack(rows).astype(np.float64) if rows else np.zeros((0, len(schema)))
    return LabeledDataset(
        [r.account for r in records], matrix, [r.label for r in records],
        list(schema.mnemonics), notes="opcode occurrence counts",
    )
