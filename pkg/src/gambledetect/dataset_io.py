"""Loading and persisting contract, address, transaction and feature-table files.

File formats (headered UTF-8 CSV):

* ``contracts.csv``     -- ``account,bytecode,label``
* ``addresses.csv``     -- ``account,label``
* ``transactions.csv``  -- ``tx_id,from,to,value_wei``
* ``<name>.features.csv`` -- ``entity_id,label,<feature>...`` plus ``<name>.schema``
"""
from __future__ import annotations

import csv
import hashlib
import io
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

LABELS = (1, 0, -1)
UNLABELED = -1

_ACCOUNT_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")
_HEX_RE = re.compile(r"^0x([0-9a-fA-F]{2})*$")
_ADDR_RE = re.compile(r"^0x[0-9a-fA-F]+$")


def _at_line(msg: str, line: int) -> str:
    # "invalid label: got '2'" -> "invalid label at line 3: got '2'"
    head, sep, tail = msg.partition(": ")
    return f"{head} at line {line}{sep}{tail}"


class DatasetError(ValueError):
    """File-level problem, or a collection of row-level problems.

    ``diagnostics`` holds ``(line_number, message)`` pairs; line numbers are
    1-based and count the header as line 1.
    """

    def __init__(self, message: str, diagnostics: Sequence[Tuple[int, str]] = ()):
        self.diagnostics = list(diagnostics)
        if self.diagnostics:
            details = "; ".join(_at_line(msg, ln) for ln, msg in self.diagnostics[:10])
            more = len(self.diagnostics) - 10
            if more > 0:
                details += f"; ... {more} more"
            message = f"{message}: {details}"
        super().__init__(message)


class SchemaMismatchError(ValueError):
    """Features and model (or two tables) disagree on the feature schema."""


@dataclass(frozen=True)
class ContractRecord:
    account: str
    bytecode: str
    label: int

    @property
    def unlabeled(self) -> bool:
        return self.label == UNLABELED

    def code(self) -> bytes:
        return bytes.fromhex(self.bytecode[2:])


@dataclass(frozen=True)
class AddressRecord:
    account: str
    label: int

    @property
    def unlabeled(self) -> bool:
        return self.label == UNLABELED


@dataclass(frozen=True)
class TransactionRecord:
    tx_id: str
    sender: str
    recipient: str
    value_wei: int


def _parse_label(raw: str) -> int:
    try:
        value = int(raw.strip())
    except ValueError:
        raise ValueError(f"invalid label: got {raw!r}") from None
    if value not in LABELS:
        raise ValueError(f"invalid label: got {raw!r}")
    return value


def _parse_account(raw: str) -> str:
    raw = raw.strip()
    if not _ACCOUNT_RE.match(raw):
        raise ValueError(f"malformed account: {raw!r} (expected 0x + 40 hex digits)")
    return raw.lower()


def _parse_address(raw: str, what: str) -> str:
    raw = raw.strip()
    if not raw:
        raise ValueError(f"empty {what} address")
    if not _ADDR_RE.match(raw):
        raise ValueError(f"malformed {what} address: {raw!r}")
    return raw.lower()


def _rows(path, expected: Sequence[str]):
    """Yield ``(line_number, row_dict)`` after checking the header."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(expected):
            raise DatasetError(
                f"{path}: missing or wrong header, expected {','.join(expected)!r}"
                f" got {','.join(header) if header else '<empty file>'!r}"
            )
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            yield reader.line_num, row


def _collect(path, expected, parse, diagnostics: Optional[list]):
    records, errors = [], []
    for line, row in _rows(path, expected):
        if len(row) != len(expected):
            errors.append((line, f"wrong field count: expected {len(expected)}, got {len(row)}"))
            continue
        try:
            records.append(parse(row))
        except ValueError as exc:
            errors.append((line, str(exc)))
    if errors:
        if diagnostics is None:
            raise DatasetError(f"{path}: {len(errors)} invalid row(s)", errors)
        diagnostics.extend(errors)
    return records


def load_contracts(path, diagnostics: Optional[list] = None) -> List[ContractRecord]:
    """Read ``contracts.csv``.

    Bad rows raise :class:`DatasetError` unless a ``diagnostics`` list is given,
    in which case they are appended there as ``(line, message)`` and skipped.
    """
    def parse(row):
        account = _parse_account(row[0])
        code = row[1].strip()
        if not _HEX_RE.match(code):
            raise ValueError(f"malformed bytecode hex: account {account}")
        return ContractRecord(account, code.lower(), _parse_label(row[2]))

    return _collect(path, ("account", "bytecode", "label"), parse, diagnostics)


def load_addresses(path, diagnostics: Optional[list] = None) -> List[AddressRecord]:
    def parse(row):
        return AddressRecord(_parse_account(row[0]), _parse_label(row[1]))

    return _collect(path, ("account", "label"), parse, diagnostics)


def load_transactions(path, diagnostics: Optional[list] = None) -> List[TransactionRecord]:
    def parse(row):
        tx_id = row[0].strip()
        if not tx_id:
            raise ValueError("empty tx_id")
        raw = row[3].strip()
        if not raw.isdigit():
            raise ValueError(f"invalid value_wei: {raw!r} (must be a non-negative integer)")
        return TransactionRecord(
            tx_id,
            _parse_address(row[1], "from"),
            _parse_address(row[2], "to"),
            int(raw),
        )

    records = _collect(path, ("tx_id", "from", "to", "value_wei"), parse, diagnostics)
    seen, dupes = set(), []
    for rec in records:
        if rec.tx_id in seen:
            dupes.append(rec.tx_id)
        seen.add(rec.tx_id)
    if dupes:
        raise DatasetError(f"{path}: duplicate tx_id(s): {', '.join(sorted(set(dupes)))}")
    return records


def write_contracts(records: Iterable[ContractRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["account", "bytecode", "label"])
        for r in records:
            w.writerow([r.account, r.bytecode, r.label])


def write_addresses(records: Iterable[AddressRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["account", "label"])
        for r in records:
            w.writerow([r.account, r.label])


def write_transactions(records: Iterable[TransactionRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tx_id", "from", "to", "value_wei"])
        for r in records:
            w.writerow([r.tx_id, r.sender, r.recipient, r.value_wei])


def schema_digest(feature_names: Sequence[str]) -> str:
    """Content digest of an ordered feature-name list."""
    return hashlib.sha256("\n".join(feature_names).encode("utf-8")).hexdigest()


@dataclass
class LabeledDataset:
    ids: List[str]
    features: np.ndarray
    labels: np.ndarray
    feature_names: List[str]
    notes: str = ""

    def __post_init__(self):
        self.ids = list(self.ids)
        self.feature_names = list(self.feature_names)
        self.features = np.asarray(self.features, dtype=np.float64).reshape(
            len(self.ids), len(self.feature_names))
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(len(self.ids))
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate entity ids in dataset")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("duplicate feature names in dataset")
        bad = ~np.isin(self.labels, LABELS)
        if bad.any():
            raise ValueError(f"labels outside {{1, 0, -1}}: {sorted(set(self.labels[bad].tolist()))}")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def digest(self) -> str:
        return schema_digest(self.feature_names)

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.labels != UNLABELED

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        return LabeledDataset(
            [self.ids[i] for i in rows], self.features[rows], self.labels[rows],
            self.feature_names, self.notes)

    def labeled(self) -> "LabeledDataset":
        return self.subset(self.labeled_mask)

    def equals(self, other: "LabeledDataset") -> bool:
        """Exact equality, comparing float64 values bit for bit."""
        return (
            self.ids == other.ids
            and self.feature_names == other.feature_names
            and np.array_equal(self.labels, other.labels)
            and self.features.shape == other.features.shape
            and np.array_equal(self.features.view(np.uint64), other.features.view(np.uint64))
        )


def schema_path_for(path) -> Path:
    path = Path(path)
    name = path.name
    if name.endswith(".features.csv"):
        return path.with_name(name[: -len(".features.csv")] + ".schema")
    return path.with_name(name + ".schema")


def _dataset_bytes(ds: LabeledDataset) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["entity_id", "label", *ds.feature_names])
    for i, entity in enumerate(ds.ids):
        # repr() is the shortest string that round-trips the exact float64
        w.writerow([entity, int(ds.labels[i]), *(repr(float(v)) for v in ds.features[i])])
    return buf.getvalue().encode("utf-8")


def write_dataset(ds: LabeledDataset, path) -> None:
    """Write a feature table and its ``.schema`` sidecar."""
    data = _dataset_bytes(ds)
    with open(path, "wb") as fh:
        fh.write(data)
    lines = [
        "# feature table schema",
        f"schema_digest={ds.digest}",
        f"content_sha256={hashlib.sha256(data).hexdigest()}",
        f"rows={len(ds)}",
    ]
    if ds.notes:
        lines.append(f"notes={ds.notes}")
    lines += [f"feature={name}" for name in ds.feature_names]
    schema_path_for(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_schema(path) -> dict:
    """Parse a ``.schema`` sidecar into a dict (``feature`` holds the ordered list)."""
    info: dict = {"feature": []}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if key == "feature":
            info["feature"].append(value)
        else:
            info[key] = value
    return info


def read_dataset(path, verify: bool = True) -> LabeledDataset:
    """Inverse of :func:`write_dataset`.

    With ``verify``, a sidecar (when present) must match the table's content
    digest and feature list.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    header = next(reader, None)
    if not header or header[:2] != ["entity_id", "label"]:
        raise DatasetError(f"{path}: feature table must start with 'entity_id,label'")
    names = header[2:]
    width = len(header)
    ids, labels, rows, errors = [], [], [], []
    for row in reader:
        if not row:
            continue
        if len(row) != width:
            errors.append((reader.line_num, f"expected {width} columns, got {len(row)}"))
            continue
        try:
            labels.append(_parse_label(row[1]))
            rows.append([float(v) for v in row[2:]])
        except ValueError as exc:
            errors.append((reader.line_num, str(exc)))
            continue
        ids.append(row[0])
    if errors:
        raise DatasetError(f"{path}: format error", errors)
    notes = ""
    sidecar = schema_path_for(path)
    if sidecar.exists():
        info = read_schema(sidecar)
        notes = info.get("notes", "")
        if verify:
            if info["feature"] != names:
                raise SchemaMismatchError(f"{path}: header does not match {sidecar}")
            expected = info.get("content_sha256")
            if expected and expected != hashlib.sha256(data).hexdigest():
                raise DatasetError(f"{path}: content digest does not match {sidecar}")
    features = np.array(rows, dtype=np.float64).reshape(len(ids), len(names))
    return LabeledDataset(ids, features, labels, names, notes)


def read_labels(path) -> dict:
    """Read ``account,label`` (or ``account,bytecode,label``) into a dict."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "label" not in reader.fieldnames:
            raise DatasetError(f"{path}: no 'label' column")
        key = "account" if "account" in reader.fieldnames else reader.fieldnames[0]
        return {row[key].strip().lower(): _parse_label(row["label"]) for row in reader}


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
