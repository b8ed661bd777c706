import numpy as np
import pytest
from hypothesis import given, strategies as st

from gambledetect.contract_features import FeatureSchema, default_schema, featurize_contract, featurize_contracts
from gambledetect.dataset_io import ContractRecord
from gambledetect.evm_disasm import canonical_mnemonics, disassemble


def test_default_schema_drops_wide_stack_ops():
    names = default_schema().mnemonics
    dropped = {f"PUSH{i}" for i in range(5, 33)} | {f"DUP{i}" for i in range(5, 17)} | {f"SWAP{i}" for i in range(5, 17)}
    assert len(dropped) == 28 + 12 + 12
    assert set(names) == set(canonical_mnemonics()) - dropped
    assert len(names) == 136 - 52 == 84
    assert list(names) == sorted(names)
    assert "PUSH7" not in names and "CALLDATACOPY" in names and "PUSH4" in names


def test_counting():
    schema = default_schema()
    v = featurize_contract(["ADD", "ADD", "STOP"], schema)
    idx = {m: i for i, m in enumerate(schema.mnemonics)}
    assert v[idx["ADD"]] == 2 and v[idx["STOP"]] == 1 and v.sum() == 3
    assert featurize_contract([], schema).sum() == 0


def test_dropped_and_invalid_opcodes_are_not_counted():
    schema = default_schema()
    # PUSH7 with 7 operand bytes, then an unassigned byte, then ADD
    v = featurize_contract(disassemble(bytes([0x66]) + bytes(7) + bytes([0xFE, 0x01])), schema)
    assert v.sum() == 1


def test_schema_rejects_unknown_or_duplicate():
    with pytest.raises(ValueError):
        FeatureSchema(("ADD", "ADD"))
    with pytest.raises(ValueError):
        FeatureSchema(("ADD", "FROBNICATE"))


def test_schema_file_round_trip(tmp_path):
    s = FeatureSchema(("EXP", "ADD", "BALANCE"))
    s.to_file(tmp_path / "schema.txt")
    assert FeatureSchema.from_file(tmp_path / "schema.txt") == s


def test_featurize_contracts_keeps_labels_and_order():
    records = [ContractRecord("0x" + "a" * 40, "0x0101", 1), ContractRecord("0x" + "b" * 40, "0x", -1)]
    ds = featurize_contracts(records, default_schema())
    assert ds.ids == [r.account for r in records]
    assert list(ds.labels) == [1, -1]
    assert ds.features.shape == (2, 84)


@given(st.lists(st.sampled_from(canonical_mnemonics() + ["INVALID"]), max_size=200), st.randoms())
def test_counts_ignore_order_and_are_bounded(names, rnd):
    schema = default_schema()
    shuffled = list(names)
    rnd.shuffle(shuffled)
    v = featurize_contract(names, schema)
    assert np.array_equal(v, featurize_contract(shuffled, schema))
    assert v.sum() <= len(names)
