import pytest
from hypothesis import given, strategies as st

from gambledetect.evm_disasm import (INVALID, Flag, canonical_mnemonics, disassemble, format_stream,
                                     opcode_table, parse_hex)

# byte -> mnemonic for the opcodes used as examples of EVM operations
WELL_KNOWN = {
    0x00: "STOP", 0x01: "ADD", 0x02: "MUL", 0x03: "SUB", 0x10: "LT", 0x11: "GT", 0x14: "EQ",
    0x15: "ISZERO", 0x34: "CALLVALUE", 0x35: "CALLDATALOAD", 0x36: "CALLDATASIZE", 0x50: "POP",
    0x52: "MSTORE", 0x54: "SLOAD",
}


@pytest.mark.parametrize("byte,name", sorted(WELL_KNOWN.items()))
def test_well_known_opcodes(byte, name):
    assert opcode_table()[byte] == (name, 0)
    (ins,) = disassemble(bytes([byte])).instructions
    assert ins.mnemonic == name and ins.flag is Flag.VALID


def test_table_is_total_with_136_named_opcodes():
    table = opcode_table()
    assert sorted(table) == list(range(256))
    assert len(canonical_mnemonics()) == 136
    assert table[0xFE] == (INVALID, 0)
    assert all(table[0x60 + i] == (f"PUSH{i + 1}", i + 1) for i in range(32))


def test_table_agrees_with_reference_disassembler():
    pyevmasm = pytest.importorskip("pyevmasm")
    aliases = {"GETPC": "PC"}
    for byte, (name, width) in opcode_table().items():
        # SHL/SHR arrived one fork after the base table
        fork = "constantinople" if byte in (0x1B, 0x1C) else "byzantium"
        ref = pyevmasm.disassemble_one(bytes([byte]) + bytes(width), fork=fork)
        assert aliases.get(ref.name, ref.name) == name, hex(byte)
        assert ref.operand_size == width, hex(byte)


def test_push_operands_are_consumed():
    stream = disassemble("0x6001600201")
    assert stream.mnemonics() == ["PUSH1", "PUSH1", "ADD"]
    assert [i.operand for i in stream] == [b"\x01", b"\x02", b""]
    assert [i.offset for i in stream] == [0, 2, 4]


def test_truncated_push_is_padded_and_flagged():
    (ins,) = disassemble("0x60").instructions
    assert ins.mnemonic == "PUSH1" and ins.operand == b"\x00" and ins.flag is Flag.TRUNCATED_PUSH
    (ins,) = disassemble(bytes([0x63, 0xAB])).instructions
    assert ins.operand == b"\xab\x00\x00\x00" and ins.size == 2


def test_unknown_byte_decodes_as_invalid():
    stream = disassemble(bytes([0xFE, 0x0C, 0x00]))
    assert stream.mnemonics() == [INVALID, INVALID, "STOP"]
    assert stream.instructions[0].flag is Flag.INVALID_OPCODE


def test_empty_input():
    assert len(disassemble(b"")) == 0


def test_format_stream():
    assert format_stream(disassemble("0x6001600201")) == "0 PUSH1 0x01\n2 PUSH1 0x02\n4 ADD"
    assert format_stream(disassemble("0x60")) == "0 PUSH1 0x00"


def test_parse_hex_accepts_optional_prefix():
    assert parse_hex("0x6001") == parse_hex("6001") == b"\x60\x01"
    with pytest.raises(ValueError):
        parse_hex("0x600")


@given(st.binary(max_size=600))
def test_coverage_and_determinism(code):
    stream = disassemble(code)
    assert sum(i.size for i in stream) == len(code) == stream.source_length
    assert stream == disassemble(code)
    # offsets are the running sum of sizes
    pos = 0
    for ins in stream:
        assert ins.offset == pos
        pos += ins.size
