"""Linear-sweep EVM bytecode disassembler.

The opcode table is loaded from ``data/opcodes.csv`` so additional forks can be
added by editing data only.
"""
from __future__ import annotations

import csv
import enum
import functools
from dataclasses import dataclass
from importlib import resources
from typing import Dict, List, Tuple

INVALID = "INVALID"


class Flag(enum.Enum):
    VALID = "valid"
    INVALID_OPCODE = "invalid_opcode"
    TRUNCATED_PUSH = "truncated_push"


@dataclass(frozen=True)
class Instruction:
    offset: int
    opcode: int
    mnemonic: str
    operand: bytes = b""
    flag: Flag = Flag.VALID
    # operand bytes actually present in the source; < len(operand) only for truncated pushes
    consumed_operand: int = -1

    @property
    def size(self) -> int:
        """Bytes this instruction occupies in the source (padding excluded)."""
        if self.consumed_operand >= 0:
            return 1 + self.consumed_operand
        return 1 + len(self.operand)

    def __str__(self) -> str:
        if self.operand:
            return f"{self.offset} {self.mnemonic} 0x{self.operand.hex()}"
        return f"{self.offset} {self.mnemonic}"


@dataclass(frozen=True)
class InstructionStream:
    instructions: Tuple[Instruction, ...]
    source_length: int

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def mnemonics(self) -> List[str]:
        return [ins.mnemonic for ins in self.instructions]


def load_opcode_table(path=None) -> Dict[int, Tuple[str, int]]:
    """Read an opcode table file (``byte,mnemonic,operand_bytes``; ``#`` comments)."""
    if path is None:
        text = resources.files("gambledetect.data").joinpath("opcodes.csv").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    table: Dict[int, Tuple[str, int]] = {}
    for row in csv.DictReader(lines):
        value = int(row["byte"], 16)
        if not 0 <= value <= 0xFF:
            raise ValueError(f"opcode byte out of range: {row['byte']}")
        if value in table:
            raise ValueError(f"duplicate opcode byte: {row['byte']}")
        table[value] = (row["mnemonic"], int(row["operand_bytes"]))
    return table


@functools.lru_cache(maxsize=None)
def _default_table() -> Tuple[Tuple[str, int], ...]:
    known = load_opcode_table()
    return tuple(known.get(b, (INVALID, 0)) for b in range(256))


def opcode_table() -> Dict[int, Tuple[str, int]]:
    """Total map from every byte value to ``(mnemonic, operand length)``."""
    return dict(enumerate(_default_table()))


def canonical_mnemonics() -> List[str]:
    """Mnemonics of all assigned opcodes, in byte order."""
    return [m for m, _ in _default_table() if m != INVALID]


def parse_hex(text: str) -> bytes:
    text = text.strip()
    if text[:2].lower() == "0x":
        text = text[2:]
    return bytes.fromhex(text)


def disassemble(code: bytes | str) -> InstructionStream:
    """Decode ``code`` in a single linear pass. Never raises on any byte input."""
    if isinstance(code, str):
        code = parse_hex(code)
    table = _default_table()
    out = []
    pc = 0
    n = len(code)
    while pc < n:
        op = code[pc]
        mnemonic, width = table[op]
        if mnemonic == INVALID:
            out.append(Instruction(pc, op, mnemonic, flag=Flag.INVALID_OPCODE))
            pc += 1
            continue
        operand = code[pc + 1:pc + 1 + width]
        if len(operand) < width:
            out.append(Instruction(
                pc, op, mnemonic,
                operand=operand + bytes(width - len(operand)),
                flag=Flag.TRUNCATED_PUSH,
                consumed_operand=len(operand),
            ))
        else:
            out.append(Instruction(pc, op, mnemonic, operand=operand))
        pc += 1 + len(operand)
    return InstructionStream(tuple(out), n)


def format_stream(stream: InstructionStream) -> str:
    return "\n".join(str(ins) for ins in stream)
