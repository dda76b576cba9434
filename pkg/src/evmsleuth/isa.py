"""EVM instruction set model, bytecode parsing, and disassembly listings.

The opcode table targets the instruction set of the Byzantium era:
SELFDESTRUCT, REVERT, DELEGATECALL, STATICCALL and the RETURNDATA opcodes are
present; Constantinople additions (shifts, CREATE2, EXTCODEHASH) and later
forks are not. New opcodes are one-row additions via register_opcode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class SideEffect(Enum):
    NONE = "none"
    MEMORY_WRITE = "memory_write"
    STORAGE_WRITE = "storage_write"
    CALL = "call"
    LOG = "log"
    CREATE = "create"
    DESTROY = "destroy"


@dataclass(frozen=True)
class OpcodeSpec:
    mnemonic: str
    byte_value: int
    pops: int
    pushes: int
    operand_len: int = 0
    halts: bool = False
    alters_flow: bool = False
    side_effect: SideEffect = SideEffect.NONE

    def __post_init__(self) -> None:
        assert 0 <= self.byte_value <= 0xFF
        assert 0 <= self.operand_len <= 32
        assert self.pops <= 17
        assert self.pushes in (0, 1)

    @property
    def is_push(self) -> bool:
        return 0x60 <= self.byte_value <= 0x7F

    @property
    def is_dup(self) -> bool:
        return 0x80 <= self.byte_value <= 0x8F

    @property
    def is_swap(self) -> bool:
        return 0x90 <= self.byte_value <= 0x9F

    @property
    def shuffle_depth(self) -> int:
        """DUPn or SWAPn depth; meaningless for other opcodes."""
        if self.is_dup:
            return self.byte_value - 0x7F
        if self.is_swap:
            return self.byte_value - 0x8F
        return 0


def _rows() -> list[OpcodeSpec]:
    S = SideEffect
    rows = [
        OpcodeSpec("STOP", 0x00, 0, 0, halts=True),
        OpcodeSpec("ADD", 0x01, 2, 1),
        OpcodeSpec("MUL", 0x02, 2, 1),
        OpcodeSpec("SUB", 0x03, 2, 1),
        OpcodeSpec("DIV", 0x04, 2, 1),
        OpcodeSpec("SDIV", 0x05, 2, 1),
        OpcodeSpec("MOD", 0x06, 2, 1),
        OpcodeSpec("SMOD", 0x07, 2, 1),
        OpcodeSpec("ADDMOD", 0x08, 3, 1),
        OpcodeSpec("MULMOD", 0x09, 3, 1),
        OpcodeSpec("EXP", 0x0A, 2, 1),
        OpcodeSpec("SIGNEXTEND", 0x0B, 2, 1),
        OpcodeSpec("LT", 0x10, 2, 1),
        OpcodeSpec("GT", 0x11, 2, 1),
        OpcodeSpec("SLT", 0x12, 2, 1),
        OpcodeSpec("SGT", 0x13, 2, 1),
        OpcodeSpec("EQ", 0x14, 2, 1),
        OpcodeSpec("ISZERO", 0x15, 1, 1),
        OpcodeSpec("AND", 0x16, 2, 1),
        OpcodeSpec("OR", 0x17, 2, 1),
        OpcodeSpec("XOR", 0x18, 2, 1),
        OpcodeSpec("NOT", 0x19, 1, 1),
        OpcodeSpec("BYTE", 0x1A, 2, 1),
        OpcodeSpec("SHA3", 0x20, 2, 1),
        OpcodeSpec("ADDRESS", 0x30, 0, 1),
        OpcodeSpec("BALANCE", 0x31, 1, 1),
        OpcodeSpec("ORIGIN", 0x32, 0, 1),
        OpcodeSpec("CALLER", 0x33, 0, 1),
        OpcodeSpec("CALLVALUE", 0x34, 0, 1),
        OpcodeSpec("CALLDATALOAD", 0x35, 1, 1),
        OpcodeSpec("CALLDATASIZE", 0x36, 0, 1),
        OpcodeSpec("CALLDATACOPY", 0x37, 3, 0, side_effect=S.MEMORY_WRITE),
        OpcodeSpec("CODESIZE", 0x38, 0, 1),
        OpcodeSpec("CODECOPY", 0x39, 3, 0, side_effect=S.MEMORY_WRITE),
        OpcodeSpec("GASPRICE", 0x3A, 0, 1),
        OpcodeSpec("EXTCODESIZE", 0x3B, 1, 1),
        OpcodeSpec("EXTCODECOPY", 0x3C, 4, 0, side_effect=S.MEMORY_WRITE),
        OpcodeSpec("RETURNDATASIZE", 0x3D, 0, 1),
        OpcodeSpec("RETURNDATACOPY", 0x3E, 3, 0, side_effect=S.MEMORY_WRITE),
        OpcodeSpec("BLOCKHASH", 0x40, 1, 1),
        OpcodeSpec("COINBASE", 0x41, 0, 1),
        OpcodeSpec("TIMESTAMP", 0x42, 0, 1),
        OpcodeSpec("NUMBER", 0x43, 0, 1),
        OpcodeSpec("DIFFICULTY", 0x44, 0, 1),
        OpcodeSpec("GASLIMIT", 0x45, 0, 1),
        OpcodeSpec("POP", 0x50, 1, 0),
        OpcodeSpec("MLOAD", 0x51, 1, 1),
        OpcodeSpec("MSTORE", 0x52, 2, 0, side_effect=S.MEMORY_WRITE),
        OpcodeSpec("MSTORE8", 0x53, 2, 0, side_effect=S.MEMORY_WRITE),
        OpcodeSpec("SLOAD", 0x54, 1, 1),
        OpcodeSpec("SSTORE", 0x55, 2, 0, side_effect=S.STORAGE_WRITE),
        OpcodeSpec("JUMP", 0x56, 1, 0, alters_flow=True),
        OpcodeSpec("JUMPI", 0x57, 2, 0, alters_flow=True),
        OpcodeSpec("PC", 0x58, 0, 1),
        OpcodeSpec("MSIZE", 0x59, 0, 1),
        OpcodeSpec("GAS", 0x5A, 0, 1),
        OpcodeSpec("JUMPDEST", 0x5B, 0, 0),
        OpcodeSpec("CREATE", 0xF0, 3, 1, side_effect=S.CREATE),
        OpcodeSpec("CALL", 0xF1, 7, 1, side_effect=S.CALL),
        OpcodeSpec("CALLCODE", 0xF2, 7, 1, side_effect=S.CALL),
        OpcodeSpec("RETURN", 0xF3, 2, 0, halts=True),
        OpcodeSpec("DELEGATECALL", 0xF4, 6, 1, side_effect=S.CALL),
        OpcodeSpec("STATICCALL", 0xFA, 6, 1, side_effect=S.CALL),
        OpcodeSpec("REVERT", 0xFD, 2, 0, halts=True),
        OpcodeSpec("INVALID", 0xFE, 0, 0, halts=True),
        OpcodeSpec("SELFDESTRUCT", 0xFF, 1, 0, halts=True, side_effect=S.DESTROY),
    ]
    for n in range(1, 33):
        rows.append(OpcodeSpec(f"PUSH{n}", 0x5F + n, 0, 1, operand_len=n))
    # DUP/SWAP shuffle the symbolic stack structurally (shuffle_depth); the
    # pop/push counts here stay zero because they never become register ops.
    for n in range(1, 17):
        rows.append(OpcodeSpec(f"DUP{n}", 0x7F + n, 0, 0))
    for n in range(1, 17):
        rows.append(OpcodeSpec(f"SWAP{n}", 0x8F + n, 0, 0))
    for n in range(0, 5):
        rows.append(OpcodeSpec(f"LOG{n}", 0xA0 + n, 2 + n, 0, side_effect=S.LOG))
    return rows


OPCODES: dict[int, OpcodeSpec] = {}
OPCODES_BY_NAME: dict[str, OpcodeSpec] = {}


def register_opcode(spec: OpcodeSpec) -> None:
    if spec.byte_value in OPCODES:
        raise ValueError(f"byte 0x{spec.byte_value:02x} already registered")
    OPCODES[spec.byte_value] = spec
    OPCODES_BY_NAME[spec.mnemonic] = spec


for _row in _rows():
    register_opcode(_row)

INVALID = OPCODES[0xFE]
JUMPDEST = OPCODES[0x5B]

# Synthetic opcodes used only in the register-transfer IR, never in bytecode:
# CONST carries a pushed literal; THROW/THROWI replace jumps whose constant
# target is not a valid JUMPDEST (such jumps abort execution).
CONST = OpcodeSpec("CONST", 0xFE, 0, 1)
THROW = OpcodeSpec("THROW", 0xFE, 0, 0, halts=True)
THROWI = OpcodeSpec("THROWI", 0xFE, 1, 0)


class MalformedHexError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


def parse_hex(text: str) -> bytes:
    """Decode hex text (optional 0x prefix, arbitrary whitespace) to bytes."""
    stripped = "".join(text.split())
    if stripped.startswith(("0x", "0X")):
        stripped = stripped[2:]
    for i, ch in enumerate(stripped):
        if ch not in "0123456789abcdefABCDEF":
            raise MalformedHexError(f"non-hex character {ch!r} at offset {i}", i)
    if len(stripped) % 2 != 0:
        raise MalformedHexError("odd number of hex digits")
    return bytes.fromhex(stripped)


@dataclass(frozen=True)
class Instruction:
    pc: int
    opcode: OpcodeSpec
    byte: int
    operand: int | None = None
    is_invalid: bool = False

    @property
    def size(self) -> int:
        return 1 + self.opcode.operand_len

    @property
    def next_pc(self) -> int:
        return self.pc + self.size

    @property
    def halts(self) -> bool:
        return self.opcode.halts or self.is_invalid


@dataclass
class DisassemblyListing:
    instructions: list[Instruction]
    block_starts: list[int] = field(default_factory=list)

    def blocks(self) -> list[list[Instruction]]:
        """Split the instruction sequence at block_starts."""
        starts = set(self.block_starts)
        out: list[list[Instruction]] = []
        current: list[Instruction] = []
        for ins in self.instructions:
            if ins.pc in starts and current:
                out.append(current)
                current = []
            current.append(ins)
        if current:
            out.append(current)
        return out

    def reencode(self) -> bytes:
        out = bytearray()
        for ins in self.instructions:
            out.append(ins.byte)
            if ins.opcode.operand_len:
                out.extend(int(ins.operand or 0).to_bytes(ins.opcode.operand_len, "big"))
        return bytes(out)


def disassemble(code: bytes) -> DisassemblyListing:
    """Linear scan of code into instructions plus basic-block boundaries.

    Total function: undefined bytes become halting INVALID instructions, and a
    PUSH running past the end of code zero-pads its operand.
    """
    instructions: list[Instruction] = []
    pc = 0
    n = len(code)
    while pc < n:
        byte = code[pc]
        spec = OPCODES.get(byte)
        if spec is None:
            instructions.append(Instruction(pc, INVALID, byte, is_invalid=True))
            pc += 1
            continue
        operand = None
        if spec.operand_len:
            raw = code[pc + 1 : pc + 1 + spec.operand_len]
            raw = raw + b"\x00" * (spec.operand_len - len(raw))
            operand = int.from_bytes(raw, "big")
        instructions.append(Instruction(pc, spec, byte, operand))
        pc += 1 + spec.operand_len

    block_starts: set[int] = set()
    if instructions:
        block_starts.add(0)
    for i, ins in enumerate(instructions):
        if ins.opcode is JUMPDEST:
            block_starts.add(ins.pc)
        if (ins.halts or ins.opcode.alters_flow) and i + 1 < len(instructions):
            block_starts.add(instructions[i + 1].pc)
    return DisassemblyListing(instructions, sorted(block_starts))


def format_pc(pc: int) -> str:
    return hex(pc)


def format_word(value: int) -> str:
    return hex(value)


def format_listing(listing: DisassemblyListing) -> str:
    """One line per instruction, blank line between basic blocks."""
    chunks: list[str] = []
    for block in listing.blocks():
        lines = []
        for ins in block:
            if ins.opcode.operand_len:
                lines.append(f"{format_pc(ins.pc)} {ins.opcode.mnemonic} {format_word(ins.operand or 0)}")
            else:
                lines.append(f"{format_pc(ins.pc)} {ins.opcode.mnemonic}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
