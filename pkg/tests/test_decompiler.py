from __future__ import annotations

from hypothesis import given, settings, strategies as st

from evmsleuth.decompiler import (
    DecompilerConfig,
    Placeholder,
    Register,
    RegisterAllocator,
    build_cfg,
    decompile,
    merge_clones,
    symbolic_exec_block,
)
from evmsleuth.isa import OPCODES_BY_NAME, disassemble

from fixtures import factorial_bytes, two_callers_bytes
from helpers import assemble


def _exec_blocks(text: str):
    listing = disassemble(assemble(text))
    alloc = RegisterAllocator()
    return [symbolic_exec_block(instrs, alloc) for instrs in listing.blocks()]


def test_underflow_becomes_placeholders() -> None:
    block = _exec_blocks("ADD")[0]
    assert len(block.ops) == 1
    op = block.ops[0]
    assert op.args == [Placeholder(0), Placeholder(1)]
    assert isinstance(op.lhs, Register)
    assert block.consumed == 2
    assert block.exit_stack == [op.lhs]


def test_swap_on_empty_stack_reorders_placeholders() -> None:
    block = _exec_blocks("SWAP2")[0]
    assert block.ops == []
    assert block.consumed == 3
    assert block.exit_stack == [Placeholder(0), Placeholder(1), Placeholder(2)]


def test_dup_is_absorbed_into_operand_reuse() -> None:
    block = _exec_blocks("PUSH1 0x5\nDUP1\nADD")[0]
    assert [op.opcode.mnemonic for op in block.ops] == ["CONST", "ADD"]
    add = block.ops[1]
    assert add.args[0] == add.args[1]
    assert block.consumed == 0


def test_straightline_tir_text() -> None:
    result = decompile(assemble("PUSH1 0x3\nPUSH1 0x4\nADD\nSTOP"))
    assert result.tir == (
        "0x0: V0 = 0x3\n"
        "0x2: V1 = 0x4\n"
        "0x4: V2 = ADD 0x4 0x3\n"
        "0x5: STOP\n"
    )


def test_memory_write_rendering() -> None:
    result = decompile(assemble("PUSH1 0x60\nPUSH1 0x40\nMSTORE\nSTOP"))
    assert "0x4: M[0x40] = 0x60" in result.tir


def test_direct_jump_resolves_edge() -> None:
    result = decompile(assemble("PUSH target\nJUMP\ntarget:\nSTOP"))
    cfg = result.cfg
    assert cfg.blocks[(0, "")].successors == {(4, "")}
    assert "0x3: JUMP 0x4" in result.tir
    assert not cfg.unresolved


def test_conditional_jump_keeps_fallthrough_edge() -> None:
    result = decompile(assemble("CALLVALUE\nPUSH t\nJUMPI\nSTOP\nt:\nSTOP"))
    cfg = result.cfg
    assert cfg.blocks[(0, "")].successors == {(5, ""), (6, "")}


def test_jump_to_non_jumpdest_becomes_throw() -> None:
    result = decompile(assemble("PUSH1 0x3\nJUMP\nSTOP"))
    assert "0x2: THROW" in result.tir
    assert result.cfg.blocks[(0, "")].successors == set()
    assert not result.cfg.unresolved


def test_jump_on_unknown_value_is_unresolved() -> None:
    result = decompile(assemble("CALLVALUE\nJUMP"))
    assert "0x1: JUMP V0" in result.tir
    assert result.cfg.unresolved == {1}


def test_constant_flows_across_fallthrough_block() -> None:
    result = decompile(assemble("PUSH1 target\nmid:\nJUMP\ntarget:\nSTOP"))
    cfg = result.cfg
    assert cfg.blocks[(2, "")].successors == {(4, "")}
    assert "0x3: JUMP 0x4" in result.tir


def test_two_callers_split_resolves_singletons() -> None:
    code = two_callers_bytes()
    listing = disassemble(code)
    alloc = RegisterAllocator()
    blocks = [symbolic_exec_block(instrs, alloc) for instrs in listing.blocks()]
    cfg = build_cfg(blocks, DecompilerConfig(), listing, alloc)

    exit_clones = [b for k, b in cfg.blocks.items() if k[0] == 0x0E]
    assert len(exit_clones) == 2
    targets = []
    for clone in exit_clones:
        assert clone.clone_tag != ""
        jump = clone.last_op
        assert jump is not None and jump.opcode.mnemonic == "JUMP"
        assert len(jump.jump_targets) == 1
        targets.append(next(iter(jump.jump_targets)))
    assert sorted(targets) == [0x10, 0x12]

    merge_clones(cfg)
    pcs = [key[0] for key in cfg.blocks]
    assert len(pcs) == len(set(pcs))
    merged_jump = cfg.blocks[(0x0E, "")].last_op
    assert merged_jump is not None
    assert merged_jump.jump_targets == {0x10, 0x12}


def test_two_callers_merged_tir_shows_target_set() -> None:
    result = decompile(two_callers_bytes())
    assert "0xf: JUMP {0x10, 0x12}" in result.tir


def test_factorial_block_set() -> None:
    result = decompile(factorial_bytes())
    pcs = {key[0] for key in result.cfg.blocks}
    assert pcs == {0x0, 0x31, 0x33, 0x39, 0x45, 0x4A, 0x5C, 0x60, 0x65}
    assert not result.timed_out and not result.bounded


_LINEAR_OPS = [
    "ADD", "MUL", "SUB", "DIV", "POP", "CALLVALUE", "ADDRESS",
    "DUP1", "DUP2", "DUP3", "SWAP1", "SWAP2", "MSTORE", "SLOAD",
]


@given(st.lists(st.sampled_from(_LINEAR_OPS), max_size=30))
@settings(max_examples=120, deadline=None)
def test_symbolic_exec_stack_balance(names: list[str]) -> None:
    code = bytes(OPCODES_BY_NAME[n].byte_value for n in names)
    blocks = disassemble(code).blocks()
    if not blocks:
        return
    assert len(blocks) == 1
    block = symbolic_exec_block(blocks[0], RegisterAllocator())

    delta = 0
    for name in names:
        spec = OPCODES_BY_NAME[name]
        if spec.is_dup:
            delta += 1
        elif spec.is_swap:
            pass
        else:
            delta += spec.pushes - spec.pops
    assert len(block.exit_stack) - block.consumed == delta

    depths = {
        arg.depth
        for op in block.ops
        for arg in op.args
        if isinstance(arg, Placeholder)
    } | {o.depth for o in block.exit_stack if isinstance(o, Placeholder)}
    assert depths <= set(range(block.consumed))


@given(st.binary(max_size=48))
@settings(max_examples=60, deadline=None)
def test_decompile_arbitrary_bytes_is_deterministic(code: bytes) -> None:
    config = DecompilerConfig(timeout_seconds=10.0, max_iterations=200_000)
    first = decompile(code, config)
    second = decompile(code, config)
    assert first.tir == second.tir
    assert first.dot == second.dot
    pcs = [key[0] for key in first.cfg.blocks]
    assert len(pcs) == len(set(pcs))
