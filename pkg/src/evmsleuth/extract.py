"""Relational fact extraction from decompiled control-flow graphs.

Every statement is identified by its hex program counter, registers keep
their `V<n>` names, and entry-stack placeholders are qualified with the
block that reads them (`S0@0x39`) so the same depth in two blocks stays
distinct.  The `flow` relation wires each placeholder an instruction
actually uses to the registers predecessor chains supply at that depth;
pass-through hops across intermediate blocks are collapsed during
extraction, so dependency closures cross blocks in one step instead of
walking chains whose length is bounded only by the stack limit.
"""

from __future__ import annotations

from collections import defaultdict, deque
from pathlib import Path

from .datalog import FactBase
from .decompiler import (
    Cfg,
    Decompilation,
    Placeholder,
    Register,
    STACK_LIMIT,
    TirBlock,
)
from .dominance import compute_dominators, compute_postdominators
from .isa import format_pc, format_word

_SCHEMAS: list[tuple[str, ...]] = [
    ("entry", "stmt"),
    ("edge", "tail", "head"),
    ("def", "var", "stmt"),
    ("use", "var", "stmt", "index"),
    ("op", "stmt", "opcode"),
    ("value", "var", "value"),
    ("dom", "dominator", "node"),
    ("pdom", "postdominator", "node"),
    ("in_block", "stmt", "block"),
    ("before", "first", "second"),
    ("flow", "target", "source"),
    ("op_CALL", "stmt", "gas", "target", "value", "args_offset",
     "args_length", "ret_offset", "ret_length"),
    ("op_JUMPI", "stmt", "target", "condition"),
    ("sstore", "stmt", "key", "value"),
    ("sload", "stmt", "key", "result"),
    ("mstore", "stmt", "address", "value"),
    ("mload", "stmt", "address", "result"),
    ("unresolved", "stmt"),
]


def placeholder_name(block: TirBlock, depth: int) -> str:
    return f"S{depth}@{format_pc(block.entry_pc)}"


def operand_name(block: TirBlock, operand) -> str:
    if isinstance(operand, Register):
        return str(operand)
    assert isinstance(operand, Placeholder)
    return placeholder_name(block, operand.depth)


def _used_placeholder_roots(blocks) -> list[tuple[tuple, int]]:
    roots = []
    for block in blocks:
        for op in block.ops:
            for arg in op.args:
                if isinstance(arg, Placeholder):
                    roots.append((block.key, arg.depth))
    return list(dict.fromkeys(roots))


def _placeholder_sources(cfg: Cfg, blocks) -> dict[tuple[tuple, int], set[str]]:
    """Resolve each used entry-stack slot to the registers that can reach it.

    A slot may be fed directly by a predecessor's exit stack or inherited
    through any number of pass-through blocks.  Chasing those chains inside
    the Datalog closure is quadratic in chain length, so this collapses them
    up front: a breadth-first pass discovers every (block, depth) slot
    reachable from a used one, then a worklist propagates terminal register
    names until the sets stabilise.  Sets only grow, so this terminates.
    """
    direct: dict[tuple[tuple, int], set[str]] = {}
    dependents: dict[tuple[tuple, int], set[tuple[tuple, int]]] = defaultdict(set)
    roots = _used_placeholder_roots(blocks)
    queue = deque(roots)
    seen = set(roots)
    while queue:
        node = queue.popleft()
        key, depth = node
        block = cfg.blocks[key]
        regs: set[str] = set()
        for pred_key in block.predecessors:
            pred = cfg.blocks.get(pred_key)
            if pred is None:
                continue
            height = len(pred.exit_stack)
            if depth < height:
                operand = pred.exit_stack[-1 - depth]
                if isinstance(operand, Register):
                    regs.add(str(operand))
                    continue
                upstream = (pred_key, operand.depth)
            else:
                inherited = depth - height + pred.consumed
                if inherited >= STACK_LIMIT:
                    continue
                upstream = (pred_key, inherited)
            dependents[upstream].add(node)
            if upstream not in seen:
                seen.add(upstream)
                queue.append(upstream)
        direct[node] = regs

    sources = {node: set(found) for node, found in direct.items()}
    work = deque(node for node in sources if sources[node])
    while work:
        node = work.popleft()
        for dep in dependents[node]:
            grown = sources[node] - sources[dep]
            if grown:
                sources[dep] |= grown
                work.append(dep)
    return {node: sources[node] for node in roots}


def _head_stmt(block: TirBlock) -> str:
    return format_pc(block.ops[0].pc if block.ops else block.entry_pc)


def _tail_stmt(block: TirBlock) -> str:
    return format_pc(block.ops[-1].pc if block.ops else block.entry_pc)


def extract_facts(source: Decompilation | Cfg) -> FactBase:
    cfg = source.cfg if isinstance(source, Decompilation) else source
    base = FactBase()
    for schema in _SCHEMAS:
        base.declare(schema[0], *schema[1:])

    blocks = cfg.sorted_blocks()
    if not blocks:
        return base
    entry_block = cfg.blocks.get(cfg.entry_key)
    if entry_block is not None:
        base.add("entry", _head_stmt(entry_block))

    for block in blocks:
        head = _head_stmt(block)
        for succ_key in sorted(block.successors):
            succ = cfg.blocks.get(succ_key)
            if succ is not None:
                base.add("edge", _tail_stmt(block), _head_stmt(succ))

        stmts: list[str] = []
        for op in block.ops:
            stmt = format_pc(op.pc)
            stmts.append(stmt)
            base.add("op", stmt, op.opcode.mnemonic)
            base.add("in_block", stmt, head)
            if op.lhs is not None:
                base.add("def", operand_name(block, op.lhs), stmt)
            names = [operand_name(block, arg) for arg in op.args]
            for index, name in enumerate(names):
                base.add("use", name, stmt, str(index))
            mnemonic = op.opcode.mnemonic
            if mnemonic == "CONST":
                assert op.lhs is not None and op.const_value is not None
                base.add("value", operand_name(block, op.lhs),
                         format_word(op.const_value))
            elif mnemonic == "CALL":
                base.add("op_CALL", stmt, *names)
            elif mnemonic == "JUMPI":
                base.add("op_JUMPI", stmt, names[0], names[1])
            elif mnemonic == "SSTORE":
                base.add("sstore", stmt, names[0], names[1])
            elif mnemonic == "SLOAD":
                assert op.lhs is not None
                base.add("sload", stmt, names[0], operand_name(block, op.lhs))
            elif mnemonic == "MSTORE":
                base.add("mstore", stmt, names[0], names[1])
            elif mnemonic == "MLOAD":
                assert op.lhs is not None
                base.add("mload", stmt, names[0], operand_name(block, op.lhs))

        for i, first in enumerate(stmts):
            for second in stmts[i + 1:]:
                base.add("before", first, second)

        for depth in sorted(block.demands):
            lattice = block.entry_vals.get(depth)
            if lattice is not None and lattice.is_const:
                name = placeholder_name(block, depth)
                for element in sorted(lattice.values):
                    base.add("value", name, format_word(element))

    placeholder_sources = _placeholder_sources(cfg, blocks)
    for (key, depth), names in sorted(placeholder_sources.items()):
        target = placeholder_name(cfg.blocks[key], depth)
        for source in sorted(names):
            base.add("flow", target, source)

    for pc in sorted(cfg.unresolved):
        base.add("unresolved", format_pc(pc))

    pc_graph = {
        block.entry_pc: {succ_pc for succ_pc, _ in block.successors}
        for block in blocks
    }
    head_of = {block.entry_pc: _head_stmt(block) for block in blocks}
    if entry_block is not None:
        dom_sets = compute_dominators(pc_graph, entry_block.entry_pc)
        for node, dominators in dom_sets.items():
            for dominator in dominators:
                base.add("dom", head_of[dominator], head_of[node])
    pdom_sets = compute_postdominators(pc_graph, list(pc_graph))
    for node, postdominators in pdom_sets.items():
        for postdominator in postdominators:
            base.add("pdom", head_of[postdominator], head_of[node])
    return base


def write_tsv(facts: FactBase, directory: str | Path) -> list[Path]:
    return facts.write_tsv(directory)
