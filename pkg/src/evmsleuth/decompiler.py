"""Stack-to-register decompiler with control-flow recovery.

Each basic block is executed symbolically to replace stack traffic with
three-address ops over fresh registers.  Values the block reads from its
entry stack become depth-indexed placeholders.  A demand-driven constant
propagation then fills in the placeholder values that jump instructions
need, growing the edge set as targets resolve.  Blocks whose jump target
stays multi-valued are cloned per predecessor chain until each copy sees
a single target, and the clones are merged back once values settle.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .isa import (
    CONST,
    DisassemblyListing,
    Instruction,
    OPCODES_BY_NAME,
    OpcodeSpec,
    THROW,
    THROWI,
    disassemble,
    format_pc,
    format_word,
)
from .lattice import BOTTOM, TOP, LatticeValue, const, join, leq

STACK_LIMIT = 1024

_JUMP = OPCODES_BY_NAME["JUMP"]
_JUMPI = OPCODES_BY_NAME["JUMPI"]
_CONST = CONST


@dataclass(frozen=True)
class Register:
    """A single-assignment value produced inside one block."""

    id: int
    birth_pc: int

    def __str__(self) -> str:
        return f"V{self.id}"


@dataclass(frozen=True)
class Placeholder:
    """A value the block reads from its entry stack, by depth from the top."""

    depth: int

    def __str__(self) -> str:
        return f"S{self.depth}"


Operand = Register | Placeholder


@dataclass
class TirOp:
    pc: int
    opcode: OpcodeSpec
    lhs: Register | None
    args: list[Operand]
    const_value: int | None = None
    jump_targets: set[int] = field(default_factory=set)


BlockKey = tuple[int, str]


@dataclass
class TirBlock:
    entry_pc: int
    clone_tag: str
    instructions: list[Instruction]
    ops: list[TirOp]
    exit_stack: list[Operand]  # bottom first, top last
    consumed: int  # number of entry-stack slots the block reads
    overflowed: bool = False
    successors: set[BlockKey] = field(default_factory=set)
    predecessors: set[BlockKey] = field(default_factory=set)
    entry_vals: dict[int, LatticeValue] = field(default_factory=dict)
    demands: set[int] = field(default_factory=set)
    const_regs: dict[Register, int] = field(default_factory=dict)
    jump_edge_pcs: set[int] = field(default_factory=set)
    _placeholder_positions: dict[int, list[int]] | None = field(default=None, repr=False)

    @property
    def key(self) -> BlockKey:
        return (self.entry_pc, self.clone_tag)

    @property
    def last_op(self) -> TirOp | None:
        return self.ops[-1] if self.ops else None

    def initial_demands(self) -> set[int]:
        wanted: set[int] = set()
        for op in self.ops:
            for arg in op.args:
                if isinstance(arg, Placeholder):
                    wanted.add(arg.depth)
        return wanted

    def entry_val(self, depth: int) -> LatticeValue:
        return self.entry_vals.get(depth, BOTTOM)

    def placeholder_positions(self) -> dict[int, list[int]]:
        """Exit-stack positions (depth from the top) holding each entry
        placeholder.  Registers never change value, so propagation only
        cares about these."""
        if self._placeholder_positions is None:
            positions: dict[int, list[int]] = {}
            height = len(self.exit_stack)
            for depth in range(height):
                operand = self.exit_stack[-1 - depth]
                if isinstance(operand, Placeholder):
                    positions.setdefault(operand.depth, []).append(depth)
            self._placeholder_positions = positions
        return self._placeholder_positions


@dataclass
class DecompilerConfig:
    timeout_seconds: float = 60.0
    max_iterations: int = 2_000_000
    const_cap: int = 32
    clone_budget: int = 10


class RegisterAllocator:
    def __init__(self) -> None:
        self.next_id = 0

    def fresh(self, pc: int) -> Register:
        reg = Register(self.next_id, pc)
        self.next_id += 1
        return reg


class Cfg:
    def __init__(self, listing: DisassemblyListing) -> None:
        self.listing = listing
        self.blocks: dict[BlockKey, TirBlock] = {}
        self.entry_key: BlockKey | None = None
        self.jumpdest_pcs: set[int] = set()
        self.original_count = 0
        self.const_cap = 32
        self.clone_counter = 0
        self.timed_out = False
        self.bounded = False
        self.iterations = 0
        self.splits = 0
        self.split_refused: set[int] = set()
        self.unresolved: set[int] = set()

    def keys_at(self, pc: int) -> list[BlockKey]:
        return sorted(k for k in self.blocks if k[0] == pc)

    def add_edge(self, src: BlockKey, dst: BlockKey) -> None:
        self.blocks[src].successors.add(dst)
        self.blocks[dst].predecessors.add(src)

    def remove_edge(self, src: BlockKey, dst: BlockKey) -> None:
        self.blocks[src].successors.discard(dst)
        self.blocks[dst].predecessors.discard(src)

    def sorted_blocks(self) -> list[TirBlock]:
        return [self.blocks[k] for k in sorted(self.blocks)]

    def fresh_clone_tag(self) -> str:
        self.clone_counter += 1
        return f"c{self.clone_counter:06d}"


class _Deadline:
    def __init__(self, seconds: float | None = None, at: float | None = None) -> None:
        self.at = at if at is not None else time.monotonic() + (seconds or 0.0)

    def expired(self) -> bool:
        return time.monotonic() > self.at


def symbolic_exec_block(instructions: list[Instruction], alloc: RegisterAllocator) -> TirBlock:
    """Destackify one block: stack traffic becomes register ops plus
    depth-indexed placeholders for whatever the entry stack supplies."""
    stack: list[Operand] = []
    consumed = 0
    overflowed = False
    ops: list[TirOp] = []
    const_regs: dict[Register, int] = {}

    def need(n: int) -> None:
        nonlocal consumed
        while len(stack) < n:
            stack.insert(0, Placeholder(consumed))
            consumed += 1

    def pop() -> Operand:
        need(1)
        return stack.pop()

    for instr in instructions:
        spec = instr.opcode
        if spec.is_push:
            reg = alloc.fresh(instr.pc)
            value = instr.operand or 0
            ops.append(TirOp(instr.pc, _CONST, reg, [], const_value=value))
            const_regs[reg] = value
            stack.append(reg)
        elif spec.is_dup:
            n = spec.shuffle_depth
            need(n)
            stack.append(stack[-n])
        elif spec.is_swap:
            n = spec.shuffle_depth
            need(n + 1)
            stack[-1], stack[-n - 1] = stack[-n - 1], stack[-1]
        elif spec.mnemonic == "POP":
            pop()
        else:
            args = [pop() for _ in range(spec.pops)]
            lhs = alloc.fresh(instr.pc) if spec.pushes else None
            ops.append(TirOp(instr.pc, spec, lhs, args))
            if lhs is not None:
                stack.append(lhs)
        if len(stack) > STACK_LIMIT:
            overflowed = True

    block = TirBlock(
        entry_pc=instructions[0].pc,
        clone_tag="",
        instructions=instructions,
        ops=ops,
        exit_stack=stack,
        consumed=consumed,
        overflowed=overflowed,
        const_regs=const_regs,
    )
    block.demands = block.initial_demands()
    return block


def _wire_static_edges(cfg: Cfg) -> None:
    """Fall-through edges, including the false branch of each JUMPI."""
    starts = {key[0] for key in cfg.blocks}
    for block in list(cfg.blocks.values()):
        last = block.instructions[-1]
        spec = last.opcode
        if last.halts or spec.mnemonic == "JUMP":
            continue
        target = last.next_pc
        if target in starts:
            cfg.add_edge(block.key, (target, ""))


class _Engine:
    """Worklist fixpoint over edges.  Placeholder cells are created on
    demand, and each queued edge carries exactly the work it owes: source
    cells that rose since the edge last ran, plus destination depths whose
    demand is new and needs a first full evaluation."""

    def __init__(self, cfg: Cfg, config: DecompilerConfig, deadline: _Deadline) -> None:
        self.cfg = cfg
        self.config = config
        self.deadline = deadline
        self.queue: deque[tuple[BlockKey, BlockKey]] = deque()
        self.pending: dict[tuple[BlockKey, BlockKey], tuple[set[int], set[int]]] = {}

    def enqueue(self, src: BlockKey, dst: BlockKey, dirty=(), fresh=()) -> None:
        edge = (src, dst)
        entry = self.pending.get(edge)
        if entry is None:
            self.pending[edge] = (set(dirty), set(fresh))
            self.queue.append(edge)
        else:
            entry[0].update(dirty)
            entry[1].update(fresh)

    def ensure_demand(self, block: TirBlock, depth: int) -> bool:
        """Record that `block` needs its entry value at `depth`.  Returns
        False when the depth is beyond the stack limit (treated as Bottom)."""
        if depth >= STACK_LIMIT:
            return False
        if depth not in block.demands:
            block.demands.add(depth)
            for pred in block.predecessors:
                self.enqueue(pred, block.key, fresh=(depth,))
        return True

    def operand_value(self, block: TirBlock, operand: Operand) -> LatticeValue:
        if isinstance(operand, Register):
            value = block.const_regs.get(operand)
            return const(value) if value is not None else TOP
        if not self.ensure_demand(block, operand.depth):
            return BOTTOM
        return block.entry_val(operand.depth)

    def exit_value(self, block: TirBlock, depth: int) -> LatticeValue:
        height = len(block.exit_stack)
        if depth < height:
            return self.operand_value(block, block.exit_stack[-1 - depth])
        inherited = depth - height + block.consumed
        if not self.ensure_demand(block, inherited):
            return BOTTOM
        return block.entry_val(inherited)

    def resolve_jumps(self, block: TirBlock) -> None:
        """Materialise edges for jump targets that have become constant.
        Edges are only ever added; values only grow within a run."""
        last = block.last_op
        if last is None or last.opcode not in (_JUMP, _JUMPI):
            return
        value = self.operand_value(block, last.args[0])
        if not value.is_const:
            return
        valid = {t for t in value.values if t in self.cfg.jumpdest_pcs}
        last.jump_targets |= valid
        added = valid - block.jump_edge_pcs
        if not added:
            return
        block.jump_edge_pcs |= valid
        for pc in added:
            for key in self.cfg.keys_at(pc):
                self.cfg.add_edge(block.key, key)
                self.enqueue(block.key, key, fresh=self.cfg.blocks[key].demands)

    def process_edge(
        self,
        src_key: BlockKey,
        dst_key: BlockKey,
        dirty: set[int],
        fresh: set[int],
    ) -> None:
        src = self.cfg.blocks.get(src_key)
        dst = self.cfg.blocks.get(dst_key)
        if src is None or dst is None:
            return
        check = {d for d in fresh if d in dst.demands}
        if dirty:
            height = len(src.exit_stack)
            consumed = src.consumed
            positions = src.placeholder_positions()
            for cell in dirty:
                for depth in positions.get(cell, ()):
                    if depth in dst.demands:
                        check.add(depth)
                if cell >= consumed:
                    passthrough = cell + height - consumed
                    if passthrough in dst.demands:
                        check.add(passthrough)
        changed: set[int] = set()
        for depth in sorted(check):
            incoming = self.exit_value(src, depth)
            old = dst.entry_val(depth)
            new = join(old, incoming, self.config.const_cap)
            assert leq(old, new)
            if new != old:
                dst.entry_vals[depth] = new
                changed.add(depth)
        if changed:
            self.resolve_jumps(dst)
            for succ in dst.successors:
                self.enqueue(dst.key, succ, dirty=changed)

    def run(self) -> None:
        cfg = self.cfg
        for block in cfg.sorted_blocks():
            self.resolve_jumps(block)
        for block in cfg.sorted_blocks():
            for succ in sorted(block.successors):
                self.enqueue(block.key, succ, fresh=cfg.blocks[succ].demands)
        while self.queue:
            if cfg.iterations >= self.config.max_iterations:
                cfg.bounded = True
                return
            if cfg.iterations % 256 == 0 and self.deadline.expired():
                cfg.timed_out = True
                return
            cfg.iterations += 1
            edge = self.queue.popleft()
            work = self.pending.pop(edge, None)
            if work is None:
                continue
            self.process_edge(edge[0], edge[1], work[0], work[1])


def _reset_values(cfg: Cfg) -> None:
    """Drop computed values after a split.  Demand sets are kept: they
    record which depths matter, which a split never shrinks, and keeping
    them spares the next run the whole demand-discovery cascade."""
    for block in cfg.blocks.values():
        block.entry_vals.clear()
        block.demands |= block.initial_demands()


def _clone_block(cfg: Cfg, original: TirBlock, tag: str, alloc: RegisterAllocator) -> TirBlock:
    mapping: dict[Register, Register] = {}

    def remap(operand: Operand) -> Operand:
        if isinstance(operand, Register):
            if operand not in mapping:
                mapping[operand] = alloc.fresh(operand.birth_pc)
            return mapping[operand]
        return operand

    ops = []
    for op in original.ops:
        lhs = None
        if op.lhs is not None:
            lhs = remap(op.lhs)
            assert isinstance(lhs, Register)
        ops.append(
            TirOp(
                pc=op.pc,
                opcode=op.opcode,
                lhs=lhs,
                args=[remap(a) for a in op.args],
                const_value=op.const_value,
                jump_targets=set(),
            )
        )
    clone = TirBlock(
        entry_pc=original.entry_pc,
        clone_tag=tag,
        instructions=original.instructions,
        ops=ops,
        exit_stack=[remap(o) for o in original.exit_stack],
        consumed=original.consumed,
        overflowed=original.overflowed,
        const_regs={mapping[r]: v for r, v in original.const_regs.items()},
    )
    clone.demands = set(original.demands)
    cfg.blocks[clone.key] = clone
    return clone


def _walk_single_pred_path(cfg: Cfg, start: TirBlock) -> list[TirBlock] | None:
    """Path [jump block, ..., head] where every element except possibly the
    head has exactly one predecessor.  None when a cycle blocks the walk."""
    path = [start]
    seen = {start.key}
    current = start
    while len(current.predecessors) == 1:
        pred_key = next(iter(current.predecessors))
        if pred_key in seen:
            return None
        current = cfg.blocks[pred_key]
        path.append(current)
        seen.add(current.key)
    return path


def split_node(cfg: Cfg, key: BlockKey, alloc: RegisterAllocator, config: DecompilerConfig) -> bool:
    """Clone the single-predecessor chain feeding an ambiguous jump, one
    copy per predecessor of the chain head.  Returns True when a split
    actually happened."""
    block = cfg.blocks[key]
    path = _walk_single_pred_path(cfg, block)
    if path is None:
        return False
    head = path[-1]
    anchor_keys = sorted(head.predecessors)
    if len(anchor_keys) < 2:
        return False
    path_keys = {b.key for b in path}
    if any(a in path_keys for a in anchor_keys):
        return False
    budget = config.clone_budget * max(cfg.original_count, 1)
    grown = len(cfg.blocks) + (len(anchor_keys) - 1) * len(path)
    if grown > budget:
        cfg.split_refused.add(key[0])
        return False

    for anchor_key in anchor_keys:
        tag = cfg.fresh_clone_tag()
        clones = {b.key: _clone_block(cfg, b, tag, alloc) for b in path}
        cfg.remove_edge(anchor_key, head.key)
        cfg.add_edge(anchor_key, clones[head.key].key)
        for original in path:
            clone = clones[original.key]
            # The ambiguous jump re-resolves per clone, so its copy starts
            # with no recorded jump edges; every other block keeps them.
            if original.key != key:
                clone.jump_edge_pcs = set(original.jump_edge_pcs)
            for succ_key in sorted(original.successors):
                if succ_key in path_keys:
                    cfg.add_edge(clone.key, clones[succ_key].key)
                elif original.key == key:
                    if succ_key[0] in _fallthrough_pcs(original):
                        cfg.add_edge(clone.key, succ_key)
                else:
                    cfg.add_edge(clone.key, succ_key)

    for original in path:
        for succ_key in list(original.successors):
            cfg.remove_edge(original.key, succ_key)
        for pred_key in list(original.predecessors):
            cfg.remove_edge(pred_key, original.key)
        del cfg.blocks[original.key]
    cfg.splits += 1
    return True


def _fallthrough_pcs(block: TirBlock) -> set[int]:
    last = block.instructions[-1]
    if last.halts or last.opcode.mnemonic == "JUMP":
        return set()
    return {last.next_pc}


def _ambiguous_jump_keys(cfg: Cfg) -> list[BlockKey]:
    keys = []
    for block in cfg.sorted_blocks():
        last = block.last_op
        if last is None or last.opcode not in (_JUMP, _JUMPI):
            continue
        operand = last.args[0]
        if isinstance(operand, Register):
            continue  # locally constant or locally unknown; cloning cannot help
        value = block.entry_val(operand.depth)
        if value.is_const and len({t for t in value.values if t in cfg.jumpdest_pcs}) > 1:
            keys.append(block.key)
    return keys


def build_cfg(
    blocks: list[TirBlock],
    config: DecompilerConfig,
    listing: DisassemblyListing,
    alloc: RegisterAllocator,
    deadline: _Deadline | None = None,
) -> Cfg:
    """Run the value fixpoint, splitting ambiguous jump chains between
    rounds until no split applies.  Clones are left in place."""
    cfg = Cfg(listing)
    for block in blocks:
        cfg.blocks[block.key] = block
    cfg.original_count = len(blocks)
    cfg.const_cap = config.const_cap
    cfg.jumpdest_pcs = {
        b.entry_pc for b in blocks if b.instructions[0].opcode.mnemonic == "JUMPDEST"
    }
    if blocks:
        cfg.entry_key = (0, "") if (0, "") in cfg.blocks else sorted(cfg.blocks)[0]
    _wire_static_edges(cfg)
    if deadline is None:
        deadline = _Deadline(config.timeout_seconds)

    while True:
        engine = _Engine(cfg, config, deadline)
        engine.run()
        if cfg.timed_out or cfg.bounded:
            break
        candidates = _ambiguous_jump_keys(cfg)
        performed = False
        for key in candidates:
            if deadline.expired():
                cfg.timed_out = True
                break
            if key in cfg.blocks and split_node(cfg, key, alloc, config):
                performed = True
        if cfg.timed_out or not performed:
            break
        _reset_values(cfg)
    return cfg


def merge_clones(cfg: Cfg) -> Cfg:
    """Collapse clones back to one block per program counter, unioning
    edges and jump targets and joining entry values."""
    by_pc: dict[int, list[BlockKey]] = {}
    for key in sorted(cfg.blocks):
        by_pc.setdefault(key[0], []).append(key)

    merged: dict[BlockKey, TirBlock] = {}
    for pc, keys in sorted(by_pc.items()):
        rep = cfg.blocks[keys[0]]
        for other_key in keys[1:]:
            other = cfg.blocks[other_key]
            for rep_op, other_op in zip(rep.ops, other.ops):
                rep_op.jump_targets |= other_op.jump_targets
            for depth, value in other.entry_vals.items():
                rep.entry_vals[depth] = join(rep.entry_val(depth), value, cfg.const_cap)
            rep.demands |= other.demands
            rep.jump_edge_pcs |= other.jump_edge_pcs
            rep.overflowed = rep.overflowed or other.overflowed
        rep.successors = {
            (succ_pc, "")
            for key in keys
            for (succ_pc, _) in cfg.blocks[key].successors
        }
        rep.predecessors = {
            (pred_pc, "")
            for key in keys
            for (pred_pc, _) in cfg.blocks[key].predecessors
        }
        rep.clone_tag = ""
        merged[(pc, "")] = rep

    cfg.blocks = merged
    if cfg.entry_key is not None:
        cfg.entry_key = (cfg.entry_key[0], "")
    pcs = [key[0] for key in cfg.blocks]
    assert len(pcs) == len(set(pcs))
    return cfg


def _convert_stranded_jumps(cfg: Cfg) -> None:
    """A jump whose target is known constant but never a valid JUMPDEST
    can only throw; rewrite it.  Unknown targets are recorded instead."""
    for block in cfg.sorted_blocks():
        last = block.last_op
        if last is None or last.opcode not in (_JUMP, _JUMPI):
            continue
        if isinstance(last.args[0], Register):
            value_num = block.const_regs.get(last.args[0])
            value = const(value_num) if value_num is not None else TOP
        else:
            value = block.entry_val(last.args[0].depth)
        if value.is_const:
            if not last.jump_targets:
                if last.opcode is _JUMP:
                    last.opcode = THROW
                    last.args = []
                else:
                    last.opcode = THROWI
                    last.args = [last.args[1]]
        else:
            cfg.unresolved.add(last.pc)


def _renumber_registers(cfg: Cfg) -> None:
    next_id = 0
    for block in cfg.sorted_blocks():
        mapping: dict[Register, Register] = {}
        for op in block.ops:
            if op.lhs is not None:
                mapping[op.lhs] = Register(next_id, op.lhs.birth_pc)
                next_id += 1

        def remap(operand: Operand) -> Operand:
            if isinstance(operand, Register):
                return mapping.get(operand, operand)
            return operand

        for op in block.ops:
            if op.lhs is not None:
                op.lhs = mapping[op.lhs]
            op.args = [remap(a) for a in op.args]
        block.exit_stack = [remap(o) for o in block.exit_stack]
        block.const_regs = {mapping.get(r, r): v for r, v in block.const_regs.items()}


@dataclass
class Decompilation:
    listing: DisassemblyListing
    cfg: Cfg
    tir: str
    dot: str

    @property
    def timed_out(self) -> bool:
        return self.cfg.timed_out

    @property
    def bounded(self) -> bool:
        return self.cfg.bounded


def decompile(
    code: bytes,
    config: DecompilerConfig | None = None,
    deadline_at: float | None = None,
) -> Decompilation:
    if config is None:
        config = DecompilerConfig()
    deadline = _Deadline(config.timeout_seconds, at=deadline_at)
    listing = disassemble(code)
    alloc = RegisterAllocator()
    blocks = [symbolic_exec_block(instrs, alloc) for instrs in listing.blocks()]
    cfg = build_cfg(blocks, config, listing, alloc, deadline)
    merge_clones(cfg)
    _convert_stranded_jumps(cfg)
    _renumber_registers(cfg)
    return Decompilation(listing, cfg, tir=format_tir(cfg), dot=format_dot(cfg))


def format_operand(block: TirBlock, operand: Operand, jump_target: bool = False) -> str:
    if isinstance(operand, Register):
        value = block.const_regs.get(operand)
        if value is not None:
            return format_word(value)
        return str(operand)
    if jump_target:
        value = block.entry_val(operand.depth)
        if value.is_singleton:
            return format_word(next(iter(value.values)))
        if value.is_const:
            inner = ", ".join(format_word(v) for v in sorted(value.values))
            return "{" + inner + "}"
    return str(operand)


def format_op(block: TirBlock, op: TirOp) -> str:
    prefix = f"{format_pc(op.pc)}: "
    name = op.opcode.mnemonic
    if name == "CONST":
        assert op.lhs is not None and op.const_value is not None
        return f"{prefix}{op.lhs} = {format_word(op.const_value)}"
    args = [format_operand(block, a) for a in op.args]
    if name in ("MSTORE", "MSTORE8"):
        cell = "M8" if name == "MSTORE8" else "M"
        return f"{prefix}{cell}[{args[0]}] = {args[1]}"
    if name == "SSTORE":
        return f"{prefix}S[{args[0]}] = {args[1]}"
    if name == "MLOAD":
        return f"{prefix}{op.lhs} = M[{args[0]}]"
    if name == "SLOAD":
        return f"{prefix}{op.lhs} = S[{args[0]}]"
    if name in ("JUMP", "JUMPI"):
        target = format_operand(block, op.args[0], jump_target=True)
        rest = args[1:]
        return f"{prefix}{name} {' '.join([target] + rest)}"
    body = name if not args else f"{name} {' '.join(args)}"
    if op.lhs is not None:
        return f"{prefix}{op.lhs} = {body}"
    return f"{prefix}{body}"


def format_tir(cfg: Cfg) -> str:
    chunks = []
    for block in cfg.sorted_blocks():
        chunks.append("\n".join(format_op(block, op) for op in block.ops) + "\n")
    return "\n".join(chunks)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def format_dot(cfg: Cfg) -> str:
    lines = ["digraph cfg {", '  node [shape=box fontname="monospace"];']
    for block in cfg.sorted_blocks():
        name = format_pc(block.entry_pc) + block.clone_tag
        label = "\\l".join(_dot_escape(format_op(block, op)) for op in block.ops) + "\\l"
        lines.append(f'  "{name}" [label="{label}"];')
    for block in cfg.sorted_blocks():
        src = format_pc(block.entry_pc) + block.clone_tag
        for succ in sorted(block.successors):
            dst = format_pc(succ[0]) + succ[1]
            lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
