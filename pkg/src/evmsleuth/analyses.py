"""Vulnerability analyses over extracted control- and data-flow facts.

The rule library derives a demand-restricted dependency closure: only
operands that feed a security-relevant statement (call operands, branch
conditions, storage writes, conditional throws) are used as closure
roots, which keeps the derived relation linear in practice instead of
quadratic in the number of registers.

Guard reasoning is deliberately two-sided.  A branch condition counts as
protective when it depends on the caller identity or on a storage slot
no untrusted caller can write, and it is discounted again when it also
depends on calldata, on the call value, or on a slot that any caller can
overwrite.  A comparison against a freely writable "owner" slot is
therefore not accepted as a guard.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datalog import ANY, FactBase, Program, Var, neg, neq

ANALYSIS_NAMES = (
    "destroyable",
    "origin_used",
    "reentrant_call",
    "unchecked_call",
    "unsecured_send",
)

_IDB = [
    ("seed", 1),
    ("dependEdge", 2),
    ("depends", 2),
    ("dependsR", 2),
    ("callResult", 2),
    ("throwStmt", 1),
    ("blockEdge", 2),
    ("reachableBlock", 1),
    ("jumpiSucc", 2),
    ("branchReach", 2),
    ("sink", 1),
    ("anchor", 1),
    ("sdom", 2),
    ("spdom", 2),
    ("manipSeed", 1),
    ("manipulableSlot", 1),
    ("manipSource", 1),
    ("taintSeed", 1),
    ("condTainted", 1),
    ("protSource", 1),
    ("condProtected", 1),
    ("guarded", 1),
    ("inaccessible", 1),
    ("fromCallValueOp", 1),
    ("checkedCallThrows", 1),
    ("checkedCallStateUpdate", 1),
    ("gassy", 2),
    ("protectedByLoc", 2),
    ("targetManipulable", 2),
    ("originUse", 2),
    ("uncheckedCall", 1),
    ("reentrantCall", 1),
    ("unsecuredSend", 1),
    ("destroyable", 1),
    ("originUsed", 1),
]


def build_program(facts: FactBase) -> Program:
    program = Program()
    facts.feed(program)
    for name, arity in _IDB:
        program.declare(name, arity)

    a, c, d, g, h, j, k, m, r, s, t, u, v, w, x, y, z = (
        Var(n) for n in "acdghjkmrstuvwxyz")
    h1, h2, ha, hs = Var("h1"), Var("h2"), Var("ha"), Var("hs")
    k1, k2, k3, w1, w2, lv = (
        Var("k1"), Var("k2"), Var("k3"), Var("w1"), Var("w2"), Var("lv"))
    slot = Var("slot")

    def rule(head, *body):
        program.rule(head, body)

    # Closure roots: operands of the statements the analyses ask about.
    rule(("seed", g), ("op_CALL", ANY, g, ANY, ANY, ANY, ANY, ANY, ANY))
    rule(("seed", t), ("op_CALL", ANY, ANY, t, ANY, ANY, ANY, ANY, ANY))
    rule(("seed", v), ("op_CALL", ANY, ANY, ANY, v, ANY, ANY, ANY, ANY))
    rule(("seed", c), ("op_JUMPI", ANY, ANY, c))
    rule(("seed", c), ("op", s, "THROWI"), ("use", c, s, "0"))
    rule(("seed", k), ("sstore", ANY, k, ANY))
    rule(("seed", v), ("sstore", ANY, ANY, v))

    rule(("dependEdge", x, y), ("def", x, s), ("use", y, s, ANY))
    rule(("dependEdge", x, y), ("flow", x, y))
    rule(("depends", x, y), ("seed", x), ("dependEdge", x, y))
    rule(("depends", x, z), ("depends", x, y), ("dependEdge", y, z))
    rule(("dependsR", x, x), ("seed", x))
    rule(("dependsR", x, y), ("depends", x, y))

    rule(("callResult", v, s), ("op", s, "CALL"), ("def", v, s))
    for mnemonic in ("REVERT", "INVALID", "THROW", "THROWI"):
        rule(("throwStmt", s), ("op", s, mnemonic))

    rule(("blockEdge", h1, h2), ("edge", t, h2), ("in_block", t, h1))
    rule(("reachableBlock", h), ("entry", h))
    rule(("reachableBlock", h2), ("reachableBlock", h1), ("blockEdge", h1, h2))
    rule(("jumpiSucc", j, h2), ("op_JUMPI", j, ANY, ANY),
         ("in_block", j, h1), ("blockEdge", h1, h2))
    rule(("branchReach", j, h), ("jumpiSucc", j, h))
    rule(("branchReach", j, h2), ("branchReach", j, h1), ("blockEdge", h1, h2))

    # Statement-level dominance, restricted to the pairs the analyses
    # consult: guard-shaped statements against call/destruct sinks.
    rule(("sink", s), ("op", s, "CALL"))
    rule(("sink", s), ("op", s, "SELFDESTRUCT"))
    rule(("anchor", a), ("sstore", a, ANY, ANY))
    rule(("anchor", a), ("op_JUMPI", a, ANY, ANY))
    rule(("sdom", a, s), ("anchor", a), ("sink", s), ("before", a, s))
    rule(("sdom", a, s), ("anchor", a), ("sink", s), ("in_block", a, ha),
         ("in_block", s, hs), ("dom", ha, hs), neq(ha, hs))
    rule(("spdom", a, s), ("anchor", a), ("sink", s), ("before", s, a))
    rule(("spdom", a, s), ("anchor", a), ("sink", s), ("in_block", a, ha),
         ("in_block", s, hs), ("pdom", ha, hs), neq(ha, hs))

    # Which storage slots can an arbitrary caller overwrite.
    for mnemonic in ("CALLER", "CALLDATALOAD", "ORIGIN"):
        rule(("manipSeed", m), ("def", m, s), ("op", s, mnemonic))
    rule(("manipulableSlot", slot), ("sstore", ANY, k, v),
         ("value", k, slot), ("dependsR", v, m), ("manipSeed", m))
    rule(("manipSource", m), ("manipSeed", m))
    rule(("manipSource", m), ("sload", ANY, k, m), ("value", k, slot),
         ("manipulableSlot", slot))

    # Guard quality: protective sources versus tainting sources.
    for mnemonic in ("CALLDATALOAD", "CALLVALUE"):
        rule(("taintSeed", t), ("def", t, s), ("op", s, mnemonic))
    rule(("taintSeed", t), ("sload", ANY, k, t), ("value", k, slot),
         ("manipulableSlot", slot))
    rule(("condTainted", c), ("op_JUMPI", ANY, ANY, c),
         ("dependsR", c, t), ("taintSeed", t))
    for mnemonic in ("CALLER", "ORIGIN"):
        rule(("protSource", g), ("def", g, s), ("op", s, mnemonic))
    rule(("protSource", g), ("sload", ANY, k, g), ("value", k, slot),
         neg(("manipulableSlot", slot)))
    rule(("condProtected", c), ("op_JUMPI", ANY, ANY, c),
         ("dependsR", c, g), ("protSource", g), neg(("condTainted", c)))

    rule(("guarded", s), ("sink", s), ("op_JUMPI", j, ANY, c),
         ("condProtected", c), ("sdom", j, s))
    rule(("inaccessible", s), ("sink", s), ("in_block", s, h),
         neg(("reachableBlock", h)))
    rule(("inaccessible", s), ("guarded", s))

    rule(("fromCallValueOp", v), ("def", v, s), ("op", s, "CALLVALUE"))

    # Unchecked call result: no branch fed by the result reaches a throw
    # or a state update.
    rule(("checkedCallThrows", s), ("callResult", v, s),
         ("op_JUMPI", j, ANY, c), ("dependsR", c, v),
         ("throwStmt", t), ("in_block", t, h), ("branchReach", j, h))
    rule(("checkedCallThrows", s), ("callResult", v, s),
         ("op", t, "THROWI"), ("use", c, t, "0"), ("dependsR", c, v))
    rule(("checkedCallStateUpdate", s), ("callResult", v, s),
         ("op_JUMPI", j, ANY, c), ("dependsR", c, v),
         ("sstore", u, ANY, ANY), ("in_block", u, h), ("branchReach", j, h))
    rule(("uncheckedCall", s), ("callResult", ANY, s),
         neg(("checkedCallThrows", s)), neg(("checkedCallStateUpdate", s)))

    # Reentrancy: a call forwarding unbounded gas, with no storage mutex
    # written before it, restored after it, and checked on the way in.
    rule(("gassy", s, d), ("op_CALL", s, g, ANY, ANY, ANY, ANY, ANY, ANY),
         ("dependsR", g, r), ("def", r, d), ("op", d, "GAS"))
    rule(("protectedByLoc", s, slot), ("op", s, "CALL"),
         ("sstore", w1, k1, ANY), ("sdom", w1, s), ("value", k1, slot),
         ("sstore", w2, k2, ANY), ("spdom", w2, s), ("value", k2, slot),
         ("sload", ANY, k3, lv), ("value", k3, slot),
         ("op_JUMPI", j, ANY, c), ("dependsR", c, lv), ("sdom", j, s))
    rule(("reentrantCall", s), ("gassy", s, ANY),
         neg(("protectedByLoc", s, ANY)))

    # Unsecured send: nonzero value to a target any caller can steer,
    # with no protective guard dominating the call.
    rule(("targetManipulable", s, m),
         ("op_CALL", s, ANY, t, ANY, ANY, ANY, ANY, ANY),
         ("dependsR", t, m), ("manipSource", m), neg(("value", t, ANY)))
    rule(("unsecuredSend", s), ("targetManipulable", s, ANY),
         ("op_CALL", s, ANY, ANY, v, ANY, ANY, ANY, ANY),
         neg(("value", v, "0x0")), neg(("fromCallValueOp", v)),
         neg(("inaccessible", s)))

    rule(("destroyable", s), ("op", s, "SELFDESTRUCT"),
         neg(("inaccessible", s)))

    # tx.origin feeding a stored value, a stored key, or a branch.
    rule(("originUse", s, u), ("def", v, s), ("op", s, "ORIGIN"),
         ("sstore", u, ANY, w), ("dependsR", w, v))
    rule(("originUse", s, u), ("def", v, s), ("op", s, "ORIGIN"),
         ("sstore", u, k, ANY), ("dependsR", k, v))
    rule(("originUse", s, u), ("def", v, s), ("op", s, "ORIGIN"),
         ("op_JUMPI", u, ANY, c), ("dependsR", c, v))
    rule(("originUsed", s), ("originUse", s, ANY))
    return program


@dataclass(frozen=True)
class Finding:
    analysis: str
    pc: str
    opcode: str
    witness: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "analysis": self.analysis,
            "pc": self.pc,
            "opcode": self.opcode,
            "witness": list(self.witness),
        }


def _opcode_at(db: dict[str, set[tuple]], stmt: str) -> str:
    for row_stmt, mnemonic in db["op"]:
        if row_stmt == stmt:
            return mnemonic
    return "?"


def _collect(db, relation, stmt, position, label) -> list[str]:
    hits = sorted(row for row in db[relation] if row[0] == stmt)
    return [f"{label}={row[position]}" for row in hits]


def run_analyses(facts: FactBase, deadline_at: float | None = None,
                 naive: bool = False) -> list[Finding]:
    program = build_program(facts)
    if naive:
        db = program.naive_evaluate()
    else:
        db = program.evaluate(deadline_at=deadline_at)

    findings: list[Finding] = []

    for (stmt,) in db["uncheckedCall"]:
        witness = [f"result={v}" for v, s in sorted(db["callResult"])
                   if s == stmt]
        findings.append(Finding("unchecked_call", stmt,
                                _opcode_at(db, stmt), tuple(witness)))

    for (stmt,) in db["reentrantCall"]:
        witness = _collect(db, "gassy", stmt, 1, "gas_from")
        for row in sorted(db["op_CALL"]):
            if row[0] == stmt:
                witness.append(f"gas_operand={row[1]}")
        findings.append(Finding("reentrant_call", stmt,
                                _opcode_at(db, stmt), tuple(witness)))

    for (stmt,) in db["unsecuredSend"]:
        witness = _collect(db, "targetManipulable", stmt, 1,
                           "manipulable_source")
        for row in sorted(db["op_CALL"]):
            if row[0] == stmt:
                witness.append(f"target={row[2]}")
                witness.append(f"value_operand={row[3]}")
        findings.append(Finding("unsecured_send", stmt,
                                _opcode_at(db, stmt), tuple(witness)))

    for (stmt,) in db["destroyable"]:
        witness = [f"beneficiary={var}" for var, s, i in sorted(db["use"])
                   if s == stmt and i == "0"]
        findings.append(Finding("destroyable", stmt,
                                _opcode_at(db, stmt), tuple(witness)))

    for (stmt,) in db["originUsed"]:
        witness = _collect(db, "originUse", stmt, 1, "used_at")
        findings.append(Finding("origin_used", stmt,
                                _opcode_at(db, stmt), tuple(witness)))

    findings.sort(key=lambda f: (f.analysis, int(f.pc, 16)))
    return findings
