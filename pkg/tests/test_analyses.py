"""Vulnerability analyses on paired vulnerable and hardened contracts."""

from evmsleuth.analyses import run_analyses
from evmsleuth.decompiler import decompile
from evmsleuth.extract import extract_facts

from helpers import assemble

UNCHECKED_VULN = """
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 1
    PUSH 0xdead
    PUSH 0x5208
    CALL
    POP
    STOP
"""

UNCHECKED_SAFE = """
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 1
    PUSH 0xdead
    PUSH 0x5208
    CALL
    ISZERO
    PUSH fail
    JUMPI
    STOP
fail:
    PUSH 0
    PUSH 0
    REVERT
"""

REENTRANT_VULN = """
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0xbeef
    GAS
    CALL
    POP
    STOP
"""

REENTRANT_SAFE = """
    PUSH 0
    SLOAD
    PUSH locked
    JUMPI
    PUSH 1
    PUSH 0
    SSTORE
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0xbeef
    GAS
    CALL
    POP
    PUSH 0
    PUSH 0
    SSTORE
    STOP
locked:
    PUSH 0
    PUSH 0
    REVERT
"""

# An "initializer" anyone can call rewrites the payout address slot, so
# the owner comparison in front of the send guards nothing.
SEND_VULN = """
    PUSH 0
    CALLDATALOAD
    PUSH 0xe0
    PUSH 2
    EXP
    SWAP1
    DIV
    DUP1
    PUSH 0x11111111
    EQ
    PUSH setowner
    JUMPI
    DUP1
    PUSH 0x22222222
    EQ
    PUSH payout
    JUMPI
    STOP
setowner:
    CALLER
    PUSH 0
    SSTORE
    STOP
payout:
    CALLER
    PUSH 0
    SLOAD
    EQ
    PUSH doit
    JUMPI
    PUSH 0
    PUSH 0
    REVERT
doit:
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0
    PUSH 0x2386f26fc10000
    PUSH 0
    SLOAD
    PUSH 0x5208
    CALL
    POP
    STOP
"""

SEND_SAFE = SEND_VULN.replace("""setowner:
    CALLER
    PUSH 0
    SSTORE""", """setowner:
    CALLER
    PUSH 1
    SSTORE""")

DESTRUCT_VULN = """
    CALLER
    SELFDESTRUCT
"""

DESTRUCT_SAFE = """
    CALLER
    PUSH 0
    SLOAD
    EQ
    PUSH ok
    JUMPI
    PUSH 0
    PUSH 0
    REVERT
ok:
    CALLER
    SELFDESTRUCT
"""

ORIGIN_VULN = """
    ORIGIN
    PUSH 0
    SLOAD
    EQ
    PUSH ok
    JUMPI
    PUSH 0
    PUSH 0
    REVERT
ok:
    PUSH 1
    PUSH 1
    SSTORE
    STOP
"""

ORIGIN_SAFE = ORIGIN_VULN.replace("ORIGIN", "CALLER")


def findings_for(text, naive=False):
    facts = extract_facts(decompile(assemble(text)))
    return run_analyses(facts, naive=naive)


def of_class(findings, name):
    return [f for f in findings if f.analysis == name]


def test_unchecked_call_flagged():
    hits = of_class(findings_for(UNCHECKED_VULN), "unchecked_call")
    assert len(hits) == 1
    assert hits[0].opcode == "CALL"
    assert any(w.startswith("result=") for w in hits[0].witness)


def test_checked_call_not_flagged():
    assert of_class(findings_for(UNCHECKED_SAFE), "unchecked_call") == []


def test_reentrant_call_flagged():
    hits = of_class(findings_for(REENTRANT_VULN), "reentrant_call")
    assert len(hits) == 1
    assert any(w.startswith("gas_from=") for w in hits[0].witness)


def test_mutexed_call_not_flagged():
    findings = findings_for(REENTRANT_SAFE)
    assert of_class(findings, "reentrant_call") == []


def test_unsecured_send_flagged():
    hits = of_class(findings_for(SEND_VULN), "unsecured_send")
    assert len(hits) == 1
    assert any(w.startswith("manipulable_source=") for w in hits[0].witness)


def test_owner_send_with_fixed_slot_not_flagged():
    assert of_class(findings_for(SEND_SAFE), "unsecured_send") == []


def test_bare_selfdestruct_flagged():
    hits = of_class(findings_for(DESTRUCT_VULN), "destroyable")
    assert len(hits) == 1
    assert any(w.startswith("beneficiary=") for w in hits[0].witness)


def test_guarded_selfdestruct_not_flagged():
    assert of_class(findings_for(DESTRUCT_SAFE), "destroyable") == []


def test_origin_auth_flagged():
    hits = of_class(findings_for(ORIGIN_VULN), "origin_used")
    assert len(hits) == 1
    assert hits[0].opcode == "ORIGIN"
    assert any(w.startswith("used_at=") for w in hits[0].witness)


def test_caller_auth_not_flagged():
    assert of_class(findings_for(ORIGIN_SAFE), "origin_used") == []


def test_popped_result_also_unchecked_in_reentrant_fixture():
    findings = findings_for(REENTRANT_VULN)
    assert of_class(findings, "unchecked_call") != []


def test_both_evaluators_agree_on_fixtures():
    for text in (SEND_VULN, REENTRANT_SAFE, DESTRUCT_SAFE):
        assert findings_for(text, naive=True) == findings_for(text)


def test_findings_are_deterministic():
    assert findings_for(SEND_VULN) == findings_for(SEND_VULN)
