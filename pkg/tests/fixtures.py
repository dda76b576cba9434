"""Frozen fixture bytecodes shared between unit and acceptance tests.

Each stream is kept as a spaced hex string so single instructions stay
reviewable against the disassembly the tests expect.
"""

from __future__ import annotations

from evmsleuth.isa import parse_hex

# Selector dispatcher that compares CALLDATA[0] >> 224 against a hash,
# falls into a STOP block on mismatch, and answers a storage probe
# otherwise.  Used for the golden disassembly listing.
DISPATCH_HEX = (
    "6060 6040 52"
    " 60e0 6002 0a 6000 35 04"
    " 63193ddd2c 81 14 601a 57"
    " 5b 00"
    " 5b 6000 54 6005 14 6060 90 81 52 6020 90 f3"
)

# Recursive factorial contract: selector check, recursive call loop that
# pushes return addresses on the stack, multiply on the way back out.
# The return jump at 0x64 sees the two-element target set {0x4a, 0x5c}.
FACTORIAL_HEX = (
    "6060 6040 52"
    " 7c0100000000000000000000000000000000000000000000000000000000"
    " 6000 35 04 630b95d228 90 14 6033 57"
    " 5b 00"
    " 5b 604a 6004 35"
    " 5b 6000 81 6000 14 15 610065 57"
    " 6001 6060 56"
    " 5b 6040 80 51 82 90 52 51 80 80 90 03 6020 01 90 f3"
    " 5b 02 80 90"
    " 5b 92 90 50 56"
    " 5b 50 605c 6001 82 03 6039 56"
)

# Two callers push different continuation addresses and jump into a shared
# body whose exit jump is therefore two-valued until the chain is cloned.
TWO_CALLERS_HEX = (
    "34 6014 57"
    " 6010 600a 56"
    " 00"
    " 5b 6001 50"
    " 5b 56"
    " 5b 00"
    " 5b 00"
    " 5b 6012 600a 56"
)


def dispatch_bytes() -> bytes:
    return parse_hex(DISPATCH_HEX.replace(" ", ""))


def factorial_bytes() -> bytes:
    return parse_hex(FACTORIAL_HEX.replace(" ", ""))


def two_callers_bytes() -> bytes:
    return parse_hex(TWO_CALLERS_HEX.replace(" ", ""))
