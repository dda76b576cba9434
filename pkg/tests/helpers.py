"""Shared test tooling: a tiny EVM assembler for building fixtures.

Supports labels (`name:` emits a JUMPDEST and records the offset), `PUSH`
with a label argument (always encoded as PUSH2 so layout is deterministic),
`PUSHn <value>` with explicit width, bare mnemonics, and `.byte 0xNN` for raw
bytes. Hex (0x...) and decimal immediates are accepted.
"""

from __future__ import annotations

from evmsleuth.isa import OPCODES_BY_NAME


def _parse_int(text: str) -> int:
    return int(text, 16) if text.lower().startswith("0x") else int(text, 10)


def _min_width(value: int) -> int:
    return max(1, (value.bit_length() + 7) // 8)


def _lines(text: str) -> list[tuple[str, str | None]]:
    out = []
    for raw in text.splitlines():
        line = raw.split(";")[0].strip()
        if not line:
            continue
        if line.endswith(":"):
            out.append(("LABEL", line[:-1]))
            continue
        parts = line.split(None, 1)
        out.append((parts[0].upper() if parts[0] != ".byte" else ".byte",
                    parts[1].strip() if len(parts) > 1 else None))
    return out


def _size(op: str, arg: str | None, labels: dict[str, int]) -> int:
    if op == "LABEL":
        return 1
    if op == ".byte":
        return 1
    if op == "PUSH":
        assert arg is not None
        if arg in labels or not arg[0].isdigit():
            return 3
        return 1 + _min_width(_parse_int(arg))
    if op.startswith("PUSH") and op != "PUSH":
        return 1 + int(op[4:])
    return 1


def assemble(text: str) -> bytes:
    items = _lines(text)

    labels: dict[str, int] = {}
    offset = 0
    for op, arg in items:
        if op == "LABEL":
            labels[arg or ""] = offset
        offset += _size(op, arg, labels)

    out = bytearray()
    for op, arg in items:
        if op == "LABEL":
            out.append(OPCODES_BY_NAME["JUMPDEST"].byte_value)
            continue
        if op == ".byte":
            assert arg is not None
            out.append(_parse_int(arg))
            continue
        if op == "PUSH":
            assert arg is not None
            if arg in labels:
                out.append(OPCODES_BY_NAME["PUSH2"].byte_value)
                out.extend(labels[arg].to_bytes(2, "big"))
            else:
                value = _parse_int(arg)
                width = _min_width(value)
                out.append(0x5F + width)
                out.extend(value.to_bytes(width, "big"))
            continue
        if op.startswith("PUSH"):
            width = int(op[4:])
            assert arg is not None
            value = labels[arg] if arg in labels else _parse_int(arg)
            out.append(0x5F + width)
            out.extend(value.to_bytes(width, "big"))
            continue
        spec = OPCODES_BY_NAME.get(op)
        if spec is None:
            raise ValueError(f"unknown mnemonic {op!r}")
        assert arg is None, f"unexpected argument for {op}"
        out.append(spec.byte_value)
    return bytes(out)
