"""Collection of deployed contract bytecode over JSON-RPC.

The scraper walks a block range, spots contract-creating transactions,
and saves each created contract's runtime code to `<address>.hex` next
to an `index.tsv` recording where it came from.  Nodes differ in how
they expose creations: Parity attaches a `creates` field to the
transaction itself, while the standard interface leaves `to` null and
puts the address in the receipt.  Both shapes are handled.

Transports are pluggable so tests can replay recorded exchanges without
a network: `HttpTransport` speaks JSON-RPC 2.0 over HTTP with retries,
`FixtureTransport` serves canned responses.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests


class RpcError(Exception):
    """A JSON-RPC exchange failed or returned an error object."""


class RpcTransport(Protocol):
    def request(self, method: str, params: list) -> object: ...


class HttpTransport:
    def __init__(self, endpoint: str, session=None, retries: int = 3,
                 backoff: float = 0.5, timeout: float = 30.0):
        self.endpoint = endpoint
        self.session = session if session is not None else requests.Session()
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self._ids = itertools.count(1)

    def request(self, method: str, params: list) -> object:
        payload = {
            "jsonrpc": "2.0",
            "id": next(self._ids),
            "method": method,
            "params": list(params),
        }
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                response = self.session.post(
                    self.endpoint, json=payload, timeout=self.timeout)
                response.raise_for_status()
                body = response.json()
            except Exception as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * (2 ** attempt))
                continue
            error = body.get("error")
            if error:
                raise RpcError(f"{method}: {error}")
            return body.get("result")
        raise RpcError(
            f"{method} failed after {self.retries} attempts: {last_error}")


class FixtureTransport:
    """Replays recorded (method, params, result) exchanges."""

    def __init__(self, exchanges):
        self.calls: list[tuple[str, list]] = []
        self._table = {
            self._key(method, params): result
            for method, params, result in exchanges
        }

    @staticmethod
    def _key(method: str, params: list) -> tuple[str, str]:
        return method, json.dumps(list(params), sort_keys=True)

    def request(self, method: str, params: list) -> object:
        self.calls.append((method, list(params)))
        key = self._key(method, params)
        if key not in self._table:
            raise RpcError(f"no recorded response for {method} {params}")
        return self._table[key]


@dataclass
class ScrapeResult:
    created: list[tuple[str, int, str]] = field(default_factory=list)
    skipped_existing: int = 0
    errors: list[str] = field(default_factory=list)


def _creation_addresses(transport: RpcTransport, tx: dict,
                        receipt_fallback: bool,
                        trace_internal: bool) -> list[str]:
    """Creations by this transaction: the direct one, plus, when tracing
    is on, contracts created by nested calls."""
    found: list[str] = []
    creates = tx.get("creates")
    if creates:
        found.append(creates)
    elif tx.get("to") is None and receipt_fallback:
        receipt = transport.request("eth_getTransactionReceipt", [tx["hash"]])
        if isinstance(receipt, dict) and receipt.get("contractAddress"):
            found.append(receipt["contractAddress"])
    if trace_internal:
        traces = transport.request("trace_transaction", [tx["hash"]])
        for entry in traces if isinstance(traces, list) else []:
            if entry.get("type") != "create" or entry.get("error"):
                continue
            address = (entry.get("result") or {}).get("address")
            if address:
                found.append(address)
    unique: list[str] = []
    for address in found:
        lowered = address.lower()
        if lowered not in unique:
            unique.append(lowered)
    return unique


def _read_index(path: Path) -> set[tuple[str, int, str]]:
    rows: set[tuple[str, int, str]] = set()
    if path.exists():
        for line in path.read_text().splitlines():
            if line:
                address, block, tx_hash = line.split("\t")
                rows.add((address, int(block), tx_hash))
    return rows


def _write_index(path: Path, rows: set[tuple[str, int, str]]) -> None:
    lines = [f"{address}\t{block}\t{tx_hash}\n"
             for address, block, tx_hash in sorted(rows)]
    path.write_text("".join(lines))


def scrape_range(transport: RpcTransport, out_dir: str | Path,
                 from_block: int, to_block: int,
                 receipt_fallback: bool = True,
                 trace_internal: bool = False) -> ScrapeResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index_path = out / "index.tsv"
    index_rows = _read_index(index_path)
    result = ScrapeResult()

    for number in range(from_block, to_block + 1):
        try:
            block = transport.request(
                "eth_getBlockByNumber", [hex(number), True])
        except RpcError as exc:
            result.errors.append(f"block {number}: {exc}")
            continue
        if not isinstance(block, dict):
            result.errors.append(f"block {number}: missing")
            continue
        for tx in block.get("transactions", []):
            tx_hash = tx.get("hash", "?")
            try:
                addresses = _creation_addresses(
                    transport, tx, receipt_fallback, trace_internal)
                for address in addresses:
                    code_path = out / f"{address}.hex"
                    if code_path.exists():
                        result.skipped_existing += 1
                        index_rows.add((address, number, tx_hash))
                        continue
                    code = transport.request(
                        "eth_getCode", [address, hex(number)])
                    if not code or code == "0x":
                        result.errors.append(f"{address}: empty code")
                        continue
                    code_path.write_text(f"{code}\n")
                    index_rows.add((address, number, tx_hash))
                    result.created.append((address, number, tx_hash))
            except RpcError as exc:
                result.errors.append(f"tx {tx_hash}: {exc}")

    _write_index(index_path, index_rows)
    return result
