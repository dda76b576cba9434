"""Chain scraping against recorded RPC exchanges."""

import requests

from evmsleuth.ingest import (
    FixtureTransport,
    HttpTransport,
    RpcError,
    scrape_range,
)

import pytest

TX_PARITY = {"hash": "0xth1", "to": None, "creates": "0xAAAA1111"}
TX_RECEIPT = {"hash": "0xth2", "to": None}
TX_PLAIN = {"hash": "0xth3", "to": "0xcccc3333"}

EXCHANGES = [
    ("eth_getBlockByNumber", ["0x1", True], {"transactions": [TX_PARITY]}),
    ("eth_getBlockByNumber", ["0x2", True],
     {"transactions": [TX_RECEIPT, TX_PLAIN]}),
    ("eth_getTransactionReceipt", ["0xth2"],
     {"contractAddress": "0xbbbb2222"}),
    ("eth_getCode", ["0xaaaa1111", "0x1"], "0x6001600101"),
    ("eth_getCode", ["0xbbbb2222", "0x2"], "0x60606040"),
]


def test_scrape_two_block_fixture(tmp_path):
    transport = FixtureTransport(EXCHANGES)
    result = scrape_range(transport, tmp_path, 1, 2)
    assert result.created == [
        ("0xaaaa1111", 1, "0xth1"),
        ("0xbbbb2222", 2, "0xth2"),
    ]
    assert result.errors == []
    assert (tmp_path / "0xaaaa1111.hex").read_text() == "0x6001600101\n"
    assert (tmp_path / "0xbbbb2222.hex").read_text() == "0x60606040\n"
    assert (tmp_path / "index.tsv").read_text() == (
        "0xaaaa1111\t1\t0xth1\n0xbbbb2222\t2\t0xth2\n")


def test_scrape_is_idempotent(tmp_path):
    scrape_range(FixtureTransport(EXCHANGES), tmp_path, 1, 2)
    index_before = (tmp_path / "index.tsv").read_bytes()
    again = FixtureTransport(EXCHANGES)
    result = scrape_range(again, tmp_path, 1, 2)
    assert result.created == []
    assert result.skipped_existing == 2
    assert (tmp_path / "index.tsv").read_bytes() == index_before
    assert all(method != "eth_getCode" for method, _ in again.calls)


def test_failure_is_isolated_per_transaction(tmp_path):
    exchanges = [e for e in EXCHANGES
                 if e[0] != "eth_getTransactionReceipt"]
    result = scrape_range(FixtureTransport(exchanges), tmp_path, 1, 2)
    assert result.created == [("0xaaaa1111", 1, "0xth1")]
    assert len(result.errors) == 1
    assert "0xth2" in result.errors[0]


def test_empty_code_is_reported_not_written(tmp_path):
    exchanges = [
        ("eth_getBlockByNumber", ["0x1", True],
         {"transactions": [TX_PARITY]}),
        ("eth_getCode", ["0xaaaa1111", "0x1"], "0x"),
    ]
    result = scrape_range(FixtureTransport(exchanges), tmp_path, 1, 1)
    assert result.created == []
    assert any("empty code" in e for e in result.errors)
    assert not (tmp_path / "0xaaaa1111.hex").exists()


def test_trace_mode_finds_internal_creations(tmp_path):
    factory_tx = {"hash": "0xthf", "to": "0xfac70000"}
    exchanges = [
        ("eth_getBlockByNumber", ["0x1", True],
         {"transactions": [factory_tx]}),
        ("trace_transaction", ["0xthf"], [
            {"type": "call"},
            {"type": "create", "result": {"address": "0xDDDD4444"}},
            {"type": "create", "error": "out of gas"},
        ]),
        ("eth_getCode", ["0xdddd4444", "0x1"], "0x6042"),
    ]
    result = scrape_range(FixtureTransport(exchanges), tmp_path, 1, 1,
                          trace_internal=True)
    assert result.created == [("0xdddd4444", 1, "0xthf")]
    assert (tmp_path / "0xdddd4444.hex").read_text() == "0x6042\n"


class _Response:
    def __init__(self, body):
        self._body = body

    def raise_for_status(self):
        pass

    def json(self):
        return self._body


class _FlakySession:
    def __init__(self, failures, body):
        self.failures = failures
        self.body = body
        self.posts = 0

    def post(self, url, json=None, timeout=None):
        self.posts += 1
        if self.posts <= self.failures:
            raise requests.ConnectionError("boom")
        return _Response(self.body)


def test_http_transport_retries_then_succeeds():
    session = _FlakySession(2, {"jsonrpc": "2.0", "id": 1, "result": "0x1"})
    transport = HttpTransport("http://node", session=session,
                              retries=3, backoff=0.0)
    assert transport.request("eth_blockNumber", []) == "0x1"
    assert session.posts == 3


def test_http_transport_gives_up_after_retries():
    session = _FlakySession(99, {})
    transport = HttpTransport("http://node", session=session,
                              retries=3, backoff=0.0)
    with pytest.raises(RpcError):
        transport.request("eth_blockNumber", [])
    assert session.posts == 3


def test_http_transport_error_object_is_not_retried():
    body = {"jsonrpc": "2.0", "id": 1,
            "error": {"code": -32000, "message": "nope"}}
    session = _FlakySession(0, body)
    transport = HttpTransport("http://node", session=session,
                              retries=3, backoff=0.0)
    with pytest.raises(RpcError):
        transport.request("eth_blockNumber", [])
    assert session.posts == 1
