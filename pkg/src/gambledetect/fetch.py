"""Remote data source interface (etherscan-style HTTP API).

Offline CSV files remain the canonical input; this client only exists so the
same record types can be filled from an explorer API when one is reachable.
"""
from __future__ import annotations

import json
import urllib.parse
import urllib.request
from typing import Callable, List, Optional, Protocol

from .dataset_io import TransactionRecord


class ChainDataSource(Protocol):
    def get_bytecode(self, account: str) -> str: ...

    def get_transactions(self, account: str, page: int = 1, page_size: int = 1000) -> List[TransactionRecord]: ...


class FetchError(RuntimeError):
    pass


def parse_txlist(payload: dict) -> List[TransactionRecord]:
    """Convert an ``account/txlist`` response into transaction records.

    Contract-creation rows have an empty ``to`` and use ``contractAddress``.
    """
    if str(payload.get("status")) != "1":
        if payload.get("message", "").lower().startswith("no transactions"):
            return []
        raise FetchError(f"API error: {payload.get('message')}: {payload.get('result')}")
    out = []
    for item in payload["result"]:
        to = item.get("to") or item.get("contractAddress", "")
        out.append(TransactionRecord(item["hash"].lower(), item["from"].lower(), to.lower(), int(item["value"])))
    return out


def parse_code(payload: dict) -> str:
    """Bytecode from an ``eth_getCode`` proxy response (``0x`` for accounts without code)."""
    if "error" in payload:
        raise FetchError(f"API error: {payload['error']}")
    return payload["result"].lower()


class EtherscanClient:
    def __init__(self, api_key: str, base_url: str = "https://api.etherscan.io/api",
                 opener: Optional[Callable[[str], bytes]] = None):
        self.api_key = api_key
        self.base_url = base_url
        self._open = opener or self._http_get

    @staticmethod
    def _http_get(url: str) -> bytes:
        with urllib.request.urlopen(url, timeout=30) as resp:
            return resp.read()

    def url(self, **params) -> str:
        return f"{self.base_url}?{urllib.parse.urlencode(params | {'apikey': self.api_key})}"

    def _get(self, **params) -> dict:
        return json.loads(self._open(self.url(**params)))

    def get_bytecode(self, account: str) -> str:
        return parse_code(self._get(module="proxy", action="eth_getCode", address=account, tag="latest"))

    def get_transactions(self, account: str, page: int = 1, page_size: int = 1000) -> List[TransactionRecord]:
        return parse_txlist(self._get(module="account", action="txlist", address=account,
                                      page=page, offset=page_size, sort="asc"))
