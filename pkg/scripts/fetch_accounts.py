"""Build contracts.csv / addresses.csv / transactions.csv from labeled account lists.

Input lists are ``account,label`` CSVs. Bytecode and transaction history come
from an etherscan-compatible API; pass the key with --api-key or ETHERSCAN_API_KEY.
"""
import argparse
import logging
import os
import time

from gambledetect.dataset_io import (AddressRecord, ContractRecord, ensure_dir, read_labels, write_addresses,
                                     write_contracts, write_transactions)
from gambledetect.fetch import EtherscanClient, FetchError

log = logging.getLogger("fetch_accounts")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--contracts", required=True, help="account,label list of contracts")
    p.add_argument("--addresses", required=True, help="account,label list of addresses")
    p.add_argument("--out", required=True)
    p.add_argument("--api-key", default=os.environ.get("ETHERSCAN_API_KEY", ""))
    p.add_argument("--base-url", default="https://api.etherscan.io/api")
    p.add_argument("--pause", type=float, default=0.25, help="seconds between requests")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    client = EtherscanClient(args.api_key, args.base_url)
    out = ensure_dir(args.out)

    contracts = []
    for account, label in read_labels(args.contracts).items():
        try:
            contracts.append(ContractRecord(account, client.get_bytecode(account), label))
        except FetchError as exc:
            log.warning("skipping contract %s: %s", account, exc)
        time.sleep(args.pause)
    write_contracts(contracts, out / "contracts.csv")

    addresses, txs, seen = [], [], set()
    for account, label in read_labels(args.addresses).items():
        addresses.append(AddressRecord(account, label))
        try:
            history = client.get_transactions(account)
        except FetchError as exc:
            log.warning("no history for %s: %s", account, exc)
            history = []
        for tx in history:
            if tx.tx_id not in seen:
                seen.add(tx.tx_id)
                txs.append(tx)
        time.sleep(args.pause)
    write_addresses(addresses, out / "addresses.csv")
    write_transactions(txs, out / "transactions.csv")
    log.info("%d contracts, %d addresses, %d transactions -> %s", len(contracts), len(addresses), len(txs), out)


if __name__ == "__main__":
    main()
