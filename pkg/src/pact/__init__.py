"""Contract agreement ledger.

Signatory groups approve contract versions by unanimous hash-confirmed votes;
each approved version mints a fresh owner keypair and is mined onto an
append-only proof-of-work chain, where acceptance requires a majority of
verifying miners.
"""

__version__ = "0.1.0"
