"""HTTP client mirroring the engine's method surface.

Call shapes and return values match :class:`pact.engine.Engine`, so callers
(the CLI in particular) can swap a local engine for a remote service without
branching. Server-side domain errors are re-raised as the same typed errors
the engine itself raises.
"""

from __future__ import annotations

from typing import Any

import httpx

from .errors import PactError, error_for_code


class HttpClient:
    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self._client = httpx.Client(
            base_url=base_url, timeout=timeout, transport=transport
        )

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "HttpClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _call(self, method: str, url: str, body: dict | None = None) -> Any:
        try:
            response = self._client.request(method, url, json=body)
        except httpx.HTTPError as exc:
            raise PactError(f"cannot reach the service: {exc}") from exc
        if response.status_code >= 400:
            try:
                payload = response.json()
            except ValueError:
                payload = {}
            raise error_for_code(
                payload.get("code", "PACT_ERROR"),
                payload.get("message", f"HTTP {response.status_code}"),
            )
        return response.json()

    def create_group(self, signatories: list[dict], group_id: str | None = None) -> dict:
        return self._call("POST", "/groups", {"signatories": signatories, "id": group_id})

    def group_view(self, group_id: str) -> dict:
        return self._call("GET", f"/groups/{group_id}")

    def open_proposal(
        self,
        group_id: str,
        text: str,
        kind: str = "original",
        parent_version_id: str = "",
    ) -> dict:
        return self._call(
            "POST",
            f"/groups/{group_id}/proposals",
            {"text": text, "kind": kind, "parent_version_id": parent_version_id},
        )

    def proposal_view(self, proposal_id: str) -> dict:
        return self._call("GET", f"/proposals/{proposal_id}")

    def cast_vote(
        self,
        proposal_id: str,
        signatory_id: str,
        submitted_hash: str,
        vote: bool,
        signature: str | None = None,
    ) -> dict:
        return self._call(
            "POST",
            f"/proposals/{proposal_id}/votes",
            {
                "signatory_id": signatory_id,
                "submitted_hash": submitted_hash,
                "vote": vote,
                "signature": signature,
            },
        )

    def finalize(self, proposal_id: str, miner_id: str = "m1") -> dict:
        return self._call(
            "POST", f"/proposals/{proposal_id}/finalize", {"miner_id": miner_id}
        )

    def chain_records(self) -> list[dict]:
        return self._call("GET", "/chain")

    def verify_chain_report(self) -> dict:
        return self._call("GET", "/chain/verify")

    def history(self, contract_id: str) -> list[dict]:
        return self._call("GET", f"/contracts/{contract_id}/history")

    def verify_document(self, text: str) -> dict:
        return self._call("POST", "/verify", {"text": text})

    def run_sim(self, config: dict) -> dict:
        return self._call("POST", "/sim/run", config)
