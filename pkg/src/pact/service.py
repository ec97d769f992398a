"""JSON-over-HTTP surface for groups, proposals, voting, chain queries,
document verification, and simulation runs.

Handlers only decode, delegate to the engine, and encode; every mutation runs
under a single writer lock. Domain errors surface as stable machine-readable
codes: validation problems map to 400, unknown ids to 404, and rule
violations to 409.
"""

from __future__ import annotations

import os
import threading
from typing import Literal

from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import simnet
from .engine import DEFAULT_MINER_COUNT, DEFAULT_SERVICE_DIFFICULTY, Engine
from .errors import BadRequestError, PactError

HTTP_STATUS_BY_CODE = {
    "ENCODING_ERROR": 400,
    "DECODE_ERROR": 400,
    "INVALID_IDENTIFIER": 400,
    "BAD_REQUEST": 400,
    "UNKNOWN_GROUP": 404,
    "UNKNOWN_PROPOSAL": 404,
    "UNKNOWN_CONTRACT": 404,
    "UNKNOWN_PARENT_VERSION": 404,
    "STORAGE_ERROR": 500,
    "CORRUPT_LOG": 500,
    "INVALID_CHAIN": 500,
}
DEFAULT_ERROR_STATUS = 409


class SignatorySpec(BaseModel):
    id: str
    display_name: str = ""


class CreateGroupRequest(BaseModel):
    signatories: list[SignatorySpec]
    id: str | None = None


class OpenProposalRequest(BaseModel):
    text: str
    kind: Literal["original", "amendment"] = "original"
    parent_version_id: str = ""


class CastVoteRequest(BaseModel):
    signatory_id: str
    submitted_hash: str
    vote: bool
    # Detached signature over the vote message; omitted means the platform
    # signs with the signatory's custodied key.
    signature: str | None = None


class FinalizeRequest(BaseModel):
    miner_id: str = "m1"


class VerifyRequest(BaseModel):
    text: str


class SimRunRequest(BaseModel):
    miner_count: int
    noise_p: float = 0.0
    adversary_mode: Literal["per_request_bernoulli", "fixed_subset"] = (
        "per_request_bernoulli"
    )
    adversary_count: int = 0
    requests: int = Field(default=1, le=10_000_000)
    valid_fraction: float = 1.0
    difficulty: int = 0
    seed: int = 0


def engine_from_env() -> Engine:
    data_dir = os.environ.get("PACT_DATA_DIR")
    if not data_dir:
        raise RuntimeError("PACT_DATA_DIR must point at the data directory")
    clock = None
    fixed = os.environ.get("PACT_FIXED_TIME")
    if fixed:
        clock = lambda: int(fixed)  # noqa: E731
    key_seed = os.environ.get("PACT_KEY_SEED")
    return Engine(
        data_dir,
        difficulty=int(os.environ.get("PACT_DIFFICULTY", DEFAULT_SERVICE_DIFFICULTY)),
        miner_count=int(os.environ.get("PACT_MINERS", DEFAULT_MINER_COUNT)),
        clock=clock,
        key_seed=key_seed.encode("utf-8") if key_seed else None,
    )


def app_from_env() -> FastAPI:
    """Factory for ``uvicorn --factory pact.service:app_from_env``."""
    return create_app(engine_from_env())


def create_app(engine: Engine | None = None) -> FastAPI:
    app = FastAPI(title="pact", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.engine = engine if engine is not None else engine_from_env()
    app.state.write_lock = threading.Lock()

    def eng() -> Engine:
        return app.state.engine

    @app.exception_handler(PactError)
    async def domain_error(_request: Request, exc: PactError) -> JSONResponse:
        status = HTTP_STATUS_BY_CODE.get(exc.code, DEFAULT_ERROR_STATUS)
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": exc.message, "http_status": status},
        )

    @app.exception_handler(ValueError)
    async def value_error(_request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"code": "BAD_REQUEST", "message": str(exc), "http_status": 400},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error(
        _request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"code": "BAD_REQUEST", "message": str(exc.errors()), "http_status": 400},
        )

    @app.post("/groups", status_code=201)
    def create_group(body: CreateGroupRequest) -> dict:
        with app.state.write_lock:
            return eng().create_group(
                [s.model_dump() for s in body.signatories], group_id=body.id
            )

    @app.get("/groups/{group_id}")
    def get_group(group_id: str) -> dict:
        with app.state.write_lock:
            return eng().group_view(group_id)

    @app.post("/groups/{group_id}/proposals", status_code=201)
    def open_proposal(group_id: str, body: OpenProposalRequest) -> dict:
        with app.state.write_lock:
            return eng().open_proposal(
                group_id, body.text, kind=body.kind,
                parent_version_id=body.parent_version_id,
            )

    @app.get("/proposals/{proposal_id}")
    def get_proposal(proposal_id: str) -> dict:
        with app.state.write_lock:
            return eng().proposal_view(proposal_id)

    @app.post("/proposals/{proposal_id}/votes")
    def cast_vote(
        proposal_id: str,
        body: CastVoteRequest,
        x_signatory_id: str | None = Header(default=None),
    ) -> dict:
        if x_signatory_id is not None and x_signatory_id != body.signatory_id:
            raise BadRequestError(
                "X-Signatory-Id header does not match the request body"
            )
        with app.state.write_lock:
            return eng().cast_vote(
                proposal_id,
                body.signatory_id,
                body.submitted_hash,
                body.vote,
                signature=body.signature,
            )

    @app.post("/proposals/{proposal_id}/finalize")
    def finalize(proposal_id: str, body: FinalizeRequest | None = None) -> dict:
        miner_id = body.miner_id if body is not None else "m1"
        with app.state.write_lock:
            return eng().finalize(proposal_id, miner_id=miner_id)

    @app.get("/chain")
    def chain() -> list[dict]:
        with app.state.write_lock:
            return eng().chain_records()

    @app.get("/chain/verify")
    def chain_verify() -> dict:
        with app.state.write_lock:
            return eng().verify_chain_report()

    @app.get("/contracts/{contract_id}/history")
    def history(contract_id: str) -> list[dict]:
        with app.state.write_lock:
            return eng().history(contract_id)

    @app.post("/verify")
    def verify(body: VerifyRequest) -> dict:
        with app.state.write_lock:
            return eng().verify_document(body.text)

    @app.post("/sim/run")
    def sim_run(body: SimRunRequest) -> dict:
        config = simnet.SimConfig(**body.model_dump())
        return simnet.run_simulation(config).summary()

    return app


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"address must look like host:port, got {addr!r}")
    return host, int(port)


def serve(app: FastAPI, addr: str) -> None:
    import uvicorn

    host, port = parse_addr(addr)
    uvicorn.run(app, host=host, port=port, log_level="info")
