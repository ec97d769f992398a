"""Simulated miner network for consensus robustness experiments.

Miners see a block's true validity and report it filtered through their
behavior profile: honest miners relay it, always-inverters negate it, and
Bernoulli inverters negate it with probability p per request. The acceptance
gate is the same 51% threshold the real ledger uses. Monte Carlo runs are
seeded and fully reproducible; an exact binomial tail gives the analytic
probability that a genuinely valid block fails the gate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Literal, Protocol, Sequence

import numpy as np

from . import ledger

Behavior = Literal["honest", "bernoulli_inverter", "always_inverter"]
AdversaryMode = Literal["per_request_bernoulli", "fixed_subset"]


class DrawSource(Protocol):
    def random(self) -> float: ...


@dataclass(frozen=True)
class MinerProfile:
    id: str
    behavior: Behavior = "honest"
    flip_probability: float = 0.0

    def __post_init__(self) -> None:
        if self.behavior not in ("honest", "bernoulli_inverter", "always_inverter"):
            raise ValueError(f"unknown behavior {self.behavior!r}")
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ValueError("flip_probability must be within [0, 1]")


def miner_verdict(profile: MinerProfile, true_validity: bool, rng_draw: float = 0.0) -> bool:
    """One miner's reported verdict given the block's true validity.

    ``rng_draw`` is a uniform [0,1) sample, consulted only by Bernoulli
    inverters (draw < p means the verdict is inverted).
    """
    if profile.behavior == "honest":
        return true_validity
    if profile.behavior == "always_inverter":
        return not true_validity
    return not true_validity if rng_draw < profile.flip_probability else true_validity


def collect_verdicts(
    miners: Sequence[MinerProfile],
    true_validity: bool,
    rng: DrawSource | None = None,
) -> list[bool]:
    """Each miner's verdict, drawing one sample per Bernoulli inverter in
    miner order."""
    if not miners:
        raise ValueError("at least one miner is required")
    verdicts: list[bool] = []
    for profile in miners:
        draw = 0.0
        if profile.behavior == "bernoulli_inverter":
            if rng is None:
                raise ValueError("bernoulli_inverter miners need an rng")
            draw = rng.random()
        verdicts.append(miner_verdict(profile, true_validity, draw))
    return verdicts


def submit_for_consensus(
    miners: Sequence[MinerProfile],
    block_validity: bool,
    rng: DrawSource | None = None,
) -> tuple[int, bool]:
    """Put one block to the miner vote; accepted iff yes votes reach quorum."""
    verdicts = collect_verdicts(miners, block_validity, rng)
    yes_count = sum(verdicts)
    return yes_count, yes_count >= ledger.quorum_threshold(len(miners))


def vote_on_block(
    miners: Sequence[MinerProfile],
    chain: ledger.Chain,
    block: ledger.Block,
    rng: DrawSource | None = None,
) -> list[bool]:
    """End-to-end variant: miners really verify the candidate against the
    chain tip, then report through their behavior profiles."""
    truth = ledger.verify_block(block, chain.tip, chain.difficulty)
    return collect_verdicts(miners, truth, rng)


def analytic_failure_probability(miner_count: int, flip_probability: float) -> float:
    """Exact probability that a valid block fails the quorum gate when every
    miner independently inverts with the given probability.

    With threshold T, the block fails when more than M - T miners invert,
    i.e. P[X >= M - T + 1] for X ~ Binomial(M, p), summed term by term.
    """
    if miner_count < 1:
        raise ValueError("miner_count must be at least 1")
    if not 0.0 <= flip_probability <= 1.0:
        raise ValueError("flip_probability must be within [0, 1]")
    threshold = ledger.quorum_threshold(miner_count)
    k_min = miner_count - threshold + 1
    p = flip_probability
    return float(
        sum(
            comb(miner_count, k) * p**k * (1.0 - p) ** (miner_count - k)
            for k in range(k_min, miner_count + 1)
        )
    )


@dataclass(frozen=True)
class SimConfig:
    miner_count: int
    noise_p: float = 0.0
    adversary_mode: AdversaryMode = "per_request_bernoulli"
    adversary_count: int = 0
    requests: int = 1
    valid_fraction: float = 1.0
    difficulty: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.miner_count < 1:
            raise ValueError("miner_count must be at least 1")
        if self.requests < 1:
            raise ValueError("requests must be at least 1")
        if not 0.0 <= self.noise_p <= 1.0:
            raise ValueError("noise_p must be within [0, 1]")
        if not 0.0 <= self.valid_fraction <= 1.0:
            raise ValueError("valid_fraction must be within [0, 1]")
        if self.adversary_mode not in ("per_request_bernoulli", "fixed_subset"):
            raise ValueError(f"unknown adversary_mode {self.adversary_mode!r}")
        if not 0 <= self.adversary_count <= self.miner_count:
            raise ValueError("adversary_count must be within [0, miner_count]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass
class SimReport:
    config: SimConfig
    valid_requests: int
    invalid_requests: int
    valid_rejected: int
    invalid_accepted: int
    truthful_request_failure_rate: float
    adversarial_acceptance_rate: float
    analytic_failure_probability: float
    log_valid: np.ndarray = field(repr=False)
    log_yes: np.ndarray = field(repr=False)
    log_accepted: np.ndarray = field(repr=False)

    def rows(self) -> Iterator[tuple[int, bool, int, bool]]:
        """Per-request log rows: (request_id, valid, yes_count, accepted)."""
        for i in range(self.config.requests):
            yield (
                i,
                bool(self.log_valid[i]),
                int(self.log_yes[i]),
                bool(self.log_accepted[i]),
            )

    def summary(self) -> dict:
        c = self.config
        return {
            "config": {
                "miner_count": c.miner_count,
                "noise_p": c.noise_p,
                "adversary_mode": c.adversary_mode,
                "adversary_count": c.adversary_count,
                "requests": c.requests,
                "valid_fraction": c.valid_fraction,
                "difficulty": c.difficulty,
                "seed": c.seed,
            },
            "valid_requests": self.valid_requests,
            "invalid_requests": self.invalid_requests,
            "valid_rejected": self.valid_rejected,
            "invalid_accepted": self.invalid_accepted,
            "truthful_request_failure_rate": self.truthful_request_failure_rate,
            "adversarial_acceptance_rate": self.adversarial_acceptance_rate,
            "analytic_failure_probability": self.analytic_failure_probability,
            "quorum_threshold": ledger.quorum_threshold(c.miner_count),
        }


def _draws(config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """The complete randomness of a run, in a fixed layout: first one
    validity draw per request, then a requests x miners matrix of inversion
    draws. Keeping the layout stable is what makes runs reproducible and lets
    the scalar reference path consume identical samples."""
    rng = np.random.default_rng(config.seed)
    validity_draws = rng.random(config.requests)
    flip_draws = rng.random((config.requests, config.miner_count))
    return validity_draws, flip_draws


def run_simulation(config: SimConfig) -> SimReport:
    """Monte Carlo run of the acceptance gate; deterministic given the seed.

    Blocks arrive with injected true validity (drawn from valid_fraction), so
    no actual mining happens and 10^5-request runs stay fast. In
    per_request_bernoulli mode every miner inverts independently with
    noise_p on each request; in fixed_subset mode the first adversary_count
    miners always invert and the rest are honest.
    """
    validity_draws, flip_draws = _draws(config)
    valid = validity_draws < config.valid_fraction
    if config.adversary_mode == "per_request_bernoulli":
        flips = flip_draws < config.noise_p
        analytic = analytic_failure_probability(config.miner_count, config.noise_p)
    else:
        flips = np.zeros((config.requests, config.miner_count), dtype=bool)
        flips[:, : config.adversary_count] = True
        honest = config.miner_count - config.adversary_count
        threshold = ledger.quorum_threshold(config.miner_count)
        analytic = 0.0 if honest >= threshold else 1.0
    verdicts = valid[:, None] ^ flips
    yes_counts = verdicts.sum(axis=1)
    accepted = yes_counts >= ledger.quorum_threshold(config.miner_count)

    valid_requests = int(valid.sum())
    invalid_requests = config.requests - valid_requests
    valid_rejected = int((valid & ~accepted).sum())
    invalid_accepted = int((~valid & accepted).sum())
    return SimReport(
        config=config,
        valid_requests=valid_requests,
        invalid_requests=invalid_requests,
        valid_rejected=valid_rejected,
        invalid_accepted=invalid_accepted,
        truthful_request_failure_rate=(
            valid_rejected / valid_requests if valid_requests else 0.0
        ),
        adversarial_acceptance_rate=(
            invalid_accepted / invalid_requests if invalid_requests else 0.0
        ),
        analytic_failure_probability=analytic,
        log_valid=valid,
        log_yes=yes_counts.astype(np.int64),
        log_accepted=accepted,
    )


def write_csv(report: SimReport, stream: io.TextIOBase) -> None:
    """Per-request log as CSV; booleans encoded as 1/0."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["request_id", "valid", "yes_count", "accepted"])
    for request_id, valid, yes_count, accepted in report.rows():
        writer.writerow([request_id, int(valid), yes_count, int(accepted)])
