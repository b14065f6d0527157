#!/usr/bin/env python3
"""
Seeded Monte-Carlo experiments: strong-law (SLLN) and Hlawka-type.

Each trial draws a fresh sample from its own derived seed and is judged on
its own; a runner aggregates trial verdicts into a pass fraction. Trials
may run concurrently, and results are keyed by trial index so the report
never depends on scheduling.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed

import config
from errors import ConfigurationError, DomainError, EquidistError, InputError
from integrands import IntegrandSpec, parse_integrand, quadrature_reference
from integrate import qmc_integrate, tagged_integrate
from logging_utils import get_logger, log_with_trial
from partition import PartitionConfig, check_tag
from sequences import SEED_LIMIT, iid_uniform, sample_tagged
from ud_tests import IntervalQuery, parse_grid, ud_verdict


def default_partition() -> PartitionConfig:
    return PartitionConfig(config.DEFAULT_M, config.DEFAULT_P)


@dataclass
class ExperimentConfig:
    """
    Everything a run depends on. The report is a pure function of this.

    tag None runs the classical variant: iid uniform samples and plain
    (untagged) means and counts.
    """
    kind: str
    trials: int = config.DEFAULT_TRIALS
    n: int = config.DEFAULT_TRIAL_N
    eps: float = config.DEFAULT_EPSILON
    tag: Optional[int] = None
    partition: PartitionConfig = field(default_factory=default_partition)
    integrand: Optional[IntegrandSpec] = None
    grid: Optional[List[IntervalQuery]] = None
    master_seed: int = config.DEFAULT_MASTER_SEED
    delta: float = config.DEFAULT_DELTA

    def __post_init__(self):
        if self.kind not in EXPERIMENTS:
            raise ConfigurationError(
                f"unknown experiment '{self.kind}' (expected one of {', '.join(EXPERIMENTS)})"
            )
        if self.trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {self.trials}")
        if self.n < 1:
            raise DomainError(f"trial length must be at least 1, got {self.n}")
        if self.eps <= 0:
            raise DomainError(f"tolerance must be positive, got {self.eps}")
        if not 0 <= self.delta < 1:
            raise ConfigurationError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0 <= self.master_seed < SEED_LIMIT:
            raise ConfigurationError(f"master seed must lie in [0, 2^64), got {self.master_seed}")
        if self.tag is not None:
            self.tag = check_tag(self.tag, self.partition)
        if self.kind == "slln" and self.integrand is None:
            self.integrand = parse_integrand("x")
        if self.kind == "hlawka" and not self.grid:
            self.grid = parse_grid(config.DEFAULT_GRID)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "experiment": self.kind,
            "trials": self.trials,
            "n": self.n,
            "eps": self.eps,
            "tag": self.tag,
            "partition": self.partition.to_dict(),
            "master_seed": self.master_seed,
            "delta": self.delta,
            "rng": config.RNG_NAME,
        }
        if self.integrand is not None:
            data["integrand"] = self.integrand.to_dict()
        if self.grid is not None:
            data["grid"] = [q.to_dict() for q in self.grid]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Build from to_dict() output or a hand-written JSON config, where the
        grid may be a string ("dyadic8") and the integrand a parse string.
        """
        try:
            grid = data.get("grid")
            if isinstance(grid, str):
                grid = parse_grid(grid)
            elif grid is not None:
                grid = [IntervalQuery.from_dict(q) for q in grid]
            integrand = data.get("integrand")
            if integrand is not None:
                integrand = IntegrandSpec.from_dict(integrand)
            partition = data.get("partition")
            partition = PartitionConfig.from_dict(partition) if partition else default_partition()
            tag = data.get("tag")
            return cls(
                kind=str(data.get("experiment", data.get("kind"))),
                trials=int(data.get("trials", config.DEFAULT_TRIALS)),
                n=int(data.get("n", config.DEFAULT_TRIAL_N)),
                eps=float(data.get("eps", config.DEFAULT_EPSILON)),
                tag=None if tag is None else int(tag),
                partition=partition,
                integrand=integrand,
                grid=grid,
                master_seed=int(data.get("master_seed", config.DEFAULT_MASTER_SEED)),
                delta=float(data.get("delta", config.DEFAULT_DELTA)),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, EquidistError):
                raise
            raise InputError(f"Malformed experiment config: {e}") from e


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """
    Seed of trial i: first 64-bit word of SeedSequence(master, spawn_key=(i,)).

    Any single trial can be re-run from (master_seed, i) alone.
    """
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass
class TrialResult:
    index: int
    seed: int
    passed: bool
    deviation: Optional[float]
    reason: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "trial": self.index,
            "seed": self.seed,
            "pass": self.passed,
            "deviation": self.deviation,
        }
        if self.reason:
            data["reason"] = self.reason
        return data


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    trials: List[TrialResult]

    @property
    def pass_fraction(self) -> float:
        return sum(1 for trial in self.trials if trial.passed) / len(self.trials)

    @property
    def succeeded(self) -> bool:
        return self.pass_fraction >= 1.0 - self.config.delta

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "experiment",
            "config": self.config.to_dict(),
            "rows": [trial.to_dict() for trial in self.trials],
            "pass_fraction": self.pass_fraction,
            "pass": self.succeeded,
        }


class ExperimentRunner(ABC):
    """
    Base class for Monte-Carlo experiments.

    Subclasses implement run_trial(); this class handles seed derivation,
    parallel execution, per-trial error capture and aggregation.
    """

    def __init__(self, experiment_config: ExperimentConfig):
        self.config = experiment_config
        self.logger = get_logger(type(self).__name__)

    @abstractmethod
    def run_trial(self, index: int, seed: int) -> TrialResult:
        """
        Run a single trial.

        Args:
            index: Trial index in [0, trials)
            seed: Seed derived for this trial

        Returns:
            TrialResult with the trial's verdict and deviation
        """
        pass

    def _run_one(self, index: int) -> TrialResult:
        seed = derive_trial_seed(self.config.master_seed, index)
        try:
            result = self.run_trial(index, seed)
        except EquidistError as e:
            # A failing trial is data, not a crash
            log_with_trial(self.logger, logging.ERROR, index, f"Trial raised: {e}")
            return TrialResult(index, seed, False, None, reason=str(e))
        log_with_trial(
            self.logger, logging.DEBUG, index,
            f"seed={seed} pass={result.passed} deviation={result.deviation}"
        )
        return result

    def run(self) -> ExperimentReport:
        """Run every trial and aggregate the results in index order."""
        cfg = self.config
        n_jobs = config.THREADS if config.THREADS > 0 else -1
        self.logger.debug(
            f"Starting {cfg.kind} experiment: {cfg.trials} trials, N={cfg.n}, "
            f"eps={cfg.eps}, tag={cfg.tag}, n_jobs={n_jobs}"
        )
        results = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(self._run_one)(i) for i in range(cfg.trials)
        )
        results = sorted(results, key=lambda r: r.index)
        report = ExperimentReport(cfg, results)

        if report.succeeded:
            self.logger.info(f"{cfg.kind} experiment passed: fraction {report.pass_fraction:.4f}")
        else:
            self.logger.warning(
                f"{cfg.kind} experiment failed: fraction {report.pass_fraction:.4f} "
                f"< {1.0 - cfg.delta:.4f}"
            )
        return report


class SllnExperiment(ExperimentRunner):
    """
    Strong-law check: the sample mean of f over N draws lands within eps of
    its integral.
    """

    def __init__(self, experiment_config: ExperimentConfig):
        super().__init__(experiment_config)
        integrand = experiment_config.integrand
        if experiment_config.tag is not None and integrand.tag != experiment_config.tag:
            integrand = integrand.tagged(experiment_config.tag)
        self.integrand = integrand
        self.reference = quadrature_reference(integrand)

    def run_trial(self, index: int, seed: int) -> TrialResult:
        cfg = self.config
        if cfg.tag is None:
            sample = iid_uniform(seed, cfg.n, cfg.partition.p)
            estimate = qmc_integrate(self.integrand, sample, cfg.n, self.reference)
        else:
            sample = sample_tagged(seed, cfg.tag, cfg.n, cfg.partition)
            estimate = tagged_integrate(self.integrand, sample, cfg.n, cfg.partition, self.reference)
        deviation = estimate.deviation
        return TrialResult(index, seed, abs(deviation) <= cfg.eps, deviation)


class HlawkaExperiment(ExperimentRunner):
    """
    Hlawka-type check: a sampled sequence passes the (tagged) u.d. verdict
    over the interval grid at N.
    """

    def run_trial(self, index: int, seed: int) -> TrialResult:
        cfg = self.config
        if cfg.tag is None:
            sample = iid_uniform(seed, cfg.n, cfg.partition.p)
        else:
            sample = sample_tagged(seed, cfg.tag, cfg.n, cfg.partition)
        verdict = ud_verdict(sample, cfg.grid, [cfg.n], cfg.eps, tag=cfg.tag, cfg=cfg.partition)
        return TrialResult(index, seed, verdict.passed, verdict.report.final_max_deviation)


EXPERIMENTS = {
    "slln": SllnExperiment,
    "hlawka": HlawkaExperiment,
}


def run_experiment(experiment_config: ExperimentConfig) -> ExperimentReport:
    """Dispatch to the runner for experiment_config.kind."""
    runner_class = EXPERIMENTS[experiment_config.kind]
    return runner_class(experiment_config).run()


def slln_experiment(experiment_config: ExperimentConfig) -> ExperimentReport:
    if experiment_config.kind != "slln":
        raise ConfigurationError(f"expected an slln config, got '{experiment_config.kind}'")
    return SllnExperiment(experiment_config).run()


def hlawka_experiment(experiment_config: ExperimentConfig) -> ExperimentReport:
    if experiment_config.kind != "hlawka":
        raise ConfigurationError(f"expected a hlawka config, got '{experiment_config.kind}'")
    return HlawkaExperiment(experiment_config).run()
