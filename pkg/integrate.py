#!/usr/bin/env python3
"""
Quasi-Monte-Carlo integration over sequence prefixes, plain and tagged.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from errors import ConfigurationError, InputError
from integrands import IntegrandSpec, quadrature_reference
from logging_utils import get_logger
from partition import PartitionConfig, TagIndex, check_tag, tags_of
from sequences import AnySequence, TaggedSequence

logger = get_logger(__name__)


@dataclass
class QmcEstimate:
  """Empirical mean of an integrand over the first N terms and its reference."""
  label: str
  N: int
  estimate: float
  reference: float
  tag: Optional[int] = None

  @property
  def deviation(self) -> float:
    return self.estimate - self.reference

  def to_dict(self) -> Dict[str, Any]:
    data = {
      "integrand": self.label,
      "N": self.N,
      "estimate": self.estimate,
      "reference": self.reference,
      "deviation": self.deviation,
    }
    if self.tag is not None:
      data["tag"] = self.tag
    return data


def resolve_partition(seq: AnySequence, cfg: Optional[PartitionConfig]) -> PartitionConfig:
  """
  The partition to test membership against: cfg, else the sequence's own.

  Raises:
    ConfigurationError: If neither is available or precisions disagree
  """
  if cfg is None:
    if not isinstance(seq, TaggedSequence):
      raise ConfigurationError("a partition is required to test tag membership")
    cfg = seq.cfg
  if seq.precision != cfg.p:
    raise ConfigurationError(
      f"sequence precision {seq.precision} differs from partition p={cfg.p}"
    )
  return cfg


def tag_mask(seq: AnySequence, t: TagIndex, cfg: PartitionConfig, N: int) -> np.ndarray:
  """Boolean membership of x_1..x_N in C_t."""
  return tags_of(seq.prefix(N), cfg) == check_tag(t, cfg)


def tagged_mean(
  h: IntegrandSpec,
  seq: AnySequence,
  t: TagIndex,
  cfg: PartitionConfig,
  N: int
) -> float:
  """(1/N) * sum of h(x_n) * [x_n in C_t]."""
  mask = tag_mask(seq, t, cfg, N)
  return float(np.mean(np.where(mask, h.evaluate(seq.values(N)), 0.0)))


def qmc_integrate(
  f: IntegrandSpec,
  seq: AnySequence,
  N: int,
  reference: Optional[float] = None
) -> QmcEstimate:
  """
  (1/N) * sum of f(x_n) over the prefix, next to the reference integral.

  Any tag on f is ignored here; use tagged_integrate() for h * chi_{C_t}.
  """
  estimate = float(np.mean(f.evaluate(seq.values(N))))
  if reference is None:
    reference = quadrature_reference(f)
  logger.debug(f"QMC {f.label} N={N}: {estimate} vs {reference}")
  return QmcEstimate(f.label, N, estimate, reference)


def tagged_integrate(
  f: IntegrandSpec,
  seq: AnySequence,
  N: int,
  cfg: Optional[PartitionConfig] = None,
  reference: Optional[float] = None
) -> QmcEstimate:
  """
  Empirical mean of f~ = h * chi_{C_t} where t is f's tag.

  The reference is the integral of h against length, which the tagged
  measure matches because it lives on C_t.

  Raises:
    InputError: If f carries no tag
  """
  if f.tag is None:
    raise InputError(f"integrand '{f.label}' carries no tag")
  cfg = resolve_partition(seq, cfg)
  estimate = tagged_mean(f, seq, f.tag, cfg, N)
  if reference is None:
    reference = quadrature_reference(f)
  logger.debug(f"Tagged QMC {f.label} N={N}: {estimate} vs {reference}")
  return QmcEstimate(f.label, N, estimate, reference, tag=f.tag)
