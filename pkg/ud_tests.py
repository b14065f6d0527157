#!/usr/bin/env python3
"""
Empirical uniform-distribution tests over sequence prefixes.

Counts are exact integers over grid numerators; only the final division
by N produces floats. Multiplicity is by index: a value repeated at two
indices counts twice.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence as Seq

import numpy as np
from scipy.stats import qmc

import config
from errors import ConfigurationError, DomainError, InputError
from integrands import IntegrandSpec, indicator, quadrature_reference, step_brackets
from integrate import resolve_partition, tag_mask, tagged_mean
from logging_utils import get_logger
from partition import PartitionConfig, TagIndex, UnitPoint, check_tag, tags_of
from sequences import AnySequence, check_prefix_length

logger = get_logger(__name__)

L2_STAR_MAX_N = 20000  # scipy's L2-star is quadratic in N


@dataclass(frozen=True)
class IntervalQuery:
  """Subinterval [c, d] of [0, 1]; half-open [c, d) when closed is False."""
  c: UnitPoint
  d: UnitPoint
  closed: bool = True

  def __post_init__(self):
    if not self.c < self.d:
      raise DomainError(f"interval needs c < d, got [{self.c.exact}, {self.d.exact}]")

  @property
  def target(self) -> float:
    return float(self.d.as_fraction() - self.c.as_fraction())

  @property
  def label(self) -> str:
    return f"[{self.c.value:g},{self.d.value:g}{']' if self.closed else ')'}"

  def contains(self, numerators: np.ndarray, p: int) -> np.ndarray:
    """Elementwise membership of k/2^p, compared exactly at a common precision."""
    r = max(p, self.c.precision, self.d.precision)
    x = np.asarray(numerators, dtype=np.int64) << (r - p)
    lo = self.c.grid_floor(r)
    hi = self.d.grid_floor(r)
    upper = (x <= hi) if self.closed else (x < hi)
    return (x >= lo) & upper

  def indicator(self) -> IntegrandSpec:
    return indicator(self.c.value, self.d.value, closed=self.closed)

  def to_dict(self) -> Dict[str, Any]:
    return {
      "c": self.c.to_dict(),
      "d": self.d.to_dict(),
      "closed": self.closed,
    }

  @classmethod
  def from_dict(cls, data: Dict[str, Any]) -> "IntervalQuery":
    c, d = data["c"], data["d"]
    c = c["exact"] if isinstance(c, dict) else str(c)
    d = d["exact"] if isinstance(d, dict) else str(d)
    return cls(UnitPoint.parse(c), UnitPoint.parse(d), bool(data.get("closed", True)))

  @classmethod
  def of(cls, c: Any, d: Any, closed: bool = True) -> "IntervalQuery":
    """Build from numbers or strings ("1/4", "0.25", "1/2^2")."""
    return cls(UnitPoint.parse(str(c)), UnitPoint.parse(str(d)), closed)


def dyadic_grid(pieces: int = 8, closed: bool = True) -> List[IntervalQuery]:
  """The intervals [j/pieces, (j+1)/pieces]; pieces must be a power of two."""
  if pieces < 1 or pieces & (pieces - 1):
    raise ConfigurationError(f"dyadic grids need a power-of-two piece count, got {pieces}")
  bits = pieces.bit_length() - 1
  return [
    IntervalQuery(UnitPoint(j, bits), UnitPoint(j + 1, bits), closed)
    for j in range(pieces)
  ]


def parse_grid(text: str) -> List[IntervalQuery]:
  """
  Parse "dyadicK" or a comma list of "c:d" (closed) / "c:d)" (half-open).
  """
  text = text.strip()
  if text.startswith("dyadic"):
    pieces = text[len("dyadic"):]
    if not pieces.isdigit():
      raise InputError(f"Malformed grid '{text}'")
    return dyadic_grid(int(pieces))
  grid = []
  for part in text.split(","):
    part = part.strip()
    closed = not part.endswith(")")
    bounds = part.rstrip(")").split(":")
    if len(bounds) != 2:
      raise InputError(f"Malformed interval '{part}' (expected c:d)")
    grid.append(IntervalQuery.of(bounds[0], bounds[1], closed))
  if not grid:
    raise InputError("empty grid")
  return grid


def interval_count(prefix: AnySequence, q: IntervalQuery, N: int) -> int:
  return int(np.count_nonzero(q.contains(prefix.prefix(N), prefix.precision)))


def interval_count_ratio(prefix: AnySequence, q: IntervalQuery, N: int) -> float:
  """#{k <= N : x_k in q} / N."""
  return interval_count(prefix, q, N) / N


def tagged_count(
  prefix: AnySequence,
  q: IntervalQuery,
  t: TagIndex,
  cfg: Optional[PartitionConfig],
  N: int
) -> int:
  cfg = resolve_partition(prefix, cfg)
  inside = q.contains(prefix.prefix(N), prefix.precision)
  return int(np.count_nonzero(inside & tag_mask(prefix, t, cfg, N)))


def tagged_count_ratio(
  prefix: AnySequence,
  q: IntervalQuery,
  t: TagIndex,
  cfg: Optional[PartitionConfig],
  N: int
) -> float:
  """#{k <= N : x_k in q and x_k in C_t} / N."""
  return tagged_count(prefix, q, t, cfg, N) / N


@dataclass
class CountingRow:
  interval: IntervalQuery
  N: int
  count: int
  target: float

  @property
  def ratio(self) -> float:
    return self.count / self.N

  @property
  def deviation(self) -> float:
    """Signed: ratio - target."""
    return self.ratio - self.target

  def to_dict(self) -> Dict[str, Any]:
    return {
      "interval": [self.interval.c.value, self.interval.d.value],
      "interval_exact": [self.interval.c.exact, self.interval.d.exact],
      "closed": self.interval.closed,
      "N": self.N,
      "count": self.count,
      "ratio": self.ratio,
      "target": self.target,
      "deviation": self.deviation,
    }


@dataclass
class CountingReport:
  """Counting ratios for every (interval, N) pair of a grid and schedule."""
  schedule: List[int]
  rows: List[CountingRow]
  tag: Optional[int] = None
  partition: Optional[PartitionConfig] = None

  @property
  def max_deviation(self) -> float:
    return max(abs(row.deviation) for row in self.rows)

  def final_rows(self) -> List[CountingRow]:
    final = self.schedule[-1]
    return [row for row in self.rows if row.N == final]

  @property
  def final_max_deviation(self) -> float:
    return max(abs(row.deviation) for row in self.final_rows())

  def config_dict(self) -> Dict[str, Any]:
    data = {"schedule": list(self.schedule)}
    if self.tag is not None:
      data["tag"] = self.tag
    if self.partition is not None:
      data["partition"] = self.partition.to_dict()
    return data

  def to_dict(self) -> Dict[str, Any]:
    return {
      "kind": "counting",
      "config": self.config_dict(),
      "rows": [row.to_dict() for row in self.rows],
      "max_deviation": self.max_deviation,
    }


def _check_schedule(schedule: Seq[int], length: int) -> List[int]:
  schedule = [int(n) for n in schedule]
  if not schedule:
    raise InputError("schedule is empty")
  if schedule[0] <= 0:
    raise DomainError(f"schedule entries must be positive, got {schedule[0]}")
  if any(a >= b for a, b in zip(schedule, schedule[1:])):
    raise InputError(f"schedule must increase strictly: {schedule}")
  if schedule[-1] > length:
    raise InputError(f"schedule reaches N={schedule[-1]} beyond the prefix length {length}")
  return schedule


def counting_report(
  seq: AnySequence,
  grid: Seq[IntervalQuery],
  schedule: Seq[int],
  tag: Optional[TagIndex] = None,
  cfg: Optional[PartitionConfig] = None
) -> CountingReport:
  """
  Plain (tag None) or tagged counts for every interval at every N.

  One cumulative sum per interval serves the whole schedule.
  """
  if not grid:
    raise InputError("interval grid is empty")
  schedule = _check_schedule(schedule, len(seq))
  final = schedule[-1]
  numerators = seq.prefix(final)
  selected = None
  if tag is not None:
    cfg = resolve_partition(seq, cfg)
    tag = check_tag(tag, cfg)
    selected = tags_of(numerators, cfg) == tag
  index = np.asarray(schedule, dtype=np.int64) - 1
  rows = []
  for q in grid:
    hits = q.contains(numerators, seq.precision)
    if selected is not None:
      hits = hits & selected
    counts = np.cumsum(hits, dtype=np.int64)[index]
    rows.extend(CountingRow(q, n, int(c), q.target) for n, c in zip(schedule, counts))
  return CountingReport(schedule, rows, tag, cfg if tag is not None else None)


@dataclass
class UdVerdict:
  """Finite-N decision: every final-N deviation within tolerance."""
  passed: bool
  tolerance: float
  schedule: List[int]
  report: CountingReport
  tag: Optional[int] = None
  failing_interval: Optional[IntervalQuery] = None
  failing_N: Optional[int] = None

  def to_dict(self) -> Dict[str, Any]:
    config_data = self.report.config_dict()
    config_data["tolerance"] = self.tolerance
    data = {
      "kind": "verdict",
      "config": config_data,
      "rows": [row.to_dict() for row in self.report.rows],
      "final_max_deviation": self.report.final_max_deviation,
      "pass": self.passed,
    }
    if self.failing_interval is not None:
      data["failing"] = {"interval": self.failing_interval.to_dict(), "N": self.failing_N}
    return data


def ud_verdict(
  seq: AnySequence,
  grid: Seq[IntervalQuery],
  schedule: Seq[int],
  tol: float,
  tag: Optional[TagIndex] = None,
  cfg: Optional[PartitionConfig] = None
) -> UdVerdict:
  """
  Pass iff |ratio(N_final) - (d - c)| <= tol on every interval. The whole
  trajectory stays in the embedded report.
  """
  if tol <= 0:
    raise DomainError(f"tolerance must be positive, got {tol}")
  report = counting_report(seq, grid, schedule, tag, cfg)
  worst = max(report.final_rows(), key=lambda row: abs(row.deviation))
  passed = abs(worst.deviation) <= tol
  verdict = UdVerdict(passed, tol, report.schedule, report, report.tag)
  if not passed:
    verdict.failing_interval = worst.interval
    verdict.failing_N = worst.N
    logger.warning(
      f"u.d. verdict failed (tag={report.tag}): {worst.interval.label} "
      f"at N={worst.N} deviates by {worst.deviation:+.6f}"
    )
  return verdict


def star_discrepancy(prefix: AnySequence, N: int) -> float:
  """
  D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted sample.
  """
  check_prefix_length(N, len(prefix))
  x = np.sort(prefix.values(N))
  i = np.arange(1, N + 1, dtype=np.float64)
  return float(max(np.max(i / N - x), np.max(x - (i - 1) / N)))


def l2_star_discrepancy(prefix: AnySequence, N: int) -> Optional[float]:
  """scipy's L2-star discrepancy of the first N points; None above L2_STAR_MAX_N."""
  check_prefix_length(N, len(prefix))
  if N > L2_STAR_MAX_N:
    logger.info(f"Skipping L2-star discrepancy for N={N} > {L2_STAR_MAX_N}")
    return None
  return float(qmc.discrepancy(prefix.values(N).reshape(-1, 1), method="L2-star"))


@dataclass
class DiscrepancyReport:
  rows: List[Dict[str, Any]] = field(default_factory=list)

  def to_dict(self) -> Dict[str, Any]:
    return {
      "kind": "discrepancy",
      "config": {"schedule": [row["N"] for row in self.rows]},
      "rows": list(self.rows),
      "pass": True,
    }


def discrepancy_report(prefix: AnySequence, schedule: Seq[int]) -> DiscrepancyReport:
  schedule = _check_schedule(schedule, len(prefix))
  return DiscrepancyReport([
    {"N": n, "star": star_discrepancy(prefix, n), "l2_star": l2_star_discrepancy(prefix, n)}
    for n in schedule
  ])


@dataclass
class WeylRow:
  label: str
  N: int
  mean: float
  reference: float
  tolerance: float

  @property
  def deviation(self) -> float:
    return self.mean - self.reference

  @property
  def passed(self) -> bool:
    return abs(self.deviation) <= self.tolerance

  def to_dict(self) -> Dict[str, Any]:
    return {
      "integrand": self.label,
      "N": self.N,
      "mean": self.mean,
      "reference": self.reference,
      "deviation": self.deviation,
      "pass": self.passed,
    }


@dataclass
class WeylReport:
  tag: int
  partition: PartitionConfig
  tolerance: float
  rows: List[WeylRow]

  @property
  def passed(self) -> bool:
    return all(row.passed for row in self.rows)

  def to_dict(self) -> Dict[str, Any]:
    return {
      "kind": "weyl",
      "config": {
        "tag": self.tag,
        "partition": self.partition.to_dict(),
        "tolerance": self.tolerance,
      },
      "rows": [row.to_dict() for row in self.rows],
      "pass": self.passed,
    }


def tagged_weyl_check(
  seq: AnySequence,
  t: TagIndex,
  integrands: Seq[IntegrandSpec],
  N: int,
  tol: float,
  cfg: Optional[PartitionConfig] = None
) -> WeylReport:
  """
  Compare (1/N) * sum h(x_n) * [x_n in C_t] with the integral of h for
  each integrand.
  """
  if tol <= 0:
    raise DomainError(f"tolerance must be positive, got {tol}")
  if not integrands:
    raise InputError("no integrands given")
  cfg = resolve_partition(seq, cfg)
  t = check_tag(t, cfg)
  check_prefix_length(N, len(seq))
  rows = [
    WeylRow(h.label, N, tagged_mean(h, seq, t, cfg, N), quadrature_reference(h), tol)
    for h in integrands
  ]
  report = WeylReport(t, cfg, tol, rows)
  if not report.passed:
    logger.warning(f"Weyl check failed for tag {t} at N={N}")
  return report


@dataclass
class BracketRow:
  N: int
  lower: float
  mean: float
  upper: float

  @property
  def ordered(self) -> bool:
    return self.lower <= self.mean <= self.upper

  def to_dict(self) -> Dict[str, Any]:
    return {
      "N": self.N,
      "lower": self.lower,
      "mean": self.mean,
      "upper": self.upper,
      "ordered": self.ordered,
    }


def weyl_bracket_check(
  seq: AnySequence,
  t: TagIndex,
  h: IntegrandSpec,
  pieces: int,
  schedule: Seq[int],
  cfg: Optional[PartitionConfig] = None
) -> List[BracketRow]:
  """
  Tagged means of the step brackets f1 <= h <= f2 and of h at every N.
  Ordering holds exactly: it is pointwise and summation is monotone.
  """
  cfg = resolve_partition(seq, cfg)
  schedule = _check_schedule(schedule, len(seq))
  lower, upper = step_brackets(h, pieces)
  return [
    BracketRow(
      n,
      tagged_mean(lower, seq, t, cfg, n),
      tagged_mean(h, seq, t, cfg, n),
      tagged_mean(upper, seq, t, cfg, n),
    )
    for n in schedule
  ]


def complement_fraction(seq: AnySequence, t: TagIndex, cfg: Optional[PartitionConfig], N: int) -> float:
  """Fraction of x_1..x_N lying outside C_t."""
  cfg = resolve_partition(seq, cfg)
  return int(np.count_nonzero(~tag_mask(seq, t, cfg, N))) / N


def foreign_tag_ratios(
  seq: AnySequence,
  q: IntervalQuery,
  cfg: Optional[PartitionConfig],
  N: int
) -> Dict[int, float]:
  """Tagged counting ratio on q for every tag in [0, m), in one pass."""
  cfg = resolve_partition(seq, cfg)
  numerators = seq.prefix(N)
  inside = q.contains(numerators, seq.precision)
  counts = np.bincount(tags_of(numerators[inside], cfg), minlength=cfg.m)
  return {t: int(counts[t]) / N for t in range(cfg.m)}


@dataclass
class SeparationRow:
  interval: IntervalQuery
  N: int
  plain: int
  count_i: int
  count_j: int

  @property
  def holds(self) -> bool:
    return self.count_i + self.count_j <= self.plain

  def to_dict(self) -> Dict[str, Any]:
    return {
      "interval": [self.interval.c.value, self.interval.d.value],
      "N": self.N,
      "plain_ratio": self.plain / self.N,
      "ratio_i": self.count_i / self.N,
      "ratio_j": self.count_j / self.N,
      "holds": self.holds,
    }


def separation_check(
  seq: AnySequence,
  i: TagIndex,
  j: TagIndex,
  grid: Seq[IntervalQuery],
  schedule: Seq[int],
  cfg: Optional[PartitionConfig] = None
) -> List[SeparationRow]:
  """
  Rows of ratio_i + ratio_j <= plain ratio for distinct tags i, j over the
  grid and schedule (compared as integer counts).
  """
  cfg = resolve_partition(seq, cfg)
  i, j = check_tag(i, cfg), check_tag(j, cfg)
  if i == j:
    raise ConfigurationError("separation needs two distinct tags")
  schedule = _check_schedule(schedule, len(seq))
  rows = []
  for q in grid:
    for n in schedule:
      rows.append(SeparationRow(
        q, n,
        interval_count(seq, q, n),
        tagged_count(seq, q, i, cfg, n),
        tagged_count(seq, q, j, cfg, n),
      ))
  return rows


def default_schedule(length: int) -> List[int]:
  """config.DEFAULT_SCHEDULE cut to the prefix length (or [length] if none fit)."""
  schedule = [n for n in config.DEFAULT_SCHEDULE if n <= length]
  return schedule or [length]
