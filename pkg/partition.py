#!/usr/bin/env python3
"""
Surrogate partition of the dyadic unit-interval grid into tag classes.

The grid at precision p is {k/2^p : 0 <= k <= 2^p}. Tag class C_t holds the
interior grid points whose numerator is congruent to t modulo m. The
classes are pairwise disjoint, cover every interior grid point, and every
open interval wider than m/2^p meets each of them.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Dict, Tuple, Union

import numpy as np

import config
from errors import ConfigurationError, DomainError, ResolutionExhausted

TagIndex = int


@total_ordering
@dataclass(frozen=True, eq=False)
class UnitPoint:
  """Exact dyadic number numerator/2^precision in [0, 1]."""
  numerator: int
  precision: int

  def __post_init__(self):
    if not 0 <= self.precision <= config.MAX_PRECISION:
      raise ConfigurationError(
        f"precision must be in [0, {config.MAX_PRECISION}], got {self.precision}"
      )
    if not 0 <= self.numerator <= (1 << self.precision):
      raise ConfigurationError(
        f"{self.numerator}/2^{self.precision} lies outside [0, 1]"
      )

  def _reduced(self) -> Tuple[int, int]:
    k, p = self.numerator, self.precision
    if k == 0:
      return (0, 0)
    shift = min((k & -k).bit_length() - 1, p)
    return (k >> shift, p - shift)

  def __eq__(self, other):
    if not isinstance(other, UnitPoint):
      return NotImplemented
    return self._reduced() == other._reduced()

  def __lt__(self, other):
    if not isinstance(other, UnitPoint):
      return NotImplemented
    q = max(self.precision, other.precision)
    return (self.numerator << (q - self.precision)) < (other.numerator << (q - other.precision))

  def __hash__(self):
    return hash(self._reduced())

  def __repr__(self):
    return f"UnitPoint({self.exact})"

  @property
  def value(self) -> float:
    return math.ldexp(self.numerator, -self.precision)

  @property
  def exact(self) -> str:
    return f"{self.numerator}/2^{self.precision}"

  def as_fraction(self) -> Fraction:
    return Fraction(self.numerator, 1 << self.precision)

  def grid_floor(self, p: int) -> int:
    """floor(value * 2^p)."""
    if p >= self.precision:
      return self.numerator << (p - self.precision)
    return self.numerator >> (self.precision - p)

  def grid_ceil(self, p: int) -> int:
    """ceil(value * 2^p)."""
    if p >= self.precision:
      return self.numerator << (p - self.precision)
    return -((-self.numerator) >> (self.precision - p))

  def at_precision(self, p: int) -> "UnitPoint":
    """
    Re-express this point at precision p.

    Raises:
      ConfigurationError: If the value is not representable at precision p
    """
    k = self.grid_floor(p)
    if k != self.grid_ceil(p):
      raise ConfigurationError(f"{self.exact} is not representable at precision {p}")
    return UnitPoint(k, p)

  def to_dict(self) -> Dict[str, Union[str, float]]:
    return {"exact": self.exact, "decimal": self.value}

  @classmethod
  def from_fraction(cls, value: Union[Fraction, float, int, str], precision: int) -> "UnitPoint":
    """Truncate a number in [0, 1] onto the grid at the given precision."""
    frac = Fraction(value)
    if not 0 <= frac <= 1:
      raise ConfigurationError(f"{value} lies outside [0, 1]")
    return cls(math.floor(frac * (1 << precision)), precision)

  @classmethod
  def parse(cls, text: str, precision: int = None) -> "UnitPoint":
    """
    Parse "k/2^p" exactly, or a decimal/fraction literal onto the grid.

    Args:
      text: "5/2^8", "0.25" or "1/3"
      precision: Grid precision used for non-dyadic literals
    """
    text = text.strip()
    if "/2^" in text:
      num, _, prec = text.partition("/2^")
      if not (num.isdigit() and prec.isdigit()):
        raise ConfigurationError(f"Malformed grid point '{text}'")
      return cls(int(num), int(prec))
    try:
      frac = Fraction(text)
    except ValueError as e:
      raise ConfigurationError(f"Malformed number '{text}'") from e
    if precision is None:
      # Exact dyadic literals need no target precision
      if frac.denominator & (frac.denominator - 1) == 0:
        precision = frac.denominator.bit_length() - 1
      else:
        precision = config.DEFAULT_P
    return cls.from_fraction(frac, precision)


@dataclass(frozen=True)
class PartitionConfig:
  """Number of tags m and grid precision p of the surrogate partition."""
  m: int
  p: int

  def __post_init__(self):
    if self.m < 2:
      raise ConfigurationError(f"m must be at least 2, got {self.m}")
    if not 1 <= self.p <= config.MAX_PRECISION:
      raise ConfigurationError(
        f"p must be in [1, {config.MAX_PRECISION}], got {self.p}"
      )
    if self.m >= (1 << self.p):
      raise ConfigurationError(f"m={self.m} must be below 2^p={1 << self.p}")

  def to_dict(self) -> Dict[str, int]:
    return {"m": self.m, "p": self.p}

  @classmethod
  def from_dict(cls, data: Dict[str, int]) -> "PartitionConfig":
    return cls(m=int(data["m"]), p=int(data["p"]))


def check_tag(t: TagIndex, cfg: PartitionConfig) -> TagIndex:
  """Validate 0 <= t < m and return t as a plain int."""
  t = int(t)
  if not 0 <= t < cfg.m:
    raise ConfigurationError(f"tag {t} outside [0, {cfg.m})")
  return t


def tag_of(x: UnitPoint, cfg: PartitionConfig) -> TagIndex:
  """Tag of the class containing x: its numerator modulo m."""
  if x.precision != cfg.p:
    raise ConfigurationError(
      f"{x.exact} has precision {x.precision}, partition expects {cfg.p}"
    )
  return x.numerator % cfg.m


def is_member(x: UnitPoint, t: TagIndex, cfg: PartitionConfig) -> bool:
  return tag_of(x, cfg) == check_tag(t, cfg)


def tags_of(numerators: np.ndarray, cfg: PartitionConfig) -> np.ndarray:
  """Vectorized tag_of over numerators already at precision cfg.p."""
  return np.asarray(numerators, dtype=np.int64) % cfg.m


def class_numerators(t: TagIndex, cfg: PartitionConfig) -> np.ndarray:
  """All interior numerators of C_t in increasing order (small p only)."""
  t = check_tag(t, cfg)
  start = t if t > 0 else cfg.m
  return np.arange(start, 1 << cfg.p, cfg.m, dtype=np.int64)


def pick_numerators(
  lower: np.ndarray,
  upper: np.ndarray,
  tags: np.ndarray,
  m: int
) -> np.ndarray:
  """
  Largest k with lower < k < upper and k = tag (mod m), elementwise.

  Bounds are exclusive integer numerators. Entries with no qualifying k
  come back as -1.
  """
  lower = np.asarray(lower, dtype=np.int64)
  k_max = np.asarray(upper, dtype=np.int64) - 1
  picked = k_max - np.remainder(k_max - np.asarray(tags, dtype=np.int64), m)
  return np.where(picked > lower, picked, -1)


def pick_in_interval(a: UnitPoint, b: UnitPoint, t: TagIndex, cfg: PartitionConfig) -> UnitPoint:
  """
  Tagged grid point of C_t inside the open interval (a, b).

  Returns the point with the largest qualifying numerator, i.e. the
  point of C_t closest below b.

  Raises:
    DomainError: If a >= b
    ResolutionExhausted: If (a, b) holds no point of C_t at precision p
  """
  t = check_tag(t, cfg)
  if not a < b:
    raise DomainError(f"empty interval ({a.exact}, {b.exact})")

  # k > a*2^p  <=>  k > floor(a*2^p);  k < b*2^p  <=>  k < ceil(b*2^p)
  picked = pick_numerators(
    np.array([a.grid_floor(cfg.p)]),
    np.array([b.grid_ceil(cfg.p)]),
    np.array([t]),
    cfg.m
  )[0]
  if picked < 0:
    raise ResolutionExhausted(
      f"no point of C_{t} in ({a.exact}, {b.exact}) at p={cfg.p}, m={cfg.m}"
    )
  return UnitPoint(int(picked), cfg.p)
