#!/usr/bin/env python3
"""
Generators and constructors of sequences in [0, 1].

Every sequence is a prefix of grid numerators k (value k/2^p) together with
the descriptor that produced it. Descriptors are plain JSON-able data, and
materialize() rebuilds a bit-identical prefix from one.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set, Union

import numpy as np
import sympy

import config
from errors import ConfigurationError, DomainError, InputError, ResolutionExhausted
from logging_utils import get_logger
from partition import (
  PartitionConfig, TagIndex, UnitPoint, check_tag, pick_numerators, tags_of
)

logger = get_logger(__name__)

PROVENANCES = ("lift", "spoiler", "sampled")
SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class SequenceDescriptor:
  """Generator kind, its parameters, seed, length N and precision p."""
  kind: str
  params: Dict[str, Any] = field(default_factory=dict)
  N: int = 0
  p: int = config.DEFAULT_P
  seed: Optional[int] = None

  def to_dict(self) -> Dict[str, Any]:
    data = {"kind": self.kind, "params": dict(self.params), "N": self.N, "p": self.p}
    if self.seed is not None:
      data["seed"] = self.seed
    return data

  @classmethod
  def from_dict(cls, data: Dict[str, Any]) -> "SequenceDescriptor":
    try:
      return cls(
        kind=str(data["kind"]),
        params=dict(data.get("params", {})),
        N=int(data["N"]),
        p=int(data["p"]),
        seed=None if data.get("seed") is None else int(data["seed"]),
      )
    except (KeyError, TypeError, ValueError) as e:
      raise InputError(f"Malformed sequence descriptor: {e}") from e


@dataclass(frozen=True, eq=False)
class Sequence:
  """Materialized prefix of grid numerators at precision descriptor.p."""
  descriptor: SequenceDescriptor
  numerators: np.ndarray

  def __post_init__(self):
    arr = np.array(self.numerators, dtype=np.int64)
    if arr.ndim != 1:
      raise InputError("sequence numerators must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() > (1 << self.descriptor.p)):
      raise ConfigurationError(f"sequence values outside [0, 1] at p={self.descriptor.p}")
    arr.setflags(write=False)
    object.__setattr__(self, "numerators", arr)

  @property
  def precision(self) -> int:
    return self.descriptor.p

  def __len__(self) -> int:
    return int(self.numerators.size)

  def point(self, n: int) -> UnitPoint:
    """Element x_n, 1-based."""
    return UnitPoint(int(self.numerators[n - 1]), self.precision)

  def values(self, N: Optional[int] = None) -> np.ndarray:
    """Float values of the first N elements (exact while p <= 53)."""
    return np.ldexp(self.prefix(N).astype(np.float64), -self.precision)

  def prefix(self, N: Optional[int] = None) -> np.ndarray:
    """
    First N numerators.

    Raises:
      DomainError: If N is zero
      InputError: If N exceeds the materialized length
    """
    if N is None:
      return self.numerators
    check_prefix_length(N, len(self))
    return self.numerators[:N]


@dataclass(frozen=True, eq=False)
class TaggedSequence:
  """Sequence whose every element is known to lie in C_{tags[n]}."""
  base: Sequence
  tags: np.ndarray
  cfg: PartitionConfig
  provenance: str

  def __post_init__(self):
    if self.provenance not in PROVENANCES:
      raise ConfigurationError(f"unknown provenance '{self.provenance}'")
    if self.base.precision != self.cfg.p:
      raise ConfigurationError(
        f"tagged sequence precision {self.base.precision} differs from partition p={self.cfg.p}"
      )
    tags = np.array(self.tags, dtype=np.int64)
    if tags.shape != self.base.numerators.shape:
      raise ConfigurationError("one tag per element is required")
    if not np.array_equal(tags_of(self.base.numerators, self.cfg), tags):
      raise ConfigurationError("an element does not belong to its recorded tag class")
    if self.provenance == "lift" and np.unique(tags).size > 1:
      raise ConfigurationError("lifted sequences carry a single tag")
    if self.provenance == "spoiler" and np.unique(tags).size != tags.size:
      raise ConfigurationError("spoiler tags must be pairwise distinct")
    tags.setflags(write=False)
    object.__setattr__(self, "tags", tags)

  @property
  def descriptor(self) -> SequenceDescriptor:
    return self.base.descriptor

  @property
  def numerators(self) -> np.ndarray:
    return self.base.numerators

  @property
  def precision(self) -> int:
    return self.base.precision

  def __len__(self) -> int:
    return len(self.base)

  def point(self, n: int) -> UnitPoint:
    return self.base.point(n)

  def values(self, N: Optional[int] = None) -> np.ndarray:
    return self.base.values(N)

  def prefix(self, N: Optional[int] = None) -> np.ndarray:
    return self.base.prefix(N)


AnySequence = Union[Sequence, TaggedSequence]


def check_prefix_length(N: int, length: int) -> int:
  if N <= 0:
    raise DomainError(f"N must be positive, got {N}")
  if N > length:
    raise InputError(f"N={N} exceeds the materialized length {length}")
  return N


def _check_generator_args(N: int, p: int) -> None:
  if N < 1:
    raise ConfigurationError(f"N must be at least 1, got {N}")
  if not 1 <= p <= config.MAX_PRECISION:
    raise ConfigurationError(f"p must be in [1, {config.MAX_PRECISION}], got {p}")


def _check_seed(seed: int) -> int:
  seed = int(seed)
  if not 0 <= seed < SEED_LIMIT:
    raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
  return seed


def make_rng(seed: int) -> np.random.Generator:
  """Counter-based generator (config.RNG_NAME) keyed by a 64-bit seed."""
  return np.random.Generator(np.random.Philox(key=_check_seed(seed)))


def resolve_alpha(alpha: Union[str, float, int]) -> sympy.Expr:
  """
  Turn a named constant ("sqrt2", "golden", "pi frac", ...) or a decimal
  literal into an exact sympy expression.
  """
  if isinstance(alpha, str):
    key = alpha.strip().lower()
    if key.endswith(" frac"):
      key = key[:-len(" frac")].strip()
    if key in config.NAMED_ALPHAS:
      return sympy.sympify(config.NAMED_ALPHAS[key])
    text = alpha.strip()
  else:
    text = repr(alpha)
  try:
    return sympy.Rational(text)
  except (TypeError, ValueError) as e:
    raise ConfigurationError(f"Unknown alpha '{alpha}'") from e


def kronecker(alpha: Union[str, float, int], N: int, p: int) -> Sequence:
  """
  Fractional parts {alpha*n}, n = 1..N, truncated onto the grid.

  alpha is evaluated once with ALPHA_GUARD_BITS extra bits; the guard bits
  absorb the n-fold amplification of its truncation error.
  """
  _check_generator_args(N, p)
  expr = resolve_alpha(alpha)
  q = p + config.ALPHA_GUARD_BITS
  scaled = int(sympy.floor(expr * sympy.Integer(2)**q))
  modulus = 1 << q
  shift = q - p
  numerators = [((n * scaled) % modulus) >> shift for n in range(1, N + 1)]
  logger.debug(f"Generated Kronecker sequence alpha={alpha} N={N} p={p}")
  return Sequence(
    SequenceDescriptor("kronecker", {"alpha": str(alpha)}, N, p),
    np.array(numerators, dtype=np.int64)
  )


def _radical_inverse(n: int, base: int, p: int) -> int:
  num, den = 0, 1
  while n:
    n, digit = divmod(n, base)
    num = num * base + digit
    den *= base
  return (num << p) // den


def van_der_corput(base: int, N: int, p: int) -> Sequence:
  """Radical inverses of n = 1..N in the given base, truncated onto the grid."""
  _check_generator_args(N, p)
  if base < 2:
    raise ConfigurationError(f"base must be at least 2, got {base}")
  numerators = [_radical_inverse(n, base, p) for n in range(1, N + 1)]
  return Sequence(
    SequenceDescriptor("van_der_corput", {"base": base}, N, p),
    np.array(numerators, dtype=np.int64)
  )


def iid_uniform(seed: int, N: int, p: int) -> Sequence:
  """N independent grid points k/2^p with k uniform in [0, 2^p)."""
  _check_generator_args(N, p)
  rng = make_rng(seed)
  numerators = rng.integers(0, 1 << p, size=N, dtype=np.int64)
  return Sequence(SequenceDescriptor("iid_uniform", {}, N, p, seed=int(seed)), numerators)


def sample_tagged(seed: int, t: TagIndex, N: int, cfg: PartitionConfig) -> TaggedSequence:
  """
  N independent points uniform over the interior grid points of C_t.

  Draws j uniformly and emits (j*m + t)/2^p; j = 0 is skipped for t = 0 so
  the endpoint 0 never appears.
  """
  _check_generator_args(N, cfg.p)
  t = check_tag(t, cfg)
  rng = make_rng(seed)
  j_lo = 1 if t == 0 else 0
  j_hi = ((1 << cfg.p) - 1 - t) // cfg.m
  j = rng.integers(j_lo, j_hi, size=N, dtype=np.int64, endpoint=True)
  base = Sequence(
    SequenceDescriptor("sampled", {"t": t, "m": cfg.m}, N, cfg.p, seed=int(seed)),
    j * cfg.m + t
  )
  return TaggedSequence(base, np.full(N, t, dtype=np.int64), cfg, "sampled")


def _place_below(x: Sequence, tags: np.ndarray, cfg: PartitionConfig) -> np.ndarray:
  """
  For each n pick y_n in C_{tags[n]} within (max(0, x_n - 1/n), x_n).

  Raises:
    ResolutionExhausted: For the first n whose window holds no tagged point
  """
  if cfg.p < x.precision:
    raise ConfigurationError(
      f"partition precision {cfg.p} is below the sequence precision {x.precision}"
    )
  upper = x.numerators << (cfg.p - x.precision)
  n = np.arange(1, len(x) + 1, dtype=np.int64)
  # k > x_n*2^p - 2^p/n  <=>  k > x_n*2^p - ceil(2^p/n)
  window = ((1 << cfg.p) + n - 1) // n
  lower = np.maximum(upper - window, 0)
  picked = pick_numerators(lower, upper, tags, cfg.m)
  failed = np.flatnonzero(picked < 0)
  if failed.size:
    index = int(failed[0]) + 1
    logger.error(f"Resolution exhausted at n={index} (m={cfg.m}, p={cfg.p})")
    raise ResolutionExhausted(
      f"no point of C_{int(tags[index - 1])} below x_n within 1/n", index=index
    )
  return picked


def lift_to_tag(x: Sequence, t: TagIndex, cfg: PartitionConfig) -> TaggedSequence:
  """
  Replace every x_n by the tagged point y_n in C_t ∩ (0, x_n) with
  |x_n - y_n| < 1/n closest below x_n.
  """
  t = check_tag(t, cfg)
  tags = np.full(len(x), t, dtype=np.int64)
  picked = _place_below(x, tags, cfg)
  descriptor = SequenceDescriptor(
    "lift", {"source": x.descriptor.to_dict(), "t": t, "m": cfg.m}, len(x), cfg.p
  )
  logger.debug(f"Lifted {len(x)} terms to tag {t}")
  return TaggedSequence(Sequence(descriptor, picked), tags, cfg, "lift")


def diagonal_spoiler(x: Sequence, cfg: PartitionConfig) -> TaggedSequence:
  """
  Re-place term n into C_{n-1}, so each tag class receives at most one term.

  The tag set of x itself never needs avoiding: every term is re-placed.
  """
  if cfg.m < len(x):
    raise ConfigurationError(
      f"spoiler needs one fresh tag per term: m={cfg.m} < N={len(x)}"
    )
  tags = np.arange(len(x), dtype=np.int64)
  picked = _place_below(x, tags, cfg)
  descriptor = SequenceDescriptor(
    "spoiler", {"source": x.descriptor.to_dict(), "m": cfg.m}, len(x), cfg.p
  )
  logger.debug(f"Spoiled {len(x)} terms over m={cfg.m} tags")
  return TaggedSequence(Sequence(descriptor, picked), tags, cfg, "spoiler")


def witness_tags(y: TaggedSequence) -> Set[TagIndex]:
  """Tags actually hit by y; the tagged count is identically 0 for any other tag."""
  return set(int(t) for t in np.unique(y.tags))


def materialize(descriptor: Union[SequenceDescriptor, Dict[str, Any]]) -> AnySequence:
  """
  Rebuild a sequence from its descriptor.

  Raises:
    InputError: If the kind is unknown or parameters are missing
  """
  if isinstance(descriptor, dict):
    descriptor = SequenceDescriptor.from_dict(descriptor)
  kind, params = descriptor.kind, descriptor.params
  try:
    if kind == "kronecker":
      return kronecker(params["alpha"], descriptor.N, descriptor.p)
    if kind == "van_der_corput":
      return van_der_corput(int(params["base"]), descriptor.N, descriptor.p)
    if kind == "iid_uniform":
      return iid_uniform(descriptor.seed, descriptor.N, descriptor.p)
    if kind == "sampled":
      cfg = PartitionConfig(int(params["m"]), descriptor.p)
      return sample_tagged(descriptor.seed, int(params["t"]), descriptor.N, cfg)
    if kind in ("lift", "spoiler"):
      source = materialize(params["source"])
      cfg = PartitionConfig(int(params["m"]), descriptor.p)
      if kind == "lift":
        return lift_to_tag(source, int(params["t"]), cfg)
      return diagonal_spoiler(source, cfg)
  except KeyError as e:
    raise InputError(f"descriptor of kind '{kind}' lacks parameter {e}") from e
  raise InputError(f"unknown sequence kind '{kind}'")


def sequence_rows(seq: AnySequence) -> List[Dict[str, Any]]:
  """Export rows: 1-based index, exact "k/2^p", decimal, and tag when known."""
  p = seq.precision
  tags = seq.tags if isinstance(seq, TaggedSequence) else None
  rows = []
  for i, k in enumerate(seq.numerators.tolist()):
    row = {"index": i + 1, "exact": f"{k}/2^{p}", "decimal": k / (1 << p)}
    if tags is not None:
      row["tag"] = int(tags[i])
    rows.append(row)
  return rows


def sequence_document(seq: AnySequence) -> Dict[str, Any]:
  """JSON document body for a sequence file (the manifest is added by the caller)."""
  doc = {
    "kind": "sequence",
    "descriptor": seq.descriptor.to_dict(),
    "precision": seq.precision,
    "rows": sequence_rows(seq),
  }
  if isinstance(seq, TaggedSequence):
    doc["partition"] = seq.cfg.to_dict()
    doc["provenance"] = seq.provenance
  return doc


def sequence_from_document(doc: Dict[str, Any]) -> AnySequence:
  """
  Rebuild a sequence from the rows of a sequence document.

  Raises:
    InputError: If the document is not a sequence file or rows are malformed
  """
  if doc.get("kind") != "sequence" or "rows" not in doc:
    raise InputError("not a sequence document")
  if "descriptor" not in doc:
    raise InputError("sequence document has no descriptor")
  descriptor = SequenceDescriptor.from_dict(doc["descriptor"])
  numerators = []
  tags = []
  for index, row in enumerate(doc["rows"], start=1):
    try:
      point = UnitPoint.parse(str(row["exact"]))
      tag = int(row["tag"]) if "tag" in row else None
    except (KeyError, TypeError, ValueError) as e:
      raise InputError(f"malformed sequence row {index}: {e}") from e
    numerators.append(point.at_precision(descriptor.p).numerator)
    if tag is not None:
      tags.append(tag)
  base = Sequence(descriptor, np.array(numerators, dtype=np.int64))
  if "partition" not in doc:
    return base
  if len(tags) != len(numerators):
    raise InputError("tagged sequence rows must all carry a tag")
  cfg = PartitionConfig.from_dict(doc["partition"])
  return TaggedSequence(base, np.array(tags, dtype=np.int64), cfg, doc.get("provenance", "sampled"))
