#!/usr/bin/env python3
"""
Built-in integrand family: polynomials, trigonometric modes, step
functions (optionally tagged) and their linear combinations.

Each integrand evaluates vectorized on float arrays and knows its exact
integral over [0, 1], so reference values never come from the sequences
under test.
"""

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence as Seq, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

import config
from errors import InputError

KINDS = ("polynomial", "trig", "step", "tagged-step", "sum")

ALIASES = {
  "1": "const:1",
  "const": "const:1",
  "x": "poly:0,1",
  "x2": "poly:0,0,1",
  "x3": "poly:0,0,0,1",
  "x4": "poly:0,0,0,0,1",
}


@dataclass(frozen=True)
class IntegrandSpec:
  """A bounded function on [0, 1] from the built-in family."""
  kind: str
  coefficients: Tuple[float, ...] = ()
  function: str = "sin"
  frequency: int = 0
  amplitude: float = 1.0
  breaks: Tuple[float, ...] = ()
  values: Tuple[float, ...] = ()
  closed_right: bool = False
  terms: Tuple[Tuple[float, "IntegrandSpec"], ...] = ()
  tag: Optional[int] = None
  label: str = ""

  def __post_init__(self):
    if self.kind not in KINDS:
      raise InputError(f"unsupported integrand kind '{self.kind}'")
    if self.kind == "polynomial":
      if not self.coefficients or len(self.coefficients) - 1 > config.MAX_POLY_DEGREE:
        raise InputError(
          f"polynomials need 1 to {config.MAX_POLY_DEGREE + 1} coefficients"
        )
    elif self.kind == "trig":
      if self.function not in ("sin", "cos"):
        raise InputError(f"trig function must be sin or cos, got '{self.function}'")
      if not 0 <= self.frequency <= config.MAX_TRIG_FREQUENCY:
        raise InputError(
          f"trig frequency must be in [0, {config.MAX_TRIG_FREQUENCY}], got {self.frequency}"
        )
    elif self.kind in ("step", "tagged-step"):
      if len(self.breaks) < 2 or len(self.values) != len(self.breaks) - 1:
        raise InputError("step functions need k+1 breakpoints and k values")
      if any(b < 0 or b > 1 for b in self.breaks) or any(
        a >= b for a, b in zip(self.breaks, self.breaks[1:])
      ):
        raise InputError("step breakpoints must increase strictly inside [0, 1]")
      if self.kind == "tagged-step" and self.tag is None:
        raise InputError("tagged-step integrands carry a tag")
    elif self.kind == "sum" and not self.terms:
      raise InputError("a linear combination needs at least one term")
    if not self.label:
      object.__setattr__(self, "label", self._default_label())

  def _default_label(self) -> str:
    if self.kind == "polynomial":
      return "poly:" + ",".join(f"{c:g}" for c in self.coefficients)
    if self.kind == "trig":
      return f"{self.function}:{self.frequency}" + (
        "" if self.amplitude == 1.0 else f":{self.amplitude:g}"
      )
    if self.kind in ("step", "tagged-step"):
      text = "step:" + ",".join(f"{b:g}" for b in self.breaks) + ";" + ",".join(
        f"{v:g}" for v in self.values
      )
      return text if self.tag is None else f"{text}@{self.tag}"
    return " + ".join(f"{c:g}*({t.label})" for c, t in self.terms)

  def tagged(self, t: int) -> "IntegrandSpec":
    """This integrand times the indicator of C_t."""
    kind = "tagged-step" if self.kind == "step" else self.kind
    label = self.label if self.tag is None else self.label.rsplit("@", 1)[0]
    return replace(self, kind=kind, tag=int(t), label=f"{label}@{int(t)}")

  def evaluate(self, x: np.ndarray) -> np.ndarray:
    """Plain values h(x); the C_t indicator of a tag is applied by callers."""
    x = np.asarray(x, dtype=np.float64)
    if self.kind == "polynomial":
      return P.polyval(x, np.asarray(self.coefficients, dtype=np.float64))
    if self.kind == "trig":
      fn = np.sin if self.function == "sin" else np.cos
      return self.amplitude * fn(2.0 * np.pi * self.frequency * x)
    if self.kind in ("step", "tagged-step"):
      breaks = np.asarray(self.breaks, dtype=np.float64)
      values = np.asarray(self.values, dtype=np.float64)
      idx = np.searchsorted(breaks, x, side="right") - 1
      if self.closed_right:
        idx = np.where(x == breaks[-1], values.size - 1, idx)
      inside = (idx >= 0) & (idx < values.size)
      return np.where(inside, values[np.clip(idx, 0, values.size - 1)], 0.0)
    total = np.zeros_like(x)
    for coef, term in self.terms:
      total = total + coef * term.evaluate(x)
    return total

  def analytic_integral(self) -> Optional[float]:
    """Closed-form integral of h over [0, 1], or None when there is none."""
    if self.kind == "polynomial":
      return float(sum(c / (i + 1) for i, c in enumerate(self.coefficients)))
    if self.kind == "trig":
      if self.frequency == 0:
        return 0.0 if self.function == "sin" else float(self.amplitude)
      # Whole periods
      return 0.0
    if self.kind in ("step", "tagged-step"):
      return float(sum(
        v * (b - a) for v, a, b in zip(self.values, self.breaks, self.breaks[1:])
      ))
    parts = [term.analytic_integral() for _, term in self.terms]
    if any(part is None for part in parts):
      return None
    return float(sum(coef * part for (coef, _), part in zip(self.terms, parts)))

  def lipschitz_bound(self) -> Optional[float]:
    """Upper bound on |h'| over [0, 1]; None for discontinuous kinds."""
    if self.kind == "polynomial":
      return float(sum(i * abs(c) for i, c in enumerate(self.coefficients)))
    if self.kind == "trig":
      return 2.0 * math.pi * self.frequency * abs(self.amplitude)
    if self.kind == "sum":
      bounds = [term.lipschitz_bound() for _, term in self.terms]
      if any(b is None for b in bounds):
        return None
      return float(sum(abs(coef) * b for (coef, _), b in zip(self.terms, bounds)))
    return None

  def to_dict(self) -> Dict[str, Any]:
    data: Dict[str, Any] = {"kind": self.kind, "label": self.label}
    if self.kind == "polynomial":
      data["coefficients"] = list(self.coefficients)
    elif self.kind == "trig":
      data.update(function=self.function, frequency=self.frequency, amplitude=self.amplitude)
    elif self.kind in ("step", "tagged-step"):
      data.update(breaks=list(self.breaks), values=list(self.values), closed_right=self.closed_right)
    else:
      data["terms"] = [[coef, term.to_dict()] for coef, term in self.terms]
    if self.tag is not None:
      data["tag"] = self.tag
    return data

  @classmethod
  def from_dict(cls, data: Any) -> "IntegrandSpec":
    """Accepts either a dict produced by to_dict() or a parse_integrand() string."""
    if isinstance(data, str):
      return parse_integrand(data)
    try:
      kwargs = dict(data)
      if "terms" in kwargs:
        kwargs["terms"] = tuple((float(c), cls.from_dict(t)) for c, t in kwargs["terms"])
      for key in ("coefficients", "breaks", "values"):
        if key in kwargs:
          kwargs[key] = tuple(float(v) for v in kwargs[key])
      return cls(**kwargs)
    except TypeError as e:
      raise InputError(f"Malformed integrand: {e}") from e


def polynomial(*coefficients: float) -> IntegrandSpec:
  """Polynomial with ascending coefficients c0 + c1*x + ..."""
  return IntegrandSpec("polynomial", coefficients=tuple(float(c) for c in coefficients))


def trig(function: str, frequency: int, amplitude: float = 1.0) -> IntegrandSpec:
  """amplitude * sin(2*pi*frequency*x) or the cosine."""
  return IntegrandSpec("trig", function=function, frequency=int(frequency), amplitude=float(amplitude))


def step(breaks: Seq[float], values: Seq[float], closed_right: bool = False) -> IntegrandSpec:
  """values[j] on [breaks[j], breaks[j+1]), zero outside; last piece closed if closed_right."""
  return IntegrandSpec(
    "step",
    breaks=tuple(float(b) for b in breaks),
    values=tuple(float(v) for v in values),
    closed_right=closed_right
  )


def indicator(c: float, d: float, closed: bool = True) -> IntegrandSpec:
  """Indicator of [c, d] (or [c, d) when closed is False)."""
  spec = step([c, d], [1.0], closed_right=closed)
  return replace(spec, label=f"1[{c:g},{d:g}{']' if closed else ')'}")


def linear_combination(terms: Seq[Tuple[float, IntegrandSpec]]) -> IntegrandSpec:
  return IntegrandSpec("sum", terms=tuple((float(c), t) for c, t in terms))


def _numbers(text: str) -> List[float]:
  try:
    return [float(Fraction(part.strip())) for part in text.split(",") if part.strip()]
  except (ValueError, ZeroDivisionError) as e:
    raise InputError(f"Malformed number list '{text}'") from e


def parse_integrand(text: str) -> IntegrandSpec:
  """
  Parse the CLI integrand syntax.

  Forms: x, x2, const:c, poly:c0,c1,..., sin:h[:amp], cos:h[:amp],
  indicator:c,d, halfopen:c,d, step:b0,...,bk;v0,...,v(k-1). A trailing
  "@t" tags the integrand.
  """
  raw = text.strip()
  tag = None
  if "@" in raw:
    raw, _, tag_text = raw.rpartition("@")
    if not tag_text.strip().isdigit():
      raise InputError(f"Malformed tag in integrand '{text}'")
    tag = int(tag_text)
  raw = ALIASES.get(raw, raw)
  name, _, args = raw.partition(":")
  name = name.strip().lower()

  if name == "const":
    spec = polynomial(*_numbers(args or "1"))
  elif name == "poly":
    spec = polynomial(*_numbers(args))
  elif name in ("sin", "cos"):
    parts = args.split(":")
    try:
      freq = int(parts[0])
    except ValueError as e:
      raise InputError(f"Malformed frequency in '{text}'") from e
    amps = _numbers(parts[1]) if len(parts) > 1 else [1.0]
    if len(amps) != 1:
      raise InputError(f"Malformed amplitude in '{text}'")
    amp = amps[0]
    spec = trig(name, freq, amp)
  elif name in ("indicator", "halfopen"):
    bounds = _numbers(args)
    if len(bounds) != 2:
      raise InputError(f"'{name}' takes exactly two bounds: '{text}'")
    spec = indicator(bounds[0], bounds[1], closed=(name == "indicator"))
  elif name == "step":
    breaks_text, _, values_text = args.partition(";")
    spec = step(_numbers(breaks_text), _numbers(values_text))
  else:
    raise InputError(f"unsupported integrand '{text}'")

  return spec.tagged(tag) if tag is not None else spec


def midpoint_quadrature(f: IntegrandSpec, panels: int = config.QUADRATURE_PANELS) -> float:
  """Composite midpoint rule; error O(1/panels^2) for smooth integrands."""
  if panels < 1:
    raise InputError(f"panels must be positive, got {panels}")
  mids = (np.arange(panels, dtype=np.float64) + 0.5) / panels
  return float(np.mean(f.evaluate(mids)))


def quadrature_reference(
  f: IntegrandSpec,
  panels: int = config.QUADRATURE_PANELS,
  method: str = "auto"
) -> float:
  """
  Reference value of the integral of h over [0, 1] (a tag is ignored: the
  tagged measure agrees with length).

  Args:
    f: Integrand
    panels: Midpoint panels when no closed form is used
    method: "auto" (closed form when available) or "midpoint"
  """
  if method not in ("auto", "midpoint"):
    raise InputError(f"unknown quadrature method '{method}'")
  if method == "auto":
    exact = f.analytic_integral()
    if exact is not None:
      return exact
  return midpoint_quadrature(f, panels)


def step_brackets(h: IntegrandSpec, pieces: int) -> Tuple[IntegrandSpec, IntegrandSpec]:
  """
  Step functions f1 <= h <= f2 on [0, 1] from a Lipschitz bound.

  Each of the equal pieces gets h(midpoint) -/+ L*width/2.

  Raises:
    InputError: If h has no Lipschitz bound (step kinds)
  """
  lip = h.lipschitz_bound()
  if lip is None:
    raise InputError(f"cannot bracket discontinuous integrand '{h.label}'")
  if pieces < 1:
    raise InputError(f"pieces must be positive, got {pieces}")
  breaks = np.linspace(0.0, 1.0, pieces + 1)
  mids = (breaks[:-1] + breaks[1:]) / 2.0
  centre = h.evaluate(mids)
  spread = lip / (2.0 * pieces) + config.BRACKET_SLACK
  lower = step(breaks, centre - spread, closed_right=True)
  upper = step(breaks, centre + spread, closed_right=True)
  return (
    replace(lower, label=f"lower[{h.label}|{pieces}]"),
    replace(upper, label=f"upper[{h.label}|{pieces}]"),
  )
