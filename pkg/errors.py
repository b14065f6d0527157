#!/usr/bin/env python3
"""
Exception types raised by the equidist library.

Every error is a ValueError so callers that only care about bad input can
catch that. The CLI maps all of them to exit status 2.
"""

from typing import Optional


class EquidistError(ValueError):
  """Base class for all library errors."""


class ConfigurationError(EquidistError):
  """Invalid partition or generator parameters, or mismatched precisions."""


class DomainError(EquidistError):
  """An operation was asked for a value outside its domain (e.g. N = 0)."""


class InputError(EquidistError):
  """Malformed input: bad schedule, unsupported integrand, unreadable file."""


class ResolutionExhausted(EquidistError):
  """
  No tagged grid point lies in the requested open interval.

  Attributes:
    index: 1-based sequence index of the failing term, when known
  """

  def __init__(self, message: str, index: Optional[int] = None):
    if index is not None:
      message = f"{message} (at index n={index}; try a larger precision p)"
    super().__init__(message)
    self.index = index
