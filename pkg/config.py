#!/usr/bin/env python3
"""
Configuration file for equidist.
"""

import os

TOOL_VERSION = "0.4.0"

# Surrogate partition
DEFAULT_M = 4  # number of tag classes
DEFAULT_P = 32  # grid precision in bits
MAX_PRECISION = 62  # numerators k <= 2^62 fit int64 arrays

# Kronecker generator
ALPHA_GUARD_BITS = 64  # extra bits carried for alpha before grid truncation
NAMED_ALPHAS = {
  "sqrt2": "sqrt(2)",
  "sqrt3": "sqrt(3)",
  "sqrt5": "sqrt(5)",
  "golden": "(1 + sqrt(5)) / 2",
  "e": "E",
  "pi": "pi",
}

# Uniform-distribution tests
DEFAULT_GRID = "dyadic8"
DEFAULT_SCHEDULE = [10**2, 10**3, 10**4, 10**5]
DEFAULT_TOLERANCE = 0.02

# Integrand family and reference oracle
QUADRATURE_PANELS = 2**20
MAX_POLY_DEGREE = 6
MAX_TRIG_FREQUENCY = 8
BRACKET_SLACK = 1e-12  # added to Lipschitz step brackets against float rounding

# Monte-Carlo experiments
DEFAULT_TRIALS = 200
DEFAULT_TRIAL_N = 10**4
DEFAULT_EPSILON = 0.02
DEFAULT_DELTA = 0.05  # pass fraction must reach 1 - delta
DEFAULT_MASTER_SEED = 42
RNG_NAME = "numpy.random.Philox"

# Parallelism: 0 = auto (all cores)
THREADS = int(os.environ.get("EQUIDIST_THREADS", "0"))

# Logging
LOG_DIR = os.environ.get(
  "EQUIDIST_LOG_DIR", os.path.join(os.path.dirname(__file__), "logs")
)
LOG_LEVEL = "WARNING"
