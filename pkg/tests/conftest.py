#!/usr/bin/env python3
"""
Shared pytest fixtures for all tests.
"""

import os
import sys
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config
from logging_utils import setup_logging
from partition import PartitionConfig


@pytest.fixture(scope="function", autouse=True)
def isolated_logging(tmp_path_factory, monkeypatch):
  """
  Send logs for every test into a temporary directory.

  This fixture runs before each test function so no test writes into the
  project-level logs/ directory.
  """
  log_dir = tmp_path_factory.mktemp("logs")
  monkeypatch.setattr(config, "LOG_DIR", str(log_dir))
  setup_logging(str(log_dir), "DEBUG")
  yield


@pytest.fixture
def cfg4():
  """Four tags at 32 bits, the default partition."""
  return PartitionConfig(4, 32)


@pytest.fixture
def serial_trials(monkeypatch):
  """Run experiment trials on a single thread."""
  monkeypatch.setattr(config, "THREADS", 1)
