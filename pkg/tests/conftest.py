"""Shared helpers for the test suite."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cevarep.fracaffine import min_bottom_over_box
from cevarep.oracle import SamplingRegion


def domain_box(f, half=0.5, floor=0.05):
    """A sampling box around the anchor, shrunk until the denominator
    stays above `floor` on all of it.  Deterministic, so tests that
    derive regions this way are reproducible."""
    while half > 1e-6:
        region = SamplingRegion(f.anchor - half, f.anchor + half)
        if min_bottom_over_box(f, region) > floor:
            return region
        half *= 0.5
    raise AssertionError("could not find a sampling box inside the domain")


def run_cli(args, env_extra=None, cwd=None):
    """Run the CLI in a subprocess; returns (exit_code, stdout_bytes,
    stderr_text)."""
    env = os.environ.copy()
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run(
        [sys.executable, "-m", "cevarep.cli"] + list(args),
        capture_output=True,
        env=env,
        cwd=cwd,
    )
    return proc.returncode, proc.stdout, proc.stderr.decode()


def cli_json(args, expect_code=0, env_extra=None):
    code, out, err = run_cli(args, env_extra=env_extra)
    assert code == expect_code, f"exit {code} != {expect_code}; stderr: {err}"
    return json.loads(out.decode())


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def sup_param_distance(f, g):
    """Largest absolute difference between the parameter blocks of two
    maps, assumed already in a common canonical form."""
    return max(
        float(np.max(np.abs(f.top.matrix - g.top.matrix))),
        float(np.max(np.abs(f.top.offset - g.top.offset))),
        float(np.max(np.abs(f.bottom.row - g.bottom.row))),
        abs(f.bottom.offset - g.bottom.offset),
    )
