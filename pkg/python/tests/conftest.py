"""Shared fixtures for Python tests."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure the python/ directory is importable
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config.config import RepConfig  # noqa: E402
from core.fock_rep import build_rep  # noqa: E402
from core.space_model import TestFunction, build_canonical_pairs, build_lightray_hermite  # noqa: E402


@pytest.fixture(scope='module')
def canonical_model():
    """One exact canonical pair: σ(e0, e1) = 1, rotation flow."""
    return build_canonical_pairs(1)


@pytest.fixture(scope='module')
def hermite_model():
    """Hermite truncation of the light-ray model with N = 4."""
    return build_lightray_hermite(4)


@pytest.fixture(scope='module')
def canonical_rep(canonical_model):
    return build_rep(canonical_model, RepConfig(boson_cutoff=16))


@pytest.fixture(scope='module')
def odd_rep(canonical_model):
    """Odd cutoff, so 0 is an eigenvalue of every truncated field."""
    return build_rep(canonical_model, RepConfig(boson_cutoff=31))


@pytest.fixture(scope='module')
def hermite_rep(hermite_model):
    return build_rep(hermite_model, RepConfig(boson_cutoff=12))


@pytest.fixture(scope='module')
def hermite_names():
    """Two overlapping test functions on the Hermite model."""
    return {
        'f1': TestFunction.from_array([0.3, 0.0, 0.1, 0.0]),
        'f2': TestFunction.from_array([0.0, 0.2, 0.0, 0.1]),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _patch_output_dir(tmp_path, monkeypatch):
    """Redirect WORKBENCH_OUTPUT_DIR to a temp folder so tests never write real reports."""
    monkeypatch.setenv('WORKBENCH_OUTPUT_DIR', str(tmp_path / 'reports'))
