"""Regression goldens: fresh scenario outputs must reproduce the stored CSVs.

Run with ``UPDATE_GOLDENS=1`` to rewrite the stored files after an
intentional numerical change.
"""

import os
import shutil

import numpy as np
import pytest

from conftest import SCENARIOS
from hyperflow.scenario import load_scenario, read_table, run_scenario

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")
CASES = ["shrinking_sphere", "normalized_circle"]
FILES = ["trace.csv", "profile_final.csv"]


@pytest.mark.parametrize("name", CASES)
def test_matches_golden(name, tmp_path):
    oc = run_scenario(load_scenario(SCENARIOS / f"{name}.json"), tmp_path, figures=False)
    assert oc.exit_code == 0
    target = os.path.join(GOLDEN_DIR, name)
    if os.environ.get("UPDATE_GOLDENS"):
        os.makedirs(target, exist_ok=True)
        for f in FILES:
            shutil.copy(tmp_path / name / f, os.path.join(target, f))
    for f in FILES:
        names_new, new = read_table(tmp_path / name / f)
        names_old, old = read_table(os.path.join(target, f))
        assert names_new == names_old
        assert new.shape == old.shape
        # tolerance only absorbs libm differences between platforms
        assert np.allclose(new, old, rtol=1e-10, atol=1e-14, equal_nan=True), f
