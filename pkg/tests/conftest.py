"""Shared fixtures. Heavy pipeline runs are session-scoped and reused."""

from dataclasses import replace

import numpy as np
import pytest

from duosec import bcd, sensing
from duosec.baselines import evaluate_scheme
from duosec.scenario import default_scenario


@pytest.fixture(scope="session")
def table1():
    return default_scenario()


@pytest.fixture(scope="session")
def small_cfg(table1):
    """Feasible 6-slot, 2-target scenario for fast end-to-end runs."""
    return replace(
        table1, n_slots=6, task_duration=3.0, n_sensing_slots=4,
        slots_per_target=2, targets=((20.0, 15.0), (40.0, -20.0)),
        uav_final={"alice": (48.0, 0.0), "jack": (50.0, -10.0)})


@pytest.fixture(scope="session")
def bcd_table1(table1):
    return bcd.run_bcd(table1)


@pytest.fixture(scope="session")
def scs_table1(table1, bcd_table1):
    return sensing.plan_scs(table1, bcd_table1)


@pytest.fixture(scope="session")
def scheme_solutions(table1, scs_table1):
    # reuse the cached pipeline output instead of evaluate_scheme's own
    # run_bcd + plan_scs; fill in the bookkeeping extras it would have set
    scs_table1.extras.setdefault("scheme", "scs_proposed")
    scs_table1.extras.setdefault("wall_seconds", 0.0)
    sols = {"scs_proposed": scs_table1}
    for scheme in ("fhf", "fhf_beamforming", "single_uav"):
        sols[scheme] = evaluate_scheme(scheme, table1)
    return sols


@pytest.fixture(scope="session")
def bcd_small(small_cfg):
    return bcd.run_bcd(small_cfg)


def random_psd(rng, m, trace_cap):
    x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    w = x @ x.conj().T
    tr = float(np.trace(w).real)
    return w * (rng.uniform(0.1, 1.0) * trace_cap / tr)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
