import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# default sweeps, run once per session through the command line ---------------------------

def run_cli(args, out, threads="1"):
    """Run ``multilin`` in a subprocess; returns (exit code, wall seconds, CSV text)."""
    import os
    import subprocess
    import sys
    import time

    env = dict(os.environ, MULTILIN_THREADS=threads)
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "multilin.cli", *args, "--out", str(out)], env=env,
                          capture_output=True, text=True)
    wall = time.perf_counter() - t0
    text = out.read_text() if out.exists() else ""
    return proc.returncode, wall, text


@pytest.fixture(scope="session")
def default_ce1(tmp_path_factory):
    out = tmp_path_factory.mktemp("ce1") / "ce1_sweep.csv"
    return run_cli(["ce1-sweep", "--config", "ce1_default.cfg"], out)


@pytest.fixture(scope="session")
def default_ce2(tmp_path_factory):
    out = tmp_path_factory.mktemp("ce2") / "ce2_sweep.csv"
    return run_cli(["ce2-sweep", "--config", "ce2_default.cfg"], out)


def parse_sweep(text):
    """Rows (as dicts) and the ``#summary`` fields of a sweep CSV."""
    import csv

    lines = text.splitlines()
    rows = list(csv.DictReader([ln for ln in lines if ln and not ln.startswith("#")]))
    summary = {}
    for ln in lines:
        if ln.startswith("#summary "):
            summary = dict(kv.split("=", 1) for kv in ln[len("#summary "):].split())
    return rows, summary


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
