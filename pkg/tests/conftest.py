import numpy as np
import pytest

from patterndep.synth import SynthSpec, generate


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def planted():
    """Default-sized (27 x 26) planted two-cluster dataset with outcome = cluster id."""
    return generate(
        SynthSpec(structure="planted_two_cluster", separation=6.0,
                  outcome_mode="cluster_mean_gap", gap=1.0, seed=11)
    )


@pytest.fixture(scope="session")
def isotropic():
    return generate(SynthSpec(seed=11))[0]


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
