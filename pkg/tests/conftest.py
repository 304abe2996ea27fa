from pathlib import Path

import numpy as np
import pytest

from ergocodesign import presets
from ergocodesign.model.io import model_from_dict


@pytest.fixture(scope="session")
def toy_robot():
    return model_from_dict(presets.toy_robot())


@pytest.fixture(scope="session")
def toy_human():
    return model_from_dict(presets.human(1.78))


@pytest.fixture(scope="session")
def reference_robot():
    return model_from_dict(presets.reference_robot())


def random_configuration(rng, model, scale=1.0):
    """Random base pose and joint vector inside the joint limits."""
    lo, hi = model.lower_limits, model.upper_limits
    s = rng.uniform(lo, hi)
    return np.concatenate([rng.normal(size=3) * scale, rng.normal(size=4), s])


DATA = Path(__file__).resolve().parents[1] / "src" / "ergocodesign" / "data"


# acceptance reporting: one line per criterion in the terminal summary
_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    detail = "; ".join(f"{k}={v}" for k, v in rep.user_properties)
    _CRITERIA[mark.args[0]] = ("PASS" if rep.passed else "FAIL", mark.args[1], detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {status} - {title}" + (f" ({detail})" if detail else ""))
