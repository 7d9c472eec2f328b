import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "uelpick",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "uelpick"))


@pytest.fixture
def small_axes():
    from uelpick.model import TimeAxis, VelocityAxis

    return TimeAxis(0.0, 8.0, 376), VelocityAxis(1300.0, 20.0, 211)


_UNIT_MODULES = ("test_model", "test_spectrum", "test_regress", "test_cluster", "test_ensemble",
                 "test_evalqc", "test_synth", "test_kernels", "test_fileio")


def pytest_collection_modifyitems(config, items):
    # tag unit tests as 'oracle' or 'property' so the acceptance suite can rerun each group
    for item in items:
        if item.module.__name__.rsplit(".", 1)[-1] not in _UNIT_MODULES:
            continue
        if getattr(item.obj, "is_hypothesis_test", False):
            st = getattr(item.obj, "_hypothesis_internal_use_settings", None)
            if st is not None and st.max_examples < 100:
                raise pytest.UsageError(f"{item.nodeid}: property tests need max_examples >= 100")
            item.add_marker("property")
        else:
            item.add_marker("oracle")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
