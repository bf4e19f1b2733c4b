import pytest

from atiyah.suites import SUITES, run_property_suite


@pytest.mark.parametrize("suite", SUITES)
def test_small_runs_pass(suite):
    rep = run_property_suite(suite, trials=4, seed=7)
    assert rep.passed, rep.to_text()
    assert rep.suite["failures"] == 0 and rep.suite["trials"] == 4


def test_seeded_runs_are_reproducible():
    a = run_property_suite("cech", trials=3, seed=2).to_dict(timing=False)
    b = run_property_suite("cech", trials=3, seed=2).to_dict(timing=False)
    assert a == b


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_property_suite("nope", 1, 0)
    with pytest.raises(ValueError):
        run_property_suite("algebra", 0, 0)
