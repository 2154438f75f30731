import pytest

from discdyn.response_models import FopdtModel

# (K, T, L) of the reference discussions; hour units except the two day-unit ones
FIXTURES = [
    (27, 5, 1),
    (23, 5.5, 0.5),
    (16, 2.5, 2.5),
    (17, 2.5, 13.1),
    (36, 2.5, 1.5),
    (16, 1.5, 0.3),
]


@pytest.fixture(params=FIXTURES, ids=lambda p: "K{}-T{}-L{}".format(*p))
def fixture_model(request):
    return FopdtModel(*request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
