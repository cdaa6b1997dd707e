import random

import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--seed",
        type=int,
        default=20260810,
        help="seed for the randomized property tests (fixed by default)",
    )


@pytest.fixture
def rng(request):
    return random.Random(request.config.getoption("--seed"))
