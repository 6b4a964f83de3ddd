import functools

import pytest
from hypothesis import HealthCheck, settings

from formalmod import UnramifiedRing, canonical_frobenius, lt_group, multiplicative_module

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# (p, f, N, D) configurations exercised by the randomized suites
CONFIGS = [(2, 1, 12, 16), (2, 2, 12, 17), (3, 1, 12, 16), (3, 2, 10, 12)]


@functools.lru_cache(maxsize=None)
def ring(p, f, N):
    return UnramifiedRing(p, f, N)


@functools.lru_cache(maxsize=None)
def lt_module(p, q, f, N, D):
    return lt_group(canonical_frobenius(ring(p, f, N), q, D))


@functools.lru_cache(maxsize=None)
def mult_module(p, f, N, D):
    return multiplicative_module(ring(p, f, N), D)


@pytest.fixture
def r2():
    return ring(2, 1, 12)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
