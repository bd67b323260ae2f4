import itertools

import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the slow tier")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow tier; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def simple_cycles_balanced(s):
    """Brute force: every simple cycle (length >= 3) has positive sign product.

    Enumerates cycles as vertex sequences starting at their smallest vertex,
    completely independent of any two-colouring argument.
    """
    s = np.asarray(s)
    n = s.shape[0]
    adj = {u: [v for v in range(n) if v != u and s[u, v] != 0] for u in range(n)}

    def dfs(start, u, visited, sign):
        for v in adj[u]:
            if v == start and len(visited) >= 3:
                if sign * s[u, v] < 0:
                    return False
            elif v > start and v not in visited:
                visited.append(v)
                if not dfs(start, v, visited, sign * s[u, v]):
                    return False
                visited.pop()
        return True

    return all(dfs(u, u, [u], 1) for u in range(n))


def all_sign_matrices(n):
    iu = np.triu_indices(n, 1)
    for signs in itertools.product((-1, 1), repeat=len(iu[0])):
        a = np.zeros((n, n), dtype=np.int8)
        a[iu] = signs
        yield a + a.T


def two_faction(n, members):
    """Complete signed graph: +1 inside ``members`` and inside its complement, -1 across."""
    side = np.array([1 if i in members else -1 for i in range(n)])
    a = np.outer(side, side).astype(np.int8)
    np.fill_diagonal(a, 0)
    return a


_CRITERIA: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(ok, detail)``."""

    def record(ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {request.node.name}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
