import re
import itertools

import numpy as np
import pytest

from dkslab.codes import build_generalized_bch, dual_code
from dkslab.csp import plant_satisfiable_instance
from dkslab.graphs import Graph, GnpParams, gen_gnp


def brute_steiner(g: Graph, terminals) -> int | None:
    """Fewest vertices of a connected vertex set containing the terminals."""
    terms = set(terminals)
    if not terms:
        return 0
    others = [v for v in range(g.n) if v not in terms]
    for extra in range(len(others) + 1):
        for add in itertools.combinations(others, extra):
            verts = terms | set(add)
            start = next(iter(verts))
            seen, todo = {start}, [start]
            while todo:
                x = todo.pop()
                for y in g.neighbors(x):
                    y = int(y)
                    if y in verts and y not in seen:
                        seen.add(y)
                        todo.append(y)
            if seen == verts:
                return len(verts)
    return None


@pytest.fixture(scope="session")
def small_graphs():
    return [gen_gnp(GnpParams(n, p, s)) for s, (n, p) in enumerate(itertools.product((7, 9, 12), (0.25, 0.4, 0.6)))]


@pytest.fixture(scope="session")
def code_q3():
    return dual_code(build_generalized_bch(3, 3))


@pytest.fixture(scope="session")
def planted_preset(code_q3):
    inst, hidden = plant_satisfiable_instance(10, 10, code_q3, 0)
    return inst, hidden


def all_assignments(n: int, q: int) -> np.ndarray:
    return np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)


ACCEPTANCE: list[str] = []


def report_criterion(number, passed: bool, detail: str) -> None:
    ACCEPTANCE.append(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def _criterion_key(line: str):
    number = re.match(r"criterion (\d+)", line)
    return (int(number.group(1)) if number else 99, line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=_criterion_key):
            terminalreporter.write_line(line)
