import numpy as np
import pytest

from nlpscope import suite
from nlpscope.solver import SolverOptions, solve


@pytest.fixture(scope="session")
def toy_equality_result():
    problem = suite.get_problem("toy_equality")
    return problem, solve(problem, suite.default_init("toy_equality"))


@pytest.fixture(scope="session")
def toy_inequality_result():
    problem = suite.get_problem("toy_inequality")
    return problem, solve(problem, suite.default_init("toy_inequality"))


@pytest.fixture(scope="session")
def rosenbrock_result():
    problem = suite.get_problem("disk_rosenbrock")
    return problem, solve(problem, suite.default_init("disk_rosenbrock"))


@pytest.fixture(scope="session")
def waypoint_result():
    problem = suite.get_problem("waypoint_T20")
    return problem, solve(problem, suite.default_init("waypoint_T20"))


@pytest.fixture(scope="session")
def waypoint_trace_file(tmp_path_factory, waypoint_result):
    from nlpscope.trace import write_trace
    _, result = waypoint_result
    path = tmp_path_factory.mktemp("traces") / "waypoint_T20.jsonl"
    write_trace(result.trace, str(path))
    return str(path)


@pytest.fixture(scope="session")
def toy_trace_file(tmp_path_factory, toy_equality_result):
    from nlpscope.trace import write_trace
    _, result = toy_equality_result
    path = tmp_path_factory.mktemp("traces") / "toy_equality.jsonl"
    write_trace(result.trace, str(path))
    return str(path)
