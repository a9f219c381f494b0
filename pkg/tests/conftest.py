from pathlib import Path

import pytest

from perftransfer import kernels
from perftransfer.space import ConfigurationSpace

REPO = Path(__file__).resolve().parents[1]
SCENARIOS = REPO / "scenarios"


@pytest.fixture
def space_2x3():
    return ConfigurationSpace.from_level_counts([2, 3])


@pytest.fixture
def space_444():
    return ConfigurationSpace.from_level_counts([4, 4, 4])


@pytest.fixture(params=["compiled", "python"])
def backend(request):
    """Run a test once per kernel backend."""
    if request.param == "compiled" and kernels.compiled_backend is None:
        pytest.skip("compiled kernels not built")
    previous = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


def write_bench(directory, scenario, **spec):
    """Synthesize a scenario into ``directory`` and write a bench spec next to it."""
    import json

    from perftransfer.dataset import save_csv
    from perftransfer.space import save_space
    from perftransfer.synthetic import load_scenario

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sc = load_scenario(scenario)
    source, target, _ = sc.generate()
    save_space(sc.space, directory / "space.json")
    save_csv(source, directory / "source.csv")
    save_csv(target, directory / "target.csv")
    body = {"space": "space.json", "source": "source.csv", "targets": ["target.csv"], "out": "report", **spec}
    path = directory / "bench.json"
    path.write_text(json.dumps(body, indent=2) + "\n")
    return path


ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
