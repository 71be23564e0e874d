import os

# Keep test runs from writing the rotating log file
os.environ.setdefault("SHELLDRAG_LOG_FILE", "")

import pytest  # noqa: E402

from app.modules.beam.schemas import BeamSpec  # noqa: E402
from app.modules.geometry.schemas import EllipseBody  # noqa: E402
from app.modules.simulator.schemas import ChannelSpec  # noqa: E402
from app.modules.simulator.services.simulator_service import SimulatorService  # noqa: E402


@pytest.fixture(scope="session")
def body():
    return EllipseBody()


@pytest.fixture(scope="session")
def beam():
    return BeamSpec()


def _channel(deflection, body, **kwargs):
    return ChannelSpec.from_deflection(deflection, body, **kwargs)


@pytest.fixture(scope="session")
def channels(body):
    return {name: _channel(d, body) for name, d in (("d1", 0.01), ("d2", 0.02), ("d3", 0.03))}


@pytest.fixture(scope="session")
def sweeps(channels, body):
    """Forward sweeps at 1 mm steps with their summaries, keyed by preset name."""
    results = {}
    for name, channel in channels.items():
        trace = SimulatorService.sweep(channel, body, dx=1e-3)
        results[name] = (trace, SimulatorService.summarize(trace, channel, body))
    return results
