import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sceneforge.clients import ClientSet
from sceneforge.fixtures import (
    make_compose_fixture,
    make_dataset_fixture,
    make_video_fixture,
)


# Populated by test_acceptance.py; rendered as one line per criterion in the
# terminal summary so the verdicts are visible in plain `pytest` output.
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        verdict = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"{verdict}  {name}{suffix}")


@pytest.fixture(scope="session")
def mocks() -> ClientSet:
    return ClientSet.mocks()


@pytest.fixture(scope="session")
def compose_fixture(tmp_path_factory) -> dict:
    root = tmp_path_factory.mktemp("compose-fixture")
    return make_compose_fixture(root)


@pytest.fixture(scope="session")
def dataset_fixture(tmp_path_factory):
    """20-scene COCO-style corpus; returns (annotations path, depth dir)."""
    root = tmp_path_factory.mktemp("dataset-fixture")
    ann = make_dataset_fixture(root, n_scenes=20, seed=0)
    return ann, root / "depth"


@pytest.fixture(scope="session")
def video_fixture(tmp_path_factory):
    root = tmp_path_factory.mktemp("video-fixture")
    return make_video_fixture(root, n_frames=4, seed=0)
