"""
Pytest configuration and shared fixtures.
"""
import os
import sys
from pathlib import Path
from typing import Generator

import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from metastable.config import load_config  # noqa: E402
from metastable.core.hierarchy import HierarchyReport, full_hierarchy  # noqa: E402
from metastable.core.kawasaki import KawasakiParams, enumerate_omega_bar  # noqa: E402
from metastable.core.landscape import Landscape, build_landscape, load_landscape  # noqa: E402

W_ENERGIES = (0, 3, 1, 2, 1, 3, 0)


@pytest.fixture
def test_data_dir() -> Path:
    """Return the path to test fixtures directory."""
    return Path(__file__).parent / "fixtures"


@pytest.fixture
def W(test_data_dir: Path) -> Landscape:
    """Seven-state chain s0..s6 with energies (0,3,1,2,1,3,0)."""
    return load_landscape(test_data_dir / "W.json")


@pytest.fixture
def W_report(W: Landscape) -> HierarchyReport:
    """Full hierarchy of W."""
    return full_hierarchy(W)


@pytest.fixture
def exit_pair(test_data_dir: Path) -> Landscape:
    """Flat pair {a, b} at 0 with x1 (touching a) and x2 (touching a and b) at 1."""
    return load_landscape(test_data_dir / "exit_pair.json")


@pytest.fixture
def symmetric_pair() -> Landscape:
    """x1 - a - x2 with a at 0 and both neighbours at 1."""
    return build_landscape([("x1", 1), ("a", 0), ("x2", 1)], [(0, 1), (1, 2)])


@pytest.fixture
def make_landscape():
    """Factory building a landscape from energies and edges with labels s0, s1, ..."""
    def _make(energies, edges) -> Landscape:
        return build_landscape([(f"s{i}", e) for i, e in enumerate(energies)], edges)
    return _make


@pytest.fixture(scope="session")
def kawasaki_params() -> KawasakiParams:
    return KawasakiParams(5, 4, 2)


@pytest.fixture(scope="session")
def kawasaki_landscape(kawasaki_params: KawasakiParams) -> Landscape:
    """Sublevel landscape of the (5, 4, 2) lattice gas; enumerated once per session."""
    return enumerate_omega_bar(kawasaki_params)


@pytest.fixture(scope="session")
def kawasaki_report(kawasaki_landscape: Landscape) -> HierarchyReport:
    """Full hierarchy of the (5, 4, 2) lattice gas."""
    return full_hierarchy(kawasaki_landscape)


@pytest.fixture(scope="session")
def wide_params() -> KawasakiParams:
    return KawasakiParams(7, 4, 3)


@pytest.fixture(scope="session")
def wide_landscape(wide_params: KawasakiParams) -> Landscape:
    """Sublevel landscape of the (7, 4, 3) lattice gas, whose strips are wide enough to need H0+4."""
    return enumerate_omega_bar(wide_params)


@pytest.fixture(scope="session")
def wide_report(wide_landscape: Landscape) -> HierarchyReport:
    """Full hierarchy of the (7, 4, 3) lattice gas, solved in float64."""
    return full_hierarchy(wide_landscape, exact=False)


@pytest.fixture
def test_config(test_data_dir: Path) -> dict:
    """Return test configuration."""
    return load_config(str(test_data_dir / "test_config.yaml"))


@pytest.fixture
def clean_env() -> Generator[None, None, None]:
    """Drop METASTABLE_* variables and restore the environment afterwards."""
    original_env = os.environ.copy()
    for key in list(os.environ):
        if key.startswith("METASTABLE_"):
            del os.environ[key]

    yield

    # Restore original environment
    os.environ.clear()
    os.environ.update(original_env)
