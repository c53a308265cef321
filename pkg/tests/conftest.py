import pytest
import numpy as np
import sys
from pathlib import Path

# Get the project root directory
project_root = str(Path(__file__).parent.parent)

# Add the project root directory to Python path
sys.path.insert(0, project_root)

from partitions import LabeledPartition, Partition
from verification import DEFAULT_SEED, random_rational_matrix

FOREST_BLOCKS = ((1, 7, 10), (2, 6), (3, 5), (4,), (8, 9))


@pytest.fixture
def forest_partition():
    return Partition.from_blocks(FOREST_BLOCKS)


@pytest.fixture
def forest_valley_labels():
    return LabeledPartition.from_blocks(FOREST_BLOCKS, (3, 2, 3, 4, 5))


@pytest.fixture
def forest_peak_labels():
    return LabeledPartition.from_blocks(FOREST_BLOCKS, (1, 3, 2, 4, 9))


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture
def matrix_factory(rng):
    """Seeded random rational matrices of a given dimension."""
    def make(dimension: int):
        return random_rational_matrix(rng, dimension)
    return make


@pytest.fixture
def schema():
    import json
    with open(Path(project_root) / 'schemas' / 'output.schema.json', encoding='utf-8') as f:
        return json.load(f)


@pytest.fixture
def clean_env(monkeypatch):
    """No VMONO_* variables, no .env file and fixed system settings."""
    for name in ('VMONO_VERBOSE', 'VMONO_SEED', 'VMONO_LEVEL', 'VMONO_FORMAT',
                 'VMONO_OUTPUT', 'VMONO_WORKERS'):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr('main.load_dotenv', lambda *args, **kwargs: None)
    monkeypatch.setattr('main.SystemInfo.get_optimal_settings',
                        lambda verbose=False: {'num_cpus': 2, 'num_workers': 2})
    return monkeypatch
