import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import pytest

from medsum.corpus import parse_dataset

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def mini_corpus():
    entries, skipped = parse_dataset((GOLDEN_DIR / "mini_corpus.json").read_bytes())
    assert skipped == 0
    return entries


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN_DIR
