from pathlib import Path

import pytest

from sqlgate.phpdal.analyzer import analyze_corpus
from sqlgate.profiler import build_profile, record_training

FIXTURES = Path(__file__).parent / "fixtures"

# the worked example threaded through the whole pipeline: a benign lookup
# tagged with the call stack that led to it
DEMO_TAGGED = (
    "SELECT * FROM public_info where id > 0 "
    "# mysqli::multi_query@DatabaseConnectionmysqli::multi_execute@executeQuery@get_public_info"
)
DEMO_SQL = "SELECT * FROM public_info where id > 0"


@pytest.fixture(scope="session")
def demo_dal():
    return analyze_corpus(FIXTURES / "webapp_demo", seeds=("mysqli",))


@pytest.fixture(scope="session")
def demo_profile(demo_dal):
    return build_profile([record_training(DEMO_TAGGED)], demo_dal)
