import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

sys.path.insert(0, str(Path(__file__).parent))


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_criterion"):
        status = "PASS" if report.passed else ("SKIPPED" if report.skipped else "FAIL")
        line = name.replace("test_criterion_", "criterion ").replace("_", " ")
        print(f"\nACCEPTANCE {line}: {status}")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture(scope="session")
def academic_store():
    from rdf2gml.parser import parse_dump

    return parse_dump(FIXTURES / "academic.nt").store


@pytest.fixture(scope="session")
def chain_store():
    from rdf2gml.parser import parse_dump

    return parse_dump(FIXTURES / "chain.nt").store
