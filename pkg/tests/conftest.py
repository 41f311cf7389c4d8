import json
from pathlib import Path

import pytest

from respviz.model import load_dataset, parse_spec
from respviz.render import render

ROOT = Path(__file__).resolve().parents[1]
SPEC_DIR = ROOT / "specs"
DATA_DIR = ROOT / "data"
FIXTURE_NAMES = ("scatter", "histogram", "line", "scatter_color", "scatter_shapes", "heatmap")


def load_fixture(name):
    spec = parse_spec((SPEC_DIR / f"{name}.json").read_text())
    data_path = (SPEC_DIR / spec.data.url).resolve()
    data = load_dataset(data_path.read_text(), spec.data.fields, name)
    return spec, data


@pytest.fixture(scope="session")
def fixtures():
    return {name: load_fixture(name) for name in FIXTURE_NAMES}


@pytest.fixture(scope="session")
def rendered(fixtures):
    return {name: render(data, spec) for name, (spec, data) in fixtures.items()}


@pytest.fixture(scope="session")
def countries_rows():
    return json.loads((DATA_DIR / "countries.json").read_text())
