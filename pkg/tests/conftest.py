import json
from importlib import resources

import hypothesis
import pytest

from entitymetrics.metrics import UndirectedView

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=50, deadline=None)
hypothesis.settings.load_profile("dev")

TOY = resources.files("entitymetrics") / "data" / "toy"

GRAPH4_EDGES = [("A", "B"), ("A", "C"), ("B", "C"), ("C", "D")]


@pytest.fixture
def toy_dir():
    return TOY


@pytest.fixture
def graph4():
    return UndirectedView.from_edges("ABCD", GRAPH4_EDGES)


@pytest.fixture
def write_jsonl(tmp_path):
    def write(records, name="corpus.jsonl", raw_lines=()):
        path = tmp_path / name
        lines = [json.dumps(r) for r in records] + list(raw_lines)
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path

    return write


def paper(pid, title="", abstract="", date="2000/01/01", refs=()):
    return {"id": pid, "title": title, "abstract": abstract, "date": date, "refs": list(refs)}
