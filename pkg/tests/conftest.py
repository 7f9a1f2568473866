import sys
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

import pytest

from relabel.ingestion import PredictionRecord, merge
from relabel.labelspace import LabelVocabulary


@pytest.fixture
def vocab4() -> LabelVocabulary:
    return LabelVocabulary.create("demo4", ["cat", "dog", "bird", "frog"])


def build_matrix(vocab, cells, images=None, dataset_id=""):
    """Build a PredictionMatrix from {image: {method: [labels] | (labels, scores)}}."""
    records = []
    for image_id, row in cells.items():
        for method_id, value in row.items():
            if isinstance(value, tuple) and len(value) == 2 and isinstance(value[1], dict):
                labels, scores = value
            else:
                labels, scores = value, None
            records.append(
                PredictionRecord(
                    image_id=image_id,
                    method_id=method_id,
                    labels=tuple(labels),
                    scores=scores,
                )
            )
    universe = list(images) if images is not None else list(cells)
    return merge(records, universe, vocab, dataset_id=dataset_id)
