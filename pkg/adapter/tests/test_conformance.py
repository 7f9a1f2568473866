"""Adapter conformance against the pipeline's ingestion surface.

A 3-image, 2-batch plan executed against the bundled mock must produce
predictions JSONL the pipeline ingests with zero schema errors. The check
shells out to the pipeline's CLI so only its external interfaces are
touched.
"""

import json
import os
import subprocess
import sys

import pytest

from conftest import PRIMARY_SRC
from vlmadapter.cli import main as adapter_main


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "plan.json").write_text(
        json.dumps(
            {
                "dataset_id": "demo",
                "template_kind": "batched",
                "batch_size": 2,
                "seed": 1,
                "batches": [["cat", "dog"], ["bird"]],
            }
        )
    )
    (tmp_path / "images.txt").write_text("img1\nimg2\nimg3\n")
    (tmp_path / "canned.json").write_text(
        json.dumps(
            {
                "img1": {"0": '{"answer": ["cat"]}', "1": '{"answer": ["bird"]}'},
                "img2": {"0": "{'answer': ['dog', 'dog']}", "1": "None"},
                "img3": {"0": "None", "1": 'text then {"answer": ["bird"]} and more'},
            }
        )
    )
    (tmp_path / "origin.jsonl").write_text(
        "\n".join(
            json.dumps({"image_id": f"img{j}", "method": "origin", "labels": ["cat"]})
            for j in (1, 2, 3)
        )
        + "\n"
    )
    (tmp_path / "vocab.json").write_text(
        json.dumps({"dataset_id": "demo", "labels": ["cat", "dog", "bird"]})
    )
    (tmp_path / "config.json").write_text(
        json.dumps(
            {
                "dataset_id": "demo",
                "vocabulary": "vocab.json",
                "image_universe": "images.txt",
                "predictions": [
                    {"method": "mockvlm", "path": "preds.jsonl"},
                    {"method": "origin", "path": "origin.jsonl"},
                ],
                "calibration_size": 3,
                "vote_threshold": 1,
                "aggregation": {"threshold": 0.1, "top_k": 3},
                "output_dir": "out",
            }
        )
    )
    return tmp_path


def _run_pipeline_cli(args, cwd):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(PRIMARY_SRC) + os.pathsep + env.get("PYTHONPATH", "")
    return subprocess.run(
        [sys.executable, "-m", "relabel.cli", *args],
        cwd=cwd,
        env=env,
        capture_output=True,
        text=True,
    )


def test_three_image_two_batch_plan_passes_ingestion(workdir):
    rc = adapter_main(
        [
            "--plan", str(workdir / "plan.json"),
            "--images", str(workdir / "images.txt"),
            "--endpoint", f"mock:{workdir / 'canned.json'}",
            "--method", "mockvlm",
            "--out", str(workdir / "preds.jsonl"),
        ]
    )
    assert rc == 0
    lines = (workdir / "preds.jsonl").read_text().splitlines()
    assert len(lines) == 3
    for line in lines:
        record = json.loads(line)
        assert set(record) == {"image_id", "method", "labels", "raw"}

    result = _run_pipeline_cli(["ingest", "--config", "config.json"], cwd=workdir)
    assert result.returncode == 0, result.stderr
    assert "(0 malformed lines)" in result.stdout
    assert "3 images x 2 methods" in result.stdout


def test_full_run_consumes_adapter_output(workdir):
    adapter_main(
        [
            "--plan", str(workdir / "plan.json"),
            "--images", str(workdir / "images.txt"),
            "--endpoint", f"mock:{workdir / 'canned.json'}",
            "--method", "mockvlm",
            "--out", str(workdir / "preds.jsonl"),
        ]
    )
    result = _run_pipeline_cli(["run", "--config", "config.json"], cwd=workdir)
    assert result.returncode == 0, result.stderr
    soft = (workdir / "out" / "soft_labels.jsonl").read_text().splitlines()
    assert len(soft) == 3
