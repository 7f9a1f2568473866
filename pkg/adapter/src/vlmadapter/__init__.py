"""Prompt-plan executor for multimodal model endpoints.

Reads a plan JSON (dataset_id, template_kind, batch_size, seed, batches),
sends one rendered prompt per image and batch to an endpoint (or to the
bundled offline mock), leniently extracts the answer list from each
response, and emits predictions JSONL in the renovation pipeline's
ingestion format. Consumes the pipeline only through those two file
formats.
"""

__version__ = "0.1.0"
