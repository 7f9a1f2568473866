"""Local review service: queue, item detail, verdicts, recompute, report.

Hosts the human-in-the-loop verification step over a small JSON wire API:

    GET  /queue              review queue (calibration gaps first, then
                             flagged images by ascending score margin)
    GET  /item/{image_id}    one image's candidates, likelihoods, diagnosis
    POST /verdict            append a verified label set to the verdict log
    POST /recompute          re-run expertise + aggregation with verdicts
    GET  /report             current renovation report
    GET  /images/{image_id}  image bytes from the configured static dir
    GET  /                   the bundled review UI, when built

Persistence is an append-only JSONL verdict log plus the immutable run
outputs; verdict writes are serialized through one lock while readers run
concurrently. Verdicts must stay inside the vocabulary; the explicit empty
set ("none of these labels apply") is legal and meaningful.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .aggregation import UNRESOLVED, weighted_support
from .runner import PipelineState, RunConfig, build_state, soft_label_to_dict, write_outputs

__all__ = ["ReviewService", "serve_review"]

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".gif", ".bmp", ".webp", "")
_FLAGGED = ("noisy_label", "missing_label", "noisy_and_missing", UNRESOLVED)


class ReviewService:
    """In-memory pipeline state plus the verdict log, shared by handlers."""

    def __init__(self, config: RunConfig, frontend_dir: Optional[Path] = None):
        if config.verdicts_path is None:
            raise ValueError("review needs a 'verdicts' path in the run config")
        self.config = config
        self.frontend_dir = frontend_dir
        self._write_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self.state: PipelineState = build_state(config)
        self._margins: dict[str, float] = {}
        self._refresh_margins()

    # -- state ---------------------------------------------------------

    def _refresh_margins(self) -> None:
        """Score margin between kept and dropped labels, per image.

        Small margins mean the ensemble barely decided; those images are
        where a human look pays off first.
        """
        state = self.state
        support = weighted_support(
            state.matrix, state.estimates, state.config.aggregation.methods
        )
        cutoff = state.report.cutoff
        margins: dict[str, float] = {}
        for soft in state.soft_labels:
            kept = {e.label for e in soft.entries}
            kept_min = min((e.score for e in soft.entries), default=cutoff)
            dropped = [
                s
                for lbl, s in support.scores[soft.image_id].items()
                if lbl not in kept
            ]
            dropped_max = max(dropped, default=cutoff)
            margins[soft.image_id] = kept_min - dropped_max
        self._margins = margins

    def recompute(self) -> dict:
        """Re-run expertise and aggregation with the verdict log applied."""
        with self._state_lock:
            self.state = build_state(self.config)
            self._refresh_margins()
            write_outputs(self.state)
            return {
                "expertise": _expertise_payload(self.state),
                "report": self.state.report.to_dict(),
            }

    # -- queue / items ---------------------------------------------------

    def verdict_images(self) -> set[str]:
        out = set(self.state.calibration.verified)
        path = self.config.verdicts_path
        if path is not None and path.is_file():
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                try:
                    out.add(json.loads(line)["image_id"])
                except (json.JSONDecodeError, KeyError, TypeError):
                    continue
        return out

    def queue(self) -> list[dict]:
        state = self.state
        done = self.verdict_images()
        items: list[dict] = []
        soft_by_id = {s.image_id: s for s in state.soft_labels}
        for image_id in state.calibration.image_ids:
            if image_id in done:
                continue
            items.append(
                {
                    "image_id": image_id,
                    "context": "calibration",
                    "diagnosis": soft_by_id[image_id].diagnosis,
                    "margin": self._margins.get(image_id, 0.0),
                }
            )
        calibration = set(state.calibration.image_ids)
        flagged = [
            s
            for s in state.soft_labels
            if s.diagnosis in _FLAGGED
            and s.image_id not in done
            and s.image_id not in calibration
        ]
        flagged.sort(key=lambda s: (self._margins.get(s.image_id, 0.0), s.image_id))
        for soft in flagged:
            items.append(
                {
                    "image_id": soft.image_id,
                    "context": "flagged",
                    "diagnosis": soft.diagnosis,
                    "margin": self._margins.get(soft.image_id, 0.0),
                }
            )
        return items

    def item(self, image_id: str) -> Optional[dict]:
        for soft in self.state.soft_labels:
            if soft.image_id == image_id:
                payload = soft_label_to_dict(soft)
                payload["image_url"] = f"/images/{image_id}"
                payload["context"] = (
                    "calibration"
                    if image_id in set(self.state.calibration.image_ids)
                    else "flagged"
                )
                payload["vocabulary"] = list(self.state.vocab.labels)
                payload["margin"] = self._margins.get(image_id, 0.0)
                return payload
        return None

    # -- verdicts ---------------------------------------------------------

    def submit_verdict(self, body: dict) -> dict:
        image_id = body.get("image_id")
        labels = body.get("labels")
        reviewer = body.get("reviewer", "anonymous")
        if not isinstance(image_id, str) or image_id not in self.state.matrix.cells:
            raise ValueError(f"unknown image_id {image_id!r}")
        if not isinstance(labels, list) or not all(isinstance(l, str) for l in labels):
            raise ValueError("labels must be an array of strings")
        bad = [l for l in labels if l not in self.state.vocab]
        if bad:
            raise ValueError(
                f"labels not in vocabulary: {bad}; verdicts may only use served labels"
            )
        record = {
            "image_id": image_id,
            "labels": self.state.vocab.sort_labels(set(labels)),
            "reviewer": str(reviewer),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "context": (
                "calibration"
                if image_id in set(self.state.calibration.image_ids)
                else "flagged"
            ),
        }
        path = self.config.verdicts_path
        with self._write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return record

    # -- images ---------------------------------------------------------

    def image_path(self, image_id: str) -> Optional[Path]:
        if self.config.images_dir is None or "/" in image_id or "\\" in image_id:
            return None
        for suffix in _IMAGE_SUFFIXES:
            candidate = self.config.images_dir / f"{image_id}{suffix}"
            if candidate.is_file():
                return candidate
        return None


def _expertise_payload(state: PipelineState) -> list[dict]:
    return [
        {
            "method": e.method_id,
            "est_acc": e.est_acc,
            "coverage": e.coverage_term,
            "penalty": e.penalty_term,
        }
        for e in state.estimates
    ]


def _make_handler(service: ReviewService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send_json(self, obj, status: int = 200) -> None:
            data = json.dumps(obj, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _send_bytes(self, data: bytes, content_type: str) -> None:
            self.send_response(200)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/queue":
                self._send_json({"items": service.queue()})
            elif path.startswith("/item/"):
                item = service.item(path[len("/item/") :])
                if item is None:
                    self._send_json({"error": "unknown image"}, 404)
                else:
                    self._send_json(item)
            elif path == "/report":
                self._send_json(service.state.report.to_dict())
            elif path == "/expertise":
                self._send_json({"expertise": _expertise_payload(service.state)})
            elif path.startswith("/images/"):
                img = service.image_path(path[len("/images/") :])
                if img is None:
                    self._send_json({"error": "image not found"}, 404)
                else:
                    self._send_bytes(img.read_bytes(), "application/octet-stream")
            elif path == "/" or path.startswith("/assets/"):
                self._serve_static(path)
            else:
                self._send_json({"error": f"no such endpoint {path}"}, 404)

        def _serve_static(self, path: str) -> None:
            root = service.frontend_dir
            if root is None:
                self._send_bytes(
                    b"<html><body><h1>Review service</h1>"
                    b"<p>No UI bundle configured; the JSON API is live.</p>"
                    b"</body></html>",
                    "text/html; charset=utf-8",
                )
                return
            rel = "index.html" if path == "/" else path.lstrip("/")
            target = (root / rel).resolve()
            if not str(target).startswith(str(root.resolve())) or not target.is_file():
                self._send_json({"error": "not found"}, 404)
                return
            kinds = {
                ".html": "text/html; charset=utf-8",
                ".js": "text/javascript; charset=utf-8",
                ".css": "text/css; charset=utf-8",
                ".map": "application/json",
            }
            self._send_bytes(
                target.read_bytes(), kinds.get(target.suffix, "application/octet-stream")
            )

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            obj = json.loads(raw.decode("utf-8")) if raw else {}
            if not isinstance(obj, dict):
                raise ValueError("request body must be a JSON object")
            return obj

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            try:
                # always drain the request body; unread bytes would corrupt
                # the next request on a kept-alive connection
                body = self._read_body()
            except (ValueError, json.JSONDecodeError) as exc:
                self._send_json({"error": f"malformed request body: {exc}"}, 400)
                return
            if path == "/verdict":
                try:
                    record = service.submit_verdict(body)
                except ValueError as exc:
                    self._send_json({"error": str(exc)}, 400)
                    return
                self._send_json({"ok": True, "verdict": record})
            elif path == "/recompute":
                self._send_json(service.recompute())
            else:
                self._send_json({"error": f"no such endpoint {path}"}, 404)

    return Handler


def serve_review(
    config: RunConfig,
    port: int,
    frontend_dir: Optional[Path] = None,
    host: str = "127.0.0.1",
) -> ThreadingHTTPServer:
    """Create the review server (callers decide whether to block on it)."""
    service = ReviewService(config, frontend_dir=frontend_dir)
    server = ThreadingHTTPServer((host, port), _make_handler(service))
    server.service = service  # handy for tests
    return server
