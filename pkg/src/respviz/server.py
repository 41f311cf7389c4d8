"""Local HTTP service exposing the ranking pipeline to the gallery UI.

Endpoints:
  GET  /api/health  -> {"status": "ok", "version": ...}
  GET  /api/kernel  -> current perceptual kernel
  POST /api/rank    -> gallery bundle for {spec, dataText|dataUrl,
                       weights?, targetWidth?, seed?}

Stateless between requests except a content-hash keyed cache of parsed
datasets. Static gallery files are served from an optional directory.
Responses for identical requests are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import (
    EmptyDataError,
    RespvizError,
    SchemaError,
    ScaleError,
    SpecSyntaxError,
    UnsupportedSpecError,
)
from .measures import PerceptualKernel, default_kernel
from .model import parse_spec
from .pipeline import RunConfig, dumps_stable, guard_dataset_size, load_dataset_for_spec, rank_bundle

_GUESS_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
}


class RankService:
    """Request-independent state: kernel, dataset cache, static root."""

    def __init__(self, kernel: Optional[PerceptualKernel] = None,
                 static_dir: Optional[str] = None, data_root: str = "."):
        self.kernel = kernel or default_kernel()
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        self.data_root = Path(data_root).resolve()
        self._cache: dict[str, object] = {}
        self._lock = threading.Lock()

    def kernel_jsonable(self) -> dict:
        return {
            "shapeIds": list(self.kernel.shape_ids),
            "matrix": [list(row) for row in self.kernel.matrix],
        }

    def _dataset(self, spec, data_text: str, name: str):
        key = hashlib.sha256(
            (data_text + "\x00" + dumps_stable([[f.name, f.kind] for f in spec.data.fields])).encode()
        ).hexdigest()
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        data = load_dataset_for_spec(spec, data_text, name)
        with self._lock:
            self._cache[key] = data
        return data

    def rank(self, body: dict) -> dict:
        if not isinstance(body, dict):
            raise SchemaError("request body must be a JSON object")
        if "spec" not in body:
            raise SchemaError("request: missing key 'spec'")
        spec_obj = body["spec"]
        spec_text = spec_obj if isinstance(spec_obj, str) else json.dumps(spec_obj)
        spec = parse_spec(spec_text)
        if "dataText" in body:
            data_text = body["dataText"]
            name = "inline"
        elif "dataUrl" in body:
            path = (self.data_root / body["dataUrl"]).resolve()
            if not str(path).startswith(str(self.data_root)):
                raise SchemaError("dataUrl escapes the data root")
            data_text = path.read_text(encoding="utf-8")
            name = path.stem
        else:
            raise SchemaError("request: provide 'dataText' or 'dataUrl'")
        data = self._dataset(spec, data_text, name)
        data = guard_dataset_size(data, subsample=body.get("subsample"), seed=int(body.get("seed", 0)))
        weights = body.get("weights", [1.0, 1.0, 1.0])
        if not isinstance(weights, list) or len(weights) != 3 or any(float(w) < 0 for w in weights):
            raise SchemaError("weights must be three non-negative numbers")
        config = RunConfig(
            target_width=int(body.get("targetWidth", 300)),
            weights=tuple(float(w) for w in weights),
            seed=int(body.get("seed", 0)),
        )
        return rank_bundle(spec, data, config, kernel=self.kernel)


def _make_handler(service: RankService):
    class Handler(BaseHTTPRequestHandler):
        server_version = f"respviz/{__version__}"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send_json(self, status: int, payload: dict):
            body = dumps_stable(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_static(self, rel: str):
            if service.static_dir is None:
                self._send_json(404, {"error": "NotFound", "message": "no static directory configured"})
                return
            rel = rel.lstrip("/") or "index.html"
            path = (service.static_dir / rel).resolve()
            if not str(path).startswith(str(service.static_dir)) or not path.is_file():
                self._send_json(404, {"error": "NotFound", "message": rel})
                return
            body = path.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", _GUESS_TYPES.get(path.suffix, "application/octet-stream"))
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/api/health":
                self._send_json(200, {"status": "ok", "version": __version__})
            elif self.path == "/api/kernel":
                self._send_json(200, service.kernel_jsonable())
            elif self.path.startswith("/api/"):
                self._send_json(404, {"error": "NotFound", "message": self.path})
            else:
                self._send_static(self.path)

        def do_POST(self):
            if self.path != "/api/rank":
                self._send_json(404, {"error": "NotFound", "message": self.path})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length).decode("utf-8")
                body = json.loads(raw) if raw else {}
            except (ValueError, UnicodeDecodeError) as exc:
                self._send_json(400, {"error": "SpecSyntaxError", "message": str(exc)})
                return
            try:
                bundle = service.rank(body)
            except (SpecSyntaxError, SchemaError) as exc:
                self._send_json(400, {"error": type(exc).__name__, "message": str(exc)})
            except (EmptyDataError, UnsupportedSpecError, ScaleError) as exc:
                self._send_json(422, {"error": type(exc).__name__, "message": str(exc)})
            except FileNotFoundError as exc:
                self._send_json(400, {"error": "SchemaError", "message": f"file not found: {exc.filename}"})
            except RespvizError as exc:
                self._send_json(422, {"error": type(exc).__name__, "message": str(exc)})
            else:
                self._send_json(200, bundle)

    return Handler


def make_server(port: int = 0, kernel: Optional[PerceptualKernel] = None,
                static_dir: Optional[str] = None, data_root: str = ".") -> ThreadingHTTPServer:
    service = RankService(kernel=kernel, static_dir=static_dir, data_root=data_root)
    return ThreadingHTTPServer(("127.0.0.1", port), _make_handler(service))


def serve(port: int, kernel: Optional[PerceptualKernel] = None,
          static_dir: Optional[str] = None, data_root: str = "."):
    server = make_server(port=port, kernel=kernel, static_dir=static_dir, data_root=data_root)
    host, actual_port = server.server_address
    print(f"respviz serving on http://{host}:{actual_port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
