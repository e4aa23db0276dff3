#!/usr/bin/env python3
"""Minimal /embed service backed by sentence-transformers.

Used once to export reference vectors:

    pip install sentence-transformers
    python3 tools/embed_server.py --port 8000 &
    defsim embed --endpoint http://127.0.0.1:8000 --corpus data/individual-60.jsonl ... \
        --run-dir /tmp/mpnet
    cp /tmp/mpnet/embeddings.json data/mpnet-all.json
"""
import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from sentence_transformers import SentenceTransformer


def make_handler(models):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path.rstrip("/") != "/embed":
                self.send_error(404)
                return
            body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            name = body.get("model_id") or "all-mpnet-base-v2"
            if name not in models:
                models[name] = SentenceTransformer(name)
            vectors = models[name].encode(body["texts"], convert_to_numpy=True)
            reply = json.dumps({"dim": int(vectors.shape[1]),
                                "embeddings": vectors.astype(float).tolist()}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(reply)))
            self.end_headers()
            self.wfile.write(reply)

    return Handler


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    ThreadingHTTPServer((args.host, args.port), make_handler({})).serve_forever()


if __name__ == "__main__":
    main()
