"""Minimal embeddings endpoint backed by sentence-transformers.

    python scripts/embed_server.py --port 8090
    ENTANGLE_EMBED_URL=http://127.0.0.1:8090/embeddings cargo test -p entangle-cli --test acceptance
"""

import argparse
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from sentence_transformers import SentenceTransformer


def make_handler(model, name):
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("content-length", 0))
            try:
                body = json.loads(self.rfile.read(length))
                texts = body["input"]
                if isinstance(texts, str):
                    texts = [texts]
            except (ValueError, KeyError) as e:
                self.send_error(400, str(e))
                return
            vectors = model.encode(texts, convert_to_numpy=True)
            out = {
                "model": name,
                "data": [{"index": i, "embedding": v.tolist()} for i, v in enumerate(vectors)],
            }
            payload = json.dumps(out).encode()
            self.send_response(200)
            self.send_header("content-type", "application/json")
            self.send_header("content-length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    return Handler


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", default="sentence-transformers/all-MiniLM-L6-v2")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8090)
    args = ap.parse_args()
    model = SentenceTransformer(args.model)
    server = ThreadingHTTPServer((args.host, args.port), make_handler(model, args.model))
    print(f"serving {args.model} on http://{args.host}:{args.port}/embeddings")
    server.serve_forever()


if __name__ == "__main__":
    main()
