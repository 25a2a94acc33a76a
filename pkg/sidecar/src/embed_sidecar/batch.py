"""Batch mode: materialize a vectors file for the file-backed provider.

Reads one text per line, writes ``<sha256-of-text> v1 .. vd`` lines under
a ``# model_id=... dim=...`` header. Output is deterministic, so reruns
are byte-identical; empty input lines are rejected with their line
number.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from .encoder import DEFAULT_MODEL_ID, load_encoder


def embed_file(input_path, output_path, model_id: str = DEFAULT_MODEL_ID) -> int:
    input_path = Path(input_path)
    if not input_path.is_file():
        print(f"error: cannot read {input_path}", file=sys.stderr)
        return 1
    texts = []
    for line_no, line in enumerate(
            input_path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            print(f"error: empty text at line {line_no}", file=sys.stderr)
            return 1
        texts.append(line)
    encoder = load_encoder(model_id)
    vectors = encoder.encode(texts)
    lines = [f"# model_id={encoder.model_id} dim={encoder.dim}"]
    for text, vector in zip(texts, vectors):
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        lines.append(digest + " " + " ".join(f"{v:.8f}" for v in vector))
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = output_path.with_name(output_path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(output_path)
    print(f"wrote {len(texts)} vectors to {output_path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="embed a text file")
    parser.add_argument("--input", required=True, help="one text per line")
    parser.add_argument("--output", required=True)
    parser.add_argument("--model-id", default=DEFAULT_MODEL_ID)
    args = parser.parse_args(argv)
    return embed_file(args.input, args.output, args.model_id)


if __name__ == "__main__":
    raise SystemExit(main())
