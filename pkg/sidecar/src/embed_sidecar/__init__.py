"""Stateless HTTP sidecar serving sentence embeddings."""

__version__ = "0.1.0"

from importlib import resources


def probe_pairs() -> list[tuple[str, str, str]]:
    """Bundled (text, paraphrase, unrelated) probe triples."""
    text = resources.files("embed_sidecar").joinpath(
        "resources/probe_pairs.txt").read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        a, b, c = (part.strip() for part in line.split("|"))
        out.append((a, b, c))
    return out
