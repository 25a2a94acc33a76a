import hashlib

import numpy as np
import pytest

from embed_sidecar.batch import embed_file, main
from embed_sidecar.encoder import HashTextEncoder, load_encoder


def test_n_line_input_gives_n_entry_file(tmp_path):
    src = tmp_path / "texts.txt"
    src.write_text("first text\nsecond text\nthird text\n", encoding="utf-8")
    out = tmp_path / "vectors.txt"
    assert embed_file(src, out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# model_id=hash:v1 dim=512")
    assert len(lines) == 4
    first = lines[1].split()
    assert first[0] == hashlib.sha256(b"first text").hexdigest()
    assert len(first) == 513


def test_rerun_byte_identical(tmp_path):
    src = tmp_path / "texts.txt"
    src.write_text("alpha\nbeta\n", encoding="utf-8")
    out = tmp_path / "vectors.txt"
    assert embed_file(src, out) == 0
    once = out.read_bytes()
    assert embed_file(src, out) == 0
    assert out.read_bytes() == once


def test_empty_line_rejected_with_line_number(tmp_path, capsys):
    src = tmp_path / "texts.txt"
    src.write_text("good\n\nalso good\n", encoding="utf-8")
    assert embed_file(src, tmp_path / "v.txt") == 1
    assert "line 2" in capsys.readouterr().err


def test_unreadable_input_nonzero_exit(tmp_path):
    assert main(["--input", str(tmp_path / "missing.txt"),
                 "--output", str(tmp_path / "v.txt")]) == 1


def test_vectors_are_unit_norm(tmp_path):
    src = tmp_path / "texts.txt"
    src.write_text("please subscribe\n", encoding="utf-8")
    out = tmp_path / "v.txt"
    embed_file(src, out)
    values = np.asarray([float(v) for v in
                         out.read_text().splitlines()[1].split()[1:]])
    assert np.linalg.norm(values) == pytest.approx(1.0, abs=1e-6)


def test_encoder_registry():
    enc = load_encoder("hash:v1")
    assert isinstance(enc, HashTextEncoder)
    assert enc.dim == 512
    with pytest.raises(Exception):
        load_encoder("definitely/not-a-model")


def test_hash_encoder_properties():
    enc = HashTextEncoder()
    vecs = enc.encode(["same", "same", "different words entirely"])
    np.testing.assert_array_equal(vecs[0], vecs[1])
    assert float(vecs[0] @ vecs[2]) < 0.9
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-9)
