import time

import numpy as np
import pandas as pd
import pytest

from waitsurv.domain.errors import ArtifactError
from waitsurv.infrastructure.artifacts import (
    append_rows,
    digest_tree,
    read_npz,
    sha256_file,
    write_csv,
    write_npz,
)


def test_npz_bytes_do_not_depend_on_write_time(tmp_path):
    arrays = {"w": np.arange(6, dtype=np.float64).reshape(2, 3), "b": np.zeros(2)}
    first, second = tmp_path / "a.npz", tmp_path / "b.npz"

    write_npz(first, arrays)
    time.sleep(2.1)
    write_npz(second, arrays)

    assert first.read_bytes() == second.read_bytes()
    loaded = read_npz(first)
    assert set(loaded) == {"w", "b"}
    np.testing.assert_array_equal(loaded["w"], arrays["w"])


def test_read_npz_errors(tmp_path):
    with pytest.raises(ArtifactError, match="not found"):
        read_npz(tmp_path / "missing.npz")

    garbage = tmp_path / "garbage.npz"
    garbage.write_text("not a zip")
    with pytest.raises(ArtifactError, match="readable"):
        read_npz(garbage)


def test_csv_keeps_full_precision(tmp_path):
    path = tmp_path / "values.csv"
    write_csv(path, pd.DataFrame({"x": [0.1 + 0.2]}))

    assert path.read_bytes() == b"x\n0.30000000000000004\n"


def test_append_rows_writes_header_once(tmp_path):
    path = tmp_path / "log.csv"
    append_rows(path, [{"a": 1, "b": 2}], ["a", "b"])
    append_rows(path, [{"a": 3, "b": 4}], ["a", "b"])

    assert path.read_text().splitlines() == ["a,b", "1,2", "3,4"]


def test_digest_tree_honours_excludes(tmp_path):
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "keep.csv").write_text("x\n")
    (tmp_path / "waitsurv.log").write_text("noise")
    (tmp_path / "manifest.yaml").write_text("noise")

    digests = digest_tree(tmp_path, exclude=["waitsurv*.log", "manifest.yaml"])

    assert list(digests) == ["sub/keep.csv"]
    assert digests["sub/keep.csv"] == sha256_file(tmp_path / "sub" / "keep.csv")
