"""Byte-reproducible artifact IO: npz archives, CSV tables, file digests.

Every writer here produces identical bytes for identical content, so re-running
a command from its manifest can be checked with SHA-256 digests.
"""

import fnmatch
import hashlib
import io
import zipfile
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional

import numpy as np
import pandas as pd

from waitsurv.domain.errors import ArtifactError

# Fixed member timestamp; zipfile would otherwise stamp the current time.
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
_FLOAT_FORMAT = "%.17g"


def write_npz(path: Path, arrays: Mapping[str, np.ndarray]) -> None:
    """Write arrays like `np.savez`, but with deterministic archive metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as archive:
        for key, value in arrays.items():
            buffer = io.BytesIO()
            np.lib.format.write_array(buffer, np.asanyarray(value), allow_pickle=False)
            info = zipfile.ZipInfo(f"{key}.npy", date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            archive.writestr(info, buffer.getvalue())


def read_npz(path: Path) -> Dict[str, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise ArtifactError(f"File not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            return {key: archive[key] for key in archive.files}
    except (ValueError, OSError, zipfile.BadZipFile) as exc:
        raise ArtifactError(f"{path}: not a readable .npz archive: {exc}") from exc


def write_csv(path: Path, frame: pd.DataFrame) -> None:
    """CSV with a header row, no index, LF line endings and round-trip float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=_FLOAT_FORMAT, lineterminator="\n")


def write_rows(path: Path, rows: Iterable[Mapping[str, object]], columns: Optional[List[str]] = None) -> None:
    write_csv(path, pd.DataFrame(list(rows), columns=columns))


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def digest_tree(root: Path, exclude: Iterable[str] = ()) -> Dict[str, str]:
    """SHA-256 of every file under `root`, keyed by POSIX relative path.

    `exclude` holds glob patterns matched against the relative path and the file name.
    """
    root = Path(root)
    patterns = list(exclude)
    digests: Dict[str, str] = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        relative = path.relative_to(root).as_posix()
        if any(fnmatch.fnmatch(relative, p) or fnmatch.fnmatch(path.name, p) for p in patterns):
            continue
        digests[relative] = sha256_file(path)
    return digests


def append_rows(path: Path, rows: Iterable[Mapping[str, object]], columns: List[str]) -> None:
    """Append rows to a CSV, writing the header only when the file is new or empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = not path.exists() or path.stat().st_size == 0
    pd.DataFrame(list(rows), columns=columns).to_csv(
        path,
        mode="a",
        header=header,
        index=False,
        float_format=_FLOAT_FORMAT,
        lineterminator="\n",
    )
