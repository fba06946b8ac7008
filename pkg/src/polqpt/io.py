"""Reading and writing process matrices and tabular results."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

BASIS_NAME = "I,t1,t2,t3"


class MalformedDataError(ValueError):
    """A file does not contain a readable process matrix."""


def chi_to_dict(chi) -> dict:
    chi = np.asarray(chi, dtype=complex)
    return {"basis": BASIS_NAME, "re": chi.real.tolist(), "im": chi.imag.tolist()}


def chi_from_dict(obj) -> np.ndarray:
    if isinstance(obj, dict) and "chi" in obj and "re" not in obj:
        obj = obj["chi"]
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as err:
        raise MalformedDataError(f"no chi matrix found: {err}") from None
    if re.shape != (4, 4) or im.shape != (4, 4):
        raise MalformedDataError(f"chi must be 4x4, got {re.shape} / {im.shape}")
    if obj.get("basis", BASIS_NAME) != BASIS_NAME:
        raise MalformedDataError(f"unsupported operator basis {obj.get('basis')!r}")
    return re + 1j * im


def chi_to_csv(chi) -> str:
    chi = np.asarray(chi, dtype=complex)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "re", "im"])
    for i in range(4):
        for j in range(4):
            writer.writerow([i, j, repr(float(chi[i, j].real)), repr(float(chi[i, j].imag))])
    return buf.getvalue()


def chi_from_csv(text: str) -> np.ndarray:
    rows = list(csv.DictReader(io.StringIO(text)))
    chi = np.full((4, 4), np.nan, dtype=complex)
    try:
        for row in rows:
            chi[int(row["i"]), int(row["j"])] = float(row["re"]) + 1j * float(row["im"])
    except (KeyError, TypeError, ValueError, IndexError) as err:
        raise MalformedDataError(f"bad chi CSV row: {err}") from None
    if len(rows) != 16 or np.isnan(chi.real).any():
        raise MalformedDataError("chi CSV must list all 16 entries")
    return chi


def read_chi(path) -> np.ndarray:
    """Load a chi matrix from a JSON or CSV file written by this package."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return chi_from_dict(json.loads(text))
        except json.JSONDecodeError as err:
            raise MalformedDataError(f"invalid JSON: {err}") from None
    return chi_from_csv(text)


def dumps_json(obj) -> str:
    # repr-based float output round-trips exactly, which keeps reruns byte-identical.
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()
