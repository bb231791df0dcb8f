"""CSV and manifest persistence shared by the command-line tool."""
from __future__ import annotations

import csv
import os
import re
from pathlib import Path

from .gapstats import GapTable

OUTPUT_ROOT_ENV = "PRIMESPEC_OUTPUT_ROOT"
CHECKPOINT_INDEX = "checkpoints.csv"
MANIFEST = "manifest.txt"

_POW = re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*$")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def parse_number(text: str) -> float:
    """Accept ``2^k``, ``1e9``, ``12345`` and plain decimals."""
    text = str(text).strip().replace("_", "")
    m = _POW.match(text)
    if m:
        return float(int(m.group(1)) ** int(m.group(2)))
    try:
        return float(int(text))
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"not a number: {text!r}") from None


def parse_int(text: str) -> int:
    text = str(text).strip().replace("_", "")
    m = _POW.match(text)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    try:
        return int(text)
    except ValueError:
        pass
    v = parse_number(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def parse_checkpoints(text: str) -> list:
    """``2^a..2^b`` (every power of two in between) or a comma list of numbers."""
    text = text.strip()
    if ".." in text:
        left, right = text.split("..", 1)
        ml, mr = _POW.match(left), _POW.match(right)
        if not (ml and mr) or ml.group(1) != "2" or mr.group(1) != "2":
            raise ValueError(f"range form is 2^a..2^b, got {text!r}")
        a, b = int(ml.group(2)), int(mr.group(2))
        if a > b:
            raise ValueError(f"empty checkpoint range {text!r}")
        return [2**k for k in range(a, b + 1)]
    cps = sorted({parse_int(t) for t in text.split(",") if t.strip()})
    if not cps:
        raise ValueError("no checkpoints given")
    return cps


def checkpoint_label(x: int) -> str:
    if x > 0 and x & (x - 1) == 0:
        return f"x{x.bit_length() - 1}"
    return f"x{x}"


def tau_filename(x: int) -> str:
    return f"tau_{checkpoint_label(x)}.csv"


def fmt(v) -> str:
    """Shortest round-trip text for a number."""
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    return repr(float(v))


def write_rows(path, header, rows) -> None:
    """Write a CSV through a temporary name so a crash never leaves a torn file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, str) else fmt(x) for x in r])
    os.replace(tmp, path)


def read_rows(path, header) -> list:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != list(header):
        raise DataError(f"{path}:1: expected header {','.join(header)}")
    out = []
    for lineno, r in enumerate(rows[1:], start=2):
        if not r:
            continue
        if len(r) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(r)}")
        out.append((lineno, r))
    return out


def write_gap_table(directory, table: GapTable) -> Path:
    path = Path(directory) / tau_filename(table.x)
    ds, taus = table.as_arrays()
    write_rows(path, ["d", "tau"], zip(ds.tolist(), taus.tolist()))
    return path


def write_checkpoint_index(directory, entries) -> Path:
    """entries: (GapTable, last_prime) pairs in increasing x."""
    path = Path(directory) / CHECKPOINT_INDEX
    write_rows(path, ["x", "pi_x", "max_gap", "max_gap_prime", "last_prime", "file"],
               [(t.x, t.pi_x, t.max_gap, t.max_gap_prime, lp, tau_filename(t.x)) for t, lp in entries])
    return path


def read_checkpoint_index(directory) -> list:
    """[(GapTable, last_prime)], each table re-read and its identity re-checked."""
    directory = Path(directory)
    index = directory / CHECKPOINT_INDEX
    out = []
    for lineno, r in read_rows(index, ["x", "pi_x", "max_gap", "max_gap_prime", "last_prime", "file"]):
        try:
            x, pi_x, g, gp, lp = (int(v) for v in r[:5])
        except ValueError:
            raise DataError(f"{index}:{lineno}: non-integer field") from None
        counts = {}
        tau_path = directory / r[5]
        for ln, (d, c) in read_rows(tau_path, ["d", "tau"]):
            try:
                counts[int(d)] = int(c)
            except ValueError:
                raise DataError(f"{tau_path}:{ln}: non-integer field") from None
        table = GapTable(x, counts, pi_x, g, gp)
        if not table.identity_holds():
            raise DataError(f"{tau_path}: sum of tau + 1 = {table.pair_count() + 1} but pi = {pi_x}")
        out.append((table, lp))
    return out


def write_manifest(directory, items: dict) -> Path:
    """Flat ``key=value`` lines in insertion order; written last as the completion marker."""
    path = Path(directory) / MANIFEST
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={v}\n")
    os.replace(tmp, path)
    return path


def read_manifest(directory) -> dict:
    out = {}
    with open(Path(directory) / MANIFEST) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                k, _, v = line.partition("=")
                out[k] = v
    return out
