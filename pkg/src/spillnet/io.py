"""CSV ingestion and emission, plus the JSON population-spec schema.

The dataset schema is long form, one row per focal unit, with a
mandatory header: ``id, y, d, d1, r, n_i`` required, ``a1`` optional,
and optional wide peer columns ``d_peer_1..K`` / ``a_peer_1..K`` whose
entries beyond ``n_i`` stay blank.  Files are UTF-8 with ``.`` as the
decimal point.  Validation is strict: a malformed cell is an error, not
a warning.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .data import NetworkDataset
from .errors import DataError
from .oracle import (
    NetworkPopulationSpec,
    NetworkUnitAtom,
    NetworkUnitSpec,
    PairPopulationSpec,
    PairUnitType,
)

__all__ = [
    "read_network_csv",
    "write_network_csv",
    "write_fit_csv",
    "load_population_spec",
    "population_spec_to_dict",
]

_REQUIRED = ("id", "y", "d", "d1", "r", "n_i")


def _peer_columns(fieldnames, prefix):
    pattern = re.compile(rf"^{prefix}_(\d+)$")
    found = {}
    for name in fieldnames:
        m = pattern.match(name)
        if m:
            found[int(m.group(1))] = name
    if not found:
        return []
    k = max(found)
    if sorted(found) != list(range(1, k + 1)):
        raise DataError(f"{prefix} columns must be contiguous from {prefix}_1")
    return [found[i] for i in range(1, k + 1)]


def _parse_int(row, col, row_no):
    raw = (row.get(col) or "").strip()
    if not raw:
        raise DataError(f"row {row_no}: column {col!r} is blank")
    try:
        return int(raw)
    except ValueError as exc:
        raise DataError(f"row {row_no}: column {col!r} is not an integer: {raw!r}") from exc


def _parse_float(row, col, row_no):
    raw = (row.get(col) or "").strip()
    if not raw:
        raise DataError(f"row {row_no}: column {col!r} is blank")
    try:
        return float(raw)
    except ValueError as exc:
        raise DataError(f"row {row_no}: column {col!r} is not a number: {raw!r}") from exc


def read_network_csv(path) -> NetworkDataset:
    """Read the long-form dataset schema into a validated dataset."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: missing header row")
        missing = [c for c in _REQUIRED if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{path}: missing required columns {missing}")
        has_a1 = "a1" in reader.fieldnames
        d_cols = _peer_columns(reader.fieldnames, "d_peer")
        a_cols = _peer_columns(reader.fieldnames, "a_peer")
        if a_cols and len(a_cols) != len(d_cols):
            raise DataError(f"{path}: d_peer_* and a_peer_* column counts differ")

        y, d, d1, r, n_peers, a1 = [], [], [], [], [], []
        d_rows, a_rows = [], []
        for row_no, row in enumerate(reader, start=2):
            y.append(_parse_float(row, "y", row_no))
            d.append(_parse_int(row, "d", row_no))
            d1.append(_parse_int(row, "d1", row_no))
            r.append(_parse_int(row, "r", row_no))
            k = _parse_int(row, "n_i", row_no)
            n_peers.append(k)
            if has_a1:
                a1.append(_parse_int(row, "a1", row_no))
            for cols, rows in ((d_cols, d_rows), (a_cols, a_rows)):
                if not cols:
                    continue
                if k > len(cols):
                    raise DataError(f"row {row_no}: n_i={k} exceeds peer columns")
                vals = []
                for j, col in enumerate(cols, start=1):
                    raw = (row.get(col) or "").strip()
                    if j <= k:
                        if not raw:
                            raise DataError(f"row {row_no}: {col} blank inside peer group")
                        vals.append(int(raw))
                    else:
                        if raw:
                            raise DataError(f"row {row_no}: {col} set beyond n_i={k}")
                        vals.append(0)
                rows.append(vals)

    return NetworkDataset(
        y=np.array(y),
        d=np.array(d),
        d1=np.array(d1),
        r=np.array(r),
        n_peers=np.array(n_peers),
        a1=np.array(a1) if has_a1 else None,
        d_peers=np.array(d_rows) if d_rows else None,
        a_peers=np.array(a_rows) if a_rows else None,
    )


def write_network_csv(dataset: NetworkDataset, path) -> None:
    """Emit a dataset in the ingestion schema (round-trips exactly)."""
    path = Path(path)
    kmax = dataset.d_peers.shape[1] if dataset.d_peers is not None else 0
    header = list(_REQUIRED)
    if dataset.a1 is not None:
        header.append("a1")
    header += [f"d_peer_{j}" for j in range(1, kmax + 1)]
    if dataset.a_peers is not None:
        header += [f"a_peer_{j}" for j in range(1, kmax + 1)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.n):
            k = int(dataset.n_peers[i])
            row = [
                i,
                repr(float(dataset.y[i])),
                int(dataset.d[i]),
                int(dataset.d1[i]),
                int(dataset.r[i]),
                k,
            ]
            if dataset.a1 is not None:
                row.append(int(dataset.a1[i]))
            if kmax:
                row += [
                    int(dataset.d_peers[i, j]) if j < k else ""
                    for j in range(kmax)
                ]
            if dataset.a_peers is not None:
                row += [
                    int(dataset.a_peers[i, j]) if j < k else ""
                    for j in range(kmax)
                ]
            writer.writerow(row)


def write_fit_csv(fit, path) -> None:
    """Coefficient table: term, coef, se_classical, se_robust, t."""
    path = Path(path)
    terms = ("const", "d", "m")
    coefs = fit.coefficients
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "coef", "se_classical", "se_robust", "t"])
        for i, term in enumerate(terms):
            writer.writerow(
                [
                    term,
                    repr(coefs[i]),
                    repr(fit.se_classical[i]),
                    repr(fit.se_robust[i]),
                    repr(fit.t_values[i]),
                ]
            )


def load_population_spec(path):
    """Load a JSON population spec; the ``model`` key selects the shape."""
    with Path(path).open(encoding="utf-8") as fh:
        payload = json.load(fh)
    model = payload.get("model")
    if model == "pair":
        types = tuple(
            PairUnitType(
                weight=float(t["weight"]),
                y=np.asarray(t["y"], dtype=np.float64),
                p_link=float(t["p_link"]),
            )
            for t in payload["types"]
        )
        return PairPopulationSpec(
            types=types,
            p_treat_own=float(payload["p_treat_own"]),
            p_treat_partner=float(payload["p_treat_partner"]),
        )
    if model == "network":
        units = tuple(
            NetworkUnitSpec(
                n_peers=int(u["n_peers"]),
                atoms=tuple(
                    NetworkUnitAtom(
                        weight=float(a["weight"]),
                        y=np.asarray(a["y"], dtype=np.float64),
                        a_vec=tuple(int(v) for v in a["a"]),
                    )
                    for a in u["atoms"]
                ),
            )
            for u in payload["units"]
        )
        return NetworkPopulationSpec(
            units=units,
            p_treat_own=float(payload["p_treat_own"]),
            p_treat_partner=float(payload["p_treat_partner"]),
        )
    raise DataError(f"spec file must set model to 'pair' or 'network', got {model!r}")


def population_spec_to_dict(spec) -> dict:
    """Inverse of :func:`load_population_spec` for round-tripping."""
    if isinstance(spec, PairPopulationSpec):
        return {
            "model": "pair",
            "p_treat_own": spec.p_treat_own,
            "p_treat_partner": spec.p_treat_partner,
            "types": [
                {"weight": t.weight, "p_link": t.p_link, "y": t.y.tolist()}
                for t in spec.types
            ],
        }
    if isinstance(spec, NetworkPopulationSpec):
        return {
            "model": "network",
            "p_treat_own": spec.p_treat_own,
            "p_treat_partner": spec.p_treat_partner,
            "units": [
                {
                    "n_peers": u.n_peers,
                    "atoms": [
                        {"weight": a.weight, "a": list(a.a_vec), "y": a.y.tolist()}
                        for a in u.atoms
                    ],
                }
                for u in spec.units
            ],
        }
    raise DataError(f"not a population spec: {type(spec).__name__}")
