"""CSV schemas shared with the simulation CLI, and a validating loader.

Each schema lists the exact header of one output file. A file whose
header deviates is rejected with an error naming the offending column.
"""

import csv

import numpy as np


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


# column name -> parser; "str" columns stay as text
_F = float
_I = int
_S = str

SCHEMAS = {
    "trajectory": {"time": _F, "p_D": _F, "p_L": _F, "p_H": _F},
    "events": {"run": _I, "time": _F, "channel": _S, "detected": _I},
    "protocol": {"run": _I, "label": _S, "t1": _S, "t2": _S,
                 "clicks": _I, "fidelity": _S},
    "analytics": {"C": _F, "eta": _F, "f_av": _F, "p_suc": _F},
    # Monte-Carlo columns may be blank when no run succeeded
    "robustness": {"epsilon": _F, "f_av_closed": _F, "f_av_quadrature": _F,
                   "f_av_mc": _S, "mc_err": _S},
    "sweep": {"C": _F, "eta": _F, "f_av": _F, "p_suc": _F, "f_av_mc": _S,
              "f_av_mc_err": _S, "p_suc_mc": _S, "p_suc_mc_err": _S},
    "cluster_fuse": {"run": _I, "outcome": _S, "probability": _F,
                     "measurement": _S, "sizes": _S, "overlap": _S},
    "cluster_grow": {"run": _I, "attempts": _I, "qubits_consumed": _I,
                     "reached_target": _I, "largest_size": _I,
                     "redundant": _I},
}


def load_table(path, schema_name: str) -> dict:
    """Read a CSV into per-column arrays after validating its header.

    Numeric columns come back as numpy arrays; text columns as lists.
    Empty cells in numeric columns are not allowed except where the schema
    marks the column as text (herald times and fidelities may be blank).
    """
    schema = SCHEMAS[schema_name]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        for col in schema:
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        for col in header:
            if col not in schema:
                raise SchemaError(f"{path}: unexpected column {col!r}")
        rows = list(reader)

    idx = {col: header.index(col) for col in schema}
    table = {}
    for col, typ in schema.items():
        raw = [row[idx[col]] for row in rows]
        if typ is _S:
            table[col] = raw
        else:
            try:
                vals = [typ(x) for x in raw]
            except ValueError as exc:
                raise SchemaError(
                    f"{path}: column {col!r} has a non-numeric value "
                    f"({exc})") from exc
            table[col] = np.array(vals)
    return table


def numeric(values, default=np.nan) -> np.ndarray:
    """Text column to floats, mapping blanks to a default."""
    return np.array([float(v) if v != "" else default for v in values])
