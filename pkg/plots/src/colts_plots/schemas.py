"""CSV schemas for the experiment outputs this package consumes.

The column lists mirror the documented output schemas of the experiment
runner; this package reads only CSV files and shares no code with it.
"""

import csv

ROUNDS_COLUMNS = ["seed", "t", "cum_regret", "cum_risk", "flags"]
SWEEP_GAMMA_COLUMNS = ["gamma", "rate_local", "rate_global", "rate_unsat",
                       "mean", "std"]
SWEEP_M_COLUMNS = ["m", "regret_scolts", "regret_safelts", "regret_ratio",
                   "wall_scolts_ns", "wall_safelts_ns", "time_ratio"]
RESAMPLING_COLUMNS = ["samples", "regret_mean", "regret_std", "risk_mean",
                      "risk_std"]

SCHEMAS = {
    "traces": ROUNDS_COLUMNS,
    "rates_vs_gamma": SWEEP_GAMMA_COLUMNS,
    "ratios_vs_m": SWEEP_M_COLUMNS,
    "resampling_bars": RESAMPLING_COLUMNS,
}


class SchemaError(ValueError):
    """The input CSV does not match the documented schema."""


def read_rows(path, columns):
    """Read a CSV whose header must equal `columns` exactly.

    Returns a list of dicts with float values (the `flags` column, which may
    be blank, is kept as a string).  Raises SchemaError naming the first
    offending column on any mismatch, and on empty files.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path!r}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path!r} is empty: missing header row") from None
        if header != columns:
            for want in columns:
                if want not in header:
                    raise SchemaError(f"{path!r}: missing column {want!r}")
            for got in header:
                if got not in columns:
                    raise SchemaError(f"{path!r}: unexpected column {got!r}")
            raise SchemaError(f"{path!r}: columns out of order: {header}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != len(columns):
                raise SchemaError(f"{path!r} line {lineno}: expected "
                                  f"{len(columns)} fields, got {len(raw)}")
            row = {}
            for name, tok in zip(columns, raw):
                if name == "flags":
                    row[name] = tok
                else:
                    try:
                        row[name] = float(tok)
                    except ValueError:
                        raise SchemaError(
                            f"{path!r} line {lineno}: column {name!r} is not "
                            f"numeric: {tok!r}") from None
            rows.append(row)
        if not rows:
            raise SchemaError(f"{path!r} has a header but no data rows")
    return rows
