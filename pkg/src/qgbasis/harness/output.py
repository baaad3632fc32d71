"""CSV emission at full precision and witness re-verification."""
import csv
import io
from pathlib import Path

import numpy as np

from .. import conditionality as cond


def format_number(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (complex, np.complexfloating)):
        if v.imag == 0:
            return f"{v.real:.17g}"
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return f"{float(v):.17g}"


def format_cell(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, np.ndarray):
        return " ".join(format_number(z) for z in v.ravel())
    if isinstance(v, (tuple, list)):
        return " ".join(format_cell(z) for z in v)
    return format_number(v)


def table_text(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([format_cell(c) for c in row])
    return buf.getvalue()


def summary_text(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k in sorted(result.summary):
        w.writerow([k, format_cell(result.summary[k])])
    for name in sorted(result.fits):
        f = result.fits[name]
        for key in ("model", "exponent", "constant", "r2"):
            w.writerow([f"fit[{name}].{key}", format_cell(getattr(f, key))])
    return buf.getvalue()


def write_csv(result, out_dir):
    """One file per table plus ``<experiment>_summary.csv``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in result.tables:
        path = out / f"{t.name}.csv"
        path.write_text(table_text(t), encoding="utf-8")
        paths.append(path)
    path = out / f"{result.experiment}_summary.csv"
    path.write_text(summary_text(result), encoding="utf-8")
    paths.append(path)
    return paths


def read_table(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def parse_vector(text):
    return np.array([complex(t) for t in text.split()])


def parse_set(text):
    return tuple(int(t) for t in text.split())


def witness_prefixes(header):
    """Column prefixes p such that p+"A", p+"x" and p+"ratio" all exist."""
    out = []
    for h in header:
        if h.endswith("A"):
            pre = h[:-1]
            if pre and not pre.endswith("_"):
                continue
            if pre + "x" in header and pre + "ratio" in header:
                out.append(pre)
    return out


def reverify_csv(path, resolve, table=None):
    """Recompute every stored witness ratio; returns the largest deviation.

    `resolve(table, record)` supplies the basis.  Ratio columns are
    ``ratio``/``A``/``x`` or ``<p>_ratio``/``<p>_A``/``<p>_x``.
    """
    path = Path(path)
    table = table or path.stem
    recs = read_table(path)
    if not recs:
        return 0.0
    worst = 0.0
    for pre in witness_prefixes(list(recs[0])):
        for rec in recs:
            basis = resolve(table, rec)
            A = parse_set(rec[pre + "A"])
            x = parse_vector(rec[pre + "x"])
            r = cond.witness_ratio(basis, A, x)
            worst = max(worst, abs(r - float(rec[pre + "ratio"])))
    return worst
