"""Render the standard figure families from linksched CSV outputs.

Five figure kinds, one image per invocation:

  outage_vs_gamma   summary CSV -> mean outage vs neighborhood radius
  outage_vs_alpha   summary CSV -> mean outage vs attenuation exponent
  outage_vs_sinr    summary CSV -> mean outage vs SINR threshold
  lyapunov          clt CSV     -> normality ratio vs frontier count
  convergence       results CSV -> histogram of rounds to convergence

Inputs are read-only; no statistics are computed here beyond histogram
binning - the harness owns all numbers.  Error bars come from the
``outage_stderr`` column when the input carries one.  Output images are
byte-deterministic for a fixed input (fixed style, no timestamps).

Exit codes: 0 ok, 1 argument error, 2 schema mismatch or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("outage_vs_gamma", "outage_vs_alpha", "outage_vs_sinr",
         "lyapunov", "convergence")

_X_COLUMN = {
    "outage_vs_gamma": ("gamma_f", "neighborhood radius gamma_f (m)"),
    "outage_vs_alpha": ("alpha", "attenuation exponent alpha"),
    "outage_vs_sinr": ("sinr_th", "SINR threshold"),
}

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.6,
    "lines.markersize": 5.0,
}

_SERIES_STYLE = ["o-", "s--", "d-.", "^:", "v-"]


class SchemaError(Exception):
    pass


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv_path: str
    out_path: str
    modes: tuple = ()  # empty tuple = keep every mode

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")


def _read_rows(path, required):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            columns = reader.fieldnames or []
            missing = [c for c in required if c not in columns]
            if missing:
                raise SchemaError(
                    f"{path}: missing column(s) {', '.join(missing)}; found {columns}")
            return list(reader), columns
    except OSError as exc:
        raise SchemaError(str(exc)) from exc


def _series_by_mode(rows, modes):
    present = []
    for row in rows:
        if row["mode"] not in present:
            present.append(row["mode"])
    keep = [m for m in (modes or present) if m in present]
    if not keep:
        raise SchemaError(
            f"no series left after filtering: wanted {list(modes)}, CSV has {present}")
    return keep


def _render_outage(spec, ax):
    x_col, x_label = _X_COLUMN[spec.kind]
    rows, columns = _read_rows(spec.csv_path, ["mode", x_col, "outage_mean"])
    has_err = "outage_stderr" in columns
    modes = _series_by_mode(rows, spec.modes)
    rows = [r for r in rows if r["mode"] in modes]
    # one series per mode, split further by any other grid column that
    # still varies (e.g. several gamma_f planes in one summary CSV)
    split_cols = [c for c in ("gamma_f", "alpha", "sinr_th")
                  if c != x_col and c in columns
                  and len({r[c] for r in rows}) > 1]

    def series_key(row):
        label = row["mode"]
        extra = ", ".join(f"{c}={row[c]}" for c in split_cols)
        return label + (f" ({extra})" if extra else "")

    labels = []
    for row in rows:
        key = series_key(row)
        if key not in labels:
            labels.append(key)
    for i, label in enumerate(labels):
        pts = sorted(
            (float(r[x_col]), float(r["outage_mean"]),
             float(r["outage_stderr"]) if has_err else 0.0)
            for r in rows if series_key(r) == label
        )
        xs = [p[0] for p in pts]
        if len(set(xs)) != len(xs):
            raise SchemaError(
                f"{spec.csv_path}: several rows per {x_col} for series "
                f"{label!r}; pass an aggregate (summary) CSV")
        ys = [p[1] for p in pts]
        style = _SERIES_STYLE[i % len(_SERIES_STYLE)]
        if has_err:
            ax.errorbar(xs, ys, yerr=[p[2] for p in pts], fmt=style,
                        capsize=3, label=label)
        else:
            ax.plot(xs, ys, style, label=label)
    ax.set_xlabel(x_label)
    ax.set_ylabel("link outage probability")
    ax.set_ylim(bottom=0)
    ax.legend()


def _render_lyapunov(spec, ax):
    rows, _ = _read_rows(spec.csv_path, ["k", "lyapunov_ratio_at_k"])
    pts = sorted((int(r["k"]), float(r["lyapunov_ratio_at_k"])) for r in rows)
    ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-",
            label="normality ratio")
    ax.set_xlabel("frontier count K")
    ax.set_ylabel("third-moment ratio")
    ax.legend()


def _render_convergence(spec, ax):
    rows, _ = _read_rows(spec.csv_path, ["mode", "iterations"])
    modes = _series_by_mode(rows, spec.modes)
    data = [[int(r["iterations"]) for r in rows if r["mode"] == m] for m in modes]
    top = max(max(d) for d in data)
    bins = range(1, top + 2)
    ax.hist(data, bins=bins, label=modes)
    ax.set_xlabel("rounds to convergence")
    ax.set_ylabel("replications")
    ax.legend()


def render(spec):
    """Render one figure; returns the output path."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        try:
            if spec.kind in _X_COLUMN:
                _render_outage(spec, ax)
            elif spec.kind == "lyapunov":
                _render_lyapunov(spec, ax)
            else:
                _render_convergence(spec, ax)
            fig.savefig(spec.out_path, metadata={"Software": None})
        finally:
            plt.close(fig)
    return spec.out_path


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="render", description="Render linksched figures from CSVs")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--csv", required=True, help="input CSV path")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--modes", default="",
                        help="comma-separated series filter (default: all modes)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    modes = tuple(m for m in args.modes.split(",") if m.strip())
    try:
        spec = FigureSpec(kind=args.kind, csv_path=args.csv,
                          out_path=args.out, modes=modes)
        render(spec)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
