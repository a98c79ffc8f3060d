"""Atomic CSV/JSON output of experiment results."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

RESULTS_COLUMNS = ("policy", "replication", "step", "oc", "oc_ratio", "recommended_arm")
SUMMARY_COLUMNS = ("policy", "mean_oc", "sd_oc", "p_optimal", "p_win")
TRAJECTORY_COLUMNS = ("policy", "step", "mean_oc", "se_oc", "mean_oc_ratio", "ratio_low", "ratio_high")


def atomic_write_text(path, text: str):
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows):
    atomic_write_text(path, csv_text(columns, rows))


def write_json(path, data):
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def result_rows(result, trajectory=True):
    """Rows of ``results.csv``: every step, or only the final one."""
    for name, summary in result.policies.items():
        ocs = summary.oc_trajectory
        ratios = summary.ratio_trajectory
        for r, rep in enumerate(result.replications):
            recs = rep.runs[name].recommendations
            steps = range(ocs.shape[1]) if trajectory else [ocs.shape[1] - 1]
            for n in steps:
                ratio = None if ratios is None else ratios[r, n]
                yield (name, rep.replication, n, ocs[r, n], ratio, int(recs[n]))


def summary_rows(result):
    for name, s in result.policies.items():
        yield (name, s.mean_oc, s.sd_oc, s.p_optimal, s.p_win)


def trajectory_rows(result):
    for name, s in result.policies.items():
        mean, se = s.mean_trajectory(), s.se_trajectory()
        band = s.ratio_band()
        for n in range(mean.size):
            if band is None:
                yield (name, n, mean[n], se[n], None, None, None)
            else:
                yield (name, n, mean[n], se[n], band[0][n], band[1][n], band[2][n])


def write_experiment(out_dir, result, meta, trajectory=True):
    out = Path(out_dir)
    write_csv(out / "results.csv", RESULTS_COLUMNS, result_rows(result, trajectory))
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary_rows(result))
    write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS, trajectory_rows(result))
    write_json(out / "meta.json", meta)
    return out
