"""CSV tables, SVG figures and run manifests.

Numbers are written with 17 significant digits so a float survives the
round trip unchanged.  Every file is written to a temporary name in the
target directory and renamed into place.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import __version__

MANIFEST_NAME = "manifest.json"


def format_number(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: Sequence[str], columns: Sequence[Iterable]) -> None:
    rows = zip(*[list(c) for c in columns])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    atomic_write(path, buf.getvalue().encode("utf-8"))


def read_csv(path: Path) -> dict:
    """Columns keyed by header name; numeric columns as float arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    out = {}
    for i, name in enumerate(header):
        raw = [r[i] for r in rows]
        if all(v in ("true", "false") for v in raw) and raw:
            out[name] = np.array([v == "true" for v in raw])
        else:
            try:
                out[name] = np.array([float(v) for v in raw])
            except ValueError:
                out[name] = raw
    return out


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config: Mapping,
    seed: int,
    started: datetime,
    inputs: Optional[Mapping[str, Path]] = None,
    notes: Optional[Mapping] = None,
) -> Path:
    """List every file under ``out_dir`` (except the manifest) with its digest."""
    out_dir = Path(out_dir)
    outputs = []
    for p in sorted(out_dir.rglob("*")):
        if p.is_file() and p.name != MANIFEST_NAME and not p.name.endswith(".tmp"):
            outputs.append({"path": p.relative_to(out_dir).as_posix(), "sha256": sha256_file(p), "bytes": p.stat().st_size})
    manifest = {
        "tool": "talbot-coherence",
        "version": __version__,
        "command": command,
        "seed": int(seed),
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "config": dict(config),
        "inputs": {name: {"path": str(p), "sha256": sha256_file(p)} for name, p in (inputs or {}).items()},
        "outputs": outputs,
        "notes": dict(notes or {}),
    }
    path = out_dir / MANIFEST_NAME
    atomic_write(path, (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return path


def verify_manifest(out_dir: Path) -> list:
    """Problems found when re-hashing the files a manifest names; empty when all digests match."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    problems = []
    for entry in manifest["outputs"]:
        p = out_dir / entry["path"]
        if not p.exists():
            problems.append(f"missing: {entry['path']}")
        elif sha256_file(p) != entry["sha256"]:
            problems.append(f"digest mismatch: {entry['path']}")
    return problems


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "talbot-coherence"
    plt.rcParams["svg.fonttype"] = "path"
    return plt


def _save_svg(fig, path: Path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    atomic_write(path, buf.getvalue())


def plot_trace(path: Path, times, values, sigmas, period: float, fit_curve=None, title: str = "") -> None:
    """Signal against blanking time (µs) with markers at integer and half-integer Talbot times."""
    plt = _figure()
    t_us = np.asarray(times) * 1e6
    fig, ax = plt.subplots(figsize=(7, 3.5))
    if sigmas is not None:
        ax.errorbar(t_us, values, yerr=sigmas, fmt="o", ms=3, lw=0.8, color="tab:blue", label="signal")
    else:
        ax.plot(t_us, values, "o", ms=3, color="tab:blue", label="signal")
    if fit_curve is not None:
        ax.plot(*fit_curve, "-", lw=1.2, color="tab:red", label="damped-sine fit")
    t_max = float(np.max(times))
    n = 1
    while n * period <= t_max:
        ax.axvline(n * period * 1e6, color="0.4", ls="--", lw=0.7)
        n += 1
    n = 0
    while (n + 0.5) * period <= t_max:
        ax.axvline((n + 0.5) * period * 1e6, color="0.75", ls=":", lw=0.7)
        n += 1
    ax.set_xlabel("blanking time (µs)")
    ax.set_ylabel("signal (arb. units)")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    _save_svg(fig, path)
    plt.close(fig)


def revival_markers(period: float, t_max: float) -> list:
    """Integer and half-integer multiples of the period inside (0, t_max]."""
    marks = []
    k = 1
    while k * period / 2 <= t_max:
        marks.append(k * period / 2)
        k += 1
    return marks


def plot_quench(path: Path, series, t_grid, bounds, power_curve) -> None:
    """Two panels: xi0 with the reference length, xi_coh with power law and transport bounds."""
    plt = _figure()
    t_ms = series.t_Q * 1e3
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    ax0.errorbar(t_ms, series.xi0, yerr=series.xi0_err, fmt="o", color="tab:blue", label=r"$\xi_0$")
    if math.isfinite(series.xi_ref):
        ax0.axhline(series.xi_ref, color="k", ls="--", lw=1, label=r"reference $\xi_{ref}$")
    ax0.set_xlabel(r"$t_Q$ (ms)")
    ax0.set_ylabel(r"$\xi_0$ (sites)")
    ax0.set_xscale("log")
    ax0.legend(fontsize=8)

    finite = np.isfinite(series.xi_coh)
    err = np.where(np.isfinite(series.xi_coh_err), series.xi_coh_err, 0.0)
    ax1.errorbar(t_ms[finite], series.xi_coh[finite], yerr=err[finite], fmt="o", color="tab:blue", label=r"$\xi_{coh}$")
    g_ms = np.asarray(t_grid) * 1e3
    if power_curve is not None:
        ax1.plot(g_ms, power_curve, "-", color="tab:blue", label=rf"power law, $\alpha$ = {series.alpha:.2f}")
    ax1.plot(g_ms, bounds[0], "--", color="tab:red", label="ballistic bound")
    ax1.plot(g_ms, bounds[1], "-", color="tab:red", label="random walk")
    ax1.set_xscale("log")
    ax1.set_yscale("log")
    ax1.set_xlabel(r"$t_Q$ (ms)")
    ax1.set_ylabel(r"$\xi_{coh}$ (sites)")
    ax1.legend(fontsize=8)
    _save_svg(fig, path)
    plt.close(fig)
