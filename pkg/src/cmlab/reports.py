"""Report serialization: stable CSV/JSON layouts, written atomically."""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .consistency import SweepReport
from .eigensolver import EigenSystem
from .modes import ModeSet


def fmt(x: float) -> str:
    """Shortest-roundtrip decimal text for a float (stable across runs)."""
    return repr(float(x))


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def eigs_csv(eigs: EigenSystem) -> str:
    lines = ["index,lambda,residual"]
    for i in range(eigs.count):
        lines.append(f"{i + 1},{fmt(eigs.eigenvalues[i])},{fmt(eigs.residual_norms[i])}")
    return "\n".join(lines) + "\n"


def modes_csv(modes: ModeSet) -> str:
    """One column per mode, one row per node; grid metadata in comment lines."""
    g = modes.grid
    lines = [
        f"# dim={g.dim}",
        f"# extent={','.join(fmt(e) for e in g.extent)}",
        f"# points={','.join(str(p) for p in g.points_per_axis)}",
        f"# boundary={g.boundary}",
        f"# spacing={','.join(fmt(h) for h in g.spacing)}",
        f"# ortho_defect={fmt(modes.ortho_defect)}",
        ",".join(f"mode_{j + 1}" for j in range(modes.count)),
    ]
    for row in modes.matrix:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def trace_csv(trace) -> str:
    lines = ["iter,objective,ortho_defect"]
    for i, (obj, defect) in enumerate(trace, start=1):
        lines.append(f"{i},{fmt(obj)},{fmt(defect)}")
    return "\n".join(lines) + "\n"


def sweep_csv(report: SweepReport) -> str:
    nu_cols = ",".join(f"nu_{i + 1}" for i in range(report.N))
    header = (
        f"mu,E,E0,energy_gap,{nu_cols},max_eig_dev,procrustes_residual,"
        "ortho_defect,iterations,converged"
    )
    lines = [header]
    for r in report.records:
        nu = ",".join(fmt(v) for v in r.nu)
        lines.append(
            f"{fmt(r.mu)},{fmt(r.E)},{fmt(r.E0)},{fmt(r.energy_gap)},{nu},"
            f"{fmt(r.max_eig_dev)},{fmt(r.procrustes_residual)},{fmt(r.ortho_defect)},"
            f"{r.iterations},{'true' if r.converged else 'false'}"
        )
    return "\n".join(lines) + "\n"


def _clean(value):
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def sweep_json(report: SweepReport, config_echo: dict | None = None) -> str:
    doc = {
        "N": report.N,
        "mu_schedule": list(report.mu_schedule),
        "eigenvalues": list(report.eigenvalues),
        "E0": report.E0,
        "spectral_gap": report.spectral_gap,
        "gap_threshold": report.gap_threshold,
        "degenerate": report.degenerate,
        "verdicts": dict(report.verdicts),
        "records": [
            {
                "mu": r.mu,
                "E": r.E,
                "E0": r.E0,
                "energy_gap": r.energy_gap,
                "nu": list(r.nu),
                "max_eig_dev": r.max_eig_dev,
                "procrustes_residual": _clean(r.procrustes_residual),
                "ortho_defect": r.ortho_defect,
                "iterations": r.iterations,
                "converged": r.converged,
                "winner_start": r.winner_start,
            }
            for r in report.records
        ],
    }
    if config_echo is not None:
        doc["config"] = config_echo
    return json.dumps(doc, indent=2) + "\n"
