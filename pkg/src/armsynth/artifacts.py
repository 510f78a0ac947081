"""Result emission: text report, CSV tables, SVG plot, design document.

All artifacts are plain text with frozen column orders and "%.12g" float
formatting, so identical runs produce byte-identical files.

Column orders:
  trajectory.csv  t, q1..qn (absolute link angles, rad), u1..un (N*m;
                  zeros on the final row, which has no control)
  history.csv     structure_links, attempt, t, rho, acquisition,
                  theta1..theta_d (ragged tail padded empty)
"""

from __future__ import annotations

import json
import math

import numpy as np

from .workspace import AbstractWorkspace, Workspace


def fmt(value: float) -> str:
    if value == float("-inf"):
        return "-inf"
    if value == float("inf"):
        return "inf"
    if isinstance(value, float) and math.isnan(value):
        return ""
    return "%.12g" % (value + 0.0)


def trajectory_csv(poses: np.ndarray, control: np.ndarray, dt: float) -> str:
    poses = np.atleast_2d(poses)
    n = poses.shape[1]
    m = control.shape[1] if control.size else n
    header = ["t"] + [f"q{j+1}" for j in range(n)] + [f"u{j+1}" for j in range(m)]
    lines = [",".join(header)]
    for i, q in enumerate(poses):
        u = control[i] if i < len(control) else np.zeros(m)
        row = [fmt(i * dt)] + [fmt(v) for v in q] + [fmt(v) for v in u]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def history_csv(log: list[dict], max_links: int) -> str:
    header = ["structure_links", "attempt", "t"]
    header += [f"theta{j+1}" for j in range(max_links)]
    header += ["rho", "acquisition"]
    lines = [",".join(header)]
    links = 0
    attempt = 0
    for event in log:
        if event.get("event") == "structure":
            links = event["links"]
            attempt = 0
        elif event.get("event") == "optimize":
            for entry in event.get("history", []):
                theta = list(entry.get("theta", []))
                row = [str(links), str(attempt), str(entry["t"])]
                row += [fmt(v) for v in theta]
                row += [""] * (max_links - len(theta))
                row += [entry["rho"] if isinstance(entry["rho"], str) else fmt(entry["rho"]),
                        "" if entry.get("score") is None else fmt(entry["score"])]
                lines.append(",".join(row))
            attempt += 1
    return "\n".join(lines) + "\n"


def report_text(status: str, word: str | None, lengths, rho, path_len: int | None,
                options: dict) -> str:
    lines = ["armsynth design report", "=" * 22, f"status: {status}"]
    if word is not None:
        lines.append(f"structure: {word}")
        lines.append("link lengths (m): " + ", ".join(fmt(v) for v in lengths))
        lines.append(f"robustness certificate rho: {fmt(rho)}")
        lines.append(f"planned path cells: {path_len}")
    for key in sorted(options):
        lines.append(f"{key}: {options[key]}")
    return "\n".join(lines) + "\n"


def design_document(word: str, lengths, rho: float, path, control: np.ndarray,
                    options: dict) -> str:
    doc = {
        "format": "armsynth-design/1",
        "word": word,
        "lengths": [float(v) for v in lengths],
        "rho": float(rho + 0.0),
        "path": [int(c) for c in path],
        "control": [[float(v) for v in row] for row in np.atleast_2d(control)]
        if np.asarray(control).size else [],
        "options": options,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_design_document(text: str) -> dict:
    doc = json.loads(text)
    if doc.get("format") != "armsynth-design/1":
        raise ValueError("not an armsynth design document")
    return doc


def workspace_svg(workspace: Workspace, aw: AbstractWorkspace | None = None,
                  path_cells=None, trajectory=None, size: int = 640) -> str:
    """Static plot: labeled regions, planned cells, tip trajectory."""
    xmin, ymin, xmax, ymax = workspace.bbox
    width, height = xmax - xmin, ymax - ymin
    scale = size / max(width, height)
    W, H = width * scale, height * scale

    def X(x: float) -> str:
        return fmt((x - xmin) * scale)

    def Y(y: float) -> str:
        return fmt((ymax - y) * scale)  # svg y grows downward

    colors = {"obstacle": "#d9534f", "target": "#5cb85c", "free": "#f7f7f7"}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(W)}" height="{fmt(H)}" '
        f'viewBox="0 0 {fmt(W)} {fmt(H)}">',
        f'<rect x="0" y="0" width="{fmt(W)}" height="{fmt(H)}" fill="{colors["free"]}" '
        f'stroke="#333" stroke-width="1"/>',
    ]
    for region in workspace.explicit_regions:
        box = region.polytope.as_box()
        if box is None:
            continue
        xlo, xhi, ylo, yhi = box
        parts.append(
            f'<rect x="{X(xlo)}" y="{Y(yhi)}" width="{fmt((xhi - xlo) * scale)}" '
            f'height="{fmt((yhi - ylo) * scale)}" fill="{colors[region.proposition]}" '
            f'fill-opacity="0.8"/>')
    if aw is not None and path_cells:
        for cell in path_cells:
            xlo, xhi, ylo, yhi = aw.cell_bounds(int(cell))
            parts.append(
                f'<rect x="{X(xlo)}" y="{Y(yhi)}" width="{fmt((xhi - xlo) * scale)}" '
                f'height="{fmt((yhi - ylo) * scale)}" fill="#337ab7" fill-opacity="0.35"/>')
    if trajectory is not None and len(trajectory):
        pts = " ".join(f"{X(p[0])},{Y(p[1])}" for p in np.atleast_2d(trajectory))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#c00" stroke-width="2"/>')
    if workspace.start_point is not None:
        sx, sy = workspace.start_point
        parts.append(f'<circle cx="{X(sx)}" cy="{Y(sy)}" r="4" fill="#222"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
