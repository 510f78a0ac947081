"""Labeled polytope workspaces and their grid abstraction.

A workspace is a bounding box plus an ordered list of convex polytope
regions, each carrying one proposition (target / obstacle / free); space
covered by no explicit region is implicitly free.  ``abstract`` refines the
workspace into a uniform rectangular grid whose cells inherit propositions
conservatively: any cell overlapping an obstacle is an obstacle cell, a
cell fully inside the target is a target cell, everything else is free.

Workspace file format (line-based)::

    bbox 0 0 5 5
    start 1.5 0.7
    region obstacle
      -1  0 -1.7
       1  0  3
       0 -1 -2
       0  1  3
    end
    region target
      ...
    end
    adjacency 1 1 0   # optional: one row of the region adjacency override

Region rows read "c1 c2 rhs" for the half-plane c1*x + c2*y <= rhs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (OutOfWorkspaceError, ParameterError, ResourceError,
                     WorkspaceError)
from .lp import solve_lp

FREE = "free"
OBSTACLE = "obstacle"
TARGET = "target"
PROPOSITIONS = (TARGET, OBSTACLE, FREE)

GEO_TOL = 1e-9
MAX_CELLS = 10**6


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex region {p : C p <= b} in the plane."""

    C: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "C", np.atleast_2d(np.asarray(self.C, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))
        if self.C.shape[1] != 2 or self.C.shape[0] != self.b.size:
            raise WorkspaceError("polytope needs an r x 2 matrix and an r-vector")
        if self.C.shape[0] < 3:
            raise WorkspaceError("a bounded planar polytope needs at least 3 rows")

    def contains(self, p, tol: float = GEO_TOL) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(self.C @ p <= self.b + tol))

    def as_box(self):
        """(xlo, xhi, ylo, yhi) if the rows are exactly the four axis-aligned
        half-planes, else None."""
        if self.C.shape[0] != 4:
            return None
        box = {}
        for row, rhs in zip(self.C, self.b):
            key = (round(row[0], 12), round(row[1], 12))
            box[key] = rhs
        needed = {(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)}
        if set(box) != needed:
            return None
        return (-box[(-1.0, 0.0)], box[(1.0, 0.0)], -box[(0.0, -1.0)], box[(0.0, 1.0)])

    def extent(self, direction) -> float | None:
        """Support value max dᵀp over the polytope; None when unbounded."""
        r = solve_lp(np.asarray(direction, dtype=float), A_ub=self.C, b_ub=self.b,
                     maximize=True)
        return r.value if r.optimal else None

    def is_bounded(self) -> bool:
        return all(self.extent(d) is not None
                   for d in ((1, 0), (-1, 0), (0, 1), (0, -1)))

    def interior_overlaps(self, other: "Polytope", tol: float = GEO_TOL) -> bool:
        """Whether the interiors of two polytopes intersect (Chebyshev LP)."""
        box_a, box_b = self.as_box(), other.as_box()
        if box_a is not None and box_b is not None:
            return (min(box_a[1], box_b[1]) - max(box_a[0], box_b[0]) > tol and
                    min(box_a[3], box_b[3]) - max(box_a[2], box_b[2]) > tol)
        C = np.vstack([self.C, other.C])
        b = np.concatenate([self.b, other.b])
        norms = np.linalg.norm(C, axis=1)
        A = np.column_stack([C, norms])
        r = solve_lp([0.0, 0.0, 1.0], A_ub=A, b_ub=b, maximize=True)
        return r.optimal and r.value > tol

    def touches(self, other: "Polytope", tol: float = GEO_TOL) -> bool:
        """Whether the closures intersect (shared point up to tol)."""
        C = np.vstack([self.C, other.C])
        b = np.concatenate([self.b, other.b]) + tol
        r = solve_lp([0.0, 0.0], A_ub=C, b_ub=b)
        return r.optimal


def box_polytope(xlo: float, xhi: float, ylo: float, yhi: float) -> Polytope:
    return Polytope(np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]]),
                    np.array([-xlo, xhi, -ylo, yhi]))


@dataclass(frozen=True, eq=False)
class Region:
    """A polytope with exactly one proposition attached."""

    polytope: Polytope
    proposition: str

    def __post_init__(self) -> None:
        if self.proposition not in PROPOSITIONS:
            raise WorkspaceError(f"unknown proposition {self.proposition!r}")


class Workspace:
    """Bounding box, ordered labeled regions, and region adjacency.

    Points covered by no explicit region are classified into the implicit
    free background region, whose id is ``len(explicit regions)``.
    """

    def __init__(self, bbox, regions, start_point=None, adjacency=None):
        self.bbox = tuple(float(v) for v in bbox)  # xmin, ymin, xmax, ymax
        if not (self.bbox[0] < self.bbox[2] and self.bbox[1] < self.bbox[3]):
            raise WorkspaceError("bounding box must have positive extent")
        self.explicit_regions: list[Region] = list(regions)
        for reg in self.explicit_regions:
            if not reg.polytope.is_bounded():
                raise WorkspaceError("workspace regions must be bounded polytopes")
        for i in range(len(self.explicit_regions)):
            for j in range(i + 1, len(self.explicit_regions)):
                if self.explicit_regions[i].polytope.interior_overlaps(
                        self.explicit_regions[j].polytope):
                    raise WorkspaceError(f"regions {i} and {j} have overlapping interiors")
        self.start_point = None if start_point is None else tuple(map(float, start_point))
        background = Region(box_polytope(self.bbox[0], self.bbox[2],
                                         self.bbox[1], self.bbox[3]), FREE)
        self.regions: list[Region] = self.explicit_regions + [background]
        self.background_id = len(self.explicit_regions)
        self._adjacency = (None if adjacency is None
                           else np.asarray(adjacency, dtype=np.int8))

    @property
    def adjacency(self) -> np.ndarray:
        """Region adjacency (symmetric, reflexive).  Computed geometrically
        unless an explicit override was supplied; the free background is
        treated as touching every explicit region."""
        if self._adjacency is None:
            p = len(self.regions)
            N = np.eye(p, dtype=np.int8)
            N[self.background_id, :] = 1
            N[:, self.background_id] = 1
            for i in range(len(self.explicit_regions)):
                for j in range(i + 1, len(self.explicit_regions)):
                    if self.explicit_regions[i].polytope.touches(
                            self.explicit_regions[j].polytope):
                        N[i, j] = N[j, i] = 1
            self._adjacency = N
        return self._adjacency

    def classify_point(self, p, tol: float = GEO_TOL) -> tuple[int, str]:
        """(region id, proposition) of the lowest-index region containing p."""
        x, y = float(p[0]), float(p[1])
        xmin, ymin, xmax, ymax = self.bbox
        if not (xmin - tol <= x <= xmax + tol and ymin - tol <= y <= ymax + tol):
            raise OutOfWorkspaceError(f"point ({x}, {y}) lies outside the bounding box")
        for idx, reg in enumerate(self.explicit_regions):
            if reg.polytope.contains((x, y), tol):
                return idx, reg.proposition
        return self.background_id, FREE


def classify_point(w: Workspace, p) -> tuple[int, str]:
    return w.classify_point(p)


@dataclass
class AbstractWorkspace:
    """Uniform grid refinement of a workspace with inherited propositions."""

    workspace: Workspace
    nx: int
    ny: int
    hx: float
    hy: float
    labels: np.ndarray = field(repr=False)   # flat int8: 0 free, 1 obstacle, 2 target
    parent: np.ndarray = field(repr=False)   # flat int: original region id per cell

    _LABEL_NAMES = (FREE, OBSTACLE, TARGET)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def cell_index(self, ix: int, iy: int) -> int:
        return iy * self.nx + ix

    def cell_coords(self, cell: int) -> tuple[int, int]:
        return cell % self.nx, cell // self.nx

    def _check(self, cell: int) -> None:
        if not (0 <= cell < self.n_cells):
            raise WorkspaceError(f"cell id {cell} out of range")

    def cell_bounds(self, cell: int) -> tuple[float, float, float, float]:
        self._check(cell)
        ix, iy = self.cell_coords(cell)
        xmin, ymin = self.workspace.bbox[0], self.workspace.bbox[1]
        return (xmin + ix * self.hx, xmin + (ix + 1) * self.hx,
                ymin + iy * self.hy, ymin + (iy + 1) * self.hy)

    def cell_center(self, cell: int) -> tuple[float, float]:
        xlo, xhi, ylo, yhi = self.cell_bounds(cell)
        return (0.5 * (xlo + xhi), 0.5 * (ylo + yhi))

    def proposition(self, cell: int) -> str:
        self._check(cell)
        return self._LABEL_NAMES[self.labels[cell]]

    def region_constraints(self, cell: int) -> tuple[np.ndarray, np.ndarray]:
        """Four-row axis-aligned inequality system of a cell."""
        xlo, xhi, ylo, yhi = self.cell_bounds(cell)
        C = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])
        b = np.array([-xlo, xhi, -ylo, yhi])
        return C, b

    def cell_of_point(self, p) -> int:
        x, y = float(p[0]), float(p[1])
        xmin, ymin, xmax, ymax = self.workspace.bbox
        if not (xmin - GEO_TOL <= x <= xmax + GEO_TOL
                and ymin - GEO_TOL <= y <= ymax + GEO_TOL):
            raise OutOfWorkspaceError(f"point ({x}, {y}) lies outside the bounding box")
        ix = min(int((x - xmin) / self.hx), self.nx - 1)
        iy = min(int((y - ymin) / self.hy), self.ny - 1)
        return self.cell_index(max(ix, 0), max(iy, 0))

    def neighbors4(self, cell: int) -> list[int]:
        """Edge-sharing neighbor cells (4-connectivity, no self)."""
        ix, iy = self.cell_coords(cell)
        out = []
        if ix > 0:
            out.append(cell - 1)
        if ix < self.nx - 1:
            out.append(cell + 1)
        if iy > 0:
            out.append(cell - self.nx)
        if iy < self.ny - 1:
            out.append(cell + self.nx)
        return out

    def adjacency(self) -> np.ndarray:
        """Dense cell adjacency: shared edge or identical cell."""
        n = self.n_cells
        if n > 20000:
            raise ResourceError(f"dense adjacency for {n} cells; iterate neighbors4 instead")
        N = np.eye(n, dtype=np.int8)
        for cell in range(n):
            for nb in self.neighbors4(cell):
                N[cell, nb] = 1
                N[nb, cell] = 1
        return N

    def cells_with_label(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.labels == self._LABEL_NAMES.index(name))

    @property
    def start_cell(self) -> int:
        if self.workspace.start_point is None:
            raise WorkspaceError("workspace declares no start point")
        return self.cell_of_point(self.workspace.start_point)


def abstract(w: Workspace, h: float) -> AbstractWorkspace:
    """Grid-refine a workspace at cell size (at most) h.

    The cell size is adjusted down so the grid tiles the bounding box
    exactly.  Labeling is conservative: obstacle on any overlap, target only
    when fully contained, free otherwise.
    """
    if h <= 0:
        raise ParameterError("cell size must be positive")
    xmin, ymin, xmax, ymax = w.bbox
    width, height = xmax - xmin, ymax - ymin
    nx = max(1, math.ceil(width / h - 1e-12))
    ny = max(1, math.ceil(height / h - 1e-12))
    if nx * ny > MAX_CELLS:
        raise ResourceError(f"grid of {nx * ny} cells exceeds the {MAX_CELLS} cap")
    hx, hy = width / nx, height / ny

    labels = np.zeros(nx * ny, dtype=np.int8)
    parent = np.full(nx * ny, w.background_id, dtype=int)

    # default parent: region of the cell center
    for cell in range(nx * ny):
        ix, iy = cell % nx, cell // nx
        center = (xmin + (ix + 0.5) * hx, ymin + (iy + 0.5) * hy)
        rid, prop = w.classify_point(center)
        parent[cell] = rid
        if prop == TARGET:
            labels[cell] = 2

    def cells_in_box(xlo, xhi, ylo, yhi, pad):
        ix0 = max(0, int(math.floor((xlo - xmin) / hx - pad)))
        ix1 = min(nx - 1, int(math.ceil((xhi - xmin) / hx + pad)))
        iy0 = max(0, int(math.floor((ylo - ymin) / hy - pad)))
        iy1 = min(ny - 1, int(math.ceil((yhi - ymin) / hy + pad)))
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                yield iy * nx + ix

    for rid, reg in enumerate(w.explicit_regions):
        poly = reg.polytope
        rb = poly.as_box()
        if rb is None:
            rb = (-poly.extent((-1, 0)), poly.extent((1, 0)),
                  -poly.extent((0, -1)), poly.extent((0, 1)))
        if reg.proposition == OBSTACLE:
            for cell in cells_in_box(*rb, pad=1):
                xlo, xhi, ylo, yhi = (xmin + (cell % nx) * hx,
                                      xmin + (cell % nx + 1) * hx,
                                      ymin + (cell // nx) * hy,
                                      ymin + (cell // nx + 1) * hy)
                cell_poly = box_polytope(xlo, xhi, ylo, yhi)
                if poly.interior_overlaps(cell_poly):
                    labels[cell] = 1
                    parent[cell] = rid
        elif reg.proposition == TARGET:
            for cell in cells_in_box(*rb, pad=1):
                xlo, xhi, ylo, yhi = (xmin + (cell % nx) * hx,
                                      xmin + (cell % nx + 1) * hx,
                                      ymin + (cell // nx) * hy,
                                      ymin + (cell // nx + 1) * hy)
                corners = ((xlo, ylo), (xlo, yhi), (xhi, ylo), (xhi, yhi))
                if all(poly.contains(c) for c in corners):
                    labels[cell] = 2
                    parent[cell] = rid
                elif labels[cell] == 2:
                    labels[cell] = 0  # center in target but cell not contained

    return AbstractWorkspace(workspace=w, nx=nx, ny=ny, hx=hx, hy=hy,
                             labels=labels, parent=parent)


def adjacency(aw: AbstractWorkspace) -> np.ndarray:
    return aw.adjacency()


def region_constraints(aw: AbstractWorkspace, cell: int) -> tuple[np.ndarray, np.ndarray]:
    return aw.region_constraints(cell)


def parse_workspace(text: str) -> Workspace:
    """Parse workspace text into a validated :class:`Workspace`."""
    bbox = None
    start = None
    regions: list[Region] = []
    adjacency_rows: list[list[int]] = []
    current_prop: str | None = None
    current_rows: list[list[float]] = []

    def close_region() -> None:
        nonlocal current_prop, current_rows
        if current_prop is None:
            return
        if len(current_rows) < 3:
            raise WorkspaceError("region needs at least 3 constraint rows")
        arr = np.asarray(current_rows, dtype=float)
        regions.append(Region(Polytope(arr[:, :2], arr[:, 2]), current_prop))
        current_prop, current_rows = None, []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "bbox":
                bbox = (float(parts[1]), float(parts[2]), float(parts[3]), float(parts[4]))
            elif parts[0] == "start":
                start = (float(parts[1]), float(parts[2]))
            elif parts[0] == "region":
                close_region()
                if parts[1] not in PROPOSITIONS:
                    raise WorkspaceError(f"line {lineno}: unknown proposition {parts[1]!r}")
                current_prop = parts[1]
            elif parts[0] == "end":
                close_region()
            elif parts[0] == "adjacency":
                adjacency_rows.append([int(v) for v in parts[1:]])
            elif current_prop is not None:
                current_rows.append([float(v) for v in parts])
            else:
                raise WorkspaceError(f"line {lineno}: unexpected {line!r}")
        except (IndexError, ValueError) as exc:
            raise WorkspaceError(f"line {lineno}: cannot parse {line!r}") from exc
    close_region()
    if bbox is None:
        raise WorkspaceError("workspace must declare a bbox")
    adj = np.asarray(adjacency_rows, dtype=np.int8) if adjacency_rows else None
    return Workspace(bbox, regions, start_point=start, adjacency=adj)


def load_workspace(path: str) -> Workspace:
    with open(path, encoding="utf-8") as fh:
        return parse_workspace(fh.read())
