"""Axis-aligned box domains and staggered-grid degree-of-freedom enumeration.

Domains are boxes, face-glued unions of boxes (3D) or rectangles (2D) on a
common isotropic lattice of spacing ``h``.  Degrees of freedom live on the
nodes, edges, faces and cells of that lattice; a DOF is *active* when its
carrier lies in the closed domain and *interior* when the relative interior
of its carrier does not touch the boundary.  Interior masks are how all
boundary conditions are imposed downstream.

Array index order is ``[z, y, x]`` (2D: ``[y, x]``), so C-order flattening
enumerates DOFs lexicographically with x fastest.  Edge and face families
are kept per axis component, ordered x, y, z.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import CommensurabilityError, InvalidArgument, OverlapError, TopologyError

# |side/h - n| <= COMMENSURABILITY_RTOL * max(1, n)
COMMENSURABILITY_RTOL = 1e-9


def _cells_along(length, h, what="side"):
    """Number of lattice cells spanned by ``length``, or raise."""
    ratio = length / h
    n = int(round(ratio))
    if abs(ratio - n) > COMMENSURABILITY_RTOL * max(1.0, abs(ratio)):
        raise CommensurabilityError(
            f"{what} {length!r} is not an integer multiple of h={h!r} (ratio {ratio!r})"
        )
    return n


def _check_positive(values, what):
    for v in values:
        if not (v > 0):
            raise InvalidArgument(f"{what} must be positive, got {v!r}")


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """A box, union of boxes or rectangle resolved on an isotropic lattice.

    ``cells`` counts bounding-lattice cells per axis (x first); ``cell_mask``
    marks the cells belonging to the domain, index order [z, y, x].
    """

    kind: str                 # "box3" | "union3" | "rect2"
    boxes: tuple              # ((origin, sides), ...) in domain coordinates
    h: float
    convex: bool
    origin: tuple             # lattice origin (min corner over boxes)
    cells: tuple              # bounding cells per axis, x first
    cell_mask: np.ndarray

    def __post_init__(self):
        self.cell_mask.flags.writeable = False

    @property
    def dim(self):
        return len(self.cells)

    @property
    def sides(self):
        """Side lengths of a single-box domain."""
        if self.kind == "union3":
            raise InvalidArgument("union domains have no single side tuple")
        return self.boxes[0][1]

    def label(self):
        if self.kind == "union3":
            return f"union3[{len(self.boxes)} boxes]"
        return f"{self.kind}[{'x'.join(format(s, 'g') for s in self.sides)}]"

    def as_dict(self):
        return {
            "kind": self.kind,
            "boxes": [{"origin": list(o), "sides": list(s)} for o, s in self.boxes],
            "h": self.h,
            "convex": self.convex,
        }


def make_box(sides, h):
    """Axis-aligned 3D box with corner at the origin; convex by construction."""
    sides = tuple(float(s) for s in sides)
    if len(sides) != 3:
        raise InvalidArgument(f"expected 3 side lengths, got {len(sides)}")
    _check_positive(sides, "side length")
    _check_positive((h,), "spacing h")
    n = tuple(_cells_along(s, h) for s in sides)
    mask = np.ones(n[::-1], dtype=bool)
    return DomainSpec(
        kind="box3",
        boxes=(((0.0, 0.0, 0.0), sides),),
        h=float(h),
        convex=True,
        origin=(0.0, 0.0, 0.0),
        cells=n,
        cell_mask=mask,
    )


def make_rect(sides, h):
    """Axis-aligned 2D rectangle; the planar analog of :func:`make_box`."""
    sides = tuple(float(s) for s in sides)
    if len(sides) != 2:
        raise InvalidArgument(f"expected 2 side lengths, got {len(sides)}")
    _check_positive(sides, "side length")
    _check_positive((h,), "spacing h")
    n = tuple(_cells_along(s, h) for s in sides)
    mask = np.ones(n[::-1], dtype=bool)
    return DomainSpec(
        kind="rect2",
        boxes=(((0.0, 0.0), sides),),
        h=float(h),
        convex=True,
        origin=(0.0, 0.0),
        cells=n,
        cell_mask=mask,
    )


def make_union_of_boxes(boxes, h):
    """Face-glued union of axis-aligned 3D boxes on a common lattice.

    Boxes may share faces but not volume; the union must be connected
    through shared faces.  The result is flagged nonconvex by construction.
    """
    _check_positive((h,), "spacing h")
    boxes = tuple((tuple(float(x) for x in o), tuple(float(s) for s in s_)) for o, s_ in boxes)
    if not boxes:
        raise InvalidArgument("union requires at least one box")
    for origin, sides in boxes:
        if len(origin) != 3 or len(sides) != 3:
            raise InvalidArgument("union boxes must be 3D (origin, sides) pairs")
        _check_positive(sides, "side length")

    lattice_origin = tuple(min(o[ax] for o, _ in boxes) for ax in range(3))
    top = tuple(max(o[ax] + s[ax] for o, s in boxes) for ax in range(3))
    cells = tuple(_cells_along(top[ax] - lattice_origin[ax], h, "bounding extent") for ax in range(3))

    mask = np.zeros(cells[::-1], dtype=bool)
    for origin, sides in boxes:
        lo = tuple(
            _cells_along(origin[ax] - lattice_origin[ax], h, "origin offset") if origin[ax] != lattice_origin[ax] else 0
            for ax in range(3)
        )
        n = tuple(_cells_along(sides[ax], h) for ax in range(3))
        block = mask[lo[2]:lo[2] + n[2], lo[1]:lo[1] + n[1], lo[0]:lo[0] + n[0]]
        if block.any():
            raise OverlapError("boxes overlap in volume")
        block[...] = True

    _, components = ndimage.label(mask)  # default structure: face connectivity
    if components != 1:
        raise TopologyError(f"union is not face-connected ({components} components)")

    return DomainSpec(
        kind="union3",
        boxes=boxes,
        h=float(h),
        convex=False,
        origin=lattice_origin,
        cells=cells,
        cell_mask=mask,
    )


def respace(spec, h):
    """The same geometry resolved at a different spacing."""
    if spec.kind == "box3":
        return make_box(spec.sides, h)
    if spec.kind == "rect2":
        return make_rect(spec.sides, h)
    return make_union_of_boxes(spec.boxes, h)


def _adjacent_cells(cell_mask, node_axes):
    """any/all masks of the cells adjacent to each DOF of one family.

    ``node_axes`` lists the numpy axes along which the family sits on lattice
    nodes (output size n+1, adjacent to cells j-1 and j); along the remaining
    axes it spans a cell (output size n, adjacent to cell i only).
    """
    d = cell_mask.ndim
    pad = [(1, 1) if ax in node_axes else (0, 0) for ax in range(d)]
    padded = np.pad(cell_mask, pad, constant_values=False)
    offset_range = [(0, 1) if ax in node_axes else (0,) for ax in range(d)]
    out_shape = tuple(
        cell_mask.shape[ax] + (1 if ax in node_axes else 0) for ax in range(d)
    )
    any_mask = np.zeros(out_shape, dtype=bool)
    all_mask = np.ones(out_shape, dtype=bool)
    for offsets in itertools.product(*offset_range):
        window = padded[tuple(slice(off, off + out_shape[ax]) for ax, off in enumerate(offsets))]
        any_mask |= window
        all_mask &= window
    return any_mask, all_mask


# node axes per family and array dimension; numpy axes run z, y, x (2D: y, x)
_EDGE_NODE_AXES = {3: ((0, 1), (0, 2), (1, 2)), 2: ((0,), (1,))}
_FACE_NODE_AXES = {3: ((2,), (1,), (0,)), 2: ((1,), (0,))}


@dataclass(frozen=True, eq=False)
class DofSets:
    """Active/interior masks for the node, edge, face and cell DOF families.

    Edge components realize the H(curl) role, face components the H(div)
    role, nodes scalar potentials and cells densities.  Masks are grid shaped
    (index order [z, y, x]); flattened views concatenate the x, y, z
    components in that order.
    """

    spec: DomainSpec
    h: float
    node_active: np.ndarray
    node_interior: np.ndarray
    edge_active: tuple
    edge_interior: tuple
    face_active: tuple
    face_interior: tuple
    cell_active: np.ndarray

    def __post_init__(self):
        for arr in self._all_masks():
            arr.flags.writeable = False

    def _all_masks(self):
        return (
            self.node_active, self.node_interior,
            *self.edge_active, *self.edge_interior,
            *self.face_active, *self.face_interior,
            self.cell_active,
        )

    @property
    def dim(self):
        return self.spec.dim

    # flattened lattice-wide masks (component blocks concatenated x, y, z)
    @property
    def nodes_active_flat(self):
        return self.node_active.ravel()

    @property
    def nodes_interior_flat(self):
        return self.node_interior.ravel()

    @property
    def edges_active_flat(self):
        return np.concatenate([m.ravel() for m in self.edge_active])

    @property
    def edges_interior_flat(self):
        return np.concatenate([m.ravel() for m in self.edge_interior])

    @property
    def faces_active_flat(self):
        return np.concatenate([m.ravel() for m in self.face_active])

    @property
    def faces_interior_flat(self):
        return np.concatenate([m.ravel() for m in self.face_interior])

    @property
    def cells_active_flat(self):
        return self.cell_active.ravel()

    # active counts
    @property
    def n_nodes(self):
        return int(self.node_active.sum())

    @property
    def n_edges(self):
        return int(self.edges_active_flat.sum())

    @property
    def n_faces(self):
        return int(self.faces_active_flat.sum())

    @property
    def n_cells(self):
        return int(self.cell_active.sum())

    @property
    def n_interior_nodes(self):
        return int(self.node_interior.sum())

    @property
    def n_interior_edges(self):
        return int(self.edges_interior_flat.sum())

    @property
    def n_interior_faces(self):
        return int(self.faces_interior_flat.sum())

    def counts(self):
        return {
            "nodes": self.n_nodes,
            "edges": self.n_edges,
            "faces": self.n_faces,
            "cells": self.n_cells,
            "interior_nodes": self.n_interior_nodes,
            "interior_edges": self.n_interior_edges,
            "interior_faces": self.n_interior_faces,
        }

    def index_map(self, family, which="active"):
        """Lattice index -> contiguous DOF index (-1 where absent).

        ``family`` is one of nodes/edges/faces/cells; edges and faces index
        into the concatenated component blocks.
        """
        flat = {
            ("nodes", "active"): self.nodes_active_flat,
            ("nodes", "interior"): self.nodes_interior_flat,
            ("edges", "active"): self.edges_active_flat,
            ("edges", "interior"): self.edges_interior_flat,
            ("faces", "active"): self.faces_active_flat,
            ("faces", "interior"): self.faces_interior_flat,
            ("cells", "active"): self.cells_active_flat,
        }.get((family, which))
        if flat is None:
            raise InvalidArgument(f"no index map for {family}/{which}")
        out = np.full(flat.size, -1, dtype=np.int64)
        out[flat] = np.arange(int(flat.sum()), dtype=np.int64)
        return out


def enumerate_dofs(spec):
    """Enumerate staggered-grid DOFs of ``spec`` with boundary masks."""
    mask = spec.cell_mask
    d = mask.ndim
    node_any, node_all = _adjacent_cells(mask, tuple(range(d)))
    edge = [_adjacent_cells(mask, axes) for axes in _EDGE_NODE_AXES[d]]
    face = [_adjacent_cells(mask, axes) for axes in _FACE_NODE_AXES[d]]
    return DofSets(
        spec=spec,
        h=spec.h,
        node_active=node_any,
        node_interior=node_all,
        edge_active=tuple(a for a, _ in edge),
        edge_interior=tuple(i for _, i in edge),
        face_active=tuple(a for a, _ in face),
        face_interior=tuple(i for _, i in face),
        cell_active=mask.copy(),
    )


def diameter(spec):
    """Euclidean diameter; for unions, over the corner vertices of the boxes."""
    corners = []
    for origin, sides in spec.boxes:
        for bits in itertools.product((0, 1), repeat=len(sides)):
            corners.append([o + b * s for o, s, b in zip(origin, sides, bits)])
    pts = np.asarray(corners)
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2)).max())


def pack_fields(arrays, masks):
    """Stack component grids into a DOF vector selected by ``masks``."""
    return np.concatenate([np.asarray(a).ravel()[m.ravel()] for a, m in zip(arrays, masks)])


def unpack_fields(vec, masks):
    """Inverse of :func:`pack_fields`; zeros outside the masks."""
    out = []
    pos = 0
    for m in masks:
        n = int(m.sum())
        grid = np.zeros(m.shape)
        grid[m] = vec[pos:pos + n]
        out.append(grid)
        pos += n
    if pos != len(vec):
        raise InvalidArgument(f"vector length {len(vec)} does not match masks ({pos})")
    return out
