import itertools
import math

import numpy as np
import pytest

from maxconst import domain
from maxconst.errors import (CommensurabilityError, InvalidArgument,
                             OverlapError, TopologyError)

from conftest import L_SHAPE_BOXES, make_lshape


class TestMakeBox:
    def test_pi_cube_two_cells_per_axis(self):
        spec = domain.make_box((math.pi, math.pi, math.pi), math.pi / 2)
        assert spec.cells == (2, 2, 2)
        assert spec.kind == "box3"
        assert spec.convex

    def test_brick_cells(self):
        spec = domain.make_box((1, 2, 3), 1 / 16)
        assert spec.cells == (16, 32, 48)

    def test_incommensurable_spacing_rejected(self):
        with pytest.raises(CommensurabilityError):
            domain.make_box((1, 1, 1), 0.3)

    def test_nearly_commensurable_accepted(self):
        # the kind of rounding the CLI produces: pi/32 to 10 digits
        spec = domain.make_box((3.14159265, 3.14159265, 3.14159265), 0.0981747704)
        assert spec.cells == (32, 32, 32)

    @pytest.mark.parametrize("sides,h", [((0, 1, 1), 0.5), ((1, 1, 1), -0.5), ((1, 1), 0.5)])
    def test_bad_arguments_rejected(self, sides, h):
        with pytest.raises(InvalidArgument):
            domain.make_box(sides, h)


class TestMakeUnion:
    def test_two_boxes_sharing_a_face(self):
        spec = domain.make_union_of_boxes(
            [((0, 0, 0), (1, 1, 1)), ((0, 0, 1), (1, 1, 1))], 0.5
        )
        assert spec.cells == (2, 2, 4)
        assert spec.cell_mask.all()
        assert not spec.convex
        assert spec.kind == "union3"

    def test_l_shape_voxelization(self):
        spec = make_lshape(1 / 8)
        assert spec.cells == (16, 16, 8)
        assert int(spec.cell_mask.sum()) == 3 * 8 ** 3

    def test_volume_overlap_rejected(self):
        with pytest.raises(OverlapError):
            domain.make_union_of_boxes(
                [((0, 0, 0), (1, 1, 1)), ((0.5, 0, 0), (1, 1, 1))], 0.5
            )

    def test_disconnected_rejected(self):
        with pytest.raises(TopologyError):
            domain.make_union_of_boxes(
                [((0, 0, 0), (1, 1, 1)), ((2, 0, 0), (1, 1, 1))], 0.5
            )

    def test_edge_touching_rejected(self):
        # boxes meeting only along an edge do not form a face-connected body
        with pytest.raises(TopologyError):
            domain.make_union_of_boxes(
                [((0, 0, 0), (1, 1, 1)), ((1, 1, 0), (1, 1, 1))], 0.5
            )

    def test_misaligned_origin_rejected(self):
        with pytest.raises(CommensurabilityError):
            domain.make_union_of_boxes(
                [((0, 0, 0), (1, 1, 1)), ((1.25, 0, 0), (1, 1, 1))], 0.5
            )


class TestEnumerateDofs:
    def test_cube_half_counts(self):
        # combinatorial oracle for n cells/axis:
        # (n+1)^3 nodes, 3n(n+1)^2 edges, 3n^2(n+1) faces, n^3 cells
        n = 2
        dofs = domain.enumerate_dofs(domain.make_box((1, 1, 1), 0.5))
        assert dofs.counts() == {
            "nodes": (n + 1) ** 3,
            "edges": 3 * n * (n + 1) ** 2,
            "faces": 3 * n ** 2 * (n + 1),
            "cells": n ** 3,
            "interior_nodes": (n - 1) ** 3,
            "interior_edges": 3 * n * (n - 1) ** 2,
            "interior_faces": 3 * (n - 1) * n ** 2,
        }
        assert dofs.counts()["nodes"] == 27
        assert dofs.counts()["edges"] == 54
        assert dofs.counts()["faces"] == 36
        assert dofs.counts()["interior_edges"] == 6
        assert dofs.counts()["interior_faces"] == 12

    def test_single_cell_has_no_interior(self):
        dofs = domain.enumerate_dofs(domain.make_box((1, 1, 1), 1.0))
        assert dofs.n_interior_nodes == 0
        assert dofs.n_interior_edges == 0
        assert dofs.n_interior_faces == 0

    def test_unit_square_counts(self):
        dofs = domain.enumerate_dofs(domain.make_rect((1, 1), 0.5))
        assert dofs.n_nodes == 9
        assert dofs.n_edges == 12
        assert dofs.n_cells == 4
        assert dofs.n_interior_nodes == 1
        assert dofs.n_interior_edges == 4

    @pytest.mark.parametrize("cells", [(1, 2, 3), (2, 2, 2), (3, 4, 2)])
    def test_box_interior_count_formulas(self, cells):
        n1, n2, n3 = cells
        dofs = domain.enumerate_dofs(domain.make_box(cells, 1.0))
        assert dofs.n_interior_nodes == (n1 - 1) * (n2 - 1) * (n3 - 1)
        per_axis_edges = [int(m.sum()) for m in dofs.edge_interior]
        assert per_axis_edges == [
            n1 * (n2 - 1) * (n3 - 1),
            (n1 - 1) * n2 * (n3 - 1),
            (n1 - 1) * (n2 - 1) * n3,
        ]
        per_axis_faces = [int(m.sum()) for m in dofs.face_interior]
        assert per_axis_faces == [
            (n1 - 1) * n2 * n3,
            n1 * (n2 - 1) * n3,
            n1 * n2 * (n3 - 1),
        ]

    def test_union_interior_is_strict_subset(self):
        dofs = domain.enumerate_dofs(make_lshape(0.25))
        assert 0 < dofs.n_interior_nodes < dofs.n_nodes
        assert 0 < dofs.n_interior_edges < dofs.n_edges
        assert 0 < dofs.n_interior_faces < dofs.n_faces

    def test_deterministic(self):
        spec = make_lshape(0.5)
        a = domain.enumerate_dofs(spec)
        b = domain.enumerate_dofs(spec)
        assert np.array_equal(a.edges_interior_flat, b.edges_interior_flat)
        assert np.array_equal(
            a.index_map("faces", "interior"), b.index_map("faces", "interior")
        )

    def test_index_maps_are_bijections(self):
        dofs = domain.enumerate_dofs(make_lshape(0.5))
        for family, which in (("nodes", "active"), ("edges", "interior"),
                              ("faces", "interior"), ("cells", "active")):
            idx = dofs.index_map(family, which)
            assigned = idx[idx >= 0]
            assert np.array_equal(np.sort(assigned), np.arange(len(assigned)))


class TestDiameter:
    def test_brick(self):
        assert domain.diameter(domain.make_box((1, 2, 3), 0.5)) == pytest.approx(
            math.sqrt(14), rel=1e-14
        )

    def test_pi_cube(self):
        spec = domain.make_box((math.pi,) * 3, math.pi / 2)
        assert domain.diameter(spec) == pytest.approx(math.pi * math.sqrt(3), rel=1e-14)

    def test_lshape_against_node_bruteforce(self):
        spec = make_lshape(0.5)
        dofs = domain.enumerate_dofs(spec)
        nz, ny, nx = dofs.node_active.shape
        coords = np.array([
            (i * spec.h, j * spec.h, k * spec.h)
            for k in range(nz) for j in range(ny) for i in range(nx)
            if dofs.node_active[k, j, i]
        ])
        diff = coords[:, None, :] - coords[None, :, :]
        brute = float(np.sqrt((diff ** 2).sum(axis=2)).max())
        assert domain.diameter(spec) == pytest.approx(brute, rel=1e-14)
        assert domain.diameter(spec) == pytest.approx(3.0, rel=1e-14)

    def test_union_dominates_member_boxes(self):
        spec = make_lshape(0.5)
        for origin, sides in L_SHAPE_BOXES:
            member = domain.make_box(sides, 0.5)
            assert domain.diameter(spec) >= domain.diameter(member)


class TestPackUnpack:
    def test_roundtrip(self):
        dofs = domain.enumerate_dofs(domain.make_box((1, 1, 1), 0.5))
        rng = np.random.default_rng(3)
        vec = rng.standard_normal(dofs.n_interior_edges)
        grids = domain.unpack_fields(vec, dofs.edge_interior)
        assert np.array_equal(domain.pack_fields(grids, dofs.edge_interior), vec)

    def test_length_mismatch_rejected(self):
        dofs = domain.enumerate_dofs(domain.make_box((1, 1, 1), 0.5))
        with pytest.raises(InvalidArgument):
            domain.unpack_fields(np.zeros(5), dofs.edge_interior)
