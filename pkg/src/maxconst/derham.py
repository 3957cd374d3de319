"""Discrete de Rham operators on the staggered lattice.

Gradient, curl and divergence are incidence matrices of the lattice scaled
by 1/h; boundary conditions are imposed by deleting boundary DOFs (mask
slicing), never by penalties.  Every operator keeps its integer incidence
alongside the scaled real matrix so that complex identities
(curl grad = 0, weak-curl div* = 0, 2D rot/div duality) can be checked in
exact integer arithmetic.

The four symmetric operators assembled here carry the spectral content:
``L_D`` (Dirichlet node Laplacian), ``L_N`` (Neumann cell Laplacian) and the
Maxwell operators ``A_t`` (tangential-zero edge fields) and ``A_n``
(normal-zero face fields), with the exact lifts A_t G = G L_D and
A_n D* = D* L_N.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.io import mmwrite

from .errors import ExactnessViolation, InvalidArgument, ResolutionTooCoarse


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """A real sparse operator that is an integer incidence pattern times a scalar.

    ``matrix`` (CSR, float) is what acts on vectors; ``incidence`` is the
    exact integer structure used for bit-exact identity checks and for
    products, which are always formed in integer arithmetic.
    """

    incidence: sparse.csr_matrix
    scale: float

    @classmethod
    def from_integer(cls, matrix_like, scale=1.0):
        inc = sparse.csr_matrix(matrix_like, dtype=np.int64)
        inc.eliminate_zeros()
        return cls(inc, float(scale))

    @cached_property
    def matrix(self):
        return self.incidence.astype(np.float64) * self.scale

    @property
    def shape(self):
        return self.incidence.shape

    @property
    def rows(self):
        return self.incidence.shape[0]

    @property
    def cols(self):
        return self.incidence.shape[1]

    @property
    def nnz(self):
        return self.incidence.nnz

    @property
    def is_empty(self):
        return self.rows == 0 or self.cols == 0

    @property
    def T(self):
        return SparseOperator(self.incidence.T.tocsr(), self.scale)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            inc = (self.incidence @ other.incidence).tocsr()
            inc.eliminate_zeros()
            return SparseOperator(inc, self.scale * other.scale)
        return self.matrix @ other

    def __add__(self, other):
        if self.scale != other.scale:
            raise InvalidArgument(
                f"cannot add operators with scales {self.scale!r} and {other.scale!r}"
            )
        inc = (self.incidence + other.incidence).tocsr()
        inc.eliminate_zeros()
        return SparseOperator(inc, self.scale)

    def apply(self, x):
        return self.matrix @ x

    def to_dense(self):
        return self.matrix.toarray()

    def is_symmetric(self):
        """Bit-exact symmetry of the integer incidence."""
        if self.rows != self.cols:
            return False
        diff = (self.incidence - self.incidence.T).tocsr()
        diff.eliminate_zeros()
        return diff.nnz == 0

    def max_abs_entry(self):
        """Largest |integer incidence entry|; 0 for an all-zero pattern."""
        inc = self.incidence.copy()
        inc.eliminate_zeros()
        return int(np.abs(inc.data).max()) if inc.nnz else 0


def _eye(n):
    return sparse.identity(n, dtype=np.int64, format="csr")


def _diff(n):
    """1D difference: n cells from n+1 nodes, row i = value(i+1) - value(i)."""
    data = np.tile(np.array([-1, 1], dtype=np.int64), n)
    indices = np.repeat(np.arange(n, dtype=np.int64), 2) + np.tile(np.array([0, 1]), n)
    indptr = 2 * np.arange(n + 1, dtype=np.int64)
    return sparse.csr_matrix((data, indices, indptr), shape=(n, n + 1))


def _kron3(a, b, c):
    return sparse.kron(a, sparse.kron(b, c, format="csr"), format="csr")


def _grad_full_3d(cells):
    nx, ny, nz = cells
    gx = _kron3(_eye(nz + 1), _eye(ny + 1), _diff(nx))
    gy = _kron3(_eye(nz + 1), _diff(ny), _eye(nx + 1))
    gz = _kron3(_diff(nz), _eye(ny + 1), _eye(nx + 1))
    return sparse.vstack([gx, gy, gz], format="csr")


def _curl_full_3d(cells):
    """All lattice faces from all lattice edges, component blocks x, y, z."""
    nx, ny, nz = cells
    dy_ez = _kron3(_eye(nz), _diff(ny), _eye(nx + 1))    # x-faces <- z-edges
    dz_ey = _kron3(_diff(nz), _eye(ny), _eye(nx + 1))    # x-faces <- y-edges
    dz_ex = _kron3(_diff(nz), _eye(ny + 1), _eye(nx))    # y-faces <- x-edges
    dx_ez = _kron3(_eye(nz), _eye(ny + 1), _diff(nx))    # y-faces <- z-edges
    dy_ex = _kron3(_eye(nz + 1), _diff(ny), _eye(nx))    # z-faces <- x-edges
    dx_ey = _kron3(_eye(nz + 1), _eye(ny), _diff(nx))    # z-faces <- y-edges
    return sparse.bmat(
        [
            [None, -dz_ey, dy_ez],
            [dz_ex, None, -dx_ez],
            [-dy_ex, dx_ey, None],
        ],
        format="csr",
    )


def _div_full_3d(cells):
    nx, ny, nz = cells
    dx = _kron3(_eye(nz), _eye(ny), _diff(nx))
    dy = _kron3(_eye(nz), _diff(ny), _eye(nx))
    dz = _kron3(_diff(nz), _eye(ny), _eye(nx))
    return sparse.hstack([dx, dy, dz], format="csr")


def _grad_full_2d(cells):
    nx, ny = cells
    gx = sparse.kron(_eye(ny + 1), _diff(nx), format="csr")
    gy = sparse.kron(_diff(ny), _eye(nx + 1), format="csr")
    return sparse.vstack([gx, gy], format="csr")


def _rot_full_2d(cells):
    """Scalar curl: cells from edges, dx Ey - dy Ex."""
    nx, ny = cells
    dy_ex = sparse.kron(_diff(ny), _eye(nx), format="csr")
    dx_ey = sparse.kron(_eye(ny), _diff(nx), format="csr")
    return sparse.hstack([-dy_ex, dx_ey], format="csr")


def _div_full_2d(cells):
    nx, ny = cells
    dx_hx = sparse.kron(_eye(ny), _diff(nx), format="csr")
    dy_hy = sparse.kron(_diff(ny), _eye(nx), format="csr")
    return sparse.hstack([dx_hx, dy_hy], format="csr")


def _require_dim(dofs, d):
    if dofs.dim != d:
        raise InvalidArgument(f"expected a {d}D domain, got {dofs.dim}D ({dofs.spec.kind})")


def _slice(full, row_mask, col_mask, scale):
    inc = full[np.flatnonzero(row_mask)][:, np.flatnonzero(col_mask)].tocsr()
    inc.eliminate_zeros()
    return SparseOperator(inc, scale)


def build_gradient(dofs):
    """Strong gradient with Dirichlet mask: interior nodes -> interior edges.

    Rows for edges touching boundary nodes keep only the interior endpoint
    term (the boundary value is zero).  With no interior nodes the operator
    is empty; assembly rejects that downstream.
    """
    _require_dim(dofs, 3)
    full = _grad_full_3d(dofs.spec.cells)
    return _slice(full, dofs.edges_interior_flat, dofs.nodes_interior_flat, 1.0 / dofs.h)


def build_curl(dofs):
    """Strong curl of tangential-zero fields and the weak curl.

    ``C_t``: circulation of interior-edge fields around every active face
    (boundary edges contribute zero).  ``W_n``: for each interior edge the
    signed sum of interior-face values of the faces it bounds.
    """
    _require_dim(dofs, 3)
    full = _curl_full_3d(dofs.spec.cells)
    c_t = _slice(full, dofs.faces_active_flat, dofs.edges_interior_flat, 1.0 / dofs.h)
    w_n = _slice(full.T.tocsr(), dofs.edges_interior_flat, dofs.faces_interior_flat, 1.0 / dofs.h)
    return c_t, w_n


def build_divergence(dofs):
    """Strong divergence of normal-zero fields: interior faces -> cells."""
    _require_dim(dofs, 3)
    full = _div_full_3d(dofs.spec.cells)
    return _slice(full, dofs.cells_active_flat, dofs.faces_interior_flat, 1.0 / dofs.h)


@dataclass(frozen=True, eq=False)
class OperatorBundle:
    """The masked complex operators and the four symmetric forms built from them."""

    dofs: object
    G_hat: SparseOperator
    C_t: SparseOperator
    W_n: SparseOperator
    D_act: SparseOperator
    A_t: SparseOperator
    A_n: SparseOperator
    L_D: SparseOperator
    L_N: SparseOperator

    def operator(self, name):
        try:
            return {"L_D": self.L_D, "L_N": self.L_N, "A_t": self.A_t, "A_n": self.A_n}[name]
        except KeyError:
            raise InvalidArgument(f"unknown operator {name!r}; use L_D, L_N, A_t or A_n") from None

    @property
    def h(self):
        return self.dofs.h


def assemble_operators(dofs):
    """Assemble the operator bundle; rejects grids with empty interior sets."""
    _require_dim(dofs, 3)
    missing = [
        name
        for name, n in (
            ("interior nodes", dofs.n_interior_nodes),
            ("interior edges", dofs.n_interior_edges),
            ("interior faces", dofs.n_interior_faces),
        )
        if n == 0
    ]
    if missing:
        raise ResolutionTooCoarse(
            f"resolution too coarse: no {', '.join(missing)} at h={dofs.h!r}"
        )
    g_hat = build_gradient(dofs)
    c_t, w_n = build_curl(dofs)
    d_act = build_divergence(dofs)
    return OperatorBundle(
        dofs=dofs,
        G_hat=g_hat,
        C_t=c_t,
        W_n=w_n,
        D_act=d_act,
        A_t=(c_t.T @ c_t) + (g_hat @ g_hat.T),
        A_n=(w_n.T @ w_n) + (d_act.T @ d_act),
        L_D=g_hat.T @ g_hat,
        L_N=d_act @ d_act.T,
    )


@dataclass(frozen=True)
class ExactnessReport:
    curl_grad_max: int
    weakcurl_div_max: int

    @property
    def ok(self):
        return self.curl_grad_max == 0 and self.weakcurl_div_max == 0


def exactness_check(bundle):
    """Verify C_t G_hat = 0 and W_n D_act^T = 0 in integer arithmetic.

    A nonzero entry is an implementation bug, not a tolerance issue, and
    raises :class:`ExactnessViolation`.
    """
    cg = (bundle.C_t @ bundle.G_hat).max_abs_entry()
    wd = (bundle.W_n @ bundle.D_act.T).max_abs_entry()
    report = ExactnessReport(curl_grad_max=cg, weakcurl_div_max=wd)
    if not report.ok:
        raise ExactnessViolation(
            f"complex identity violated: |C_t G_hat|_max={cg}, |W_n D_act^T|_max={wd}"
        )
    return report


def build_2d_complex(dofs):
    """2D masked operators (G2, C2, R90).

    G2: interior nodes -> interior edges; C2: scalar curl, interior edges ->
    cells; R90 is the signed permutation sending an interior edge field
    (Ex, Ey) to the co-located interior face field (Ey, -Ex), under which
    the scalar curl becomes the divergence: C2 = D2 R90 holds entrywise.
    """
    _require_dim(dofs, 2)
    scale = 1.0 / dofs.h
    g2 = _slice(_grad_full_2d(dofs.spec.cells), dofs.edges_interior_flat,
                dofs.nodes_interior_flat, scale)
    c2 = _slice(_rot_full_2d(dofs.spec.cells), dofs.cells_active_flat,
                dofs.edges_interior_flat, scale)
    n_ex = int(dofs.edge_interior[0].sum())
    n_ey = int(dofs.edge_interior[1].sum())
    r90 = SparseOperator(
        sparse.bmat(
            [
                [None, _eye(n_ey)],          # Hx rows <- Ey
                [-_eye(n_ex), None],         # Hy rows <- Ex
            ],
            format="csr",
        ),
        1.0,
    )
    return g2, c2, r90


def build_2d_divergence(dofs):
    """2D divergence of normal-zero fields: interior faces -> cells."""
    _require_dim(dofs, 2)
    return _slice(_div_full_2d(dofs.spec.cells), dofs.cells_active_flat,
                  dofs.faces_interior_flat, 1.0 / dofs.h)


def export_matrix_market(bundle, directory):
    """Dump every bundle operator as a Matrix Market coordinate file."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for name in ("G_hat", "C_t", "W_n", "D_act", "A_t", "A_n", "L_D", "L_N"):
        path = os.path.join(directory, f"{name}.mtx")
        mmwrite(path, getattr(bundle, name).matrix)
        written.append(path)
    return written
