"""Smallest eigenpairs of symmetric positive semidefinite sparse operators.

The iterative path is shift-invert Lanczos at shift zero: each step applies
the inverse through an inner conjugate-gradient solve, with full
reorthogonalization of the Lanczos basis and explicit residual checks on the
original operator before any pair is accepted.  Known kernels are removed by
deflation; multiple eigenpairs are extracted sequentially, deflating each
converged eigenvector, which keeps degenerate eigenvalues honest.  Problems
of dimension <= 200 fall back to dense diagonalization.

Start vectors are drawn from a fixed-seed generator and the seed is recorded
in the result, so repeated runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import sparse

from .derham import SparseOperator
from .errors import ConvergenceFailure, InvalidArgument

DEFAULT_SEED = 12648430
DENSE_LIMIT = 200


@dataclass
class SpectrumResult:
    """Ascending smallest eigenvalues with unit eigenvectors and diagnostics."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray        # column per pair
    residuals: np.ndarray           # ||A x - lambda x||
    converged: np.ndarray
    matvecs: int
    inner_iterations: list = field(default_factory=list)
    seed: int = DEFAULT_SEED
    method: str = "lanczos"

    @property
    def k(self):
        return len(self.eigenvalues)


def _as_csr(A):
    if isinstance(A, SparseOperator):
        return A.matrix
    if sparse.issparse(A):
        return A.tocsr().astype(np.float64)
    return sparse.csr_matrix(np.asarray(A, dtype=np.float64))


def _check_symmetric(A, mat):
    if mat.shape[0] != mat.shape[1]:
        raise InvalidArgument(f"operator must be square, got {mat.shape}")
    if isinstance(A, SparseOperator):
        if not A.is_symmetric():
            raise InvalidArgument("operator is not symmetric (integer incidence check)")
        return
    diff = (mat - mat.T).tocsr()
    top = np.abs(diff.data).max() if diff.nnz else 0.0
    ref = np.abs(mat.data).max() if mat.nnz else 1.0
    if top > 1e-12 * max(1.0, ref):
        raise InvalidArgument("operator is not symmetric")


def cg_solve(mat, b, rtol=1e-12, maxiter=50000, project=None, counter=None):
    """Conjugate gradients for an SPD (or deflated PSD) sparse matrix.

    ``project`` is applied to the right-hand side and every residual to hold
    iterates in the orthogonal complement of a known kernel.  Raises
    :class:`ConvergenceFailure` on iteration cap or stagnation.
    """
    b = np.asarray(b, dtype=np.float64)
    if project is not None:
        b = project(b)
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x, 0
    threshold = rtol * bnorm
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    best = np.sqrt(rs)
    best_iter = 0
    for it in range(1, maxiter + 1):
        Ap = mat @ p
        if counter is not None:
            counter.n += 1
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise ConvergenceFailure(
                "CG breakdown: operator not positive definite on the working subspace",
                {"iteration": it, "pAp": pAp},
            )
        alpha = rs / pAp
        x += alpha * p
        r -= alpha * Ap
        if project is not None:
            r = project(r)
        rs_new = float(r @ r)
        rnorm = np.sqrt(rs_new)
        if rnorm <= threshold:
            return x, it
        if rnorm < best:
            best = rnorm
            best_iter = it
        elif it - best_iter > 400:
            raise ConvergenceFailure(
                "inner CG stagnation",
                {"iteration": it, "residual": rnorm, "best": best, "target": threshold},
            )
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise ConvergenceFailure(
        "inner CG iteration cap reached",
        {"iteration": maxiter, "residual": np.sqrt(rs), "target": threshold},
    )


class _Matvecs:
    __slots__ = ("n",)

    def __init__(self):
        self.n = 0


def _orthonormal(vectors, n):
    """Orthonormal basis of the span of ``vectors`` (possibly empty)."""
    if not vectors:
        return np.zeros((n, 0))
    V = np.column_stack([np.asarray(v, dtype=np.float64) for v in vectors])
    q, r = np.linalg.qr(V)
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())
    return q[:, keep]


def _dense_complement_basis(n, defl, projector):
    """Orthonormal basis of the working subspace for the dense path."""
    basis = np.eye(n)
    if projector is not None:
        basis = np.column_stack([projector(basis[:, j]) for j in range(n)])
    if defl.shape[1]:
        basis = basis - defl @ (defl.T @ basis)
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    return u[:, s > 0.5]


def _dense_smallest(mat, k, defl, projector, tol, counter):
    n = mat.shape[0]
    Q = _dense_complement_basis(n, defl, projector)
    if k > Q.shape[1]:
        raise InvalidArgument(
            f"k={k} exceeds the active dimension {Q.shape[1]} after deflation"
        )
    dense = mat.toarray()
    B = Q.T @ dense @ Q
    B = 0.5 * (B + B.T)
    vals, vecs = np.linalg.eigh(B)
    X = Q @ vecs[:, :k]
    lams = vals[:k].astype(np.float64)
    residuals = np.empty(k)
    for j in range(k):
        X[:, j] /= np.linalg.norm(X[:, j])
        Ax = mat @ X[:, j]
        counter.n += 1
        lams[j] = float(X[:, j] @ Ax)
        residuals[j] = np.linalg.norm(Ax - lams[j] * X[:, j])
    converged = residuals <= tol * np.maximum(1.0, np.abs(lams))
    return lams, X, residuals, converged


def _lanczos_smallest_pair(mat, project, cheap_project, tol, rng, max_steps,
                           inner_rtol, inner_maxiter, counter, inner_iters):
    """One smallest eigenpair of ``mat`` restricted to the projected subspace."""
    n = mat.shape[0]
    v = project(rng.standard_normal(n))
    nv = np.linalg.norm(v)
    if nv < 1e-12:
        raise InvalidArgument("projected start vector vanished; working subspace empty")
    v /= nv
    Q = np.empty((n, max_steps))
    Q[:, 0] = v
    alphas = []
    betas = []
    history = []
    for step in range(max_steps):
        q = Q[:, step]
        w, its = cg_solve(mat, q, rtol=inner_rtol, maxiter=inner_maxiter,
                          project=cheap_project, counter=counter)
        inner_iters.append(its)
        w = project(w)
        a = float(q @ w)
        w -= a * q
        if step > 0:
            w -= betas[-1] * Q[:, step - 1]
        basis = Q[:, :step + 1]
        for _ in range(2):
            w -= basis @ (basis.T @ w)
        alphas.append(a)
        b = float(np.linalg.norm(w))

        if len(alphas) == 1:
            theta = np.array([alphas[0]])
            S = np.ones((1, 1))
        else:
            theta, S = scipy.linalg.eigh_tridiagonal(alphas, betas)
        top = int(np.argmax(theta))
        if theta[top] > 0.0:
            y = basis @ S[:, top]
            y = project(y)
            ny = np.linalg.norm(y)
            if ny > 1e-12:
                y /= ny
                Ay = mat @ y
                counter.n += 1
                lam = float(y @ Ay)
                res = float(np.linalg.norm(Ay - lam * y))
                history.append((lam, res))
                if res <= tol * max(1.0, abs(lam)):
                    return lam, y, res
        if b <= 1e-13:
            raise ConvergenceFailure(
                "Lanczos breakdown before reaching the residual tolerance",
                {"step": step + 1, "beta": b, "history": history[-3:]},
            )
        if step + 1 < max_steps:
            betas.append(b)
            Q[:, step + 1] = w / b
    raise ConvergenceFailure(
        "Lanczos iteration cap reached before convergence",
        {"steps": max_steps, "history": history[-3:]},
    )


def smallest_eigenpairs(A, k, deflation=(), tol=1e-8, *, seed=DEFAULT_SEED,
                        method="auto", projector=None, max_steps=160,
                        inner_rtol=None, inner_maxiter=50000):
    """The ``k`` smallest eigenpairs of symmetric ``A`` off a known kernel.

    ``deflation`` vectors span the kernel (or any subspace to exclude);
    ``projector``, when given, restricts the problem to an invariant subspace
    (applied to the start vector and after every inverse application).
    Convergence per pair means ||A x - lambda x|| <= tol * max(1, lambda).
    """
    if not (0.0 < tol <= 1e-4):
        raise InvalidArgument(f"tol must lie in (0, 1e-4], got {tol!r}")
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    mat = _as_csr(A)
    _check_symmetric(A, mat)
    n = mat.shape[0]
    defl = _orthonormal(list(deflation), n)
    if k > n - defl.shape[1]:
        raise InvalidArgument(
            f"k={k} exceeds the active dimension {n - defl.shape[1]}"
        )
    counter = _Matvecs()

    if method not in ("auto", "dense", "lanczos"):
        raise InvalidArgument(f"unknown method {method!r}")
    if method == "dense" or (method == "auto" and n <= DENSE_LIMIT):
        lams, X, residuals, converged = _dense_smallest(mat, k, defl, projector, tol, counter)
        return SpectrumResult(
            eigenvalues=lams, eigenvectors=X, residuals=residuals,
            converged=converged, matvecs=counter.n, inner_iterations=[],
            seed=seed, method="dense",
        )

    if inner_rtol is None:
        inner_rtol = max(min(1e-12, tol * 1e-4), 1e-14)
    rng = np.random.default_rng(seed)
    inner_iters = []
    found_vals = []
    found_vecs = []

    def cheap_project(x):
        if defl.shape[1]:
            x = x - defl @ (defl.T @ x)
        for u in found_vecs:
            x = x - (u @ x) * u
        return x

    def project(x):
        x = cheap_project(x)
        if projector is not None:
            x = projector(x)
            x = cheap_project(x)
        return x

    steps = min(max_steps, n)
    for _ in range(k):
        lam, y, res = _lanczos_smallest_pair(
            mat, project, cheap_project, tol, rng, steps,
            inner_rtol, inner_maxiter, counter, inner_iters,
        )
        found_vals.append(lam)
        found_vecs.append(y)

    order = np.argsort(found_vals)
    lams = np.array([found_vals[i] for i in order])
    X = np.column_stack([found_vecs[i] for i in order])
    residuals = np.empty(k)
    for j in range(k):
        Ax = mat @ X[:, j]
        counter.n += 1
        residuals[j] = np.linalg.norm(Ax - lams[j] * X[:, j])
    return SpectrumResult(
        eigenvalues=lams, eigenvectors=X,
        residuals=residuals,
        converged=residuals <= tol * np.maximum(1.0, np.abs(lams)),
        matvecs=counter.n, inner_iterations=inner_iters,
        seed=seed, method="lanczos",
    )


def rayleigh_quotient(A, x):
    """x^T A x / x^T x for a nonzero vector."""
    x = np.asarray(x, dtype=np.float64)
    xx = float(x @ x)
    if xx == 0.0:
        raise InvalidArgument("Rayleigh quotient of the zero vector")
    mat = _as_csr(A)
    return float(x @ (mat @ x)) / xx


def residual(A, lam, x):
    """||A x - lambda x|| for a (presumed unit) vector."""
    x = np.asarray(x, dtype=np.float64)
    mat = _as_csr(A)
    return float(np.linalg.norm(mat @ x - lam * x))
