"""The four constants of a domain and their closed-form box counterparts.

The Friedrichs constant is 1/sqrt(lambda_1) with lambda_1 the smallest
Dirichlet node-Laplacian eigenvalue; the Poincare constant is 1/sqrt(mu_2)
with mu_2 the smallest nonzero Neumann cell-Laplacian eigenvalue; the two
Maxwell constants are the reciprocal square roots of the smallest A_t / A_n
eigenvalues.  The normal Maxwell constant is always computed from A_n
independently: its equality with the Poincare constant is the statement
under test, never an assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import domain as domain_mod
from .derham import assemble_operators
from .eigensolve import DEFAULT_SEED, smallest_eigenpairs
from .errors import InvalidArgument

DEFAULT_TOL = 1e-8


@dataclass
class ConstantsReport:
    """Computed (or oracle) constants with the eigenvalues behind them."""

    domain: dict
    label: str
    kind: str
    h: float | None
    convex: bool
    cp0: float
    cp: float
    cmt: float
    cmn: float
    lambda1: float
    mu2: float
    nu_t: float
    nu_n: float
    diam_over_pi: float
    residuals: dict
    solver: dict
    analytic: "ConstantsReport | None" = None
    is_oracle: bool = False
    experimental: bool = False

    @property
    def margin_cmt_cp0(self):
        return self.cmt - self.cp0

    @property
    def margin_cmn_cmt(self):
        return self.cmn - self.cmt

    def to_json_dict(self):
        return {
            "domain": dict(self.domain, label=self.label, experimental=self.experimental),
            "h": self.h,
            "constants": {"cp0": self.cp0, "cp": self.cp, "cmt": self.cmt, "cmn": self.cmn},
            "eigenvalues": {
                "lambda1": self.lambda1,
                "mu2": self.mu2,
                "nu_t": self.nu_t,
                "nu_n": self.nu_n,
            },
            "diam_over_pi": self.diam_over_pi,
            "margins": {"cmt_minus_cp0": self.margin_cmt_cp0, "cmn_minus_cmt": self.margin_cmn_cmt},
            "analytic": self.analytic.to_json_dict() if self.analytic is not None else None,
            "is_oracle": self.is_oracle,
            "residuals": self.residuals,
            "solver": self.solver,
        }


def analytic_box_constants(sides):
    """Closed-form constants of a box from separation of variables.

    lambda_1 = pi^2 sum 1/s_i^2, mu_2 = pi^2 / max(s)^2 and the tangential
    Maxwell minimum pi^2 (1/p^2 + 1/q^2) over the two largest sides p >= q.
    The normal Maxwell minimum coincides with mu_2 (the cavity modes lie
    above it), so cmn equals cp here.  Marked as oracle values.
    """
    sides = tuple(float(s) for s in sides)
    if len(sides) != 3:
        raise InvalidArgument(f"expected 3 side lengths, got {len(sides)}")
    for s in sides:
        if not (s > 0):
            raise InvalidArgument(f"side lengths must be positive, got {s!r}")
    pi2 = math.pi ** 2
    lambda1 = pi2 * sum(1.0 / s ** 2 for s in sides)
    mu2 = pi2 / max(sides) ** 2
    p, q = sorted(sides)[-2:]
    nu_t = pi2 * (1.0 / p ** 2 + 1.0 / q ** 2)
    nu_n = mu2
    return ConstantsReport(
        domain={"kind": "box3", "boxes": [{"origin": [0.0, 0.0, 0.0], "sides": list(sides)}],
                "h": None, "convex": True},
        label=f"box3[{'x'.join(format(s, 'g') for s in sides)}]",
        kind="box3",
        h=None,
        convex=True,
        cp0=1.0 / math.sqrt(lambda1),
        cp=1.0 / math.sqrt(mu2),
        cmt=1.0 / math.sqrt(nu_t),
        cmn=1.0 / math.sqrt(nu_n),
        lambda1=lambda1,
        mu2=mu2,
        nu_t=nu_t,
        nu_n=nu_n,
        diam_over_pi=math.sqrt(sum(s ** 2 for s in sides)) / math.pi,
        residuals={},
        solver={},
        analytic=None,
        is_oracle=True,
    )


def payne_weinberger_bound(spec):
    """diam(domain) / pi, the convex-domain upper bound for the Poincare constant."""
    return domain_mod.diameter(spec) / math.pi


def compute_constants(spec, tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    """Compute all constants of a 3D domain at its grid resolution."""
    if spec.dim != 3:
        raise InvalidArgument("compute_constants requires a 3D domain")
    dofs = domain_mod.enumerate_dofs(spec)
    bundle = assemble_operators(dofs)

    solves = {
        "lambda1": (bundle.L_D, []),
        "mu2": (bundle.L_N, [np.ones(bundle.L_N.rows)]),
        "nu_t": (bundle.A_t, []),
        "nu_n": (bundle.A_n, []),
    }
    values = {}
    residuals = {}
    matvecs = {}
    inner = {}
    for name, (op, deflation) in solves.items():
        result = smallest_eigenpairs(op, 1, deflation=deflation, tol=tol, seed=seed)
        values[name] = float(result.eigenvalues[0])
        residuals[name] = float(result.residuals[0])
        matvecs[name] = result.matvecs
        inner[name] = len(result.inner_iterations)

    analytic = analytic_box_constants(spec.sides) if spec.kind == "box3" else None
    return ConstantsReport(
        domain=spec.as_dict(),
        label=spec.label(),
        kind=spec.kind,
        h=spec.h,
        convex=spec.convex,
        cp0=1.0 / math.sqrt(values["lambda1"]),
        cp=1.0 / math.sqrt(values["mu2"]),
        cmt=1.0 / math.sqrt(values["nu_t"]),
        cmn=1.0 / math.sqrt(values["nu_n"]),
        lambda1=values["lambda1"],
        mu2=values["mu2"],
        nu_t=values["nu_t"],
        nu_n=values["nu_n"],
        diam_over_pi=payne_weinberger_bound(spec),
        residuals=residuals,
        solver={"tol": tol, "seed": seed, "matvecs": matvecs, "inner_solves": inner},
        analytic=analytic,
        is_oracle=False,
        experimental=spec.kind == "union3",
    )
