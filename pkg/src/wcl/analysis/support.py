"""Supports of the point-evaluation functionals δ_y∘T."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..funcspace import DEFAULT_TOL
from ..operator import INFINITY
from ..space import distances_from, tail_points

DEFAULT_RADII = (4, 2, 1)


@dataclass(frozen=True)
class FunctionalSupport:
    """supp(δ_y∘T): the points of X_∞ near which f can still move Tf(y)."""

    y: int
    candidates: tuple

    @property
    def singleton(self):
        return len(self.candidates) == 1

    @property
    def point(self):
        if not self.singleton:
            raise ValueError(f"support of δ_{self.y}∘T is {self.candidates}, not a singleton")
        return self.candidates[0]

    def to_dict(self):
        return {"y": self.y, "candidates": ["inf" if c == INFINITY else c for c in self.candidates]}


def _row_support(X, row, tol, radii):
    """Candidates from one functional given by its row vector.

    Probing is done through linearity: for f on X, Tf(y) = row·f.  At each
    radius the probes are the spikes e_x' with x' in the open ball around x
    (a wider hat could cancel entries, a spike cannot); x survives when some
    probe sees a value above eps_zero at every radius.
    """
    nz = np.flatnonzero(np.abs(row) > tol.eps_zero)
    inf = X.infinity_index
    finite_nz = nz[nz != inf] if inf is not None else nz
    cands = []
    if len(finite_nz):
        alive = None
        for r in radii:
            rho = r * X.mesh
            seen = np.zeros(X.size, dtype=bool)
            for z in finite_nz:
                seen |= distances_from(X, int(z)) < rho * (1 - 1e-9)
            alive = seen if alive is None else (alive & seen)
        cands = [int(x) for x in np.flatnonzero(alive & X.finite_mask)]
    at_inf = False
    if inf is not None and inf in nz:
        at_inf = True
    elif X.tail_levels:
        # Tail probes avoid the finite candidates, whose singletons are
        # neighbourhoods in the sampled model.
        mask = np.zeros(X.size, dtype=bool)
        mask[nz] = True
        mask[cands] = False
        at_inf = all(mask[tail_points(X, lvl)].any() for lvl in X.tail_levels)
    if at_inf:
        cands.append(INFINITY)
    return tuple(cands)


def functional_support(T, y, tol=DEFAULT_TOL, radii=DEFAULT_RADII):
    return FunctionalSupport(int(y), _row_support(T.domain, np.asarray(T.row(y)), tol, radii))


def functional_supports(T, rows=None, tol=DEFAULT_TOL, radii=DEFAULT_RADII):
    """functional_support for several rows, sharing the dense matrix."""
    A = T.to_matrix()
    rows = range(A.shape[0]) if rows is None else rows
    return [FunctionalSupport(int(y), _row_support(T.domain, A[y], tol, radii)) for y in rows]
