"""Continuous algebraic Riccati equation for small dense systems.

The stabilizing solution is read off the stable invariant subspace of the Hamiltonian
matrix, found with an ordered real Schur decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.linalg import schur

from aebsim._errors import InvalidParameter, RiccatiError

type Matrix = npt.NDArray[np.float64]
"""A two-dimensional float64 array."""

RESIDUAL_TOLERANCE = 1e-9
CONDITION_LIMIT = 1e12


def _as_matrix(name: str, value: npt.ArrayLike) -> Matrix:
    matrix = np.atleast_2d(np.asarray(value, dtype=np.float64))
    if matrix.ndim != 2:
        msg = f"must be two-dimensional, got shape {matrix.shape}"
        raise InvalidParameter(msg, field=name)
    if not np.all(np.isfinite(matrix)):
        msg = "must be finite"
        raise InvalidParameter(msg, field=name)
    return matrix


@dataclass(frozen=True, eq=False)
class CareProblem:
    """``A'P + PA - P B R^-1 B' P + Q = 0`` for an ``n``-state, ``m``-input system."""

    A: Matrix
    B: Matrix
    Q: Matrix
    R: Matrix

    def __post_init__(self) -> None:
        for name in ("A", "B", "Q", "R"):
            object.__setattr__(self, name, _as_matrix(name, getattr(self, name)))
        n, m = self.n, self.m
        if self.A.shape != (n, n):
            msg = f"must be square, got shape {self.A.shape}"
            raise InvalidParameter(msg, field="A")
        if self.B.shape[0] != n:
            msg = f"must have {n} rows, got shape {self.B.shape}"
            raise InvalidParameter(msg, field="B")
        if self.Q.shape != (n, n):
            msg = f"must have shape {(n, n)}, got {self.Q.shape}"
            raise InvalidParameter(msg, field="Q")
        if self.R.shape != (m, m):
            msg = f"must have shape {(m, m)}, got {self.R.shape}"
            raise InvalidParameter(msg, field="R")
        if not np.allclose(self.Q, self.Q.T, rtol=1e-12, atol=1e-12):
            msg = "must be symmetric"
            raise InvalidParameter(msg, field="Q")
        if not np.allclose(self.R, self.R.T, rtol=1e-12, atol=1e-12):
            msg = "must be symmetric"
            raise InvalidParameter(msg, field="R")
        if np.any(np.linalg.eigvalsh(self.R) <= 0) or np.linalg.cond(self.R) >= CONDITION_LIMIT:
            msg = "must be positive definite and well conditioned"
            raise InvalidParameter(msg, field="R")

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @property
    def m(self) -> int:
        return int(self.B.shape[1])

    def hamiltonian(self) -> Matrix:
        G = self.B @ np.linalg.solve(self.R, self.B.T)
        return np.block([[self.A, -G], [-self.Q, -self.A.T]])

    def residual(self, P: Matrix) -> Matrix:
        G = self.B @ np.linalg.solve(self.R, self.B.T)
        return self.A.T @ P + P @ self.A - P @ G @ P + self.Q


@dataclass(frozen=True, eq=False)
class CareSolution:
    P: Matrix
    K: Matrix
    residual_norm: float

    def closed_loop(self, problem: CareProblem) -> Matrix:
        return problem.A - problem.B @ self.K


def solve_care(problem: CareProblem) -> CareSolution:
    """Stabilizing solution ``P`` and the optimal gain ``K = R^-1 B' P``.

    Raises:
        RiccatiError: if the Hamiltonian has eigenvalues on the imaginary axis, the stable
            subspace is ill-conditioned, or the result fails the residual or stability checks.
            The Hamiltonian eigenvalues are attached for diagnosis.
    """
    n = problem.n
    H = problem.hamiltonian()
    T, Z, sdim = schur(H, output="real", sort="lhp")
    eigenvalues = np.linalg.eigvals(T)

    if sdim != n:
        msg = f"Hamiltonian has {sdim} stable eigenvalues, expected {n}"
        raise RiccatiError(msg, eigenvalues.tolist())

    U11 = Z[:n, :n]
    U21 = Z[n:, :n]
    if np.linalg.cond(U11) >= CONDITION_LIMIT:
        msg = "stable invariant subspace is ill-conditioned"
        raise RiccatiError(msg, eigenvalues.tolist())

    P = np.linalg.solve(U11.T, U21.T).T
    P = (P + P.T) / 2

    residual_norm = float(np.linalg.norm(problem.residual(P)))
    if residual_norm >= RESIDUAL_TOLERANCE * (1 + float(np.linalg.norm(problem.Q))):
        msg = f"Riccati residual {residual_norm:.3e} exceeds tolerance"
        raise RiccatiError(msg, eigenvalues.tolist())

    K = np.linalg.solve(problem.R, problem.B.T @ P)
    closed_loop = np.linalg.eigvals(problem.A - problem.B @ K)
    if np.any(closed_loop.real >= 0):
        msg = f"closed loop is not Hurwitz: eigenvalues {closed_loop.tolist()}"
        raise RiccatiError(msg, eigenvalues.tolist())

    return CareSolution(P=P, K=K, residual_norm=residual_norm)
