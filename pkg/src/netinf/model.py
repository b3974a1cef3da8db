"""Input-dependent linear Gaussian state-space model.

The generative model for replicate ``r`` is::

    theta_t = F theta_{t-1} + A y_{t-1} + eta_t,     eta_t ~ N(0, I_k)
    y_t     = Z theta_t     + B y_{t-1} + xi_t,      xi_t  ~ N(0, I_p)

with ``theta_0 ~ N(0, Q0)`` and ``y_0 = 0``. The noise covariances are fixed
to the identity and are never stored; that fixes the scale of the hidden
state. Estimated ``A`` and ``Z`` are identified at most up to the residual
orthogonal symmetry of the hidden state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError


@dataclass(frozen=True)
class Dims:
    """Problem dimensions: genes ``p``, hidden states ``k``, time points ``T``, replicates ``n_R``."""

    p: int
    k: int
    T: int = 2
    n_R: int = 1

    def __post_init__(self):
        for name, low in (("p", 1), ("k", 1), ("T", 2), ("n_R", 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DimensionError(f"{name} must be an integer, got {value!r}")
            if value < low:
                raise DimensionError(f"{name} must be >= {low}, got {value}")


def param_count(dims: Dims) -> int:
    """Number of free interaction coefficients, p^2 + 2kp + k^2."""
    p, k = int(dims.p), int(dims.k)
    return p * p + 2 * k * p + k * k


def observation_count(dims: Dims) -> int:
    """Total number of scalar observations, p * T * n_R."""
    return int(dims.p) * int(dims.T) * int(dims.n_R)


def _frozen(a, shape, name) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if arr.shape != shape:
        raise DimensionError(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Interaction matrices of the model plus the initial state covariance.

    ``F`` is k x k, ``A`` is k x p, ``Z`` is p x k (rows are genes), ``B`` is
    p x p and ``Q0`` is k x k symmetric positive definite. Arrays are copied
    and made read-only on construction.
    """

    F: np.ndarray
    A: np.ndarray
    Z: np.ndarray
    B: np.ndarray
    Q0: np.ndarray = field(default=None)

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float)
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise DimensionError(f"F must be square, got shape {F.shape}")
        k = F.shape[0]
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise DimensionError(f"B must be square, got shape {B.shape}")
        p = B.shape[0]
        Q0 = np.eye(k) if self.Q0 is None else self.Q0
        object.__setattr__(self, "F", _frozen(F, (k, k), "F"))
        object.__setattr__(self, "A", _frozen(self.A, (k, p), "A"))
        object.__setattr__(self, "Z", _frozen(self.Z, (p, k), "Z"))
        object.__setattr__(self, "B", _frozen(B, (p, p), "B"))
        Q0 = _frozen(Q0, (k, k), "Q0")
        if np.max(np.abs(Q0 - Q0.T)) > 1e-12:
            raise DataError("Q0 is not symmetric")
        try:
            np.linalg.cholesky(Q0)
        except np.linalg.LinAlgError:
            raise DataError("Q0 is not positive definite") from None
        object.__setattr__(self, "Q0", Q0)

    @property
    def p(self) -> int:
        return self.B.shape[0]

    @property
    def k(self) -> int:
        return self.F.shape[0]

    @classmethod
    def zeros(cls, p: int, k: int, Q0=None) -> "ModelParams":
        return cls(F=np.zeros((k, k)), A=np.zeros((k, p)), Z=np.zeros((p, k)),
                   B=np.zeros((p, p)), Q0=Q0)

    def replace(self, **changes) -> "ModelParams":
        fields = {"F": self.F, "A": self.A, "Z": self.Z, "B": self.B, "Q0": self.Q0}
        fields.update(changes)
        return ModelParams(**fields)

    def check_dims(self, dims: Dims) -> None:
        if self.p != dims.p or self.k != dims.k:
            raise DimensionError(
                f"parameters have p={self.p}, k={self.k} but dims say p={dims.p}, k={dims.k}")

    def graph_matrix(self) -> np.ndarray:
        """The (p+k) x (p+k) block matrix [[B, Z], [A, F]]."""
        return np.block([[self.B, self.Z], [self.A, self.F]])

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n))
                   for n in ("F", "A", "Z", "B", "Q0"))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Replicated expression time series, ``values[r, t, i]`` for t = 1..T."""

    values: np.ndarray
    gene_names: tuple = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 3:
            raise DimensionError(f"values must be 3-D (n_R, T, p), got shape {values.shape}")
        n_R, T, p = values.shape
        Dims(p=p, k=1, T=T, n_R=n_R)
        if not np.all(np.isfinite(values)):
            raise DataError("dataset contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        names = self.gene_names
        names = tuple(f"g{i + 1}" for i in range(p)) if names is None else tuple(str(n) for n in names)
        if len(names) != p:
            raise DimensionError(f"{len(names)} gene names for {p} genes")
        if len(set(names)) != p:
            raise DataError("gene names are not unique")
        object.__setattr__(self, "gene_names", names)

    @property
    def n_R(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    @property
    def p(self) -> int:
        return self.values.shape[2]

    def dims(self, k: int) -> Dims:
        return Dims(p=self.p, k=k, T=self.T, n_R=self.n_R)


@dataclass(frozen=True, eq=False)
class HiddenTrajectory:
    """Simulated hidden states, ``states[r, t]`` for t = 0..T."""

    states: np.ndarray


def _replicate_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(r)])


def simulate(params: ModelParams, dims: Dims, seed: int,
             gene_names=None) -> tuple[Dataset, HiddenTrajectory]:
    """Draw ``dims.n_R`` independent replicates from the model.

    Replicate ``r`` uses its own generator seeded with ``(seed, r)``, so a
    replicate does not depend on how many others are drawn.
    """
    params.check_dims(dims)
    p, k, T, n_R = dims.p, dims.k, dims.T, dims.n_R
    F, A, Z, B = params.F, params.A, params.Z, params.B
    L0 = np.linalg.cholesky(params.Q0)
    y = np.zeros((n_R, T, p))
    theta = np.zeros((n_R, T + 1, k))
    for r in range(n_R):
        rng = _replicate_rng(seed, r)
        theta[r, 0] = L0 @ rng.standard_normal(k)
        y_prev = np.zeros(p)
        for t in range(1, T + 1):
            eta = rng.standard_normal(k)
            xi = rng.standard_normal(p)
            theta[r, t] = F @ theta[r, t - 1] + A @ y_prev + eta
            y[r, t - 1] = Z @ theta[r, t] + B @ y_prev + xi
            y_prev = y[r, t - 1]
    return Dataset(y, gene_names), HiddenTrajectory(theta)


def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def random_sparse_params(dims: Dims, density: float, scale: float, seed: int) -> ModelParams:
    """Random interaction matrices with Bernoulli(density) support.

    Nonzero entries are uniform on [-scale, scale]. F is rescaled so that
    its spectral radius is at most 0.9. Q0 is the identity.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    p, k = dims.p, dims.k
    rng = np.random.default_rng(seed)

    def draw(shape):
        mask = rng.random(shape) < density
        vals = rng.uniform(-scale, scale, size=shape)
        return np.where(mask, vals, 0.0)

    F = draw((k, k))
    A = draw((k, p))
    Z = draw((p, k))
    B = draw((p, p))
    rho = spectral_radius(F)
    if rho > 0.9:
        F = F * (0.9 / rho)
    return ModelParams(F=F, A=A, Z=Z, B=B, Q0=np.eye(k))
