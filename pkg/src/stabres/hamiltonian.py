"""Finite-basis matrices H(eta), S for 1D model Hamiltonians under x -> eta*x.

The operator is scaled in a fixed basis (scale-the-operator convention), so
the overlap matrix never depends on eta and every matrix element is an
analytic function of eta:

    H(eta) = eta^-2 * T + V_matrix(eta),
    V_matrix(eta)_mn = integral phi_m(x) V(eta*x) phi_n(x) dx,

with the integral evaluated on Gauss-Hermite nodes that are fixed once per
basis (never re-derived from eta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.polynomial import polyval

from .errors import NumericRangeError, ValidationError

GAUSSIAN_WELL_BARRIER = "gaussian_well_barrier"
CUSTOM_POLYNOMIAL_GAUSSIAN = "custom_polynomial_gaussian"

HARMONIC_OSCILLATOR = "harmonic_oscillator"
EVEN_TEMPERED_GAUSSIAN = "even_tempered_gaussian"

THETA_MAX = math.pi / 4


@dataclass(frozen=True)
class ModelSpec:
    """A 1D potential family with real parameters.

    gaussian_well_barrier: parameters (J, lambda) define
        V(x) = (x^2/2 - J) * exp(-lambda x^2) + J,
    an entire function of x, so V(eta*x) is defined for every complex eta.

    custom_polynomial_gaussian: parameters (lambda, c_inf, a0, a1, ...) define
        V(x) = c_inf + exp(-lambda x^2) * sum_j a_j x^j,
    with lambda = 0 permitted (pure polynomial; used for the harmonic and
    kinetic-only limits).
    """

    potential_family: str
    parameters: tuple[float, ...]
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ValidationError("ModelSpec.mass must be > 0")
        if self.hbar <= 0:
            raise ValidationError("ModelSpec.hbar must be > 0")
        object.__setattr__(self, "parameters", tuple(float(p) for p in self.parameters))
        if self.potential_family == GAUSSIAN_WELL_BARRIER:
            if len(self.parameters) != 2:
                raise ValidationError("gaussian_well_barrier takes parameters (J, lambda)")
            if self.parameters[1] <= 0:
                raise ValidationError("ModelSpec.parameters: lambda must be > 0")
        elif self.potential_family == CUSTOM_POLYNOMIAL_GAUSSIAN:
            if len(self.parameters) < 2:
                raise ValidationError("custom_polynomial_gaussian takes (lambda, c_inf, a0, ...)")
            if self.parameters[0] < 0:
                raise ValidationError("ModelSpec.parameters: lambda must be >= 0")
        else:
            raise ValidationError(f"unknown potential_family '{self.potential_family}'")

    def potential(self, z):
        """V evaluated at (possibly complex) positions z, vectorized."""
        z = np.asarray(z)
        if self.potential_family == GAUSSIAN_WELL_BARRIER:
            j, lam = self.parameters
            return (0.5 * z * z - j) * np.exp(-lam * z * z) + j
        lam, c_inf, *coeffs = self.parameters
        if not coeffs:
            poly = np.zeros_like(z)
        else:
            poly = polyval(z, coeffs)
        if lam == 0.0:
            return c_inf + poly
        return c_inf + np.exp(-lam * z * z) * poly

    @property
    def threshold(self) -> float | None:
        """V at |x| -> oo, when finite: the continuum rotation pivot."""
        if self.potential_family == GAUSSIAN_WELL_BARRIER:
            return self.parameters[0]
        lam, c_inf, *coeffs = self.parameters
        if lam > 0 or not any(coeffs[1:] if coeffs else []):
            extra = coeffs[0] if (lam == 0.0 and coeffs) else 0.0
            return c_inf + extra
        return None

    @classmethod
    def benchmark(cls) -> "ModelSpec":
        return cls(GAUSSIAN_WELL_BARRIER, (0.8, 0.1))

    @classmethod
    def pure_harmonic(cls) -> "ModelSpec":
        return cls(CUSTOM_POLYNOMIAL_GAUSSIAN, (0.0, 0.0, 0.0, 0.0, 0.5))

    @classmethod
    def kinetic_only(cls) -> "ModelSpec":
        return cls(CUSTOM_POLYNOMIAL_GAUSSIAN, (0.0, 0.0))


@dataclass(frozen=True)
class BasisSpec:
    """Descriptor for one of the two built-in basis families."""

    kind: str
    size: int
    width: float | None = None  # HO frequency omega
    base_exponent: float | None = None  # even-tempered beta_0
    ratio: float | None = None  # even-tempered s
    quadrature_order: int | None = None

    def __post_init__(self):
        if self.size < 2:
            raise ValidationError("BasisSpec.size must be >= 2")
        if self.kind == HARMONIC_OSCILLATOR:
            width = 1.0 if self.width is None else self.width
            if width <= 0:
                raise ValidationError("BasisSpec.width must be > 0")
            object.__setattr__(self, "width", float(width))
        elif self.kind == EVEN_TEMPERED_GAUSSIAN:
            if self.base_exponent is None or self.base_exponent <= 0:
                raise ValidationError("BasisSpec.base_exponent must be > 0")
            if self.ratio is None or self.ratio <= 1:
                raise ValidationError("BasisSpec.ratio must be > 1")
        else:
            raise ValidationError(f"unknown basis kind '{self.kind}'")
        order = self.quadrature_order
        if order is None:
            order = 4 * self.size
        if order <= 0:
            raise ValidationError("BasisSpec.quadrature_order must be > 0")
        object.__setattr__(self, "quadrature_order", int(order))


@dataclass(frozen=True)
class ScalingParameter:
    """The dilation eta = alpha * exp(i*theta)."""

    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValidationError("ScalingParameter.alpha must be > 0")
        if not (0.0 <= self.theta <= THETA_MAX + 1e-12):
            raise ValidationError(f"ScalingParameter.theta must lie in [0, pi/4], got {self.theta}")

    @property
    def eta(self) -> complex:
        return self.alpha * complex(math.cos(self.theta), math.sin(self.theta))

    @classmethod
    def from_eta(cls, eta: complex) -> "ScalingParameter":
        return cls(abs(eta), math.atan2(eta.imag, eta.real))


@dataclass(frozen=True)
class ComplexMatrixPair:
    """H and S; S is None when the basis is orthonormal (identity overlap)."""

    H: np.ndarray
    S: np.ndarray | None = None


def _hermite_orthonormal(nmax: int, y: np.ndarray) -> np.ndarray:
    """Rows n=0..nmax-1 of h_n(y), normalized against the weight e^{-y^2}.

    The Gaussian factor stays inside the quadrature weights, which keeps the
    recurrence stable out to large n and |y|.
    """
    out = np.empty((nmax, len(y)))
    out[0] = math.pi ** -0.25
    if nmax > 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _mirror_upper(m: np.ndarray) -> np.ndarray:
    """Exact complex symmetry: compute one triangle, fill the other."""
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


@dataclass(frozen=True)
class BasisSet:
    """Immutable basis build: nodes, per-function norms, kinetic/overlap parts."""

    spec: BasisSpec
    norms: np.ndarray
    kinetic_half: np.ndarray = field(repr=False)  # matrix of -(1/2) d^2/dx^2
    overlap: np.ndarray | None = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    table: np.ndarray | None = field(repr=False)  # HO: basis values at nodes
    exponents: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.spec.size

    def potential_matrix(self, model: ModelSpec, eta: complex) -> np.ndarray:
        if self.spec.kind == HARMONIC_OSCILLATOR:
            vals = model.potential(eta * self.nodes)
            m = (self.table * (self.weights * vals)) @ self.table.T
        else:
            beta = self.exponents
            pair_scale = np.sqrt(beta[:, None] + beta[None, :])
            m = np.empty((self.size, self.size), dtype=complex)
            for k in range(self.size):
                pos = eta * (self.nodes[None, :] / pair_scale[k][:, None])
                m[k] = model.potential(pos) @ self.weights
            m *= (self.norms[:, None] * self.norms[None, :]) / pair_scale
        m = _mirror_upper(m)
        if not np.all(np.isfinite(m)):
            bad = np.argwhere(~np.isfinite(m))[0]
            raise NumericRangeError(
                f"non-finite potential element at ({bad[0]}, {bad[1]}) for eta={eta}",
                index=(int(bad[0]), int(bad[1])),
            )
        return m


def build_basis(spec: BasisSpec) -> BasisSet:
    """Construct the immutable basis descriptor (nodes, norms, kinetic part)."""
    y, w = hermgauss(spec.quadrature_order)
    n = np.arange(spec.size)
    if spec.kind == HARMONIC_OSCILLATOR:
        omega = spec.width
        table = _hermite_orthonormal(spec.size, y)
        kin = np.zeros((spec.size, spec.size))
        kin[n, n] = omega / 4.0 * (2 * n + 1)
        off = -omega / 4.0 * np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
        kin[n[:-2], n[:-2] + 2] = off
        kin[n[:-2] + 2, n[:-2]] = off
        return BasisSet(
            spec=spec,
            norms=np.ones(spec.size),
            kinetic_half=kin,
            overlap=None,
            nodes=y / math.sqrt(omega),
            weights=w,
            table=table,
        )
    beta = spec.base_exponent * spec.ratio ** n.astype(float)
    norms = (2.0 * beta / math.pi) ** 0.25
    ssum = beta[:, None] + beta[None, :]
    overlap = _mirror_upper(norms[:, None] * norms[None, :] * np.sqrt(math.pi / ssum))
    kin = _mirror_upper(overlap * (beta[:, None] * beta[None, :]) / ssum)
    return BasisSet(
        spec=spec,
        norms=norms,
        kinetic_half=kin,
        overlap=overlap,
        nodes=y,
        weights=w,
        table=None,
        exponents=beta,
    )


def scaled_matrices(model: ModelSpec, basis: BasisSet, eta) -> ComplexMatrixPair:
    """H(eta) = eta^-2 * (hbar^2/m) * T_half + V(eta); S is eta-independent.

    `eta` may be a ScalingParameter or a plain complex number. At theta = 0
    the returned matrices are real.
    """
    if isinstance(eta, ScalingParameter):
        z = eta.eta if eta.theta != 0.0 else complex(eta.alpha, 0.0)
    else:
        z = complex(eta)
    tfac = model.hbar**2 / model.mass
    h = z**-2 * tfac * basis.kinetic_half + basis.potential_matrix(model, z)
    if z.imag == 0.0:
        h = np.ascontiguousarray(h.real)
    s = basis.overlap
    return ComplexMatrixPair(H=h, S=None if s is None else s.copy())


def quadrature_self_test(model: ModelSpec, spec: BasisSpec, eta: complex = 1.0) -> float:
    """Largest element change, relative to the matrix magnitude, when the
    quadrature order grows by 50%.

    Normalizing per element would divide rounding noise by the exact zeros
    of parity-forbidden elements, so the matrix maximum sets the scale.
    """
    denser = BasisSpec(
        kind=spec.kind,
        size=spec.size,
        width=spec.width,
        base_exponent=spec.base_exponent,
        ratio=spec.ratio,
        quadrature_order=int(math.ceil(1.5 * spec.quadrature_order)),
    )
    h1 = scaled_matrices(model, build_basis(spec), eta).H
    h2 = scaled_matrices(model, build_basis(denser), eta).H
    scale = float(np.max(np.abs(h2))) or 1.0
    return float(np.max(np.abs(h1 - h2)) / scale)
