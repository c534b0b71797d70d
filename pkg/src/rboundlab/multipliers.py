"""Multiplier operators with respect to a decomposition.

A symbol ``c = (c_1, ..., c_M)`` with declared limit ``l`` defines
``M_c = sum_n c_n p_n``.  Wherever a tail of the sequence appears it is closed
by ``c_{M+1} := l``, which makes the Abel-summed form and the norm bound
``||M_c|| <= var(c) K`` exact statements at finite ``M``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .spaces import DimensionError, operator_norm, partial_sum

SPECTRUM_GUARD = 1e-12
# below exp(-700) doubles are denormal or zero; such entries are stored as exact zeros
UNDERFLOW_LOG = -700.0


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class MultiplierSymbol:
    """A finite symbol, stored plainly or as logs of entries in ``[0, 1]``."""

    data: np.ndarray
    limit: complex = 0.0
    encoding: str = "plain"

    def __post_init__(self):
        d = np.asarray(self.data)
        if self.encoding == "log_real":
            d = np.asarray(d, dtype=float)
            if np.any(d > 0):
                raise ValueError("log-encoded entries must be <= 0")
            d = np.where(d < UNDERFLOW_LOG, -np.inf, d)
        elif self.encoding != "plain":
            raise ValueError(f"unknown encoding {self.encoding!r}")
        object.__setattr__(self, "data", d)

    @classmethod
    def from_values(cls, values, limit=0.0):
        return cls(np.asarray(values), limit, "plain")

    @classmethod
    def from_logs(cls, logs, limit=1.0):
        return cls(np.asarray(logs, dtype=float), limit, "log_real")

    def __len__(self):
        return len(self.data)

    @property
    def values(self):
        if self.encoding == "log_real":
            return np.exp(self.data)
        return self.data

    def one_minus(self):
        """``1 - c_n`` without cancellation for log-encoded entries near 1."""
        if self.encoding == "log_real":
            return -np.expm1(self.data)
        return 1 - self.data

    def closed(self):
        """Values followed by the closure term ``c_{M+1} = limit``."""
        v = self.values
        return np.append(v, np.asarray(self.limit, dtype=np.result_type(v, type(self.limit))))

    def __mul__(self, other):
        if self.encoding == other.encoding == "log_real":
            return MultiplierSymbol.from_logs(self.data + other.data, self.limit * other.limit)
        return MultiplierSymbol.from_values(self.values * other.values, self.limit * other.limit)


def var(symbol):
    """``|l| + sum_{n<M} |c_n - c_{n+1}| + |c_M - l|``."""
    return float(abs(symbol.limit) + np.abs(np.diff(symbol.closed())).sum())


def _check_len(model, symbol):
    if len(symbol) != model.n_blocks:
        raise DimensionError(f"symbol of length {len(symbol)} for {model.n_blocks} blocks")


def apply_multiplier(model, symbol, x, mode="direct"):
    """``M_c x``, either as ``sum c_n p_n x`` or in Abel-summed form.

    The Abel form is ``l x + sum_{N<=M} (c_N - c_{N+1}) P_N x`` and only touches
    the partial-sum projections.
    """
    _check_len(model, symbol)
    x = np.asarray(x)
    if mode == "direct":
        return model.apply(symbol.values, x)
    if mode != "abel":
        raise ValueError("mode is 'direct' or 'abel'")
    diffs = -np.diff(symbol.closed())
    out = symbol.limit * x
    for N, d in enumerate(diffs, start=1):
        if d != 0:
            out = out + d * (partial_sum(model, N) @ x)
    return out


def multiplier_matrix(model, symbol):
    _check_len(model, symbol)
    return model.synthesize(symbol.values)


def multiplier_norm(model, symbol):
    return operator_norm(model.space, multiplier_matrix(model, symbol))


# ---------------------------------------------------------------- sectorial multipliers

def _spectral_distance_ok(lam, points):
    points = np.asarray(points, dtype=complex)
    points = points[np.isfinite(points)]
    if points.size == 0:
        return True
    scale = np.maximum(1.0, np.abs(points))
    return bool(np.all(np.abs(lam - points) >= SPECTRUM_GUARD * scale))


def resolvent_symbol(a, lam, a_limit=np.inf):
    """Symbol of ``R(lam, A)``, i.e. ``1 / (lam - a_n)``.

    ``a_limit`` is the limit of the (nondecreasing) sequence ``a``; the default
    ``inf`` gives the declared limit 0.
    """
    a = np.asarray(a, dtype=float)
    lam = complex(lam)
    pts = np.append(a, a_limit) if np.isfinite(a_limit) else a
    if not _spectral_distance_ok(lam, pts):
        raise SpectrumError(f"lambda={lam} lies on or too close to the spectrum")
    limit = 0.0 if np.isinf(a_limit) else 1.0 / (lam - a_limit)
    return MultiplierSymbol.from_values(1.0 / (lam - a), limit)


@dataclass(frozen=True)
class SectorGrid:
    """Sample points of ``C`` outside the closed sector ``|arg| <= theta``.

    Points sit on the rays at ``angles`` (default: the two boundary rays and the
    negative axis) at log-spaced radii.  Boundary points are limits of points in
    the complement, so grid maxima are lower estimates of the true supremum.
    """

    theta: float
    radii: np.ndarray
    angles: tuple = ()

    def __post_init__(self):
        if not 0 < self.theta < np.pi:
            raise ValueError("theta must lie in (0, pi)")
        r = np.asarray(self.radii, dtype=float)
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be positive and strictly increasing")
        object.__setattr__(self, "radii", r)
        angles = tuple(self.angles) or (self.theta, -self.theta, np.pi)
        for phi in angles:
            if abs(phi) < self.theta * (1 - 1e-12):
                raise ValueError(f"ray at angle {phi} lies inside the sector of angle {self.theta}")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def default(cls, theta, n_radii=200, r_min=1e-6, r_max=1e6, angles=()):
        return cls(theta, np.geomspace(r_min, r_max, n_radii), angles)

    @property
    def points(self):
        return np.concatenate([self.radii * np.exp(1j * phi) for phi in self.angles])


def nested_grids(thetas, n_radii=200, r_min=1e-6, r_max=1e6):
    """Grids whose point sets shrink as theta grows (rays at every larger angle)."""
    thetas = sorted(thetas)
    out = {}
    for th in thetas:
        rays = [phi for t in thetas if t >= th for phi in (t, -t)] + [np.pi]
        out[th] = SectorGrid.default(th, n_radii, r_min, r_max, tuple(rays))
    return out


def _check_grid(grid, theta):
    if any(abs(phi) < theta * (1 - 1e-12) for phi in grid.angles):
        raise ValueError(f"grid has points inside the sector of angle {theta}")


def k_theta(a, theta, grid=None, a_limit=np.inf):
    """Grid lower estimate of ``sup |lam| var(c(lam))`` over the sector complement."""
    grid = grid or SectorGrid.default(theta)
    _check_grid(grid, theta)
    return max(abs(lam) * var(resolvent_symbol(a, lam, a_limit)) for lam in grid.points)


def sectorial_sup(model, a, theta, grid=None, a_limit=np.inf):
    """Grid maximum of ``||lam R(lam, A)||`` on the model."""
    grid = grid or SectorGrid.default(theta)
    _check_grid(grid, theta)
    best = 0.0
    for lam in grid.points:
        sym = resolvent_symbol(a, lam, a_limit)
        val, _ = operator_norm(model.space, lam * multiplier_matrix(model, sym))
        best = max(best, val)
    return best


def sector_rows(model, a, grid, a_limit=np.inf):
    """Per-point rows (lam, |lam| var bound times K, measured norm, pass flag)."""
    rows = []
    for lam in grid.points:
        sym = resolvent_symbol(a, lam, a_limit)
        bound = abs(lam) * var(sym) * model.K
        val, _ = operator_norm(model.space, lam * multiplier_matrix(model, sym))
        rows.append({"lam_re": lam.real, "lam_im": lam.imag, "bound": bound,
                     "measured": val, "pass": val <= bound + 1e-6})
    return rows


def inverse_resolvent_check(a, lam, model):
    """Operator-norm residual of ``lam R(lam, A^-1) = I - lam^-1 R(lam^-1, A)``.

    Both sides are formed from dense matrices with dense inverses, not from symbols.
    """
    a = np.asarray(a, dtype=float)
    lam = complex(lam)
    if lam == 0:
        raise SpectrumError("lambda = 0")
    if not _spectral_distance_ok(1 / lam, a):
        raise SpectrumError(f"1/lambda={1 / lam} lies on or too close to the spectrum of A")
    # spectrum of A^-1 is {1/a_n} together with 0 when a_n -> inf
    if not _spectral_distance_ok(lam, np.append(1 / a, 0.0)):
        raise SpectrumError(f"lambda={lam} lies on or too close to the spectrum of A^-1")
    eye = np.eye(model.dim)
    A = model.synthesize(a.astype(complex))
    A_inv = np.linalg.inv(A)
    lhs = lam * np.linalg.inv(lam * eye - A_inv)
    rhs = eye - np.linalg.inv((1 / lam) * eye - A) / lam
    return operator_norm(model.space, lhs - rhs)[0]


def aco_coefficients(a, lam, a_limit=np.inf):
    """Coefficients of ``lam R(lam, A) = sum_N mu_N P_N``.

    ``mu_N = lam (c_N - c_{N+1})`` with ``c_{M+1} = l``; the ``lam l I`` part is
    folded into ``mu_M`` since ``P_M = I``.  Returns ``(mu, sum |mu_N|)``.
    """
    sym = resolvent_symbol(a, lam, a_limit)
    mu = -complex(lam) * np.diff(sym.closed())
    mu[-1] += complex(lam) * sym.limit
    return mu, float(np.abs(mu).sum())


def aco_reconstruct(model, mu, x):
    return sum(m * (partial_sum(model, N) @ x) for N, m in enumerate(mu, start=1))


# ---------------------------------------------------------------- Ritt multipliers

def _check_ritt(c):
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0) or np.any(c >= 1):
        raise ValueError("Ritt symbol entries must lie strictly inside (0, 1)")
    if np.any(np.diff(c) < 0):
        raise ValueError("Ritt symbol must be nondecreasing")
    return c


def ritt_power_symbol(c, n=None, log_n=None, limit=1.0):
    """Symbol of ``T^n`` for ``T = M_c``: entries ``c_k^n``, held as ``n log c_k``.

    ``c`` may be a plain sequence in (0, 1) or a log-encoded symbol.  Passing
    ``log_n`` instead of ``n`` allows exponents far beyond float range.
    """
    if isinstance(c, MultiplierSymbol):
        logs, limit = c.data if c.encoding == "log_real" else np.log(_check_ritt(c.values)), c.limit
    else:
        logs = np.log(_check_ritt(c))
    if (n is None) == (log_n is None):
        raise ValueError("give exactly one of n, log_n")
    if n is not None:
        if n < 0:
            raise ValueError("n must be >= 0")
        if n == 0:
            return MultiplierSymbol.from_logs(np.zeros_like(logs), 1.0)
        log_n = np.log(float(n))
    with np.errstate(over="ignore", divide="ignore"):
        out = np.where(logs == 0, 0.0, -np.exp(log_n + np.log(-logs)))
        lim = float(abs(limit)) ** float(np.exp(log_n))
    return MultiplierSymbol.from_logs(out, lim)


def ritt_second_symbol(c, n, limit=1.0):
    """Symbol of ``n T^n (I - T)``: ``n c_k^n (1 - c_k)``, assembled from logs."""
    c = _check_ritt(c)
    logs = np.log(n) + n * np.log(c) + np.log1p(-c)
    lim = n * limit ** n * (1 - limit)
    return MultiplierSymbol.from_values(np.exp(logs), lim)


@dataclass
class RittReport:
    K: float
    rows: list
    power_constant: float
    second_constant: float

    def to_csv(self):
        buf = io.StringIO()
        fields = ["n", "power_var_bound", "second_var_bound", "power_measured", "second_measured", "pass"]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()


def ritt_set_bounds(model, c, n_list, limit=None, dense_limit=64):
    """Var-based norm bounds for ``T^n`` and ``n T^n (I - T)`` over ``n_list``.

    Measured norms come from dense matrix powers, only for ``n <= dense_limit``.
    ``c`` may also be a symbol, whose limit is used unless ``limit`` is given.
    """
    if isinstance(c, MultiplierSymbol):
        limit = c.limit.real if limit is None else limit
        c = c.values.real
    c = _check_ritt(c)
    limit = float(c[-1]) if limit is None else float(limit)
    T = multiplier_matrix(model, MultiplierSymbol.from_values(c, limit))
    eye = np.eye(model.dim)
    rows = []
    for n in n_list:
        p = var(ritt_power_symbol(c, n, limit=limit)) * model.K
        s = var(ritt_second_symbol(c, n, limit)) * model.K if n >= 1 else np.nan
        pm = sm = np.nan
        if n <= dense_limit:
            Tn = np.linalg.matrix_power(T, int(n))
            pm = operator_norm(model.space, Tn)[0]
            if n >= 1:
                sm = operator_norm(model.space, n * Tn @ (eye - T))[0]
        ok = (np.isnan(pm) or pm <= p + 1e-9) and (np.isnan(sm) or sm <= s + 1e-9)
        rows.append({"n": int(n), "power_var_bound": float(p), "second_var_bound": float(s),
                     "power_measured": float(pm), "second_measured": float(sm), "pass": bool(ok)})
    return RittReport(model.K, rows,
                      max(r["power_var_bound"] for r in rows),
                      np.nanmax([r["second_var_bound"] for r in rows] + [0.0]))
