"""Finite-dimensional Banach-space models and Schauder decompositions.

A :class:`SpaceModel` is ``C^dim`` with one of a few computable norms.  A
:class:`DecompositionModel` is an ordered family of projections
``p_1, ..., p_M`` summing to the identity.  Two storage modes are supported:

* factorized: a basis matrix ``B`` (columns are basis vectors) and its dual
  ``D`` (rows are the biorthogonal functionals), grouped into consecutive
  blocks, so that ``p_n = B[:, S_n] @ D[S_n, :]``.  This is how every builder
  works and scales to ``dim = 1024``.
* explicit: a stack of ``M`` projection matrices.  Only used for small or
  deliberately tampered models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9

NORM_KINDS = ("lp", "weighted_l1", "sup")


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceModel:
    dim: int
    kind: str = "lp"
    p: float = 2.0
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind == "lp" and not self.p >= 1:
            raise ValueError("p must be >= 1")
        if self.kind == "weighted_l1":
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.dim,) or np.any(w <= 0):
                raise ValueError("weighted_l1 needs dim positive weights")
            object.__setattr__(self, "weights", w)

    @classmethod
    def lp(cls, dim, p=2.0):
        return cls(dim, "lp", float(p))

    @classmethod
    def sup(cls, dim):
        return cls(dim, "sup", np.inf)

    @classmethod
    def weighted_l1(cls, weights):
        w = np.asarray(weights, dtype=float)
        return cls(len(w), "weighted_l1", 1.0, w)

    @property
    def exact_operator_norm(self):
        """Whether :func:`operator_norm` is exact (not a search lower bound)."""
        return self.kind != "lp" or self.p in (1.0, 2.0, np.inf)

    def describe(self):
        if self.kind == "lp":
            return f"l{self.p:g}_{self.dim}"
        return f"{self.kind}_{self.dim}"

    def to_dict(self):
        d = {"kind": self.kind, "dim": self.dim}
        if self.kind == "lp":
            d["p"] = "inf" if np.isinf(self.p) else self.p
        if self.kind == "weighted_l1":
            d["weights"] = self.weights.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        if kind == "lp":
            return cls.lp(int(d["dim"]), float(d.get("p", 2.0)))
        if kind == "sup":
            return cls.sup(int(d["dim"]))
        if kind == "weighted_l1":
            return cls.weighted_l1(d["weights"])
        raise ValueError(f"unknown norm kind {kind!r}")


def _check_dim(space, x):
    if np.shape(x)[-1] != space.dim:
        raise DimensionError(f"vector of length {np.shape(x)[-1]} in a space of dimension {space.dim}")


def norm(space, x):
    """Norm of ``x``; a 2-D input is treated as a stack of row vectors."""
    x = np.asarray(x)
    _check_dim(space, x)
    a = np.abs(x)
    if space.kind == "weighted_l1":
        return a @ space.weights
    if space.kind == "sup" or np.isinf(space.p):
        return a.max(axis=-1)
    if space.p == 1:
        return a.sum(axis=-1)
    if space.p == 2:
        return np.sqrt(np.sum(a * a, axis=-1))
    return np.sum(a ** space.p, axis=-1) ** (1.0 / space.p)


def _duality_map(y, p):
    # unit-norm functional direction attaining <f, y> = ||y||_p
    a = np.abs(y)
    phase = np.where(a > 0, y / np.where(a > 0, a, 1), 0)
    return phase * a ** (p - 1)


def _lp_norm_search(B, p, restarts=8, iters=60, seed=0):
    """Lower bound on the l^p -> l^p norm by Boyd's power method."""
    n = B.shape[1]
    q = p / (p - 1)
    rng = np.random.default_rng(seed)
    starts = [np.eye(n)[i] for i in range(n)]
    starts.append(np.ones(n))
    for _ in range(restarts):
        starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    best = 0.0
    for x in starts:
        x = x / np.linalg.norm(x, p)
        val = 0.0
        for _ in range(iters):
            y = B @ x
            new = np.linalg.norm(y, p)
            best = max(best, new)
            if new == 0 or new <= val * (1 + 1e-12):
                break
            val = new
            z = B.conj().T @ _duality_map(y, p)
            nz = np.linalg.norm(z, q)
            if nz == 0:
                break
            x = _duality_map(z, q)
            x = x / np.linalg.norm(x, p)
    return float(best)


def operator_norm(space, B):
    """Return ``(value, exact)`` for the induced norm of the square matrix ``B``.

    Exact for l^1, weighted l^1, sup and l^2.  For other ``p`` the value is a
    lower bound from a power-iteration search and ``exact`` is False.
    """
    B = np.asarray(B)
    if B.shape != (space.dim, space.dim):
        raise DimensionError(f"matrix of shape {B.shape} on a space of dimension {space.dim}")
    a = np.abs(B)
    if space.kind == "weighted_l1":
        w = space.weights
        return float(np.max((w @ a) / w)), True
    if space.kind == "sup" or np.isinf(space.p):
        return float(a.sum(axis=1).max()), True
    if space.p == 1:
        return float(a.sum(axis=0).max()), True
    if space.p == 2:
        return float(np.linalg.norm(B, 2)), True
    return _lp_norm_search(B, space.p), False


@dataclass(frozen=True)
class DecompositionModel:
    space: SpaceModel
    block_dims: tuple
    basis: np.ndarray | None = None
    dual: np.ndarray | None = None
    projections: np.ndarray | None = None
    K: float = field(default=np.nan)
    K_exact: bool = True
    name: str = ""

    @property
    def n_blocks(self):
        return len(self.block_dims)

    @property
    def dim(self):
        return self.space.dim

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.block_dims)]).astype(int)

    @property
    def factorized(self):
        return self.projections is None

    def block(self, n):
        """The projection ``p_n`` (1-based)."""
        if not 1 <= n <= self.n_blocks:
            raise IndexError(f"block index {n} outside 1..{self.n_blocks}")
        if not self.factorized:
            return self.projections[n - 1]
        lo, hi = self.offsets[n - 1], self.offsets[n]
        return self.basis[:, lo:hi] @ self.dual[lo:hi, :]

    @property
    def blocks(self):
        return np.stack([self.block(n) for n in range(1, self.n_blocks + 1)])

    def expand(self, c):
        """Per-basis-vector weights for a per-block sequence ``c``."""
        return np.repeat(np.asarray(c), self.block_dims)

    def synthesize(self, c):
        """Dense matrix of ``sum_n c_n p_n``."""
        c = np.asarray(c)
        if c.shape != (self.n_blocks,):
            raise DimensionError(f"{len(c)} coefficients for {self.n_blocks} blocks")
        if self.factorized:
            out = (self.basis * self.expand(c)) @ self.dual
        else:
            out = np.tensordot(c, self.projections, axes=1)
        if np.isrealobj(out) or np.abs(out.imag).max(initial=0) > 0:
            return out
        return out.real

    def apply(self, c, x):
        """``sum_n c_n p_n(x)`` without forming a matrix."""
        x = np.asarray(x)
        if self.factorized:
            return self.basis @ (self.expand(c) * (self.dual @ x))
        return np.einsum("n,nij,j->i", np.asarray(c), self.projections, x)

    def coefficients(self, x):
        """Block components ``p_n(x)`` as an ``(M, dim)`` array."""
        x = np.asarray(x)
        if self.factorized:
            alpha = self.dual @ x
            off = self.offsets
            return np.stack([self.basis[:, off[n]:off[n + 1]] @ alpha[off[n]:off[n + 1]]
                             for n in range(self.n_blocks)])
        return self.projections @ x

    def with_projections(self, projections, name=None):
        """An explicit-mode copy; handy for tampering tests."""
        P = np.asarray(projections)
        return DecompositionModel(self.space, tuple(int(d) for d in self.block_dims),
                                  projections=P, K=self.K, K_exact=self.K_exact,
                                  name=name or self.name)

    def to_dict(self):
        d = {"name": self.name, "space": self.space.to_dict(),
             "block_dims": list(map(int, self.block_dims)),
             "K": float(self.K), "K_exact": bool(self.K_exact)}
        if self.factorized:
            d["basis"] = _encode_matrix(self.basis)
            d["dual"] = _encode_matrix(self.dual)
        else:
            d["projections"] = [_encode_matrix(p) for p in self.projections]
        return d

    @classmethod
    def from_dict(cls, d):
        space = SpaceModel.from_dict(d["space"])
        common = dict(space=space, block_dims=tuple(d["block_dims"]), K=float(d["K"]),
                      K_exact=bool(d.get("K_exact", True)), name=d.get("name", ""))
        if "projections" in d:
            return cls(projections=np.stack([_decode_matrix(p) for p in d["projections"]]), **common)
        return cls(basis=_decode_matrix(d["basis"]), dual=_decode_matrix(d["dual"]), **common)


def _encode_matrix(A):
    A = np.asarray(A)
    out = {"shape": list(A.shape), "real": A.real.ravel().tolist()}
    if np.iscomplexobj(A) and np.any(A.imag):
        out["imag"] = A.imag.ravel().tolist()
    return out


def _decode_matrix(d):
    A = np.asarray(d["real"], dtype=float)
    if "imag" in d:
        A = A + 1j * np.asarray(d["imag"], dtype=float)
    return A.reshape(d["shape"])


def save_decomposition(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)


def load_decomposition(path):
    with open(path, encoding="utf-8") as fh:
        return DecompositionModel.from_dict(json.load(fh))


# ---------------------------------------------------------------- partial sums

def partial_sum(model, N):
    """``P_N = p_1 + ... + p_N``; ``P_0 = 0`` and ``P_M = I``."""
    if not 0 <= N <= model.n_blocks:
        raise IndexError(f"N={N} outside 0..{model.n_blocks}")
    if model.factorized:
        s = model.offsets[N]
        return model.basis[:, :s] @ model.dual[:s, :]
    return model.projections[:N].sum(axis=0) if N else np.zeros((model.dim, model.dim))


def tail_projection(model, N):
    """``Q_N = I - P_N``."""
    return np.eye(model.dim) - partial_sum(model, N)


def _support(v):
    return np.flatnonzero(np.abs(v) > 0)


def schauder_constant(space, basis, dual, block_dims):
    """``(max_N ||P_N||, exact)`` over the finitely many partial sums.

    For the column/row-sum norms ``P_N`` is accumulated block by block and only
    the touched columns (rows) are re-summed, which keeps sparse bases such as
    Haar cheap at ``dim = 1024``.
    """
    dim = space.dim
    off = np.concatenate([[0], np.cumsum(block_dims)]).astype(int)
    colsum_kind = space.kind == "weighted_l1" or (space.kind == "lp" and space.p == 1)
    rowsum_kind = space.kind == "sup" or np.isinf(space.p)
    if not (colsum_kind or rowsum_kind):
        best, exact = 0.0, True
        for N in range(1, len(block_dims) + 1):
            val, ex = operator_norm(space, basis[:, :off[N]] @ dual[:off[N], :])
            best, exact = max(best, val), exact and ex
        return best, exact
    w = space.weights if space.kind == "weighted_l1" else np.ones(dim)
    P = np.zeros((dim, dim), dtype=np.result_type(basis, dual))
    sums = np.zeros(dim)
    best = 0.0
    for N in range(1, len(block_dims) + 1):
        rows, cols = set(), set()
        for i in range(off[N - 1], off[N]):
            b, d = basis[:, i], dual[i, :]
            r, c = _support(b), _support(d)
            P[np.ix_(r, c)] += np.outer(b[r], d[c])
            rows.update(r.tolist())
            cols.update(c.tolist())
        if colsum_kind:
            idx = np.fromiter(cols, dtype=int)
            sums[idx] = (w @ np.abs(P[:, idx])) / w[idx]
        else:
            idx = np.fromiter(rows, dtype=int)
            sums[idx] = np.abs(P[idx, :]).sum(axis=1)
        best = max(best, float(sums.max()))
    return best, True


# ---------------------------------------------------------------- builders

def build_basis_decomposition(space, basis, block_dims, name="basis", dual=None):
    """Decomposition spanned by consecutive groups of columns of ``basis``."""
    basis = np.asarray(basis)
    block_dims = tuple(int(b) for b in block_dims)
    if basis.shape != (space.dim, space.dim):
        raise DimensionError("basis must be square of the space dimension")
    if sum(block_dims) != space.dim or min(block_dims) < 1:
        raise ValueError(f"block dims {block_dims} do not partition dim {space.dim}")
    if dual is None:
        dual = np.linalg.inv(basis)
    K, exact = schauder_constant(space, basis, dual, block_dims)
    return DecompositionModel(space, block_dims, basis=basis, dual=dual, K=K, K_exact=exact, name=name)


def build_coordinate_decomposition(space, block_dims):
    """Coordinate-block projections (unconditional; ``K = 1`` on l^p)."""
    eye = np.eye(space.dim)
    return build_basis_decomposition(space, eye, block_dims, name="coordinate", dual=eye)


def haar_basis(levels):
    """L^inf-normalized Haar functions on ``2**levels`` dyadic cells.

    Column 0 is the constant; then level by level, left to right, each column
    is +1 on the left half and -1 on the right half of its dyadic interval.
    """
    n = 2 ** levels
    H = np.zeros((n, n))
    H[:, 0] = 1.0
    col = 1
    for j in range(levels):
        width = n >> j
        for k in range(2 ** j):
            lo = k * width
            H[lo:lo + width // 2, col] = 1.0
            H[lo + width // 2:lo + width, col] = -1.0
            col += 1
    return H


def build_haar_l1(levels):
    """Haar system on a uniform dyadic grid of L^1(0, 1), one block per function."""
    if not isinstance(levels, (int, np.integer)) or not 1 <= levels <= 12:
        raise ValueError("levels must be an integer in 1..12")
    n = 2 ** levels
    space = SpaceModel.weighted_l1(np.full(n, 1.0 / n))
    H = haar_basis(levels)
    # biorthogonal functionals h*(f) = <f, h> / <h, h> under the uniform weight
    dual = H.T / (H * H).sum(axis=0)[:, None]
    model = build_basis_decomposition(space, H, [1] * n, name=f"haar_l1_L{levels}", dual=dual)
    if abs(model.K - 1.0) > TOL:
        raise AssertionError(f"Haar partial sums not contractive: K={model.K}")
    return model


def build_trig_lp(p, n_modes):
    """Fourier partial sums on ``2*n_modes`` equispaced points of the circle.

    Blocks: the constant, then frequencies {+1, -1}, ..., {+(n_modes-1), -(n_modes-1)},
    then the Nyquist frequency alone, i.e. ``n_modes + 1`` blocks.
    """
    p = float(p)
    if not 1 < p < np.inf:
        raise ValueError("trigonometric partial sums need 1 < p < inf")
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    n = 2 * n_modes
    freqs = [0]
    for k in range(1, n_modes):
        freqs += [k, -k]
    freqs.append(n_modes)
    grid = np.arange(n)
    F = np.exp(2j * np.pi * np.outer(grid, freqs) / n)
    dual = F.conj().T / n
    dims = [1] + [2] * (n_modes - 1) + [1]
    return build_basis_decomposition(SpaceModel.lp(n, p), F, dims, name=f"trig_l{p:g}_{n_modes}", dual=dual)


# ---------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    passed: bool
    checks: dict
    worst: float
    method: str

    def to_dict(self):
        return {"passed": self.passed, "worst_violation": self.worst,
                "method": self.method, "checks": self.checks}


def _explicit_checks(model, Ps):
    M, dim = len(Ps), model.dim
    eye = np.eye(dim)
    orth = idem = 0.0
    for n in range(M):
        idem = max(idem, np.abs(Ps[n] @ Ps[n] - Ps[n]).max())
        for m in range(M):
            if m != n:
                orth = max(orth, np.abs(Ps[n] @ Ps[m]).max())
    total = np.abs(Ps.sum(axis=0) - eye).max()
    partial = np.cumsum(Ps, axis=0)
    nested = 0.0
    for a in range(M):
        for b in range(M):
            nested = max(nested, np.abs(partial[a] @ partial[b] - partial[min(a, b)]).max())
    return {"orthogonality": orth, "idempotence": idem, "resolution_of_identity": total,
            "nested_partial_sums": nested}


def validate_decomposition(model, tol=TOL, explicit_limit=64, seed=0):
    """Check every decomposition axiom to ``tol``; failures go in the report.

    Small models (``dim <= explicit_limit``) are checked on their explicit
    projections.  Larger factorized models are checked through biorthogonality
    ``D B = I`` and ``B D = I`` (which imply all the block identities) plus a
    sample of nested partial-sum products.
    """
    checks = {}
    if model.dim <= explicit_limit or not model.factorized:
        checks.update(_explicit_checks(model, np.asarray(model.blocks)))
        method = "explicit"
    else:
        eye = np.eye(model.dim)
        checks["biorthogonality"] = float(np.abs(model.dual @ model.basis - eye).max())
        checks["resolution_of_identity"] = float(np.abs(model.basis @ model.dual - eye).max())
        rng = np.random.default_rng(seed)
        nested = 0.0
        for a, b in rng.integers(0, model.n_blocks + 1, size=(6, 2)):
            Pa, Pb = partial_sum(model, a), partial_sum(model, b)
            nested = max(nested, np.abs(Pa @ Pb - partial_sum(model, min(a, b))).max())
        checks["nested_partial_sums"] = float(nested)
        method = "factorized"
    if model.factorized:
        K, exact = schauder_constant(model.space, model.basis, model.dual, model.block_dims)
    else:
        vals = [operator_norm(model.space, P) for P in np.cumsum(model.projections, axis=0)]
        K, exact = max(v for v, _ in vals), all(e for _, e in vals)
    # stored K must dominate every partial sum (a search value can only be lower)
    checks["schauder_constant"] = max(0.0, K - model.K) if exact else 0.0
    checks = {k: float(v) for k, v in checks.items()}
    worst = max(checks.values())
    return ValidationReport(worst <= tol, checks, worst, method)
