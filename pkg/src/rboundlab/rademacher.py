"""Rademacher averages and certified lower bounds on R-bounds.

For vectors ``x_1, ..., x_k`` the Rademacher average is the mean of
``||sum_j s_j x_j||`` over the ``2**k`` sign patterns ``s`` (first moment) or
the root mean square (second moment).  A family ``F`` of operators has
R-bound at least ``avg(T_j x_j) / avg(x_j)`` for any ``T_j`` in ``F``, so every
ratio evaluated by exact enumeration is a certified lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import DimensionError, norm

# max number of entries in one block of sign-pattern sums
_CHUNK = 1 << 21


@dataclass(frozen=True)
class RademacherConfig:
    exact_threshold: int = 16
    mc_samples: int = 20000
    moment: str = "first"
    seed: int = 0

    def __post_init__(self):
        if self.exact_threshold < 1:
            raise ValueError("exact_threshold must be >= 1")
        if self.mc_samples < 100:
            raise ValueError("mc_samples must be >= 100")
        if self.moment not in ("first", "second"):
            raise ValueError("moment is 'first' or 'second'")


@dataclass
class RBoundWitness:
    operators: list
    vectors: np.ndarray
    ratio: float
    numerator: float
    denominator: float
    indices: tuple = ()
    exact: bool = True
    history: list = field(default_factory=list)


def _as_rows(vectors, space):
    X = np.atleast_2d(np.asarray(vectors))
    if X.shape[-1] != space.dim:
        raise DimensionError(f"vectors of length {X.shape[-1]} in a space of dimension {space.dim}")
    return X


def sign_patterns(k):
    """All sign patterns with the first sign fixed to +1, as a ``(2**(k-1), k)`` array.

    ``s`` and ``-s`` give the same norm, so half the patterns suffice.
    """
    if k == 0:
        return np.ones((1, 0))
    bits = (np.arange(1 << (k - 1))[:, None] >> np.arange(k - 1)) & 1
    return np.hstack([np.ones((1 << (k - 1), 1)), 1.0 - 2.0 * bits])


def pattern_norms(X, space):
    """Norms of ``sum_j s_j x_j`` over the half set of sign patterns.

    Enumerates an inner group of signs as one matrix product and walks the
    remaining signs in Gray-code order, adding ``+-2 x_j`` at each step.
    """
    # zero rows change nothing; dropping them keeps padded witnesses bit-identical
    X = X[np.any(X != 0, axis=1)]
    k, dim = X.shape
    if k == 0:
        return np.zeros(1)
    inner = max(1, min(k, int(np.log2(max(2, _CHUNK // max(dim, 1)))) + 1))
    base = sign_patterns(inner) @ X[:inner]
    outer = X[inner:]
    if len(outer) == 0:
        return norm(space, base)
    out = np.empty((1 << len(outer), base.shape[0]))
    offset = -outer.sum(axis=0)
    signs = -np.ones(len(outer))
    out[0] = norm(space, base + offset)
    for g in range(1, 1 << len(outer)):
        j = (g & -g).bit_length() - 1
        signs[j] = -signs[j]
        offset = offset + 2 * signs[j] * outer[j]
        out[g] = norm(space, base + offset)
    return out.ravel()


def _moment(values, moment):
    if moment == "first":
        return float(np.mean(values))
    return float(np.sqrt(np.mean(values * values)))


def rademacher_norm_exact(vectors, space, moment="first", exact_threshold=16):
    """Exact Rademacher average by enumerating every sign pattern."""
    X = _as_rows(vectors, space)
    if len(X) > exact_threshold:
        raise ValueError(f"k={len(X)} above the exact threshold {exact_threshold}; use rademacher_norm_mc")
    return _moment(pattern_norms(X, space), moment)


def rademacher_norm_mc(vectors, space, moment="first", samples=20000, seed=0):
    """Monte Carlo estimate and 95% half-width from independent uniform signs."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    X = _as_rows(vectors, space)
    rng = np.random.default_rng(seed)
    vals = np.empty(samples)
    step = max(1, _CHUNK // max(space.dim, 1))
    for lo in range(0, samples, step):
        hi = min(samples, lo + step)
        S = rng.choice([-1.0, 1.0], size=(hi - lo, len(X)))
        vals[lo:hi] = norm(space, S @ X)
    if moment == "first":
        est = float(vals.mean())
        hw = 1.96 * float(vals.std(ddof=1)) / np.sqrt(samples)
        return est, hw
    sq = vals * vals
    est = float(np.sqrt(sq.mean()))
    hw_sq = 1.96 * float(sq.std(ddof=1)) / np.sqrt(samples)
    return est, (hw_sq / (2 * est) if est > 0 else 0.0)


def rademacher_norm(vectors, space, cfg=None):
    """Exact when ``k <= cfg.exact_threshold``, otherwise the Monte Carlo estimate."""
    cfg = cfg or RademacherConfig()
    X = _as_rows(vectors, space)
    if len(X) <= cfg.exact_threshold:
        return rademacher_norm_exact(X, space, cfg.moment, cfg.exact_threshold)
    return rademacher_norm_mc(X, space, cfg.moment, cfg.mc_samples, cfg.seed)[0]


def _apply_family(family, X):
    return np.stack([np.asarray(T) @ x for T, x in zip(family, X)])


def rbound_ratio(family, vectors, space, cfg=None, return_error=False):
    """``avg(T_j x_j) / avg(x_j)`` for paired operators and vectors.

    With ``return_error=True`` a ``(ratio, half_width)`` pair is returned; the
    half width is 0 in exact mode and propagated to first order otherwise.
    """
    cfg = cfg or RademacherConfig()
    X = _as_rows(vectors, space)
    if len(family) != len(X):
        raise ValueError(f"{len(family)} operators for {len(X)} vectors")
    Y = _apply_family(family, X)
    if len(X) <= cfg.exact_threshold:
        num = rademacher_norm_exact(Y, space, cfg.moment, cfg.exact_threshold)
        den = rademacher_norm_exact(X, space, cfg.moment, cfg.exact_threshold)
        hw = 0.0
    else:
        num, hw_n = rademacher_norm_mc(Y, space, cfg.moment, cfg.mc_samples, cfg.seed)
        den, hw_d = rademacher_norm_mc(X, space, cfg.moment, cfg.mc_samples, cfg.seed)
        hw = (num / den) * np.hypot(hw_n / num if num else 0.0, hw_d / den) if den else np.inf
    if den == 0:
        raise ZeroDivisionError("all witness vectors are zero")
    ratio = num / den
    return (ratio, hw) if return_error else ratio


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 4
    steps: int = 400
    step_size: float = 0.5
    k: int | None = None
    seed: int = 0
    assign: str = "fixed"
    complex_vectors: bool = False


def _ratio_parts(Y, X, space, moment):
    num = _moment(pattern_norms(Y, space), moment)
    den = _moment(pattern_norms(X, space), moment)
    return num, den


def rbound_lower_search(family, space, search_cfg=None, cfg=None, init=None):
    """Best R-bound witness from random restarts and greedy coordinate ascent.

    ``assign="fixed"`` pairs ``x_j`` with ``family[j]`` (``k = len(family)``);
    ``assign="free"`` also searches over which member acts on each ``x_j``.
    ``init`` is an ``(indices, vectors)`` warm start, evaluated before any restart;
    the returned ratio is never below it.
    """
    search_cfg = search_cfg or SearchConfig()
    cfg = cfg or RademacherConfig()
    family = [np.asarray(T) for T in family]
    if not family:
        raise ValueError("empty family")
    for T in family:
        if T.shape != (space.dim, space.dim):
            raise DimensionError(f"operator of shape {T.shape} on a space of dimension {space.dim}")
    fixed = search_cfg.assign == "fixed"
    k = len(family) if fixed else (search_cfg.k or len(family))
    if k > cfg.exact_threshold:
        raise ValueError("certified search needs k <= exact_threshold")
    rng = np.random.default_rng(search_cfg.seed)
    dtype = complex if search_cfg.complex_vectors else float
    for T in family:
        if np.iscomplexobj(T):
            dtype = complex

    def draw(shape):
        v = rng.standard_normal(shape)
        if dtype is complex:
            v = v + 1j * rng.standard_normal(shape)
        return v

    best = None
    history = []

    def consider(idx, X):
        nonlocal best
        Y = np.stack([family[i] @ x for i, x in zip(idx, X)])
        num, den = _ratio_parts(Y, X, space, cfg.moment)
        if den > 0 and (best is None or num / den > best[0]):
            best = (num / den, num, den, tuple(idx), X.copy())
        return Y, num, den

    if init is not None:
        idx0, X0 = init
        X0 = np.asarray(X0, dtype=dtype)
        if len(X0) < k:
            pad = np.zeros((k - len(X0), space.dim), dtype=dtype)
            X0 = np.vstack([X0, pad])
            idx0 = tuple(idx0) + tuple(range(len(idx0), k)) if fixed else tuple(idx0) + (0,) * (k - len(idx0))
        consider(list(idx0), X0)

    for r in range(search_cfg.restarts):
        idx = list(range(k)) if fixed else list(rng.integers(0, len(family), size=k))
        if r % 2 == 0:
            # sparse spikes: point masses are the classical bad witnesses off Hilbert space
            # spikes share a small pool of locations; coinciding spikes drive the ratio
            X = np.zeros((k, space.dim), dtype=dtype)
            live = rng.random(k) < 0.7
            live[rng.integers(k)] = True
            pool = rng.choice(space.dim, size=min(space.dim, int(rng.integers(1, 3))), replace=False)
            rows = np.flatnonzero(live)
            X[rows, rng.choice(pool, size=len(rows))] = rng.choice([-1.0, 1.0], size=len(rows))
        else:
            X = draw((k, space.dim))
        if best is not None and r % 4 == 3:
            idx, X = list(best[3]), best[4] + 0.1 * np.abs(best[4]).max() * draw((k, space.dim))
        Y, num, den = consider(idx, X)
        cur = num / den
        step = search_cfg.step_size * float(np.abs(X).max() or 1.0)
        for _ in range(search_cfg.steps):
            j = int(rng.integers(k))
            if not fixed and rng.random() < 0.2:
                new = int(rng.integers(len(family)))
                Yj = family[new] @ X[j]
                Y2 = Y.copy()
                Y2[j] = Yj
                n2, d2 = _ratio_parts(Y2, X, space, cfg.moment)
                if d2 > 0 and n2 / d2 > cur:
                    idx[j], Y, cur = new, Y2, n2 / d2
                continue
            i = int(rng.integers(space.dim))
            delta = step * draw(())
            X2, Y2 = X.copy(), Y.copy()
            X2[j, i] += delta
            Y2[j] += delta * family[idx[j]][:, i]
            n2, d2 = _ratio_parts(Y2, X2, space, cfg.moment)
            if d2 > 0 and n2 / d2 > cur:
                X, Y, cur = X2, Y2, n2 / d2
                if cur > best[0]:
                    best = (cur, n2, d2, tuple(idx), X.copy())
            else:
                step *= 0.995
        history.append(best[0])

    ratio, num, den, idx, X = best
    return RBoundWitness(operators=[family[i] for i in idx], vectors=X, ratio=float(ratio),
                         numerator=float(num), denominator=float(den), indices=idx,
                         exact=True, history=history)


def rbound_curve(families, space, search_cfg=None, cfg=None):
    """Lower bounds for a nested sequence of fixed-assignment families.

    Each witness is carried into the next, larger family (padded with a zero
    vector), so the returned bounds are nondecreasing.
    """
    out = []
    init = None
    for fam in families:
        w = rbound_lower_search(fam, space, search_cfg, cfg, init=init)
        init = (w.indices, w.vectors)
        out.append(w)
    return out
