"""Shared dense linear algebra helpers.

Everything here assumes desk-scale matrices (dimension up to a few
thousand) and goes through full factorizations; no iterative or
randomized shortcuts.
"""

import numpy as np
import scipy.sparse as sp

HERMITICITY_TOL = 1e-12


def as_dense(M):
    """Return a dense complex ndarray view/copy of a dense or sparse matrix."""
    if sp.issparse(M):
        return np.asarray(M.todense())
    return np.asarray(M)


def herm(M):
    """Hermitian part (M + M*)/2."""
    M = as_dense(M)
    return 0.5 * (M + M.conj().T)


def hermiticity_defect(M):
    """Operator-norm defect ||M - M*||."""
    M = as_dense(M)
    return opnorm(M - M.conj().T)


def opnorm(M):
    """Spectral norm via largest singular value (0 for empty)."""
    M = as_dense(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def eigh_psd(M, clip=True):
    """Eigen-decomposition of a Hermitian (near-)PSD matrix.

    Returns (w, U) with eigenvalues ascending; tiny negative eigenvalues
    from roundoff are clipped to zero when clip=True.
    """
    w, U = np.linalg.eigh(as_dense(M))
    if clip:
        w = np.clip(w, 0.0, None)
    return w, U


def func_herm(M, f, eig=None):
    """Apply a scalar function to a Hermitian matrix by functional calculus."""
    if eig is None:
        w, U = np.linalg.eigh(as_dense(M))
    else:
        w, U = eig
    fw = f(w)
    return (U * fw) @ U.conj().T


def psd_power(M, power, eig=None, zero_tol=None):
    """M**power for Hermitian PSD M.

    Complex exponents are allowed.  Eigenvalues at (numerical) zero are
    mapped to zero, which realizes the convention 0**z = 0 for any
    exponent, including purely imaginary ones.
    """
    if eig is None:
        eig = eigh_psd(M)
    w, U = eig
    if zero_tol is None:
        zero_tol = 1e-14 * max(1.0, float(np.max(w)) if w.size else 1.0)
    out = np.zeros(w.shape, dtype=complex)
    nz = w > zero_tol
    out[nz] = np.exp(power * np.log(w[nz].astype(complex)))
    return (U * out) @ U.conj().T


def singular_values_desc(M):
    """Singular values of a (rectangular) matrix, non-increasing."""
    M = as_dense(M)
    if min(M.shape) == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def trace_norm(M, via_gram_above=900):
    """Trace norm (sum of singular values).

    For large matrices the singular values are taken as the square roots
    of the eigenvalues of M*M, which is considerably faster than a full
    SVD and accurate enough for slope fits.
    """
    M = as_dense(M)
    n = min(M.shape)
    if n == 0:
        return 0.0
    if n <= via_gram_above:
        return float(np.sum(np.linalg.svd(M, compute_uv=False)))
    g = np.linalg.eigvalsh(M.conj().T @ M)
    return float(np.sum(np.sqrt(np.clip(g, 0.0, None))))


def solve_hermitian_shifted(M, shift, rhs):
    """Solve (shift + M) X = rhs for Hermitian M."""
    n = M.shape[0]
    return np.linalg.solve(shift * np.eye(n) + M, rhs)


def loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x); y must be positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < 2:
        return float("nan")
    c = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(c[0])


def ls_slope(x, y):
    """Least-squares slope of y against x (y may be complex)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef[0]


def plateau_window(n_total, lo=0.25, hi=0.55):
    """Index window [n_total**lo, n_total**hi] used for tail diagnostics.

    Returns (n0, n1) inclusive; guarded so the window holds at least
    four indices for any n_total >= 16.
    """
    n0 = int(np.ceil(n_total ** lo))
    n1 = int(np.floor(n_total ** hi))
    n0 = max(n0, 1)
    n1 = min(n1, n_total - 1)
    if n1 < n0 + 3:
        n1 = min(n_total - 1, n0 + 3)
    return n0, n1


def geometric_cutoffs(n_total, n_points=12, n_min=8):
    """Geometrically spaced integer cutoffs from n_min up to n_total.

    Cutoffs are deduplicated; fewer than n_points may be returned for
    short sequences.
    """
    if n_total < n_min:
        return np.array([n_total], dtype=int)
    grid = np.geomspace(n_min, n_total, n_points)
    cuts = np.unique(np.round(grid).astype(int))
    return cuts[cuts >= 1]


def relative_gap(a, b):
    """|a - b| / max(|a|, |b|), zero when both vanish."""
    denom = max(abs(a), abs(b))
    if denom == 0:
        return 0.0
    return float(abs(a - b) / denom)
