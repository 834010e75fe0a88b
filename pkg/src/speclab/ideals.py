"""Singular-value functionals, ideal quasi-norms, submajorisation, traces.

Everything is expressed through the singular value sequence mu(n, T)
(non-increasing, with multiplicity).  Quasi-norms cover the Schatten
class (sum of mu**p), the weak ideal (sup (n+1)**(1/p) mu), and the
Lorentz L_{q,1} ideal (sum mu / (n+1)**(1-1/q)).  Trace estimation on
the weak-trace ideal is done by two independent estimators so their
mutual agreement can be reported.
"""

from dataclasses import dataclass, field

import numpy as np

from ._linalg import (
    as_dense,
    geometric_cutoffs,
    ls_slope,
    singular_values_desc,
)
from .report import DiagnosticReport, TraceEstimate

LOG_SUBMAJ_TOL = 1e-9


class DiagnosticError(RuntimeError):
    """An estimate cannot be formed reliably from the given data."""


@dataclass(frozen=True)
class SingularSpectrum:
    """Non-increasing, non-negative singular value sequence."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("singular values must form a 1-d sequence")
        if not np.all(np.isfinite(v)):
            raise ValueError("singular values must be finite")
        if v.size and np.min(v) < 0:
            raise ValueError("singular values must be non-negative")
        if v.size > 1 and np.any(np.diff(v) > 1e-12 * max(1.0, v[0])):
            raise ValueError("singular values must be non-increasing")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return int(self.values.size)

    def __getitem__(self, k):
        return self.values[k]

    def padded(self, length):
        if length < len(self):
            raise ValueError("cannot pad to a shorter length")
        return SingularSpectrum(np.pad(self.values, (0, length - len(self))))

    def power(self, theta):
        return SingularSpectrum(np.sort(self.values ** theta)[::-1])


@dataclass(frozen=True)
class IdealKind:
    """Tag for one of the computable operator ideals."""

    tag: str
    parameter: float

    VALID = ("schatten", "weak", "lorentz_q1")

    def __post_init__(self):
        if self.tag not in self.VALID:
            raise ValueError(f"unknown ideal tag {self.tag!r}")
        p = float(self.parameter)
        if self.tag in ("schatten", "weak") and not (p > 0):
            raise ValueError("exponent must be positive")
        if self.tag == "lorentz_q1" and not (p >= 1):
            raise ValueError("Lorentz parameter q must satisfy q >= 1")

    @classmethod
    def schatten(cls, p):
        return cls("schatten", float(p))

    @classmethod
    def weak(cls, p):
        return cls("weak", float(p))

    @classmethod
    def lorentz_q1(cls, q):
        return cls("lorentz_q1", float(q))


def as_spectrum(s):
    if isinstance(s, SingularSpectrum):
        return s
    return SingularSpectrum(np.asarray(s, dtype=float))


def singular_values(T):
    """mu(T): the singular value sequence of a finite matrix.

    Equals the eigenvalues of |T| listed in non-increasing order; length
    is min(rows, cols).
    """
    T = as_dense(T)
    if T.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.all(np.isfinite(T)):
        raise ValueError("matrix entries must be finite")
    return SingularSpectrum(singular_values_desc(T))


def quasi_norm(s, kind):
    """Evaluate the quasi-norm of the given ideal on a singular spectrum."""
    s = as_spectrum(s)
    mu = s.values
    if not isinstance(kind, IdealKind):
        raise ValueError("kind must be an IdealKind")
    n = np.arange(1, mu.size + 1, dtype=float)
    p = kind.parameter
    if kind.tag == "schatten":
        return float(np.sum(mu ** p) ** (1.0 / p))
    if kind.tag == "weak":
        if mu.size == 0:
            return 0.0
        return float(np.max(n ** (1.0 / p) * mu))
    # lorentz_q1
    return float(np.sum(mu / n ** (1.0 - 1.0 / p)))


def log_submajorises(a, b, tol=LOG_SUBMAJ_TOL):
    """Test the prefix-product domination prod a_k <= prod b_k for all n.

    Sequences are padded with zeros to a common length and compared in
    the log domain with multiplicative slack (1 + tol).  A zero prefix
    product on the right forces a zero on the left.  Returns a dict with
    ``holds`` and ``worst_margin`` (the largest prefix log-difference;
    -inf when every left prefix vanishes against a positive right one,
    +inf on a hard zero-versus-positive violation).
    """
    a = as_spectrum(a)
    b = as_spectrum(b)
    length = max(len(a), len(b))
    if length == 0:
        return {"holds": True, "worst_margin": 0.0}
    av = a.padded(length).values
    bv = b.padded(length).values

    with np.errstate(divide="ignore"):
        la = np.where(av > 0, np.log(np.where(av > 0, av, 1.0)), -np.inf)
        lb = np.where(bv > 0, np.log(np.where(bv > 0, bv, 1.0)), -np.inf)
    pa = np.cumsum(la)
    pb = np.cumsum(lb)

    holds = True
    worst = -np.inf
    slack = np.log1p(tol)
    for x, y in zip(pa, pb):
        if np.isinf(y) and y < 0:
            if np.isinf(x) and x < 0:
                worst = max(worst, 0.0)
            else:
                holds = False
                worst = np.inf
        elif np.isinf(x) and x < 0:
            worst = max(worst, -np.inf)
        else:
            margin = x - y
            worst = max(worst, margin)
            if margin > slack:
                holds = False
    return {"holds": holds, "worst_margin": float(worst)}


def _dixmier_log_average(terms, n_samples, min_cutoff, tail_fraction):
    """Logarithmic average over geometric cutoffs.

    The estimate is the rate of growth of the partial sums S(N) against
    log N, fitted by least squares over the geometric cutoff grid; per
    interval growth rates are reported as samples.  For mu = c/(n+1)
    this converges to c (the normalisation of the trace), and for
    summable sequences the partial sums flatten so the estimate
    vanishes.
    """
    cuts = geometric_cutoffs(len(terms), n_points=n_samples, n_min=min_cutoff)
    if cuts.size < 8:
        raise DiagnosticError(
            f"only {cuts.size} cutoffs available (need >= 8); estimate unreliable"
        )
    csum = np.cumsum(terms)
    S = csum[cuts - 1]
    logn = np.log(cuts.astype(float))
    # local growth rates between consecutive cutoffs
    local = (S[1:] - S[:-1]) / (logn[1:] - logn[:-1])
    samples = [(int(cuts[j + 1]), complex(local[j])) for j in range(local.size)]

    fit_from = max(0, int(np.floor(cuts.size * (1.0 - 2.0 * tail_fraction))))
    value_c = ls_slope(logn[fit_from:], S[fit_from:])

    tail_from = max(0, int(np.ceil(local.size * (1.0 - tail_fraction))))
    tail = local[tail_from:]
    spread = float(np.max(np.abs(tail[:, None] - tail[None, :]))) if tail.size else 0.0
    return value_c, samples, spread


def _residue_basis_fit(eps, F, scale):
    """Fit F(eps) = a (1 - exp(-eps*scale)) + cubic(eps) and return a.

    The first basis function is the exact truncation profile of a
    finite 1/n tail of logarithmic length ``scale``; the polynomial
    part absorbs the analytic remainder.  The coefficient ``a`` is the
    residue estimate (the value the estimated trace assigns), i.e. the
    intercept of the fit once the finite-cutoff profile is divided out.
    """
    f1 = 1.0 - np.exp(-eps * scale)
    A = np.vstack([f1, eps, eps ** 2, eps ** 3]).T
    coef, *_ = np.linalg.lstsq(A, F, rcond=None)
    a = coef[0]
    poly = A[:, 1:] @ coef[1:]
    per_point = np.where(f1 > 1e-12, (F - poly) / np.where(f1 > 1e-12, f1, 1.0), 0.0)
    return a, per_point


def _dixmier_zeta(terms, eps_lo, eps_hi, n_eps):
    """Zeta-residue estimator on an eigenvalue/singular-value sequence.

    F(eps) = eps * sum_n t_n (n+1)**(-eps) is a finite zeta function in
    eps, linear in the sequence; for mu = c/(n+1) it behaves like
    c (1 - N**(-eps)) plus an analytic part, so the residue c is read
    off by fitting the truncation profile explicitly (N = length).
    """
    if n_eps < 8:
        raise DiagnosticError("need at least 8 epsilon grid points")
    eps = np.linspace(eps_lo, eps_hi, n_eps)
    t = np.asarray(terms)
    n1 = np.arange(1, t.size + 1, dtype=float)
    F = np.array([e * np.sum(t * n1 ** (-e)) for e in eps])
    scale = np.log(max(len(t), 2))
    a, per_point = _residue_basis_fit(eps, F, scale)
    samples = [(float(eps[j]), complex(F[j])) for j in range(eps.size)]
    spread = float(np.max(np.abs(per_point[:, None] - per_point[None, :]))) if per_point.size else 0.0
    return a, samples, spread


def dixmier_estimate(
    s,
    method="log_average",
    *,
    n_samples=12,
    min_cutoff=8,
    tail_fraction=0.5,
    eps_grid=(0.02, 0.2, 12),
):
    """Estimate the value a normalised trace assigns to a spectrum.

    ``s`` is a SingularSpectrum, or for a non-normal trace argument the
    eigenvalue list ordered by non-increasing modulus.  Both estimators
    return 1 on the harmonic sequence diag(1/(n+1)) and vanish on
    summable input.
    """
    if isinstance(s, SingularSpectrum):
        terms = s.values.astype(complex)
    else:
        terms = np.asarray(s, dtype=complex).ravel()
        order = np.lexsort((-terms.real, -np.abs(terms)))
        terms = terms[order]
    if terms.size == 0:
        raise DiagnosticError("empty spectrum")

    if method == "log_average":
        value_c, samples, spread = _dixmier_log_average(
            terms, n_samples, min_cutoff, tail_fraction
        )
    elif method == "zeta_residue":
        value_c, samples, spread = _dixmier_zeta(terms, *eps_grid)
    else:
        raise ValueError(f"unknown estimator {method!r}")

    value_c = complex(value_c)
    meta = {"imag": value_c.imag, "n_terms": int(terms.size)}
    return TraceEstimate(
        value=float(value_c.real),
        method=method,
        samples=samples,
        spread=spread,
        meta=meta,
    )


def zeta_residue_weighted(T, S, p, eps_grid=(0.02, 0.2, 12)):
    """Zeta-residue estimator in weighted form.

    Computes F(eps) = (eps/p) Tr(T (1+S)**(-eps/2)) on the epsilon grid
    and fits the truncation-aware residue model, with the logarithmic
    scale taken from the spectral radius of S.  Matches the sequence
    estimator when T = (1+S)**(-p/2).
    """
    from ._linalg import eigh_psd

    T = as_dense(T)
    w, U = eigh_psd(S)
    eps_lo, eps_hi, n_eps = eps_grid
    if n_eps < 8:
        raise DiagnosticError("need at least 8 epsilon grid points")
    eps = np.linspace(eps_lo, eps_hi, n_eps)
    # Tr(T U diag((1+w)^(-eps/2)) U*) = sum_k (U* T U)_kk (1+w_k)^(-eps/2)
    d = np.einsum("ij,jk,ki->i", U.conj().T, T, U)
    F = np.array([e / p * np.sum(d * (1.0 + w) ** (-e / 2.0)) for e in eps])
    scale = 0.5 * np.log(1.0 + float(np.max(w))) if w.size else 1.0
    scale = max(scale, 1e-6)
    a, per_point = _residue_basis_fit(eps, F, scale)
    samples = [(float(eps[j]), complex(F[j])) for j in range(eps.size)]
    spread = float(np.max(np.abs(per_point[:, None] - per_point[None, :])))
    return TraceEstimate(
        value=float(np.real(a)),
        method="zeta_residue",
        samples=samples,
        spread=spread,
        meta={"imag": float(np.imag(a)), "weighted": True, "p": float(p)},
    )


def _conjugate_exponents(p, q, tol=1e-12):
    return abs(1.0 / p + 1.0 / q - 1.0) <= tol


def verify_ideal_inequalities(T, S, p, q, tol=LOG_SUBMAJ_TOL):
    """Measure the classical ideal inequalities on a concrete pair.

    Checks the Hoelder bound ||TS||_1 <= ||T||_{p,inf} ||S||_{q,1}, the
    weak-norm monotonicity constant e under log-submajorisation, the
    positivity power-monotonicity, and records (never asserts) the
    empirical constant of the interpolation bound
    ||X||_1 <= c_p ||X||_{p/(p+1),inf}^{p/(p+1)} ||X||_inf^{1/(p+1)}.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if not _conjugate_exponents(p, q):
        raise ValueError("exponents must satisfy 1/p + 1/q = 1")
    T = as_dense(T)
    S = as_dense(S)
    rep = DiagnosticReport(title="ideal-inequalities", meta={"p": p, "q": q})

    mu_T = singular_values(T)
    mu_S = singular_values(S)
    mu_TS = singular_values(T @ S)

    lhs = quasi_norm(mu_TS, IdealKind.schatten(1))
    rhs = quasi_norm(mu_T, IdealKind.weak(p)) * quasi_norm(mu_S, IdealKind.lorentz_q1(q))
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else np.inf)
    rep.add(
        "holder",
        ratio,
        1.0 + tol,
        ratio <= 1.0 + tol,
        "holder-weak-lorentz",
        lhs=lhs,
        rhs=rhs,
    )

    # interpolation constant candidate, measured over {T, S, TS}
    cp_candidates = []
    for name, mu in (("T", mu_T), ("S", mu_S), ("TS", mu_TS)):
        if len(mu) == 0 or mu[0] == 0:
            continue
        denom = (
            quasi_norm(mu, IdealKind.weak(p / (p + 1.0))) ** (p / (p + 1.0))
            * mu[0] ** (1.0 / (p + 1.0))
        )
        if denom > 0:
            cp_candidates.append(quasi_norm(mu, IdealKind.schatten(1)) / denom)
    cp = max(cp_candidates) if cp_candidates else 0.0
    rep.add(
        "interpolation-constant",
        cp,
        None,
        True,
        "schatten-weak-interpolation",
        note="empirical c_p candidate; the constant is abstract and never asserted",
    )

    # weak-norm monotonicity under log-submajorisation, constant e
    sub = log_submajorises(mu_T, mu_S, tol=tol)
    if sub["holds"]:
        wT = quasi_norm(mu_T, IdealKind.weak(1))
        wS = quasi_norm(mu_S, IdealKind.weak(1))
        ratio_mono = wT / (np.e * wS) if wS > 0 else (0.0 if wT == 0 else np.inf)
        rep.add(
            "log-submajorisation-monotonicity",
            ratio_mono,
            1.0 + tol,
            ratio_mono <= 1.0 + tol,
            "weak-norm-monotone-constant-e",
            submajorises=True,
        )
    else:
        rep.add(
            "log-submajorisation-monotonicity",
            None,
            None,
            True,
            "weak-norm-monotone-constant-e",
            submajorises=False,
            note="pair is not log-submajorised; monotonicity not applicable",
        )

    # power monotonicity for positive pairs via matrix functional calculus
    herm_defect = max(
        float(np.linalg.norm(T - T.conj().T)), float(np.linalg.norm(S - S.conj().T))
    )
    if herm_defect < 1e-10 and sub["holds"]:
        eigT = np.linalg.eigvalsh(T)
        eigS = np.linalg.eigvalsh(S)
        if eigT.size and eigS.size and min(eigT.min(), eigS.min()) > -1e-12:
            from ._linalg import psd_power

            Tp = psd_power(T, p)
            Sp = psd_power(S, p)
            sub_p = log_submajorises(singular_values(Tp), singular_values(Sp), tol=tol)
            rep.add(
                "power-monotonicity",
                sub_p["worst_margin"],
                np.log1p(tol),
                sub_p["holds"],
                "log-submajorisation-power-stability",
                exponent=p,
            )
    return rep


def alt_check(A, B, r, tol=LOG_SUBMAJ_TOL):
    """Araki-Lieb-Thirring check |AB|^r ≺≺_log A^r B^r for positive A, B."""
    from ._linalg import psd_power

    A = as_dense(A)
    B = as_dense(B)
    lhs = as_spectrum(singular_values(A @ B).values ** r)
    rhs = singular_values(psd_power(A, r) @ psd_power(B, r))
    return log_submajorises(lhs, rhs, tol=tol)
