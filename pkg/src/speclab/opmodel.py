"""Finite-difference operator models.

The central object is a rectangular pair (V, W, Dhat): W is the full
lattice spinor space, V the subspace supported on a masked interior,
and Dhat: V -> W a difference operator.  D*D then lives on V and DD*
on W, which reproduces the two distinct self-adjoint squares of a
closed symmetric operator at finite scale.  Central differences keep
the formal operator Hermitian; the 1-d staggered pair uses forward
differences and reproduces the interval kernel dimensions exactly.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.ndimage import binary_dilation, generate_binary_structure

from ._linalg import as_dense

SPINOR_DIAG_TOL = 1e-12


class MarginError(ValueError):
    """A sampled function violates its interior-margin precondition."""


@dataclass(frozen=True)
class GridDomain:
    """Uniform node lattice over a box with a boolean interior mask."""

    extents: tuple
    nodes: tuple
    mask: np.ndarray
    shape: str = "rect"

    def __post_init__(self):
        if len(self.extents) != len(self.nodes):
            raise ValueError("extents and nodes must have equal length")
        if any(n < 3 for n in self.nodes):
            raise ValueError("need at least 3 nodes per axis")
        if self.mask.shape != tuple(self.nodes):
            raise ValueError("mask shape must match the node lattice")
        if not np.any(self.mask):
            raise ValueError("interior is empty")
        # the mask may only mark non-boundary lattice points
        for ax in range(self.d):
            sl = [slice(None)] * self.d
            for edge in (0, -1):
                sl[ax] = edge
                if np.any(self.mask[tuple(sl)]):
                    raise ValueError("mask marks boundary lattice points")

    @property
    def d(self):
        return len(self.nodes)

    @property
    def h(self):
        return tuple(L / (n - 1) for L, n in zip(self.extents, self.nodes))

    @property
    def n_lattice(self):
        return int(np.prod(self.nodes))

    @property
    def interior_idx(self):
        return np.flatnonzero(self.mask.ravel(order="C"))

    @property
    def n_interior(self):
        return int(np.count_nonzero(self.mask))

    def axis_points(self, j):
        return np.linspace(0.0, self.extents[j], self.nodes[j])

    def meshgrid(self):
        axes = [self.axis_points(j) for j in range(self.d)]
        return np.meshgrid(*axes, indexing="ij")

    @classmethod
    def rectangle(cls, extents, nodes):
        nodes = tuple(int(n) for n in nodes)
        mask = np.ones(nodes, dtype=bool)
        for ax in range(len(nodes)):
            sl = [slice(None)] * len(nodes)
            for edge in (0, -1):
                sl[ax] = edge
                mask[tuple(sl)] = False
        return cls(tuple(float(e) for e in extents), nodes, mask, shape="rect")

    @classmethod
    def disc(cls, extents, nodes):
        """Inscribed ellipse interior (strictly inside, boundary ring excluded)."""
        base = cls.rectangle(extents, nodes)
        grids = base.meshgrid()
        r2 = np.zeros(base.nodes)
        for j, g in enumerate(grids):
            c = base.extents[j] / 2.0
            r2 += ((g - c) / c) ** 2
        mask = base.mask & (r2 < 1.0 - 1e-12)
        return cls(base.extents, base.nodes, mask, shape="disc")


@dataclass(frozen=True)
class GammaSet:
    """Hermitian generators of a Euclidean Clifford algebra."""

    d: int
    matrices: tuple
    grading: object = None

    @property
    def N(self):
        return self.matrices[0].shape[0]


_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _pauli_chain(factors):
    out = np.array([[1.0 + 0.0j]])
    for f in factors:
        out = np.kron(out, f)
    return out


def gamma_matrices(d):
    """Recursive Pauli-tensor Clifford construction.

    Returns 2**floor(d/2) dimensional Hermitian matrices satisfying
    g_j g_k + g_k g_j = 2 delta_jk; for even d the grading is the
    chirality element (for d = 2 it equals (-i) g_1 g_2 = diag(1, -1)).
    """
    if not (1 <= d <= 6):
        raise ValueError("dimension must be between 1 and 6")
    if d == 1:
        return GammaSet(1, (np.array([[1.0 + 0.0j]]),), None)
    k = d // 2
    eye = np.eye(2, dtype=complex)
    mats = []
    for j in range(1, k + 1):
        prefix = [_SZ] * (j - 1)
        suffix = [eye] * (k - j)
        mats.append(_pauli_chain(prefix + [_SX] + suffix))
        mats.append(_pauli_chain(prefix + [_SY] + suffix))
    chirality = _pauli_chain([_SZ] * k)
    if d % 2 == 1:
        mats.append(chirality)
        return GammaSet(d, tuple(mats), None)
    return GammaSet(d, tuple(mats), chirality)


def check_clifford(g, tol=1e-12):
    """Max defect of the anticommutation relations and grading axioms."""
    defect = 0.0
    N = g.N
    eye = np.eye(N)
    for j, gj in enumerate(g.matrices):
        defect = max(defect, float(np.abs(gj - gj.conj().T).max()))
        for k, gk in enumerate(g.matrices):
            target = 2.0 * eye if j == k else 0.0
            defect = max(defect, float(np.abs(gj @ gk + gk @ gj - target).max()))
    if g.grading is not None:
        c = g.grading
        defect = max(defect, float(np.abs(c - c.conj().T).max()))
        defect = max(defect, float(np.abs(c @ c - eye).max()))
        for gj in g.matrices:
            defect = max(defect, float(np.abs(c @ gj + gj @ c).max()))
    return defect


def _shift_1d(n, step):
    """Zero-padded shift (S f)(i) = f(i + step) on n nodes."""
    return sp.eye(n, n, k=step, format="csr")


def _axis_operator(dom, j, op1d):
    mats = [sp.identity(n, format="csr") for n in dom.nodes]
    mats[j] = op1d
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def central_difference(dom, j):
    """Skew-symmetric central difference along axis j with zero padding."""
    n = dom.nodes[j]
    h = dom.h[j]
    op = (_shift_1d(n, +1) - _shift_1d(n, -1)) * (1.0 / (2.0 * h))
    return _axis_operator(dom, j, op)


def build_formal_dirac(dom, g):
    """Lattice Dirac operator sum_j -i gamma_j (x) del_j on W = C^N (x) lattice.

    Central differences with zero padding are skew-adjoint, so the
    assembled operator is exactly Hermitian.  Returned sparse (CSR).
    """
    if g.d != dom.d:
        raise ValueError("gamma set dimension must match the grid dimension")
    blocks = None
    for j in range(dom.d):
        piece = sp.kron(sp.csr_matrix(-1j * g.matrices[j]), central_difference(dom, j), format="csr")
        blocks = piece if blocks is None else blocks + piece
    return blocks.tocsr()


@dataclass
class RectangularPair:
    """Finite model (V, W, Dhat) of a closed symmetric operator.

    When ``embed_idx`` is present, V sits inside W as the coordinate
    subspace it indexes and the pair supports an algebra action; the
    compressed operator embed* Dhat is then Hermitian (symmetry of the
    modelled operator on its domain).
    """

    w_dim: int
    v_dim: int
    dhat: sp.csr_matrix
    embed_idx: np.ndarray = None
    domain: GridDomain = None
    gamma: GammaSet = None
    meta: dict = field(default_factory=dict, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def capabilities(self):
        caps = {"spectral"}
        if self.embed_idx is not None:
            caps.add("algebra")
        return caps

    @property
    def spinor_dim(self):
        return self.gamma.N if self.gamma is not None else 1

    def embed_matrix(self):
        if self.embed_idx is None:
            raise ValueError("pair has no embedding of V into W")
        E = sp.csr_matrix(
            (np.ones(self.v_dim), (self.embed_idx, np.arange(self.v_dim))),
            shape=(self.w_dim, self.v_dim),
        )
        return E

    def interior_projector_diag(self):
        d = np.zeros(self.w_dim)
        d[self.embed_idx] = 1.0
        return d

    def compress_to_v(self, M):
        """embed* M embed for a dense or sparse W-operator."""
        if sp.issparse(M):
            return M[self.embed_idx][:, self.embed_idx]
        M = as_dense(M)
        return M[np.ix_(self.embed_idx, self.embed_idx)]

    def dstar_d(self, dense=True):
        key = ("dstar_d", dense)
        if key not in self._cache:
            P = (self.dhat.conj().T @ self.dhat).tocsr()
            self._cache[key] = as_dense(P) if dense else P
        return self._cache[key]

    def dd_star(self, dense=True):
        key = ("dd_star", dense)
        if key not in self._cache:
            P = (self.dhat @ self.dhat.conj().T).tocsr()
            self._cache[key] = as_dense(P) if dense else P
        return self._cache[key]

    def compressed_dirac(self):
        """embed* Dhat, the Hermitian interior compression."""
        if self.embed_idx is None:
            raise ValueError("pair has no embedding of V into W")
        return as_dense(self.dhat[self.embed_idx, :])

    def symmetry_defect(self):
        H = self.compressed_dirac()
        return float(np.abs(H - H.conj().T).max())


def build_dirichlet_pair(dom, g):
    """Dirichlet rectangular pair: V = spinor fields on the masked interior.

    Dhat is the formal Dirac operator restricted to interior columns.
    The spinor-diagonal structure of D*D (cross terms cancel because
    shifted differences on distinct axes commute) is verified at build
    time and cached for fast functional calculus.
    """
    if dom.n_interior == 0:
        raise ValueError("interior is empty")
    dirac = build_formal_dirac(dom, g)
    N = g.N
    n_lat = dom.n_lattice
    idx = dom.interior_idx
    # spinor-major layout: w = s * n_lat + lattice index
    embed_idx = np.concatenate([s * n_lat + idx for s in range(N)])
    cols = embed_idx
    dhat = dirac[:, cols].tocsr()
    pair = RectangularPair(
        w_dim=N * n_lat,
        v_dim=N * idx.size,
        dhat=dhat,
        embed_idx=embed_idx,
        domain=dom,
        gamma=g,
        meta={"kind": "dirichlet"},
    )
    pair.meta["dirac"] = dirac

    # scalar Dirichlet Laplacian: D*D = 1_N (x) L_v exactly
    lv_scalar = None
    for j in range(dom.d):
        pe = central_difference(dom, j)[:, idx]
        term = (pe.T @ pe).tocsr()
        lv_scalar = term if lv_scalar is None else lv_scalar + term
    full = pair.dstar_d(dense=False)
    expected = sp.kron(sp.identity(N, format="csr"), lv_scalar, format="csr")
    defect = sp_abs_max(full - expected)
    pair.meta["scalar_lv"] = lv_scalar.tocsr()
    pair.meta["spinor_diagonal"] = bool(defect <= SPINOR_DIAG_TOL)
    pair.meta["spinor_diagonal_defect"] = float(defect)
    return pair


def sp_abs_max(M):
    """Max absolute entry of a sparse matrix (0 if structurally empty)."""
    M = M.tocoo()
    if M.nnz == 0:
        return 0.0
    return float(np.abs(M.data).max())


def build_staggered_interval(n, a):
    """Forward-difference pair on the interval (0, a).

    V holds n interior node values, W the n+1 cell differences; with
    Dirichlet ghost values D*D is the n-point Dirichlet Laplacian
    tridiag(-1, 2, -1)/h^2 and DD* is the (n+1)-point Neumann Laplacian
    whose kernel is spanned by the constant vector.
    """
    if n < 2:
        raise ValueError("need at least 2 interior nodes")
    if a <= 0:
        raise ValueError("interval length must be positive")
    h = a / (n + 1)
    rows, cols, vals = [], [], []
    for j in range(n + 1):
        if j <= n - 1:
            rows.append(j)
            cols.append(j)
            vals.append(-1j / h)
        if j >= 1:
            rows.append(j)
            cols.append(j - 1)
            vals.append(1j / h)
    dhat = sp.csr_matrix((vals, (rows, cols)), shape=(n + 1, n))
    return RectangularPair(
        w_dim=n + 1,
        v_dim=n,
        dhat=dhat,
        embed_idx=None,
        domain=None,
        gamma=None,
        meta={"kind": "staggered", "h": h, "a": float(a)},
    )


def staggered_dirichlet_eigenvalues(n, a):
    """Closed-form spectrum of the staggered D*D: 4/h^2 sin^2(k pi / (2(n+1)))."""
    h = a / (n + 1)
    k = np.arange(1, n + 1)
    return 4.0 / h ** 2 * np.sin(k * np.pi / (2.0 * (n + 1))) ** 2


@dataclass(frozen=True)
class AlgebraElement:
    """Interior-supported multiplication operator on the lattice.

    ``margin`` counts the cells of zero padding between the support and
    the first non-interior lattice point; the stencil radius 1 of the
    central difference makes margin >= 1 the precondition for every
    commutator-support argument.
    """

    samples: np.ndarray
    margin: int
    domain: GridDomain
    spinor_dim: int

    @property
    def flat(self):
        return self.samples.ravel(order="C")

    @property
    def as_w_diag(self):
        return np.tile(self.flat.astype(complex), self.spinor_dim)

    def as_v_diag(self, pair):
        idx = pair.domain.interior_idx
        return np.tile(self.flat[idx].astype(complex), self.spinor_dim)

    def as_w_matrix(self):
        return sp.diags(self.as_w_diag).tocsr()

    def is_zero(self):
        return not np.any(self.samples)

    def conj(self):
        return AlgebraElement(self.samples.conj(), self.margin, self.domain, self.spinor_dim)

    def sqrt(self):
        if np.any(self.samples.real < -1e-14) or np.any(np.abs(self.samples.imag) > 1e-14):
            raise ValueError("sqrt factorisation requires non-negative samples")
        return AlgebraElement(
            np.sqrt(np.clip(self.samples.real, 0.0, None)).astype(complex),
            self.margin,
            self.domain,
            self.spinor_dim,
        )

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            prod = self.samples * other.samples
            margin = available_margin(self.domain, np.abs(prod) > 0)
            return AlgebraElement(prod, margin, self.domain, self.spinor_dim)
        return AlgebraElement(self.samples * other, self.margin, self.domain, self.spinor_dim)

    __rmul__ = __mul__


def available_margin(dom, support, cap=None):
    """Largest m such that the support dilated m axis-steps stays interior."""
    if cap is None:
        cap = max(dom.nodes)
    if not np.any(support):
        return cap
    if np.any(support & ~dom.mask):
        return -1
    structure = generate_binary_structure(dom.d, 1)
    grown = support
    m = 0
    while m < cap:
        grown = binary_dilation(grown, structure=structure)
        if np.any(grown & ~dom.mask):
            return m
        m += 1
    return cap


def multiplication_operator(f, dom, pair, margin=1):
    """Wrap scalar samples as an interior-supported multiplication operator.

    Requires the pair to support an algebra action and the support of f
    to keep at least ``margin`` cells of padding inside the interior
    (margin >= stencil radius 1 encodes the domain-mapping axiom as an
    exact matrix statement).
    """
    if "algebra" not in pair.capabilities:
        raise ValueError("pair does not support an algebra action")
    f = np.asarray(f)
    if f.shape == (dom.n_lattice,):
        f = f.reshape(dom.nodes)
    if f.shape != tuple(dom.nodes):
        raise ValueError("samples must live on the full node lattice")
    if margin < 1:
        raise MarginError("margin must be at least the stencil radius 1")
    support = np.abs(f) > 0
    avail = available_margin(dom, support)
    if avail < margin:
        raise MarginError(
            f"support leaves only {avail} cells of padding; margin {margin} required"
        )
    return AlgebraElement(f.astype(complex), int(avail), dom, pair.spinor_dim)


def bump_samples(dom, center, width):
    """Smooth radial bump exp(1 - 1/(1 - r^2)) supported on r < 1.

    ``center`` and ``width`` are in physical length units per axis.
    """
    grids = dom.meshgrid()
    r2 = np.zeros(dom.nodes)
    width = np.broadcast_to(np.asarray(width, dtype=float), (dom.d,))
    center = np.broadcast_to(np.asarray(center, dtype=float), (dom.d,))
    for j, g in enumerate(grids):
        r2 += ((g - center[j]) / width[j]) ** 2
    out = np.zeros(dom.nodes)
    inside = r2 < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def plateau_bump_samples(dom, support, plateau_steps=1, taper_steps=2):
    """Bump equal to 1 on a neighbourhood of ``support``, tapering outwards.

    Used for localizing functions phi with phi * a = a exactly: phi is 1
    on the support dilated ``plateau_steps`` axis-steps and falls to 0
    smoothly over ``taper_steps`` further steps.
    """
    structure = generate_binary_structure(dom.d, 1)
    level = support.copy()
    dist = np.where(support, 0, np.inf)
    step = 0
    while np.any(np.isinf(dist)) and step < sum(dom.nodes):
        step += 1
        level = binary_dilation(level, structure=structure)
        newly = level & np.isinf(dist)
        dist[newly] = step
        if step > plateau_steps + taper_steps + 1:
            break
    t = (dist - plateau_steps) / float(taper_steps)
    t = np.clip(t, 0.0, 1.0)
    # smoothstep taper, exactly 1 on the plateau and exactly 0 outside
    out = 1.0 - t * t * (3.0 - 2.0 * t)
    out[np.isinf(dist)] = 0.0
    return out


def laplacian_pair(pair):
    """(D*D on V, DD* on W) as dense Hermitian PSD matrices."""
    dstar_d = pair.dstar_d(dense=True)
    dd_star = pair.dd_star(dense=True)
    for M in (dstar_d, dd_star):
        defect = float(np.abs(M - M.conj().T).max())
        if defect > SPINOR_DIAG_TOL:
            raise AssertionError(f"product is not Hermitian (defect {defect:g})")
        w = np.linalg.eigvalsh(M)
        if w.size and w.min() < -1e-10 * max(1.0, w.max()):
            raise AssertionError("product is not positive semidefinite")
    return dstar_d, dd_star
