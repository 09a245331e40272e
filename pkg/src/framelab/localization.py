"""Numerical evaluation of the localization hypotheses.

All operations reduce to double integrals of |<f_x, g_y>|^2 over B x B^c
split between two index measures.  Discrete sides become exact atom sums
(with a kernel-decay cutoff deciding which atoms can matter at all);
Lebesgue sides are quadrature over the shell where the integrand is not
negligibly small.  Continuous x continuous pairs of Gaussian-law kernels go
through an exact radial reduction of the inner ball integral (a Bessel-I0
profile), so no four-dimensional grid is ever built.

v1 restricts to self-dual (Parseval normalized) families: every in-scope
pair enters only through |<f_x, g_y>|^2, which needs no dual.  General dual
pairings in infinite dimensions have no computable handle here; the exact
finite-dimensional case lives in finframe instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import FockKernel, GaborGaussianKernel, PaleyWienerKernel
from .quadrature import IntegralResult, QuadConfig, integrate_complement
from .space import Ball, as_point, ball_volume

__all__ = [
    "FramePairSpec",
    "DoubleTailResult",
    "LocalizationRow",
    "tail_sup",
    "double_tail",
    "localization_defect",
    "hap_check",
    "mean_value_check",
]

_PRUNE_EPS = 1e-14
_NODE_CHUNK = 8192


def _mod2_cross(kernel, X, Y) -> np.ndarray:
    """|<k_x, k_y>|^2 as an (n, m) array, avoiding complex phases when possible."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if isinstance(kernel, (FockKernel, GaborGaussianKernel)):
        # |x-y|^2 via the quadratic expansion: one BLAS product instead of an
        # (n, m, d) temporary; clamp the cancellation residue at zero
        x2 = np.einsum("ij,ij->i", X, X)
        y2 = np.einsum("ij,ij->i", Y, Y)
        d2 = x2[:, None] + y2[None, :] - 2.0 * (X @ Y.T)
        np.maximum(d2, 0.0, out=d2)
        return np.exp(-math.pi * d2)
    if isinstance(kernel, PaleyWienerKernel):
        t = X[:, 0][:, None] - Y[:, 0][None, :]
        return np.sinc(kernel.band * t / math.pi) ** 2
    return np.abs(kernel.normalized_cross(X, Y)) ** 2


@dataclass
class FramePairSpec:
    """Two normalized kernel families over one geometry with their index measures.

    Both families come from the same kernel; an optional offset translates a
    family's kernel points relative to its index points (used by the
    dual-embedding scenario).  self_dual must stay True: see the module note.
    """

    kernel: object
    f_measure: object  # mu side
    g_measure: object  # nu side
    f_offset: np.ndarray | None = None
    g_offset: np.ndarray | None = None
    self_dual: bool = True

    def __post_init__(self):
        d = self.kernel.dim
        if self.f_measure.dim != d or self.g_measure.dim != d:
            raise ValueError("index measures must match the kernel dimension")
        if self.f_offset is not None:
            self.f_offset = as_point(self.f_offset)
        if self.g_offset is not None:
            self.g_offset = as_point(self.g_offset)

    def _shift(self, pts, offset):
        return pts if offset is None else pts + offset[None, :]

    def mod2_fg(self, x_pts, y_pts) -> np.ndarray:
        """|<f_x, g_y>|^2 for f-index points x and g-index points y."""
        return _mod2_cross(
            self.kernel, self._shift(np.atleast_2d(x_pts), self.f_offset),
            self._shift(np.atleast_2d(y_pts), self.g_offset),
        )


@dataclass(frozen=True)
class DoubleTailResult:
    t1: float
    t2: float
    truncation_bound: float
    mu_ball: float
    nu_ball: float

    def epsilon_sq_target(self, epsilon: float) -> float:
        return epsilon * epsilon * (self.mu_ball + self.nu_ball)


@dataclass(frozen=True)
class LocalizationRow:
    center: tuple
    radius: float
    defect: float
    double_tail_fg: float
    double_tail_gf: float
    normalizer: float
    epsilon_effective: float
    truncation_bound: float


def tail_sup(kernel, index_measure, R: float, probe_centers, cfg: QuadConfig | None = None) -> float:
    """max over probes x of the tail mass of |<k_x, k_.>|^2 outside B(x, R)."""
    cfg = cfg or QuadConfig()
    best = -math.inf
    for x in np.atleast_2d(np.asarray(probe_centers, dtype=float)):
        field = lambda pts, x0=x: _mod2_cross(kernel, x0[None, :], pts)[0]
        res: IntegralResult = integrate_complement(field, Ball(x, R), index_measure, cfg)
        best = max(best, float(np.real(res.value)))
    return best


def _shell_nodes(center: np.ndarray, r_in: float, r_out: float, cfg: QuadConfig):
    """Midpoint cells on the closed shell r_in < |x-c| <= r_out, exact boundary weights.

    Returns (points (n,d), weights (n,)).  Interior cells carry their full
    volume at the cell center; cells straddling either sphere are subdivided
    with exact partial measures (d <= 2) or indicator subcells (d in {3,4}).
    """
    if r_out <= max(r_in, 0.0):
        return np.zeros((0, center.size)), np.zeros(0)
    d = center.size
    h = cfg.h
    if d == 1:
        lo_cells = []
        for a, b in ((center[0] - r_out, center[0] - r_in), (center[0] + r_in, center[0] + r_out)):
            if b <= a:
                continue
            n = int(math.ceil((b - a) / h))
            starts = a + h * np.arange(n)
            ends = np.minimum(starts + h, b)
            mids = (starts + ends) / 2.0
            lo_cells.append((mids, ends - starts))
        if not lo_cells:
            return np.zeros((0, 1)), np.zeros(0)
        mids = np.concatenate([c[0] for c in lo_cells])
        w = np.concatenate([c[1] for c in lo_cells])
        return mids.reshape(-1, 1), w
    n = int(math.ceil(r_out / h)) + 2
    axes = [(np.arange(-n, n) + 0.5) * h for _ in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=1)
    dist = np.sqrt(np.einsum("ij,ij->i", offsets, offsets))
    half_diag = h * math.sqrt(d) / 2.0
    near = (dist > r_in - half_diag) & (dist <= r_out + half_diag)
    offsets, dist = offsets[near], dist[near]
    strad_in = (np.abs(dist - r_in) < half_diag) & (r_in > 0)
    strad_out = np.abs(dist - r_out) < half_diag
    interior = (dist > r_in) & (dist <= r_out) & ~strad_in & ~strad_out

    pts = [offsets[interior] + center[None, :]]
    wts = [np.full(int(np.count_nonzero(interior)), h**d)]

    strad = strad_in | strad_out
    if np.any(strad):
        from .quadrature import _circle_rect_area

        bk = cfg.boundary_refine
        sub_axes = [((np.arange(bk) + 0.5) / bk - 0.5) * h for _ in range(d)]
        sub_grids = np.meshgrid(*sub_axes, indexing="ij")
        sub_off = np.stack([g.ravel() for g in sub_grids], axis=1)
        hs = h / bk
        sc = (offsets[strad][:, None, :] + sub_off[None, :, :]).reshape(-1, d)
        if d == 2:
            a_in_out = _circle_rect_area(
                sc[:, 0] - hs / 2, sc[:, 0] + hs / 2, sc[:, 1] - hs / 2, sc[:, 1] + hs / 2, r_out
            )
            if r_in > 0:
                a_in_in = _circle_rect_area(
                    sc[:, 0] - hs / 2, sc[:, 0] + hs / 2, sc[:, 1] - hs / 2, sc[:, 1] + hs / 2, r_in
                )
            else:
                a_in_in = np.zeros(len(sc))
            w = a_in_out - a_in_in
        else:
            sub_dist = np.sqrt(np.einsum("ij,ij->i", sc, sc))
            w = np.where((sub_dist > r_in) & (sub_dist <= r_out), hs**d, 0.0)
        keep = w > 0
        pts.append(sc[keep] + center[None, :])
        wts.append(w[keep])
    return np.concatenate(pts), np.concatenate(wts)


def _sum_field_over_atoms(kernel_pair_mod2, nodes, atoms, atom_weights) -> np.ndarray:
    """sum_j w_j mod2(node_i, atom_j), chunked over nodes."""
    out = np.zeros(len(nodes))
    for i in range(0, len(nodes), _NODE_CHUNK):
        block = kernel_pair_mod2(nodes[i : i + _NODE_CHUNK], atoms)
        out[i : i + _NODE_CHUNK] = block @ atom_weights
    return out


def _log_i0(u: np.ndarray) -> np.ndarray:
    """log I0(u) for u >= 0, stable for large arguments."""
    u = np.asarray(u, dtype=float)
    small = u < 25.0
    out = np.empty_like(u)
    out[small] = np.log(np.i0(u[small]))
    ub = u[~small]
    # asymptotic series I0(u) ~ e^u / sqrt(2 pi u) (1 + 1/(8u) + 9/(128u^2) + ...)
    corr = 1.0 + 1.0 / (8.0 * ub) + 9.0 / (128.0 * ub**2) + 225.0 / (3072.0 * ub**3)
    out[~small] = ub - 0.5 * np.log(2.0 * math.pi * ub) + np.log(corr)
    return out


def _gaussian_ball_profile(r: float, s_values: np.ndarray, step: float) -> np.ndarray:
    """phi(s) = integral over B(0, r) in R^2 of exp(-pi |x_s - y|^2), |x_s| = s."""
    cutoff = math.sqrt(-math.log(_PRUNE_EPS) / math.pi)
    out = np.zeros_like(s_values)
    for i, s in enumerate(s_values):
        rho_lo = max(0.0, s - cutoff)
        rho_hi = min(r, s + cutoff)
        if rho_hi <= rho_lo:
            out[i] = 1.0 if s + cutoff <= r else 0.0
            continue
        n = max(8, int(math.ceil((rho_hi - rho_lo) / step)))
        hh = (rho_hi - rho_lo) / n
        rho = rho_lo + (np.arange(n) + 0.5) * hh
        u = 2.0 * math.pi * rho * s
        expo = -math.pi * (rho * rho + s * s) + _log_i0(u)
        vals = 2.0 * math.pi * rho * np.exp(expo)
        # radii outside [s - cutoff, s + cutoff] lie beyond the decay cutoff
        out[i] = float(np.sum(vals)) * hh
    return out


def _continuous_pair_term(pair: FramePairSpec, outer_offset, inner_offset, ball: Ball, cfg: QuadConfig):
    """integral over x in B^c (Lebesgue) of integral over y in B (Lebesgue) of mod2."""
    kernel = pair.kernel
    d = kernel.dim
    r_tr = cfg.effective_truncation(ball.radius)
    if d == 1:
        nodes, w = _shell_nodes(ball.center, ball.radius, r_tr, cfg)
        inner_nodes, inner_w = _shell_nodes(ball.center, 0.0, ball.radius, cfg)
        u_out = nodes if outer_offset is None else nodes + outer_offset[None, :]
        u_in = inner_nodes if inner_offset is None else inner_nodes + inner_offset[None, :]
        field = _sum_field_over_atoms(lambda X, Y: _mod2_cross(kernel, X, Y), u_out, u_in, inner_w)
        return float(field @ w), len(nodes) + len(inner_nodes)
    if d != 2 or not isinstance(kernel, (FockKernel, GaborGaussianKernel)):
        raise ValueError("continuous-continuous double tails need a Gaussian-law or 1-d kernel")
    if getattr(pair.f_measure, "weight", None) is not None or getattr(pair.g_measure, "weight", None) is not None:
        raise ValueError("continuous-continuous double tails support unweighted Lebesgue only")
    shift = np.zeros(2)
    if inner_offset is not None:
        shift = shift + inner_offset
    if outer_offset is not None:
        shift = shift - outer_offset
    # the inner ball integral is radial around ball.center + shift, so the
    # outer pass only needs a 1-d profile lookup per node
    cutoff = math.sqrt(-math.log(_PRUNE_EPS) / math.pi)
    nodes, w = _shell_nodes(ball.center, ball.radius, min(r_tr, ball.radius + cutoff + abs(float(np.linalg.norm(shift)))), cfg)
    if len(nodes) == 0:
        return 0.0, 0
    rel = nodes - (ball.center + shift)[None, :]
    s = np.sqrt(np.einsum("ij,ij->i", rel, rel))
    s_grid = np.linspace(max(0.0, float(np.min(s)) - 1e-9), float(np.max(s)) + 1e-9, 2048)
    prof = _gaussian_ball_profile(ball.radius, s_grid, step=min(cfg.h, 0.01))
    field = np.interp(s, s_grid, prof)
    return float(field @ w), len(nodes)


def _cross_term(pair: FramePairSpec, ball: Ball, cfg: QuadConfig, outer: str):
    """One iterated integral: outer family over B^c, the other over B.

    outer = "f": integral_{x in B^c} d mu integral_{y in B} d nu |<f_x, g_y>|^2
    outer = "g": the swapped ordering.
    """
    if outer == "f":
        outer_m, inner_m = pair.f_measure, pair.g_measure
        outer_off, inner_off = pair.f_offset, pair.g_offset
        mod2 = lambda X_out, Y_in: pair.mod2_fg(X_out, Y_in)
    else:
        outer_m, inner_m = pair.g_measure, pair.f_measure
        outer_off, inner_off = pair.g_offset, pair.f_offset
        mod2 = lambda X_out, Y_in: pair.mod2_fg(Y_in, X_out).T
    r = ball.radius
    r_tr = cfg.effective_truncation(r)
    cutoff = pair.kernel.tail_cutoff(_PRUNE_EPS)
    out_disc = getattr(outer_m, "is_discrete", False)
    in_disc = getattr(inner_m, "is_discrete", False)

    if not out_disc and not in_disc:
        val, _ = _continuous_pair_term(pair, outer_off, inner_off, ball, cfg)
        return val

    if out_disc:
        atoms_out, w_out = outer_m.atoms_in_ball(Ball(ball.center, min(r_tr, r + cutoff)))
        keep = ~ball.contains(atoms_out) if len(atoms_out) else np.zeros(0, dtype=bool)
        atoms_out, w_out = atoms_out[keep], w_out[keep]
        if len(atoms_out) == 0:
            return 0.0
        if in_disc:
            atoms_in, w_in = inner_m.atoms_in_ball(ball)
            if len(atoms_in) == 0:
                return 0.0
            total = 0.0
            for i in range(0, len(atoms_out), _NODE_CHUNK):
                block = mod2(atoms_out[i : i + _NODE_CHUNK], atoms_in)
                total += float(w_out[i : i + _NODE_CHUNK] @ block @ w_in)
            return total
        # inner Lebesgue: quadrature over the part of B the outer atoms can see
        r_in_cut = 0.0 if not math.isfinite(cutoff) else max(0.0, r - cutoff)
        nodes, wq = _shell_nodes(ball.center, r_in_cut, r, cfg)
        if inner_m.weight is not None:
            wq = wq * np.asarray(inner_m.weight(nodes), dtype=float)
        u_nodes = nodes if inner_off is None else nodes + inner_off[None, :]
        u_atoms = atoms_out if outer_off is None else atoms_out + outer_off[None, :]
        field = _sum_field_over_atoms(lambda X, Y: _mod2_cross(pair.kernel, X, Y), u_nodes, u_atoms, w_out)
        # deeper interior nodes are unreachable across the cutoff: < _PRUNE_EPS
        return float(field @ wq)

    # outer Lebesgue, inner discrete
    atoms_in, w_in = inner_m.atoms_in_ball(ball)
    if len(atoms_in) == 0:
        return 0.0
    r_out_cut = r_tr if not math.isfinite(cutoff) else min(r_tr, r + cutoff)
    nodes, wq = _shell_nodes(ball.center, r, r_out_cut, cfg)
    if outer_m.weight is not None:
        wq = wq * np.asarray(outer_m.weight(nodes), dtype=float)
    u_nodes = nodes if outer_off is None else nodes + outer_off[None, :]
    u_atoms = atoms_in if inner_off is None else atoms_in + inner_off[None, :]
    field = _sum_field_over_atoms(lambda X, Y: _mod2_cross(pair.kernel, X, Y), u_nodes, u_atoms, w_in)
    return float(field @ wq)


def _pruning_bound(pair: FramePairSpec, ball: Ball, cfg: QuadConfig) -> float:
    """Estimate of mass ignored by the decay cutoff and the window truncation."""
    r_tr = cfg.effective_truncation(ball.radius)
    mu_b = pair.f_measure.ball_mass(ball, quad_cfg=cfg)
    nu_b = pair.g_measure.ball_mass(ball, quad_cfg=cfg)
    window = ball_volume(ball.dim, r_tr)
    slack = _PRUNE_EPS * (mu_b + nu_b + 2.0) * (window + 1.0)
    gap_eff = min(r_tr - ball.radius, pair.kernel.tail_cutoff(_PRUNE_EPS))
    tail = pair.kernel.mod2_tail_integral(gap_eff)
    if math.isfinite(tail):
        slack += (mu_b + nu_b) * tail
    else:
        slack = math.inf
    return slack


def double_tail(pair: FramePairSpec, b: Ball, cfg: QuadConfig | None = None) -> DoubleTailResult:
    """The two iterated cross-tail integrals over B x B^c.

    t1 integrates the f-family outside the ball against the g-family inside;
    t2 swaps the roles.  For identical families with identical measures the
    two integrands coincide, and one evaluation serves both.
    """
    cfg = cfg or QuadConfig()
    same_offsets = (pair.f_offset is None and pair.g_offset is None) or (
        pair.f_offset is not None
        and pair.g_offset is not None
        and np.array_equal(pair.f_offset, pair.g_offset)
    )
    # unweighted Lebesgue x Lebesgue is symmetric for ANY offsets: reflecting
    # the ball through its center negates x - y, and |<k_x, k_y>|^2 is even
    plain_lebesgue = (
        not getattr(pair.f_measure, "is_discrete", False)
        and not getattr(pair.g_measure, "is_discrete", False)
        and getattr(pair.f_measure, "weight", None) is None
        and getattr(pair.g_measure, "weight", None) is None
        and pair.f_measure.dim == pair.g_measure.dim
    )
    symmetric = plain_lebesgue or (pair.f_measure is pair.g_measure and same_offsets)
    t1 = _cross_term(pair, b, cfg, outer="f")
    t2 = t1 if symmetric else _cross_term(pair, b, cfg, outer="g")
    return DoubleTailResult(
        t1=t1,
        t2=t2,
        truncation_bound=_pruning_bound(pair, b, cfg),
        mu_ball=pair.f_measure.ball_mass(b, quad_cfg=cfg),
        nu_ball=pair.g_measure.ball_mass(b, quad_cfg=cfg),
    )


def localization_defect(pair: FramePairSpec, b: Ball, cfg: QuadConfig | None = None) -> LocalizationRow:
    """One report row of the localization mismatch over the ball b.

    For self-dual families the two iterated integrals of the localization
    condition are exactly the double tails, so the defect is |t1 - t2|.
    """
    if not pair.self_dual:
        raise ValueError("general duals unsupported: localization defect needs self-dual families")
    cfg = cfg or QuadConfig()
    dt = double_tail(pair, b, cfg)
    normalizer = dt.mu_ball + dt.nu_ball
    if normalizer <= 0:
        raise ValueError("empty ball: defect normalizer vanishes")
    # offset-symmetric continuous pairs have exactly equal integrands
    defect = abs(dt.t1 - dt.t2)
    return LocalizationRow(
        center=tuple(float(c) for c in b.center),
        radius=float(b.radius),
        defect=defect,
        double_tail_fg=dt.t1,
        double_tail_gf=dt.t2,
        normalizer=normalizer,
        epsilon_effective=defect / normalizer,
        truncation_bound=dt.truncation_bound,
    )


def hap_check(kernel, gamma, R: float, probe_centers, window_margin: float = 6.0) -> float:
    """max over probes x of sum over atoms with |gamma - x| > R of |<k_x, k_gamma>|^2.

    Only atoms within R + window_margin of the probe are summed; pick the
    margin from the kernel decay (the default suits Gaussian-law kernels).
    """
    atoms_of = gamma.points_in_ball if hasattr(gamma, "points_in_ball") else None
    best = 0.0
    for x in np.atleast_2d(np.asarray(probe_centers, dtype=float)):
        window = Ball(x, R + window_margin)
        pts = atoms_of(window) if atoms_of else gamma.atoms_in_ball(window)[0]
        if len(pts) == 0:
            continue
        inside = Ball(x, R).contains(pts)
        pts = pts[~inside]
        if len(pts) == 0:
            continue
        vals = _mod2_cross(kernel, x[None, :], pts)[0]
        best = max(best, float(math.fsum(vals.tolist())))
    return best


def mean_value_check(kernel, lam_measure, r: float, probes, test_functions, cfg: QuadConfig | None = None) -> float:
    """Empirical mean-value constant C_r.

    Each test function is a finite kernel combination given as a list of
    (coefficient, point) pairs; the reported value is the max over probes and
    test functions of |<f, k_a>|^2 / integral over B(a, r) of |<f, k_x>|^2.
    """
    from .quadrature import integrate_ball

    cfg = cfg or QuadConfig()
    best = 0.0
    for a in np.atleast_2d(np.asarray(probes, dtype=float)):
        for combo in test_functions:
            coeffs = np.array([c for c, _ in combo], dtype=complex)
            pts = np.array([as_point(p) for _, p in combo], dtype=float)

            def f_against(x_pts):
                acc = np.zeros(len(np.atleast_2d(x_pts)), dtype=complex)
                for cj, pj in zip(coeffs, pts):
                    acc = acc + cj * kernel.against_normalized(np.atleast_2d(x_pts), pj)
                return np.abs(acc) ** 2

            numer = float(f_against(a[None, :])[0])
            denom = float(np.real(integrate_ball(f_against, Ball(a, r), lam_measure, cfg).value))
            if denom < 1e-14 * max(numer, 1e-300):
                if numer == 0.0:
                    continue  # ratio 0/0-free: orthogonal test function, no constraint
                raise ValueError("degenerate test function: vanishing local energy")
            if denom > 0:
                best = max(best, numer / denom)
    return best
