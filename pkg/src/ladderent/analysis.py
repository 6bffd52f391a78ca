"""Exact-versus-RVB comparison and finite-size scaling of the GGM."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AmbiguityError, DomainError
from .ggm import TIE_TOL, Strategy, block_placements, compute_ggm, ggm_from_block
from .lattice import Boundary, LadderGeometry, build_ladder
from .hilbert import reduced_density_matrix
from .rvb.dmrm import block_rdm_2xL, norm_recursion, periodic_block_rdm_series
from .rvb.states import build_rvb_enumerated, build_rvb_recursive
from .spectral import HamiltonianSpec, LanczosOptions, expectation, ground_state

FIT_STEP_TOL = 1e-12
FIT_MAX_ITER = 500
X_STARTS = (0.25, 0.5, 1.0, 2.0)


def fidelity(a, b) -> float:
    """``|<a|b>|`` of two normalized states."""
    return abs(a.vdot(b))


@dataclass
class ComparisonRecord:
    geometry: str
    legs: int
    rungs: int
    boundary: str
    fidelity: float
    delta_e: float
    energy_exact: float
    energy_rvb: float
    ggm_exact: float
    ggm_rvb: float
    delta_e_per_site: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def compare_exact_rvb(geometry: LadderGeometry, J: float = 1.0, delta: float = 1.0,
                      strategy=Strategy.FULL, per_site: bool = False,
                      opts: LanczosOptions | None = None) -> ComparisonRecord:
    """Fidelity, relative energy gap and GGMs of the exact and RVB ground states.

    ``delta_e`` is ``|E_rvb - E_0| / |E_0|``; with ``per_site`` it is the
    absolute gap per site, ``|E_rvb - E_0| / n``.
    """
    if geometry.n > 16:
        raise DomainError("exact-versus-RVB comparison limited to n <= 16")
    spec = HamiltonianSpec(geometry, J, delta)
    gs = ground_state(spec, opts)
    rvb = build_rvb_enumerated(geometry).state
    exact = gs.state
    if exact.n_down is not None:
        rvb_cmp = rvb.to_sector(exact.n_down)
    else:
        rvb_cmp = rvb
    e_rvb = expectation(spec, rvb_cmp)
    gap = abs(e_rvb - gs.energy)
    delta_e = gap / geometry.n if per_site else gap / abs(gs.energy)
    return ComparisonRecord(
        geometry.label, geometry.legs, geometry.rungs, geometry.boundary.value,
        fidelity(exact, rvb_cmp), delta_e, gs.energy, e_rvb,
        compute_ggm(exact, strategy, geometry).value,
        compute_ggm(rvb, strategy, geometry).value, per_site)


@dataclass
class ScalingFit:
    """``G(n) = G_c + sign * k * n**(-x)``; sign ``+`` means G falls with n."""

    G_c: float
    k: float
    x: float
    sign: str
    residual: float
    points_used: list[tuple[int, float]] = field(default_factory=list)
    degenerate: bool = False

    def predict(self, n) -> np.ndarray:
        s = 1.0 if self.sign == "+" else -1.0
        n = np.asarray(n, dtype=float)
        return self.G_c + s * self.k * n ** (-self.x)

    def to_dict(self) -> dict:
        return asdict(self)


def _direction(n: np.ndarray, g: np.ndarray) -> str | None:
    diffs = np.diff(g[np.argsort(n)])
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.all(np.abs(diffs) <= 1e-14 * scale):
        return "flat"
    if np.all(diffs > 0):
        return "-"
    if np.all(diffs < 0):
        return "+"
    return None


def _gauss_newton(n, g, sign, theta):
    """Minimize the squared error over ``(G_c, log k, x)`` from ``theta``."""
    logn = np.log(n)

    def resid(t):
        return t[0] + sign * np.exp(t[1]) * n ** (-t[2]) - g

    r = resid(theta)
    sse = float(r @ r)
    for _ in range(FIT_MAX_ITER):
        term = sign * np.exp(theta[1]) * n ** (-theta[2])
        jac = np.column_stack([np.ones_like(n), term, -term * logn])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        t = 1.0
        improved = False
        while t > 1e-10:
            cand = theta + t * step
            rc = resid(cand)
            sc = float(rc @ rc)
            if np.isfinite(sc) and sc <= sse:
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        moved = float(np.linalg.norm(t * step))
        theta, r, sse = cand, rc, sc
        if moved < FIT_STEP_TOL or sse == 0.0:
            break
    return theta, sse


def fit_scaling(points, sign_hint: str | None = None) -> ScalingFit:
    """Least-squares fit of ``G_c +- k n**(-x)`` to ``(n, G)`` points.

    Raises
    ------
    DomainError
        Fewer than four points or repeated ``n``.
    AmbiguityError
        Data neither increasing nor decreasing and no ``sign_hint`` given.
    """
    pts = sorted((int(a), float(b)) for a, b in points)
    if len(pts) < 4:
        raise DomainError(f"scaling fit needs at least 4 points, got {len(pts)}")
    n = np.array([p[0] for p in pts], dtype=float)
    g = np.array([p[1] for p in pts])
    if len(set(n)) != len(n):
        raise DomainError("scaling fit needs distinct system sizes")
    direction = _direction(n, g)
    if direction == "flat":
        c = float(np.mean(g))
        return ScalingFit(c, 0.0, 0.0, sign_hint or "+", float(np.sqrt(np.mean((g - c) ** 2))),
                          pts, degenerate=True)
    if sign_hint is not None:
        if sign_hint not in "+-" or len(sign_hint) != 1:
            raise DomainError(f"sign_hint must be '+' or '-', got {sign_hint!r}")
        sign = sign_hint
    elif direction is None:
        raise AmbiguityError("data are not monotone in n; pass sign_hint")
    else:
        sign = direction
    s = 1.0 if sign == "+" else -1.0
    best = None
    for x0 in X_STARTS:
        for gc0 in (float(g.min()), float(g.max())):
            basis = s * n ** (-x0)
            k0 = float(basis @ (g - gc0) / (basis @ basis)) * s
            k0 = k0 if k0 > 0 else 1e-3 * max(float(np.ptp(g)), 1e-12)
            with np.errstate(over="ignore", invalid="ignore"):
                theta, sse = _gauss_newton(n, g, s, np.array([gc0, math.log(k0), x0]))
            key = (sse, theta[2])
            if best is None or key < best[0]:
                best = (key, theta, sse)
    _, theta, sse = best
    rms = math.sqrt(sse / len(n))
    k = float(np.exp(theta[1]))
    return ScalingFit(float(theta[0]), k, float(theta[2]), sign, rms, pts,
                      degenerate=k < 1e-12)


def odd_even_report(fits: dict) -> dict:
    """Split ``G_c(L)`` and ``x(L)`` by leg parity and measure the gaps."""
    fits = {int(L): f for L, f in fits.items()}
    odd = sorted(L for L in fits if L % 2)
    even = sorted(L for L in fits if L % 2 == 0)
    if len(odd) < 2 or len(even) < 2:
        raise DomainError("odd/even report needs fits for at least two odd and two even leg counts")

    def table(ls):
        return [{"legs": L, "G_c": fits[L].G_c, "x": fits[L].x, "k": fits[L].k,
                 "sign": fits[L].sign, "residual": fits[L].residual} for L in ls]

    lo, le = odd[-1], even[-1]
    pairs = []
    for L in sorted(fits):
        if L + 1 in fits:
            pairs.append({"legs": [L, L + 1],
                          "G_c_gap": abs(fits[L].G_c - fits[L + 1].G_c),
                          "x_gap": abs(fits[L].x - fits[L + 1].x)})
    return {
        "odd": table(odd),
        "even": table(even),
        "largest_comparable": [lo, le],
        "G_c_gap": abs(fits[lo].G_c - fits[le].G_c),
        "x_gap": abs(fits[lo].x - fits[le].x),
        "adjacent_gaps": pairs,
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


@dataclass
class GgmPoint:
    legs: int
    rungs: int
    boundary: str
    n: int
    model: str
    delta: float
    energy: float
    ggm: float
    lambda_sq: float
    strategy: str
    argmax_sites: tuple[int, ...]
    degeneracy_warning: bool = False
    ties: tuple[tuple[int, ...], ...] = ()
    covering_count: int | None = None


def exact_ggm_point(geometry: LadderGeometry, J: float = 1.0, delta: float = 1.0,
                    strategy=Strategy.RESTRICTED, opts: LanczosOptions | None = None) -> GgmPoint:
    strategy = Strategy.parse(strategy)
    gs = ground_state(HamiltonianSpec(geometry, J, delta), opts)
    res = compute_ggm(gs.state, strategy, geometry)
    return GgmPoint(geometry.legs, geometry.rungs, geometry.boundary.value, geometry.n,
                    "exact", delta, gs.energy, res.value, res.lambda_sq, strategy.value,
                    res.argmax.sites, gs.degeneracy_warning, _ties(res))


def rvb_ggm_point(geometry: LadderGeometry, strategy=Strategy.RESTRICTED, J: float = 1.0,
                  delta: float = 1.0) -> GgmPoint:
    """GGM of the enumerated RVB state; energy is its Heisenberg expectation."""
    strategy = Strategy.parse(strategy)
    built = build_rvb_enumerated(geometry)
    rvb = built.state
    energy = expectation(HamiltonianSpec(geometry, J, delta), rvb.to_sector())
    res = compute_ggm(rvb, strategy, geometry)
    return GgmPoint(geometry.legs, geometry.rungs, geometry.boundary.value, geometry.n,
                    "rvb", delta, energy, res.value, res.lambda_sq, strategy.value,
                    res.argmax.sites, False, _ties(res), built.covering_count)


def rvb_recursive_ggm_series(legs: int, rungs_list, boundary=Boundary.PERIODIC) -> list[GgmPoint]:
    """Restricted GGM of RVB ladders from recursively built block states.

    No state vector is formed, so ``M`` is limited only by the transfer
    contraction.  Energies are not available on this path (NaN).
    """
    boundary = Boundary.parse(boundary)
    rungs_list = sorted(set(int(m) for m in rungs_list))
    out = []
    if boundary is Boundary.PERIODIC:
        blocks = periodic_block_rdm_series(legs, rungs_list)
        for m in rungs_list:
            res = ggm_from_block(blocks[m], legs * m)
            out.append(_series_point(legs, m, boundary, res))
        return out
    for m in rungs_list:
        geom = build_ladder(legs, m, boundary)
        if m == 2:
            res = compute_ggm(build_rvb_enumerated(geom).state, Strategy.RESTRICTED, geom)
        else:
            results = [ggm_from_block(block_rdm_2xL(legs, m, boundary, first=lo), geom.n)
                       for lo, _ in block_placements(geom)]
            top = max(r.lambda_sq for r in results)
            res = min((r for r in results if r.lambda_sq >= top - TIE_TOL),
                      key=lambda r: r.argmax.sort_key())
        out.append(_series_point(legs, m, boundary, res))
    return out


def _ties(res) -> tuple[tuple[int, ...], ...]:
    return tuple(t.sites for t in res.ties)


def _series_point(legs, m, boundary, res) -> GgmPoint:
    return GgmPoint(legs, m, boundary.value, legs * m, "rvb-recursive", 1.0, float("nan"),
                    res.value, res.lambda_sq, Strategy.RESTRICTED.value, res.argmax.sites,
                    False, _ties(res))


def rvb_recursion_checks(max_spins: int = 20, max_legs: int = 4, tol: float = 1e-9) -> list[dict]:
    """Compare the recursive RVB machinery against covering enumeration.

    For every ``L <= max_legs`` and even ``M`` with ``L*M <= max_spins`` on
    both boundaries: state fidelity, norm and every block reduced state.
    """
    checks = []

    def record(kind, geom, err, extra=None):
        row = {"check": kind, "geometry": geom.label, "error": float(err), "pass": bool(err <= tol)}
        if extra:
            row.update(extra)
        checks.append(row)

    for legs in range(1, max_legs + 1):
        for boundary in (Boundary.OPEN, Boundary.PERIODIC):
            min_m = 4 if boundary is Boundary.PERIODIC else 2
            ms = [m for m in range(min_m, max_spins // legs + 1, 2)]
            if not ms:
                continue
            norms = norm_recursion(legs, ms[-1], boundary)
            for m in ms:
                geom = build_ladder(legs, m, boundary)
                enum = build_rvb_enumerated(geom)
                rec = build_rvb_recursive(geom)
                record("state_fidelity", geom, abs(1.0 - abs(enum.state.vdot(rec.state))),
                       {"coverings": enum.covering_count})
                record("norm", geom, abs(norms[m] - enum.norm_sq) / enum.norm_sq)
                if m == 2:
                    continue  # the block is the whole ladder
                for lo, _ in block_placements(geom):
                    block = block_rdm_2xL(legs, m, boundary, first=lo)
                    oracle = reduced_density_matrix(enum.state, block.sites).matrix
                    record("block_rdm", geom, float(np.max(np.abs(block.matrix - oracle))),
                           {"first_rung": lo})
    return checks
