"""Quadratic direction equations A du^2 + 2B du dv + C dv^2 = 0 as fields.

A field carries a pointwise coefficient evaluator and, when available, a jet
evaluator for the same coefficients; the jets feed the lifted vector field
and its linearization.  Directions are solved in whichever slope chart is
better conditioned: chart ``p`` uses p = dv/du on F_P = A + 2Bp + Cp^2,
chart ``q`` uses q = du/dv on F_Q = Aq^2 + 2Bq + C.

The lift of the equation is the surface {F = 0} in (u, v, slope) space; the
tangent vector field

    X = (F_p, p F_p, -(F_u + p F_v))            (chart p, mirrored in q)

projects its integral curves onto solutions of the direction equation.  X
annihilates F identically, so trajectories stay on the lift to machine
precision modulo integration error.

Also here: grid tracing of zero sets of scalar fields (marching squares with
per-vertex root polishing), used for parabolic sets and discriminants.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import affine, jets
from .jets import Jet2
from .surface import Poly, Rect

__all__ = [
    "BDEField",
    "LiftedState",
    "AsymptoticDirections",
    "CapabilityError",
    "LIFT_TOL",
    "field_from_polynomials",
    "monge_extended_field",
    "torus_extended_field",
    "lmn_field",
    "conormal_euclidean_field",
    "folded_model_field",
    "morse_model_field",
    "extended_field_for",
    "discriminant",
    "asymptotic_directions",
    "lift_state",
    "f_residual",
    "lie_cartan",
    "lie_cartan_jacobian",
    "trace_zero_set",
    "polylines_to_csv",
    "polyline_svg_path",
]

LIFT_TOL = 1e-8
DEGENERATE_TOL = 1e-10


class CapabilityError(RuntimeError):
    """The field lacks the jet evaluator an operation needs."""


@dataclass
class BDEField:
    coeff: object            # (u, v) -> (A, B, C), batch-capable
    jet_coeff: object = None  # (u, v, order) -> (Jet2, Jet2, Jet2)
    domain: Rect = Rect(-1.0, 1.0, -1.0, 1.0)
    name: str = "bde"
    period: tuple = None     # (Pu, Pv) when the parameters are angles

    def require_jets(self):
        if self.jet_coeff is None:
            raise CapabilityError(f"field {self.name} has no jet evaluator")


@dataclass
class LiftedState:
    u: float
    v: float
    slope: float
    chart: str  # "p" (slope = dv/du) or "q" (slope = du/dv)

    def direction(self):
        """Unit (du, dv) tangent of the projected curve."""
        if self.chart == "p":
            d = np.array([1.0, self.slope])
        else:
            d = np.array([self.slope, 1.0])
        return d / math.hypot(d[0], d[1])


# -- constructors -------------------------------------------------------------


def field_from_polynomials(pa, pb, pc, domain, name="poly-bde"):
    pa = pa if isinstance(pa, Poly) else Poly(pa)
    pb = pb if isinstance(pb, Poly) else Poly(pb)
    pc = pc if isinstance(pc, Poly) else Poly(pc)

    def coeff(u, v):
        return pa(u, v), pb(u, v), pc(u, v)

    def jet_coeff(u, v, order=2):
        return pa.jet(u, v, order), pb.jet(u, v, order), pc.jet(u, v, order)

    return BDEField(coeff, jet_coeff, domain, name)


def folded_model_field(lam, domain=Rect(-1.0, 1.0, -1.0, 1.0)):
    """(-v + lam u^2) du^2 + dv^2 = 0: one fold point at the origin."""
    return field_from_polynomials({(2, 0): lam, (0, 1): -1.0}, {}, {(0, 0): 1.0},
                                  domain, f"folded(lambda={lam})")


def morse_model_field(eps1, domain=Rect(-1.0, 1.0, -1.0, 1.0)):
    """(-e1 v) du^2 + 2(-e1 u) du dv + v dv^2 = 0: totally degenerate origin."""
    if eps1 not in (1, -1):
        raise ValueError("eps1 must be +1 or -1")
    return field_from_polynomials({(0, 1): -float(eps1)}, {(1, 0): -float(eps1)},
                                  {(0, 1): 1.0}, domain, f"morse(eps1={eps1})")


def monge_extended_field(surf):
    """Extended coefficient field of a Monge surface (polynomial fast path
    when the height is polynomial)."""
    if surf.kind != "monge":
        raise ValueError("monge_extended_field needs a Monge surface")
    hp = surf.polys[0] if surf.polys else None
    if hp is not None:
        h = Poly(hp)
        parts = [h.partial(i, j) for (i, j) in
                 [(2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3),
                  (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]]
        bl, bm, bn, _ = affine.lmn_numerators(*parts)
        return field_from_polynomials(-bl, -bm, -bn, surf.domain,
                                      f"extended({surf.describe()})")

    def coeff(u, v):
        return affine.extended_bde_coeffs(surf.height_jet(u, v, order=4))

    def jet_coeff(u, v, order=2):
        return affine.extended_bde_coeffs(surf.height_jet(u, v, order=4 + order))

    return BDEField(coeff, jet_coeff, surf.domain, f"extended({surf.describe()})")


def torus_extended_field(R, r, domain=None):
    domain = domain or Rect(0.0, 2 * math.pi, 0.0, 2 * math.pi)
    # closed forms as polynomials in c = cos u (v-independent):
    #   lbar = 16 r^2 c^4 + 36 rR c^3 + 15 R^2 c^2 - 8 rR c - 3 R^2
    #   nbar = 16 r^2 c^6 + 28 rR c^5 + 12 R^2 c^4 + 4 rR c^3 + 4 R^2 c^2
    lp = np.array([-3 * R * R, -8 * r * R, 15 * R * R, 36 * r * R, 16 * r * r])
    npol = np.array([0.0, 0.0, 4 * R * R, 4 * r * R, 12 * R * R, 28 * r * R, 16 * r * r])
    lp_d = np.polynomial.polynomial.polyder(lp)
    lp_dd = np.polynomial.polynomial.polyder(lp_d)
    np_d = np.polynomial.polynomial.polyder(npol)
    np_dd = np.polynomial.polynomial.polyder(np_d)
    pval = np.polynomial.polynomial.polyval

    def coeff(u, v):
        c = np.cos(u)
        z = np.zeros(np.broadcast_shapes(np.shape(u), np.shape(v)))
        return pval(c, lp) + z, z, pval(c, npol) + z

    def jet_coeff(u, v, order=2):
        if order > 2 or np.ndim(u) > 0:
            uj = Jet2.variable("u", u, order)
            return affine.torus_extended_bde(R, r, uj)
        c, s = math.cos(u), math.sin(u)
        n_terms = (order + 1) * (order + 2) // 2

        def build(p, p_d, p_dd):
            f = float(pval(c, p))
            fc = float(pval(c, p_d))
            coeffs = np.zeros(n_terms)
            coeffs[0], coeffs[1] = f, -s * fc
            if order == 2:
                coeffs[3] = -c * fc + s * s * float(pval(c, p_dd))
            return Jet2(order, coeffs)

        return (build(lp, lp_d, lp_dd), Jet2(order, np.zeros(n_terms)),
                build(npol, np_d, np_dd))

    return BDEField(coeff, jet_coeff, domain, f"torus-extended(R={R},r={r})",
                    period=(2 * math.pi, 2 * math.pi))


def lmn_field(surf, guard=1e-8):
    """Third-form coefficient field (l, m, n) via the frame pipeline.

    Undefined within ``guard`` of the Euclidean parabolic set; use the
    extended field to cross it.
    """

    def coeff(u, v):
        fr = affine.frame_jets(surf, u, v, order=4, guard=guard, honor_excluded=False)
        l = affine.dot(fr["nu_u"], fr["xi_u"]).value
        m = affine.dot(fr["nu_u"], fr["xi_v"]).value
        n = affine.dot(fr["nu_v"], fr["xi_v"]).value
        return l, m, n

    def jet_coeff(u, v, order=2):
        fr = affine.frame_jets(surf, u, v, order=4 + order, guard=guard, honor_excluded=False)
        return (affine.dot(fr["nu_u"], fr["xi_u"]),
                affine.dot(fr["nu_u"], fr["xi_v"]),
                affine.dot(fr["nu_v"], fr["xi_v"]))

    return BDEField(coeff, jet_coeff, surf.domain, f"lmn({surf.describe()})")


def conormal_euclidean_field(surf, guard=1e-8):
    """Euclidean second-form coefficients of the conormal image, as functions
    of the source parameters (u, v): the direction equation of the Euclidean
    asymptotic lines of that surface."""

    def make(u, v, order):
        fr = affine.frame_jets(surf, u, v, order=4 + order, guard=guard, honor_excluded=False)
        nu = fr["nu"]
        nu_u, nu_v = fr["nu_u"], fr["nu_v"]
        nuu = tuple(c.du() for c in nu_u)
        nuv = tuple(c.dv() for c in nu_u)
        nvv = tuple(c.dv() for c in nu_v)
        w = affine.cross(nu_u, nu_v)
        norm = jets.sqrt(affine.dot(w, w), eps=guard ** 2)
        nvec = tuple(jets.jet_div(c, norm.truncate(c.order)) for c in w)
        e = affine.dot(nvec, nuu)
        f = affine.dot(nvec, nuv)
        g = affine.dot(nvec, nvv)
        return e, f, g

    def coeff(u, v):
        e, f, g = make(u, v, 0)
        return e.value, f.value, g.value

    def jet_coeff(u, v, order=2):
        return make(u, v, order)

    return BDEField(coeff, jet_coeff, surf.domain, f"conormal-II({surf.describe()})")


def extended_field_for(surf):
    """The extended asymptotic-direction field appropriate to a surface."""
    if surf.catalog_id == "torus":
        return torus_extended_field(surf.params["R"], surf.params["r"], surf.domain)
    if surf.kind == "monge":
        return monge_extended_field(surf)
    # generic parametric: clear the same |LN - M^2| powers as the Monge case
    base = lmn_field(surf)

    def coeff(u, v):
        fr = affine.frame_jets(surf, u, v, order=4, honor_excluded=False)
        l = affine.dot(fr["nu_u"], fr["xi_u"]).value
        m = affine.dot(fr["nu_u"], fr["xi_v"]).value
        n = affine.dot(fr["nu_v"], fr["xi_v"]).value
        d2 = 16.0 * fr["D"].value ** 2
        return d2 * l, d2 * m, d2 * n

    def jet_coeff(u, v, order=2):
        fr = affine.frame_jets(surf, u, v, order=4 + order, honor_excluded=False)
        l = affine.dot(fr["nu_u"], fr["xi_u"])
        m = affine.dot(fr["nu_u"], fr["xi_v"])
        n = affine.dot(fr["nu_v"], fr["xi_v"])
        d2 = fr["D"] * fr["D"] * 16.0
        d2 = d2.truncate(l.order)
        return d2 * l, d2 * m, d2 * n

    return BDEField(coeff, jet_coeff, surf.domain, f"extended({surf.describe()})")


# -- pointwise operations ------------------------------------------------------


def discriminant(field, u, v):
    A, B, C = field.coeff(u, v)
    return B * B - A * C


@dataclass
class AsymptoticDirections:
    kind: str          # "two" | "double" | "none" | "degenerate"
    dirs: list         # unit (du, dv) arrays; the double root appears once

    def __iter__(self):
        return iter(self.dirs)

    def __len__(self):
        return len(self.dirs)


def _unit(du, dv):
    h = math.hypot(du, dv)
    d = np.array([du / h, dv / h])
    # fix an orientation so output is deterministic
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = -d
    return d


def asymptotic_directions(field, u, v, lift_tol=LIFT_TOL, degenerate_tol=DEGENERATE_TOL):
    """Solve the direction equation at one point, chart-robustly."""
    A, B, C = (float(x) for x in field.coeff(u, v))
    scale = max(abs(A), abs(B), abs(C))
    if scale < degenerate_tol:
        return AsymptoticDirections("degenerate", [])
    delta = B * B - A * C
    double_thr = (lift_tol * scale) ** 2
    if abs(delta) < double_thr:
        # single direction of multiplicity two
        if abs(C) >= abs(A):
            return AsymptoticDirections("double", [_unit(1.0, -B / C)])
        return AsymptoticDirections("double", [_unit(-B / A, 1.0)])
    if delta < 0:
        return AsymptoticDirections("none", [])
    rt = math.sqrt(delta)
    if max(abs(A), abs(C)) < 1e-13 * scale:
        # both extreme coefficients vanish: the equation is 2B du dv = 0
        return AsymptoticDirections("two", [_unit(1.0, 0.0), _unit(0.0, 1.0)])
    if abs(C) >= abs(A):
        dirs = [_unit(1.0, (-B + rt) / C), _unit(1.0, (-B - rt) / C)]
    else:
        dirs = [_unit((-B + rt) / A, 1.0), _unit((-B - rt) / A, 1.0)]
    return AsymptoticDirections("two", dirs)


def lift_state(field, u, v, du, dv):
    """Lifted state for a projected direction, in the better slope chart."""
    if abs(dv) <= abs(du):
        return LiftedState(u, v, dv / du, "p")
    return LiftedState(u, v, du / dv, "q")


def f_residual(field, state):
    A, B, C = (float(x) for x in field.coeff(state.u, state.v))
    s = state.slope
    if state.chart == "p":
        return A + 2 * B * s + C * s * s
    return A * s * s + 2 * B * s + C


def _coeff_jets1(field, state):
    field.require_jets()
    return field.jet_coeff(state.u, state.v, 1)


def lie_cartan_scaled(field, state):
    """Lifted velocity and the local coefficient scale, one jet evaluation."""
    Aj, Bj, Cj = _coeff_jets1(field, state)
    s = state.slope
    A0, B0, C0 = float(Aj.value), float(Bj.value), float(Cj.value)
    Au, Bu, Cu = float(Aj.partial(1, 0)), float(Bj.partial(1, 0)), float(Cj.partial(1, 0))
    Av, Bv, Cv = float(Aj.partial(0, 1)), float(Bj.partial(0, 1)), float(Cj.partial(0, 1))
    scale = max(abs(A0), abs(B0), abs(C0))
    if state.chart == "p":
        Fu = Au + 2 * Bu * s + Cu * s * s
        Fv = Av + 2 * Bv * s + Cv * s * s
        Fp = 2 * B0 + 2 * C0 * s
        return np.array([Fp, s * Fp, -(Fu + s * Fv)]), scale
    Fu = Au * s * s + 2 * Bu * s + Cu
    Fv = Av * s * s + 2 * Bv * s + Cv
    Fq = 2 * A0 * s + 2 * B0
    return np.array([s * Fq, Fq, -(Fv + s * Fu)]), scale


def lie_cartan(field, state):
    """Velocity of the lifted tangent field at the state, in its chart."""
    return lie_cartan_scaled(field, state)[0]


def lie_cartan_jacobian(field, state):
    """3x3 Jacobian of the lifted field at the state, in (u, v, slope) order."""
    field.require_jets()
    Aj, Bj, Cj = field.jet_coeff(state.u, state.v, 2)
    s = state.slope

    def pp(j, a, b):
        return float(j.partial(a, b))

    A0, B0, C0 = pp(Aj, 0, 0), pp(Bj, 0, 0), pp(Cj, 0, 0)
    Au, Bu, Cu = pp(Aj, 1, 0), pp(Bj, 1, 0), pp(Cj, 1, 0)
    Av, Bv, Cv = pp(Aj, 0, 1), pp(Bj, 0, 1), pp(Cj, 0, 1)
    Auu, Buu, Cuu = pp(Aj, 2, 0), pp(Bj, 2, 0), pp(Cj, 2, 0)
    Auv, Buv, Cuv = pp(Aj, 1, 1), pp(Bj, 1, 1), pp(Cj, 1, 1)
    Avv, Bvv, Cvv = pp(Aj, 0, 2), pp(Bj, 0, 2), pp(Cj, 0, 2)
    if state.chart == "p":
        Fv = Av + 2 * Bv * s + Cv * s * s
        Fp = 2 * B0 + 2 * C0 * s
        Fuu = Auu + 2 * Buu * s + Cuu * s * s
        Fuv = Auv + 2 * Buv * s + Cuv * s * s
        Fvv = Avv + 2 * Bvv * s + Cvv * s * s
        Fpu = 2 * Bu + 2 * Cu * s
        Fpv = 2 * Bv + 2 * Cv * s
        Fpp = 2 * C0
        return np.array([
            [Fpu, Fpv, Fpp],
            [s * Fpu, s * Fpv, Fp + s * Fpp],
            [-(Fuu + s * Fuv), -(Fuv + s * Fvv), -(Fpu + Fv + s * Fpv)],
        ])
    Fu = Au * s * s + 2 * Bu * s + Cu
    Fq = 2 * A0 * s + 2 * B0
    Fuu = Auu * s * s + 2 * Buu * s + Cuu
    Fuv = Auv * s * s + 2 * Buv * s + Cuv
    Fvv = Avv * s * s + 2 * Bvv * s + Cvv
    Fqu = 2 * Au * s + 2 * Bu
    Fqv = 2 * Av * s + 2 * Bv
    Fqq = 2 * A0
    return np.array([
        [s * Fqu, s * Fqv, Fq + s * Fqq],
        [Fqu, Fqv, Fqq],
        [-(Fuv + s * Fuu), -(Fvv + s * Fuv), -(Fqv + Fu + s * Fqu)],
    ])


# -- implicit-curve tracing ----------------------------------------------------

_SEG_TABLE = {
    # corner order: (i,j)=BL, (i+1,j)=BR, (i+1,j+1)=TR, (i,j+1)=TL
    # edges: 0 bottom, 1 right, 2 top, 3 left
    1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)], 6: [(0, 2)], 7: [(3, 2)],
    8: [(2, 3)], 9: [(0, 2)], 11: [(1, 2)],
    12: [(3, 1)], 13: [(0, 1)], 14: [(3, 0)],
}


def trace_zero_set(scalar, region, resolution=256, refine_iters=48):
    """Polylines approximating {scalar = 0} on the region.

    ``scalar`` must accept numpy arrays (u, v) and return values of the same
    shape.  Cell crossings are found by sign change, located by bisection
    along cell edges, and chained into polylines.  Output order and content
    are deterministic for fixed inputs.
    """
    if np.isscalar(resolution):
        nx = ny = int(resolution)
    else:
        nx, ny = (int(x) for x in resolution)
    us = np.linspace(region.u0, region.u1, nx + 1)
    vs = np.linspace(region.v0, region.v1, ny + 1)
    U, V = np.meshgrid(us, vs, indexing="ij")
    Z = np.asarray(scalar(U, V), dtype=float)
    scale = np.max(np.abs(Z))
    if scale == 0:
        return []
    Z = np.where(Z == 0.0, 1e-13 * scale, Z)  # tie-break exact zeros
    pos = Z > 0

    # edge crossings, vectorized bisection
    def crossings(p0u, p0v, p1u, p1v, f0):
        a_u, a_v = p0u.copy(), p0v.copy()
        b_u, b_v = p1u.copy(), p1v.copy()
        fa = f0
        for _ in range(refine_iters):
            m_u, m_v = 0.5 * (a_u + b_u), 0.5 * (a_v + b_v)
            fm = np.asarray(scalar(m_u, m_v), dtype=float)
            fm = np.where(fm == 0.0, 1e-300, fm)
            left = (fa > 0) != (fm > 0)
            a_u, a_v = np.where(left, a_u, m_u), np.where(left, a_v, m_v)
            b_u, b_v = np.where(left, m_u, b_u), np.where(left, m_v, b_v)
            fa = np.where(left, fa, fm)
        return 0.5 * (a_u + b_u), 0.5 * (a_v + b_v)

    # horizontal edges: between (i, j) and (i+1, j)
    hx = pos[:-1, :] != pos[1:, :]
    hi, hj = np.nonzero(hx)
    hu, hv = crossings(U[:-1, :][hx], V[:-1, :][hx], U[1:, :][hx], V[1:, :][hx], Z[:-1, :][hx])
    # vertical edges: between (i, j) and (i, j+1)
    vx = pos[:, :-1] != pos[:, 1:]
    vi, vj = np.nonzero(vx)
    vu, vv_ = crossings(U[:, :-1][vx], V[:, :-1][vx], U[:, 1:][vx], V[:, 1:][vx], Z[:, :-1][vx])

    hpoint = {(i, j): (hu[k], hv[k]) for k, (i, j) in enumerate(zip(hi, hj))}
    vpoint = {(i, j): (vu[k], vv_[k]) for k, (i, j) in enumerate(zip(vi, vj))}

    def edge_key(cell_i, cell_j, e):
        if e == 0:
            return ("h", cell_i, cell_j)
        if e == 2:
            return ("h", cell_i, cell_j + 1)
        if e == 3:
            return ("v", cell_i, cell_j)
        return ("v", cell_i + 1, cell_j)

    segments = []
    amb_cache = {}
    for i in range(nx):
        for j in range(ny):
            code = (int(pos[i, j]) | int(pos[i + 1, j]) << 1
                    | int(pos[i + 1, j + 1]) << 2 | int(pos[i, j + 1]) << 3)
            if code in (0, 15):
                continue
            if code in (5, 10):
                key = (i, j)
                if key not in amb_cache:
                    cu, cv = 0.5 * (us[i] + us[i + 1]), 0.5 * (vs[j] + vs[j + 1])
                    amb_cache[key] = float(scalar(np.asarray(cu), np.asarray(cv))) > 0
                center_pos = amb_cache[key]
                if code == 5:  # positive BL/TR corners
                    segs = [(0, 1), (2, 3)] if center_pos else [(3, 0), (1, 2)]
                else:          # positive BR/TL corners
                    segs = [(3, 0), (1, 2)] if center_pos else [(0, 1), (2, 3)]
            else:
                segs = _SEG_TABLE[code]
            for (e1, e2) in segs:
                segments.append((edge_key(i, j, e1), edge_key(i, j, e2)))

    # chain segments into polylines
    adj = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    def point_of(key):
        kind, i, j = key
        return hpoint[(i, j)] if kind == "h" else vpoint[(i, j)]

    visited = set()
    polylines = []
    endpoints = sorted(k for k, nb in adj.items() if len(nb) == 1)
    starters = endpoints + sorted(adj.keys())
    for start in starters:
        if start in visited or start not in adj:
            continue
        chain = [start]
        visited.add(start)
        cur = start
        while True:
            nxt = None
            for cand in adj[cur]:
                if cand not in visited:
                    nxt = cand
                    break
            if nxt is None:
                # close cycles back to the start
                if len(chain) > 2 and start in adj[cur] and chain[1] != start:
                    chain.append(start)
                break
            chain.append(nxt)
            visited.add(nxt)
            cur = nxt
        if len(chain) >= 2:
            pts = np.array([point_of(k) for k in chain])
            # discard tie-break artifacts around isolated zeros: their
            # extent is far below anything a grid cell can resolve
            extent = max(float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1])))
            cell = max((region.u1 - region.u0) / nx, (region.v1 - region.v0) / ny)
            if extent > 1e-3 * cell:
                polylines.append(pts)
    return polylines


def polylines_to_csv(polylines):
    """u,v rows, blank-line-separated components."""
    buf = io.StringIO()
    buf.write("u,v\n")
    for k, poly in enumerate(polylines):
        if k:
            buf.write("\n")
        for (u, v) in poly:
            buf.write(f"{float(u)!r},{float(v)!r}\n")
    return buf.getvalue()


def polyline_svg_path(poly, mapper):
    pts = [mapper(u, v) for (u, v) in poly]
    head = f"M {pts[0][0]:.3f} {pts[0][1]:.3f} "
    return head + " ".join(f"L {x:.3f} {y:.3f}" for (x, y) in pts[1:])
