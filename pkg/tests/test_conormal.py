import math

import numpy as np
import pytest

from affasym import affine as af, bde, conormal as cn, flow, surface as sf
from affasym.surface import Rect


def torus(R=3.0, r=1.0):
    return sf.catalog_surface("torus", {"R": R, "r": r})


def random_torus_points(n, rng, avoid=0.1):
    pts = []
    while len(pts) < n:
        u = float(rng.uniform(0, 2 * math.pi))
        if min(abs(u - math.pi / 2), abs(u - 3 * math.pi / 2)) < avoid:
            continue
        pts.append((u, float(rng.uniform(0, 2 * math.pi))))
    return pts


def test_conormal_point_value():
    nu = cn.conormal_point(torus(), 0.0, 0.0)
    assert nu[0] < 0 and abs(nu[1]) < 1e-14 and abs(nu[2]) < 1e-14
    assert np.linalg.norm(nu) == pytest.approx(4 ** 0.25, rel=1e-12)
    q = sf.monge_surface("(u^2 + v^2)/2")
    assert cn.conormal_point(q, 0.0, 0.0) == pytest.approx([0.0, 0.0, 1.0], abs=1e-14)


def test_mesh_components_and_immersion():
    mesh = cn.conormal_mesh(torus(), resolution=(48, 24))
    assert mesh.n_components == 2
    assert len(mesh.vertices) > 0
    assert not mesh.clipped.any()
    # elliptic band (cos u > 0) labels differ from hyperbolic band labels
    cosu = np.cos(mesh.params[:, 0])
    comp_ell = set(mesh.component_id[cosu > 0.1].tolist())
    comp_hyp = set(mesh.component_id[cosu < -0.1].tolist())
    assert comp_ell and comp_hyp and not (comp_ell & comp_hyp)


def test_correspondence_torus_and_pick():
    rng = np.random.default_rng(0)
    rows = cn.verify_conormal_correspondence(torus(), random_torus_points(30, rng))
    for row in rows:
        assert not row["degenerate"]
        assert row["lambda"] is not None and abs(row["lambda"]) > 0
        assert row["residual"] < 1e-7
        assert row["normal_cross"] < 1e-7
    pick = sf.catalog_surface("pick", {"epsilon": -1, "sigma": 0.8,
                                       "q": {(4, 0): 1.0, (1, 3): 0.5}})
    pts = [(float(a), float(b)) for (a, b) in rng.uniform(-0.2, 0.2, (20, 2))]
    for row in cn.verify_conormal_correspondence(pick, pts):
        assert not row["degenerate"]
        assert row["residual"] < 1e-7
        assert row["normal_cross"] < 1e-7


def test_parabolic_sign_correspondence():
    # sign of the image second-form determinant matches sign of ln - m^2
    rng = np.random.default_rng(5)
    surf = torus()
    for (u, v) in random_torus_points(40, rng):
        fr = af.frame_jets(surf, u, v, order=4, honor_excluded=False)
        l = float(af.dot(fr["nu_u"], fr["xi_u"]).value)
        m = float(af.dot(fr["nu_u"], fr["xi_v"]).value)
        n = float(af.dot(fr["nu_v"], fr["xi_v"]).value)
        (e, f, g), _ = cn.second_form_of_conormal(surf, u, v)
        assert np.sign(e * g - f * f) == np.sign(l * n - m * m)


def test_quadric_degenerate_marker():
    q = sf.monge_surface("(u^2 + v^2)/2")
    rows = cn.verify_conormal_correspondence(q, [(0.0, 0.0), (0.2, 0.1)])
    for row in rows:
        assert row["degenerate"]
        assert row["lambda"] is None
        assert row["normal_cross"] < 1e-10


def test_obj_export_small_grid():
    q = sf.monge_surface("(u^2 + v^2)/2")
    mesh = cn.conormal_mesh(q, region=Rect(-0.5, 0.5, -0.5, 0.5), resolution=(2, 2))
    obj = cn.export_mesh_obj(mesh)
    lines = obj.strip().split("\n")
    assert sum(1 for ln in lines if ln.startswith("v ")) == 4
    assert sum(1 for ln in lines if ln.startswith("f ")) == 1
    assert lines[0].startswith("#")


def test_obj_export_torus_two_objects():
    mesh = cn.conormal_mesh(torus(), resolution=(36, 18))
    obj = cn.export_mesh_obj(mesh)
    objects = [ln for ln in obj.split("\n") if ln.startswith("o ")]
    assert objects == ["o component_0", "o component_1"]
    # faces reference valid 1-based vertices
    nv = sum(1 for ln in obj.split("\n") if ln.startswith("v "))
    for ln in obj.split("\n"):
        if ln.startswith("f "):
            idx = [int(t) for t in ln.split()[1:]]
            assert all(1 <= i <= nv for i in idx)


def test_obj_export_empty_region():
    tor = torus()
    # region entirely inside the widened exclusion strip
    mesh = cn.conormal_mesh(tor, region=Rect(math.pi / 2 - 0.01, math.pi / 2 + 0.01,
                                             0.0, 1.0), resolution=(4, 4), margin=0.05)
    assert len(mesh.vertices) == 0
    obj = cn.export_mesh_obj(mesh)
    assert obj.strip() == "# conormal mesh export"


def test_norm_cap_clipping():
    tor = torus()
    mesh = cn.conormal_mesh(tor, region=Rect(0.0, math.pi / 2 - 0.06, 0.0, 1.0),
                            resolution=(24, 6), margin=0.05, norm_cap=2.0)
    assert mesh.clipped.any()
    # clipped vertices appear in no face
    used = set()
    for f in mesh.faces:
        used.update(f)
    assert not any(mesh.clipped[list(used)]) if used else True


def test_hyperbolic_band_vertex_norms_grow_near_band_edge():
    # the image runs away towards the parabolic set
    tor = torus()
    near = cn.conormal_point(tor, math.pi / 2 + 0.02, 0.3)
    far = cn.conormal_point(tor, math.pi, 0.3)
    assert np.linalg.norm(near) > 2 * np.linalg.norm(far)


def test_matched_asymptotic_trajectories():
    # the Euclidean asymptotic net of the conormal image, integrated in the
    # shared parameters, retraces the affine asymptotic net of the source
    R, r = 2.0, 1.0
    src_field = bde.torus_extended_field(R, r)
    img_field = bde.conormal_euclidean_field(torus(R, r))
    seed = (1.35, 1.0)
    # steps small enough that polyline chord sagitta sits well under the
    # comparison tolerance, and short enough to stop before the projected
    # cusp, where curvature (hence sagitta) blows up
    params = flow.IntegrationParams(max_len=0.35, max_step_frac=5e-4)
    t_src = flow.integrate_asymptotic(src_field, seed, "plus", params)
    # match the image family to the source root at the seed
    d_src = bde.asymptotic_directions(src_field, *seed).dirs[0]
    img_dirs = bde.asymptotic_directions(img_field, *seed)
    fam = "plus" if abs(float(np.dot(img_dirs.dirs[0], d_src))) >= \
        abs(float(np.dot(img_dirs.dirs[-1], d_src))) else "minus"
    t_img = flow.integrate_asymptotic(img_field, seed, fam, params)
    if float(np.dot(t_img.points[5] - t_img.points[0],
                    t_src.points[5] - t_src.points[0])) < 0:
        t_img = flow.integrate_asymptotic(img_field, seed, fam, params, sweep=-1)
    common = min(t_src.samples[-1, 4], t_img.samples[-1, 4]) * 0.98
    sel = t_src.points[t_src.samples[:, 4] <= common]
    dev = max(point_polyline_distance(p, t_img.points) for p in sel)
    assert dev < 1e-5, dev


def point_polyline_distance(p, poly):
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.hypot(proj[:, 0] - p[0], proj[:, 1] - p[1])))


def test_affine_parabolic_point_both_determinants_vanish():
    # at a point where the net degenerates (l = m = 0, n != 0) the image
    # second form degenerates simultaneously
    eps, sigma, q13, q40 = 1, 0.9, 0.3, 0.5
    surf = sf.catalog_surface("pick", {
        "epsilon": eps, "sigma": sigma,
        "q": {(1, 3): q13, (3, 1): -eps * q13,
              (2, 2): -eps * (-2 * sigma ** 2 + q40), (4, 0): q40,
              (0, 4): q40 + 1.0}})
    fr = af.frame_jets(surf, 0.0, 0.0, order=4)
    l = float(af.dot(fr["nu_u"], fr["xi_u"]).value)
    m = float(af.dot(fr["nu_u"], fr["xi_v"]).value)
    n = float(af.dot(fr["nu_v"], fr["xi_v"]).value)
    assert abs(l * n - m * m) < 1e-10
    (e, f, g), _ = cn.second_form_of_conormal(surf, 0.0, 0.0)
    assert abs(e * g - f * f) < 1e-10
    assert abs(n) > 1e-3 and abs(g) > 1e-12  # not a totally degenerate point


def test_tangency_signals_agree_on_source_and_image():
    # along the shared degenerate curve, away from the Euclidean parabolic
    # point at the origin, the double directions of the source equation and
    # of the image second form coincide, so their tangency signals do too
    from affasym import singular as sg
    cg = sf.catalog_surface("cusp_gauss", {"q21": 1.0, "q40": 0.3},
                            domain=Rect(-0.09, 0.09, -0.12, 0.12))
    src = bde.monge_extended_field(cg)
    img = bde.conormal_euclidean_field(cg)
    polys = bde.trace_zero_set(lambda u, v: bde.discriminant(src, u, v),
                               cg.domain, 256)
    poly = max(polys, key=len)
    keep = np.abs(poly[:, 0]) > 0.015  # stand off the parabolic point
    poly = poly[keep]
    s_src = sg._tangency_signal(src, poly)
    s_img = sg._tangency_signal(img, poly)
    ok = np.isfinite(s_src) & np.isfinite(s_img)
    assert ok.sum() > 20
    # same signal up to overall sign of the tangent convention
    agree = np.max(np.abs(s_src[ok] - s_img[ok]))
    flip = np.max(np.abs(s_src[ok] + s_img[ok]))
    assert min(agree, flip) < 1e-6
    # and it changes sign across the tangency point at the origin
    left = s_src[ok & (poly[:, 0] < 0)]
    right = s_src[ok & (poly[:, 0] > 0)]
    assert left.size and right.size
    assert np.sign(np.median(left)) != np.sign(np.median(right))
