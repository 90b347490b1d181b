import random
from fractions import Fraction as F

import pytest

from stcells.arrangement import Arrangement, DuplicateLines, LineInArrangement, complexity_histogram
from stcells.geometry import Line, VerticalLine, polygon_area, pt
from oracles import arrangement_counts, generic_counts


def sv(lines, p):
    """Sign vector of p straight from the line equations; 0 marks p on that line."""
    out = []
    for l in lines:
        v = l[0] * p[0] + l[1] * p[1] + l[2]
        out.append((v > 0) - (v < 0))
    return tuple(out)


def random_lines(rng, r, spread=50):
    ls = set()
    while len(ls) < r:
        ls.add(Line(F(rng.randint(-spread, spread), rng.randint(1, 9)), -1,
                    F(rng.randint(-spread, spread), rng.randint(1, 9))))
    return sorted(ls)


def generic_lines(r):
    # slopes 0..r-1 and intercepts that are powers of 2 with a large gap avoid triple points
    return [Line(m, -1, 2 ** (3 * m) + m * m) for m in range(r)]


def is_generic(lines):
    v, _, _ = arrangement_counts(lines)
    return v == len(lines) * (len(lines) - 1) // 2 and len({l.direction for l in lines}) == len(lines)


TRIANGLE = [Line(0, 1, 0), Line(1, 0, 0), Line(1, 1, -1)]  # y = 0, x = 0, x + y = 1


def test_small_examples():
    assert len(Arrangement([Line(0, 1, 0)]).faces) == 2
    a = Arrangement([Line(0, 1, 0), Line(1, 0, 0)])
    assert len(a.faces) == 4 and len(a.vertices) == 1
    a = Arrangement(TRIANGLE)
    assert len(a.faces) == 7 and len(a.vertices) == 3
    assert len({sv(TRIANGLE, a.face_interior_point(f)) for f in range(7)}) == 7
    assert Arrangement([]).counts == (1, 0, 1)


def test_duplicate_lines_rejected():
    with pytest.raises(DuplicateLines):
        Arrangement([Line(1, 2, 3), Line(2, 4, 6)])


@pytest.mark.parametrize("r", [1, 2, 5, 13, 30, 60])
def test_generic_counts(r):
    ls = generic_lines(r)
    assert is_generic(ls)
    a = Arrangement(ls)
    V, E, Fc = generic_counts(r)
    assert (len(a.vertices), len(a.faces)) == (V, Fc)
    assert len(a.edges) == E
    assert a.euler_ok()


@pytest.mark.parametrize("seed", range(8))
def test_random_counts_match_oracle(seed):
    rng = random.Random(seed)
    r = rng.choice([3, 10, 25, 60, 120])
    ls = random_lines(rng, r, spread=rng.choice([3, 50]))
    a = Arrangement(ls)
    V, E, Fc = arrangement_counts(ls)
    assert (len(a.vertices), len(a.edges), len(a.faces)) == (V, E, Fc)
    assert a.euler_ok()


def test_parallel_and_concurrent_families():
    par = [Line(0, 1, -k) for k in range(4)]
    a = Arrangement(par)
    assert (len(a.vertices), len(a.faces)) == (0, 5) and a.euler_ok()
    pencil = [Line(m, -1, 0) for m in range(5)] + [Line(1, 0, 0)]
    a = Arrangement(pencil)
    assert (len(a.vertices), len(a.faces)) == (1, 12) and a.euler_ok()


def test_every_edge_borders_two_faces():
    a = Arrangement(random_lines(random.Random(3), 15, 4))
    for e in range(len(a.edges)):
        fl, fr = a.edge_faces(e)
        assert fl != fr


def test_locate_examples():
    a = Arrangement(TRIANGLE)
    loc = a.locate(pt(F(1, 4), F(1, 4)))
    assert loc.kind == "face" and a.faces[loc.id].bounded
    assert a.locate(pt(0, 0)).kind == "vertex"
    assert a.locate(pt(F(1, 2), 0)).kind == "edge"
    far = pt(-1000, 999)
    loc = a.locate(far)
    assert loc.kind == "face" and not a.faces[loc.id].bounded
    assert a.sign_vectors[loc.id] == sv(TRIANGLE, far)


def test_locate_matches_sign_vector_oracle():
    rng = random.Random(5)
    ls = random_lines(rng, 12, 6)
    a = Arrangement(ls)
    by_sv = {s: f for f, s in enumerate(a.sign_vectors)}
    assert len(by_sv) == len(a.faces)
    for k in range(10_000):
        if k % 10 == 0:  # hit the lines and vertices now and then
            v = a.vertices[rng.randrange(len(a.vertices))]
            p = v if k % 20 == 0 else pt(v[0] + 1, ls[0].y_at(v[0] + 1))
        else:
            p = pt(F(rng.randint(-400, 400), rng.randint(1, 40)), F(rng.randint(-400, 400), rng.randint(1, 40)))
        s = sv(ls, p)
        loc = a.locate(p)
        zeros = s.count(0)
        if zeros == 0:
            assert loc == type(loc)("face", by_sv[s])
        elif zeros == 1:
            assert loc.kind == "edge"
            assert a.lines[a.edges[loc.id].line].contains(p)
        else:
            assert loc.kind == "vertex" and a.vertices[loc.id] == p


def walk_zone(lines, l):
    """Faces met by l, found by sampling l between its crossings and matching sign vectors."""
    d = l.direction
    P = l.anchor()
    ts = set()
    for m in lines:
        den = m[0] * d[0] + m[1] * d[1]
        if den:
            ts.add(-(m[0] * P[0] + m[1] * P[1] + m[2]) / den)
    ts = sorted(ts)
    samples = [ts[0] - 1] + [(a + b) / 2 for a, b in zip(ts, ts[1:])] + [ts[-1] + 1] if ts else [F(0)]
    return {sv(lines, (P[0] + t * d[0], P[1] + t * d[1])) for t in samples}


def test_zone_examples():
    a = Arrangement([Line(0, 1, 0)])
    assert len(a.zone(Line(1, 0, 0))) == 2
    a = Arrangement([Line(0, 1, -k) for k in range(3)])
    assert len(a.zone(Line(0, 1, -10))) == 1
    with pytest.raises(LineInArrangement):
        a.zone(Line(0, 1, -1))


@pytest.mark.parametrize("r", [5, 12, 40])
def test_generic_zone_has_r_plus_one_faces(r):
    ls = generic_lines(r)
    l = Line(F(1, 3), -1, F(-7, 11))
    assert is_generic(ls + [l])
    a = Arrangement(ls)
    z = a.zone(l)
    assert len(z) == r + 1
    assert {a.sign_vectors[f] for f in z} == walk_zone(ls, l)


def test_zone_never_exceeds_6r_on_degenerate_input():
    rng = random.Random(9)
    for _ in range(10):
        ls = random_lines(rng, 20, 3)
        l = Line(F(rng.randint(-9, 9), 7), -1, F(rng.randint(-9, 9), 5))
        if l in ls:
            continue
        z = Arrangement(ls).zone(l)
        assert len(z) <= 6 * len(ls)


def test_side_count_examples():
    a = Arrangement(TRIANGLE)
    tri = a.locate(pt(F(1, 4), F(1, 4))).id
    assert a.faces[tri].side_count == 3
    a = Arrangement([Line(0, 1, 0), Line(1, 0, 0)])
    assert all(f.side_count == 2 for f in a.faces)


def test_pentagon_face():
    # tangent lines x*u + y*v = 1 at five rational points of the unit circle spread around it
    touch = [(1, 0), (F(5, 13), F(12, 13)), (F(-4, 5), F(3, 5)), (F(-4, 5), F(-3, 5)), (F(5, 13), F(-12, 13))]
    ls = [Line(u, v, -1) for u, v in touch]
    a = Arrangement(ls)
    loc = a.locate(pt(0, 0))
    assert loc.kind == "face" and a.faces[loc.id].side_count == 5
    assert sorted(a.face_lines(loc.id)) == list(range(5))


def trap_area(t, lines):
    b, u = lines[t.bottom], lines[t.top]
    return (t.xr - t.xl) * ((u.y_at(t.xl) - b.y_at(t.xl)) + (u.y_at(t.xr) - b.y_at(t.xr))) / 2


def test_triangle_funnels():
    ls = [Line(0, 1, 0), Line(1, -1, 0), Line(1, 1, -2)]  # y = 0, y = x, y = 2 - x: vertices at x = 0, 1, 2
    a = Arrangement(ls)
    tri = a.locate(pt(1, F(1, 2))).id
    traps = a.face_funnels(tri)
    assert len(traps) == 2
    assert sum(trap_area(t, ls) for t in traps) == polygon_area(a.face_polygon(tri)) == 1


def test_face_without_projecting_vertex_is_one_funnel():
    strip = Arrangement([Line(0, 1, 0), Line(0, 1, -1)])
    f = strip.locate(pt(0, F(1, 2))).id
    assert len(strip.face_funnels(f)) == 1
    wedge = Arrangement([Line(1, -1, 0), Line(1, 1, 0)])  # the face x > |y| has its only vertex on the left
    f = wedge.locate(pt(1, 0)).id
    traps = wedge.face_funnels(f)
    assert len(traps) == 1 and traps[0].xl == 0 and traps[0].xr is None


def test_funnels_partition_faces():
    rng = random.Random(2)
    ls = random_lines(rng, 25, 6)
    a = Arrangement(ls)
    traps = a.funnels()
    per_face: dict[int, list] = {}
    for t in traps:
        assert t.side_count(ls) <= 4
        per_face.setdefault(t.face, []).append(t)
    assert set(per_face) == set(range(len(a.faces)))
    for f, face in enumerate(a.faces):
        if face.bounded:
            assert sum(trap_area(t, ls) for t in per_face[f]) == polygon_area(a.face_polygon(f))
    for _ in range(500):
        p = pt(F(rng.randint(-300, 300), 17), F(rng.randint(-300, 300), 13))
        loc = a.locate(p)
        if loc.kind != "face":
            continue
        inside = [t for t in traps if t.contains(p, ls)]
        walls = [t for t in per_face[loc.id] if p[0] in (t.xl, t.xr)]
        assert len(inside) == 1 and inside[0].face == loc.id or (not inside and walls)


def test_funnels_refuse_vertical_lines():
    with pytest.raises(VerticalLine):
        Arrangement([Line(1, 0, 0), Line(0, 1, 0)]).funnels()


def test_complexity_histogram():
    # [DERIVED] 3 generic lines: three 2-edge wedges, three 3-edge unbounded faces, one triangle
    h = complexity_histogram(Arrangement(TRIANGLE))
    assert {row["s"]: row["count"] for row in h} == {1: 3, 2: 4}
    assert complexity_histogram(Arrangement([]), faces=[]) == []
    a = Arrangement(random_lines(random.Random(4), 40))
    h = complexity_histogram(a)
    assert sum(row["count"] for row in h) == len(a.faces)
    assert all(row["bound"] > 0 for row in h)
