import numpy as np
import pytest

from extcat import complexes as cx
from helpers import interval_hom_formula


def make(a, b, s, n=4, p=2):
    return cx.interval_complex(a, b, s, n, p)


def test_interval_complex_shape():
    c = make(2, 3, 0)
    assert c.comp(0) == (2,)
    assert c.comp(-1) == (4,)
    c2 = make(3, 4, 0)  # b = n drops the leading term
    assert c2.comp(0) == (3,)
    assert c2.comp(-1) == ()


def test_shift_involution():
    c = make(1, 2, 0)
    back = cx.shift_complex(cx.shift_complex(c, 1), -1)
    assert back.comps == c.comps
    for k in c.diffs:
        assert np.array_equal(back.diff(k) % 2, c.diff(k) % 2)


def test_identity_cone_is_exact():
    c = make(2, 4, 0)
    z, _, _ = cx.cone(cx.identity_map(c))
    assert cx.decompose_complex(z) == {}


@pytest.mark.parametrize("p", [2, 3])
def test_hom_spaces_match_formula_on_intervals(p):
    ivs = [(s, a, b) for s in (0, 1) for a in range(1, 5) for b in range(a, 5)]
    for s1, a1, b1 in ivs:
        for s2, a2, b2 in ivs:
            space = cx.HomSpace(make(a1, b1, s1, p=p), make(a2, b2, s2, p=p))
            want = interval_hom_formula((s1, a1, b1), (s2, a2, b2))
            assert space.dim == want, ((s1, a1, b1), (s2, a2, b2))


def test_chain_maps_verify_and_compose():
    src = make(3, 4, 0)   # P3 stalk
    dst = make(2, 4, 0)   # P2 stalk
    space = cx.HomSpace(src, dst)
    assert space.dim == 1
    f = space.basis_maps()[0]
    assert f.verify()
    g_space = cx.HomSpace(dst, make(2, 2, 0))
    g = g_space.basis_maps()[0]
    comp = g.compose(f)
    assert comp.verify()
    # P3 -> P2 -> S2 composes to zero up to homotopy
    total = cx.HomSpace(src, make(2, 2, 0))
    assert not np.any(total.class_coords(comp) % 2)


def test_cone_recovers_extension_middle():
    # nonzero class in E(S2, P3) realizes the middle P2
    s2 = make(2, 2, 0)
    p3_shift = cx.shift_complex(make(3, 4, 0), 1)
    space = cx.HomSpace(s2, p3_shift)
    assert space.dim == 1
    delta = space.basis_maps()[0]
    z, _, _ = cx.cone(delta.shifted(-1))
    assert cx.decompose_complex(z) == {(2, 4, 0): 1}


def test_all_elements_cap():
    s2 = make(2, 2, 0)
    p3_shift = cx.shift_complex(make(3, 4, 0), 1)
    space = cx.HomSpace(s2, p3_shift)
    assert space.all_elements() == [(0,), (1,)]
    assert cx.normalized_orbits(2, 3) == [(0, 1), (1, 0), (1, 1), (1, 2)]
