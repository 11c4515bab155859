"""Distance transforms: brute-force oracle, vector propagation, and the
exact two-phase transform with its parallel contract."""

import numpy as np
import pytest

import toposmooth as ts
from toposmooth.edt import _blocks

from conftest import random_image


def test_brute_examples():
    img = np.ones((3, 4), bool)
    assert np.all(ts.edt_brute(img, "foreground") == 0)
    empty = np.zeros((3, 4), bool)
    inf = ts.infinity((3, 4))
    assert np.all(ts.edt_brute(empty, "foreground") == inf)
    single = np.zeros((5, 5), bool)
    single[2, 2] = True
    b = ts.edt_brute(single)
    assert b[0, 0] == 8
    assert b[2, 0] == 4
    assert b[2, 2] == 0


def test_map_invariants():
    rng = np.random.default_rng(2)
    for _ in range(30):
        img = random_image(rng, 1, 40)
        m = ts.meijster(img)
        inf = ts.infinity(img.shape)
        hi = (img.shape[0] - 1) ** 2 + (img.shape[1] - 1) ** 2
        assert np.all((m == inf) | (m <= hi))
        assert np.array_equal(m == 0, img)  # zero iff target
        assert np.any(m == inf) == (not img.any())  # sentinel iff empty target


def test_meijster_equals_brute():
    rng = np.random.default_rng(5)
    for trial in range(120):
        img = random_image(rng, 1, 48)
        for tgt in ("foreground", "background"):
            assert np.array_equal(ts.meijster(img, tgt), ts.edt_brute(img, tgt)), (trial, tgt)


def test_meijster_worker_determinism():
    rng = np.random.default_rng(9)
    for _ in range(6):
        img = random_image(rng, 60, 200)
        ref = ts.meijster(img, "foreground", 1)
        for wk in (2, 3, 4, 8, 16):
            assert np.array_equal(ref, ts.meijster(img, "foreground", wk))


def test_column_row_independence():
    """Recomputing any single column of the first phase, or row of the
    second, in isolation reproduces its slice."""
    rng = np.random.default_rng(13)
    img = random_image(rng, 24, 64, density=0.3)
    h, w = img.shape
    g = ts.meijster_columns(img, "foreground", range(0, w))
    full = ts.meijster_rows(g, range(0, h))
    assert np.array_equal(full, ts.edt_brute(img))
    for y in rng.integers(0, w, 5):
        col = ts.meijster_columns(img, "foreground", range(int(y), int(y) + 1))
        assert np.array_equal(col[:, 0], g[:, int(y)])
    for x in rng.integers(0, h, 5):
        row = ts.meijster_rows(g, range(int(x), int(x) + 1))
        assert np.array_equal(row[0], full[int(x)])


def test_columns_examples():
    img = np.zeros((5, 3), bool)
    img[0, 1] = True  # target at top of column 1 only
    g = ts.meijster_columns(img, "foreground", range(0, 3))
    inf_v = 5 + 3
    assert np.all(g[:, 0] >= inf_v) and np.all(g[:, 2] >= inf_v)
    assert list(g[:, 1]) == [0, 1, 2, 3, 4]

    rng = np.random.default_rng(21)
    col = rng.random((17, 1)) < 0.3
    g = ts.meijster_columns(col, "foreground", range(0, 1))
    targets = np.flatnonzero(col[:, 0])
    for x in range(17):
        want = min((abs(x - int(b)) for b in targets), default=17 + 1)
        assert g[x, 0] == want


def test_f_examples():
    g = np.zeros((8, 8), np.int64)
    g[3, 4] = 2
    assert ts.f((3, 7), 4, g) == 9 + 4
    assert ts.f((3, 4), 4, g) == 4  # same column: just g^2
    g[3, 5] = 8 + 8  # sentinel for an empty column
    assert ts.f((3, 0), 5, g) == ts.infinity((8, 8))


def test_sep_examples_and_property():
    g = np.zeros((6, 8), np.int64)
    assert ts.sep(0, 4, 0, g) == 2  # equidistant midpoint
    g[0, 1] = 3
    g[0, 5] = 3
    assert ts.sep(1, 5, 0, g) == 3
    with pytest.raises(ValueError):
        ts.sep(4, 4, 0, g)

    # the separator really is the last column where the left region wins
    rng = np.random.default_rng(31)
    for _ in range(300):
        w = int(rng.integers(2, 20))
        grow = np.zeros((1, w), np.int64)
        grow[0] = rng.integers(0, w, w)
        i, u = sorted(rng.choice(w, size=2, replace=False))
        s = ts.sep(int(i), int(u), 0, grow)
        for c in range(w):
            fi = ts.f((0, c), int(i), grow)
            fu = ts.f((0, c), int(u), grow)
            if c <= s:
                assert fi <= fu
            else:
                assert fu <= fi


def test_transpose_symmetry():
    rng = np.random.default_rng(37)
    for _ in range(10):
        n = int(rng.integers(4, 40))
        img = rng.random((n, n)) < 0.3
        assert np.array_equal(ts.meijster(img).T, ts.meijster(img.T))


def test_monotonicity_in_targets():
    rng = np.random.default_rng(41)
    for _ in range(20):
        img = random_image(rng, 2, 32, density=0.2)
        m1 = ts.meijster(img)
        grown = img.copy()
        bg = np.argwhere(~img)
        if bg.size == 0:
            continue
        i, j = bg[rng.integers(0, len(bg))]
        grown[i, j] = True
        m2 = ts.meijster(grown)
        assert np.all(m2 <= m1)


def test_sed4_examples():
    single = np.zeros((9, 9), bool)
    single[4, 6] = True
    assert np.array_equal(ts.sed4(single), ts.edt_brute(single))
    img = np.ones((7, 5), bool)
    assert np.all(ts.sed4(img) == 0)


def test_sed4_bounded_deviation():
    """Vector propagation can differ from the exact transform, but only by
    a couple of squared units on this suite; the observed maximum is
    reported on failure."""
    rng = np.random.default_rng(43)
    worst = 0
    for _ in range(60):
        img = random_image(rng, 16, 64, density=float(rng.uniform(0.05, 0.6)))
        err = np.abs(ts.sed4(img) - ts.edt_brute(img))
        worst = max(worst, int(err.max()))
    assert worst <= 2, f"observed max squared deviation {worst}"


def test_blocks_partition():
    for n in (1, 2, 7, 100):
        for parts in (1, 2, 3, 8, 200):
            blocks = _blocks(n, parts)
            assert blocks[0][0] == 0 and blocks[-1][1] == n
            for (a, b), (c, d) in zip(blocks, blocks[1:]):
                assert b == c and b > a and d > c


def test_target_validation():
    with pytest.raises(ValueError):
        ts.meijster(np.zeros((3, 3), bool), "object")
    with pytest.raises(ValueError):
        ts.meijster(np.zeros((3, 3), bool), "foreground", workers=0)
    with pytest.raises(ValueError):
        ts.meijster_columns(np.zeros((3, 3), bool), "foreground", range(0, 4))
    with pytest.raises(ValueError):
        ts.meijster_rows(np.zeros((3, 3), np.int64), range(2, 5))
