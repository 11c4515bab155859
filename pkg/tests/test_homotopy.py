"""Constrained thinning/thickening, cutting/filling, and the alternating
smoothing filter: examples plus the stability/topology/sandwich invariants."""

import numpy as np
import pytest

import toposmooth as ts
from toposmooth.homotopy import SmoothingParams
from toposmooth.verify import thicken_stable, thin_stable

from conftest import blob_image, crenellated_shape, random_image, slotted_rect


def bg_dmap(img):
    return ts.meijster(img, "background")


def test_thin_constrained_identity():
    rng = np.random.default_rng(1)
    img = random_image(rng, 4, 24)
    out = ts.thin(img, img, bg_dmap(img))
    assert np.array_equal(out, img)


def test_thin_segment_to_point():
    img = np.zeros((3, 11), bool)
    img[1, 1:10] = True
    w = np.zeros_like(img)
    out = ts.thin(img, w, bg_dmap(img), ts.CONN_84)
    assert out.sum() == 1  # a segment collapses to one pixel
    assert ts.topology_signature(out) == ts.topology_signature(img)
    assert thin_stable(out, w, ts.CONN_84)


def test_thin_preserves_topology_and_sandwich():
    rng = np.random.default_rng(3)
    for trial in range(25):
        img = random_image(rng, 4, 48)
        keep = img & (rng.random(img.shape) < 0.15)
        dm = bg_dmap(img)
        for conn in (ts.CONN_84, ts.CONN_48):
            out = ts.thin(img, keep, dm, conn)
            assert np.all(keep <= out) and np.all(out <= img)
            assert ts.topology_signature(out, conn) == ts.topology_signature(img, conn)
            assert thin_stable(out, keep, conn), trial


def test_thin_validation():
    img = np.zeros((5, 5), bool)
    img[2, 2] = True
    w = np.ones((5, 5), bool)
    with pytest.raises(ValueError):
        ts.thin(img, w, bg_dmap(img))  # keep set not inside the object
    with pytest.raises(ValueError):
        ts.thin(img, img, np.zeros((4, 4), np.int64))  # wrong dmap shape


def test_thin_max_iter_caps_rounds():
    img = np.ones((8, 8), bool)
    img[4, 4] = False
    w = np.zeros_like(img)
    capped = ts.thin(img, w, bg_dmap(img), max_iter=1)
    free_run = ts.thin(img, w, bg_dmap(img))
    assert capped.sum() >= free_run.sum()
    assert thin_stable(free_run, w, ts.CONN_84)


def test_thicken_identity_and_disc_fill():
    rng = np.random.default_rng(5)
    img = random_image(rng, 4, 24)
    assert np.array_equal(ts.thicken(img, img), img)

    v = np.zeros((13, 13), bool)
    v[6, 6] = True
    v = ts.dilate(v, 5)
    y = np.zeros_like(v)
    y[6, 6] = True
    out = ts.thicken(y, v)
    assert np.array_equal(out, v)  # a simply connected region fills completely
    assert thicken_stable(out, v, ts.CONN_84)


def test_thicken_topology_and_sandwich():
    rng = np.random.default_rng(7)
    for trial in range(25):
        img = random_image(rng, 4, 48)
        v = img | (rng.random(img.shape) < 0.3)
        for conn in (ts.CONN_84, ts.CONN_48):
            out = ts.thicken(img, v, conn)
            assert np.all(img <= out) and np.all(out <= v)
            assert ts.topology_signature(out, conn) == ts.topology_signature(img, conn)
            assert thicken_stable(out, v, conn), trial


def test_thicken_validation():
    y = np.ones((4, 4), bool)
    v = np.zeros((4, 4), bool)
    with pytest.raises(ValueError):
        ts.thicken(y, v)


def test_cutting_examples():
    rng = np.random.default_rng(9)
    img = blob_image(rng, 48, 48, discs=3)
    assert np.array_equal(ts.cutting(img, 0), img)
    empty = np.zeros((16, 16), bool)
    assert not ts.cutting(empty, 2).any()

    shape = crenellated_shape(64, 64, tooth=4)
    out = ts.cutting(shape, 2)
    assert np.all(out <= shape)
    assert ts.topology_signature(out) == ts.topology_signature(shape)
    assert ts.boundary_length(out) < ts.boundary_length(shape)


def test_cutting_keep_set():
    shape = crenellated_shape(64, 64, tooth=4)
    keep = shape.copy()  # inhibit everything: cutting may not remove a pixel
    out = ts.cutting(shape, 3, c=keep)
    assert np.all(shape <= out)
    bad = np.ones((64, 64), bool)
    with pytest.raises(ValueError):
        ts.cutting(shape, 2, c=bad)


def test_filling_examples():
    rng = np.random.default_rng(11)
    img = blob_image(rng, 48, 48, discs=3)
    assert np.array_equal(ts.filling(img, 0), img)
    full = np.ones((16, 16), bool)
    assert ts.filling(full, 2).all()

    shape = slotted_rect()  # narrow slots a radius-2 ball cannot enter
    out = ts.filling(shape, 2)
    assert np.all(shape <= out)
    assert np.any(out & ~shape)  # slot bottoms got filled
    assert ts.topology_signature(out) == ts.topology_signature(shape)
    assert ts.boundary_length(out) < ts.boundary_length(shape)


def test_filling_inhibit_set():
    shape = slotted_rect()
    d = ~shape & np.pad(np.ones(np.array(shape.shape) - 2, bool), 1)
    d &= ~ts.dilate(shape, 0)  # keep it background-only
    filled_free = ts.filling(shape, 2)
    out = ts.filling(shape, 2, d=~shape)  # inhibit every background pixel
    assert np.array_equal(out, shape)
    assert np.any(filled_free & ~shape)
    with pytest.raises(ValueError):
        ts.filling(shape, 2, d=shape)  # overlaps the object


def test_hasf_identity_cases():
    rng = np.random.default_rng(13)
    img = blob_image(rng, 40, 40, discs=3)
    assert np.array_equal(ts.hasf(img, SmoothingParams(r_max=0)), img)
    for probe in (np.zeros((12, 12), bool), np.ones((12, 12), bool)):
        for r in (1, 3, 5):
            assert np.array_equal(ts.hasf(probe, SmoothingParams(r_max=r)), probe)


def test_hasf_order1_is_cut_then_fill():
    rng = np.random.default_rng(15)
    for _ in range(6):
        img = random_image(rng, 8, 40)
        got = ts.hasf(img, SmoothingParams(r_max=1))
        want = ts.filling(ts.cutting(img, 1), 1)
        assert np.array_equal(got, want)


def test_hasf_preserves_topology():
    rng = np.random.default_rng(17)
    for trial in range(10):
        img = random_image(rng, 8, 56)
        for conn in (ts.CONN_84, ts.CONN_48):
            sig = ts.topology_signature(img, conn)
            out = ts.hasf(img, SmoothingParams(r_max=3, conn=conn))
            assert ts.topology_signature(out, conn) == sig, (trial, conn)


def test_hasf_smooths_noisy_shape():
    rng = np.random.default_rng(19)
    shape = crenellated_shape(96, 96, tooth=3, rng=rng, noise=0.35)
    out = ts.hasf(shape, SmoothingParams(r_max=5, conn=ts.CONN_48))
    assert ts.topology_signature(out, ts.CONN_48) == ts.topology_signature(shape, ts.CONN_48)
    assert ts.boundary_length(out) < ts.boundary_length(shape)


def test_hasf_equals_staged_decomposition():
    """The filter composed from the public erode/dilate/thin/thicken ops,
    stage by stage, is bit-identical to hasf (which fuses the distance
    maps internally)."""
    from toposmooth.verify import staged_smooth

    rng = np.random.default_rng(27)
    for _ in range(5):
        img = random_image(rng, 12, 56)
        for conn in (ts.CONN_84, ts.CONN_48):
            staged = staged_smooth(img, 3, conn, [])
            assert np.array_equal(staged, ts.hasf(img, SmoothingParams(r_max=3, conn=conn)))


def test_determinism_repeated_runs():
    rng = np.random.default_rng(21)
    img = random_image(rng, 16, 48)
    params = SmoothingParams(r_max=2)
    a = ts.hasf(img, params)
    b = ts.hasf(img, params)
    assert np.array_equal(a, b)
    dm = bg_dmap(img)
    w = np.zeros_like(img)
    assert np.array_equal(ts.thin(img, w, dm), ts.thin(img, w, dm))


def test_salient_parts():
    rng = np.random.default_rng(23)
    img = blob_image(rng, 40, 40, discs=4)
    removed, added = ts.salient_parts(img, img)
    assert not removed.any() and not added.any()
    smaller = ts.erode(img, 1)
    removed, added = ts.salient_parts(img, smaller)
    assert not added.any() and np.array_equal(removed, img & ~smaller)

    shape = crenellated_shape(64, 64, tooth=1)
    filled = ts.filling(shape, 2)
    removed, added = ts.salient_parts(shape, filled)
    assert not removed.any()
    assert np.array_equal(added, filled & ~shape)
    with pytest.raises(ValueError):
        ts.salient_parts(img, np.zeros((3, 3), bool))


def test_smoothing_params_validation():
    with pytest.raises(ValueError):
        SmoothingParams(r_max=-1)
    with pytest.raises(ValueError):
        SmoothingParams(r_max=1, workers=0)
    with pytest.raises(ValueError):
        SmoothingParams(r_max=1, max_iter=0)
