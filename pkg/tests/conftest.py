"""Shared image generators for the test suite."""

import numpy as np

import toposmooth as ts


def random_image(rng, min_side=1, max_side=64, density=None):
    h = int(rng.integers(min_side, max_side + 1))
    w = int(rng.integers(min_side, max_side + 1))
    if density is None:
        density = float(rng.uniform(0.0, 1.0))
    return rng.random((h, w)) < density


def blob_image(rng, h, w, discs=6, r_lo=3, r_hi=12, salt=0.0):
    """Union of random discs, optionally XOR-ed with salt noise."""
    img = np.zeros((h, w), bool)
    for _ in range(discs):
        i = int(rng.integers(0, h))
        j = int(rng.integers(0, w))
        r = int(rng.integers(r_lo, max(r_lo + 1, r_hi)))
        seed = np.zeros((h, w), bool)
        seed[i, j] = True
        img |= ts.dilate(seed, r)
    if salt:
        img ^= rng.random((h, w)) < salt
    return img


def crenellated_shape(h, w, tooth=5, margin=None, rng=None, noise=0.0):
    """Filled rectangle with square teeth along its boundary, optionally
    perturbed by +-1 pixel boundary noise."""
    if margin is None:
        margin = max(4, tooth + 2)
    img = np.zeros((h, w), bool)
    img[margin : h - margin, margin : w - margin] = True
    for j0 in range(margin, w - margin, 2 * tooth):
        img[margin : margin + tooth, j0 : j0 + tooth] = False
        img[h - margin - tooth : h - margin, j0 + tooth : j0 + 2 * tooth] = False
    for i0 in range(margin, h - margin, 2 * tooth):
        img[i0 : i0 + tooth, margin : margin + tooth] = False
        img[i0 + tooth : i0 + 2 * tooth, w - margin - tooth : w - margin] = False
    if noise and rng is not None:
        pad = np.pad(img, 1)
        edge = img & ~(pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:])
        outer = ts.dilate(img, 1) & ~img
        flip = (edge | outer) & (rng.random((h, w)) < noise)
        img = img ^ flip
    return img


def slotted_rect(h=20, w=24, slots=(7, 11, 15), depth=3):
    """Filled rectangle with narrow deep slots a small ball cannot enter."""
    img = np.zeros((h, w), bool)
    img[5 : h - 5, 4 : w - 4] = True
    for j in slots:
        img[5 : 5 + depth, j] = False
    return img


def mixed_suite(rng, count, max_side=128):
    """A varied bag of binary images: noise fields, blob unions, toothed
    rectangles, plus degenerate sizes and densities."""
    out = []
    for k in range(count):
        kind = k % 3
        if kind == 0:
            out.append(random_image(rng, 1, max(8, max_side // 2)))
        elif kind == 1:
            h = int(rng.integers(24, max_side + 1))
            w = int(rng.integers(24, max_side + 1))
            out.append(blob_image(rng, h, w, discs=int(rng.integers(2, 9)), salt=0.02))
        else:
            h = int(rng.integers(48, max_side + 1))
            w = int(rng.integers(48, max_side + 1))
            out.append(crenellated_shape(h, w, tooth=int(rng.integers(3, 7)), rng=rng, noise=0.3))
    out.append(np.zeros((9, 9), bool))
    out.append(np.ones((9, 9), bool))
    return out
