"""Pure numpy versions of the compiled kernels, same signatures and results."""

from __future__ import annotations

import math

import numpy as np


def _field(x, y, p0, p1, alpha):
    g = np.sin(np.pi * (x - p0)) ** 2 + np.sin(np.pi * (y - p1)) ** 2
    return g, g * alpha


def rk4_advance(pts: np.ndarray, nsteps: int, h: float, p0: float, p1: float, alpha: float) -> None:
    x = pts[:, 0].copy()
    y = pts[:, 1].copy()
    hh = 0.5 * h
    for _ in range(int(nsteps)):
        k1x, k1y = _field(x, y, p0, p1, alpha)
        k2x, k2y = _field(x + hh * k1x, y + hh * k1y, p0, p1, alpha)
        k3x, k3y = _field(x + hh * k2x, y + hh * k2y, p0, p1, alpha)
        k4x, k4y = _field(x + h * k3x, y + h * k3y, p0, p1, alpha)
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    pts[:, 0] = x
    pts[:, 1] = y


def _cdist(a, b, period):
    d = np.abs(a - b)
    if period > 0:
        d = d % period
        d = np.minimum(d, period - d)
    return d


def greedy_separated(orbits: np.ndarray, delta: float, period: float) -> np.ndarray:
    P, T = orbits.shape[0], orbits.shape[1]
    span = period if period > 0 else 1.0
    G = max(1, min(4096, int(math.floor(span / delta)) if delta > 0 else 1))
    cell = span / G
    last = orbits[:, -1, :]
    if period > 0:
        last = last % period
    cells = np.floor(last / cell).astype(np.int64)
    if period <= 0:
        cells = np.clip(cells, 0, G - 1)
    cells %= G
    buckets: dict[int, list[int]] = {}
    kept: list[int] = []
    offsets = (-1, 0, 1) if G >= 3 else None
    for p in range(P):
        cx, cy = int(cells[p, 0]), int(cells[p, 1])
        xs = [(cx + o) % G for o in offsets] if offsets else range(G)
        ys = [(cy + o) % G for o in offsets] if offsets else range(G)
        if period <= 0 and offsets:
            xs = [cx + o for o in offsets if 0 <= cx + o < G]
            ys = [cy + o for o in offsets if 0 <= cy + o < G]
        near = []
        for gx in xs:
            for gy in ys:
                near.extend(buckets.get(gx * G + gy, ()))
        if near:
            other = orbits[near]
            d = _cdist(other, orbits[p][None, :, :], period).max(axis=(1, 2))
            if (d <= delta).any():
                continue
        kept.append(p)
        buckets.setdefault(cx * G + cy, []).append(p)
    return np.asarray(kept, dtype=np.int64)
