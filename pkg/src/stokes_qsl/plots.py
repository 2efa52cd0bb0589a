"""Minimal static SVG renderer for line plots and heatmaps.

Heatmaps are rasterized to an embedded PNG (stdlib ``zlib``) so files stay
small for dense grids.
"""
from __future__ import annotations

import base64
import struct
import zlib
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

TURQUOISE = "#1aa6a6"
PURPLE = "#7b2f9e"

# anchor colors of a perceptually ordered dark-blue -> yellow map
_CMAP = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=float)


def colormap(v: np.ndarray) -> np.ndarray:
    v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0) * (len(_CMAP) - 1)
    i = np.minimum(v.astype(int), len(_CMAP) - 2)
    frac = (v - i)[..., None]
    return (_CMAP[i] * (1 - frac) + _CMAP[i + 1] * frac).round().astype(np.uint8)


def encode_png(rgb: np.ndarray) -> bytes:
    """Encode an ``(h, w, 3)`` uint8 array as PNG."""
    h, w, _ = rgb.shape
    raw = b"".join(b"\x00" + rgb[row].tobytes() for row in range(h))

    def chunk(tag: bytes, data: bytes) -> bytes:
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)

    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b"")


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 1e-9 * step, step)


class Figure:
    """A single set of axes mapped onto an SVG canvas."""

    def __init__(self, xlim, ylim, width=640, height=480, margin=(70, 30, 30, 60),
                 title="", xlabel="", ylabel="", equal=False):
        self.width, self.height = width, height
        self.left, self.right, self.top, self.bottom = margin
        self.xlim, self.ylim = tuple(map(float, xlim)), tuple(map(float, ylim))
        if equal:
            pw = width - self.left - self.right
            ph = height - self.top - self.bottom
            side = min(pw, ph)
            self.right = width - self.left - side
            self.bottom = height - self.top - side
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.items: list[str] = []
        self._legend: list[tuple[str, str]] = []

    @property
    def plot_box(self):
        return (self.left, self.top, self.width - self.left - self.right, self.height - self.top - self.bottom)

    def sx(self, x):
        x0, x1 = self.xlim
        bx, _, bw, _ = self.plot_box
        return bx + (np.asarray(x, float) - x0) / (x1 - x0) * bw

    def sy(self, y):
        y0, y1 = self.ylim
        _, by, _, bh = self.plot_box
        return by + bh - (np.asarray(y, float) - y0) / (y1 - y0) * bh

    def line(self, x, y, color="black", width=1.5, dash=None, label=None):
        px, py = self.sx(x), self.sy(y)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py) if np.isfinite(a) and np.isfinite(b))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{extra} points="{pts}"/>')
        if label:
            self._legend.append((label, color))

    def scatter(self, x, y, color="black", r=2.5, label=None):
        for a, b in zip(self.sx(x), self.sy(y)):
            self.items.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{r}" fill="{color}"/>')
        if label:
            self._legend.append((label, color))

    def image(self, rgb: np.ndarray):
        """Stretch an image (row 0 at the top) over the plot box."""
        bx, by, bw, bh = self.plot_box
        data = base64.b64encode(encode_png(rgb)).decode("ascii")
        self.items.append(
            f'<image x="{bx}" y="{by}" width="{bw}" height="{bh}" preserveAspectRatio="none" '
            f'style="image-rendering:pixelated" href="data:image/png;base64,{data}"/>'
        )

    def _axes(self) -> list[str]:
        bx, by, bw, bh = self.plot_box
        out = [f'<rect x="{bx}" y="{by}" width="{bw}" height="{bh}" fill="none" stroke="black"/>']
        for t in _ticks(*self.xlim):
            x = float(self.sx(t))
            out.append(f'<line x1="{x:.2f}" y1="{by + bh}" x2="{x:.2f}" y2="{by + bh + 5}" stroke="black"/>')
            out.append(f'<text x="{x:.2f}" y="{by + bh + 20}" text-anchor="middle" font-size="12">{_num(t)}</text>')
        for t in _ticks(*self.ylim):
            y = float(self.sy(t))
            out.append(f'<line x1="{bx - 5}" y1="{y:.2f}" x2="{bx}" y2="{y:.2f}" stroke="black"/>')
            out.append(f'<text x="{bx - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="12">{_num(t)}</text>')
        if self.xlabel:
            out.append(f'<text x="{bx + bw / 2}" y="{self.height - 15}" text-anchor="middle" font-size="14">{escape(self.xlabel)}</text>')
        if self.ylabel:
            cy = by + bh / 2
            out.append(f'<text x="18" y="{cy}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {cy})">{escape(self.ylabel)}</text>')
        if self.title:
            out.append(f'<text x="{self.width / 2}" y="20" text-anchor="middle" font-size="15">{escape(self.title)}</text>')
        for i, (label, color) in enumerate(self._legend):
            y = by + 18 + 18 * i
            out.append(f'<rect x="{bx + bw - 150}" y="{y - 10}" width="12" height="12" fill="{color}"/>')
            out.append(f'<text x="{bx + bw - 132}" y="{y}" font-size="12">{escape(label)}</text>')
        return out

    def to_svg(self) -> str:
        body = "\n".join(self.items + self._axes())
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n<rect width="100%" height="100%" fill="white"/>\n'
            f"{body}\n</svg>\n"
        )

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_svg(), encoding="utf-8")
        return path


def stokes_plane_figure(quantum_r: np.ndarray, classical_r: np.ndarray) -> Figure:
    """Both regimes projected onto the r_x-r_y plane.

    The dashed circle bounds the disc cut from the sphere at the initial polar angle.
    """
    fig = Figure((-1.05, 1.05), (-1.05, 1.05), width=560, height=560, xlabel="r_x", ylabel="r_y",
                 title="Stokes vector, r_x-r_y plane", equal=True)
    th = np.linspace(0, 2 * np.pi, 361)
    rad = float(np.sqrt(max(1.0 - classical_r[0, 2] ** 2, 0.0)))
    fig.line(np.cos(th), np.sin(th), color="#dddddd", width=1)
    fig.line(rad * np.cos(th), rad * np.sin(th), color="#999999", width=1, dash="4 3")
    fig.line(quantum_r[:, 0], quantum_r[:, 1], color=TURQUOISE, width=1, label="unrestricted")
    fig.line(classical_r[:, 0], classical_r[:, 1], color=PURPLE, width=2, label="classical")
    return fig


def heatmap_figure(values: np.ndarray, eps_grid: Sequence[float], t_grid: Sequence[float],
                   vmax: float = float(np.sqrt(2.0))) -> Figure:
    """``values[i, j]`` at ``(t_grid[j], eps_grid[i])``: time across, coupling up."""
    eps_grid, t_grid = np.asarray(eps_grid, float), np.asarray(t_grid, float)
    fig = Figure((t_grid[0], t_grid[-1]), (eps_grid[0], eps_grid[-1]), width=720, height=480,
                 margin=(70, 30, 30, 60), xlabel="t", ylabel="epsilon", title="D_HS(t, epsilon)")
    rgb = colormap(np.asarray(values)[::-1] / vmax)
    fig.image(rgb)
    return fig


def ratio_figure(n_values: Sequence[int], ratios: Sequence[float]) -> Figure:
    n_values = np.asarray(n_values, float)
    ratios = np.asarray(ratios, float)
    upper = float(np.nanmax(ratios)) * 1.05 if ratios.size else 1.0
    fig = Figure((n_values.min(), n_values.max()), (0.0, max(upper, 1.1)), xlabel="N", ylabel="Q(N)",
                 title="Speedup ratio Q(N)")
    fig.line(n_values, np.sqrt(n_values) / 2, color="#999999", dash="5 4", label="sqrt(N)/2")
    fig.line(n_values, np.ones_like(n_values), color="#cc3333", width=1, dash="2 3", label="Q = 1")
    fig.line(n_values, ratios, color=PURPLE, width=1)
    fig.scatter(n_values, ratios, color=PURPLE, label="Q(N)")
    return fig
