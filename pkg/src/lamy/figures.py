"""Hasse-diagram rendering of finite posets with matplotlib."""

from __future__ import annotations

from typing import Callable

from lamy.domains import FinPoset, Value


def ranks(poset: FinPoset) -> list[int]:
    """Length of the longest chain from a minimal element to each element."""
    out = [0] * len(poset)
    covers = poset.lower_covers
    # element order is a linear extension, so lower covers come first
    for i in range(len(poset)):
        out[i] = 1 + max((out[j] for j in covers[i]), default=-1)
    return out


def hasse_figure(poset: FinPoset, fmt: Callable[[Value], str] = str, title: str | None = None):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rk = ranks(poset)
    levels: dict[int, list[int]] = {}
    for i, r in enumerate(rk):
        levels.setdefault(r, []).append(i)
    pos = {}
    for r, members in levels.items():
        for k, i in enumerate(members):
            pos[i] = (k - (len(members) - 1) / 2, r)
    width = max(len(m) for m in levels.values())
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * width), max(3, 1.3 * len(levels))))
    for lo, hi in poset.hasse_edges():
        (x0, y0), (x1, y1) = pos[lo], pos[hi]
        ax.plot([x0, x1], [y0, y1], color="0.4", lw=1, zorder=1)
    small = len(poset) <= 40
    for i, e in enumerate(poset.elements):
        x, y = pos[i]
        label = fmt(e) if small else f"#{i}"
        ax.text(
            x, y, label, ha="center", va="center", fontsize=9 if small else 6,
            bbox=dict(boxstyle="round", fc="white", ec="0.2"), zorder=2,
        )
    ax.set_xlim(-width / 2 - 0.5, width / 2 + 0.5)
    ax.set_ylim(-0.6, len(levels) - 0.4)
    ax.axis("off")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def save_hasse(poset: FinPoset, path: str, fmt: Callable[[Value], str] = str, title: str | None = None) -> None:
    import matplotlib.pyplot as plt

    fig = hasse_figure(poset, fmt, title)
    fig.savefig(path, dpi=150)
    plt.close(fig)
