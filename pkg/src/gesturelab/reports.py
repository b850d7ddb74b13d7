"""Figure rendering for report outputs.

Every CLI report path drops a PNG next to its delimited output so a run can
be eyeballed without loading the logs anywhere. Rendering uses the Agg
backend and writes atomically; figures are decoration, but half-written
files would still poison sync tools and watchers.
"""

from __future__ import annotations

import os
from typing import Iterable, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


def _atomic_savefig(fig, path: str) -> None:
    tmp = f"{path}.tmp"
    fig.savefig(tmp, format="png", dpi=110)
    plt.close(fig)
    os.replace(tmp, path)


def loss_curve(losses: Iterable[float], path: str) -> str:
    losses = list(losses)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(losses) + 1), losses, lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean batch loss")
    ax.set_title("training loss")
    if losses and min(losses) > 0:
        ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _atomic_savefig(fig, path)
    return path


def confidence_trace(trace_rows: Iterable[dict], path: str) -> str:
    rows = list(trace_rows)
    frames = [r["frame"] for r in rows]
    probs = [r["num_prob"] if r["num_prob"] is not None else 0.0 for r in rows]
    stable = [r["stable"] for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    top.plot(frames, probs, lw=1.0, color="tab:blue")
    top.axhline(0.95, color="tab:red", ls="--", lw=0.8)
    top.set_ylabel("winning activation")
    top.set_ylim(-0.05, 1.05)
    top.grid(True, alpha=0.3)
    bottom.step(frames, stable, where="post", color="tab:green")
    bottom.set_ylabel("confirmed class")
    bottom.set_xlabel("frame")
    bottom.set_ylim(-0.5, 10.5)
    bottom.grid(True, alpha=0.3)
    fig.tight_layout()
    _atomic_savefig(fig, path)
    return path


def pointer_trajectory(events: Iterable[dict], path: str,
                       screen: Optional[tuple[int, int]] = None) -> str:
    moves_x, moves_y = [], []
    clicks = {"left_click": [], "right_click": [], "drag_start": [], "drag_end": []}
    for event in events:
        if event["kind"] == "move":
            moves_x.append(event["x"])
            moves_y.append(event["y"])
        elif event["kind"] in clicks and "x" in event:
            clicks[event["kind"]].append((event["x"], event["y"]))
    fig, ax = plt.subplots(figsize=(6, 6))
    if moves_x:
        ax.plot(moves_x, moves_y, lw=0.9, color="tab:blue", label="pointer path")
    styles = {"left_click": ("o", "tab:red"), "right_click": ("s", "tab:purple"),
              "drag_start": ("^", "tab:orange"), "drag_end": ("v", "tab:brown")}
    for kind, points in clicks.items():
        if points:
            xs, ys = zip(*points)
            marker, color = styles[kind]
            ax.scatter(xs, ys, marker=marker, color=color, label=kind, zorder=3)
    if screen is not None:
        ax.set_xlim(0, screen[0])
        ax.set_ylim(screen[1], 0)
    else:
        ax.invert_yaxis()  # screen coordinates grow downward
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("pointer events")
    if moves_x or any(clicks.values()):
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _atomic_savefig(fig, path)
    return path


def motion_profile(rows: Iterable[dict], path: str) -> str:
    rows = list(rows)
    frames = [r["frame"] for r in rows]
    changed = [r["changed"] for r in rows]
    limit = rows[0]["limit"] if rows else 0
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(frames, changed, lw=1.0, color="tab:blue", label="changed pixels")
    ax.axhline(limit, color="tab:red", ls="--", lw=0.8, label="alert limit")
    alert_frames = [r["frame"] for r in rows if r["alert"]]
    alert_values = [r["changed"] for r in rows if r["alert"]]
    if alert_frames:
        ax.scatter(alert_frames, alert_values, color="tab:red", zorder=3, label="alerts")
    ax.set_xlabel("frame")
    ax.set_ylabel("pixels over tau")
    ax.set_title("motion activity")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _atomic_savefig(fig, path)
    return path
