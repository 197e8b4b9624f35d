"""Deterministic static SVG figures from a time-series log."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sim_engine import TimeSeriesLog, normalized_position_error  # noqa: E402

# channel -> (title, x label, y label, curves); a curve is (label, x fn, y fn)
_t = lambda lg: lg["t"]
_deg = lambda name: (lambda lg: np.rad2deg(lg[name]))
_udeg = lambda name: (lambda lg: np.rad2deg(np.unwrap(lg[name])))

CHANNELS = {
    "depth": ("Depth", "t [s]", "z [m]", [("z", _t, lambda lg: lg["z"]), ("z_c", _t, lambda lg: lg["z_c"]),
                                           ("z_ad", _t, lambda lg: lg["z_ad"])]),
    "planes": ("Plane deflections", "t [s]", "deg", [(f"delta_{i}", _t, _deg(f"delta_{i}")) for i in range(1, 6)]),
    "commands": ("Vertical and horizontal commands", "t [s]", "deg",
                 [("delta_V", _t, _deg("delta_V")), ("delta_H", _t, _deg("delta_H"))]),
    "heading": ("Heading", "t [s]", "deg", [("psi", _t, _udeg("psi")), ("psi_c", _t, _udeg("psi_c"))]),
    "track": ("Horizontal track", "x [m]", "y [m]", [("track", lambda lg: lg["x"], lambda lg: lg["y"])]),
    "error": ("Normalized horizontal position error", "t [s]", "-",
              [("|e|/max|e|", _t, normalized_position_error)]),
    "gamma_dot": ("Rate of the virtual time", "t [s]", "-", [("gamma_dot", _t, lambda lg: lg["gamma_dot"])]),
    "speed": ("Speed", "t [s]", "m/s", [("u", _t, lambda lg: lg["u"]), ("v_c", _t, lambda lg: lg["v_c"])]),
    "sigma": ("Uncertainty estimate", "t [s]", "-", [(f"sigma_{i}", _t, (lambda i: lambda lg: lg[f"sigma_{i}"])(i))
                                                     for i in range(1, 5)]),
}


class UnknownChannel(ValueError):
    pass


def plot_channels(lg: TimeSeriesLog, channels, out_dir, config_hash: str = "", stem: str = "plot") -> list[Path]:
    """Write one SVG per channel; returns the file paths."""
    unknown = [c for c in channels if c not in CHANNELS]
    if unknown:
        raise UnknownChannel(f"unknown channel(s) {', '.join(unknown)}; available: {', '.join(CHANNELS)}")
    if len(lg) == 0:
        raise ValueError("log is empty; nothing to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    with plt.rc_context({"svg.hashsalt": "bb2sim", "svg.fonttype": "none", "path.simplify": False}):
        for ch in channels:
            title, xl, yl, curves = CHANNELS[ch]
            fig, ax = plt.subplots(figsize=(7, 4))
            for label, fx, fy in curves:
                ax.plot(fx(lg), fy(lg), label=label, lw=1.2)
            if ch == "track":
                ax.set_aspect("equal", adjustable="datalim")
            ax.set(title=title, xlabel=xl, ylabel=yl)
            ax.grid(True, lw=0.4)
            if len(curves) > 1:
                ax.legend(loc="best", fontsize=8)
            path = out_dir / f"{stem}_{ch}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
            plt.close(fig)
            text = path.read_text()
            head, sep, rest = text.partition("?>\n")
            path.write_text(f"{head}{sep}<!-- bb2sim channel={ch} config_hash={config_hash or 'unknown'} -->\n{rest}")
            paths.append(path)
    return paths
