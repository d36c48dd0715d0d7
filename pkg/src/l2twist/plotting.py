"""Figure rendering for report outputs.

CSV stays the primary data interface; these helpers render the same data to
an image file next to it when a plot path is requested.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .quotients import ApproxResult
from .torsion import TorsionCurve

__all__ = ["plot_curve", "plot_approx"]


def plot_curve(curve: TorsionCurve, path: str, title: str = "twisted torsion"):
    """rho against t on a log-t axis, with the envelope band when present."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ts = [p.t for p in curve.points if p.status == "ok"]
    vals = [p.rho for p in curve.points if p.status == "ok"]
    ax.plot(ts, vals, "o-", ms=3, lw=1, label="rho(t)")
    bad = [p.t for p in curve.points if p.status != "ok"]
    if bad:
        for t in bad:
            ax.axvline(t, color="red", lw=0.5, alpha=0.5)
        ax.plot([], [], color="red", lw=0.5, label="non-det-class")
    if curve.envelope is not None:
        all_ts = [p.t for p in curve.points]
        hi = [curve.envelope.bound(t) for t in all_ts]
        ax.fill_between(all_ts, [-h for h in hi], hi, color="gray", alpha=0.15,
                        label="envelope")
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("rho")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_approx(res: ApproxResult, path: str, title: str = "quotient approximation"):
    """Per-level log-determinants and kernel dimensions against the order."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 5.0), sharex=True)
    orders = [lv.order for lv in res.levels]
    ax1.plot(orders, [lv.reg_logdet for lv in res.levels], "o-", ms=3, lw=1)
    ax1.axhline(res.limsup_estimate, color="gray", ls="--", lw=0.8,
                label="limsup estimate")
    ax1.set_ylabel("reg logdet")
    ax1.legend(loc="best", fontsize=8)
    ax1.grid(True, alpha=0.3)
    ax2.plot(orders, [lv.vn_dim_ker for lv in res.levels], "s-", ms=3, lw=1,
             color="tab:orange")
    ax2.set_xscale("log")
    ax2.set_xlabel("quotient order")
    ax2.set_ylabel("dim ker")
    ax2.grid(True, alpha=0.3)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
