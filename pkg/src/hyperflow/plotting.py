"""Static figures written next to the CSV outputs (Agg backend, no display)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
}


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _section(theta: np.ndarray, radius: np.ndarray, n: int):
    """Planar curve for the profile; n=2 shows the full meridian section."""
    if n == 1:
        th = np.append(theta, theta[0] + 2 * np.pi)
        rr = np.append(radius, radius[0])
    else:
        th = np.concatenate((theta, 2 * np.pi - theta[::-1]))
        rr = np.concatenate((radius, radius[::-1]))
    # colatitude is measured from the vertical axis for n=2
    if n == 2:
        return rr * np.sin(th), rr * np.cos(th)
    return rr * np.cos(th), rr * np.sin(th)


def profile_figure(names, table: np.ndarray, n: int, path: str | Path, title: str = "") -> None:
    """Final shape in the Klein ball plus curvature and residual along theta."""
    col = {name: table[:, i] for i, name in enumerate(names)}
    with plt.rc_context(STYLE):
        fig, (ax0, ax1, ax2) = plt.subplots(1, 3, figsize=(11, 3.6))
        x, y = _section(col["theta"], col["r"], n)
        ax0.plot(x, y, lw=1.5, label="r = tanh rho")
        circ = np.linspace(0, 2 * np.pi, 400)
        ax0.plot(np.cos(circ), np.sin(circ), color="0.6", lw=0.8, ls="--", label="unit ball")
        ax0.set_aspect("equal")
        ax0.set_title("Klein-model section")
        ax0.legend(loc="lower right", fontsize=7)

        for i in range(n):
            ax1.plot(col["theta"], col[f"kappa_{i + 1}"], lw=1.2, label=f"kappa_{i + 1}")
        ax1.plot(col["theta"], col["K"], lw=1.2, ls=":", label="K")
        ax1.set_xlabel("theta" if n == 1 else "colatitude")
        ax1.set_title("curvatures")
        ax1.legend(fontsize=7)

        ax2.plot(col["theta"], col["residual"], lw=1.0, color="C3")
        ax2.set_xlabel("theta" if n == 1 else "colatitude")
        ax2.set_title("residual  phi^a K - c f u")
        ax2.ticklabel_format(axis="y", style="sci", scilimits=(-3, 3))
        if title:
            fig.suptitle(title)
        _save(fig, Path(path))


def trace_figure(trace, path: str | Path, title: str = "") -> None:
    """Residual decay, radial extrema and the monitored functionals against t."""
    t = trace.column("t")
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
        ax = axes[0, 0]
        ax.semilogy(t, trace.column("residual_linf"), label="L-inf")
        ax.semilogy(t, trace.column("residual_l2"), label="L2")
        ax.set_title("normalized residual")
        ax.legend(fontsize=7)

        ax = axes[0, 1]
        ax.plot(t, trace.column("rho_min"), label="rho_min")
        ax.plot(t, trace.column("rho_max"), label="rho_max")
        ax.set_title("radial extrema")
        ax.legend(fontsize=7)

        ax = axes[1, 0]
        for name in ("Q", "J"):
            v = trace.column(name)
            if np.any(np.isfinite(v)):
                ax.plot(t, v, label=name)
        ax.set_title("functionals")
        ax.set_xlabel("t")
        ax.legend(fontsize=7)

        ax = axes[1, 1]
        C = trace.column("conserved")
        drift = (C - C[0]) / abs(C[0]) if C[0] != 0 else C - C[0]
        ax.plot(t, drift, color="C2")
        ax.set_title("relative change of int Omega(rho) f_tilde")
        ax.set_xlabel("t")
        ax.ticklabel_format(axis="y", style="sci", scilimits=(-3, 3))
        if title:
            fig.suptitle(title)
        _save(fig, Path(path))


def sweep_figure(rows, param: str, path: str | Path, title: str = "") -> None:
    ok = [r for r in rows if r.get("exit_code", 2) != 2]
    if not ok:
        return
    x = np.array([r["value"] for r in ok], dtype=float)
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4))
        J = np.array([r.get("J", np.nan) for r in ok], dtype=float)
        if np.any(np.isfinite(J)):
            ax0.plot(x, J, "o-")
            ax0.set_ylabel("J")
        else:
            ax0.plot(x, [r["rho_max"] for r in ok], "o-", label="rho_max")
            ax0.plot(x, [r["rho_min"] for r in ok], "s-", label="rho_min")
            ax0.legend(fontsize=7)
        ax0.set_xlabel(param)
        err = np.array([r.get("error", np.nan) for r in ok], dtype=float)
        res = np.array([r.get("final_residual_linf", np.nan) for r in ok], dtype=float)
        if np.any(np.isfinite(err) & (err > 0)):
            ax1.loglog(x, err, "o-", label="|rho - target|")
        if np.any(np.isfinite(res) & (res > 0)):
            ax1.loglog(x, res, "s--", label="final residual")
        ax1.set_xlabel(param)
        if ax1.get_legend_handles_labels()[0]:
            ax1.legend(fontsize=7)
        else:
            ax1.set_axis_off()
        if title:
            fig.suptitle(title)
        _save(fig, Path(path))
