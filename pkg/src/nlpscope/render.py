"""Static vector-graphics renderings of exported analytics (matplotlib SVG).

Renders consume the wire-format response models, never the raw trace, so a
figure shows exactly what a UI client would receive.
"""

from __future__ import annotations

from .service import schemas


def _figure():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_progression(response: schemas.ProgressionResponse, path: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot([p.step for p in response.points], [p.value for p in response.points], lw=1.2)
    ax.set_xlabel("optimization step")
    ax.set_ylabel("remaining travel distance")
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_group_series(response: schemas.GroupSeriesResponse, path: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 3))
    for entry in response.series:
        ax.plot([p.step for p in entry.points], [p.value for p in entry.points],
                lw=1.0, label=entry.id)
    ax.set_xlabel("optimization step")
    ax.set_ylabel(f"{response.group} ({response.kind})")
    if len(response.series) <= 12:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_projection(response: schemas.ProjectionResponse, path: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 5))
    n_paths = max(len(response.paths), 1)
    for rank, curve in enumerate(response.paths):
        shade = plt.cm.viridis(rank / max(n_paths - 1, 1))
        xs = [pt[0] for pt in curve.points]
        ys = [pt[1] for pt in curve.points]
        ax.plot(xs, ys, color=shade, lw=0.8, alpha=0.8)
    for curve in response.trajectories:
        xs = [pt[0] for pt in curve.points]
        ys = [pt[1] for pt in curve.points]
        ax.plot(xs, ys, color="#888888", lw=0.5, alpha=0.5)
    ax.set_xlabel("pc1")
    ax.set_ylabel("pc2")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_landscape(response: schemas.SampleResponse, path: str) -> None:
    plt = _figure()
    from matplotlib.patches import Polygon as MplPolygon
    fig, ax = plt.subplots(figsize=(5.5, 5))
    field = response.fields[0] if response.fields else None
    if field is not None and field.bands:
        cmap = plt.cm.summer_r  # yellow (low) through green (high)
        n_bands = len(field.bands)
        for idx, band in enumerate(field.bands):
            color = cmap(idx / max(n_bands - 1, 1))
            for poly in band.polygons:
                ax.add_patch(MplPolygon(poly, closed=True, facecolor=color,
                                        edgecolor="none"))
    if response.feasibility is not None:
        for poly in response.feasibility.polygons:
            ax.add_patch(MplPolygon(poly, closed=True, facecolor="#777777",
                                    edgecolor="none", alpha=0.55))
    traj = response.trajectory
    for i in range(len(traj.s) - 1):
        ax.plot(traj.s[i:i + 2], traj.t[i:i + 2], color="#d62728",
                lw=traj.width[i] * 0.5, solid_capstyle="round")
    s_min, s_max, t_min, t_max = response.window
    ax.set_xlim(s_min, s_max)
    ax.set_ylim(t_min, t_max)
    ax.set_xlabel("s")
    ax.set_ylabel("t")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
