"""Declarative panel specifications for the built-in figure datasets.

Each panel names its input CSV (as emitted by `magnon-sense figure-data`),
the plot kind, and the columns it consumes.  Axis labels use the normalized
coordinates the datasets are tabulated in.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class PanelSpec:
    figure: str
    panel: str
    kind: str                     # "lines" | "heatmap" | "angle-comparison"
    source: str                   # input CSV name
    x: str
    xlabel: str
    ylabel: str
    ys: tuple = ()                # lines: value columns
    legend: tuple = ()            # lines: legend labels (matches ys)
    y: str = ""                   # heatmap: second axis column
    z: str = ""                   # heatmap: value column
    contour: str | None = None    # heatmap: companion contour CSV
    contour_color: str = "white"
    contour_dash: str = "--"
    yscale: str = "linear"
    zscale: str = "linear"
    true_col: str = ""            # angle-comparison: reference column
    est_col: str = ""             # angle-comparison: estimate column

    @property
    def name(self) -> str:
        return f"{self.figure}{self.panel}"


OMEGA = r"$\omega/\kappa_m$"

PANELS = (
    PanelSpec("fig2", "a", "lines", "fig2a.csv", "omega_over_kappa_m",
              OMEGA, r"$R_{\mathrm{NSNR}}$",
              ys=("r_nsnr_tm3", "r_nsnr_tm5", "r_nsnr_tm10", "r_nsnr_tm50"),
              legend=(r"$\kappa_m t_m=3$", r"$\kappa_m t_m=5$",
                      r"$\kappa_m t_m=10$", r"$\kappa_m t_m=50$"),
              yscale="log"),
    PanelSpec("fig2", "b", "lines", "fig2b.csv", "kappa_m_t_m",
              r"$\kappa_m t_m$", r"$R_{\mathrm{NSNR}}(\omega=0)$",
              ys=("r_nsnr_r0_0", "r_nsnr_r0_1", "r_nsnr_r0_1.5", "r_nsnr_r0_2"),
              legend=(r"$r_0=0$", r"$r_0=1$", r"$r_0=1.5$", r"$r_0=2$"),
              yscale="log"),
    PanelSpec("fig2", "c", "lines", "fig2c.csv", "omega_over_kappa_m",
              OMEGA, r"$R_{\mathrm{NSNR}}$",
              ys=("r_nsnr_kick0", "r_nsnr_kick100", "r_nsnr_kick10000",
                  "r_nsnr_kick1000000"),
              legend=(r"$\gamma B_z^0=0$", r"$\gamma B_z^0=10^2$",
                      r"$\gamma B_z^0=10^4$", r"$\gamma B_z^0=10^6$"),
              yscale="log"),
    PanelSpec("fig2", "d", "lines", "fig2d.csv", "r0",
              r"$r_0$", r"$\langle m_p^2\rangle_s$", ys=("m_p_sq",)),
    PanelSpec("fig2", "e", "lines", "fig2e.csv", "r0",
              r"$r_0$", r"$\langle a_x^2\rangle_s$", ys=("a_x_sq",),
              yscale="log"),
    PanelSpec("fig2", "f", "lines", "fig2f.csv", "r0",
              r"$r_0$", r"$\langle a_x m_p + m_p a_x\rangle_s$",
              ys=("a_x_m_p_sym",)),
    PanelSpec("fig3", "a", "angle-comparison", "fig3a.csv", "phi_true",
              r"true $\phi$ (rad)", r"$\phi$ (rad)",
              true_col="phi_true", est_col="phi_est"),
    PanelSpec("fig3", "b", "angle-comparison", "fig3b.csv", "theta_true",
              r"true $\theta$ (rad)", r"$\theta$ (rad)",
              true_col="theta_true", est_col="theta_est"),
    PanelSpec("fig4", "a", "heatmap", "fig4a.csv", "omega_over_kappa_m",
              OMEGA, r"$g_{am}/\kappa_m$", y="g_am_over_kappa_m", z="s_r",
              contour="fig4a_contour.csv", zscale="log"),
    PanelSpec("fig4", "b", "heatmap", "fig4b.csv", "omega_over_kappa_m",
              OMEGA, r"$\kappa_a/\kappa_m$", y="kappa_a_over_kappa_m", z="s_r",
              contour="fig4b_contour.csv", zscale="log"),
    PanelSpec("fig4", "c", "heatmap", "fig4c.csv", "omega_over_kappa_m",
              OMEGA, r"$g_{am}/\kappa_m$", y="g_am_over_kappa_m", z="s_r",
              contour="fig4c_contour.csv", zscale="log"),
    PanelSpec("fig4", "d", "heatmap", "fig4d.csv", "omega_over_kappa_m",
              OMEGA, r"$\kappa_a/\kappa_m$", y="kappa_a_over_kappa_m", z="s_r",
              contour="fig4d_contour.csv", zscale="log"),
    PanelSpec("fig5", "a", "lines", "fig5a.csv", "omega_over_kappa_m",
              OMEGA, r"$R_{\mathrm{SSNR}}$",
              ys=("r_ssnr_r0", "r_ssnr_r0.5", "r_ssnr_r1", "r_ssnr_r1.5"),
              legend=(r"$r=0$", r"$r=0.5$", r"$r=1$", r"$r=1.5$")),
    PanelSpec("fig5", "b", "heatmap", "fig5b.csv", "temperature_K",
              r"$T$ (K)", r"$r$", y="r", z="r_ssnr",
              contour="fig5b_contour.csv", contour_color="black",
              contour_dash="-"),
)


def panels_for(figure_id: str | None = None) -> tuple:
    if figure_id is None:
        return PANELS
    chosen = tuple(p for p in PANELS if p.figure == figure_id)
    if not chosen:
        known = sorted({p.figure for p in PANELS})
        raise KeyError(f"unknown figure id {figure_id!r} (choose from {known})")
    return chosen
