use super::quadrature::{gauss_legendre, NeumaierSum};
use crate::error::{Error, Result};

/// Radial momentum grid: composite Gauss–Legendre on `[0, cutoff]`,
/// refined geometrically towards the Fermi surface.
///
/// `xi[i] = p_i^2 - mu` is formed from the node offset to `k_F`, so it keeps
/// full relative precision close to the Fermi surface.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub xi: Vec<f64>,
    pub mu: f64,
    pub cutoff: f64,
    pub panel_edges: Vec<f64>,
    pub points_per_panel: usize,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sqrt(mu)` when `mu > 0`.
    pub fn fermi_momentum(&self) -> Option<f64> {
        (self.mu > 0.0).then(|| self.mu.sqrt())
    }

    /// `sum_i w_i f(p_i)` with compensated summation.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .collect::<NeumaierSum>()
            .value()
    }

    /// `sum_i w_i v_i` with compensated summation.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .collect::<NeumaierSum>()
            .value()
    }

    /// Radial measure weights `w_i p_i^2`.
    pub fn measure(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * p * p)
            .collect()
    }
}

/// Parameters of a Fermi-adapted grid.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub mu: f64,
    pub cutoff: f64,
    /// Energy width of the Fermi-surface feature to resolve (typically `T` or `|Delta|`).
    pub scale: f64,
    pub panels_per_decade: usize,
    pub points_per_panel: usize,
    pub max_panel_width: f64,
}

impl GridSpec {
    pub fn new(mu: f64, cutoff: f64, scale: f64) -> Self {
        GridSpec {
            mu,
            cutoff,
            scale,
            panels_per_decade: 3,
            points_per_panel: 16,
            max_panel_width: f64::INFINITY,
        }
    }

    pub fn panels_per_decade(mut self, n: usize) -> Self {
        self.panels_per_decade = n;
        self
    }

    pub fn points_per_panel(mut self, n: usize) -> Self {
        self.points_per_panel = n;
        self
    }

    pub fn max_panel_width(mut self, h: f64) -> Self {
        self.max_panel_width = h;
        self
    }

    pub fn build(&self) -> Result<RadialGrid> {
        let GridSpec {
            mu,
            cutoff,
            scale,
            panels_per_decade,
            points_per_panel,
            max_panel_width,
        } = *self;
        if !mu.is_finite() || !cutoff.is_finite() || !scale.is_finite() {
            return Err(Error::invalid("grid", "grid parameters must be finite"));
        }
        if scale <= 0.0 {
            return Err(Error::invalid("grid", format!("resolution scale must be positive, got {scale}")));
        }
        if panels_per_decade == 0 || points_per_panel == 0 {
            return Err(Error::invalid("grid", "panel counts must be positive"));
        }
        if !(max_panel_width > 0.0) {
            return Err(Error::invalid("grid", "maximum panel width must be positive"));
        }
        if cutoff <= 0.0 || cutoff * cutoff <= mu.max(0.0) {
            return Err(Error::domain(
                "grid",
                format!("cutoff {cutoff} must exceed the Fermi momentum (mu = {mu})"),
            ));
        }
        let ratio = 10f64.powf(1.0 / panels_per_decade as f64);
        // Panels as (offset_lo, offset_hi) relative to `origin`.
        let (origin, panels) = if mu > 0.0 {
            let kf = mu.sqrt();
            (kf, fermi_panels(kf, cutoff, scale, ratio))
        } else {
            (0.0, plain_panels(mu, cutoff, scale, ratio))
        };
        let panels = split_wide(panels, max_panel_width);

        let (t, wt) = gauss_legendre(points_per_panel);
        let n = panels.len() * points_per_panel;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut xi = Vec::with_capacity(n);
        let mut edges = Vec::with_capacity(panels.len() + 1);
        edges.push(origin + panels[0].0);
        for &(lo, hi) in &panels {
            edges.push(origin + hi);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (ti, wi) in t.iter().zip(&wt) {
                let d = mid + half * ti;
                let p = origin + d;
                nodes.push(p);
                weights.push(half * wi);
                xi.push(if mu > 0.0 { d * (2.0 * origin + d) } else { p * p - mu });
            }
        }
        edges[0] = 0.0;
        Ok(RadialGrid {
            nodes,
            weights,
            xi,
            mu,
            cutoff,
            panel_edges: edges,
            points_per_panel,
        })
    }
}

/// Grid resolution knobs shared by the solvers. The resolution scale itself
/// (temperature or gap size) is supplied per call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridControls {
    /// Momentum cutoff; `None` selects `20 * max(sqrt(mu), 1, 1/range)`.
    pub cutoff: Option<f64>,
    pub panels_per_decade: usize,
    pub points_per_panel: usize,
    pub max_panel_width: f64,
}

impl Default for GridControls {
    fn default() -> Self {
        GridControls {
            cutoff: None,
            panels_per_decade: 3,
            points_per_panel: 12,
            max_panel_width: f64::INFINITY,
        }
    }
}

impl GridControls {
    /// Cutoff for chemical potential `mu` and interaction range `range`.
    pub fn cutoff_for(&self, mu: f64, range: f64) -> f64 {
        self.cutoff
            .unwrap_or_else(|| 20.0 * mu.max(0.0).sqrt().max(1.0).max(1.0 / range))
    }

    pub fn build(&self, mu: f64, range: f64, scale: f64) -> Result<RadialGrid> {
        GridSpec::new(mu, self.cutoff_for(mu, range), scale)
            .panels_per_decade(self.panels_per_decade)
            .points_per_panel(self.points_per_panel)
            .max_panel_width(self.max_panel_width)
            .build()
    }
}

/// Convenience wrapper around [`GridSpec`].
pub fn build_fermi_adapted_grid(
    mu: f64,
    cutoff: f64,
    scale: f64,
    panels_per_decade: usize,
    points_per_panel: usize,
) -> Result<RadialGrid> {
    GridSpec::new(mu, cutoff, scale)
        .panels_per_decade(panels_per_decade)
        .points_per_panel(points_per_panel)
        .build()
}

fn geometric_offsets(first: f64, ratio: f64, limit: f64) -> Vec<f64> {
    // Offsets first, first*r, ... strictly below `limit`; the last gap to
    // `limit` is merged when it would be much thinner than its neighbour.
    let mut out = vec![];
    let mut d = first;
    while d < limit {
        out.push(d);
        d *= ratio;
    }
    if out.len() >= 2 {
        let last = out[out.len() - 1];
        let prev = out[out.len() - 2];
        if limit - last < 0.5 * (last - prev) {
            out.pop();
        }
    }
    out
}

fn fermi_panels(kf: f64, cutoff: f64, scale: f64, ratio: f64) -> Vec<(f64, f64)> {
    let d0 = (0.5 * scale / kf).min(0.25 * kf).min(0.25 * (cutoff - kf));
    let left = geometric_offsets(d0, ratio, kf);
    let right = geometric_offsets(d0, ratio, cutoff - kf);
    let mut panels = Vec::new();
    let mut lo = -kf;
    for &d in left.iter().rev() {
        panels.push((lo, -d));
        lo = -d;
    }
    panels.push((lo, 0.0));
    let mut lo = 0.0;
    for &d in &right {
        panels.push((lo, d));
        lo = d;
    }
    panels.push((lo, cutoff - kf));
    panels
}

fn plain_panels(mu: f64, cutoff: f64, scale: f64, ratio: f64) -> Vec<(f64, f64)> {
    let h0 = (0.5 * mu.abs().max(scale).sqrt()).min(0.25 * cutoff);
    let offs = geometric_offsets(h0, ratio, cutoff);
    let mut panels = Vec::new();
    let mut lo = 0.0;
    for &d in &offs {
        panels.push((lo, d));
        lo = d;
    }
    panels.push((lo, cutoff));
    panels
}

fn split_wide(panels: Vec<(f64, f64)>, hmax: f64) -> Vec<(f64, f64)> {
    if !hmax.is_finite() {
        return panels;
    }
    let mut out = Vec::with_capacity(panels.len());
    for (lo, hi) in panels {
        let pieces = ((hi - lo) / hmax).ceil().max(1.0) as usize;
        let h = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let a = lo + h * k as f64;
            let b = if k + 1 == pieces { hi } else { lo + h * (k + 1) as f64 };
            out.push((a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_interval() {
        let g = build_fermi_adapted_grid(1.0, 20.0, 1e-4, 3, 16).unwrap();
        let total: f64 = g.weights.iter().sum();
        assert!((total - 20.0).abs() < 1e-12);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(g.panel_edges.contains(&1.0));
        let i = g.integrate(|p| p * p);
        assert!((i - 8000.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn xi_is_accurate_near_fermi_surface() {
        let mu = 2.0;
        let g = build_fermi_adapted_grid(mu, 10.0, 1e-9, 4, 12).unwrap();
        let min = g.xi.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
        assert!(min < 1e-9 && min > 0.0);
        for (p, xi) in g.nodes.iter().zip(&g.xi) {
            assert!((p * p - mu - xi).abs() < 1e-13 * (p * p).max(1.0));
        }
    }

    #[test]
    fn rejects_bad_cutoff() {
        assert!(matches!(
            build_fermi_adapted_grid(4.0, 2.0, 0.1, 3, 8),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            build_fermi_adapted_grid(f64::NAN, 2.0, 0.1, 3, 8),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn negative_mu_grid() {
        let g = build_fermi_adapted_grid(-0.5, 10.0, 1e-3, 3, 10).unwrap();
        assert!(g.fermi_momentum().is_none());
        let total: f64 = g.weights.iter().sum();
        assert!((total - 10.0).abs() < 1e-12);
    }

    #[test]
    fn width_cap() {
        let g = GridSpec::new(1.0, 30.0, 0.01).max_panel_width(1.0).build().unwrap();
        assert!(g.panel_edges.windows(2).all(|w| w[1] - w[0] <= 1.0 + 1e-12));
    }
}
