//! Quadrature rules and one-dimensional integration grids.
//!
//! Every spatial integral in the crate is a weighted sum over a [`Grid1D`].
//! Grids are built either from a single rule over an interval
//! ([`make_grid`]) or from Gauss-Legendre panels over a list of breakpoints
//! ([`Grid1D::composite`]). The latter is what the two-particle states use
//! along the coordinate that carries the slowly decaying `sinc` tail.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rule used to place nodes on a single interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Equispaced nodes with composite trapezoid weights.
    Uniform,
    GaussLegendre,
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Rule::Uniform),
            "gauss-legendre" => Ok(Rule::GaussLegendre),
            other => Err(Error::param(format!("unknown quadrature rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rule::Uniform => "uniform",
            Rule::GaussLegendre => "gauss-legendre",
        })
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on the three-term recurrence; O(n²) work, accurate to
/// a few ulp for the sizes used here (up to a few thousand nodes).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and positive weights over `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    lower: f64,
    upper: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spacing: Option<f64>,
}

/// Build a single-rule grid over `[lower, upper]` with `n` nodes.
pub fn make_grid(lower: f64, upper: f64, n: usize, rule: Rule) -> Result<Grid1D> {
    if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
        return Err(Error::param(format!(
            "grid bounds [{lower}, {upper}] are not an interval"
        )));
    }
    if n < 2 {
        return Err(Error::param(format!(
            "grid needs at least 2 nodes, got {n}"
        )));
    }
    match rule {
        Rule::Uniform => {
            let h = (upper - lower) / (n - 1) as f64;
            let nodes = (0..n)
                .map(|i| {
                    if i == n - 1 {
                        upper
                    } else {
                        lower + i as f64 * h
                    }
                })
                .collect();
            let mut weights = vec![h; n];
            weights[0] = 0.5 * h;
            weights[n - 1] = 0.5 * h;
            Ok(Grid1D {
                lower,
                upper,
                nodes,
                weights,
                spacing: Some(h),
            })
        }
        Rule::GaussLegendre => {
            let (x, w) = gauss_legendre(n);
            let half = 0.5 * (upper - lower);
            let mid = 0.5 * (upper + lower);
            Ok(Grid1D {
                lower,
                upper,
                nodes: x.iter().map(|&x| mid + half * x).collect(),
                weights: w.iter().map(|&w| half * w).collect(),
                spacing: None,
            })
        }
    }
}

/// Grid layout of two-particle states: the `z2` axis is a plain grid over
/// `[lower, upper]`, the `z1` axis adds `sinc` tails out to `tail_tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
    pub rule: Rule,
    pub tail_tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lower: -10.0,
            upper: 10.0,
            n: 401,
            rule: Rule::Uniform,
            tail_tolerance: 1e-4,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid1D> {
        make_grid(self.lower, self.upper, self.n, self.rule)
    }

    /// Same spec translated by `dz`.
    pub fn shifted(&self, dz: f64) -> GridSpec {
        GridSpec {
            lower: self.lower + dz,
            upper: self.upper + dz,
            ..self.clone()
        }
    }

    /// Tail-resolving grid around `core` for a kernel of bandwidth `k0`.
    pub fn tail_grid(&self, core: (f64, f64), k0: f64) -> Result<Grid1D> {
        Grid1D::kernel_tail(core, 0.5, 6, 6, k0, self.tail_tolerance)
    }
}

impl Grid1D {
    /// Gauss-Legendre panels between consecutive `breakpoints`, `per_panel`
    /// nodes each.
    pub fn composite(breakpoints: &[f64], per_panel: usize) -> Result<Grid1D> {
        if breakpoints.len() < 2 {
            return Err(Error::param(
                "composite grid needs at least two breakpoints",
            ));
        }
        if per_panel < 1 || breakpoints.len() == 2 && per_panel < 2 {
            return Err(Error::param(
                "composite grid needs at least 2 nodes in total",
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]))
            || breakpoints.iter().any(|b| !b.is_finite())
        {
            return Err(Error::param(
                "composite breakpoints must be finite and strictly increasing",
            ));
        }
        let (x, w) = gauss_legendre(per_panel);
        let panels = breakpoints.len() - 1;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for pair in breakpoints.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[1] + pair[0]);
            nodes.extend(x.iter().map(|&x| mid + half * x));
            weights.extend(w.iter().map(|&w| half * w));
        }
        Ok(Grid1D {
            lower: breakpoints[0],
            upper: breakpoints[panels],
            nodes,
            weights,
            spacing: None,
        })
    }

    /// Composite grid resolving a core interval finely and following the
    /// `sinc(k0 u)` tails outward far enough that the discarded fraction of
    /// `∫ sinc²` is about `tail_tolerance`.
    ///
    /// Panels grow geometrically away from the core until they reach half a
    /// `sinc` period (`π / k0`), then stay at that width.
    pub fn kernel_tail(
        core: (f64, f64),
        core_panel: f64,
        core_nodes: usize,
        tail_nodes: usize,
        k0: f64,
        tail_tolerance: f64,
    ) -> Result<Grid1D> {
        let (lo, hi) = core;
        if !(lo < hi) || !(core_panel > 0.0) || !(k0 > 0.0) || !(tail_tolerance > 0.0) {
            return Err(Error::param(
                "kernel tail grid needs lo < hi and positive panel, k0, tolerance",
            ));
        }
        if core_nodes < 2 || tail_nodes < 2 {
            return Err(Error::param(
                "kernel tail grid needs at least 2 nodes per panel",
            ));
        }
        let reach = (1.0 / (PI * k0 * tail_tolerance)).max(0.5 * (hi - lo));
        let cap = PI / k0;

        let n_core = ((hi - lo) / core_panel).ceil().max(1.0) as usize;
        let core_breaks: Vec<f64> = (0..=n_core)
            .map(|i| {
                if i == n_core {
                    hi
                } else {
                    lo + i as f64 * core_panel
                }
            })
            .collect();

        // offsets of tail breakpoints beyond the core edge
        let mut offsets = Vec::new();
        let mut width = core_panel.min(cap);
        let mut edge = 0.0;
        while 0.5 * (hi - lo) + edge < reach {
            width = (width * 1.5).min(cap);
            edge += width;
            offsets.push(edge);
        }

        let (xc, wc) = gauss_legendre(core_nodes);
        let (xt, wt) = gauss_legendre(tail_nodes);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut push_panel = |a: f64, b: f64, x: &[f64], w: &[f64]| {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            nodes.extend(x.iter().map(|&x| mid + half * x));
            weights.extend(w.iter().map(|&w| half * w));
        };
        let mut left: Vec<f64> = offsets.iter().rev().map(|o| lo - o).collect();
        left.push(lo);
        for pair in left.windows(2) {
            push_panel(pair[0], pair[1], &xt, &wt);
        }
        for pair in core_breaks.windows(2) {
            push_panel(pair[0], pair[1], &xc, &wc);
        }
        let mut right = vec![hi];
        right.extend(offsets.iter().map(|o| hi + o));
        for pair in right.windows(2) {
            push_panel(pair[0], pair[1], &xt, &wt);
        }
        let lower = *left.first().unwrap();
        let upper = *right.last().unwrap();
        Ok(Grid1D {
            lower,
            upper,
            nodes,
            weights,
            spacing: None,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node spacing when the grid is uniform.
    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

// 7-point Gauss / 15-point Kronrod pair on [-1, 1] (positive half, center first)
const KRONROD_X: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.991_455_371_120_812_639_206_854_697_526_329,
];
const KRONROD_W: [f64; 8] = [
    0.209_482_141_084_727_828_012_999_174_891_714,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.022_935_322_010_529_224_963_732_008_058_970,
];
// Gauss weights for the nodes KRONROD_X[0], [2], [4], [6]
const GAUSS7_W: [f64; 4] = [
    0.417_959_183_673_469_387_755_102_040_816_327,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.129_484_966_168_869_693_270_611_432_679_082,
];

fn kronrod_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let f0 = f(mid);
    let mut kronrod = KRONROD_W[0] * f0;
    let mut gauss = GAUSS7_W[0] * f0;
    for j in 1..8 {
        let dx = half * KRONROD_X[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += KRONROD_W[j] * pair;
        if j % 2 == 0 {
            gauss += GAUSS7_W[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration to an absolute tolerance.
///
/// Panels are bisected until each one's Kronrod-Gauss difference is below
/// its share of `abs_tol`. An oriented integral is returned when `b < a`.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate_adaptive(f, b, a, abs_tol).map(|v| -v);
    }
    const MAX_DEPTH: u32 = 48;
    let total = b - a;
    let mut stack = vec![(a, b, 0u32)];
    let mut sum = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = kronrod_panel(&f, lo, hi);
        let budget = abs_tol * (hi - lo) / total;
        if err <= budget.max(1e-15 * value.abs()) || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > budget {
                return Err(Error::Accuracy {
                    coarse: value - err,
                    fine: value + err,
                    tolerance: abs_tol,
                });
            }
            sum += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(sum)
}
