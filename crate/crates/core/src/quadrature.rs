//! Quadrature rules: Gauss-Legendre panels and nested tanh-sinh levels.

use std::f64::consts::FRAC_PI_2;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
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

/// Which end of a segment a tanh-sinh node is clustered against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Center,
    Right,
}

/// One abscissa of the double-exponential map
/// `x = c + h tanh(pi/2 sinh t)` expressed through its distance to the
/// nearer endpoint, so that integrands singular at the ends can be evaluated
/// without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct TanhSinhNode {
    pub side: Side,
    /// Distance to the nearer endpoint as a fraction of the half-width.
    pub gap: f64,
    /// `dx/dt` divided by the half-width.
    pub jacobian: f64,
    pub level: u32,
}

impl TanhSinhNode {
    /// Abscissa and distance to the nearer endpoint on `[a, b]`.
    pub fn place(&self, a: f64, b: f64) -> (f64, f64) {
        let half = 0.5 * (b - a);
        let d = half * self.gap;
        match self.side {
            Side::Left => (a + d, d),
            Side::Right => (b - d, d),
            Side::Center => (0.5 * (a + b), half),
        }
    }
}

/// Nested tanh-sinh rule. Level `l` uses step `base_step / 2^l`; nodes are
/// shared between levels.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    pub base_step: f64,
    pub t_max: f64,
}

impl Default for TanhSinh {
    fn default() -> Self {
        Self {
            base_step: 0.5,
            t_max: 6.0,
        }
    }
}

impl TanhSinh {
    pub fn step(&self, level: u32) -> f64 {
        self.base_step / f64::powi(2.0, level as i32)
    }

    /// Nodes first introduced at `level`.
    pub fn level_nodes(&self, level: u32) -> Vec<TanhSinhNode> {
        let h = self.step(level);
        let kmax = (self.t_max / h).ceil() as i64;
        let mut out = Vec::new();
        for k in 0..=kmax {
            if level > 0 && k % 2 == 0 {
                continue;
            }
            let t = k as f64 * h;
            let s = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * s).exp();
            let gap = 2.0 * e / (1.0 + e);
            let jacobian = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
            if k == 0 {
                out.push(TanhSinhNode {
                    side: Side::Center,
                    gap: 1.0,
                    jacobian,
                    level,
                });
                continue;
            }
            if gap == 0.0 || jacobian == 0.0 {
                break;
            }
            for side in [Side::Left, Side::Right] {
                out.push(TanhSinhNode {
                    side,
                    gap,
                    jacobian,
                    level,
                });
            }
        }
        out
    }
}
