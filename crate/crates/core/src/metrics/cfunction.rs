//! Morozova–Chentsov functions `c(x, y)` and their `f(t) = 1/c(t, 1)`.

use serde::Serialize;

/// Relative eigenvalue gap below which `c_KMB` takes its diagonal limit.
pub const KMB_LIMIT_TOL: f64 = 1e-9;

/// Symmetric, (−1)-homogeneous kernel of an invariant metric together with
/// the weight `C` on the diagonal (classical) term.
#[derive(Debug, Clone, Copy)]
pub struct CFunction {
    name: &'static str,
    constant: f64,
    kernel: fn(f64, f64) -> f64,
    full_rank: bool,
}

fn c_sld(x: f64, y: f64) -> f64 {
    2.0 / (x + y)
}

fn c_kmb(x: f64, y: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return f64::INFINITY;
    }
    if (x - y).abs() <= KMB_LIMIT_TOL * x.max(y) {
        return 1.0 / x;
    }
    (x.ln() - y.ln()) / (x - y)
}

fn c_rld(x: f64, y: f64) -> f64 {
    0.5 * (1.0 / x + 1.0 / y)
}

fn c_l(x: f64, y: f64) -> f64 {
    let gap = x - y;
    if gap == 0.0 {
        return f64::INFINITY;
    }
    2.0 * (x + y) / (gap * gap)
}

impl CFunction {
    pub const SLD: CFunction = CFunction {
        name: "sld",
        constant: 1.0,
        kernel: c_sld,
        full_rank: false,
    };
    pub const KMB: CFunction = CFunction {
        name: "kmb",
        constant: 1.0,
        kernel: c_kmb,
        full_rank: true,
    };
    pub const RLD: CFunction = CFunction {
        name: "rld",
        constant: 1.0,
        kernel: c_rld,
        full_rank: true,
    };
    /// `c_L(x, y) = 2(x + y)/(x − y)²`; diverges on degenerate pairs.
    pub const CL: CFunction = CFunction {
        name: "cl",
        constant: 1.0,
        kernel: c_l,
        full_rank: false,
    };

    pub fn custom(name: &'static str, constant: f64, kernel: fn(f64, f64) -> f64, full_rank: bool) -> Self {
        CFunction {
            name,
            constant,
            kernel,
            full_rank,
        }
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn requires_full_rank(&self) -> bool {
        self.full_rank
    }

    pub fn c(&self, x: f64, y: f64) -> f64 {
        (self.kernel)(x, y)
    }

    /// `1/c(t, 1)`, zero where `c` diverges.
    pub fn f(&self, t: f64) -> f64 {
        let c = self.c(t, 1.0);
        if c.is_infinite() {
            0.0
        } else {
            1.0 / c
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FScanReport {
    pub name: &'static str,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `f` is nondecreasing along the grid.
    pub monotone: bool,
    /// First adjacent grid pair where `f` decreases.
    pub first_decrease: Option<(f64, f64)>,
    /// `f(t) = t·f(1/t)` within `1e−10` (relative to `max(1, |f(t)|)`).
    pub self_dual: bool,
    pub max_duality_defect: f64,
}

pub const DUALITY_TOL: f64 = 1e-10;

pub fn f_function_scan(cf: &CFunction, grid: &[f64]) -> FScanReport {
    let values: Vec<f64> = grid.iter().map(|&t| cf.f(t)).collect();
    let first_decrease = grid
        .windows(2)
        .zip(values.windows(2))
        .find(|(_, v)| v[1] < v[0])
        .map(|(t, _)| (t[0], t[1]));
    let max_duality_defect = grid
        .iter()
        .zip(&values)
        .map(|(&t, &f)| (f - t * cf.f(1.0 / t)).abs() / f.abs().max(1.0))
        .fold(0.0, f64::max);
    FScanReport {
        name: cf.name(),
        grid: grid.to_vec(),
        values,
        monotone: first_decrease.is_none(),
        first_decrease,
        self_dual: max_duality_defect <= DUALITY_TOL,
        max_duality_defect,
    }
}

/// `n` log-spaced points on `[lo, hi]`, with the point nearest 1 replaced
/// by exactly 1 when `lo < 1 < hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    if lo < 1.0 && hi > 1.0 {
        let nearest = (0..n)
            .min_by(|&i, &j| grid[i].ln().abs().total_cmp(&grid[j].ln().abs()))
            .unwrap();
        grid[nearest] = 1.0;
    }
    grid
}
