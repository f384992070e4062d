//! Transfer matrices of the discrete Schrödinger equation
//! `u(n+1) + u(n-1) + V(n) u(n) = E u(n)`.
//!
//! The single-site matrix is `[[E - V(n), -1], [1, 0]]`, and
//! `M(E, k, n) = A(n) A(n-1) ... A(k)` maps `(u(k), u(k-1))` to `(u(n+1), u(n))`.
//! Products are kept as a matrix plus an accumulated natural-log scale factor,
//! rescaled every [`RESCALE_PERIOD`] sites.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circlemap::PotentialWindow;
use crate::error::{Error, Result};
use crate::sturmian::ContinuedFraction;

pub type Mat2 = [[f64; 2]; 2];

pub const RESCALE_PERIOD: usize = 32;

/// Minimum number of steps for a Lyapunov estimate.
pub const MIN_LYAPUNOV_STEPS: u64 = 1000;

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Maximum absolute row sum.
pub fn row_sum_norm(m: &Mat2) -> f64 {
    (m[0][0].abs() + m[0][1].abs()).max(m[1][0].abs() + m[1][1].abs())
}

/// `m * exp(log_scale)`, a product of unimodular matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferState {
    m: Mat2,
    log_scale: f64,
}

impl Default for TransferState {
    fn default() -> Self {
        Self::identity()
    }
}

impl TransferState {
    pub fn identity() -> Self {
        TransferState {
            m: [[1.0, 0.0], [0.0, 1.0]],
            log_scale: 0.0,
        }
    }

    pub fn site(energy: f64, potential: f64) -> Self {
        TransferState {
            m: [[energy - potential, -1.0], [1.0, 0.0]],
            log_scale: 0.0,
        }
    }

    pub fn from_parts(m: Mat2, log_scale: f64) -> Self {
        TransferState { m, log_scale }
    }

    /// Scaled matrix; the true product is `scaled() * exp(log_scale())`.
    pub fn scaled(&self) -> &Mat2 {
        &self.m
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// The unscaled product. Overflows to infinity for long hyperbolic products.
    pub fn matrix(&self) -> Mat2 {
        let s = self.log_scale.exp();
        [
            [self.m[0][0] * s, self.m[0][1] * s],
            [self.m[1][0] * s, self.m[1][1] * s],
        ]
    }

    pub fn trace(&self) -> f64 {
        (self.m[0][0] + self.m[1][1]) * self.log_scale.exp()
    }

    /// `ln ||M||` with the row-sum norm.
    pub fn log_norm(&self) -> f64 {
        row_sum_norm(&self.m).ln() + self.log_scale
    }

    /// Determinant of the unscaled product, computed as
    /// `det(m) * exp(2 log_scale)`.
    pub fn determinant(&self) -> f64 {
        let d = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        d * (2.0 * self.log_scale).exp()
    }

    /// Left-multiplies by the single-site matrix at `(energy, potential)`.
    pub fn push_site(&mut self, energy: f64, potential: f64) {
        let a = energy - potential;
        let [[m00, m01], [m10, m11]] = self.m;
        self.m = [[a * m00 - m10, a * m01 - m11], [m00, m01]];
    }

    /// Divides out the largest entry into the log scale.
    pub fn rescale(&mut self) {
        let s = self
            .m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        if s > 0.0 && s.is_finite() {
            for x in self.m.iter_mut().flatten() {
                *x /= s;
            }
            self.log_scale += s.ln();
        }
    }

    /// `later * self`: the cocycle of `self`'s block followed by `later`'s.
    pub fn then(&self, later: &TransferState) -> TransferState {
        let mut out = TransferState {
            m: mul(&later.m, &self.m),
            log_scale: self.log_scale + later.log_scale,
        };
        out.rescale();
        out
    }

    pub fn pow(&self, mut exponent: u64) -> TransferState {
        let mut result = TransferState::identity();
        let mut base = *self;
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = result.then(&base);
            }
            base = base.then(&base);
            exponent >>= 1;
        }
        result
    }

    /// Applies the product to a vector, returning the unscaled result.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let s = self.log_scale.exp();
        [
            (self.m[0][0] * v[0] + self.m[0][1] * v[1]) * s,
            (self.m[1][0] * v[0] + self.m[1][1] * v[1]) * s,
        ]
    }
}

/// A product `M = Q R` kept as an orthogonal factor and the logs of the
/// diagonal of the triangular factor, updated by Gram-Schmidt after every
/// site. Unlike [`TransferState`] this keeps both singular directions, so the
/// determinant of a long hyperbolic product stays measurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalCocycle {
    q: Mat2,
    log_r: [f64; 2],
    log_det: f64,
    log_det_carry: f64,
    steps: u64,
}

impl Default for OrthogonalCocycle {
    fn default() -> Self {
        Self::new()
    }
}

impl OrthogonalCocycle {
    pub fn new() -> Self {
        OrthogonalCocycle {
            q: [[1.0, 0.0], [0.0, 1.0]],
            log_r: [0.0, 0.0],
            log_det: 0.0,
            log_det_carry: 0.0,
            steps: 0,
        }
    }

    pub fn push_site(&mut self, energy: f64, potential: f64) {
        let b = mul(&[[energy - potential, -1.0], [1.0, 0.0]], &self.q);
        let (b1, b2) = ([b[0][0], b[1][0]], [b[0][1], b[1][1]]);
        let r11 = b1[0].hypot(b1[1]);
        let q1 = [b1[0] / r11, b1[1] / r11];
        let r12 = q1[0] * b2[0] + q1[1] * b2[1];
        let w = [b2[0] - r12 * q1[0], b2[1] - r12 * q1[1]];
        let r22 = w[0].hypot(w[1]);
        let q2 = [w[0] / r22, w[1] / r22];
        self.q = [[q1[0], q2[0]], [q1[1], q2[1]]];
        self.log_r[0] += r11.ln();
        self.log_r[1] += r22.ln();
        let term = r11.mul_add(r22, -1.0).ln_1p() - self.log_det_carry;
        let sum = self.log_det + term;
        self.log_det_carry = (sum - self.log_det) - term;
        self.log_det = sum;
        self.steps += 1;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `ln |det M|`; zero for an exactly unimodular product.
    pub fn log_abs_det(&self) -> f64 {
        self.log_det
    }

    pub fn determinant(&self) -> f64 {
        let sign = self.q[0][0] * self.q[1][1] - self.q[0][1] * self.q[1][0];
        sign.signum() * self.log_abs_det().exp()
    }

    /// `(1/steps) ln r_11`, the QR estimate of the top Lyapunov exponent.
    pub fn growth_rate(&self) -> f64 {
        self.log_r[0] / self.steps.max(1) as f64
    }
}

/// `|det M(E, 1, n) - 1|` for the product over `potentials`, accumulated in
/// QR form.
pub fn determinant_drift(energy: f64, potentials: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = OrthogonalCocycle::new();
    for v in potentials {
        acc.push_site(energy, v);
    }
    (acc.determinant() - 1.0).abs()
}

/// Product over any sequence of potential values, in order of application.
pub fn transfer_over(energy: f64, potentials: impl IntoIterator<Item = f64>) -> TransferState {
    let mut state = TransferState::identity();
    for (i, v) in potentials.into_iter().enumerate() {
        state.push_site(energy, v);
        if (i + 1) % RESCALE_PERIOD == 0 {
            state.rescale();
        }
    }
    state.rescale();
    state
}

/// `M(E, k, n) = A(n) ... A(k)` over the window's potential.
pub fn transfer_product(
    window: &PotentialWindow,
    energy: f64,
    k: i64,
    n: i64,
) -> Result<TransferState> {
    window.require("operator", k, n)?;
    let levels = window.levels();
    Ok(transfer_over(
        energy,
        window
            .symbols_between(k, n)
            .iter()
            .map(|&s| levels[s as usize]),
    ))
}

/// Transfer matrices of the standard words `s_{-1}, s_0, ..., s_level` with
/// potential `lambda * symbol`, built by the renormalization recursion
/// `M(s_n) = M(s_{n-2}) M(s_{n-1})^{a_n}` rather than site by site.
pub fn sturmian_transfers(
    cf: &ContinuedFraction,
    lambda: f64,
    energy: f64,
    level: usize,
) -> Result<Vec<TransferState>> {
    if level > cf.depth() {
        return Err(Error::Depth {
            module: "operator",
            requested: level,
            available: cf.depth(),
        });
    }
    let mut out = Vec::with_capacity(level + 2);
    out.push(TransferState::site(energy, lambda));
    out.push(TransferState::site(energy, 0.0));
    for n in 1..=level {
        let exponent = if n == 1 { cf.a(1) - 1 } else { cf.a(n) };
        let next = out[n].pow(exponent).then(&out[n - 1]);
        out.push(next);
    }
    Ok(out)
}

/// Transfer matrix over the standard word `s_level`.
pub fn sturmian_transfer(
    cf: &ContinuedFraction,
    lambda: f64,
    energy: f64,
    level: usize,
) -> Result<TransferState> {
    Ok(*sturmian_transfers(cf, lambda, energy, level)?
        .last()
        .expect("tower has at least two entries"))
}

/// A solution of the difference equation on `0..=last`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrajectory {
    pub energy: f64,
    /// `(u(0), u(1))`
    pub seed: (f64, f64),
    values: Vec<f64>,
}

impl SolutionTrajectory {
    pub fn u(&self, n: i64) -> Option<f64> {
        usize::try_from(n)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    /// Highest index with a value.
    pub fn last(&self) -> i64 {
        self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `U(k) = (u(k+1), u(k))`.
    pub fn state(&self, k: i64) -> Option<[f64; 2]> {
        Some([self.u(k + 1)?, self.u(k)?])
    }

    /// Largest relative residual of the difference equation at interior
    /// indices, relative to the local solution size.
    pub fn max_residual(&self, window: &PotentialWindow) -> f64 {
        (1..self.last())
            .map(|n| {
                let v = window.value(n).unwrap_or(f64::NAN);
                let (prev, cur, next) = (
                    self.values[n as usize - 1],
                    self.values[n as usize],
                    self.values[n as usize + 1],
                );
                let residual = next + prev + v * cur - self.energy * cur;
                let size = prev
                    .abs()
                    .max(cur.abs())
                    .max(next.abs())
                    .max(f64::MIN_POSITIVE);
                (residual / size).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Iterates `u(n+1) = (E - V(n)) u(n) - u(n-1)` from `(u(0), u(1))` across
/// the window, which must contain index 1.
pub fn iterate_solution(
    window: &PotentialWindow,
    energy: f64,
    seed: (f64, f64),
) -> Result<SolutionTrajectory> {
    if seed == (0.0, 0.0) {
        return Err(Error::DegenerateSeed);
    }
    window.require("operator", 1, window.hi())?;
    let last = window.hi() + 1;
    let mut values = Vec::with_capacity(last as usize + 1);
    values.push(seed.0);
    values.push(seed.1);
    for n in 1..=window.hi() {
        let v = window.value(n).expect("covered");
        let next = (energy - v) * values[n as usize] - values[n as usize - 1];
        values.push(next);
    }
    Ok(SolutionTrajectory {
        energy,
        seed,
        values,
    })
}

/// Finite-step estimates of the forward and backward Lyapunov exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub energy: f64,
    pub steps: u64,
    /// `(1/steps) ln ||M(E, 1, steps)||`
    pub gamma_plus: f64,
    /// `(1/steps) ln ||M(E, -steps, -1)||`
    pub gamma_minus: f64,
}

impl LyapunovEstimate {
    /// `|gamma_plus - gamma_minus|`, a diagnostic only.
    pub fn asymmetry(&self) -> f64 {
        (self.gamma_plus - self.gamma_minus).abs()
    }
}

/// Lyapunov estimate for any potential given as a function of the index.
pub fn lyapunov_estimate_with(
    potential: impl Fn(i64) -> f64,
    energy: f64,
    steps: u64,
) -> Result<LyapunovEstimate> {
    if steps < MIN_LYAPUNOV_STEPS {
        return Err(Error::Window {
            module: "operator",
            needed: MIN_LYAPUNOV_STEPS as usize,
            available: steps as usize,
        });
    }
    let n = steps as i64;
    let forward = transfer_over(energy, (1..=n).map(&potential));
    let backward = transfer_over(energy, (-n..=-1).map(&potential));
    let gamma_plus = forward.log_norm() / steps as f64;
    let gamma_minus = backward.log_norm() / steps as f64;
    if !gamma_plus.is_finite() || !gamma_minus.is_finite() {
        return Err(Error::Numeric(format!(
            "Lyapunov estimate at E = {energy} is not finite"
        )));
    }
    Ok(LyapunovEstimate {
        energy,
        steps,
        gamma_plus,
        gamma_minus,
    })
}

/// Lyapunov estimate over a window covering `[-steps, steps]`.
pub fn lyapunov_estimate(
    window: &PotentialWindow,
    energy: f64,
    steps: u64,
) -> Result<LyapunovEstimate> {
    let n = steps as i64;
    window.require("operator", -n, n)?;
    lyapunov_estimate_with(|k| window.value(k).expect("covered"), energy, steps)
}

/// Lyapunov estimates on a list of energies, in input order.
pub fn lyapunov_scan(
    window: &PotentialWindow,
    energies: &[f64],
    steps: u64,
) -> Result<Vec<LyapunovEstimate>> {
    energies
        .par_iter()
        .map(|&e| lyapunov_estimate(window, e, steps))
        .collect()
}
