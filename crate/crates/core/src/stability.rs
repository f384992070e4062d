//! Gordon two-block certificates and the cube-density measure bound.
//!
//! A window is in `G(n, C)` at energy `E` when `V(k) = V(k + n)` for
//! `1 <= k <= n` and `|tr M(E, 1, n)| <= C`. For such a window every solution
//! satisfies `U(2n) - tr M * U(n) + U(0) = 0` by Cayley-Hamilton, where
//! `U(k) = (u(k+1), u(k))`. The triangle inequality then gives
//! `||U(0)|| <= C ||U(n)|| + ||U(2n)||`, hence
//! `max(||U(n)||, ||U(2n)||) >= ||U(0)|| / (C + 1)`.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circlemap::{PotentialWindow, Provenance};
use crate::error::{Error, Result};
use crate::operator::{iterate_solution, transfer_product};
use crate::spectrum::TraceBoundReport;
use crate::sturmian::{c_alpha_prefix, standard_words, window_coverage_check, ContinuedFraction};
use crate::symbolic::{frequency, occurrences, square_prefix, Word};

/// Multiplier applied to an empirical trace supremum to get `C`.
pub const TRACE_HEADROOM: f64 = 1.1;

/// Allowed shortfall of the non-decay ratio below `1/(C+1)`.
pub const NONDECAY_TOLERANCE: f64 = 1e-9;

const BOUND_DERIVATION: &str =
    "U(2n) - tr*U(n) + U(0) = 0 and the triangle inequality give ||U(0)|| <= C ||U(n)|| + ||U(2n)||";

/// `C` taken from a trace scan: its supremum times [`TRACE_HEADROOM`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstant {
    pub value: f64,
    pub empirical_sup: f64,
    pub headroom: f64,
    pub level_max: usize,
    pub proxy_level: usize,
    pub lambda: f64,
}

impl DerivedConstant {
    pub fn from_scan(scan: &TraceBoundReport) -> Self {
        DerivedConstant {
            value: scan.overall_sup * TRACE_HEADROOM,
            empirical_sup: scan.overall_sup,
            headroom: TRACE_HEADROOM,
            level_max: scan.level_max,
            proxy_level: scan.proxy_level,
            lambda: scan.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GordonCertificate {
    pub window: PotentialWindow,
    pub n: usize,
    /// `(E, |tr M(E, 1, n)|)`
    pub trace_samples: Vec<(f64, f64)>,
    pub c_used: f64,
    pub square_ok: bool,
    pub verdict: bool,
}

/// Checks membership of `window` in `G(n, C)` at each sampled energy.
pub fn gordon_membership(
    window: &PotentialWindow,
    n: usize,
    c: f64,
    energy_samples: &[f64],
) -> Result<GordonCertificate> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            module: "stability",
            name: "n",
            reason: "period must be positive".into(),
        });
    }
    if energy_samples.is_empty() {
        return Err(Error::InvalidParameter {
            module: "stability",
            name: "energies",
            reason: "at least one energy sample is required".into(),
        });
    }
    let n_i = n as i64;
    window.require("stability", 1, 2 * n_i)?;
    let square_ok = square_prefix(window.symbols_between(1, 2 * n_i), n)?;
    let trace_samples: Vec<(f64, f64)> = energy_samples
        .par_iter()
        .map(|&e| transfer_product(window, e, 1, n_i).map(|m| (e, m.trace().abs())))
        .collect::<Result<_>>()?;
    let verdict = square_ok && trace_samples.iter().all(|&(_, t)| t <= c);
    Ok(GordonCertificate {
        window: window.clone(),
        n,
        trace_samples,
        c_used: c,
        square_ok,
        verdict,
    })
}

/// Non-decay ratios for a set of seeds at one energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondecayReport {
    pub n: usize,
    pub energy: f64,
    pub trace: f64,
    pub c_used: f64,
    /// `1 / (C + 1)`
    pub bound: f64,
    pub derivation: String,
    /// `max(||U(n)||, ||U(2n)||) / ||U(0)||` per seed, in input order.
    pub ratios: Vec<f64>,
    pub min_max_norm_ratio: f64,
    /// Ratio for the seed most contracted by `M(E, 1, n)`.
    pub adversarial_ratio: f64,
    /// Largest `||U(2n) - tr U(n) + U(0)|| / ||U(0)||` seen.
    pub identity_residual: f64,
    pub holds: bool,
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Seed `(u(0), u(1))` whose `U(0)` is the right singular vector of the
/// smallest singular value of `m`.
fn most_contracted_seed(m: &[[f64; 2]; 2]) -> (f64, f64) {
    // eigenvector of m^T m for its smaller eigenvalue
    let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let half_gap = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let small = 0.5 * (a + d) - half_gap;
    let v = if b.abs() > 0.0 {
        if (a - small).abs() >= (d - small).abs() {
            [-b, a - small]
        } else {
            [d - small, -b]
        }
    } else if a <= d {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let r = norm(v);
    // U(0) = (u(1), u(0))
    (v[1] / r, v[0] / r)
}

/// Verifies `max(||U(n)||, ||U(2n)||) >= ||U(0)|| / (C + 1)` for each seed
/// `(u(0), u(1))` and for the most contracted direction of `M(E, 1, n)`.
pub fn nondecay_verify(
    window: &PotentialWindow,
    n: usize,
    energy: f64,
    seeds: &[(f64, f64)],
    c: f64,
) -> Result<NondecayReport> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            module: "stability",
            name: "n",
            reason: "period must be positive".into(),
        });
    }
    let n_i = n as i64;
    window.require("stability", 1, 2 * n_i)?;
    if !square_prefix(window.symbols_between(1, 2 * n_i), n)? {
        return Err(Error::CertificateRequired(format!(
            "window does not repeat with period {n} on [1, {}]",
            2 * n
        )));
    }
    let block = transfer_product(window, energy, 1, n_i)?;
    let trace = block.trace();
    if trace.is_nan() || trace.abs() > c {
        return Err(Error::CertificateRequired(format!(
            "|tr M(E, 1, {n})| = {} exceeds C = {c} at E = {energy}",
            trace.abs()
        )));
    }
    let square = PotentialWindow::new(
        1,
        window.symbols_between(1, 2 * n_i).to_vec(),
        window.levels().to_vec(),
        window.provenance().clone(),
    )?;
    let ratio_of = |seed: (f64, f64)| -> Result<(f64, f64)> {
        let traj = iterate_solution(&square, energy, seed)?;
        let u0 = norm(traj.state(0).expect("seeded"));
        let un = norm(traj.state(n_i).expect("iterated"));
        let u2n = norm(traj.state(2 * n_i).expect("iterated"));
        let [x0, y0] = traj.state(0).expect("seeded");
        let [xn, yn] = traj.state(n_i).expect("iterated");
        let [x2, y2] = traj.state(2 * n_i).expect("iterated");
        let residual = norm([x2 - trace * xn + x0, y2 - trace * yn + y0]) / u0;
        Ok((un.max(u2n) / u0, residual))
    };
    let per_seed: Vec<(f64, f64)> = seeds.iter().map(|&s| ratio_of(s)).collect::<Result<_>>()?;
    let adversarial = ratio_of(most_contracted_seed(&block.matrix()))?;
    let ratios: Vec<f64> = per_seed.iter().map(|r| r.0).collect();
    let min_max_norm_ratio = ratios
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .min(adversarial.0);
    let identity_residual = per_seed.iter().map(|r| r.1).fold(adversarial.1, f64::max);
    let bound = 1.0 / (c + 1.0);
    Ok(NondecayReport {
        n,
        energy,
        trace,
        c_used: c,
        bound,
        derivation: BOUND_DERIVATION.into(),
        ratios,
        min_max_norm_ratio,
        adversarial_ratio: adversarial.0,
        identity_residual,
        holds: min_max_norm_ratio >= bound - NONDECAY_TOLERANCE,
    })
}

/// `count` seeds `(u(0), u(1))` uniform on the unit circle, reproducible
/// from `rng_seed`.
pub fn unit_seeds(count: usize, rng_seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (t.cos(), t.sin())
        })
        .collect()
}

/// The window `V(1..=3 q_n)` read from `c_alpha` starting at the first
/// occurrence of `s_n s_n s_n`, with `V = lambda * symbol`.
pub fn cube_window(cf: &ContinuedFraction, lambda: f64, level: usize) -> Result<PotentialWindow> {
    let tower = standard_words(cf, level)?;
    let cube = tower.s(level as isize).power(3);
    let mut len = 8 * cube.len();
    loop {
        let prefix = c_alpha_prefix(cf, len)?;
        if let Some(&j) = occurrences(prefix.symbols(), cube.symbols()).first() {
            let symbols = prefix.symbols()[j..j + cube.len()].to_vec();
            return PotentialWindow::new(
                1,
                symbols,
                vec![0.0, lambda],
                Provenance::StandardWord { level },
            );
        }
        if len > 1 << 24 {
            return Err(Error::Window {
                module: "stability",
                needed: len,
                available: len,
            });
        }
        len *= 4;
    }
}

/// Result of checking that every `s_n^3` occurrence starts two squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeSquareCheck {
    pub level: usize,
    pub q: usize,
    pub occurrences: usize,
    pub holds: bool,
}

/// For every occurrence `j` of `s_n^3` in a prefix of `c_alpha`, the suffixes
/// at `j` and `j + q_n` both start with a square of period `q_n`.
pub fn cube_to_square_check(
    cf: &ContinuedFraction,
    level: usize,
    prefix_length: usize,
) -> Result<CubeSquareCheck> {
    let tower = standard_words(cf, level)?;
    let s = tower.s(level as isize);
    let q = s.len();
    let prefix = c_alpha_prefix(cf, prefix_length)?;
    let hits = occurrences(prefix.symbols(), s.power(3).symbols());
    let mut holds = true;
    for &j in &hits {
        let at = &prefix.symbols()[j..];
        holds &= square_prefix(at, q)? && square_prefix(&at[q..], q)?;
    }
    Ok(CubeSquareCheck {
        level,
        q,
        occurrences: hits.len(),
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureBoundReport {
    pub level: usize,
    pub q: usize,
    pub prefix_length: usize,
    pub occurrence_count: usize,
    /// `occurrence_count / (prefix_length - 3 q + 1)`
    pub cube_density: Ratio<u64>,
    /// `q * cube_density`
    pub product: f64,
    /// `1/7 - 2q/prefix_length` when the window property was confirmed.
    pub lower_bound: Option<f64>,
    pub window_property: bool,
    /// Set when the product is zero or falls below `lower_bound`.
    pub shortfall: bool,
}

impl MeasureBoundReport {
    pub fn density_f64(&self) -> f64 {
        *self.cube_density.numer() as f64 / *self.cube_density.denom() as f64
    }
}

/// Measures `q_n * d(s_n s_n s_n)` on a given prefix. `window_property`
/// states whether every `7 q_n` window of that prefix contains the cube.
pub fn measure_bound_in_prefix(
    prefix: &Word,
    s_n: &Word,
    level: usize,
    window_property: bool,
) -> Result<MeasureBoundReport> {
    let q = s_n.len();
    let est = frequency(prefix, &s_n.power(3))?;
    let product = q as f64 * est.density_f64();
    let lower_bound = window_property.then(|| 1.0 / 7.0 - 2.0 * q as f64 / prefix.len() as f64);
    let shortfall = product == 0.0 || lower_bound.is_some_and(|b| product < b);
    Ok(MeasureBoundReport {
        level,
        q,
        prefix_length: prefix.len(),
        occurrence_count: est.occurrence_count,
        cube_density: est.density,
        product,
        lower_bound,
        window_property,
        shortfall,
    })
}

/// Estimates `q_n d(s_n^3)` by exact counting in a prefix of `c_alpha` of at
/// least `10 q_{n+1}` symbols.
pub fn stability_measure_bound(
    cf: &ContinuedFraction,
    level: usize,
    prefix_length: usize,
) -> Result<MeasureBoundReport> {
    let tower = standard_words(cf, level + 1)?;
    let needed = 10 * tower.s(level as isize + 1).len();
    if prefix_length < needed {
        return Err(Error::Window {
            module: "stability",
            needed,
            available: prefix_length,
        });
    }
    let window = window_coverage_check(cf, level, prefix_length)?;
    let prefix = c_alpha_prefix(cf, prefix_length)?;
    measure_bound_in_prefix(
        &prefix,
        tower.s(level as isize),
        level,
        window.all_windows_contain_cube,
    )
}
