//! Circle-rotation potentials `v_theta(n) = lambda * [alpha n + theta mod 1 in [1 - beta, 1)]`
//! evaluated in exact rational arithmetic.
//!
//! The irrational rotation number is replaced by a convergent `p_N / q_N`
//! whose denominator is large compared with every index that will be
//! queried. All orbit points then live on a common rational grid, so
//! membership in the half-open interval is decided exactly. Points that land
//! within the guard distance of `0` or `1 - beta` without hitting them are
//! reported as [`Error::BoundaryAmbiguity`]: the true rotation could put them
//! on either side.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sturmian::ContinuedFraction;
use crate::symbolic::{factor_set, Word};

/// Default ratio between the approximant denominator and the largest index.
pub const DEFAULT_PRECISION_FACTOR: u64 = 100;

/// Rotation, interval and coupling for a circle-map potential.
#[derive(Debug, Clone)]
pub struct CircleParams {
    alpha: BigRational,
    alpha_level: Option<usize>,
    beta: BigRational,
    lambda: f64,
    guard: BigRational,
    max_index: u64,
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        module: "circlemap",
        name,
        reason: reason.into(),
    }
}

fn check_unit_open(name: &'static str, x: &BigRational) -> Result<()> {
    if x.is_positive() && *x < BigRational::one() {
        Ok(())
    } else {
        Err(invalid(name, format!("{x} is not in (0, 1)")))
    }
}

impl CircleParams {
    /// Rotation number given by its expansion. The convergent used is the
    /// first whose denominator exceeds `precision_factor * max_index`; the
    /// guard is `1 / (10 q_N)`.
    pub fn from_cf(
        cf: &ContinuedFraction,
        beta: BigRational,
        lambda: f64,
        max_index: u64,
        precision_factor: u64,
    ) -> Result<Self> {
        check_unit_open("beta", &beta)?;
        let bound = BigUint::from(max_index.max(1)) * BigUint::from(precision_factor.max(1));
        let level = cf
            .level_with_denominator_above(&bound)
            .ok_or(Error::Depth {
                module: "circlemap",
                requested: cf.depth() + 1,
                available: cf.depth(),
            })?;
        let alpha = cf.convergent(level);
        check_unit_open("alpha", &alpha)?;
        let guard = BigRational::new(BigInt::one(), BigInt::from(cf.q(level) * 10u32));
        Ok(CircleParams {
            alpha,
            alpha_level: Some(level),
            beta,
            lambda,
            guard,
            max_index,
        })
    }

    /// The Sturmian case `beta = alpha`, with `beta` taken as the same
    /// convergent as the rotation.
    pub fn sturmian(cf: &ContinuedFraction, lambda: f64, max_index: u64) -> Result<Self> {
        Self::sturmian_with_precision(cf, lambda, max_index, DEFAULT_PRECISION_FACTOR)
    }

    pub fn sturmian_with_precision(
        cf: &ContinuedFraction,
        lambda: f64,
        max_index: u64,
        precision_factor: u64,
    ) -> Result<Self> {
        let mut params = Self::from_cf(
            cf,
            BigRational::new(1.into(), 2.into()),
            lambda,
            max_index,
            precision_factor,
        )?;
        params.beta = params.alpha.clone();
        Ok(params)
    }

    /// Exact rational rotation, mainly for tests.
    pub fn exact(
        alpha: BigRational,
        beta: BigRational,
        lambda: f64,
        guard: BigRational,
        max_index: u64,
    ) -> Result<Self> {
        check_unit_open("alpha", &alpha)?;
        check_unit_open("beta", &beta)?;
        if guard.is_negative() {
            return Err(invalid("precision_guard", "guard must be non-negative"));
        }
        Ok(CircleParams {
            alpha,
            alpha_level: None,
            beta,
            lambda,
            guard,
            max_index,
        })
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    /// Level `N` of the convergent standing in for the rotation number.
    pub fn alpha_level(&self) -> Option<usize> {
        self.alpha_level
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn guard(&self) -> &BigRational {
        &self.guard
    }

    pub fn max_index(&self) -> u64 {
        self.max_index
    }

    pub fn with_guard(mut self, guard: BigRational) -> Self {
        self.guard = guard;
        self
    }

    fn check_range(&self, lo: i64, hi: i64) -> Result<()> {
        let m = self.max_index as i64;
        if lo > hi || lo < -m || hi > m {
            return Err(Error::Range {
                module: "circlemap",
                lo,
                hi,
                window_lo: -m,
                window_hi: m,
            });
        }
        Ok(())
    }

    fn frame(&self, theta: &BigRational) -> OrbitFrame {
        let denom = [
            self.alpha.denom(),
            theta.denom(),
            self.beta.denom(),
            self.guard.denom(),
        ]
        .into_iter()
        .fold(BigInt::one(), |acc, d| acc.lcm(d));
        let scale = |x: &BigRational| -> BigInt { x.numer() * (&denom / x.denom()) };
        let step = scale(&self.alpha).mod_floor(&denom);
        let start = scale(theta).mod_floor(&denom);
        let boundary = scale(&(BigRational::one() - &self.beta));
        let guard = scale(&self.guard);
        OrbitFrame {
            denom,
            step,
            start,
            boundary,
            guard,
        }
    }
}

/// Orbit of `theta` under the rotation, scaled to integers modulo `denom`.
struct OrbitFrame {
    denom: BigInt,
    step: BigInt,
    start: BigInt,
    /// `(1 - beta) * denom`
    boundary: BigInt,
    guard: BigInt,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Membership {
    /// `[1 - beta, 1)`
    RightLimit,
    /// `(1 - beta, 1]`, the left-limit indicator
    LeftLimit,
}

impl OrbitFrame {
    fn point(&self, n: i64) -> BigInt {
        (&self.start + &self.step * BigInt::from(n)).mod_floor(&self.denom)
    }

    fn advance(&self, x: &mut BigInt) {
        *x += &self.step;
        if *x >= self.denom {
            *x -= &self.denom;
        }
    }

    fn circle_distance(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let d = (x - y).abs().mod_floor(&self.denom);
        let other = &self.denom - &d;
        d.min(other)
    }

    /// Which boundary, if any, the point is ambiguously close to.
    fn ambiguity(&self, x: &BigInt) -> Option<&'static str> {
        let near = |d: BigInt| d.is_positive() && d <= self.guard;
        if near(self.circle_distance(x, &BigInt::zero())) {
            Some("0")
        } else if near(self.circle_distance(x, &self.boundary)) {
            Some("1-beta")
        } else {
            None
        }
    }

    fn is_hit(&self, x: &BigInt) -> bool {
        x.is_zero() || *x == self.boundary
    }

    fn member(&self, x: &BigInt, mode: Membership) -> bool {
        match mode {
            Membership::RightLimit => *x >= self.boundary,
            Membership::LeftLimit => *x > self.boundary || x.is_zero(),
        }
    }

    fn symbols(&self, lo: i64, hi: i64, mode: Membership) -> Result<Vec<u8>> {
        let mut x = self.point(lo);
        let mut out = Vec::with_capacity((hi - lo + 1) as usize);
        for n in lo..=hi {
            if let Some(boundary) = self.ambiguity(&x) {
                return Err(Error::BoundaryAmbiguity {
                    index: n,
                    boundary: boundary.to_string(),
                });
            }
            out.push(self.member(&x, mode) as u8);
            self.advance(&mut x);
        }
        Ok(out)
    }
}

/// Which one-sided limit of the coding map to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `lim_{theta -> 0-} v_theta`
    AtZero,
    /// `lim_{theta -> (1 - beta)-} v_theta`
    AtOneMinusBeta,
}

/// Where a potential window came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Circle { theta: String },
    BoundaryLimit { which: Boundary },
    Substitution { name: String },
    StandardWord { level: usize },
    Periodic { word: String },
    Explicit,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Circle { theta } => write!(f, "circle(theta={theta})"),
            Provenance::BoundaryLimit { which } => write!(f, "boundary-limit({which:?})"),
            Provenance::Substitution { name } => write!(f, "substitution({name})"),
            Provenance::StandardWord { level } => write!(f, "standard-word(s_{level})"),
            Provenance::Periodic { word } => write!(f, "periodic({word})"),
            Provenance::Explicit => write!(f, "explicit"),
        }
    }
}

/// A finite slice `V(lo..=hi)` of a potential taking finitely many values.
///
/// Symbols are stored as alphabet indices; `levels[s]` is the potential value
/// of symbol `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "WindowRepr", try_from = "WindowRepr")]
pub struct PotentialWindow {
    lo: i64,
    symbols: Vec<u8>,
    levels: Vec<f64>,
    provenance: Provenance,
}

/// Serialized form: symbols as a digit string.
#[derive(Serialize, Deserialize)]
struct WindowRepr {
    lo: i64,
    symbols: String,
    levels: Vec<f64>,
    provenance: Provenance,
}

impl From<PotentialWindow> for WindowRepr {
    fn from(w: PotentialWindow) -> Self {
        WindowRepr {
            lo: w.lo,
            symbols: w.symbols.iter().map(|&s| char::from(b'0' + s)).collect(),
            levels: w.levels,
            provenance: w.provenance,
        }
    }
}

impl TryFrom<WindowRepr> for PotentialWindow {
    type Error = Error;

    fn try_from(r: WindowRepr) -> Result<Self> {
        let alphabet = r.levels.len().clamp(1, 10) as u8;
        let word = Word::parse_digits(&r.symbols, alphabet)?;
        PotentialWindow::new(r.lo, word.symbols().to_vec(), r.levels, r.provenance)
    }
}

impl PotentialWindow {
    pub fn new(
        lo: i64,
        symbols: Vec<u8>,
        levels: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Window {
                module: "circlemap",
                needed: 1,
                available: 0,
            });
        }
        if let Some((position, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s as usize >= levels.len())
        {
            return Err(Error::InvalidWord {
                symbol,
                position,
                alphabet_size: levels.len() as u8,
            });
        }
        Ok(PotentialWindow {
            lo,
            symbols,
            levels,
            provenance,
        })
    }

    /// A 0/1 word with `V = lambda * symbol`, starting at index `lo`.
    pub fn binary(word: &Word, lambda: f64, lo: i64, provenance: Provenance) -> Result<Self> {
        Self::new(lo, word.symbols().to_vec(), vec![0.0, lambda], provenance)
    }

    /// Word repeated periodically over `lo..=hi`, with `V(1) = lambda * word[0]`.
    pub fn periodic(word: &Word, lambda: f64, lo: i64, hi: i64) -> Result<Self> {
        let q = word.len() as i64;
        if q == 0 || hi < lo {
            return Err(Error::Window {
                module: "circlemap",
                needed: 1,
                available: 0,
            });
        }
        let symbols = (lo..=hi)
            .map(|n| word.symbols()[(n - 1).rem_euclid(q) as usize])
            .collect();
        let levels = (0..word.alphabet_size().max(2))
            .map(|s| lambda * s as f64)
            .collect();
        Self::new(
            lo,
            symbols,
            levels,
            Provenance::Periodic {
                word: word.to_string(),
            },
        )
    }

    /// Constant potential `value` on `lo..=hi`.
    pub fn constant(value: f64, lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::Window {
                module: "circlemap",
                needed: 1,
                available: 0,
            });
        }
        Self::new(
            lo,
            vec![0; (hi - lo + 1) as usize],
            vec![value],
            Provenance::Explicit,
        )
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.symbols.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        lo >= self.lo && hi <= self.hi()
    }

    pub fn require(&self, module: &'static str, lo: i64, hi: i64) -> Result<()> {
        if lo <= hi && self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::Range {
                module,
                lo,
                hi,
                window_lo: self.lo,
                window_hi: self.hi(),
            })
        }
    }

    pub fn symbol(&self, n: i64) -> Option<u8> {
        if self.covers(n, n) {
            Some(self.symbols[(n - self.lo) as usize])
        } else {
            None
        }
    }

    pub fn value(&self, n: i64) -> Option<f64> {
        self.symbol(n).map(|s| self.levels[s as usize])
    }

    /// Symbols on `lo..=hi`; panics if the range is not covered.
    pub fn symbols_between(&self, lo: i64, hi: i64) -> &[u8] {
        &self.symbols[(lo - self.lo) as usize..=(hi - self.lo) as usize]
    }

    /// Potential values on `lo..=hi`; panics if the range is not covered.
    pub fn values_between(&self, lo: i64, hi: i64) -> Vec<f64> {
        self.symbols_between(lo, hi)
            .iter()
            .map(|&s| self.levels[s as usize])
            .collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values_between(self.lo, self.hi())
    }

    /// Same values re-indexed so the window starts at `lo`.
    pub fn reindexed(&self, lo: i64) -> PotentialWindow {
        PotentialWindow { lo, ..self.clone() }
    }

    pub fn as_word(&self) -> Word {
        Word::new(self.symbols.clone(), self.levels.len().max(1) as u8)
            .expect("symbols index levels")
    }
}

/// `v_theta` on `lo..=hi`.
pub fn circle_potential_window(
    params: &CircleParams,
    theta: &BigRational,
    lo: i64,
    hi: i64,
) -> Result<PotentialWindow> {
    params.check_range(lo, hi)?;
    let symbols = params
        .frame(theta)
        .symbols(lo, hi, Membership::RightLimit)?;
    PotentialWindow::new(
        lo,
        symbols,
        vec![0.0, params.lambda],
        Provenance::Circle {
            theta: theta.to_string(),
        },
    )
}

/// One-sided limit `omega_0` or `omega_{1-beta}` on `lo..=hi`: the orbit of
/// the boundary point coded with the endpoint inclusion flipped.
pub fn boundary_limit_window(
    params: &CircleParams,
    which: Boundary,
    lo: i64,
    hi: i64,
) -> Result<PotentialWindow> {
    params.check_range(lo, hi)?;
    let theta = match which {
        Boundary::AtZero => BigRational::zero(),
        Boundary::AtOneMinusBeta => BigRational::one() - params.beta(),
    };
    let symbols = params
        .frame(&theta)
        .symbols(lo, hi, Membership::LeftLimit)?;
    PotentialWindow::new(
        lo,
        symbols,
        vec![0.0, params.lambda],
        Provenance::BoundaryLimit { which },
    )
}

/// Every `n` in `[-range, range]` with `alpha n + theta` congruent to `0` or
/// `1 - beta`: the indices where `theta -> v_theta(n)` jumps.
pub fn discontinuity_indices(params: &CircleParams, theta: &BigRational, range: i64) -> Vec<i64> {
    let frame = params.frame(theta);
    let mut x = frame.point(-range);
    let mut out = Vec::new();
    for n in -range..=range {
        if frame.is_hit(&x) {
            out.push(n);
        }
        frame.advance(&mut x);
    }
    out
}

/// First `n` in `1..=horizon` where `v_theta1(n) != v_theta2(n)`.
pub fn first_disagreement(
    params: &CircleParams,
    theta1: &BigRational,
    theta2: &BigRational,
    horizon: i64,
) -> Result<Option<i64>> {
    params.check_range(1, horizon.max(1))?;
    if theta1 == theta2 {
        return Ok(None);
    }
    let f1 = params.frame(theta1);
    let f2 = params.frame(theta2);
    let mut x1 = f1.point(1);
    let mut x2 = f2.point(1);
    for n in 1..=horizon {
        for (frame, x) in [(&f1, &x1), (&f2, &x2)] {
            if let Some(boundary) = frame.ambiguity(x) {
                return Err(Error::BoundaryAmbiguity {
                    index: n,
                    boundary: boundary.to_string(),
                });
            }
        }
        if f1.member(&x1, Membership::RightLimit) != f2.member(&x2, Membership::RightLimit) {
            return Ok(Some(n));
        }
        f1.advance(&mut x1);
        f2.advance(&mut x2);
    }
    Ok(None)
}

/// Factor sets of the orbit of `v_0` versus factors seen across a grid of
/// phases. Factors are rendered as 0/1 strings in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullReport {
    pub factor_length: usize,
    pub prefix_length: usize,
    pub grid_size: u64,
    pub skipped_thetas: u64,
    pub factors_v0: Vec<String>,
    pub factors_grid: Vec<String>,
    /// In `factors_v0` but not seen on the grid.
    pub missing: Vec<String>,
    /// Seen on the grid but not in the prefix of `v_0`.
    pub extra: Vec<String>,
    pub v0_subset_of_grid: bool,
}

/// Compares the length-`len` factors of `v_0(1..=prefix_length)` with the
/// windows `v_theta(0..len)` over `theta = k / grid_size`, together with the
/// windows of both boundary-limit sequences around the origin. Grid phases
/// whose window hits the guard band are skipped and counted.
pub fn hull_factor_comparison(
    params: &CircleParams,
    len: usize,
    grid_size: u64,
    prefix_length: usize,
) -> Result<HullReport> {
    if len == 0 || len > prefix_length {
        return Err(Error::Window {
            module: "circlemap",
            needed: len,
            available: prefix_length,
        });
    }
    if grid_size == 0 {
        return Err(invalid("grid", "grid size must be positive"));
    }
    let v0 = circle_potential_window(params, &BigRational::zero(), 1, prefix_length as i64)?;
    let f1: BTreeSet<Word> = factor_set(&v0.as_word(), len)?;

    let hi = len as i64 - 1;
    params.check_range(0, hi)?;
    let chunks: Vec<(BTreeSet<Vec<u8>>, u64)> = (0..grid_size)
        .into_par_iter()
        .fold(
            || (BTreeSet::new(), 0u64),
            |(mut seen, mut skipped), k| {
                let theta = BigRational::new(BigInt::from(k), BigInt::from(grid_size));
                match params.frame(&theta).symbols(0, hi, Membership::RightLimit) {
                    Ok(symbols) => {
                        seen.insert(symbols);
                    }
                    Err(_) => skipped += 1,
                }
                (seen, skipped)
            },
        )
        .collect();
    let mut f2: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut skipped = 0;
    for (seen, s) in chunks {
        f2.extend(seen);
        skipped += s;
    }
    for which in [Boundary::AtZero, Boundary::AtOneMinusBeta] {
        let m = len as i64;
        let w = boundary_limit_window(params, which, -m, m)?;
        f2.extend(w.symbols().windows(len).map(<[u8]>::to_vec));
    }

    let render = |s: &[u8]| s.iter().map(|&b| char::from(b'0' + b)).collect::<String>();
    let factors_v0: Vec<String> = f1.iter().map(|w| render(w.symbols())).collect();
    let factors_grid: Vec<String> = f2.iter().map(|s| render(s)).collect();
    let grid_set: BTreeSet<&String> = factors_grid.iter().collect();
    let v0_set: BTreeSet<&String> = factors_v0.iter().collect();
    let missing: Vec<String> = factors_v0
        .iter()
        .filter(|f| !grid_set.contains(f))
        .cloned()
        .collect();
    let extra: Vec<String> = factors_grid
        .iter()
        .filter(|f| !v0_set.contains(f))
        .cloned()
        .collect();
    Ok(HullReport {
        factor_length: len,
        prefix_length,
        grid_size,
        skipped_thetas: skipped,
        v0_subset_of_grid: missing.is_empty(),
        factors_v0,
        factors_grid,
        missing,
        extra,
    })
}
