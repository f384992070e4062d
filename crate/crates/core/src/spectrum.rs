//! Band spectra of periodic approximants and the interval arithmetic used
//! to track their Lebesgue measure.
//!
//! For a period-`q` potential the spectrum is `{E : |tr M(E)| <= 2}`, the
//! union of `q` closed bands. Band edges are the energies where
//! `tr M(E) = 2` (periodic solutions) or `tr M(E) = -2` (antiperiodic
//! solutions). They are seeded from the eigenvalues of the two `q x q`
//! Floquet matrices, which always yields exactly `2q` edges regardless of
//! how thin a band is, and then polished by bisection on `tr M(E) -/+ 2`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circlemap::{circle_potential_window, CircleParams};
use crate::error::{Error, Result};
use crate::operator::{lyapunov_estimate, sturmian_transfers, transfer_over, LyapunovEstimate};
use crate::sturmian::{standard_words, ContinuedFraction};
use crate::symbolic::Word;

/// Largest acceptable `|tr M(E) -/+ 2|` at a polished band edge.
pub const EDGE_TRACE_TOLERANCE: f64 = 1e-8;

/// Sorted, pairwise disjoint closed intervals. Touching intervals are merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Normalizes arbitrary intervals into a sorted disjoint union.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(lo, hi)| lo <= hi);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match intervals.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => intervals.push((lo, hi)),
            }
        }
        IntervalSet { intervals }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::from_intervals(all)
    }

    /// Two-pointer sweep over both sorted lists. Single-point contacts are kept
    /// as degenerate intervals.
    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// Open gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals
            .windows(2)
            .map(|w| (w[0].1, w[1].0))
            .filter(|(lo, hi)| hi > lo)
            .collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// `samples` interior points per interval at `lo + (hi - lo) j / (samples + 1)`.
    pub fn sample_points(&self, samples: usize) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|&(lo, hi)| {
                (1..=samples).map(move |j| lo + (hi - lo) * j as f64 / (samples + 1) as f64)
            })
            .collect()
    }
}

/// The `q` bands of a period-`q` potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSpectrum {
    /// Sorted bands `[lo, hi]`; neighbours may touch at a closed gap.
    pub bands: Vec<(f64, f64)>,
    pub period: usize,
    pub level: Option<usize>,
    pub lambda: f64,
}

impl BandSpectrum {
    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn as_set(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.bands.clone())
    }

    pub fn measure(&self) -> f64 {
        self.as_set().measure()
    }
}

/// `tr M(E)` over one period of the word with potential `lambda * symbol`.
pub fn discriminant(word: &Word, lambda: f64, energy: f64) -> f64 {
    transfer_over(energy, word.symbols().iter().map(|&s| lambda * s as f64)).trace()
}

fn floquet_eigenvalues(potential: &[f64], sign: f64) -> Vec<f64> {
    let q = potential.len();
    if q == 1 {
        return vec![potential[0] + 2.0 * sign];
    }
    let mut h = DMatrix::<f64>::zeros(q, q);
    for i in 0..q {
        h[(i, i)] = potential[i];
        if i + 1 < q {
            h[(i, i + 1)] = 1.0;
            h[(i + 1, i)] = 1.0;
        }
    }
    h[(0, q - 1)] += sign;
    h[(q - 1, 0)] += sign;
    let mut values: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Moves an approximate root of `f` onto a sign change and bisects it down to
/// adjacent floating-point numbers. Returns the input if no sign change is
/// found nearby (a double root at a closed gap).
fn polish_root(f: impl Fn(f64) -> f64, guess: f64) -> f64 {
    let f0 = f(guess);
    if f0 == 0.0 {
        return guess;
    }
    let mut delta = 1e-12 * guess.abs().max(1.0);
    let bracket = loop {
        if delta > 1e-4 {
            return guess;
        }
        let (lo, hi) = (guess - delta, guess + delta);
        let (flo, fhi) = (f(lo), f(hi));
        if flo.signum() != f0.signum() {
            break (lo, guess, flo);
        }
        if fhi.signum() != f0.signum() {
            break (guess, hi, f0);
        }
        delta *= 8.0;
    };
    let (mut lo, mut hi, mut flo) = bracket;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // the endpoint with the smaller residual
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// `{E : |tr M(E)| <= 2}` for the word repeated periodically, with
/// potential `lambda * symbol`.
pub fn band_spectrum(word: &Word, lambda: f64) -> Result<BandSpectrum> {
    let q = word.len();
    if q == 0 {
        return Err(Error::Resolution {
            expected: 0,
            found: 0,
            detail: "empty word".into(),
        });
    }
    let potential: Vec<f64> = word.symbols().iter().map(|&s| lambda * s as f64).collect();
    let mut edges: Vec<(f64, f64)> = Vec::with_capacity(2 * q);
    for target in [2.0, -2.0] {
        for e in floquet_eigenvalues(&potential, target / 2.0) {
            let polished = polish_root(|x| discriminant(word, lambda, x) - target, e);
            edges.push((polished, target));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut bands = Vec::with_capacity(q);
    for (k, pair) in edges.chunks(2).enumerate() {
        let ((lo, t_lo), (hi, t_hi)) = (pair[0], pair[1]);
        if t_lo == t_hi {
            return Err(Error::Resolution {
                expected: q,
                found: k,
                detail: format!("band {k} edges {lo} and {hi} both have trace {t_lo}"),
            });
        }
        for (edge, target) in [(lo, t_lo), (hi, t_hi)] {
            let residual = (discriminant(word, lambda, edge) - target).abs();
            if residual > EDGE_TRACE_TOLERANCE {
                return Err(Error::Resolution {
                    expected: q,
                    found: k,
                    detail: format!("edge {edge} has |tr - ({target})| = {residual:e}"),
                });
            }
        }
        bands.push((lo, hi));
    }
    let bound = 2.0 + lambda.abs() + 1e-9;
    if bands.iter().any(|&(lo, hi)| lo < -bound || hi > bound) {
        return Err(Error::Resolution {
            expected: q,
            found: bands.len(),
            detail: format!("band outside [-{bound}, {bound}]"),
        });
    }
    Ok(BandSpectrum {
        bands,
        period: q,
        level: None,
        lambda,
    })
}

/// Band spectrum `sigma_n` of the periodic approximant built from `s_n`.
pub fn approximant_spectrum(
    cf: &ContinuedFraction,
    lambda: f64,
    level: usize,
) -> Result<BandSpectrum> {
    let tower = standard_words(cf, level)?;
    let mut spectrum = band_spectrum(tower.s(level as isize), lambda)?;
    spectrum.level = Some(level);
    Ok(spectrum)
}

/// `sigma_n` for every listed level, computed in parallel, returned in input order.
pub fn approximant_spectra(
    cf: &ContinuedFraction,
    lambda: f64,
    levels: &[usize],
) -> Result<Vec<BandSpectrum>> {
    levels
        .par_iter()
        .map(|&n| approximant_spectrum(cf, lambda, n))
        .collect()
}

/// `sigma_n ∩ sigma_{n+1}`, the finite-level stand-in for the spectrum.
pub fn proxy_spectrum(cf: &ContinuedFraction, lambda: f64, level: usize) -> Result<IntervalSet> {
    let spectra = approximant_spectra(cf, lambda, &[level, level + 1])?;
    Ok(spectra[0].as_set().intersection(&spectra[1].as_set()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub measure_a: f64,
    pub measure_b: f64,
    pub intersection: IntervalSet,
    pub measure_intersection: f64,
}

pub fn measure_and_intersect(a: &BandSpectrum, b: &BandSpectrum) -> IntersectionReport {
    let intersection = a.as_set().intersection(&b.as_set());
    IntersectionReport {
        measure_a: a.measure(),
        measure_b: b.measure(),
        measure_intersection: intersection.measure(),
        intersection,
    }
}

/// Knobs for [`trace_bound_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceScanConfig {
    /// Traces of `M(s_k)` are taken for `0 <= k <= level_max`.
    pub level_max: usize,
    /// Energies are sampled on `sigma_p ∩ sigma_{p+1}` with `p = proxy_level`.
    pub proxy_level: usize,
    pub samples_per_band: usize,
}

impl TraceScanConfig {
    pub fn new(level_max: usize) -> Self {
        TraceScanConfig {
            level_max,
            proxy_level: level_max,
            samples_per_band: 3,
        }
    }
}

/// Empirical supremum of `|tr M(s_k)|` over energies near the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBoundReport {
    pub level_max: usize,
    pub proxy_level: usize,
    pub lambda: f64,
    pub sample_energies: Vec<f64>,
    /// `per_level_sup[k]` is the sup of `|tr M(s_k)|` over the samples.
    pub per_level_sup: Vec<f64>,
    pub overall_sup: f64,
}

impl TraceBoundReport {
    /// Sup over the levels `from..=to`.
    pub fn sup_over(&self, from: usize, to: usize) -> f64 {
        self.per_level_sup[from..=to]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

pub fn trace_bound_scan(
    cf: &ContinuedFraction,
    lambda: f64,
    config: TraceScanConfig,
) -> Result<TraceBoundReport> {
    if lambda == 0.0 {
        return Err(Error::InvalidCoupling);
    }
    let proxy = proxy_spectrum(cf, lambda, config.proxy_level)?;
    let sample_energies = proxy.sample_points(config.samples_per_band.max(1));
    let traces: Vec<Vec<f64>> = sample_energies
        .par_iter()
        .map(|&e| {
            sturmian_transfers(cf, lambda, e, config.level_max)
                .map(|ms| ms[1..].iter().map(|m| m.trace().abs()).collect())
        })
        .collect::<Result<_>>()?;
    let mut per_level_sup = vec![0.0f64; config.level_max + 1];
    for row in &traces {
        for (k, t) in row.iter().enumerate() {
            per_level_sup[k] = per_level_sup[k].max(*t);
        }
    }
    let overall_sup = per_level_sup.iter().copied().fold(0.0, f64::max);
    Ok(TraceBoundReport {
        level_max: config.level_max,
        proxy_level: config.proxy_level,
        lambda,
        sample_energies,
        per_level_sup,
        overall_sup,
    })
}

/// Lyapunov estimates on and off the proxy spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroLyapunovReport {
    pub level: usize,
    pub steps: u64,
    pub lambda: f64,
    /// Midpoints of `sigma_level ∩ sigma_{level+1}`.
    pub in_spectrum: Vec<LyapunovEstimate>,
    /// Midpoints of the gaps of `sigma_level ∪ sigma_{level+1}`.
    pub gap_controls: Vec<LyapunovEstimate>,
    pub max_in_spectrum: f64,
    pub min_gap: f64,
}

/// Runs Lyapunov estimates for the Sturmian potential `v_0` with `beta = alpha`
/// at the proxy band midpoints and at gap midpoints of the approximants.
pub fn zero_lyapunov_check(
    cf: &ContinuedFraction,
    lambda: f64,
    level: usize,
    steps: u64,
) -> Result<ZeroLyapunovReport> {
    let spectra = approximant_spectra(cf, lambda, &[level, level + 1])?;
    let (a, b) = (spectra[0].as_set(), spectra[1].as_set());
    let proxy = a.intersection(&b);
    let gap_energies: Vec<f64> = a
        .union(&b)
        .gaps()
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect();

    let params = CircleParams::sturmian(cf, lambda, steps)?;
    let n = steps as i64;
    let window = circle_potential_window(
        &params,
        &num_rational::BigRational::from_integer(0.into()),
        -n,
        n,
    )?;
    let run = |energies: &[f64]| -> Result<Vec<LyapunovEstimate>> {
        energies
            .par_iter()
            .map(|&e| lyapunov_estimate(&window, e, steps))
            .collect()
    };
    let in_spectrum = run(&proxy.midpoints())?;
    let gap_controls = run(&gap_energies)?;
    let max_in_spectrum = in_spectrum
        .iter()
        .map(|l| l.gamma_plus)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_gap = gap_controls
        .iter()
        .map(|l| l.gamma_plus)
        .fold(f64::INFINITY, f64::min);
    Ok(ZeroLyapunovReport {
        level,
        steps,
        lambda,
        in_spectrum,
        gap_controls,
        max_in_spectrum,
        min_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturmian::golden_mean;

    #[test]
    fn single_letter_band() {
        let s = band_spectrum(&Word::binary("1").unwrap(), 1.0).unwrap();
        assert_eq!(s.band_count(), 1);
        assert!((s.bands[0].0 + 1.0).abs() < 1e-10);
        assert!((s.bands[0].1 - 3.0).abs() < 1e-10);
        let free = band_spectrum(&Word::binary("0").unwrap(), 5.0).unwrap();
        assert!((free.bands[0].0 + 2.0).abs() < 1e-12 && (free.bands[0].1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_letter_bands() {
        // tr = E^2 - E - 2
        let s = band_spectrum(&Word::binary("10").unwrap(), 1.0).unwrap();
        let r17 = 17f64.sqrt();
        let expected = [((1.0 - r17) / 2.0, 0.0), (1.0, (1.0 + r17) / 2.0)];
        for (got, want) in s.bands.iter().zip(expected) {
            assert!(
                (got.0 - want.0).abs() < 1e-10 && (got.1 - want.1).abs() < 1e-10,
                "{got:?}"
            );
        }
        assert!((s.measure() - (r17 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn interval_algebra() {
        let a = IntervalSet::from_intervals(vec![(0.0, 2.0), (3.0, 5.0), (1.0, 2.5)]);
        assert_eq!(a.intervals(), &[(0.0, 2.5), (3.0, 5.0)]);
        let b = IntervalSet::from_intervals(vec![(2.0, 3.5), (4.0, 6.0)]);
        let c = a.intersection(&b);
        assert_eq!(c.intervals(), &[(2.0, 2.5), (3.0, 3.5), (4.0, 5.0)]);
        assert!((c.measure() - 2.0).abs() < 1e-15);
        assert_eq!(a.intersection(&a), a);
        assert_eq!(a.gaps(), vec![(2.5, 3.0)]);
        assert_eq!(a.union(&b).intervals(), &[(0.0, 6.0)]);
    }

    #[test]
    fn first_two_levels_intersect() {
        let one = band_spectrum(&Word::binary("1").unwrap(), 1.0).unwrap();
        let two = band_spectrum(&Word::binary("10").unwrap(), 1.0).unwrap();
        let report = measure_and_intersect(&one, &two);
        assert!(report.measure_intersection < report.measure_a.min(report.measure_b));
        // [-1, 0] ∪ [1, (1 + √17)/2]
        let expected = 1.0 + (1.0 + 17f64.sqrt()) / 2.0 - 1.0;
        assert!((report.measure_intersection - expected).abs() < 1e-9);
    }

    #[test]
    fn zero_coupling_is_rejected() {
        assert_eq!(
            trace_bound_scan(&golden_mean(12), 0.0, TraceScanConfig::new(5)),
            Err(Error::InvalidCoupling)
        );
    }

    #[test]
    fn level_zero_traces_are_energies() {
        let report = trace_bound_scan(&golden_mean(12), 1.0, TraceScanConfig::new(5)).unwrap();
        assert!(report.per_level_sup[0] <= 3.0);
        assert!(report.overall_sup >= report.sup_over(0, 5) - 1e-15);
    }
}
