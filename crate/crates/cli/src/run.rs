use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use quasispec::circlemap::{
    boundary_limit_window, circle_potential_window, discontinuity_indices, hull_factor_comparison,
    Boundary, CircleParams, PotentialWindow,
};
use quasispec::operator::{lyapunov_estimate, lyapunov_estimate_with};
use quasispec::spectrum::{approximant_spectra, proxy_spectrum, trace_bound_scan, TraceScanConfig};
use quasispec::stability::{
    cube_window, gordon_membership, nondecay_verify, unit_seeds, DerivedConstant,
};
use quasispec::sturmian::{c_alpha_prefix, standard_words, ContinuedFraction};
use quasispec::symbolic::fixed_point_prefix;
use quasispec::{Error, Result};

use crate::config::{
    parse_energies, parse_levels, parse_potential, parse_rational, EnergySpec, ExperimentConfig,
    ModelConfig, ModelKind, PotentialKind, TaskConfig,
};
use crate::report::*;

fn circle_params(
    model: &ModelConfig,
    cf: &ContinuedFraction,
    max_index: u64,
) -> Result<CircleParams> {
    match model.beta()? {
        None => CircleParams::sturmian_with_precision(cf, model.lambda, max_index, model.precision),
        Some(beta) => CircleParams::from_cf(cf, beta, model.lambda, max_index, model.precision),
    }
}

fn energies(spec: &EnergySpec, cf: Option<&ContinuedFraction>, lambda: f64) -> Result<Vec<f64>> {
    if let Some(points) = spec.grid_points() {
        return Ok(points);
    }
    let EnergySpec::FromSpectrum(level) = spec else {
        unreachable!("grid and list specs have points")
    };
    let cf = cf.ok_or_else(|| Error::InvalidParameter {
        module: "cli",
        name: "energies",
        reason: "from-spectrum needs a rotation number".into(),
    })?;
    Ok(proxy_spectrum(cf, lambda, *level)?.midpoints())
}

/// Runs one experiment. Results do not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let started = Instant::now();
    let mut report = dispatch(config)?;
    if config.timings {
        report.config_mut().wall_time_seconds = Some(started.elapsed().as_secs_f64());
    }
    Ok(report)
}

fn dispatch(config: &ExperimentConfig) -> Result<Report> {
    let echo = ConfigEcho::new(config);
    let model = &config.model;
    let lambda = model.lambda;
    match &config.task {
        TaskConfig::Word { length, tower } => {
            let (word, tower) = match model.resolve()? {
                ModelKind::Rotation(cf) => {
                    let word = c_alpha_prefix(&cf, *length)?.to_string();
                    let tower = tower
                        .map(|n| {
                            standard_words(&cf, n).map(|t| {
                                t.words().iter().map(|w| w.to_string()).collect::<Vec<_>>()
                            })
                        })
                        .transpose()?;
                    (word, tower)
                }
                ModelKind::Substitution { rule, .. } => {
                    if tower.is_some() {
                        return Err(Error::InvalidParameter {
                            module: "cli",
                            name: "tower",
                            reason: "standard-word towers need a rotation number".into(),
                        });
                    }
                    (fixed_point_prefix(&rule, 0, *length)?.to_string(), None)
                }
            };
            Ok(Report::Word(WordReport {
                config: echo,
                word,
                tower,
            }))
        }
        TaskConfig::Spectrum { levels } => {
            let cf = model.rotation()?;
            let levels = parse_levels(levels)?;
            let mut wanted: Vec<usize> = levels
                .iter()
                .flat_map(|&l| [l.saturating_sub(1), l])
                .collect();
            wanted.sort_unstable();
            wanted.dedup();
            let spectra = approximant_spectra(&cf, lambda, &wanted)?;
            let find = |l: usize| &spectra[wanted.binary_search(&l).expect("computed")];
            let mut rows = Vec::new();
            let mut bands = Vec::new();
            for &l in &levels {
                let s = find(l);
                let prev =
                    (l > 0).then(|| s.as_set().intersection(&find(l - 1).as_set()).measure());
                rows.push(SpectrumRow {
                    level: l,
                    q: cf.q(l).to_u64().expect("bounded level"),
                    band_count: s.band_count(),
                    measure: s.measure(),
                    measure_intersect_prev: prev,
                });
                bands.push(s.bands.clone());
            }
            Ok(Report::Spectrum(SpectrumReport {
                config: echo,
                rows,
                bands,
            }))
        }
        TaskConfig::Lyapunov {
            potential,
            energies: spec,
            steps,
            theta,
        } => {
            let kind = parse_potential(potential)?;
            let spec = parse_energies(spec)?;
            let n = *steps as i64;
            let rotation = match kind {
                PotentialKind::Free => None,
                _ => Some(model.rotation()?),
            };
            let es = energies(&spec, rotation.as_ref(), lambda)?;
            let estimates = match kind {
                PotentialKind::Free => es
                    .par_iter()
                    .map(|&e| lyapunov_estimate_with(|_| 0.0, e, *steps))
                    .collect::<Result<Vec<_>>>()?,
                PotentialKind::Sturmian => {
                    let cf = rotation.as_ref().expect("rotation model");
                    let params = circle_params(model, cf, *steps)?;
                    let theta = parse_rational("theta", theta)?;
                    let window = circle_potential_window(&params, &theta, -n, n)?;
                    es.par_iter()
                        .map(|&e| lyapunov_estimate(&window, e, *steps))
                        .collect::<Result<Vec<_>>>()?
                }
                PotentialKind::Approximant(level) => {
                    let cf = rotation.as_ref().expect("rotation model");
                    let tower = standard_words(cf, level)?;
                    let window = PotentialWindow::periodic(tower.s(level as isize), lambda, -n, n)?;
                    es.par_iter()
                        .map(|&e| lyapunov_estimate(&window, e, *steps))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            let rows = estimates
                .into_iter()
                .map(|l| LyapunovRow {
                    energy: l.energy,
                    gamma_plus: l.gamma_plus,
                    gamma_minus: l.gamma_minus,
                })
                .collect();
            Ok(Report::Lyapunov(LyapunovReport { config: echo, rows }))
        }
        TaskConfig::Gordon {
            levels,
            energies: spec,
            seeds,
            rng_seed,
            trace_level_max,
        } => {
            let cf = model.rotation()?;
            let levels = parse_levels(levels)?;
            let es = energies(&parse_energies(spec)?, Some(&cf), lambda)?;
            let scan = trace_bound_scan(&cf, lambda, TraceScanConfig::new(*trace_level_max))?;
            let derived = DerivedConstant::from_scan(&scan);
            let c = derived.value;
            let seeds = unit_seeds(*seeds, *rng_seed);
            let certificates = levels
                .par_iter()
                .map(|&level| -> Result<LevelCertificate> {
                    let window = cube_window(&cf, lambda, level)?;
                    let n = cf.q_usize(level).expect("window exists");
                    let membership = gordon_membership(&window, n, c, &es)?;
                    let nondecay = membership
                        .trace_samples
                        .par_iter()
                        .filter(|&&(_, t)| t <= c)
                        .map(|&(e, _)| nondecay_verify(&window, n, e, &seeds, c))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(LevelCertificate {
                        level,
                        membership,
                        nondecay,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Report::Gordon(GordonBundle {
                config: echo,
                certificates,
                derived_constant: derived,
            }))
        }
        TaskConfig::HullCheck {
            length,
            grid,
            prefix,
        } => {
            let cf = model.rotation()?;
            let params = circle_params(model, &cf, *prefix as u64)?;
            let hull = hull_factor_comparison(&params, *length, *grid, *prefix)?;
            Ok(Report::HullCheck(HullCheckReport { config: echo, hull }))
        }
        TaskConfig::Appendix {
            range,
            thetas,
            rng_seed,
        } => {
            let cf = model.rotation()?;
            let params = circle_params(model, &cf, *range as u64)?;
            let at_origin = |which| -> Result<f64> {
                Ok(boundary_limit_window(&params, which, 0, 0)?
                    .value(0)
                    .expect("covered"))
            };
            let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
            let mut phases = vec![BigRational::zero(), BigRational::one() - params.beta()];
            for _ in 0..*thetas {
                let q: i64 = rng.gen_range(2..1_000_000);
                phases.push(BigRational::new(
                    BigInt::from(rng.gen_range(0..q)),
                    BigInt::from(q),
                ));
            }
            let discontinuities: Vec<ThetaJumps> = phases
                .par_iter()
                .map(|theta| ThetaJumps {
                    theta: theta.to_string(),
                    indices: discontinuity_indices(&params, theta, *range),
                })
                .collect();
            let max_discontinuities = discontinuities
                .iter()
                .map(|d| d.indices.len())
                .max()
                .unwrap_or(0);
            let mut boundary_agreement = Vec::new();
            for (which, theta) in [
                (Boundary::AtZero, BigRational::zero()),
                (Boundary::AtOneMinusBeta, BigRational::one() - params.beta()),
            ] {
                let jumps = discontinuity_indices(&params, &theta, *range);
                let limit = boundary_limit_window(&params, which, 1, *range)?;
                let v = circle_potential_window(&params, &theta, 1, *range)?;
                let disagreements_off_jumps = (1..=*range)
                    .filter(|n| !jumps.contains(n) && limit.value(*n) != v.value(*n))
                    .count();
                boundary_agreement.push(BoundaryAgreement {
                    boundary: which,
                    jumps,
                    compared: *range as usize,
                    disagreements_off_jumps,
                });
            }
            Ok(Report::Appendix(AppendixReport {
                config: echo,
                omega_zero_at_origin: at_origin(Boundary::AtZero)?,
                omega_one_minus_beta_at_origin: at_origin(Boundary::AtOneMinusBeta)?,
                discontinuities,
                max_discontinuities,
                boundary_agreement,
            }))
        }
    }
}

/// Process exit code for an error: 2 invalid input, 3 numeric or resolution
/// failure, 4 boundary ambiguity.
pub fn exit_code(error: &Error) -> u8 {
    match error {
        Error::BoundaryAmbiguity { .. } => 4,
        Error::Numeric(_)
        | Error::Resolution { .. }
        | Error::DivergenceFailure { .. }
        | Error::NotAFixedPoint { .. } => 3,
        _ => 2,
    }
}
