//! Direct maximization of the number of correctly ranked sentences.
//!
//! The count C(θ) awards one point when the correct parse is the unique
//! score maximum of its sentence and 1/l when it ties with l−1 others, so C
//! is piecewise constant with jumps where score ties occur; gradients are
//! useless. The search is a simplex (Nelder-Mead style) walk with thermal
//! noise: vertex comparisons see values perturbed by +T·Exp(1) draws and
//! trial points get a matching bonus, so at high temperature the simplex
//! random-walks across plateaus and as T cools it settles into downhill
//! behavior. After each temperature level the simplex is rebuilt around the
//! best point seen so far.
//!
//! Ranking by C alone leaves huge flat regions. Fitness therefore adds a
//! tiny pseudo-likelihood bonus, `1e-6 · exp(log PL / n)`: strictly smaller
//! than any possible change in C for parse sets up to several hundred
//! candidates, so it only breaks ties between equal-C points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::loglinear::{self, ParameterVector};

/// Relative slack used to decide score ties when counting correct parses.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

const TIEBREAK_WEIGHT: f64 = 1e-6;

/// Number of sentences whose correct parse is ranked on top, counting a
/// correct parse that ties with l−1 candidates as 1/l.
///
/// Scores within `DEFAULT_TIE_TOLERANCE · max(1, |best score|)` of the
/// sentence best count as tied.
pub fn correct_count(theta: &ParameterVector, corpus: &Corpus) -> f64 {
    correct_count_at(theta.values(), corpus, DEFAULT_TIE_TOLERANCE)
}

/// [`correct_count`] with an explicit tie tolerance.
pub fn correct_count_with_tolerance(
    theta: &ParameterVector,
    corpus: &Corpus,
    tie_tolerance: f64,
) -> f64 {
    correct_count_at(theta.values(), corpus, tie_tolerance)
}

pub(crate) fn correct_count_at(theta: &[f64], corpus: &Corpus, tol: f64) -> f64 {
    corpus
        .sentences()
        .iter()
        .map(|sentence| {
            let mut smax = f64::NEG_INFINITY;
            for parse in sentence.parses() {
                smax = smax.max(loglinear::score_at(theta, parse));
            }
            let slack = tol * smax.abs().max(1.0);
            let mut ties = 0usize;
            let mut correct_among = false;
            for (k, parse) in sentence.parses().iter().enumerate() {
                if smax - loglinear::score_at(theta, parse) <= slack {
                    ties += 1;
                    if k == sentence.correct_index() {
                        correct_among = true;
                    }
                }
            }
            if correct_among {
                1.0 / ties as f64
            } else {
                0.0
            }
        })
        .sum()
}

/// Annealing schedule and search-space bounds.
#[derive(Debug, Clone, Serialize)]
pub struct AnnealConfig {
    pub initial_temperature: f64,
    /// Multiplied into the temperature after each level; in (0, 1).
    pub cooling_factor: f64,
    /// Simplex moves per temperature level; `None` means 100 per parameter.
    pub moves_per_temperature: Option<usize>,
    /// The schedule stops once the temperature falls below this.
    pub min_temperature: f64,
    pub seed: u64,
    /// Edge length of the fresh simplex built around the incumbent at each
    /// level.
    pub simplex_scale: f64,
    /// Parameters are confined to [-parameter_box, parameter_box].
    pub parameter_box: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling_factor: 0.95,
            moves_per_temperature: None,
            min_temperature: 1e-3,
            seed: 0,
            simplex_scale: 1.0,
            parameter_box: 100.0,
        }
    }
}

impl AnnealConfig {
    fn validate(&self) -> Result<()> {
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(Error::config(format!(
                "initial_temperature must be positive, got {}",
                self.initial_temperature
            )));
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return Err(Error::config(format!(
                "cooling_factor must be in (0, 1), got {}",
                self.cooling_factor
            )));
        }
        if !(self.min_temperature > 0.0 && self.min_temperature <= self.initial_temperature) {
            return Err(Error::config(format!(
                "min_temperature must be in (0, initial_temperature], got {}",
                self.min_temperature
            )));
        }
        if self.moves_per_temperature == Some(0) {
            return Err(Error::config("moves_per_temperature must be at least 1"));
        }
        if !(self.simplex_scale > 0.0 && self.simplex_scale.is_finite()) {
            return Err(Error::config(format!(
                "simplex_scale must be positive, got {}",
                self.simplex_scale
            )));
        }
        if !(self.parameter_box > 0.0 && self.parameter_box.is_finite()) {
            return Err(Error::config(format!(
                "parameter_box must be positive, got {}",
                self.parameter_box
            )));
        }
        Ok(())
    }
}

/// Why the annealer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnnealTermination {
    /// The schedule cooled past `min_temperature`.
    MinTemperature,
    /// Every sentence was ranked correctly; nothing left to gain.
    PerfectScore,
}

/// Summary of one temperature level.
#[derive(Debug, Clone, Serialize)]
pub struct TemperatureStep {
    pub temperature: f64,
    /// Best correct count seen so far (non-decreasing across steps).
    pub best_correct: f64,
    /// Fraction of moves at this level that replaced a simplex vertex.
    pub acceptance_rate: f64,
}

/// Log of a [`maximize_correct`] run.
#[derive(Debug, Clone, Serialize)]
pub struct AnnealTrace {
    pub steps: Vec<TemperatureStep>,
    /// Temperature of the last level that ran.
    pub final_temperature: f64,
    pub termination: AnnealTermination,
}

/// Evaluator that tracks the best point ever visited (by true fitness, no
/// thermal noise).
struct CorrectObjective<'a> {
    corpus: &'a Corpus,
    n: f64,
    best_theta: Vec<f64>,
    best_y: f64,
    best_c: f64,
}

impl CorrectObjective<'_> {
    /// Fitness to minimize: −C(θ) − tiebreak. Lower is better.
    fn eval(&mut self, theta: &[f64]) -> f64 {
        let c = correct_count_at(theta, self.corpus, DEFAULT_TIE_TOLERANCE);
        let mean_log_pl = loglinear::log_pl_at(theta, self.corpus) / self.n;
        let y = -(c + TIEBREAK_WEIGHT * mean_log_pl.exp());
        if y < self.best_y {
            self.best_y = y;
            self.best_c = c;
            self.best_theta.clear();
            self.best_theta.extend_from_slice(theta);
        }
        y
    }
}

fn thermal(rng: &mut ChaCha8Rng, t: f64) -> f64 {
    t * -(1.0 - rng.gen::<f64>()).ln()
}

/// One reflection/expansion/contraction attempt through the worst vertex.
/// Returns the trial's noise-adjusted value and replaces the worst vertex
/// when the trial looks better.
#[allow(clippy::too_many_arguments)]
fn amotsa(
    simplex: &mut [Vec<f64>],
    ys: &mut [f64],
    psum: &mut [f64],
    ihi: usize,
    yhi_flu: &mut f64,
    fac: f64,
    t: f64,
    rng: &mut ChaCha8Rng,
    obj: &mut CorrectObjective<'_>,
    bound: f64,
    replaced: &mut bool,
) -> f64 {
    let dim = psum.len();
    let fac1 = (1.0 - fac) / dim as f64;
    let fac2 = fac1 - fac;
    let mut ptry: Vec<f64> = (0..dim)
        .map(|j| (psum[j] * fac1 - simplex[ihi][j] * fac2).clamp(-bound, bound))
        .collect();
    let ytry = obj.eval(&ptry);
    let yflu = ytry - thermal(rng, t);
    if yflu < *yhi_flu {
        for j in 0..dim {
            psum[j] += ptry[j] - simplex[ihi][j];
        }
        ys[ihi] = ytry;
        std::mem::swap(&mut simplex[ihi], &mut ptry);
        *yhi_flu = yflu;
        *replaced = true;
    }
    yflu
}

/// One thermally perturbed simplex move. Returns whether a vertex was
/// replaced.
fn anneal_move(
    simplex: &mut [Vec<f64>],
    ys: &mut [f64],
    psum: &mut [f64],
    t: f64,
    rng: &mut ChaCha8Rng,
    obj: &mut CorrectObjective<'_>,
    bound: f64,
) -> bool {
    // Rank vertices under fresh positive noise: plateaus look rugged at
    // high temperature.
    let mut ilo = 0;
    let mut ihi = 0;
    let mut ylo = f64::INFINITY;
    let mut yhi = f64::NEG_INFINITY;
    let mut ynhi = f64::NEG_INFINITY;
    for (i, &y) in ys.iter().enumerate() {
        let p = y + thermal(rng, t);
        if p < ylo {
            ylo = p;
            ilo = i;
        }
        if p > yhi {
            ynhi = yhi;
            yhi = p;
            ihi = i;
        } else if p > ynhi {
            ynhi = p;
        }
    }

    let mut yhi_flu = yhi;
    let mut replaced = false;

    let ytry = amotsa(
        simplex,
        ys,
        psum,
        ihi,
        &mut yhi_flu,
        -1.0,
        t,
        rng,
        obj,
        bound,
        &mut replaced,
    );
    if ytry <= ylo {
        amotsa(
            simplex,
            ys,
            psum,
            ihi,
            &mut yhi_flu,
            2.0,
            t,
            rng,
            obj,
            bound,
            &mut replaced,
        );
    } else if ytry >= ynhi {
        let ysave = yhi_flu;
        let ytry2 = amotsa(
            simplex,
            ys,
            psum,
            ihi,
            &mut yhi_flu,
            0.5,
            t,
            rng,
            obj,
            bound,
            &mut replaced,
        );
        if ytry2 >= ysave {
            // Contract everything toward the best vertex.
            let low = simplex[ilo].clone();
            for i in 0..simplex.len() {
                if i != ilo {
                    for (v, &l) in simplex[i].iter_mut().zip(low.iter()) {
                        *v = 0.5 * (*v + l);
                    }
                    ys[i] = obj.eval(&simplex[i]);
                }
            }
            psum.fill(0.0);
            for vertex in simplex.iter() {
                for (s, &v) in psum.iter_mut().zip(vertex.iter()) {
                    *s += v;
                }
            }
        }
    }
    replaced
}

fn vertex_offset(x: f64, scale: f64, bound: f64) -> f64 {
    let up = x + scale;
    if up <= bound {
        up
    } else {
        (x - scale).max(-bound)
    }
}

/// Maximizes the correct count from `theta0`, confined to the configured
/// box. Returns the best parameters ever visited and the per-level log.
///
/// The same (corpus, theta0, config) always produces the same result; all
/// randomness comes from the seeded generator.
pub fn maximize_correct(
    corpus: &Corpus,
    theta0: &ParameterVector,
    config: &AnnealConfig,
) -> Result<(ParameterVector, AnnealTrace)> {
    config.validate()?;
    let dim = corpus.catalog().len();
    if theta0.len() != dim {
        return Err(Error::CatalogMismatch {
            expected: dim,
            got: theta0.len(),
        });
    }
    if let Some(v) = theta0
        .values()
        .iter()
        .find(|v| v.abs() > config.parameter_box)
    {
        return Err(Error::config(format!(
            "start value {v} lies outside the parameter box ±{}",
            config.parameter_box
        )));
    }

    let n = corpus.len() as f64;
    let mut obj = CorrectObjective {
        corpus,
        n,
        best_theta: theta0.values().to_vec(),
        best_y: f64::INFINITY,
        best_c: 0.0,
    };
    obj.eval(theta0.values());
    let perfect = |c: f64| c >= n - 1e-9;

    let mut steps = Vec::new();
    let mut termination = AnnealTermination::MinTemperature;
    let mut t = config.initial_temperature;

    if dim == 0 || perfect(obj.best_c) {
        if perfect(obj.best_c) {
            termination = AnnealTermination::PerfectScore;
        }
        return Ok((
            ParameterVector::new(obj.best_theta.clone())?,
            AnnealTrace {
                steps,
                final_temperature: t,
                termination,
            },
        ));
    }

    let moves = config.moves_per_temperature.unwrap_or(100 * dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Temperature of the last level that actually ran.
    let mut last_t;
    loop {
        last_t = t;

        // Fresh simplex around the incumbent best.
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(obj.best_theta.clone());
        for j in 0..dim {
            let mut vertex = obj.best_theta.clone();
            vertex[j] = vertex_offset(vertex[j], config.simplex_scale, config.parameter_box);
            simplex.push(vertex);
        }
        let mut ys = Vec::with_capacity(simplex.len());
        for vertex in &simplex {
            ys.push(obj.eval(vertex));
        }
        let mut psum = vec![0.0; dim];
        for vertex in &simplex {
            for (s, &v) in psum.iter_mut().zip(vertex.iter()) {
                *s += v;
            }
        }

        let mut accepted = 0usize;
        let mut done = 0usize;
        for _ in 0..moves {
            done += 1;
            if anneal_move(
                &mut simplex,
                &mut ys,
                &mut psum,
                t,
                &mut rng,
                &mut obj,
                config.parameter_box,
            ) {
                accepted += 1;
            }
            if perfect(obj.best_c) {
                break;
            }
        }
        steps.push(TemperatureStep {
            temperature: t,
            best_correct: obj.best_c,
            acceptance_rate: accepted as f64 / done as f64,
        });
        if perfect(obj.best_c) {
            termination = AnnealTermination::PerfectScore;
            break;
        }
        t *= config.cooling_factor;
        if t < config.min_temperature {
            break;
        }
    }

    Ok((
        ParameterVector::new(obj.best_theta.clone())?,
        AnnealTrace {
            steps,
            final_temperature: last_t,
            termination,
        },
    ))
}
