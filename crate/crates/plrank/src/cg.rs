//! Conjugate-gradient ascent with a derivative-free line search, and the
//! pseudo-likelihood trainer built on top of it.
//!
//! The direction update is Polak-Ribière with the usual non-negativity
//! clamp, restarting to steepest ascent periodically and whenever the
//! current direction stops being an ascent direction. Steps along a
//! direction are chosen by bracketing a maximum (golden-ratio expansion)
//! and refining it with Brent's method on function values only.

use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::loglinear::{self, ObjectiveReport, ParameterVector};

/// Something the optimizer can maximize: a smooth function with a gradient.
///
/// `value` exists so line searches can skip gradient work; both methods must
/// describe the same function.
pub trait Objective {
    fn value(&mut self, theta: &[f64]) -> f64;
    fn value_and_gradient(&mut self, theta: &[f64]) -> ObjectiveReport;
}

/// Adapter for using a closure as an [`Objective`]. The closure runs in
/// full (gradient included) even for value-only probes, which is fine for
/// cheap functions and tests.
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[f64]) -> ObjectiveReport> Objective for FnObjective<F> {
    fn value(&mut self, theta: &[f64]) -> f64 {
        (self.0)(theta).value
    }

    fn value_and_gradient(&mut self, theta: &[f64]) -> ObjectiveReport {
        (self.0)(theta)
    }
}

/// Tuning knobs for [`maximize`].
#[derive(Debug, Clone, Serialize)]
pub struct CgConfig {
    /// Hard cap on ascent iterations (line searches).
    pub max_iterations: usize,
    /// Relative objective-change tolerance: stop when
    /// 2|Δf| ≤ tol·(|f| + |f'| + tiny).
    pub objective_rel_tol: f64,
    /// Stop when the Euclidean gradient norm drops to this value.
    pub gradient_norm_tol: f64,
    /// Relative tolerance of the one-dimensional Brent refinement.
    pub line_search_tol: f64,
    /// Iterations between forced steepest-ascent restarts; `None` restarts
    /// every `dim` iterations.
    pub restart_period: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            objective_rel_tol: 1e-8,
            gradient_norm_tol: 1e-6,
            line_search_tol: 1e-4,
            restart_period: None,
        }
    }
}

impl CgConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        for (name, v) in [
            ("objective_rel_tol", self.objective_rel_tol),
            ("gradient_norm_tol", self.gradient_norm_tol),
            ("line_search_tol", self.line_search_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.restart_period == Some(0) {
            return Err(Error::config("restart_period must be at least 1"));
        }
        Ok(())
    }
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CgTermination {
    /// Gradient norm at or below `gradient_norm_tol`.
    GradientConverged,
    /// Relative objective change at or below `objective_rel_tol`.
    ObjectiveConverged,
    /// `max_iterations` line searches performed.
    MaxIterations,
    /// No improving step exists along the gradient at line-search
    /// resolution.
    Stalled,
}

/// One row of the iteration log.
#[derive(Debug, Clone, Serialize)]
pub struct CgIteration {
    pub objective: f64,
    pub gradient_norm: f64,
    /// Step length taken along the search direction (0 for the initial
    /// point).
    pub step_size: f64,
}

/// Iteration log of a [`maximize`] run. Objective values never decrease.
#[derive(Debug, Clone, Serialize)]
pub struct CgTrace {
    pub iterations: Vec<CgIteration>,
    pub termination: CgTermination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_report(report: &ObjectiveReport, dim: usize, theta: &[f64]) -> Result<()> {
    if report.gradient.len() != dim {
        return Err(Error::data(format!(
            "objective returned a gradient of length {} for {dim} parameters",
            report.gradient.len()
        )));
    }
    if !report.value.is_finite() {
        return Err(Error::NonFinite {
            message: format!("objective value {} at θ = {theta:?}", report.value),
        });
    }
    if let Some(j) = report.gradient.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            message: format!(
                "gradient component {j} is {} at θ = {theta:?}",
                report.gradient[j]
            ),
        });
    }
    Ok(())
}

/// Maximizes a smooth function from `theta0`, returning the best point and
/// the iteration log.
pub fn maximize<O: Objective + ?Sized>(
    obj: &mut O,
    theta0: &[f64],
    config: &CgConfig,
) -> Result<(Vec<f64>, CgTrace)> {
    config.validate()?;
    if let Some(v) = theta0.iter().find(|v| !v.is_finite()) {
        return Err(Error::data(format!("non-finite start value {v}")));
    }
    let dim = theta0.len();
    let restart_period = config.restart_period.unwrap_or(dim.max(1));

    let mut theta = theta0.to_vec();
    let report = obj.value_and_gradient(&theta);
    check_report(&report, dim, &theta)?;
    let mut value = report.value;
    let mut grad = report.gradient;

    let mut iterations = vec![CgIteration {
        objective: value,
        gradient_norm: norm(&grad),
        step_size: 0.0,
    }];
    let mut termination = CgTermination::MaxIterations;
    let mut direction = grad.clone();
    let mut since_restart = 0usize;
    let mut prev_step = 1.0f64;

    // Relative-change floor, so near-zero objective values still converge.
    const TINY: f64 = 1e-25;

    for _ in 0..config.max_iterations {
        if norm(&grad) <= config.gradient_norm_tol {
            termination = CgTermination::GradientConverged;
            break;
        }
        if since_restart >= restart_period || dot(&direction, &grad) <= 0.0 {
            direction.copy_from_slice(&grad);
            since_restart = 0;
        }

        let mut found = line_search_max(
            obj,
            &theta,
            &direction,
            value,
            prev_step,
            config.line_search_tol,
        )?;
        if found.is_none() && since_restart > 0 {
            // The conjugate direction is exhausted; see whether steepest
            // ascent still moves.
            direction.copy_from_slice(&grad);
            since_restart = 0;
            found = line_search_max(
                obj,
                &theta,
                &direction,
                value,
                prev_step,
                config.line_search_tol,
            )?;
        }
        let Some(step) = found else {
            termination = CgTermination::Stalled;
            break;
        };

        for (t, d) in theta.iter_mut().zip(&direction) {
            *t += step * d;
        }
        let report = obj.value_and_gradient(&theta);
        check_report(&report, dim, &theta)?;
        let new_value = report.value;
        let new_grad = report.gradient;

        iterations.push(CgIteration {
            objective: new_value,
            gradient_norm: norm(&new_grad),
            step_size: step,
        });

        // Polak-Ribière direction update, clamped at 0 (which is a restart).
        let gg = dot(&grad, &grad);
        let beta = if gg > 0.0 {
            let num: f64 = new_grad
                .iter()
                .zip(&grad)
                .map(|(gn, go)| gn * (gn - go))
                .sum();
            (num / gg).max(0.0)
        } else {
            0.0
        };
        for (d, gn) in direction.iter_mut().zip(&new_grad) {
            *d = gn + beta * *d;
        }
        since_restart += 1;
        prev_step = step;

        let converged = 2.0 * (new_value - value).abs()
            <= config.objective_rel_tol * (new_value.abs() + value.abs() + TINY);
        value = new_value;
        grad = new_grad;
        if converged {
            termination = CgTermination::ObjectiveConverged;
            break;
        }
    }

    Ok((
        theta,
        CgTrace {
            iterations,
            termination,
        },
    ))
}

/// Finds a step α > 0 with f(θ + α·d) > f0, or `None` when no improving
/// step exists at the search's resolution. Expects d to be an ascent
/// direction.
fn line_search_max<O: Objective + ?Sized>(
    obj: &mut O,
    theta: &[f64],
    direction: &[f64],
    f0: f64,
    init_step: f64,
    tol: f64,
) -> Result<Option<f64>> {
    const GOLD: f64 = 1.618033988749895;
    let mut point = vec![0.0; theta.len()];

    let mut probe = |alpha: f64| -> Result<f64> {
        for ((p, &t), &d) in point.iter_mut().zip(theta).zip(direction) {
            *p = t + alpha * d;
        }
        let v = obj.value(&point);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                message: format!("objective value {v} at θ = {point:?}"),
            });
        }
        Ok(v)
    };

    // Shrink until the trial step is not worse than the start; the ascent
    // direction guarantees one exists unless improvement is below fp
    // resolution.
    let mut b = init_step.max(f64::MIN_POSITIVE);
    let mut fb = probe(b)?;
    let mut shrinks = 0;
    while fb < f0 {
        shrinks += 1;
        if shrinks > 60 {
            return Ok(None);
        }
        b *= 0.25;
        fb = probe(b)?;
    }

    // Expand until the value stops growing: (a, b, c) then brackets a
    // maximum.
    let mut a = 0.0;
    let mut b_state = (b, fb);
    let mut c = b * (1.0 + GOLD);
    let mut fc = probe(c)?;
    let mut expansions = 0;
    while fc > b_state.1 {
        expansions += 1;
        if expansions > 60 || !c.is_finite() {
            return Err(Error::LineSearch {
                message: format!(
                    "no bracket after {expansions} expansions (step reached {c:.3e}); the objective may be unbounded above"
                ),
            });
        }
        a = b_state.0;
        b_state = (c, fc);
        c = b_state.0 + GOLD * (b_state.0 - a);
        fc = probe(c)?;
    }
    let (b, fb) = b_state;

    let (alpha, neg) = brent_min(|x| probe(x).map(|v| -v), a, b, c, -fb, tol)?;
    let f_alpha = -neg;
    if f_alpha > f0 {
        Ok(Some(alpha))
    } else if fb > f0 {
        Ok(Some(b))
    } else {
        Ok(None)
    }
}

/// Brent's method for a one-dimensional minimum inside the bracket
/// (ax, bx, cx), where h(bx) is below both ends. Returns (x, h(x)).
fn brent_min(
    mut h: impl FnMut(f64) -> Result<f64>,
    ax: f64,
    bx: f64,
    cx: f64,
    h_bx: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    const ZEPS: f64 = 1e-11;
    let (mut a, mut b) = if ax < cx { (ax, cx) } else { (cx, ax) };
    let (mut x, mut w, mut v) = (bx, bx, bx);
    let (mut fx, mut fw, mut fv) = (h_bx, h_bx, h_bx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for _ in 0..100 {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + ZEPS;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = h(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}

/// Trains the penalized pseudo-likelihood from θ = 0.
///
/// Regularization scales come from [`loglinear::compute_sigmas`] with the
/// given multiplier; features without a positive scale are frozen at 0 and
/// excluded from the search space.
pub fn train_pl(
    corpus: &Corpus,
    config: &CgConfig,
    sigma_multiplier: f64,
) -> Result<(ParameterVector, CgTrace)> {
    let reg = loglinear::compute_sigmas(corpus, sigma_multiplier)?;
    let m = corpus.catalog().len();
    let active: Vec<usize> = (0..m).filter(|&j| reg.is_active(j)).collect();

    struct Reduced<'a> {
        corpus: &'a Corpus,
        reg: &'a loglinear::RegularizerSpec,
        active: &'a [usize],
        full: Vec<f64>,
    }

    impl Reduced<'_> {
        fn scatter(&mut self, reduced: &[f64]) {
            for (&j, &v) in self.active.iter().zip(reduced) {
                self.full[j] = v;
            }
        }
    }

    impl Objective for Reduced<'_> {
        fn value(&mut self, reduced: &[f64]) -> f64 {
            self.scatter(reduced);
            loglinear::regularized_value_at(&self.full, self.corpus, self.reg)
        }

        fn value_and_gradient(&mut self, reduced: &[f64]) -> ObjectiveReport {
            self.scatter(reduced);
            let rep = loglinear::regularized_at(&self.full, self.corpus, self.reg);
            ObjectiveReport {
                value: rep.value,
                gradient: self.active.iter().map(|&j| rep.gradient[j]).collect(),
            }
        }
    }

    let mut obj = Reduced {
        corpus,
        reg: &reg,
        active: &active,
        full: vec![0.0; m],
    };
    let start = vec![0.0; active.len()];
    let (reduced, trace) = maximize(&mut obj, &start, config)?;

    let mut full = vec![0.0; m];
    for (&j, &v) in active.iter().zip(&reduced) {
        full[j] = v;
    }
    Ok((ParameterVector::new(full)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{FeatureCatalog, FeatureVector, Sentence};
    use crate::loglinear::log_pseudo_likelihood;

    fn quadratic() -> FnObjective<impl FnMut(&[f64]) -> ObjectiveReport> {
        FnObjective(|t: &[f64]| ObjectiveReport {
            value: -(t[0] - 1.0).powi(2) - (t[1] + 2.0).powi(2),
            gradient: vec![-2.0 * (t[0] - 1.0), -2.0 * (t[1] + 2.0)],
        })
    }

    #[test]
    fn quadratic_reaches_the_maximum() {
        let (theta, trace) = maximize(&mut quadratic(), &[0.0, 0.0], &CgConfig::default()).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-6, "{theta:?}");
        assert!((theta[1] + 2.0).abs() < 1e-6, "{theta:?}");
        assert!(matches!(
            trace.termination,
            CgTermination::GradientConverged | CgTermination::ObjectiveConverged
        ));
    }

    #[test]
    fn trace_objective_never_decreases() {
        let (_, trace) = maximize(&mut quadratic(), &[5.0, 5.0], &CgConfig::default()).unwrap();
        assert!(trace.iterations.len() >= 2);
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].objective >= pair[0].objective);
        }
        assert_eq!(trace.iterations[0].step_size, 0.0);
        assert!(trace.iterations[1].step_size > 0.0);
    }

    #[test]
    fn converges_immediately_at_the_optimum() {
        let (theta, trace) =
            maximize(&mut quadratic(), &[1.0, -2.0], &CgConfig::default()).unwrap();
        assert_eq!(theta, vec![1.0, -2.0]);
        assert_eq!(trace.termination, CgTermination::GradientConverged);
        assert_eq!(trace.iterations.len(), 1);
    }

    #[test]
    fn zero_dimensional_problems_are_trivial() {
        let mut obj = FnObjective(|_: &[f64]| ObjectiveReport {
            value: 3.0,
            gradient: vec![],
        });
        let (theta, trace) = maximize(&mut obj, &[], &CgConfig::default()).unwrap();
        assert!(theta.is_empty());
        assert_eq!(trace.termination, CgTermination::GradientConverged);
    }

    #[test]
    fn non_finite_objective_is_a_numerical_error() {
        let mut obj = FnObjective(|_: &[f64]| ObjectiveReport {
            value: f64::NAN,
            gradient: vec![0.0],
        });
        let err = maximize(&mut obj, &[0.0], &CgConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);

        let mut obj = FnObjective(|t: &[f64]| ObjectiveReport {
            value: t[0],
            gradient: vec![f64::INFINITY],
        });
        let err = maximize(&mut obj, &[0.0], &CgConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unbounded_objective_fails_the_line_search() {
        let mut obj = FnObjective(|t: &[f64]| ObjectiveReport {
            value: t[0],
            gradient: vec![1.0],
        });
        let err = maximize(&mut obj, &[0.0], &CgConfig::default()).unwrap_err();
        assert!(matches!(err, Error::LineSearch { .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn config_is_validated() {
        let config = CgConfig {
            max_iterations: 0,
            ..CgConfig::default()
        };
        assert!(maximize(&mut quadratic(), &[0.0, 0.0], &config).is_err());

        let config = CgConfig {
            gradient_norm_tol: -1.0,
            ..CgConfig::default()
        };
        assert!(maximize(&mut quadratic(), &[0.0, 0.0], &config).is_err());

        let config = CgConfig {
            restart_period: Some(0),
            ..CgConfig::default()
        };
        assert!(maximize(&mut quadratic(), &[0.0, 0.0], &config).is_err());

        assert!(maximize(&mut quadratic(), &[f64::NAN, 0.0], &CgConfig::default()).is_err());
    }

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(values)
    }

    fn sentence(id: &str, parses: &[&[f64]], correct: usize) -> Sentence {
        Sentence::new(id, parses.iter().map(|p| fv(p)).collect(), correct).unwrap()
    }

    /// Feature 0 separates correct from incorrect parses; feature 1 never
    /// appears and stays frozen.
    fn separable_corpus(n: usize) -> Corpus {
        let catalog = FeatureCatalog::new(["good", "unused"]).unwrap();
        let sentences = (0..n)
            .map(|i| sentence(&format!("s{i:02}"), &[&[1.0, 0.0], &[0.0, 0.0]], 0))
            .collect();
        Corpus::new(catalog, sentences).unwrap()
    }

    #[test]
    fn train_pl_learns_a_separating_weight() {
        let corpus = separable_corpus(6);
        let (theta, trace) = train_pl(&corpus, &CgConfig::default(), 7.0).unwrap();
        assert!(theta.get(0) > 0.0, "{:?}", theta.values());
        assert_eq!(theta.get(1), 0.0);
        assert!(matches!(
            trace.termination,
            CgTermination::GradientConverged | CgTermination::ObjectiveConverged
        ));
        let zero = ParameterVector::zeros(2);
        assert!(log_pseudo_likelihood(&theta, &corpus) > log_pseudo_likelihood(&zero, &corpus));
    }

    #[test]
    fn train_pl_on_unambiguous_corpus_stays_at_zero() {
        let catalog = FeatureCatalog::new(["f0"]).unwrap();
        let sentences = vec![sentence("a", &[&[2.0]], 0), sentence("b", &[&[1.0]], 0)];
        let corpus = Corpus::new(catalog, sentences).unwrap();
        let (theta, trace) = train_pl(&corpus, &CgConfig::default(), 7.0).unwrap();
        assert_eq!(theta.values(), &[0.0]);
        assert_eq!(trace.termination, CgTermination::GradientConverged);
    }

    #[test]
    fn train_pl_is_deterministic() {
        let corpus = separable_corpus(5);
        let (a, _) = train_pl(&corpus, &CgConfig::default(), 7.0).unwrap();
        let (b, _) = train_pl(&corpus, &CgConfig::default(), 7.0).unwrap();
        assert_eq!(a, b);
    }
}
