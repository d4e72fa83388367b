//! Nonlinear least-squares fitting of [`ExpModel`] to an [`EcdfDataset`].
//!
//! Minimizes `Σ (Fₙ(xᵢ) - F(xᵢ))²` with a Nelder–Mead simplex in
//! unconstrained coordinates `(s, t)`:
//!
//! * `σ = σ₀ · exp(s)`, with `σ₀` the initializer's scale, so `σ > 0`;
//! * `θ = x_max · logistic(t)`, so `0 <= θ <= x_max` (two-parameter only).
//!
//! The simplex starts at the transformed initializer (the maximum-likelihood
//! estimates) with the other vertices offset by `+0.05` per coordinate.
//!
//! Function values alone pin the minimum down only to about `sqrt(eps)`, so a
//! converged simplex is finished with a few Gauss–Newton steps on the normal
//! equations. Steps that leave the parameter box are discarded.

use serde::{Deserialize, Serialize};

use crate::dataset::EcdfDataset;
use crate::dist::{ExpModel, ModelKind};
use crate::error::{Error, Result};
use crate::simplex::{self, SimplexOptions};

const SIMPLEX_STEP: f64 = 0.05;
// keeps logit finite when the initializer sits on the box boundary
const EDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub model_kind: ModelKind,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl FitConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 2000;
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(model_kind: ModelKind) -> Self {
        FitConfig {
            model_kind,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            tolerance: Self::DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::domain("max_iterations must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::domain(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ExpModel,
    /// Objective value at `model`.
    pub sse: f64,
    pub iterations: usize,
    /// False only when `max_iterations` was exhausted.
    pub converged: bool,
    /// Starting point handed to the optimizer.
    pub initial: ExpModel,
}

/// Sum of squared differences between the empirical CDF values and the
/// model curve ([`ExpModel::curve`]) at every data point.
pub fn objective(ds: &EcdfDataset, model: &ExpModel) -> f64 {
    ds.points()
        .iter()
        .map(|p| {
            let r = p.f - model.curve(p.x);
            r * r
        })
        .sum()
}

/// Maximum-likelihood starting values: `θ₀ = 0` or `x_min`, and
/// `σ₀ = mean(xᵢ - θ₀)`.
pub fn initial_guess(ds: &EcdfDataset, kind: ModelKind) -> Result<ExpModel> {
    let theta0 = match kind {
        ModelKind::OneParam => 0.0,
        ModelKind::TwoParam => ds.x_min(),
    };
    let sigma0 =
        ds.points().iter().map(|p| p.x - theta0).sum::<f64>() / ds.len() as f64;
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::DegenerateData(format!(
            "initial scale is {sigma0}; incomes in `{}` do not spread above {theta0}",
            ds.name()
        )));
    }
    ExpModel::new(kind, sigma0, theta0)
}

pub fn fit(ds: &EcdfDataset, cfg: &FitConfig) -> Result<FitResult> {
    let start = initial_guess(ds, cfg.model_kind)?;
    fit_from(ds, cfg, &start)
}

/// Like [`fit`] but starting from `start` instead of the ML initializer.
///
/// `start.kind()` must match `cfg.model_kind`.
pub fn fit_from(ds: &EcdfDataset, cfg: &FitConfig, start: &ExpModel) -> Result<FitResult> {
    cfg.validate()?;
    if start.kind() != cfg.model_kind {
        return Err(Error::domain("start model kind differs from the configured kind"));
    }
    let map = Reparam::new(ds, start)?;
    let opts = SimplexOptions {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
        step: SIMPLEX_STEP,
    };
    let out = simplex::minimize(
        |z| match map.model(z) {
            Ok(m) => objective(ds, &m),
            Err(_) => f64::INFINITY,
        },
        &map.start(start),
        &opts,
    );

    let mut model = map.model(&out.point)?;
    if out.converged {
        model = polish(ds, model, map.theta_max);
    }
    let mut sse = objective(ds, &model);
    // the transformed start reproduces `start` only up to rounding
    let start_sse = objective(ds, start);
    if start_sse < sse {
        model = *start;
        sse = start_sse;
    }
    Ok(FitResult {
        model,
        sse,
        iterations: out.iterations,
        converged: out.converged,
        initial: *start,
    })
}

const POLISH_STEPS: usize = 8;

/// Gauss–Newton refinement of a converged estimate.
fn polish(ds: &EcdfDataset, start: ExpModel, theta_max: f64) -> ExpModel {
    let two = start.kind() == ModelKind::TwoParam;
    let mut model = start;
    let mut sse = objective(ds, &model);
    for _ in 0..POLISH_STEPS {
        let (sigma, theta) = (model.sigma(), model.theta());
        // normal equations Jᵀ J δ = Jᵀ r for r = f - curve, in (σ, θ)
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in ds.points() {
            let z = (p.x - theta) / sigma;
            let e = (-z).exp();
            let r = p.f + (-z).exp_m1();
            let d_sigma = z * e / sigma;
            let d_theta = e / sigma;
            a11 += d_sigma * d_sigma;
            a12 += d_sigma * d_theta;
            a22 += d_theta * d_theta;
            b1 += d_sigma * r;
            b2 += d_theta * r;
        }
        // curve decreases in σ and θ, so J = -(d_sigma, d_theta) and the sign flips
        let (step_sigma, step_theta) = if two {
            let det = a11 * a22 - a12 * a12;
            if !(det.is_finite() && det > 0.0) {
                break;
            }
            ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
        } else {
            if !(a11 > 0.0) {
                break;
            }
            (b1 / a11, 0.0)
        };
        let next_sigma = sigma - step_sigma;
        let next_theta = theta - step_theta;
        if !(next_theta >= 0.0 && next_theta <= theta_max) {
            break;
        }
        let Ok(next) = ExpModel::new(model.kind(), next_sigma, next_theta) else {
            break;
        };
        let next_sse = objective(ds, &next);
        if !(next_sse <= sse * (1.0 + 1e-12)) {
            break;
        }
        let small = step_sigma.abs() <= 1e-15 * sigma && step_theta.abs() <= 1e-15 * sigma;
        model = next;
        sse = next_sse;
        if small {
            break;
        }
    }
    model
}

/// Maps optimizer coordinates to model parameters.
struct Reparam {
    kind: ModelKind,
    sigma0: f64,
    theta_max: f64,
}

impl Reparam {
    fn new(ds: &EcdfDataset, start: &ExpModel) -> Result<Self> {
        let theta_max = ds.x_max();
        if start.kind() == ModelKind::TwoParam && !(theta_max > 0.0) {
            return Err(Error::DegenerateData(format!(
                "largest income is {theta_max}; no room for a truncation point"
            )));
        }
        Ok(Reparam {
            kind: start.kind(),
            sigma0: start.sigma(),
            theta_max,
        })
    }

    fn start(&self, m: &ExpModel) -> Vec<f64> {
        match self.kind {
            ModelKind::OneParam => vec![0.0],
            ModelKind::TwoParam => {
                let frac = (m.theta() / self.theta_max).clamp(EDGE, 1.0 - EDGE);
                vec![0.0, (frac / (1.0 - frac)).ln()]
            }
        }
    }

    fn model(&self, z: &[f64]) -> Result<ExpModel> {
        let sigma = self.sigma0 * z[0].exp();
        match self.kind {
            ModelKind::OneParam => ExpModel::one_param(sigma),
            ModelKind::TwoParam => ExpModel::two_param(sigma, self.theta_max * logistic(z[1])),
        }
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{fixtures, EcdfPoint};

    fn small() -> EcdfDataset {
        EcdfDataset::parse("t", "x,F\n1,0.2\n2,0.5\n3,0.8\n").unwrap()
    }

    fn exact(sigma: f64, theta: f64) -> EcdfDataset {
        let m = ExpModel::two_param(sigma, theta).unwrap();
        let points = (3..=20)
            .map(|x| EcdfPoint {
                x: x as f64,
                f: m.cdf(x as f64).unwrap(),
            })
            .collect();
        EcdfDataset::new("exact", "", points).unwrap()
    }

    #[test]
    fn objective_zero_on_model_data() {
        let ds = exact(5.0, 2.0);
        let m = ExpModel::two_param(5.0, 2.0).unwrap();
        assert!(objective(&ds, &m) < 1e-30);

        let single = EcdfDataset::from_samples(&[1.0], "one").unwrap();
        let m = ExpModel::one_param(1.0 / std::f64::consts::LN_2).unwrap();
        assert!(objective(&single, &m) < 1e-30);
    }

    #[test]
    fn objective_us_regression() {
        // mpmath direct summation over the 43 points
        let m = ExpModel::one_param(38065.8).unwrap();
        let v = objective(&fixtures::us_2012(), &m);
        assert!((v - 0.012_252_306_903_366_22).abs() < 1e-15, "{v}");
    }

    #[test]
    fn initial_guess_examples() {
        let ds = small();
        let one = initial_guess(&ds, ModelKind::OneParam).unwrap();
        assert_eq!((one.sigma(), one.theta()), (2.0, 0.0));
        let two = initial_guess(&ds, ModelKind::TwoParam).unwrap();
        assert_eq!((two.sigma(), two.theta()), (1.0, 1.0));

        let uk = fixtures::uk_2011_12();
        let g = initial_guess(&uk, ModelKind::TwoParam).unwrap();
        assert_eq!(g.theta(), 7740.0);
        assert!((g.sigma() - 18_766.666_666_666_668).abs() < 1e-9);
    }

    #[test]
    fn degenerate_two_param() {
        let ds = EcdfDataset::parse("d", "x,F\n4,0.2\n4,0.5\n4,0.8\n").unwrap();
        assert!(matches!(
            initial_guess(&ds, ModelKind::TwoParam),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            fit(&ds, &FitConfig::new(ModelKind::TwoParam)),
            Err(Error::DegenerateData(_))
        ));
        assert!(initial_guess(&ds, ModelKind::OneParam).is_ok());
    }

    #[test]
    fn exact_data_recovery() {
        let r = fit(&exact(5.0, 2.0), &FitConfig::new(ModelKind::TwoParam)).unwrap();
        assert!(r.converged);
        assert!((r.model.sigma() - 5.0).abs() < 5e-6, "{:?}", r.model);
        assert!((r.model.theta() - 2.0).abs() < 2e-6, "{:?}", r.model);
    }

    #[test]
    fn config_validation() {
        let ds = small();
        let mut cfg = FitConfig::new(ModelKind::OneParam);
        cfg.max_iterations = 0;
        assert!(fit(&ds, &cfg).is_err());
        cfg.max_iterations = 10;
        cfg.tolerance = 0.0;
        assert!(fit(&ds, &cfg).is_err());
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let mut cfg = FitConfig::new(ModelKind::TwoParam);
        cfg.max_iterations = 2;
        let r = fit(&fixtures::uk_2011_12(), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
        assert!(r.sse <= objective(&fixtures::uk_2011_12(), &r.initial));
    }

    #[test]
    fn kind_mismatch() {
        let start = ExpModel::two_param(1.0, 0.5).unwrap();
        assert!(fit_from(&small(), &FitConfig::new(ModelKind::OneParam), &start).is_err());
    }

    #[test]
    fn logistic_is_stable() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(-800.0) >= 0.0);
        assert_eq!(logistic(800.0), 1.0);
    }
}
