//! Right-hand sides of two time-uniform concentration bounds and a Monte-Carlo
//! harness that measures how often they fail.
//!
//! A trial fails if the inequality is violated at any prefix `n ≤ n_max`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundSpec<R: Real = f64> {
    /// `(1/n) Σ X_t ≤ (3λ / 4C) Var(X) + (C / (λ n)) log(1/δ)` for `X ≤ C`.
    FreedmanVariant { bound: R, lambda: R, delta: R },
    /// `Σ X_t ≤ 2 √(max{T_n, c} L_n) + L_n / 3` with
    /// `L_n = log(2 (1 + log⁺(T_n / c))² / δ)`, for `X ≤ 1`.
    TimeUniformBernstein { c: R, delta: R },
}

impl<R: Real> BoundSpec<R> {
    pub fn delta(&self) -> R {
        match *self {
            BoundSpec::FreedmanVariant { delta, .. }
            | BoundSpec::TimeUniformBernstein { delta, .. } => delta,
        }
    }

    /// Largest sample the bound's precondition allows.
    pub fn sample_cap(&self) -> R {
        match *self {
            BoundSpec::FreedmanVariant { bound, .. } => bound,
            BoundSpec::TimeUniformBernstein { .. } => R::one(),
        }
    }

    fn validate(&self) -> Result<()> {
        let delta = self.delta();
        if !(delta > R::zero() && delta <= R::one()) {
            return Err(Error::Parameter(format!("δ = {delta} must lie in (0, 1]")));
        }
        match *self {
            BoundSpec::FreedmanVariant { bound, lambda, .. } => {
                check_lambda(lambda)?;
                if bound.is_nan() || bound <= R::zero() {
                    return Err(Error::Parameter(format!("C = {bound} must be positive")));
                }
            }
            BoundSpec::TimeUniformBernstein { c, .. } => {
                if c.is_nan() || c <= R::zero() {
                    return Err(Error::Parameter(format!("c = {c} must be positive")));
                }
            }
        }
        Ok(())
    }
}

fn check_lambda<R: Real>(lambda: R) -> Result<()> {
    if lambda > R::zero() && lambda <= R::one() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("λ = {lambda} must lie in (0, 1]")))
    }
}

/// Bound on the running mean: `(3λ / 4C) var + (C / (λ n)) log(1/δ)`.
pub fn freedman_rhs<R: Real>(bound: R, lambda: R, delta: R, var: R, n: u64) -> Result<R> {
    check_lambda(lambda)?;
    let n = R::from_u64(n).unwrap();
    Ok(R::of(3.0) * lambda / (R::of(4.0) * bound) * var
        + bound / (lambda * n) * (R::one() / delta).ln())
}

/// Bound on the running sum given the accumulated conditional variance `t_n`.
pub fn tu_bernstein_rhs<R: Real>(t_n: R, c: R, delta: R) -> R {
    let log_plus = (t_n / c).max(R::one()).ln();
    let inner = R::one() + log_plus;
    let ell = (R::of(2.0) * inner * inner / delta).ln();
    R::of(2.0) * (t_n.max(c) * ell).sqrt() + ell / R::of(3.0)
}

/// i.i.d. sample source with a known variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    Constant(f64),
    /// `B − p` with `B ~ Bernoulli(p)`.
    CenteredBernoulli {
        p: f64,
    },
    /// Uniform on `[−w, w]`.
    CenteredUniform {
        half_width: f64,
    },
}

impl Generator {
    pub fn variance(&self) -> f64 {
        match *self {
            Generator::Constant(_) => 0.0,
            Generator::CenteredBernoulli { p } => p * (1.0 - p),
            Generator::CenteredUniform { half_width } => half_width * half_width / 3.0,
        }
    }

    /// Largest value the generator can produce.
    pub fn sup(&self) -> f64 {
        match *self {
            Generator::Constant(x) => x,
            Generator::CenteredBernoulli { p } => 1.0 - p,
            Generator::CenteredUniform { half_width } => half_width,
        }
    }

    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> f64 {
        match *self {
            Generator::Constant(x) => x,
            Generator::CenteredBernoulli { p } => f64::from(u8::from(rng.random::<f64>() < p)) - p,
            Generator::CenteredUniform { half_width } => {
                half_width * (2.0 * rng.random::<f64>() - 1.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub failures: u64,
    pub trials: u64,
}

impl ValidationReport {
    pub fn failure_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures as f64 / self.trials as f64
        }
    }

    /// `δ + 3 √(δ (1 − δ) / trials)`.
    pub fn threshold(&self, delta: f64) -> f64 {
        delta + 3.0 * (delta * (1.0 - delta) / self.trials as f64).sqrt()
    }
}

/// Runs one trial; `true` when the bound is violated at some `n ≤ n_max`.
fn trial_fails(
    bound: &BoundSpec<f64>,
    generator: &Generator,
    n_max: u64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let var = generator.variance();
    let mut sum = 0.0;
    match *bound {
        BoundSpec::FreedmanVariant {
            bound: cap,
            lambda,
            delta,
        } => {
            let var_term = 3.0 * lambda / (4.0 * cap) * var;
            let log_term = cap / lambda * (1.0 / delta).ln();
            for n in 1..=n_max {
                sum += generator.sample(rng);
                // (1/n) Σ X ≤ var_term + log_term / n, multiplied through by n
                if sum > var_term * n as f64 + log_term {
                    return true;
                }
            }
        }
        BoundSpec::TimeUniformBernstein { c, delta } => {
            for n in 1..=n_max {
                sum += generator.sample(rng);
                if sum > tu_bernstein_rhs(var * n as f64, c, delta) {
                    return true;
                }
            }
        }
    }
    false
}

/// Fraction of `trials` independent runs in which the bound fails at some prefix.
///
/// Trial `i` draws from ChaCha stream `i` of `seed`, so the result does not
/// depend on how trials are scheduled across threads.
pub fn mc_validate(
    bound: &BoundSpec<f64>,
    generator: &Generator,
    n_max: u64,
    trials: u64,
    seed: u64,
) -> Result<ValidationReport> {
    bound.validate()?;
    if generator.sup() > bound.sample_cap() {
        return Err(Error::BoundViolated {
            sample: generator.sup(),
            bound: bound.sample_cap(),
        });
    }
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            trial_fails(bound, generator, n_max, &mut rng)
        })
        .count() as u64;
    Ok(ValidationReport { failures, trials })
}

/// One cell of the validation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixCell {
    pub bound: BoundSpec<f64>,
    pub generator: Generator,
}

impl MatrixCell {
    pub fn label(&self) -> String {
        let p = match self.generator {
            Generator::CenteredBernoulli { p } => format!("bernoulli(p={p})"),
            other => format!("{other:?}"),
        };
        match self.bound {
            BoundSpec::FreedmanVariant {
                bound,
                lambda,
                delta,
            } => {
                format!("freedman C={bound} lambda={lambda} delta={delta} {p}")
            }
            BoundSpec::TimeUniformBernstein { c, delta } => {
                format!("bernstein c={c} delta={delta} {p}")
            }
        }
    }
}

/// Centered Bernoulli `p ∈ {0.1, 0.5, 0.9}` against both bounds:
/// the Freedman variant for `λ ∈ {0.25, 1}` and `δ ∈ {0.05, 0.2}` with `C = 1`,
/// and the time-uniform Bernstein bound for each `δ` with `c = 1`.
pub fn validation_matrix() -> Vec<MatrixCell> {
    let mut cells = Vec::new();
    for p in [0.1, 0.5, 0.9] {
        let generator = Generator::CenteredBernoulli { p };
        for delta in [0.05, 0.2] {
            for lambda in [0.25, 1.0] {
                cells.push(MatrixCell {
                    bound: BoundSpec::FreedmanVariant {
                        bound: 1.0,
                        lambda,
                        delta,
                    },
                    generator,
                });
            }
            cells.push(MatrixCell {
                bound: BoundSpec::TimeUniformBernstein { c: 1.0, delta },
                generator,
            });
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn freedman_reference_values() {
        assert_eq!(freedman_rhs(1.0, 0.5, 1.0, 0.0, 10).unwrap(), 0.0);
        let v = freedman_rhs(1.0, 1.0, (-1.0f64).exp(), 1.0, 4).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-15);
        assert!(freedman_rhs(1.0, 0.0, 0.5, 1.0, 1).is_err());
        assert!(freedman_rhs(1.0, 1.5, 0.5, 1.0, 1).is_err());
    }

    #[test]
    fn freedman_monotone_in_n_and_var() {
        let f = |var, n| freedman_rhs(2.0, 0.3, 0.1, var, n).unwrap();
        assert!(f(0.5, 10) > f(0.5, 11));
        assert!(f(0.6, 10) > f(0.5, 10));
    }

    #[test]
    fn bernstein_collapses_below_c() {
        let c = 3.0f64;
        let delta = 0.1f64;
        let l: f64 = (2.0f64 / delta).ln();
        let expect = 2.0 * (c * l).sqrt() + l / 3.0;
        assert_relative_eq!(
            tu_bernstein_rhs(0.5, c, delta),
            expect,
            max_relative = 1e-15
        );
        assert_relative_eq!(tu_bernstein_rhs(c, c, delta), expect, max_relative = 1e-15);
    }

    #[test]
    fn bernstein_at_c_times_e() {
        let (c, delta) = (2.0f64, 0.05);
        let e = 1f64.exp();
        let l = (8.0f64 / delta).ln();
        let expect = 2.0 * (c * e * l).sqrt() + l / 3.0;
        assert_relative_eq!(
            tu_bernstein_rhs(c * e, c, delta),
            expect,
            max_relative = 1e-14
        );
    }

    #[test]
    fn constant_zero_never_fails() {
        let bound = BoundSpec::FreedmanVariant {
            bound: 1.0,
            lambda: 0.5,
            delta: 0.1,
        };
        let rep = mc_validate(&bound, &Generator::Constant(0.0), 1000, 200, 1).unwrap();
        assert_eq!(rep.failures, 0);
    }

    #[test]
    fn unbounded_generator_rejected() {
        let bound = BoundSpec::TimeUniformBernstein { c: 1.0, delta: 0.1 };
        let err = mc_validate(&bound, &Generator::Constant(2.0), 10, 10, 0).unwrap_err();
        assert!(matches!(err, Error::BoundViolated { .. }));
    }

    #[test]
    fn validation_is_reproducible() {
        let bound = BoundSpec::FreedmanVariant {
            bound: 1.0,
            lambda: 1.0,
            delta: 0.5,
        };
        let g = Generator::CenteredBernoulli { p: 0.5 };
        let a = mc_validate(&bound, &g, 500, 300, 9).unwrap();
        let b = mc_validate(&bound, &g, 500, 300, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vacuous_delta_still_reports() {
        // δ = 1 removes the log term; the variance term stays nonnegative
        let bound = BoundSpec::FreedmanVariant {
            bound: 1.0,
            lambda: 0.5,
            delta: 1.0,
        };
        let rep = mc_validate(
            &bound,
            &Generator::CenteredBernoulli { p: 0.3 },
            200,
            100,
            2,
        )
        .unwrap();
        assert!(rep.failure_fraction() >= 0.0 && rep.failure_fraction() <= 1.0);
        assert!(freedman_rhs(1.0, 0.5, 1.0, 0.21, 5).unwrap() >= 0.0);
    }

    #[test]
    fn matrix_has_eighteen_cells() {
        let m = validation_matrix();
        assert_eq!(m.len(), 18);
        assert!(m.iter().all(|c| c.generator.sup() <= c.bound.sample_cap()));
    }
}
