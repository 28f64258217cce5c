//! Exact interface solution `r^γ μ(θ)` for a checkerboard coefficient on
//! `(-1,1)²`, with `a₁` in the first and third quadrants and `a₂` in the
//! others.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{AngularFunction, CosinePiece};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KelloggSolution {
    pub gamma: f64,
    /// Coefficient ratio `a₁/a₂`.
    pub r: f64,
    pub rho: f64,
    pub sigma: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// Residuals of the three trigonometric relations in `(R, ρ, σ)`.
pub fn kellogg_residual(gamma: f64, x: [f64; 3]) -> [f64; 3] {
    let [r, rho, sigma] = x;
    let g = gamma;
    [
        r + ((FRAC_PI_2 - sigma) * g).tan() * cot(rho * g),
        1.0 / r + (rho * g).tan() * cot(sigma * g),
        r + (sigma * g).tan() * cot((FRAC_PI_2 - rho) * g),
    ]
}

fn jacobian(gamma: f64, x: [f64; 3]) -> Matrix3<f64> {
    let [r, rho, sigma] = x;
    let g = gamma;
    let sec2 = |t: f64| 1.0 / (t.cos() * t.cos());
    let csc2 = |t: f64| 1.0 / (t.sin() * t.sin());
    let a = (FRAC_PI_2 - sigma) * g;
    let b = rho * g;
    let s = sigma * g;
    let c = (FRAC_PI_2 - rho) * g;
    Matrix3::new(
        1.0,
        -g * a.tan() * csc2(b),
        -g * sec2(a) * cot(b),
        -1.0 / (r * r),
        g * sec2(b) * cot(s),
        -g * b.tan() * csc2(s),
        1.0,
        g * s.tan() * csc2(c),
        g * sec2(s) * cot(c),
    )
}

fn norm(f: [f64; 3]) -> f64 {
    f.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Open intervals for `2γρ` and `-2γσ`.
fn constraint_intervals(gamma: f64) -> ((f64, f64), (f64, f64)) {
    (
        ((PI * gamma - PI).max(0.0), (PI * gamma).min(PI)),
        ((PI - PI * gamma).max(0.0), PI.min(2.0 * PI - PI * gamma)),
    )
}

/// Checks `0 < γ < 2` and the two interval constraints on `ρ` and `σ`.
pub fn check_constraints(sol: &KelloggSolution) -> Result<()> {
    let g = sol.gamma;
    if !(g > 0.0 && g < 2.0) {
        return Err(Error::ConstraintViolation(format!("gamma = {g} outside (0, 2)")));
    }
    let ((rl, rh), (sl, sh)) = constraint_intervals(g);
    let tr = 2.0 * g * sol.rho;
    if !(rl < tr && tr < rh) {
        return Err(Error::ConstraintViolation(format!(
            "2γρ = {tr} outside ({rl}, {rh})"
        )));
    }
    let ts = -2.0 * g * sol.sigma;
    if !(sl < ts && ts < sh) {
        return Err(Error::ConstraintViolation(format!(
            "-2γσ = {ts} outside ({sl}, {sh})"
        )));
    }
    Ok(())
}

/// Damped Newton iteration for `(R, ρ, σ)`.
///
/// `ρ` and `σ` start at the midpoints of their admissible intervals, which
/// gives `ρ₀ = π/4` and `σ₀ = π/4 - π/(2γ)` for every `γ`; `R₀` then
/// solves the first relation exactly.
pub fn kellogg_solve(gamma: f64) -> Result<KelloggSolution> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "Kellogg exponent must lie in (0, 2), got {gamma}"
        )));
    }
    let rho0 = FRAC_PI_4;
    let sigma0 = FRAC_PI_4 - FRAC_PI_2 / gamma;
    let r0 = -((FRAC_PI_2 - sigma0) * gamma).tan() * cot(rho0 * gamma);
    let mut x = [r0, rho0, sigma0];
    let mut res = norm(kellogg_residual(gamma, x));
    for it in 0..MAX_ITERATIONS {
        if res < TOLERANCE {
            let sol = KelloggSolution {
                gamma,
                r: x[0],
                rho: x[1],
                sigma: x[2],
                residual: res,
                iterations: it,
            };
            check_constraints(&sol)?;
            return Ok(sol);
        }
        let f = kellogg_residual(gamma, x);
        let Some(step) = jacobian(gamma, x).lu().solve(&-Vector3::from(f)) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [x[0] + t * step[0], x[1] + t * step[1], x[2] + t * step[2]];
            let r = norm(kellogg_residual(gamma, trial));
            if r.is_finite() && r < res {
                x = trial;
                res = r;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NewtonDiverged {
        residual: res,
        iterations: MAX_ITERATIONS,
    })
}

/// `μ(θ)` for `θ ∈ [0, 2π)`, quadrant by quadrant.
pub fn kellogg_mu(theta: f64, sol: &KelloggSolution) -> f64 {
    let KelloggSolution {
        gamma: g,
        rho,
        sigma,
        ..
    } = *sol;
    if theta <= FRAC_PI_2 {
        ((FRAC_PI_2 - sigma) * g).cos() * ((theta - FRAC_PI_2 + rho) * g).cos()
    } else if theta <= PI {
        (rho * g).cos() * ((theta - PI + sigma) * g).cos()
    } else if theta < 1.5 * PI {
        (sigma * g).cos() * ((theta - PI - rho) * g).cos()
    } else {
        ((FRAC_PI_2 - rho) * g).cos() * ((theta - 1.5 * PI - sigma) * g).cos()
    }
}

impl KelloggSolution {
    /// `μ` as a four-piece angular function.
    pub fn angular(&self) -> AngularFunction {
        let KelloggSolution {
            gamma: g,
            rho,
            sigma,
            ..
        } = *self;
        let piece = |start: f64, amplitude: f64, shift: f64| CosinePiece {
            start,
            amplitude,
            frequency: g,
            phase: -shift * g,
        };
        AngularFunction::new(
            vec![
                piece(0.0, ((FRAC_PI_2 - sigma) * g).cos(), FRAC_PI_2 - rho),
                piece(FRAC_PI_2, (rho * g).cos(), PI - sigma),
                piece(PI, (sigma * g).cos(), PI + rho),
                piece(1.5 * PI, ((FRAC_PI_2 - rho) * g).cos(), 1.5 * PI + sigma),
            ],
            2.0 * PI,
        )
        .expect("Kellogg solutions are continuous and periodic")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_published_values() {
        let sol = kellogg_solve(0.1).unwrap();
        assert!((sol.r - 161.4476).abs() < 1e-3, "{sol:?}");
        assert!((sol.rho - FRAC_PI_4).abs() < 1e-8);
        assert!((sol.sigma + 14.92256).abs() < 1e-4, "{sol:?}");
        assert!(sol.residual < 1e-10);
        let f = kellogg_residual(0.1, [sol.r, sol.rho, sol.sigma]);
        assert!(f[0].abs() < 1e-9);
    }

    #[test]
    fn smaller_exponent_gives_larger_ratio() {
        let a = kellogg_solve(0.1).unwrap();
        let b = kellogg_solve(0.05).unwrap();
        assert!(b.r > a.r);
    }

    #[test]
    fn moderate_exponents_satisfy_constraints() {
        for g in [0.5, 0.25, 0.8] {
            let sol = kellogg_solve(g).unwrap();
            assert!(sol.residual < 1e-10);
            check_constraints(&sol).unwrap();
        }
    }

    #[test]
    fn rejects_out_of_range_exponent() {
        assert!(kellogg_solve(2.5).is_err());
        assert!(kellogg_solve(0.0).is_err());
    }

    #[test]
    fn mu_is_continuous_and_periodic() {
        let sol = kellogg_solve(0.1).unwrap();
        for b in [FRAC_PI_2, PI, 1.5 * PI] {
            let l = kellogg_mu(b - 1e-13, &sol);
            let r = kellogg_mu(b + 1e-13, &sol);
            assert!((l - r).abs() < 1e-9, "seam {b}: {l} vs {r}");
        }
        let seam = kellogg_mu(0.0, &sol) - kellogg_mu(2.0 * PI - 1e-13, &sol);
        assert!(seam.abs() < 1e-9);
        let expected = ((FRAC_PI_2 - sol.sigma) * 0.1).cos() * ((-FRAC_PI_2 + sol.rho) * 0.1).cos();
        assert_eq!(kellogg_mu(0.0, &sol), expected);
    }

    #[test]
    fn angular_matches_mu() {
        let sol = kellogg_solve(0.1).unwrap();
        let g = sol.angular();
        for i in 0..400 {
            let t = i as f64 * 2.0 * PI / 400.0;
            assert!((g.value(t) - kellogg_mu(t, &sol)).abs() < 1e-12);
        }
    }
}
