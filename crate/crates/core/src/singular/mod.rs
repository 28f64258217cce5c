//! Singular terms `c (ln r)^k r^γ g(θ) χ(r)` about a point.

pub mod kellogg;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::Point;

pub use kellogg::{check_constraints, kellogg_mu, kellogg_residual, kellogg_solve, KelloggSolution};

/// `a cos(bθ + c)` on `[start, next start)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosinePiece {
    pub start: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl CosinePiece {
    fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).cos()
    }

    fn derivative(&self, t: f64) -> f64 {
        -self.amplitude * self.frequency * (self.frequency * t + self.phase).sin()
    }
}

/// Piecewise trigonometric angular profile on `[0, span]`.
///
/// The last piece extends past `span`, so values outside the sector are
/// defined but carry no meaning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularFunction {
    pieces: Vec<CosinePiece>,
    span: f64,
}

const CONTINUITY_TOL: f64 = 1e-9;

impl AngularFunction {
    /// Pieces must start at 0 with increasing starts below `span ≤ 2π`;
    /// the function must be continuous, and periodic when `span = 2π`.
    pub fn new(pieces: Vec<CosinePiece>, span: f64) -> Result<Self> {
        if !(span > 0.0 && span <= TAU * (1.0 + 1e-14)) {
            return Err(Error::InvalidParameter(format!("angular span {span} outside (0, 2π]")));
        }
        match pieces.first() {
            Some(p) if p.start == 0.0 => {}
            _ => return Err(Error::InvalidParameter("first angular piece must start at 0".into())),
        }
        if pieces
            .windows(2)
            .any(|w| !(w[1].start > w[0].start) || w[1].start >= span)
        {
            return Err(Error::InvalidParameter(
                "angular breakpoints must increase and stay below the span".into(),
            ));
        }
        if pieces.iter().any(|p| {
            ![p.start, p.amplitude, p.frequency, p.phase]
                .iter()
                .all(|v| v.is_finite())
        }) {
            return Err(Error::InvalidParameter("non-finite angular coefficient".into()));
        }
        let g = Self { pieces, span };
        for w in g.pieces.windows(2) {
            let jump = w[0].value(w[1].start) - w[1].value(w[1].start);
            if jump.abs() > CONTINUITY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "angular function jumps by {jump:e} at θ = {}",
                    w[1].start
                )));
            }
        }
        if g.is_full_turn() {
            let seam = g.value(0.0) - g.pieces.last().unwrap().value(TAU);
            if seam.abs() > CONTINUITY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "angular function is not 2π-periodic: g(0) - g(2π) = {seam:e}"
                )));
            }
        }
        Ok(g)
    }

    /// `sin(bθ)` on `[0, span]`.
    pub fn sine(frequency: f64, span: f64) -> Result<Self> {
        Self::new(
            vec![CosinePiece {
                start: 0.0,
                amplitude: 1.0,
                frequency,
                phase: -PI / 2.0,
            }],
            span,
        )
    }

    pub fn pieces(&self) -> &[CosinePiece] {
        &self.pieces
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn is_full_turn(&self) -> bool {
        (self.span - TAU).abs() <= 1e-12
    }

    fn piece(&self, t: f64) -> &CosinePiece {
        let i = self.pieces.partition_point(|p| p.start <= t);
        &self.pieces[i.saturating_sub(1)]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.piece(t).value(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.piece(t).derivative(t)
    }

    /// Angles in `[0, 2π)` where `g'` jumps, including the seam at 0 when
    /// the profile is not smooth across it.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let seam_smooth = self.is_full_turn()
            && (self.pieces[0].derivative(0.0) - self.pieces.last().unwrap().derivative(TAU)).abs()
                <= CONTINUITY_TOL;
        if !seam_smooth {
            out.push(0.0);
        }
        for w in self.pieces.windows(2) {
            let t = w[1].start;
            if (w[0].derivative(t) - w[1].derivative(t)).abs() > CONTINUITY_TOL {
                out.push(t);
            }
        }
        if !self.is_full_turn() {
            out.push(self.span);
        }
        out
    }
}

/// Radial cutoff `χ(r)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cutoff {
    #[default]
    One,
    /// `1` on `r ≤ r1`, `0` on `r ≥ r2`, joined by a smoothstep of order
    /// `2m+1`, which has `m` continuous derivatives.
    SmoothRadial { r1: f64, r2: f64, m: u32 },
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `S(t) = t^{m+1} Σ_{j≤m} C(m+j, j) (1-t)^j` and `S'(t)`.
fn smoothstep(m: u32, t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let sum: f64 = (0..=m)
        .map(|j| binomial(m + j, j) * (1.0 - t).powi(j as i32))
        .sum();
    let norm = (2 * m + 1) as f64 * binomial(2 * m, m);
    (
        t.powi(m as i32 + 1) * sum,
        norm * (t * (1.0 - t)).powi(m as i32),
    )
}

impl Cutoff {
    pub fn validate(&self, p: u32) -> Result<()> {
        if let Cutoff::SmoothRadial { r1, r2, m } = *self {
            if !(r1 >= 0.0 && r2 > r1 && r2.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "cutoff radii must satisfy 0 <= r1 < r2, got {r1}, {r2}"
                )));
            }
            if m < p + 1 {
                return Err(Error::InvalidParameter(format!(
                    "cutoff order m = {m} must be at least p + 1 = {}",
                    p + 1
                )));
            }
        }
        Ok(())
    }

    /// `(χ(r), χ'(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            Cutoff::One => (1.0, 0.0),
            Cutoff::SmoothRadial { r1, r2, m } => {
                // 1 - S(t) = S(1 - t); the right side keeps full relative
                // accuracy as χ → 0.
                let w = r2 - r1;
                let (s, ds) = smoothstep(m, (r2 - r) / w);
                (s, -ds / w)
            }
        }
    }

    /// Radius beyond which `χ` vanishes.
    pub fn support_radius(&self) -> f64 {
        match *self {
            Cutoff::One => f64::INFINITY,
            Cutoff::SmoothRadial { r2, .. } => r2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularTerm {
    pub c: f64,
    pub log_power: u32,
    pub gamma: f64,
    pub center: Point,
    pub angular: AngularFunction,
    pub cutoff: Cutoff,
    /// Direction of `θ = 0`, counterclockwise from the positive x-axis.
    pub reference_angle: f64,
}

impl SingularTerm {
    pub fn new(
        c: f64,
        log_power: u32,
        gamma: f64,
        center: Point,
        angular: AngularFunction,
        cutoff: Cutoff,
        reference_angle: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("singular exponent must be positive, got {gamma}")));
        }
        if !(c.is_finite() && center.iter().all(|v| v.is_finite()) && reference_angle.is_finite()) {
            return Err(Error::InvalidParameter("non-finite singular term parameter".into()));
        }
        Ok(Self {
            c,
            log_power,
            gamma,
            center,
            angular,
            cutoff,
            reference_angle,
        })
    }

    /// `(r, θ, φ)`: distance, local angle in `[0, 2π)` and absolute angle.
    pub fn polar(&self, x: Point) -> (f64, f64, f64) {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let phi = dy.atan2(dx);
        let mut theta = (phi - self.reference_angle).rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        (dx.hypot(dy), theta, phi)
    }

    /// `(f, f')` for the radial factor `f(r) = c (ln r)^k r^γ χ(r)`.
    fn radial(&self, r: f64) -> (f64, f64) {
        let k = self.log_power as i32;
        let ln = r.ln();
        let rg = r.powf(self.gamma);
        let (chi, dchi) = self.cutoff.eval(r);
        let lk = ln.powi(k);
        let base = lk * rg;
        let mut dbase = self.gamma * lk * r.powf(self.gamma - 1.0);
        if k > 0 {
            dbase += k as f64 * ln.powi(k - 1) * r.powf(self.gamma - 1.0);
        }
        (self.c * base * chi, self.c * (dbase * chi + base * dchi))
    }

    /// Zero at the center.
    pub fn eval(&self, x: Point) -> f64 {
        let (r, theta, _) = self.polar(x);
        if r == 0.0 || r >= self.cutoff.support_radius() {
            return 0.0;
        }
        self.radial(r).0 * self.angular.value(theta)
    }

    pub fn grad(&self, x: Point) -> Result<[f64; 2]> {
        let (r, theta, phi) = self.polar(x);
        if r == 0.0 {
            return Err(Error::SingularGradient);
        }
        if r >= self.cutoff.support_radius() {
            return Ok([0.0, 0.0]);
        }
        let (f, df) = self.radial(r);
        let gr = df * self.angular.value(theta);
        let gt = f * self.angular.derivative(theta) / r;
        let (s, c) = phi.sin_cos();
        Ok([gr * c - gt * s, gr * s + gt * c])
    }
}

/// `r^{π/ω} sin(πθ/ω)`, the leading corner singularity of the Laplacian
/// at a corner of interior angle `ω`.
pub fn preset_poisson_corner(omega: f64) -> Result<SingularTerm> {
    if !(omega > 0.0 && omega <= TAU * (1.0 + 1e-14)) {
        return Err(Error::InvalidParameter(format!("corner angle {omega} outside (0, 2π]")));
    }
    let gamma = PI / omega;
    SingularTerm::new(
        1.0,
        0,
        gamma,
        [0.0, 0.0],
        AngularFunction::sine(gamma, omega.min(TAU))?,
        Cutoff::One,
        0.0,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSample {
    pub r: f64,
    pub value_ratio: f64,
    pub grad_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    /// Largest ratios per sampled radius, from large to small `r`.
    pub samples: Vec<BoundSample>,
    pub value_constant: f64,
    pub grad_constant: f64,
    /// Whether `γ̄` obeys `γ̄ ≤ γᵢ/2` for `k > 0` and `γ̄ ≤ γᵢ` otherwise.
    pub within_rule: bool,
}

/// Empirical constants in `|u| ≤ C r^γ̄` and `|∇u| ≤ C r^{γ̄-1}`, sampled
/// on `sample_count` radii log-spaced over `[1e-8, 1e-1]` and 64 angles.
pub fn bound_check(term: &SingularTerm, gamma_bar: f64, sample_count: usize) -> BoundCheck {
    let n = sample_count.max(2);
    let angles = 64;
    let samples: Vec<BoundSample> = (0..n)
        .map(|i| {
            let r = 10f64.powf(-1.0 - 7.0 * i as f64 / (n - 1) as f64);
            let mut s = BoundSample {
                r,
                value_ratio: 0.0,
                grad_ratio: 0.0,
            };
            for j in 0..angles {
                let t = term.reference_angle + term.angular.span() * (j as f64 + 0.5) / angles as f64;
                let x = [term.center[0] + r * t.cos(), term.center[1] + r * t.sin()];
                let g = term.grad(x).expect("r > 0");
                s.value_ratio = s.value_ratio.max(term.eval(x).abs() / r.powf(gamma_bar));
                s.grad_ratio = s.grad_ratio.max(g[0].hypot(g[1]) / r.powf(gamma_bar - 1.0));
            }
            s
        })
        .collect();
    let limit = if term.log_power > 0 { term.gamma / 2.0 } else { term.gamma };
    BoundCheck {
        value_constant: samples.iter().map(|s| s.value_ratio).fold(0.0, f64::max),
        grad_constant: samples.iter().map(|s| s.grad_ratio).fold(0.0, f64::max),
        samples,
        within_rule: gamma_bar <= limit,
    }
}

/// Kink directions of `g` (absolute angles) that are not the direction of
/// an initial-mesh edge leaving the term's center. Returns an empty list
/// when the center is not an initial vertex.
pub fn misaligned_kinks(term: &SingularTerm, mesh: &Mesh) -> Vec<f64> {
    let nv = mesh.initial_vertex_count();
    let verts = mesh.vertices();
    let Some(c) = (0..nv).find(|&i| verts[i].point() == term.center) else {
        return Vec::new();
    };
    let mut dirs = Vec::new();
    for t in &mesh.triangles()[..mesh.initial_count()] {
        if let Some(pos) = t.v.iter().position(|&v| v == c) {
            for k in 1..3 {
                let o = verts[t.v[(pos + k) % 3]];
                dirs.push((o.y - term.center[1]).atan2(o.x - term.center[0]));
            }
        }
    }
    let angle_gap = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    };
    term.angular
        .kinks()
        .into_iter()
        .map(|k| k + term.reference_angle)
        .filter(|&k| !dirs.iter().any(|&d| angle_gap(k, d) < 1e-9))
        .collect()
}

/// Angular profile as it appears in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum AngularConfig {
    /// `sin(πθ/ω)` on `[0, ω]`.
    Sin { omega: f64 },
    /// Kellogg's `μ` for the term's exponent.
    Kellogg,
    Piecewise { pieces: Vec<CosinePiece>, span: f64 },
}

/// One singular term in an experiment config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularTermConfig {
    pub center: Point,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default)]
    pub k: u32,
    /// Defaults to `π/ω` for `sin` profiles; required otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub angular: AngularConfig,
    #[serde(default)]
    pub cutoff: Cutoff,
    #[serde(default)]
    pub reference_angle: f64,
}

fn one() -> f64 {
    1.0
}

impl SingularTermConfig {
    pub fn build(&self) -> Result<SingularTerm> {
        let need_gamma = || {
            self.gamma.ok_or_else(|| {
                Error::InvalidParameter("singular term needs an explicit gamma".into())
            })
        };
        let (gamma, angular) = match &self.angular {
            AngularConfig::Sin { omega } => {
                let g = self.gamma.unwrap_or(PI / omega);
                (g, AngularFunction::sine(PI / omega, *omega)?)
            }
            AngularConfig::Kellogg => {
                let g = need_gamma()?;
                (g, kellogg_solve(g)?.angular())
            }
            AngularConfig::Piecewise { pieces, span } => {
                (need_gamma()?, AngularFunction::new(pieces.clone(), *span)?)
            }
        };
        SingularTerm::new(
            self.c,
            self.k,
            gamma,
            self.center,
            angular,
            self.cutoff,
            self.reference_angle,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{initial_mesh, DomainPreset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l_term() -> SingularTerm {
        preset_poisson_corner(1.5 * PI).unwrap()
    }

    #[test]
    fn corner_term_values() {
        let u = l_term();
        assert!(u.eval([1.0, 0.0]).abs() < 1e-15);
        assert!((u.eval([0.0, 1.0]) - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(u.eval([0.0, 0.0]), 0.0);
        assert!(matches!(u.grad([0.0, 0.0]), Err(Error::SingularGradient)));
    }

    #[test]
    fn corner_exponents() {
        assert!((l_term().gamma - 2.0 / 3.0).abs() < 1e-15);
        assert!((preset_poisson_corner(TAU).unwrap().gamma - 0.5).abs() < 1e-15);
        assert!((preset_poisson_corner(PI / 2.0).unwrap().gamma - 2.0).abs() < 1e-15);
    }

    fn fd_check(term: &SingularTerm, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-6;
        let mut n = 0;
        while n < 100 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (r, theta, _) = term.polar(x);
            // Stay off the seam, where a sector profile may jump.
            if r <= 1e-2 || theta < 1e-4 || TAU - theta < 1e-4 {
                continue;
            }
            n += 1;
            let g = term.grad(x).unwrap();
            let fd = [
                (term.eval([x[0] + h, x[1]]) - term.eval([x[0] - h, x[1]])) / (2.0 * h),
                (term.eval([x[0], x[1] + h]) - term.eval([x[0], x[1] - h])) / (2.0 * h),
            ];
            let err = (g[0] - fd[0]).hypot(g[1] - fd[1]);
            let scale = g[0].hypot(g[1]).max(1.0);
            assert!(err / scale < 1e-6, "{x:?}: {g:?} vs {fd:?}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let smooth = Cutoff::SmoothRadial { r1: 0.2, r2: 0.9, m: 3 };
        for k in [0, 1] {
            for cutoff in [Cutoff::One, smooth] {
                let mut u = l_term();
                u.log_power = k;
                u.cutoff = cutoff;
                fd_check(&u, 11 + k as u64);
                let mut v = SingularTermConfig {
                    center: [0.0, 0.0],
                    c: 2.0,
                    k,
                    gamma: Some(0.1),
                    angular: AngularConfig::Kellogg,
                    cutoff,
                    reference_angle: 0.0,
                }
                .build()
                .unwrap();
                fd_check(&v, 5);
                v.reference_angle = 0.3;
                fd_check(&v, 6);
            }
        }
    }

    #[test]
    fn periodic_profile_is_continuous_across_seam() {
        let u = SingularTermConfig {
            center: [0.0, 0.0],
            c: 1.0,
            k: 0,
            gamma: Some(0.1),
            angular: AngularConfig::Kellogg,
            cutoff: Cutoff::One,
            reference_angle: 0.0,
        }
        .build()
        .unwrap();
        let r = 1e-3;
        let above = u.eval([r, 1e-15]);
        let below = u.eval([r, -1e-15]);
        assert!((above - below).abs() < 1e-10);
    }

    #[test]
    fn cutoff_shape() {
        let c = Cutoff::SmoothRadial { r1: 0.25, r2: 0.75, m: 2 };
        assert_eq!(c.eval(0.1), (1.0, 0.0));
        assert_eq!(c.eval(0.8), (0.0, 0.0));
        assert!((c.eval(0.5).0 - 0.5).abs() < 1e-15);
        assert!(c.validate(1).is_ok());
        assert!(c.validate(2).is_err());
        // Smoothstep derivative against a difference quotient.
        for t in [0.1, 0.37, 0.5, 0.81] {
            let h = 1e-7;
            let fd = (smoothstep(3, t + h).0 - smoothstep(3, t - h).0) / (2.0 * h);
            assert!((fd - smoothstep(3, t).1).abs() < 1e-7);
        }
    }

    #[test]
    fn bound_constants() {
        let u = l_term();
        let b = bound_check(&u, 2.0 / 3.0, 8);
        assert!(b.value_constant <= 1.0 + 1e-12);
        assert!(b.within_rule);

        let mut v = l_term();
        v.log_power = 1;
        let ok = bound_check(&v, 1.0 / 3.0, 8);
        assert!(ok.within_rule);
        let tail = &ok.samples[ok.samples.len() - 3..];
        assert!(tail[2].value_ratio <= tail[0].value_ratio * 1.01);
        assert!(ok.value_constant.is_finite());

        let bad = bound_check(&v, 2.0 / 3.0, 8);
        assert!(!bad.within_rule);
        let s = &bad.samples;
        assert!(s.windows(2).all(|w| w[1].value_ratio > w[0].value_ratio));
    }

    #[test]
    fn rejects_discontinuous_or_aperiodic_profiles() {
        let p = |start, amplitude| CosinePiece { start, amplitude, frequency: 1.0, phase: 0.0 };
        assert!(AngularFunction::new(vec![p(0.0, 1.0), p(1.0, 2.0)], TAU).is_err());
        assert!(AngularFunction::sine(2.0 / 3.0, TAU).is_err());
        assert!(AngularFunction::sine(2.0 / 3.0, 1.5 * PI).is_ok());
        assert!(AngularFunction::sine(1.0, TAU).is_ok());
    }

    #[test]
    fn kink_alignment() {
        let mesh = initial_mesh(&DomainPreset::CenteredSquare).unwrap();
        let term = SingularTermConfig {
            center: [0.0, 0.0],
            c: 1.0,
            k: 0,
            gamma: Some(0.1),
            angular: AngularConfig::Kellogg,
            cutoff: Cutoff::One,
            reference_angle: 0.0,
        }
        .build()
        .unwrap();
        assert!(misaligned_kinks(&term, &mesh).is_empty());
        let mut rotated = term.clone();
        rotated.reference_angle = 0.1;
        assert!(!misaligned_kinks(&rotated, &mesh).is_empty());
        let l = initial_mesh(&DomainPreset::LShape).unwrap();
        assert!(misaligned_kinks(&l_term(), &l).is_empty());
    }

    #[test]
    fn config_json() {
        let json = r#"{"center":[0,0],"angular":{"kind":"sin","params":{"omega":4.71238898038469}}}"#;
        let cfg: SingularTermConfig = serde_json::from_str(json).unwrap();
        let t = cfg.build().unwrap();
        assert!((t.gamma - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.cutoff, Cutoff::One);
    }
}
