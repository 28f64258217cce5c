//! Target functions `u = u₀ + Σ uᵢ`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::singular::SingularTerm;
use crate::Point;

/// `c x^i y^j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: f64,
    pub i: u32,
    pub j: u32,
}

/// Smooth part `u₀`, from a small expression library.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegularPart {
    #[default]
    Zero,
    Polynomial { terms: Vec<Monomial> },
    /// `a sin(bx x) cos(by y)`.
    SinCos { a: f64, bx: f64, by: f64 },
    Sum { parts: Vec<RegularPart> },
}

fn pow(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

impl RegularPart {
    pub fn polynomial(terms: &[(f64, u32, u32)]) -> Self {
        RegularPart::Polynomial {
            terms: terms.iter().map(|&(c, i, j)| Monomial { c, i, j }).collect(),
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        match self {
            RegularPart::Zero => 0.0,
            RegularPart::Polynomial { terms } => terms
                .iter()
                .map(|m| m.c * pow(x[0], m.i) * pow(x[1], m.j))
                .sum(),
            RegularPart::SinCos { a, bx, by } => a * (bx * x[0]).sin() * (by * x[1]).cos(),
            RegularPart::Sum { parts } => parts.iter().map(|p| p.eval(x)).sum(),
        }
    }

    pub fn grad(&self, x: Point) -> [f64; 2] {
        match self {
            RegularPart::Zero => [0.0, 0.0],
            RegularPart::Polynomial { terms } => terms.iter().fold([0.0, 0.0], |g, m| {
                let dx = if m.i > 0 {
                    m.c * m.i as f64 * pow(x[0], m.i - 1) * pow(x[1], m.j)
                } else {
                    0.0
                };
                let dy = if m.j > 0 {
                    m.c * m.j as f64 * pow(x[0], m.i) * pow(x[1], m.j - 1)
                } else {
                    0.0
                };
                [g[0] + dx, g[1] + dy]
            }),
            RegularPart::SinCos { a, bx, by } => [
                a * bx * (bx * x[0]).cos() * (by * x[1]).cos(),
                -a * by * (bx * x[0]).sin() * (by * x[1]).sin(),
            ],
            RegularPart::Sum { parts } => parts.iter().fold([0.0, 0.0], |g, p| {
                let h = p.grad(x);
                [g[0] + h[0], g[1] + h[1]]
            }),
        }
    }
}

/// `u = u₀ + Σ uᵢ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Problem {
    pub regular: RegularPart,
    pub terms: Vec<SingularTerm>,
}

impl Problem {
    pub fn new(regular: RegularPart, terms: Vec<SingularTerm>) -> Self {
        Self { regular, terms }
    }

    pub fn singular_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for t in &self.terms {
            if !out.contains(&t.center) {
                out.push(t.center);
            }
        }
        out
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.regular.eval(x) + self.singular_eval(x)
    }

    pub fn singular_eval(&self, x: Point) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn singular_grad(&self, x: Point) -> Result<[f64; 2]> {
        let mut g = [0.0, 0.0];
        for t in &self.terms {
            let h = t.grad(x)?;
            g[0] += h[0];
            g[1] += h[1];
        }
        Ok(g)
    }

    pub fn grad(&self, x: Point) -> Result<[f64; 2]> {
        let s = self.singular_grad(x)?;
        let r = self.regular.grad(x);
        Ok([s[0] + r[0], s[1] + r[1]])
    }
}
