//! Quadrature rules on the reference triangle and on the unit interval.
//!
//! Triangle rules are given in barycentric coordinates with weights that sum
//! to one, so a physical integral is `area * sum(w * f(x))`.

use std::f64::consts::PI;

/// Gauss-Legendre rule on `[0, 1]` with weights summing to one.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// Rule with `n` points, exact for polynomials of degree `2n - 1`.
    pub fn gauss(n: usize) -> Self {
        assert!(n >= 1);
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for k in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[k] = 0.5 * (1.0 - x);
            points[n - 1 - k] = 0.5 * (1.0 + x);
            weights[k] = 0.5 * w;
            weights[n - 1 - k] = 0.5 * w;
        }
        Self { points, weights }
    }

    /// Smallest Gauss rule exact for the given polynomial degree.
    pub fn of_degree(degree: usize) -> Self {
        Self::gauss(degree / 2 + 1)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Symmetric quadrature on a triangle in barycentric coordinates.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// A rule exact for polynomials up to `degree`.
    ///
    /// Degrees 1, 2, 4 and 5 use the classical symmetric (Dunavant) rules;
    /// other degrees fall back to a collapsed Gauss product rule.
    pub fn of_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self {
                points: vec![[1.0 / 3.0; 3]],
                weights: vec![1.0],
                degree: 1,
            },
            2 => {
                let a = 1.0 / 6.0;
                let b = 2.0 / 3.0;
                Self {
                    points: vec![[b, a, a], [a, b, a], [a, a, b]],
                    weights: vec![1.0 / 3.0; 3],
                    degree: 2,
                }
            }
            3 | 4 => {
                let mut rule = Self {
                    points: Vec::new(),
                    weights: Vec::new(),
                    degree: 4,
                };
                rule.push_orbit(0.445_948_490_915_965, 0.223_381_589_678_011);
                rule.push_orbit(0.091_576_213_509_771, 0.109_951_743_655_322);
                rule
            }
            5 => {
                let mut rule = Self {
                    points: vec![[1.0 / 3.0; 3]],
                    weights: vec![0.225],
                    degree: 5,
                };
                rule.push_orbit(0.470_142_064_105_115, 0.132_394_152_788_506);
                rule.push_orbit(0.101_286_507_323_456, 0.125_939_180_544_827);
                rule
            }
            _ => Self::collapsed(degree),
        }
    }

    fn push_orbit(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[b, a, a], [a, b, a], [a, a, b]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    /// Duffy-collapsed tensor Gauss rule.
    fn collapsed(degree: usize) -> Self {
        let line = LineRule::of_degree(degree + 1);
        let mut points = Vec::with_capacity(line.points.len().pow(2));
        let mut weights = Vec::with_capacity(points.capacity());
        for (&s, &ws) in line.points.iter().zip(&line.weights) {
            for (&t, &wt) in line.points.iter().zip(&line.weights) {
                // (s, t) in the unit square -> (l1, l2) = (s, (1 - s) t)
                let l1 = s;
                let l2 = (1.0 - s) * t;
                points.push([1.0 - l1 - l2, l1, l2]);
                // Jacobian (1 - s), times 2 because the reference area is 1/2.
                weights.push(2.0 * ws * wt * (1.0 - s));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical quadrature point for barycentric coordinates `l` on the
    /// triangle with corners `p`.
    #[inline]
    pub fn map(p: &[[f64; 2]; 3], l: &[f64; 3]) -> [f64; 2] {
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // Exact integral of x^i y^j over the reference triangle (0,0),(1,0),(0,1).
    fn monomial_exact(i: u32, j: u32) -> f64 {
        factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    #[test]
    fn triangle_rules_integrate_monomials_exactly() {
        for degree in 1..=9 {
            let rule = TriangleRule::of_degree(degree);
            let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "degree {degree}: {total}");
            for i in 0..=degree as u32 {
                for j in 0..=(degree as u32 - i) {
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(l, w)| {
                            let x = TriangleRule::map(&corners, l);
                            w * x[0].powi(i as i32) * x[1].powi(j as i32)
                        })
                        .sum::<f64>()
                        * 0.5;
                    let exact = monomial_exact(i, j);
                    assert!(
                        (approx - exact).abs() < 1e-13,
                        "degree {degree} monomial x^{i} y^{j}: {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in 1..=8 {
            let rule = LineRule::gauss(n);
            for p in 0..(2 * n) {
                let approx: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(p as i32))
                    .sum();
                let exact = 1.0 / (p as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }
}
