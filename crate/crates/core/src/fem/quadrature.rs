use crate::error::{Error, Result};

/// Quadrature on the reference simplex (unit right triangle or tetrahedron).
///
/// Points are stored with three coordinates; the third is zero in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Iterator over `(xi, eta, weight)` for triangle rules.
    pub fn triangle_points(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().zip(&self.weights).map(|(p, &w)| ([p[0], p[1]], w))
    }
}

fn tri_orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, ws: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a], [b, a], [a, b]] {
        pts.push([p[0], p[1], 0.0]);
        ws.push(w);
    }
}

/// Rule exact for polynomials up to `degree` (1..=4) on the reference simplex.
pub fn quadrature_rule(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if !(1..=4).contains(&degree) {
        return Err(Error::Parameter(format!("unsupported quadrature degree {degree}")));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match (dim, degree) {
        (2, 1) => {
            points.push([1.0 / 3.0, 1.0 / 3.0, 0.0]);
            weights.push(0.5);
        }
        (2, 2) => tri_orbit3(1.0 / 6.0, 1.0 / 6.0, &mut points, &mut weights),
        (2, 3) | (2, 4) => {
            // Dunavant 6-point, degree 4
            tri_orbit3(0.445_948_490_915_965, 0.223_381_589_678_011 / 2.0, &mut points, &mut weights);
            tri_orbit3(0.091_576_213_509_771, 0.109_951_743_655_322 / 2.0, &mut points, &mut weights);
        }
        (3, 1) => {
            points.push([0.25, 0.25, 0.25]);
            weights.push(1.0 / 6.0);
        }
        (3, 2) => {
            let a = (5.0 - 5.0_f64.sqrt()) / 20.0;
            let b = 1.0 - 3.0 * a;
            for p in [[a, a, a], [b, a, a], [a, b, a], [a, a, b]] {
                points.push(p);
                weights.push(1.0 / 24.0);
            }
        }
        (3, 3) | (3, 4) => {
            // Keast 11-point, degree 4
            points.push([0.25, 0.25, 0.25]);
            weights.push(-74.0 / 5625.0);
            let (a, b) = (1.0 / 14.0, 11.0 / 14.0);
            for p in [[a, a, a], [b, a, a], [a, b, a], [a, a, b]] {
                points.push(p);
                weights.push(343.0 / 45000.0);
            }
            let s = (5.0_f64 / 14.0).sqrt();
            let (c, d) = ((1.0 + s) / 4.0, (1.0 - s) / 4.0);
            for p in [[c, c, d], [c, d, c], [c, d, d], [d, c, c], [d, c, d], [d, d, c]] {
                points.push(p);
                weights.push(56.0 / 2250.0);
            }
        }
        _ => return Err(Error::Parameter(format!("unsupported dimension {dim}"))),
    }
    Ok(QuadratureRule {
        dim,
        degree,
        points,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact monomial integrals over the reference simplices.
    fn exact(dim: usize, e: [u32; 3]) -> f64 {
        let num = factorial(e[0]) * factorial(e[1]) * factorial(e[2]);
        num / factorial(e[0] + e[1] + e[2] + dim as u32)
    }

    #[test]
    fn midpoint_triangle() {
        let q = quadrature_rule(2, 1).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.weights[0], 0.5);
    }

    #[test]
    fn tetrahedron_weights_sum_to_volume() {
        for d in 1..=4 {
            let q = quadrature_rule(3, d).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn monomials_integrated_exactly() {
        for dim in [2usize, 3] {
            for degree in 1..=4usize {
                let q = quadrature_rule(dim, degree).unwrap();
                for a in 0..=degree as u32 {
                    for b in 0..=(degree as u32 - a) {
                        let cmax = if dim == 3 { degree as u32 - a - b } else { 0 };
                        for c in 0..=cmax {
                            let approx: f64 = q
                                .points
                                .iter()
                                .zip(&q.weights)
                                .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                                .sum();
                            let ex = exact(dim, [a, b, c]);
                            assert!(
                                (approx - ex).abs() < 1e-14,
                                "dim {dim} degree {degree} monomial ({a},{b},{c}): {approx} vs {ex}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn degree_two_triangle_quadratics() {
        let q = quadrature_rule(2, 2).unwrap();
        let int = |f: &dyn Fn(f64, f64) -> f64| q.triangle_points().map(|(p, w)| w * f(p[0], p[1])).sum::<f64>();
        assert!((int(&|x, _| x * x) - 1.0 / 12.0).abs() < 1e-15);
        assert!((int(&|x, y| x * y) - 1.0 / 24.0).abs() < 1e-15);
        assert!((int(&|_, y| y * y) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degree() {
        assert!(quadrature_rule(2, 0).is_err());
        assert!(quadrature_rule(2, 5).is_err());
        assert!(quadrature_rule(4, 1).is_err());
    }
}
