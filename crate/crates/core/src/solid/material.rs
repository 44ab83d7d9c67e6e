//! Compressible neo-Hookean law and fiber-aligned active stress (2D).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::element::{det, inverse};
use crate::fem::Tensor2;

/// Fourth-order tangent `A[i][J][k][L] = ∂P_iJ / ∂F_kL`.
pub type Tangent = [[[[f64; 2]; 2]; 2]; 2];

const DIM: f64 = 2.0;

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn check_j(f: &Tensor2) -> Result<f64> {
    let j = det(f);
    if j > 0.0 && j.is_finite() {
        Ok(j)
    } else {
        Err(Error::InvertedElement {
            region: "solid",
            cell: usize::MAX,
            jacobian: j,
        })
    }
}

/// Stored energy `μ/2 (J^{-2/d} I₁ − d) + κ/2 (J − 1)²`.
pub fn neo_hooke_energy(f: &Tensor2, mu: f64, kappa: f64) -> Result<f64> {
    let j = check_j(f)?;
    let i1: f64 = f.iter().flatten().map(|v| v * v).sum();
    Ok(0.5 * mu * (j.powf(-2.0 / DIM) * i1 - DIM) + 0.5 * kappa * (j - 1.0).powi(2))
}

/// First Piola stress `μ J^{-2/d} (F − I₁/d F^{-T}) + κ (J − 1) J F^{-T}`.
pub fn passive_piola(f: &Tensor2, mu: f64, kappa: f64) -> Result<Tensor2> {
    Ok(passive_with_tangent(f, mu, kappa)?.0)
}

/// Passive stress and its exact derivative with respect to `F`.
pub fn passive_with_tangent(f: &Tensor2, mu: f64, kappa: f64) -> Result<(Tensor2, Tangent)> {
    let j = check_j(f)?;
    let fi = inverse(f);
    let i1: f64 = f.iter().flatten().map(|v| v * v).sum();
    let a = j.powf(-2.0 / DIM);
    let vol = kappa * (j - 1.0) * j;
    let mut p = [[0.0; 2]; 2];
    for i in 0..2 {
        for jj in 0..2 {
            // F^{-T}_{iJ} = Finv_{Ji}
            p[i][jj] = mu * a * (f[i][jj] - i1 / DIM * fi[jj][i]) + vol * fi[jj][i];
        }
    }
    let mut t = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let dev = -(2.0 / DIM) * a * fi[l][k] * (f[i][jj] - i1 / DIM * fi[jj][i])
                        + a * (delta(i, k) * delta(jj, l) - (2.0 * f[k][l] / DIM) * fi[jj][i]
                            + (i1 / DIM) * fi[jj][k] * fi[l][i]);
                    let volt = (2.0 * j - 1.0) * j * fi[l][k] * fi[jj][i] - (j * j - j) * fi[jj][k] * fi[l][i];
                    t[i][jj][k][l] = mu * dev + kappa * volt;
                }
            }
        }
    }
    Ok((p, t))
}

/// Activation `(A_max/2)(1 − cos(π t / T_max))`.
pub fn activation(t: f64, a_max: f64, t_max: f64) -> f64 {
    0.5 * a_max * (1.0 - (PI * t / t_max).cos())
}

/// Active stress `s (F f ⊗ f) / ‖F f‖` and its tangent; zero when `s = 0`.
pub fn active_with_tangent(f: &Tensor2, fiber: [f64; 2], s: f64) -> Result<(Tensor2, Tangent)> {
    let zero = ([[0.0; 2]; 2], [[[[0.0; 2]; 2]; 2]; 2]);
    if s == 0.0 {
        return Ok(zero);
    }
    let m = [f[0][0] * fiber[0] + f[0][1] * fiber[1], f[1][0] * fiber[0] + f[1][1] * fiber[1]];
    let n = m[0].hypot(m[1]);
    if !(n > 1e-12) {
        return Err(Error::DegenerateFiber { cell: usize::MAX });
    }
    let (mut p, mut t) = zero;
    for i in 0..2 {
        for jj in 0..2 {
            p[i][jj] = s * m[i] * fiber[jj] / n;
            for k in 0..2 {
                for l in 0..2 {
                    t[i][jj][k][l] =
                        s * fiber[jj] * (delta(i, k) * fiber[l] / n - m[i] * m[k] * fiber[l] / (n * n * n));
                }
            }
        }
    }
    Ok((p, t))
}

/// Active stress at reference position `y` (active only for `y ≤ 0`).
pub fn active_piola(f: &Tensor2, fiber: [f64; 2], t: f64, a_max: f64, t_max: f64, y: f64) -> Result<Tensor2> {
    let s = if y <= 0.0 { activation(t, a_max, t_max) } else { 0.0 };
    Ok(active_with_tangent(f, fiber, s)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::element::IDENTITY;
    use proptest::prelude::*;

    const MU: f64 = 5e3;
    const KAPPA: f64 = 5e4;

    fn perturbed(f: &Tensor2, k: usize, l: usize, h: f64) -> Tensor2 {
        let mut g = *f;
        g[k][l] += h;
        g
    }

    fn contract(t: &Tangent, e: &Tensor2) -> Tensor2 {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[i][j] += t[i][j][k][l] * e[k][l];
                    }
                }
            }
        }
        out
    }

    fn norm(t: &Tensor2) -> f64 {
        t.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn stress_free_reference() {
        assert_eq!(passive_piola(&IDENTITY, MU, KAPPA).unwrap(), [[0.0; 2]; 2]);
    }

    #[test]
    fn inverted_state_is_an_error() {
        assert!(passive_piola(&[[1.0, 0.0], [0.0, -0.5]], MU, KAPPA).is_err());
    }

    #[test]
    fn small_strain_matches_linearization() {
        let e = [[0.3, -0.7], [0.2, 0.5]];
        let (_, c) = passive_with_tangent(&IDENTITY, MU, KAPPA).unwrap();
        let lin = contract(&c, &e);
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let f = [[1.0 + eps * e[0][0], eps * e[0][1]], [eps * e[1][0], 1.0 + eps * e[1][1]]];
            let p = passive_piola(&f, MU, KAPPA).unwrap();
            let err = norm(&[[p[0][0] - eps * lin[0][0], p[0][1] - eps * lin[0][1]], [p[1][0] - eps * lin[1][0], p[1][1] - eps * lin[1][1]]]);
            assert!(err <= 10.0 * KAPPA * eps * eps, "eps {eps}: {err}");
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn small_rotation_is_second_order() {
        let th: f64 = 1e-3;
        let r = [[th.cos(), -th.sin()], [th.sin(), th.cos()]];
        let p = passive_piola(&r, MU, KAPPA).unwrap();
        assert!(norm(&p) <= 10.0 * KAPPA * th * th, "{}", norm(&p));
    }

    #[test]
    fn active_examples() {
        let f = [1.0, 0.0];
        assert_eq!(active_piola(&IDENTITY, f, 0.0, 5e3, 0.25, -1.0).unwrap(), [[0.0; 2]; 2]);
        let p = active_piola(&IDENTITY, [0.6, 0.8], 0.25, 5e3, 0.25, -1.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = 5e3 * [0.6, 0.8][i] * [0.6, 0.8][j];
                assert!((p[i][j] - e).abs() < 1e-9);
            }
        }
        assert_eq!(active_piola(&IDENTITY, [0.6, 0.8], 0.25, 5e3, 0.25, 0.01).unwrap(), [[0.0; 2]; 2]);
        assert!(matches!(
            active_piola(&[[0.0, 0.0], [0.0, 1.0]], f, 0.1, 5e3, 0.25, -1.0),
            Err(Error::DegenerateFiber { .. })
        ));
    }

    proptest! {
        #[test]
        fn stress_is_energy_gradient(a in -0.2f64..0.2, b in -0.2f64..0.2, c in -0.2f64..0.2, d in -0.2f64..0.2) {
            let f = [[1.0 + a, b], [c, 1.0 + d]];
            let p = passive_piola(&f, MU, KAPPA).unwrap();
            let h = 1e-6;
            for k in 0..2 {
                for l in 0..2 {
                    let fd = (neo_hooke_energy(&perturbed(&f, k, l, h), MU, KAPPA).unwrap()
                        - neo_hooke_energy(&perturbed(&f, k, l, -h), MU, KAPPA).unwrap()) / (2.0 * h);
                    prop_assert!((fd - p[k][l]).abs() <= 1e-6 * (norm(&p) + MU), "{} vs {}", fd, p[k][l]);
                }
            }
        }

        #[test]
        fn tangents_match_finite_differences(
            a in -0.2f64..0.2, b in -0.2f64..0.2, c in -0.2f64..0.2, d in -0.2f64..0.2, th in 0.0f64..6.28,
        ) {
            let f = [[1.0 + a, b], [c, 1.0 + d]];
            let fiber = [th.cos(), th.sin()];
            let h = 1e-6;
            let (_, tp) = passive_with_tangent(&f, MU, KAPPA).unwrap();
            let (_, ta) = active_with_tangent(&f, fiber, 3e3).unwrap();
            let scale = tp.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in 0..2 {
                for l in 0..2 {
                    let (pp, _) = passive_with_tangent(&perturbed(&f, k, l, h), MU, KAPPA).unwrap();
                    let (pm, _) = passive_with_tangent(&perturbed(&f, k, l, -h), MU, KAPPA).unwrap();
                    let (ap, _) = active_with_tangent(&perturbed(&f, k, l, h), fiber, 3e3).unwrap();
                    let (am, _) = active_with_tangent(&perturbed(&f, k, l, -h), fiber, 3e3).unwrap();
                    for i in 0..2 {
                        for j in 0..2 {
                            let fd = (pp[i][j] - pm[i][j]) / (2.0 * h);
                            prop_assert!((fd - tp[i][j][k][l]).abs() <= 1e-5 * scale);
                            let fda = (ap[i][j] - am[i][j]) / (2.0 * h);
                            prop_assert!((fda - ta[i][j][k][l]).abs() <= 1e-5 * 3e3 * 4.0);
                        }
                    }
                }
            }
        }
    }
}
