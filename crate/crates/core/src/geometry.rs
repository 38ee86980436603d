//! Pointwise geometry of the double-null gauge.
//!
//! With `g = e^ψ (du⊗dv + dv⊗du)` the only nonzero metric component is
//! `g_uv = e^ψ`, the only nonzero Christoffel symbols are `Γ^u_uu = ψ_u` and
//! `Γ^v_vv = ψ_v`, and for `k = λ du⊗du + ν dv⊗dv` the Gauss equation gives
//! `R_uvuv = λν`.
//!
//! Curvature sign: sectional curvature `K = Riem(X,Y,X,Y)/(g(X,X)g(Y,Y) − g(X,Y)²)`
//! with `Riem` in the convention `Riem(X,Y)Z = ∇_{[X,Y]}Z − [∇_X, ∇_Y]Z`,
//! for which `R_abcd = k_ac k_bd − k_ad k_bc`. On `(∂_u, ∂_v)` this is
//! `K = λν / (0 − e^{2ψ}) = −e^{−2ψ} λν`, equivalently `K = −e^{−ψ} ψ_uv`.

use alloc::vec::Vec;

use crate::lattice::Field2D;
use crate::{Error, Result};

/// `ψ` and its null derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConformalFactorPoint {
    pub psi: f64,
    pub psi_u: f64,
    pub psi_v: f64,
}

/// Null components of the second fundamental form at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SffPoint {
    pub lambda: f64,
    pub nu: f64,
}

/// Null coordinate label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Null {
    U,
    V,
}

/// Christoffel symbols of `e^ψ (du⊗dv + dv⊗du)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffels {
    /// `Γ^u_{uu}`
    pub u_uu: f64,
    /// `Γ^v_{vv}`
    pub v_vv: f64,
}

impl Christoffels {
    /// `Γ^upper_{a b}`; every component other than `Γ^u_uu`, `Γ^v_vv` is zero.
    pub fn get(&self, upper: Null, a: Null, b: Null) -> f64 {
        match (upper, a, b) {
            (Null::U, Null::U, Null::U) => self.u_uu,
            (Null::V, Null::V, Null::V) => self.v_vv,
            _ => 0.0,
        }
    }
}

/// `g(∂_u, ∂_v) = e^ψ`. `g_uu = g_vv = 0`.
pub fn metric_component(psi: f64) -> f64 {
    libm::exp(psi)
}

/// `g^{uv} = e^{−ψ}`.
pub fn inverse_metric_component(psi: f64) -> f64 {
    libm::exp(-psi)
}

pub fn christoffels(p: ConformalFactorPoint) -> Christoffels {
    Christoffels { u_uu: p.psi_u, v_vv: p.psi_v }
}

/// `Riem(L, N, L, N) = e^{−4ψ} λν` for the null frame `L = ∇u`, `N = ∇v`.
pub fn riem_lnln(psi: f64, s: SffPoint) -> f64 {
    libm::exp(-4.0 * psi) * s.lambda * s.nu
}

/// Gaussian curvature `K = −e^{−2ψ} λν` (sign convention in the module docs).
pub fn gaussian_curvature(psi: f64, s: SffPoint) -> f64 {
    let prod = s.lambda * s.nu;
    if prod == 0.0 {
        return 0.0;
    }
    -libm::exp(-2.0 * psi) * prod
}

/// Curvature from `ψ` alone: `K = −e^{−ψ} (ψ_rr − ψ_tt)`.
pub fn gaussian_curvature_from_wave(psi: f64, psi_rr_minus_tt: f64) -> f64 {
    -libm::exp(-psi) * psi_rr_minus_tt
}

/// Discrete residual of `ψ_rr − ψ_tt = e^{−ψ} λν` on the interior nodes.
///
/// `source` holds `λν` on the same lattice as `psi`. The result lives on the
/// lattice with one node trimmed from every side.
pub fn psi_wave_residual(psi: &Field2D, source: &Field2D) -> Result<Field2D> {
    if !psi.same_shape(source) {
        return Err(Error::InvalidInput("psi and source lattices differ in shape".into()));
    }
    let nr = psi.r_grid().count();
    let nt = psi.levels();
    if nr < 3 || nt < 3 {
        return Err(Error::InvalidInput(alloc::format!("residual needs at least a 3x3 lattice, got {nt}x{nr}")));
    }
    let h = psi.r_grid().spacing();
    let dt = psi.dt();
    let mut out = Vec::with_capacity((nt - 2) * (nr - 2));
    for n in 1..nt - 1 {
        let (prev, cur, next) = (psi.row(n - 1), psi.row(n), psi.row(n + 1));
        let src = source.row(n);
        for j in 1..nr - 1 {
            let rr = (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) / (h * h);
            let tt = (next[j] - 2.0 * cur[j] + prev[j]) / (dt * dt);
            out.push(rr - tt - libm::exp(-cur[j]) * src[j]);
        }
    }
    let inner = crate::fields::GridSpec1D::new(psi.r_grid().coord(1), h, nr - 2)?;
    Field2D::new(inner, psi.t(1), dt, nt - 2, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec1D;
    use proptest::prelude::*;

    /// Christoffel symbols of a 2D metric by the textbook formula, with the
    /// metric derivatives taken by central differences.
    fn christoffel_oracle(g: impl Fn(f64, f64) -> [[f64; 2]; 2], x: [f64; 2]) -> [[[f64; 2]; 2]; 2] {
        let d = 1e-5;
        let dg = |k: usize| {
            let mut xp = x;
            let mut xm = x;
            xp[k] += d;
            xm[k] -= d;
            let (gp, gm) = (g(xp[0], xp[1]), g(xm[0], xm[1]));
            let mut out = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] = (gp[a][b] - gm[a][b]) / (2.0 * d);
                }
            }
            out
        };
        let dgs = [dg(0), dg(1)];
        let m = g(x[0], x[1]);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let mut s = 0.0;
                    for dd in 0..2 {
                        s += 0.5 * inv[a][dd] * (dgs[b][dd][c] + dgs[c][dd][b] - dgs[dd][b][c]);
                    }
                    gamma[a][b][c] = s;
                }
            }
        }
        gamma
    }

    fn null_metric(psi: impl Fn(f64, f64) -> f64) -> impl Fn(f64, f64) -> [[f64; 2]; 2] {
        move |u, v| {
            let e = libm::exp(psi(u, v));
            [[0.0, e], [e, 0.0]]
        }
    }

    #[test]
    fn metric_values() {
        assert_eq!(metric_component(0.0), 1.0);
        assert!((metric_component(core::f64::consts::LN_2) - 2.0).abs() < 1e-15);
        assert!((metric_component(0.1) - 1.105170918).abs() < 1e-9);
        assert_eq!(inverse_metric_component(0.0), 1.0);
        assert!((inverse_metric_component(core::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        assert!((metric_component(0.37) * inverse_metric_component(0.37) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn christoffels_match_textbook_formula() {
        let c = christoffels(ConformalFactorPoint { psi: 0.0, psi_u: 0.0, psi_v: 0.0 });
        assert_eq!((c.u_uu, c.v_vv), (0.0, 0.0));

        // ψ with ψ_u = 0.3, ψ_v = −0.2 at the origin.
        let psi = |u: f64, v: f64| 0.3 * u - 0.2 * v + 0.05 * u * v;
        let oracle = christoffel_oracle(null_metric(psi), [0.0, 0.0]);
        let c = christoffels(ConformalFactorPoint { psi: 0.0, psi_u: 0.3, psi_v: -0.2 });
        let idx = [Null::U, Null::V];
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    let got = c.get(idx[a], idx[b], idx[cc]);
                    assert!((got - oracle[a][b][cc]).abs() < 1e-9, "Γ^{a}_{b}{cc}");
                }
            }
        }
        assert!((c.u_uu - 0.3).abs() < 1e-15 && (c.v_vv + 0.2).abs() < 1e-15);

        // ψ = u ⇒ Γ^u_uu = 1 everywhere.
        for &(u, v) in &[(0.0, 0.0), (1.3, -0.4), (-2.0, 5.0)] {
            let o = christoffel_oracle(null_metric(|u, _| u), [u, v]);
            assert!((o[0][0][0] - 1.0).abs() < 1e-9);
            assert!(o[1][1][1].abs() < 1e-9);
        }
    }

    #[test]
    fn riemann_and_curvature_values() {
        assert_eq!(riem_lnln(0.3, SffPoint { lambda: 0.0, nu: 4.0 }), 0.0);
        assert_eq!(riem_lnln(0.0, SffPoint { lambda: 1.0, nu: 1.0 }), 1.0);
        let r = riem_lnln(0.25, SffPoint { lambda: 0.2, nu: -0.1 });
        assert!((r + 0.0073575888234288).abs() < 1e-12);
        assert_eq!(gaussian_curvature(1.0, SffPoint { lambda: 0.0, nu: 3.0 }), 0.0);
        assert_eq!(gaussian_curvature(0.0, SffPoint { lambda: 1.0, nu: 1.0 }), -1.0);
    }

    /// Independent curvature: Riemann tensor from finite differences of the
    /// Christoffel oracle, `K = g(R(∂_u,∂_v)∂_v, ∂_u) / det g`.
    #[test]
    fn gaussian_curvature_sign_matches_metric_curvature() {
        let psi = |u: f64, v: f64| 0.2 + 0.3 * libm::sin(u) * libm::cos(0.7 * v) + 0.1 * u * v;
        let metric = null_metric(psi);
        let x = [0.4, -0.3];
        let d = 1e-4;
        let gam = |u: f64, v: f64| christoffel_oracle(&metric, [u, v]);
        let dgam = |k: usize| {
            let (mut xp, mut xm) = (x, x);
            xp[k] += d;
            xm[k] -= d;
            let (p, m) = (gam(xp[0], xp[1]), gam(xm[0], xm[1]));
            let mut out = [[[0.0; 2]; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        out[a][b][c] = (p[a][b][c] - m[a][b][c]) / (2.0 * d);
                    }
                }
            }
            out
        };
        let g0 = gam(x[0], x[1]);
        let dg = [dgam(0), dgam(1)];
        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
        let riem = |a: usize, b: usize, c: usize, dd: usize| {
            let mut s = dg[c][a][dd][b] - dg[dd][a][c][b];
            for e in 0..2 {
                s += g0[a][c][e] * g0[e][dd][b] - g0[a][dd][e] * g0[e][c][b];
            }
            s
        };
        let m = metric(x[0], x[1]);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let mut num = 0.0;
        for a in 0..2 {
            num += m[0][a] * riem(a, 1, 0, 1);
        }
        let k_oracle = num / det;

        // λν from the wave equation: ψ_uv = e^{−ψ} λν.
        let e = 1e-4;
        let psi_uv = (psi(x[0] + e, x[1] + e) - psi(x[0] + e, x[1] - e) - psi(x[0] - e, x[1] + e)
            + psi(x[0] - e, x[1] - e))
            / (4.0 * e * e);
        let p = psi(x[0], x[1]);
        let lambda_nu = libm::exp(p) * psi_uv;
        let k = gaussian_curvature(p, SffPoint { lambda: lambda_nu, nu: 1.0 });
        assert!((k - k_oracle).abs() < 1e-5, "{k} vs {k_oracle}");
        assert!(k_oracle.abs() > 1e-3);
    }

    #[test]
    fn residual_rejects_bad_shapes() {
        let g = GridSpec1D::new(0.0, 0.1, 5).unwrap();
        let a = Field2D::from_fn(g, 0.0, 0.1, 4, |_, _| 0.0).unwrap();
        let b = Field2D::from_fn(g, 0.0, 0.1, 3, |_, _| 0.0).unwrap();
        assert!(matches!(psi_wave_residual(&a, &b), Err(Error::InvalidInput(_))));
        let g2 = GridSpec1D::new(0.0, 0.1, 2).unwrap();
        let c = Field2D::from_fn(g2, 0.0, 0.1, 4, |_, _| 0.0).unwrap();
        assert!(psi_wave_residual(&c, &c).is_err());
    }

    #[test]
    fn residual_of_constant_is_zero() {
        let g = GridSpec1D::new(-1.0, 0.1, 21).unwrap();
        let psi = Field2D::from_fn(g, 0.0, 0.05, 10, |_, _| 0.7).unwrap();
        let src = Field2D::from_fn(g, 0.0, 0.05, 10, |_, _| 0.0).unwrap();
        assert_eq!(psi_wave_residual(&psi, &src).unwrap().sup_abs(), 0.0);
    }

    fn residual_sup(h: f64, psi: impl Fn(f64, f64) -> f64, lnu: impl Fn(f64, f64) -> f64) -> f64 {
        // dt = h/2 so that the stencil does not annihilate travelling waves.
        let dt = 0.5 * h;
        let g = GridSpec1D::covering(-2.0, 2.0, h).unwrap();
        let levels = libm::round(1.0 / dt) as usize + 1;
        let p = Field2D::from_fn(g, 0.0, dt, levels, &psi).unwrap();
        let s = Field2D::from_fn(g, 0.0, dt, levels, &lnu).unwrap();
        psi_wave_residual(&p, &s).unwrap().sup_abs()
    }

    #[test]
    fn residual_of_free_wave_converges_at_second_order() {
        let f = |t: f64, r: f64| libm::exp(-(r - t) * (r - t));
        let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| residual_sup(h, f, |_, _| 0.0)).collect();
        for w in e.windows(2) {
            let order = libm::log2(w[0] / w[1]);
            assert!((1.9..=2.1).contains(&order), "{e:?}");
        }
    }

    #[test]
    fn manufactured_residual_converges_at_second_order() {
        // ψ = 0.1 sin r cos 2t ⇒ ψ_rr − ψ_tt = 0.3 sin r cos 2t, and the
        // source is λν = e^ψ (ψ_rr − ψ_tt).
        let psi = |t: f64, r: f64| 0.1 * libm::sin(r) * libm::cos(2.0 * t);
        let src = move |t: f64, r: f64| libm::exp(psi(t, r)) * 0.3 * libm::sin(r) * libm::cos(2.0 * t);
        let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| residual_sup(h, psi, src)).collect();
        for w in e.windows(2) {
            let order = libm::log2(w[0] / w[1]);
            assert!((1.9..=2.1).contains(&order), "{e:?}");
        }
    }

    proptest! {
        #[test]
        fn metric_times_inverse_is_one(psi in -30.0f64..30.0) {
            prop_assert!((metric_component(psi) * inverse_metric_component(psi) - 1.0).abs() < 1e-14);
        }

        #[test]
        fn riem_is_bilinear(psi in -3.0f64..3.0, l in -2.0f64..2.0, n in -2.0f64..2.0, a in -4.0f64..4.0) {
            let base = riem_lnln(psi, SffPoint { lambda: l, nu: n });
            let scaled = riem_lnln(psi, SffPoint { lambda: a * l, nu: n });
            prop_assert!((scaled - a * base).abs() <= 1e-12 * (1.0 + base.abs() * a.abs()));
        }

        #[test]
        fn curvature_vanishes_with_either_factor(psi in -3.0f64..3.0, x in -2.0f64..2.0) {
            prop_assert_eq!(gaussian_curvature(psi, SffPoint { lambda: 0.0, nu: x }), 0.0);
            prop_assert_eq!(gaussian_curvature(psi, SffPoint { lambda: x, nu: 0.0 }), 0.0);
        }

        #[test]
        fn christoffels_zero_iff_flat(pu in -1.0f64..1.0, pv in -1.0f64..1.0) {
            let c = christoffels(ConformalFactorPoint { psi: 0.0, psi_u: pu, psi_v: pv });
            prop_assert_eq!(c.u_uu == 0.0 && c.v_vv == 0.0, pu == 0.0 && pv == 0.0);
        }
    }
}
