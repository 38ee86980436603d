//! Test oracles that do not go through the library's numerics.
#![allow(dead_code)]

/// Minkowski inner product on ℝ^{1,2}.
pub fn mdot(a: [f64; 3], b: [f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(s: f64, a: [f64; 3]) -> [f64; 3] {
    [s * a[0], s * a[1], s * a[2]]
}

/// Five-point central difference.
pub fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Composite 5-point Gauss–Legendre quadrature on [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 5] =
        [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    if a == b {
        return 0.0;
    }
    let panels = ((b - a).abs() / 0.05).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let c = a + (k as f64 + 0.5) * w;
        for i in 0..5 {
            s += W[i] * f(c + 0.5 * w * X[i]);
        }
    }
    0.5 * w * s
}

/// An exact timelike minimal surface `X(u, v) = α(u) + β(v)` built from two
/// null curves, in the gauge `u = v = x/2` on `{x⁰ = 0}`:
///
/// `α'(u) = a(u)(1, cos θ(u), sin θ(u))`, `β'(v) = a(v)(−1, cos χ(v), sin χ(v))`,
/// `a = 2/(cos θ + cos χ)`. Then `α⁰(s) + β⁰(s) = 0` and
/// `α¹(s) + β¹(s) = 2s`, so the diagonal is the graph slice with `r = x`.
#[derive(Clone, Copy)]
pub struct NullCurveSurface {
    pub amp_theta: f64,
    pub amp_chi: f64,
}

impl NullCurveSurface {
    pub fn theta(&self, s: f64) -> f64 {
        self.amp_theta * (-(s - 0.3) * (s - 0.3) / 0.5).exp()
    }

    pub fn chi(&self, s: f64) -> f64 {
        self.amp_chi * (-(s + 0.4) * (s + 0.4) / 0.3).exp()
    }

    pub fn a(&self, s: f64) -> f64 {
        2.0 / (self.theta(s).cos() + self.chi(s).cos())
    }

    pub fn alpha_prime(&self, u: f64) -> [f64; 3] {
        let (a, th) = (self.a(u), self.theta(u));
        [a, a * th.cos(), a * th.sin()]
    }

    pub fn beta_prime(&self, v: f64) -> [f64; 3] {
        let (a, ch) = (self.a(v), self.chi(v));
        [-a, a * ch.cos(), a * ch.sin()]
    }

    fn curve(&self, f: impl Fn(f64) -> [f64; 3], s: f64) -> [f64; 3] {
        [integrate(|x| f(x)[0], 0.0, s), integrate(|x| f(x)[1], 0.0, s), integrate(|x| f(x)[2], 0.0, s)]
    }

    pub fn alpha(&self, u: f64) -> [f64; 3] {
        self.curve(|x| self.alpha_prime(x), u)
    }

    pub fn beta(&self, v: f64) -> [f64; 3] {
        self.curve(|x| self.beta_prime(x), v)
    }

    pub fn x(&self, u: f64, v: f64) -> [f64; 3] {
        add(self.alpha(u), self.beta(v))
    }

    pub fn psi(&self, u: f64, v: f64) -> f64 {
        (self.a(u) * self.a(v) * (1.0 + (self.theta(u) - self.chi(v)).cos())).ln()
    }

    pub fn normal(&self, u: f64, v: f64) -> [f64; 3] {
        let (p, q) = (self.alpha_prime(u), self.beta_prime(v));
        let c = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
        let n = [-c[0], c[1], c[2]];
        scale(1.0 / mdot(n, n).sqrt(), n)
    }

    /// `λ(u) = ⟨α''(u), n⟩`.
    pub fn lambda(&self, u: f64) -> f64 {
        let h = 1e-3;
        let app = [0, 1, 2].map(|k| d5(|x| self.alpha_prime(x)[k], u, h));
        mdot(app, self.normal(u, u))
    }

    /// `ν(v) = ⟨β''(v), n⟩`.
    pub fn nu(&self, v: f64) -> f64 {
        let h = 1e-3;
        let bpp = [0, 1, 2].map(|k| d5(|x| self.beta_prime(x)[k], v, h));
        mdot(bpp, self.normal(v, v))
    }

    pub fn psi_u(&self, u: f64, v: f64) -> f64 {
        d5(|x| self.psi(x, v), u, 1e-3)
    }

    pub fn psi_v(&self, u: f64, v: f64) -> f64 {
        d5(|x| self.psi(u, x), v, 1e-3)
    }

    /// ψ as a function of the evolution coordinates.
    pub fn psi_tr(&self, t: f64, r: f64) -> f64 {
        self.psi(0.5 * (r + t), 0.5 * (r - t))
    }

    pub fn lambda0(&self, r: f64) -> f64 {
        self.lambda(0.5 * r)
    }

    pub fn nu0(&self, r: f64) -> f64 {
        self.nu(0.5 * r)
    }

    pub fn psi0(&self, r: f64) -> f64 {
        self.psi(0.5 * r, 0.5 * r)
    }

    /// `∂_t ψ = ½(ψ_u − ψ_v)` on the slice.
    pub fn psi1(&self, r: f64) -> f64 {
        let s = 0.5 * r;
        0.5 * (self.psi_u(s, s) - self.psi_v(s, s))
    }

    /// Graph height on the slice.
    pub fn phi0(&self, x: f64) -> f64 {
        let s = 0.5 * x;
        self.alpha(s)[2] + self.beta(s)[2]
    }

    /// `∂_T φ` on the slice, from tangency of `α'` and `β'` to the graph.
    pub fn phi1(&self, x: f64) -> f64 {
        let s = 0.5 * x;
        let (th, ch) = (self.theta(s), self.chi(s));
        (th - ch).sin() / (th.cos() + ch.cos())
    }

    /// Graph height `φ(T, x)` by Newton inversion of `(u, v) ↦ (X⁰, X¹)`.
    pub fn phi(&self, t: f64, x: f64) -> f64 {
        let (mut u, mut v) = (0.5 * (x + t), 0.5 * (x - t));
        for _ in 0..50 {
            let p = self.x(u, v);
            let (fu, fv) = (self.alpha_prime(u), self.beta_prime(v));
            let (r0, r1) = (p[0] - t, p[1] - x);
            let det = fu[0] * fv[1] - fv[0] * fu[1];
            let du = (r0 * fv[1] - fv[0] * r1) / det;
            let dv = (fu[0] * r1 - r0 * fu[1]) / det;
            u -= du;
            v -= dv;
            if du.abs() + dv.abs() < 1e-15 {
                break;
            }
        }
        self.x(u, v)[2]
    }
}

/// Observed order from errors at successively halved steps.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
