//! Closed-form SU(2) kernels for single spin-1/2 evolutions.
//!
//! An element is stored as the unit quaternion `(w, v)` with
//! `U = w·1 − i v·σ`. A spin in the field `h` (Hamiltonian `h·I`, `I = σ/2`)
//! evolves as `exp(−i t h·σ/2) = cos(|h|t/2) − i sin(|h|t/2) ĥ·σ`.

use num_complex::Complex64;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2 {
    pub w: f64,
    pub v: Vec3,
}

impl Su2 {
    pub const IDENTITY: Su2 = Su2 { w: 1.0, v: [0.0; 3] };

    /// `exp(−i t h·σ/2)`.
    pub fn evolution(h: Vec3, t: f64) -> Su2 {
        let mag = norm(h);
        if mag == 0.0 {
            return Su2::IDENTITY;
        }
        let (s, c) = (0.5 * mag * t).sin_cos();
        let k = s / mag;
        Su2 { w: c, v: [k * h[0], k * h[1], k * h[2]] }
    }

    pub fn adjoint(self) -> Su2 {
        Su2 { w: self.w, v: [-self.v[0], -self.v[1], -self.v[2]] }
    }

    /// Product `self · rhs`.
    #[inline]
    pub fn compose(self, rhs: Su2) -> Su2 {
        // (a − i u·σ)(b − i v·σ) = ab − u·v − i(a v + b u + u × v)·σ
        let c = cross(self.v, rhs.v);
        Su2 {
            w: self.w * rhs.w - dot(self.v, rhs.v),
            v: [
                self.w * rhs.v[0] + rhs.w * self.v[0] + c[0],
                self.w * rhs.v[1] + rhs.w * self.v[1] + c[1],
                self.w * rhs.v[2] + rhs.w * self.v[2] + c[2],
            ],
        }
    }

    /// Bloch vector of `U ½(1 + n·σ) U†`.
    pub fn rotate(self, n: Vec3) -> Vec3 {
        // Rotation by angle 2·acos(w) about v: n + 2w(v × n) + 2 v × (v × n).
        let vn = cross(self.v, n);
        let vvn = cross(self.v, vn);
        [
            n[0] + 2.0 * (self.w * vn[0] + vvn[0]),
            n[1] + 2.0 * (self.w * vn[1] + vvn[1]),
            n[2] + 2.0 * (self.w * vn[2] + vvn[2]),
        ]
    }

    /// `Tr(U ½(1 + p n·σ)) = w − i p v·n`.
    #[inline]
    pub fn trace_with_state(self, p: f64, n: Vec3) -> Complex64 {
        Complex64::new(self.w, -p * dot(self.v, n))
    }

    pub fn to_matrix(self) -> [[Complex64; 2]; 2] {
        let [x, y, z] = self.v;
        [
            [Complex64::new(self.w, -z), Complex64::new(-y, -x)],
            [Complex64::new(y, -x), Complex64::new(self.w, z)],
        ]
    }
}
