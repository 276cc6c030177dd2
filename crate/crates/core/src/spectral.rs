//! Characteristic-cubic analysis at an equilibrium.
//!
//! The cubic `λ³ + σ1 λ² + σ2 λ + σ3` is written as `λ³ + 3A1 λ² + 3A2 λ + A3`
//! and depressed by `λ = ρ − A1` to `ρ³ + 3Hρ + G = 0` with
//! `H = A2 − A1²`, `G = A3 − 3A1A2 + 2A1³`. With `Δ = G² + 4H³` and
//! `R = ∛(−G/2 + √Δ/2)`, the roots are
//!
//! ```text
//! λ1 = R − H/R − A1,   λ2 = Rω − (H/R)ω² − A1,   λ3 = Rω² − (H/R)ω − A1
//! ```
//!
//! where `ω = −1/2 + i√3/2`. A saddle focus with real eigenvalue `γ` and pair
//! `α ± iβ` meets the Sil'nikov conditions when `β ≠ 0`, `γα < 0` and
//! `|γ| > |α|`.

use num_complex::Complex;

use crate::scalar::Scalar;

/// Relative size below which `Δ` is treated as exactly zero.
pub const DEGENERATE_DELTA: f64 = 1e-12;

/// How the discriminant splits the roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootStructure {
    /// `Δ > 0`: one real root and a complex-conjugate pair.
    OneRealPair,
    /// `Δ ≈ 0`: a repeated real root.
    Repeated,
    /// `Δ < 0`: three distinct real roots.
    ThreeReal,
}

/// Cardano decomposition of a characteristic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicAnalysis<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub h: T,
    pub g: T,
    pub delta: T,
    /// Cube root `R`; complex only in the three-real-root case.
    pub r: Complex<T>,
    /// Real root first; then the pair with positive imaginary part first.
    /// Three real roots are sorted ascending.
    pub roots: [Complex<T>; 3],
    pub structure: RootStructure,
}

impl<T: Scalar> CubicAnalysis<T> {
    /// `λ³ + 3A1 λ² + 3A2 λ + A3` at `z`.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let three = T::lit(3.0);
        ((z + self.a1 * three) * z + self.a2 * three) * z + self.a3
    }

    /// Largest residual `|p(r)| / (1 + |r|³)` over the three roots.
    pub fn max_residual(&self) -> T {
        self.roots.iter().fold(T::zero(), |acc, &r| {
            let n = r.norm();
            acc.max(self.eval(r).norm() / (T::one() + n * n * n))
        })
    }

    pub fn max_real_part(&self) -> T {
        self.roots
            .iter()
            .fold(T::neg_infinity(), |acc, r| acc.max(r.re))
    }

    /// `H/R`; zero when `R` vanishes.
    pub fn h_over_r(&self) -> Complex<T> {
        if self.r.norm() == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(self.h, T::zero()) / self.r
        }
    }
}

/// Roots of `λ³ + σ1 λ² + σ2 λ + σ3` through the Cardano substitution.
pub fn cardano_roots<T: Scalar>(sigma1: T, sigma2: T, sigma3: T) -> CubicAnalysis<T> {
    let three = T::lit(3.0);
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let zero = T::zero();
    let a1 = sigma1 / three;
    let a2 = sigma2 / three;
    let a3 = sigma3;
    let h = a2 - a1 * a1;
    let g = a3 - three * a1 * a2 + two * a1 * a1 * a1;
    let h3 = h * h * h;
    let raw_delta = g * g + T::lit(4.0) * h3;
    let scale = (g * g).max((T::lit(4.0) * h3).abs());
    let degenerate = raw_delta.abs() <= T::lit(DEGENERATE_DELTA) * scale;
    let delta = if degenerate { zero } else { raw_delta };
    let sqrt3_2 = three.sqrt() * half;

    let mut out = CubicAnalysis {
        a1,
        a2,
        a3,
        h,
        g,
        delta: raw_delta,
        r: Complex::new(zero, zero),
        roots: [Complex::new(zero, zero); 3],
        structure: RootStructure::OneRealPair,
    };

    if delta < zero {
        // Three real roots: R is the principal cube root of a complex number
        // of modulus m³, so R − H/R = 2 Re R and the roots are 2m cos(θ/3 + 2πk/3).
        let m = (-h).sqrt();
        let theta = ((-delta).sqrt() * half).atan2(-g * half);
        out.r = Complex::from_polar(m, theta / three);
        let mut roots = [zero; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            let phi = theta / three + two * T::PI() * T::lit(k as f64) / three;
            *root = two * m * phi.cos() - a1;
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        out.roots = roots.map(|r| Complex::new(r, zero));
        out.structure = RootStructure::ThreeReal;
        polish(&mut out);
        return out;
    }

    // One real root (or a repeated one). Both −G/2 ± √Δ/2 are real and their
    // product is −H³; take the cube root of the larger one to avoid
    // cancellation and recover R = ∛(−G/2 + √Δ/2) from the product.
    let sq = delta.sqrt();
    let plus = -g * half + sq * half;
    let minus = -g * half - sq * half;
    let r = if plus.abs() >= minus.abs() {
        plus.cbrt()
    } else if h != zero {
        -h / minus.cbrt()
    } else {
        minus.cbrt()
    };
    out.r = Complex::new(r, zero);
    out.structure = if degenerate {
        RootStructure::Repeated
    } else {
        RootStructure::OneRealPair
    };
    if r == zero {
        // H = G = 0: triple root at −A1.
        out.roots = [Complex::new(-a1, zero); 3];
        out.structure = RootStructure::Repeated;
        return out;
    }
    let h_over_r = h / r;
    let real = r - h_over_r - a1;
    let pair_re = -(r - h_over_r) * half - a1;
    let pair_im = if degenerate {
        zero
    } else {
        (sqrt3_2 * (r + h_over_r)).abs()
    };
    out.roots = [
        Complex::new(real, zero),
        Complex::new(pair_re, pair_im),
        Complex::new(pair_re, -pair_im),
    ];
    polish(&mut out);
    out
}

/// One Newton correction per root when the Cardano value misses the residual
/// bound, keeping the pair exactly conjugate.
fn polish<T: Scalar>(a: &mut CubicAnalysis<T>) {
    let three = T::lit(3.0);
    let bound = T::lit(1e-8).max(T::epsilon() * T::lit(1e3));
    let deriv = |z: Complex<T>| (z * three + a.a1 * T::lit(6.0)) * z + a.a2 * three;
    let mut roots = a.roots;
    for slot in roots.iter_mut() {
        let r = *slot;
        let n = r.norm();
        let res = a.eval(r);
        if res.norm() / (T::one() + n * n * n) <= bound {
            continue;
        }
        let d = deriv(r);
        if d.norm() > T::zero() {
            let next = r - res / d;
            if a.eval(next).norm() < res.norm() {
                *slot = next;
            }
        }
    }
    if a.structure == RootStructure::OneRealPair {
        roots[0].im = T::zero();
        roots[2] = roots[1].conj();
    } else {
        for r in roots.iter_mut() {
            r.im = T::zero();
        }
    }
    a.roots = roots;
}

/// The three eigenvalue conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SilnikovConditions {
    pub beta_nonzero: bool,
    pub gamma_alpha_opposite: bool,
    pub gamma_dominates: bool,
}

/// The same conditions written in terms of `R`, `H` and `A1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpressionForm<T> {
    pub delta: T,
    pub delta_positive: bool,
    /// `R + H/R`, proportional to `β`.
    pub r_plus_h_over_r: T,
    pub r_plus_h_over_r_nonzero: bool,
    /// `|R − H/R − A1| − ½|R − H/R + 2A1|`, equal to `|γ| − |α|`.
    pub magnitude_gap: T,
    pub magnitude_gap_positive: bool,
    /// `R − H/R + 2A1`, equal to `−2α`.
    pub sign_branch: T,
    pub a3: T,
    /// `sign_branch > 0` when `A3 < 0`, or `sign_branch < 0` when `A3 > 0`.
    pub sign_branch_holds: bool,
}

impl<T: Scalar> ExpressionForm<T> {
    pub fn all_hold(&self) -> bool {
        self.delta_positive
            && self.r_plus_h_over_r_nonzero
            && self.magnitude_gap_positive
            && self.sign_branch_holds
    }
}

/// Saddle-focus chaos verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SilnikovVerdict<T> {
    pub gamma: T,
    pub alpha: T,
    pub beta: T,
    /// `None` when the spectrum has no complex pair.
    pub conditions: Option<SilnikovConditions>,
    /// `None` unless `Δ > 0`.
    pub expression: Option<ExpressionForm<T>>,
    /// Set when the discriminant is numerically zero.
    pub marginal: bool,
    pub chaotic: bool,
}

impl<T: Scalar> SilnikovVerdict<T> {
    /// Whether the eigenvalue and expression forms give the same answer.
    /// Vacuously true when the expression form does not apply.
    pub fn forms_agree(&self) -> bool {
        match (self.conditions, self.expression) {
            (Some(c), Some(e)) => {
                (c.beta_nonzero && c.gamma_alpha_opposite && c.gamma_dominates) == e.all_hold()
            }
            _ => true,
        }
    }
}

/// Evaluates the saddle-focus conditions on an analysed cubic.
pub fn silnikov_check<T: Scalar>(a: &CubicAnalysis<T>) -> SilnikovVerdict<T> {
    let zero = T::zero();
    let [g0, pair, _] = a.roots;
    let mut v = SilnikovVerdict {
        gamma: g0.re,
        alpha: pair.re,
        beta: pair.im.abs(),
        conditions: None,
        expression: None,
        marginal: a.structure == RootStructure::Repeated,
        chaotic: false,
    };
    if a.structure != RootStructure::OneRealPair {
        return v;
    }
    let conditions = SilnikovConditions {
        beta_nonzero: v.beta > zero,
        gamma_alpha_opposite: v.gamma * v.alpha < zero,
        gamma_dominates: v.gamma.abs() > v.alpha.abs(),
    };
    let r = a.r.re;
    let hr = a.h / r;
    let two = T::lit(2.0);
    let sign_branch = r - hr + two * a.a1;
    let magnitude_gap = (r - hr - a.a1).abs() - T::lit(0.5) * sign_branch.abs();
    let expression = ExpressionForm {
        delta: a.delta,
        delta_positive: a.delta > zero,
        r_plus_h_over_r: r + hr,
        r_plus_h_over_r_nonzero: r + hr != zero,
        magnitude_gap,
        magnitude_gap_positive: magnitude_gap > zero,
        sign_branch,
        a3: a.a3,
        sign_branch_holds: (a.a3 < zero && sign_branch > zero)
            || (a.a3 > zero && sign_branch < zero),
    };
    v.chaotic =
        conditions.beta_nonzero && conditions.gamma_alpha_opposite && conditions.gamma_dominates;
    v.conditions = Some(conditions);
    v.expression = Some(expression);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex<f64>, re: f64, im: f64, tol: f64) -> bool {
        (a.re - re).abs() <= tol && (a.im - im).abs() <= tol
    }

    #[test]
    fn factored_cubic() {
        let a = cardano_roots(-6.0, 11.0, -6.0);
        assert_eq!(a.structure, RootStructure::ThreeReal);
        for (r, want) in a.roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!(close(*r, want, 0.0, 1e-12), "{r}");
        }
    }

    #[test]
    fn triple_zero_root() {
        let a = cardano_roots(0.0, 0.0, 0.0);
        assert_eq!(a.structure, RootStructure::Repeated);
        assert!(a.roots.iter().all(|r| r.norm() == 0.0));
    }

    #[test]
    fn triple_root_away_from_zero() {
        // (λ + 2)³
        let a = cardano_roots(6.0, 12.0, 8.0);
        assert!(a.roots.iter().all(|r| close(*r, -2.0, 0.0, 1e-12)));
    }

    #[test]
    fn double_root_is_marginal() {
        // (λ - 1)²(λ + 2) = λ³ - 3λ + 2
        let a = cardano_roots(0.0, -3.0, 2.0);
        assert_eq!(a.structure, RootStructure::Repeated);
        let mut re: Vec<f64> = a.roots.iter().map(|r| r.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(
            (re[0] + 2.0).abs() < 1e-9 && (re[1] - 1.0).abs() < 1e-6 && (re[2] - 1.0).abs() < 1e-6
        );
        let v = silnikov_check(&a);
        assert!(v.marginal && !v.chaotic);
    }

    #[test]
    fn large_g_avoids_cancellation() {
        // (λ + 100)(λ² + 0.02λ + 1.0001): roots -100, -0.01 ± i
        let (s1, s2, s3) = (100.02, 1.0001 + 2.0, 100.01);
        let a = cardano_roots(s1, s2, s3);
        assert!(close(a.roots[0], -100.0, 0.0, 1e-9));
        assert!(close(a.roots[1], -0.01, 1.0, 1e-9));
    }

    #[test]
    fn stable_focus_is_not_saddle_focus() {
        // roots -1, -0.1 ± 2i
        let (re, im, g) = (-0.1f64, 2.0f64, -1.0f64);
        let s1 = -(g + 2.0 * re);
        let s2 = g * 2.0 * re + re * re + im * im;
        let s3 = -g * (re * re + im * im);
        let a = cardano_roots(s1, s2, s3);
        let v = silnikov_check(&a);
        let c = v.conditions.unwrap();
        assert!(c.beta_nonzero && !c.gamma_alpha_opposite);
        assert!(!v.chaotic);
        assert!(v.forms_agree());
        assert!(
            (v.gamma + 1.0).abs() < 1e-12
                && (v.alpha + 0.1).abs() < 1e-12
                && (v.beta - 2.0).abs() < 1e-12
        );
    }

    #[test]
    fn all_real_spectrum_is_inapplicable() {
        let v = silnikov_check(&cardano_roots(-6.0, 11.0, -6.0));
        assert!(v.conditions.is_none() && v.expression.is_none() && !v.chaotic);
    }

    #[test]
    fn pair_is_exact_conjugate() {
        let a = cardano_roots(1.3, 4.7, 9.1);
        assert_eq!(a.roots[1], a.roots[2].conj());
        assert!(a.roots[1].im > 0.0);
    }

    #[test]
    fn f32_roots() {
        let a = cardano_roots(-6.0f32, 11.0, -6.0);
        assert!((a.roots[2].re - 3.0).abs() < 1e-4);
    }
}
