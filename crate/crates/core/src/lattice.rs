//! Discrete complex analysis on the quadrilateral lattice `Z²`.
//!
//! Vertices `(i, j)` are realized in the complex plane at
//! `z(i, j) = (i + j)·Δx + 𝕚·b(j)`, with `b(j) = Σ_{j' < j} s(j')·Δx/ω` and
//! the vertical gaps `s(j) >= 0` vanishing for `j < 0`. Every face is then a
//! parallelogram whose horizontal edges are the real constant `Δx`. A lattice
//! function is holomorphic when its two diagonal difference quotients agree
//! on every face. The unique holomorphic continuation of the discrete plane
//! wave `W_k(i) = exp(𝕚kΔx·i)` from row 0 is a geometric sequence of rows
//! whose ratio is the one-row decay rate [`rho`].
//!
//! `K` membership is tested with a closed condition `Im(k) <= 0`, so plane
//! waves with real wave number are admitted alongside evanescent ones.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `-π/Δx < Re k <= π/Δx` and `Im k <= 0`.
pub fn in_feasible_region(k: Complex64, dx: f64) -> bool {
    let theta = k.re * dx;
    // a few ulps of slack on the closed end so that k = π/Δx survives the round trip
    theta > -PI && theta <= PI * (1.0 + 4.0 * f64::EPSILON) && k.im <= 0.0
}

pub fn check_feasible(k: Complex64, dx: f64) -> Result<()> {
    if in_feasible_region(k, dx) && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Infeasible { k, dx })
    }
}

/// `W_k(i) = exp(𝕚kΔx·i)`.
#[inline]
pub fn plane_wave(k: Complex64, dx: f64, i: i64) -> Complex64 {
    (I * k * (dx * i as f64)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDomainSpec {
    dx: f64,
    omega: f64,
    gaps: Vec<f64>,
    /// `heights[j] = b(j)` for `j = 0..=gaps.len()`.
    heights: Vec<f64>,
}

impl ComplexDomainSpec {
    /// `gaps[j]` is `s(j)` for `j >= 0`; gaps past the end are zero.
    pub fn new(dx: f64, omega: f64, gaps: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::param("dx", format!("must be positive, got {dx}")));
        }
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::param("omega", "must be finite and nonzero"));
        }
        if let Some(s) = gaps.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::param("gaps", format!("must be finite and >= 0, got {s}")));
        }
        let mut heights = Vec::with_capacity(gaps.len() + 1);
        let mut b = 0.0;
        heights.push(b);
        for &s in &gaps {
            b += s * dx / omega;
            heights.push(b);
        }
        Ok(Self {
            dx,
            omega,
            gaps,
            heights,
        })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gap(&self, j: i64) -> f64 {
        if j < 0 {
            0.0
        } else {
            self.gaps.get(j as usize).copied().unwrap_or(0.0)
        }
    }

    /// Imaginary offset `b(j)` of row `j`.
    pub fn height(&self, j: i64) -> f64 {
        if j <= 0 {
            0.0
        } else {
            let j = (j as usize).min(self.gaps.len());
            self.heights[j]
        }
    }

    pub fn is_degenerate(&self, face: LatticeFace) -> bool {
        self.gap(face.j) == 0.0
    }
}

/// The face `Q_{i+1/2, j+1/2}` with corners `(i,j), (i+1,j), (i+1,j+1), (i,j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeFace {
    pub i: i64,
    pub j: i64,
}

impl LatticeFace {
    pub fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }
}

/// A complex function on the lattice vertices.
pub trait LatticeFunction {
    fn value(&self, i: i64, j: i64) -> Complex64;
}

impl<F: Fn(i64, i64) -> Complex64> LatticeFunction for F {
    fn value(&self, i: i64, j: i64) -> Complex64 {
        self(i, j)
    }
}

pub fn vertex_position(i: i64, j: i64, spec: &ComplexDomainSpec) -> Complex64 {
    Complex64::new((i + j) as f64 * spec.dx, spec.height(j))
}

/// The vertex realization `z` as a lattice function.
pub fn identity_function(spec: &ComplexDomainSpec) -> impl Fn(i64, i64) -> Complex64 + '_ {
    move |i, j| vertex_position(i, j, spec)
}

/// Difference of the two diagonal quotients of the discrete Cauchy–Riemann
/// equation. On a degenerate face (`s(j) = 0`) the anti-diagonal quotient is
/// 0/0 and the residual `f(i, j+1) - f(i+1, j)` is returned instead.
pub fn cr_residual<F: LatticeFunction + ?Sized>(
    f: &F,
    spec: &ComplexDomainSpec,
    face: LatticeFace,
) -> Complex64 {
    let LatticeFace { i, j } = face;
    let anti = f.value(i, j + 1) - f.value(i + 1, j);
    if spec.is_degenerate(face) {
        return anti;
    }
    let diag = f.value(i + 1, j + 1) - f.value(i, j);
    let dz_diag = vertex_position(i + 1, j + 1, spec) - vertex_position(i, j, spec);
    let dz_anti = vertex_position(i, j + 1, spec) - vertex_position(i + 1, j, spec);
    diag / dz_diag - anti / dz_anti
}

/// Discrete complex derivative `D_z f` at a non-degenerate face. Fails when
/// the two quotients differ by more than `rel_tol` relative to their size.
pub fn discrete_derivative<F: LatticeFunction + ?Sized>(
    f: &F,
    spec: &ComplexDomainSpec,
    face: LatticeFace,
    rel_tol: f64,
) -> Result<Complex64> {
    let LatticeFace { i, j } = face;
    if spec.is_degenerate(face) {
        return Err(Error::DegenerateFace { i, j });
    }
    let q_diag = (f.value(i + 1, j + 1) - f.value(i, j))
        / (vertex_position(i + 1, j + 1, spec) - vertex_position(i, j, spec));
    let q_anti = (f.value(i, j + 1) - f.value(i + 1, j))
        / (vertex_position(i, j + 1, spec) - vertex_position(i + 1, j, spec));
    let scale = q_diag.norm().max(q_anti.norm());
    let residual = (q_diag - q_anti).norm();
    if residual > rel_tol * scale {
        return Err(Error::NotHolomorphic {
            i,
            j,
            residual: if scale > 0.0 { residual / scale } else { residual },
        });
    }
    Ok(q_diag)
}

/// Edge midpoints of a face in cyclic order: bottom, right, top, left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedialParallelogram {
    pub vertices: [Complex64; 4],
    /// `(g(i+1,j+1) - g(i,j)) / 2`: the bottom→right and left→top edge vector.
    pub diagonal_edge: Complex64,
    /// `(g(i,j+1) - g(i+1,j)) / 2`: the right→top and bottom→left edge vector.
    pub anti_diagonal_edge: Complex64,
}

impl MedialParallelogram {
    /// Edge vectors recomputed from the midpoints, in cyclic order.
    pub fn edges(&self) -> [Complex64; 4] {
        let v = &self.vertices;
        [v[1] - v[0], v[2] - v[1], v[3] - v[2], v[0] - v[3]]
    }

    /// `Some(c)` when `self` is `c` times `other` up to translation, within
    /// `rel_tol` relative to the edge lengths of `self`.
    pub fn scaled_rotation_of(&self, other: &MedialParallelogram, rel_tol: f64) -> Option<Complex64> {
        let c = self.diagonal_edge / other.diagonal_edge;
        let scale = self.diagonal_edge.norm().max(self.anti_diagonal_edge.norm());
        let mismatch = (self.anti_diagonal_edge - c * other.anti_diagonal_edge).norm();
        (c.is_finite() && mismatch <= rel_tol * scale).then_some(c)
    }
}

pub fn medial_parallelogram<F: LatticeFunction + ?Sized>(face: LatticeFace, g: &F) -> MedialParallelogram {
    let LatticeFace { i, j } = face;
    let a = g.value(i, j);
    let b = g.value(i + 1, j);
    let c = g.value(i + 1, j + 1);
    let d = g.value(i, j + 1);
    MedialParallelogram {
        vertices: [(a + b) * 0.5, (b + c) * 0.5, (c + d) * 0.5, (d + a) * 0.5],
        diagonal_edge: (c - a) * 0.5,
        anti_diagonal_edge: (d - b) * 0.5,
    }
}

/// One-row decay rate
/// `ρ(s, k, ω) = (2 + 𝕚(s/ω)(1 - e^{-𝕚kΔx})) / (2 + 𝕚(s/ω)(1 - e^{𝕚kΔx}))`.
pub fn rho(s: f64, k: Complex64, omega: f64, dx: f64) -> Result<Complex64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::param("omega", "must be finite and nonzero"));
    }
    let a = I * (s / omega);
    let e = (I * k * dx).exp();
    let num = 2.0 + a * (1.0 - e.inv());
    let den = 2.0 + a * (1.0 - e);
    if den == Complex64::new(0.0, 0.0) || !den.is_finite() {
        return Err(Error::SingularDecayRate { s, k, omega });
    }
    let r = num / den;
    if !r.is_finite() {
        return Err(Error::SingularDecayRate { s, k, omega });
    }
    Ok(r)
}

/// `ρ(s, k, ω) / ρ(s, -conj(k), ω)`: per-cell attenuation of a wave that is
/// reflected by a hard wall behind the layer and travels back.
pub fn reflected_ratio(s: f64, k: Complex64, omega: f64, dx: f64) -> Result<Complex64> {
    Ok(rho(s, k, omega, dx)? / rho(s, -k.conj(), omega, dx)?)
}

/// A decay rate together with the arguments it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRate {
    pub value: Complex64,
    pub s: f64,
    pub k: Complex64,
    pub omega: f64,
    pub dx: f64,
}

impl DecayRate {
    pub fn new(s: f64, k: Complex64, omega: f64, dx: f64) -> Result<Self> {
        Ok(Self {
            value: rho(s, k, omega, dx)?,
            s,
            k,
            omega,
            dx,
        })
    }

    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

/// Closed-form holomorphic continuation of `W_k` off row 0:
/// `f(i, j) = R(j)·W_k(i + j)` with `R` the signed prefix product of decay
/// rates. Row factors inside `rows` are cached; other rows are computed on
/// demand.
#[derive(Debug, Clone)]
pub struct HolomorphicField {
    spec: ComplexDomainSpec,
    k: Complex64,
    rows: RangeInclusive<i64>,
    factors: Vec<Complex64>,
}

pub fn build_holomorphic_extension(
    k: Complex64,
    spec: &ComplexDomainSpec,
    rows: RangeInclusive<i64>,
) -> Result<HolomorphicField> {
    check_feasible(k, spec.dx)?;
    let (lo, hi) = (*rows.start(), *rows.end());
    if lo > hi {
        return Err(Error::param("rows", "empty row range"));
    }
    let factors = (lo..=hi)
        .map(|j| row_factor(spec, k, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(HolomorphicField {
        spec: spec.clone(),
        k,
        rows,
        factors,
    })
}

fn row_factor(spec: &ComplexDomainSpec, k: Complex64, j: i64) -> Result<Complex64> {
    let mut r = Complex64::new(1.0, 0.0);
    if j > 0 {
        for jj in 0..j {
            r *= rho(spec.gap(jj), k, spec.omega, spec.dx)?;
        }
    } else {
        for jj in j..0 {
            r /= rho(spec.gap(jj), k, spec.omega, spec.dx)?;
        }
    }
    Ok(r)
}

impl HolomorphicField {
    pub fn spec(&self) -> &ComplexDomainSpec {
        &self.spec
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn rows(&self) -> RangeInclusive<i64> {
        self.rows.clone()
    }

    /// `R(j)`, the amplitude of row `j` relative to `W_k(i + j)`.
    pub fn factor(&self, j: i64) -> Complex64 {
        if self.rows.contains(&j) {
            self.factors[(j - self.rows.start()) as usize]
        } else {
            row_factor(&self.spec, self.k, j).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }
    }

    /// Row `j` sampled at `i in cols`.
    pub fn row(&self, j: i64, cols: RangeInclusive<i64>) -> Vec<Complex64> {
        cols.map(|i| self.value(i, j)).collect()
    }
}

impl LatticeFunction for HolomorphicField {
    fn value(&self, i: i64, j: i64) -> Complex64 {
        self.factor(j) * plane_wave(self.k, self.spec.dx, i + j)
    }
}

/// Pointwise residual of the row recursion
/// `(2 + 𝕚(s/ω)(1-τ)) row_{j+1} = (2 + 𝕚(s/ω)(1-τ⁻¹)) τ row_j`
/// over a common index window. The output has one entry fewer than the
/// inputs because both sides read one cell ahead.
pub fn row_recursion_residual(
    row_j: &[Complex64],
    row_j1: &[Complex64],
    s_j: f64,
    omega: f64,
) -> Result<Vec<Complex64>> {
    if row_j.len() != row_j1.len() {
        return Err(Error::param("rows", "rows must share an index window"));
    }
    if omega == 0.0 {
        return Err(Error::param("omega", "must be nonzero"));
    }
    let a = I * (s_j / omega);
    Ok((0..row_j.len().saturating_sub(1))
        .map(|i| {
            let lhs = row_j1[i] * 2.0 + a * (row_j1[i] - row_j1[i + 1]);
            let rhs = row_j[i + 1] * 2.0 + a * (row_j[i + 1] - row_j[i]);
            lhs - rhs
        })
        .collect())
}
