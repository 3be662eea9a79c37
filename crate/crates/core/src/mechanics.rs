//! Vertical bending of the spring–mirror–spring axis under a uniform load on
//! the mirror span.
//!
//! Each span obeys `EI u'''' = q` with `q = w_eq` on the mirror and `q = 0` on
//! the springs, so the deflection is a cubic on each spring and a quartic on
//! the mirror. The twelve free coefficients follow from clamped anchors at both
//! ends and continuity of `u`, `u'`, `EI u''` and `EI u'''` at the two
//! spring/mirror junctions.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::{Material, MirrorGeometry, SectionProperties, SpringGeometry};

/// One polynomial span of a [`BeamShape`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSegment {
    /// Global start of the span.
    pub start: f64,
    /// Global end of the span.
    pub end: f64,
    /// Coefficients of `u(ξ) = Σ c_k ξ^k` in the local coordinate `ξ = x − start`.
    pub coeffs: [f64; 5],
    pub flexural_rigidity: f64,
}

impl BeamSegment {
    /// `order`-th derivative of the span polynomial at global `x`. The span's
    /// own polynomial is used even slightly outside `[start, end]`, which lets
    /// callers compare both sides of a junction.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        let xi = x - self.start;
        let mut acc = 0.0;
        for k in (order..5).rev() {
            let falling: f64 = (k - order + 1..=k).map(|j| j as f64).product();
            acc = acc * xi + falling * self.coeffs[k];
        }
        acc
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }
}

/// Piecewise-polynomial deflection `u_z(x)` of the beam axis, positive toward
/// the electrode. Spans are left spring, mirror, right spring.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamShape {
    segments: [BeamSegment; 3],
    w_eq: f64,
}

impl BeamShape {
    /// The undeflected shape, used by the rigid model and as the first
    /// fixed-point iterate.
    pub fn flat(props: &SectionProperties, material: &Material, spring: &SpringGeometry, mirror: &MirrorGeometry) -> Self {
        let bounds = span_bounds(spring, mirror);
        let rigidity = span_rigidity(props, material);
        let segments = std::array::from_fn(|k| BeamSegment {
            start: bounds[k],
            end: bounds[k + 1],
            coeffs: [0.0; 5],
            flexural_rigidity: rigidity[k],
        });
        Self { segments, w_eq: 0.0 }
    }

    pub fn w_eq(&self) -> f64 {
        self.w_eq
    }

    pub fn segments(&self) -> &[BeamSegment; 3] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.segments[2].end
    }

    /// Global coordinate of the left end of the mirror (the spring length).
    pub fn mirror_offset(&self) -> f64 {
        self.segments[1].start
    }

    /// Deflection at global `x`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let length = self.total_length();
        if !(0.0..=length).contains(&x) {
            return Err(Error::OutOfDomain { x, length });
        }
        Ok(self.value_at(x))
    }

    /// Deflection at mirror-local `x` (0 at the left end of the mirror).
    pub fn eval_mirror(&self, x_local: f64) -> Result<f64> {
        self.eval(x_local + self.mirror_offset())
    }

    pub(crate) fn value_at(&self, x: f64) -> f64 {
        self.segment_for(x).value(x)
    }

    fn segment_for(&self, x: f64) -> &BeamSegment {
        if x < self.segments[1].start {
            &self.segments[0]
        } else if x <= self.segments[1].end {
            &self.segments[1]
        } else {
            &self.segments[2]
        }
    }

    /// Uniformly spaced `(x, u_z)` samples covering `[0, L_total]`.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let length = self.total_length();
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let x = if i + 1 == n {
                    length
                } else {
                    length * i as f64 / (n - 1) as f64
                };
                (x, self.value_at(x))
            })
            .collect()
    }
}

fn span_bounds(spring: &SpringGeometry, mirror: &MirrorGeometry) -> [f64; 4] {
    let ls = spring.length;
    [0.0, ls, ls + mirror.length, 2.0 * ls + mirror.length]
}

fn span_rigidity(props: &SectionProperties, material: &Material) -> [f64; 3] {
    let e = material.youngs_modulus;
    [e * props.i_spring, e * props.i_mirror, e * props.i_spring]
}

/// Solves the clamped spring–mirror–spring bending problem for a uniform
/// load `w_eq` (N/m) on the mirror span.
///
/// The system is assembled in units of the total length and of the deflection
/// scale `w L⁴ / (E I_mirror)`, which keeps the 12×12 matrix well conditioned
/// for micrometre geometries.
pub fn solve_beam(
    props: &SectionProperties,
    material: &Material,
    spring: &SpringGeometry,
    mirror: &MirrorGeometry,
    w_eq: f64,
) -> Result<BeamShape> {
    let bounds = span_bounds(spring, mirror);
    let rigidity = span_rigidity(props, material);
    let total = bounds[3];
    let lengths: [f64; 3] = std::array::from_fn(|k| (bounds[k + 1] - bounds[k]) / total);
    let ratio: [f64; 3] = std::array::from_fn(|k| rigidity[k] / rigidity[1]);
    let load = [0.0, 1.0, 0.0];

    // Row of d^order/ds^order [1, s, s², s³] and the particular term load·s⁴/24.
    let basis = |s: f64, order: usize| -> [f64; 4] {
        match order {
            0 => [1.0, s, s * s, s * s * s],
            1 => [0.0, 1.0, 2.0 * s, 3.0 * s * s],
            2 => [0.0, 0.0, 2.0, 6.0 * s],
            _ => [0.0, 0.0, 0.0, 6.0],
        }
    };
    let particular = |k: usize, s: f64, order: usize| -> f64 {
        load[k]
            * match order {
                0 => s.powi(4) / 24.0,
                1 => s.powi(3) / 6.0,
                2 => s * s / 2.0,
                _ => s,
            }
    };

    let mut a = SMatrix::<f64, 12, 12>::zeros();
    let mut rhs = SVector::<f64, 12>::zeros();
    let mut row = 0;

    // clamped anchors
    for order in 0..2 {
        let b = basis(0.0, order);
        for j in 0..4 {
            a[(row, j)] = b[j];
        }
        rhs[row] = -particular(0, 0.0, order);
        row += 1;

        let b = basis(lengths[2], order);
        for j in 0..4 {
            a[(row, 8 + j)] = b[j];
        }
        rhs[row] = -particular(2, lengths[2], order);
        row += 1;
    }

    // junction continuity of u, u', EI u'', EI u'''
    for left in 0..2 {
        let right = left + 1;
        for order in 0..4 {
            let (fl, fr) = if order >= 2 {
                (ratio[left], ratio[right])
            } else {
                (1.0, 1.0)
            };
            let bl = basis(lengths[left], order);
            let br = basis(0.0, order);
            for j in 0..4 {
                a[(row, 4 * left + j)] = fl * bl[j];
                a[(row, 4 * right + j)] = -fr * br[j];
            }
            rhs[row] = fr * particular(right, 0.0, order) - fl * particular(left, lengths[left], order);
            row += 1;
        }
    }

    let sol = a.lu().solve(&rhs).ok_or(Error::SingularSystem)?;

    // back to SI: u(ξ) = U · v(ξ / L)
    let scale = w_eq * total.powi(4) / rigidity[1];
    let segments = std::array::from_fn(|k| {
        let mut coeffs = [0.0; 5];
        for j in 0..4 {
            coeffs[j] = scale * sol[4 * k + j] / total.powi(j as i32);
        }
        coeffs[4] = scale * load[k] / 24.0 / total.powi(4);
        BeamSegment {
            start: bounds[k],
            end: bounds[k + 1],
            coeffs,
            flexural_rigidity: rigidity[k],
        }
    });
    Ok(BeamShape { segments, w_eq })
}

/// Midspan deflection; the load is symmetric so this is the extremum.
pub fn max_deflection(shape: &BeamShape) -> f64 {
    shape.value_at(0.5 * shape.total_length())
}

pub fn eval_shape(shape: &BeamShape, x: f64) -> Result<f64> {
    shape.eval(x)
}

/// Finite-difference solution of the same bending problem on `n_nodes`
/// uniformly spaced nodes, returned as `(x, u)` pairs.
///
/// Discretizes `(EI u'')'' = q` as `D² (EI_i · D² u)_i = q_i` with clamped ends
/// imposed through mirrored ghost nodes. `EI_i` is the harmonic and `q_i` the
/// arithmetic hat-weighted average over `[x_{i-1}, x_{i+1}]`, so junctions
/// need not fall on nodes. Second order in the node spacing.
pub fn fd_beam_oracle(
    props: &SectionProperties,
    material: &Material,
    spring: &SpringGeometry,
    mirror: &MirrorGeometry,
    w_eq: f64,
    n_nodes: usize,
) -> Result<Vec<(f64, f64)>> {
    assert!(n_nodes >= 201, "fd_beam_oracle needs at least 201 nodes");
    let bounds = span_bounds(spring, mirror);
    let rigidity = span_rigidity(props, material);
    let total = bounds[3];
    let n = n_nodes - 1;
    let h = total / n as f64;
    let x = |i: usize| if i == n { total } else { total * i as f64 / n as f64 };

    let flexibility: Vec<f64> = (0..=n)
        .map(|i| hat_average(x(i), h, &bounds, &rigidity.map(|r| 1.0 / r)))
        .collect();
    let load: Vec<f64> = (0..=n)
        .map(|i| hat_average(x(i), h, &bounds, &[0.0, w_eq, 0.0]))
        .collect();

    // Energy form Dᵀ W D u = q: row k of D is the second difference at node k
    // over the interior unknowns u_1..u_{n-1}, with u_0 = u_n = 0 and mirrored
    // ghosts u_{-1} = u_1, u_{n+1} = u_{n-1}. End nodes carry half weight
    // (trapezoid rule), which makes this equal to the D²(EI D²u) stencil.
    let mut band = SymmetricBand::new(n - 1);
    for k in 0..=n {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(3);
        for (offset, c) in [(-1isize, 1.0), (0, -2.0), (1, 1.0)] {
            let node = k as isize + offset;
            let node = if node < 0 {
                -node
            } else if node > n as isize {
                2 * n as isize - node
            } else {
                node
            } as usize;
            if node >= 1 && node < n {
                row.push((node - 1, c));
            }
        }
        let trapezoid = if k == 0 || k == n { 0.5 } else { 1.0 };
        let weight = trapezoid / (flexibility[k] * h.powi(4));
        for &(p, cp) in &row {
            for &(q, cq) in &row {
                if q >= p {
                    band.add(p, q, weight * cp * cq);
                }
            }
        }
    }
    let rhs: Vec<f64> = (1..n).map(|i| load[i]).collect();
    let u_inner = band.solve(rhs).ok_or(Error::SingularSystem)?;

    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, 0.0));
    for (j, u) in u_inner.into_iter().enumerate() {
        out.push((x(j + 1), u));
    }
    out.push((total, 0.0));
    Ok(out)
}

/// `(1/h) ∫ hat_i(x) f(x) dx` for piecewise-constant `f` with the given
/// breakpoints, where `hat_i` is the unit hat centred at `xc` with half-width `h`.
fn hat_average(xc: f64, h: f64, bounds: &[f64; 4], values: &[f64; 3]) -> f64 {
    // cumulative hat mass in normalized coordinate t ∈ [-1, 1]
    let cum = |t: f64| {
        let t = t.clamp(-1.0, 1.0);
        if t <= 0.0 {
            0.5 * (t + 1.0) * (t + 1.0)
        } else {
            1.0 - 0.5 * (1.0 - t) * (1.0 - t)
        }
    };
    (0..3)
        .map(|k| {
            let lo = (bounds[k] - xc) / h;
            let hi = (bounds[k + 1] - xc) / h;
            values[k] * (cum(hi) - cum(lo))
        })
        .sum::<f64>()
        // the mirrored ghost region beyond either anchor repeats the end span
        + values[0] * (cum((bounds[0] - xc) / h) - cum(-1.0))
        + values[2] * (cum(1.0) - cum((bounds[3] - xc) / h))
}

/// Symmetric positive-definite matrix with bandwidth two, factored in place
/// by banded Cholesky.
struct SymmetricBand {
    // diag[i], off1[i] = A[i][i+1], off2[i] = A[i][i+2]
    diag: Vec<f64>,
    off1: Vec<f64>,
    off2: Vec<f64>,
}

impl SymmetricBand {
    fn new(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off1: vec![0.0; n],
            off2: vec![0.0; n],
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        match j - i {
            0 => self.diag[i] += v,
            1 => self.off1[i] += v,
            2 => self.off2[i] += v,
            _ => unreachable!("bandwidth exceeded"),
        }
    }

    fn solve(mut self, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = self.diag.len();
        // A = L Lᵀ; L stored over the same arrays (l0 diag, l1 sub, l2 subsub)
        for i in 0..n {
            let mut d = self.diag[i];
            if i >= 1 {
                d -= self.off1[i - 1] * self.off1[i - 1];
            }
            if i >= 2 {
                d -= self.off2[i - 2] * self.off2[i - 2];
            }
            if !(d > 0.0) {
                return None;
            }
            let l = d.sqrt();
            self.diag[i] = l;
            if i + 1 < n {
                let mut v = self.off1[i];
                if i >= 1 {
                    v -= self.off2[i - 1] * self.off1[i - 1];
                }
                self.off1[i] = v / l;
            }
            if i + 2 < n {
                self.off2[i] /= l;
            }
        }
        for i in 0..n {
            let mut v = b[i];
            if i >= 1 {
                v -= self.off1[i - 1] * b[i - 1];
            }
            if i >= 2 {
                v -= self.off2[i - 2] * b[i - 2];
            }
            b[i] = v / self.diag[i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.off1[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= self.off2[i] * b[i + 2];
            }
            b[i] = v / self.diag[i];
        }
        Some(b)
    }
}
