//! Pointwise charts of the common 4-dimensional symplectic leaves and the
//! structures restricted to them: the symplectic triple, the pseudo-metric
//! and the three almost-complex structures with their quaternion algebra.
//!
//! A chart at a point is spanned by the three rotation generators and the
//! gradient field. With B the 9x4 basis matrix and Pi_i the sharp map of
//! the i-th tensor, the chart bivector is S_i = G^-1 (B^T Pi_i B) G^-1
//! (G = B^T B) and the leaf form matrix is fixed to W_i = -S_i^{-1}. With
//! this convention the cross-frame identity
//! omega_i(X^j_f, X^j_g) = {f,g}_i holds for i != j with a plus sign,
//! the same-frame evaluation carries a minus sign, and the pseudo-metric
//! satisfies g(X,X) = -phi and g(xi_hat, xi_hat) = -A_{xi,xi}.

use crate::algebra::AlgVec;
use crate::linalg::{inverse, numerical_rank, svd, sym_eigen, Mat};
use crate::poisson::{
    a_for_point, adjoint_generator, grad_phi, linear_bracket, pi_sharp_with, CotangentVec,
    FrameIndex, LinearFn, MPoint, PoissonError, ScalarField, Tangent,
};

#[derive(Debug, thiserror::Error)]
pub enum LeafError {
    #[error(transparent)]
    Singular(#[from] PoissonError),
    #[error("chart basis is rank-deficient (rank {rank} < 4)")]
    DegenerateBasis { rank: usize },
    #[error("a restricted bivector is singular and cannot be inverted")]
    DegenerateRestriction,
    #[error("leaf tangent image differs from the chart span (residual {0:e})")]
    ImageMismatch(f64),
}

/// Threshold on singular values for rank decisions.
const RANK_TOL: f64 = 1e-8;

/// Chart of the leaf through a point: basis {xi_hat_1, xi_hat_2, xi_hat_3, X}.
#[derive(Debug, Clone)]
pub struct LeafChart {
    pub p: MPoint,
    pub basis: [Tangent; 4],
    /// 9x4 matrix with the basis vectors as columns.
    pub b_mat: Mat,
    /// 4x4 basis Gram matrix B^T B.
    pub gram: Mat,
    gram_inv: Mat,
}

impl LeafChart {
    /// Chart coefficients of an ambient tangent vector (exact for vectors
    /// in the span; otherwise the orthogonal projection's coefficients).
    pub fn coeffs(&self, v: &Tangent) -> Vec<f64> {
        let btv = self.b_mat.transpose().matvec(&v.to_array());
        self.gram_inv.matvec(&btv)
    }

    /// Ambient vector of a chart coefficient vector.
    pub fn ambient(&self, coeffs: &[f64]) -> Tangent {
        let v = self.b_mat.matvec(coeffs);
        let mut arr = [0.0; 9];
        arr.copy_from_slice(&v);
        Tangent::from_array(&arr)
    }

    /// Residual of an ambient vector against the span of the chart.
    pub fn span_residual(&self, v: &Tangent) -> f64 {
        let proj = self.ambient(&self.coeffs(v));
        proj.sub(v).norm()
    }
}

/// Build the chart from a custom set of basis tangents (rank-checked).
pub fn chart_from_basis(p: &MPoint, basis: [Tangent; 4]) -> Result<LeafChart, LeafError> {
    let mut b_mat = Mat::zeros(9, 4);
    for (j, t) in basis.iter().enumerate() {
        b_mat.set_col(j, &t.to_array());
    }
    let (_, sigma, _) = svd(&b_mat);
    let rank = numerical_rank(&sigma, RANK_TOL);
    if rank < 4 {
        return Err(LeafError::DegenerateBasis { rank });
    }
    let gram = b_mat.transpose().matmul(&b_mat);
    let gram_inv = inverse(&gram).map_err(|_| LeafError::DegenerateBasis { rank })?;
    Ok(LeafChart {
        p: *p,
        basis,
        b_mat,
        gram,
        gram_inv,
    })
}

/// Chart at a point, with the span checked against the image of every
/// frame's sharp map.
pub fn leaf_chart(p: &MPoint) -> Result<LeafChart, LeafError> {
    let basis = [
        adjoint_generator(p, AlgVec::E1),
        adjoint_generator(p, AlgVec::E2),
        adjoint_generator(p, AlgVec::E3),
        grad_phi(p),
    ];
    let chart = chart_from_basis(p, basis)?;

    // The image of each sharp map must coincide with the chart span.
    let at = a_for_point(p)?;
    for frame in FrameIndex::ALL {
        let mut image = Mat::zeros(9, 9);
        for k in 0..9 {
            let mut arr = [0.0; 9];
            arr[k] = 1.0;
            let v = pi_sharp_with(p, &CotangentVec::from_array(&arr), frame, &at);
            image.set_col(k, &v.to_array());
        }
        let (_, sigma, _) = svd(&image);
        let img_rank = numerical_rank(&sigma, RANK_TOL);
        if img_rank != 4 {
            return Err(LeafError::ImageMismatch(
                sigma.get(4).copied().unwrap_or(0.0),
            ));
        }
        for k in 0..9 {
            let col = image.col(k);
            let mut arr = [0.0; 9];
            arr.copy_from_slice(&col);
            let v = Tangent::from_array(&arr);
            let res = chart.span_residual(&v);
            if res > RANK_TOL * (1.0 + v.norm()) {
                return Err(LeafError::ImageMismatch(res));
            }
        }
    }
    Ok(chart)
}

/// The three leaf symplectic forms in the chart basis, together with the
/// chart bivectors they invert.
#[derive(Debug, Clone)]
pub struct SymplecticTriple {
    /// Chart bivector matrices S_i.
    pub s: [Mat; 3],
    /// Leaf form matrices W_i = -S_i^{-1}, exactly antisymmetric.
    pub w: [Mat; 3],
}

impl SymplecticTriple {
    /// Value of omega_i on two chart-coefficient vectors.
    pub fn form_value(&self, i: usize, x: &[f64], y: &[f64]) -> f64 {
        let wy = self.w[i].matvec(y);
        x.iter().zip(&wy).map(|(a, b)| a * b).sum()
    }

    /// Bundle-map matrix of omega_i^b (tangent coefficients to covector
    /// coefficients); equals S_i^{-1}.
    pub fn omega_b(&self, i: usize) -> Mat {
        self.w[i].scale(-1.0)
    }
}

fn antisymmetrized(m: &Mat) -> Mat {
    let mut out = m.clone();
    for i in 0..m.rows {
        for j in 0..m.cols {
            out[(i, j)] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
    }
    out
}

/// Restrict the three tensors to the leaf and invert them into forms.
pub fn restricted_forms(chart: &LeafChart) -> Result<SymplecticTriple, LeafError> {
    let at = a_for_point(&chart.p)?;
    let bt = chart.b_mat.transpose();
    let mut s_mats = Vec::with_capacity(3);
    let mut w_mats = Vec::with_capacity(3);
    for frame in FrameIndex::ALL {
        let mut pib = Mat::zeros(9, 4);
        for k in 0..4 {
            let cov = CotangentVec::from_array(&chart.basis[k].to_array());
            let v = pi_sharp_with(&chart.p, &cov, frame, &at);
            pib.set_col(k, &v.to_array());
        }
        let c = bt.matmul(&pib);
        let s = chart.gram_inv.matmul(&c).matmul(&chart.gram_inv);
        let s = antisymmetrized(&s);
        let w = inverse(&s)
            .map_err(|_| LeafError::DegenerateRestriction)?
            .scale(-1.0);
        debug_assert!(
            w.antisymmetry_deviation() < 1e-9,
            "leaf form lost antisymmetry"
        );
        w_mats.push(antisymmetrized(&w));
        s_mats.push(s);
    }
    Ok(SymplecticTriple {
        s: [s_mats[0].clone(), s_mats[1].clone(), s_mats[2].clone()],
        w: [w_mats[0].clone(), w_mats[1].clone(), w_mats[2].clone()],
    })
}

/// Chart coefficients of the Hamiltonian field X^i_f of a linear function.
pub fn chart_hamiltonian(
    chart: &LeafChart,
    forms: &SymplecticTriple,
    f: &LinearFn,
    frame: usize,
) -> Vec<f64> {
    let grad = f.grad(&chart.p).to_array();
    let btg = chart.b_mat.transpose().matvec(&grad);
    forms.s[frame].matvec(&btg)
}

/// Residuals of the bracket-reproduction identities for one pair of linear
/// functions: `same` is max_i |omega_i(X^i_f, X^i_g) + {f,g}_i| and
/// `cross` is max_{i != j} |omega_i(X^j_f, X^j_g) - {f,g}_i|.
pub fn bracket_reproduction_residuals(
    chart: &LeafChart,
    forms: &SymplecticTriple,
    f: &LinearFn,
    g: &LinearFn,
) -> Result<(f64, f64), LeafError> {
    let at = a_for_point(&chart.p)?;
    let mut same = 0.0f64;
    let mut cross = 0.0f64;
    let brackets: Vec<f64> = FrameIndex::ALL
        .iter()
        .map(|fr| linear_bracket(f, g, *fr).eval_with(&chart.p, &at))
        .collect();
    for j in 0..3 {
        let xf = chart_hamiltonian(chart, forms, f, j);
        let xg = chart_hamiltonian(chart, forms, g, j);
        for i in 0..3 {
            let val = forms.form_value(i, &xf, &xg);
            if i == j {
                same = same.max((val + brackets[i]).abs());
            } else {
                cross = cross.max((val - brackets[i]).abs());
            }
        }
    }
    Ok((same, cross))
}

/// The leaf pseudo-metric and the three almost-complex structures.
#[derive(Debug, Clone)]
pub struct LeafMetric {
    /// Metric matrix in the chart basis (symmetric).
    pub g: Mat,
    pub i_map: Mat,
    pub j_map: Mat,
    pub k_map: Mat,
    /// Disagreement between the three equivalent products defining g.
    pub product_agreement: f64,
    /// Asymmetry of the raw metric matrix before symmetrisation.
    pub asymmetry: f64,
}

impl LeafMetric {
    /// Metric value on two ambient tangents through the chart.
    pub fn value(&self, chart: &LeafChart, v: &Tangent, w: &Tangent) -> f64 {
        let x = chart.coeffs(v);
        let y = chart.coeffs(w);
        let gy = self.g.matvec(&y);
        x.iter().zip(&gy).map(|(a, b)| a * b).sum()
    }

    /// Eigenvalues of the metric matrix, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigen(&self.g).0
    }
}

/// Compose the metric g = omega_3^b (omega_1^b)^{-1} omega_2^b and the
/// maps I = g^{-1} omega_1^b, J = g^{-1} omega_2^b, K = g^{-1} omega_3^b.
pub fn leaf_metric(chart: &LeafChart, forms: &SymplecticTriple) -> Result<LeafMetric, LeafError> {
    let _ = chart;
    let om = [forms.omega_b(0), forms.omega_b(1), forms.omega_b(2)];
    let g_raw = om[2].matmul(&forms.s[0]).matmul(&om[1]);
    let alt1 = om[0].matmul(&forms.s[1]).matmul(&om[2]);
    let alt2 = om[1].matmul(&forms.s[2]).matmul(&om[0]);
    let product_agreement = g_raw.sub(&alt1).max_abs().max(g_raw.sub(&alt2).max_abs());
    let asymmetry = g_raw.asymmetry();
    let g = g_raw.symmetrized();
    let g_inv = inverse(&g).map_err(|_| LeafError::DegenerateRestriction)?;
    Ok(LeafMetric {
        i_map: g_inv.matmul(&om[0]),
        j_map: g_inv.matmul(&om[1]),
        k_map: g_inv.matmul(&om[2]),
        g,
        product_agreement,
        asymmetry,
    })
}

/// Residuals of the pointwise compatibility identities.
#[derive(Debug, Clone, Copy)]
pub struct CompatReport {
    /// max over i != j of |[omega_i^b (omega_j^b)^{-1}]^2 + Id|.
    pub square_identity: f64,
    /// max of |I^2 + Id|, |J^2 + Id|, |K^2 + Id|, |IJK + Id|.
    pub quaternion: f64,
    /// max over basis vectors v of |v . omega_2 - (I v) . omega_3|.
    pub contraction: f64,
}

impl CompatReport {
    pub fn max(&self) -> f64 {
        self.square_identity
            .max(self.quaternion)
            .max(self.contraction)
    }
}

/// Evaluate the compatibility identities in the chart.
pub fn compatibility_residuals(
    chart: &LeafChart,
    forms: &SymplecticTriple,
) -> Result<CompatReport, LeafError> {
    let metric = leaf_metric(chart, forms)?;
    let id = Mat::identity(4);

    let mut square_identity = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let m = forms.omega_b(i).matmul(&forms.s[j]);
            square_identity = square_identity.max(m.matmul(&m).add(&id).max_abs());
        }
    }

    let quaternion = [
        metric.i_map.matmul(&metric.i_map),
        metric.j_map.matmul(&metric.j_map),
        metric.k_map.matmul(&metric.k_map),
        metric.i_map.matmul(&metric.j_map).matmul(&metric.k_map),
    ]
    .iter()
    .fold(0.0f64, |worst, m| worst.max(m.add(&id).max_abs()));

    let mut contraction = 0.0f64;
    let om2 = forms.omega_b(1);
    let om3 = forms.omega_b(2);
    for k in 0..4 {
        let mut v = vec![0.0; 4];
        v[k] = 1.0;
        let lhs = om2.matvec(&v);
        let rhs = om3.matvec(&metric.i_map.matvec(&v));
        let diff = lhs
            .iter()
            .zip(&rhs)
            .fold(0.0f64, |worst, (a, b)| worst.max((a - b).abs()));
        contraction = contraction.max(diff);
    }

    Ok(CompatReport {
        square_identity,
        quaternion,
        contraction,
    })
}

/// Recompute the leaf metric in the frame rotated by O and return the
/// max-abs difference of the metric matrices. The chart at the mixed
/// coordinates is automatically the O-transform of the chart at p, so the
/// matrices compare entry for entry.
pub fn metric_frame_residual(p: &MPoint, o: &crate::algebra::Frame) -> Result<f64, LeafError> {
    let chart = leaf_chart(p)?;
    let forms = restricted_forms(&chart)?;
    let m = leaf_metric(&chart, &forms)?;
    let p2 = p.mix_slots(o);
    let chart2 = leaf_chart(&p2)?;
    let forms2 = restricted_forms(&chart2)?;
    let m2 = leaf_metric(&chart2, &forms2)?;
    Ok(m.g.sub(&m2.g).max_abs())
}
