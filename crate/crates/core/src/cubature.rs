//! Gaussian cubature rules from the common zeros of `Q_0^m, …, Q_m^m`.
//!
//! The recurrence is orthonormalized with the Hermitian square roots of the
//! Gram matrices, rotated into the real basis, and truncated to the
//! block-tridiagonal Jacobi pair `(T1, T2)` for multiplication by `x` and
//! `y`. Nodes are the joint eigenvalues; weights are squared first
//! eigenvector components.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::families::{gen_q, q_coeffs, real_basis_matrix, PolyFamily, ThreeTermCoeffs};
use crate::matrix::CMatrix;
use crate::moments::{
    gram_recursive, is_positive_definite, moment_table, param_classify, posdef_probe, MomentTable,
    ParamRegime, REALITY_TOL,
};
use crate::scalar::Scalar;

/// Acceptance thresholds for a constructed rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `‖[T1, T2]‖ / (‖T1‖ ‖T2‖)`
    pub commutator: f64,
    /// joint eigenvector residual relative to `‖T‖`
    pub joint_residual: f64,
    /// relative moment error over degree `≤ 2m − 1`
    pub exactness: f64,
    /// relative disagreement between the two weight formulas
    pub weight_crosscheck: f64,
    /// `‖γ̃ − (α̃*)^∨‖`
    pub orthonormal: f64,
    /// `|Q_k^m(node)|` relative to the largest coefficient
    pub vanishing: f64,
    /// minimum pairwise node distance relative to the node diameter
    pub separation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            commutator: 1e-10,
            joint_residual: 1e-9,
            exactness: 1e-8,
            weight_crosscheck: 1e-8,
            orthonormal: 1e-11,
            vanishing: 1e-8,
            separation: 1e-8,
        }
    }
}

/// Recurrence coefficients of the orthonormal family `H_n^{−1/2} Q_n`.
#[derive(Clone, Debug)]
pub struct Orthonormal {
    pub alpha: Vec<CMatrix<Complex64>>,
    pub beta: Vec<CMatrix<Complex64>>,
    /// `gamma[n]` is `(n+1) × n`
    pub gamma: Vec<CMatrix<Complex64>>,
    pub inv_sqrt_h: Vec<CMatrix<Complex64>>,
    /// `max_n ‖γ̃_{n−1} − (α̃_{n−1}*)^∨‖_max`
    pub relation_residual: f64,
}

fn hermitian_powers(h: &CMatrix<Complex64>) -> (CMatrix<Complex64>, CMatrix<Complex64>) {
    let eig = SymmetricEigen::new(h.to_nalgebra());
    let v = &eig.eigenvectors;
    let root = |f: &dyn Fn(f64) -> f64| {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(f(l), 0.0)));
        CMatrix::from_nalgebra(&(v * d * v.adjoint()))
    };
    (root(&f64::sqrt), root(&|l: f64| 1.0 / l.sqrt()))
}

/// Orthonormalizes degrees `0..m` (using `H_0, …, H_m`).
pub fn orthonormalize(
    m: usize,
    coeffs: &[ThreeTermCoeffs<Complex64>],
    grams: &[CMatrix<Complex64>],
) -> Result<Orthonormal> {
    if coeffs.len() < m || grams.len() <= m {
        return Err(Error::InsufficientDepth {
            needed: m,
            available: coeffs.len().min(grams.len().saturating_sub(1)),
        });
    }
    let mut sqrt_h = Vec::with_capacity(m + 1);
    let mut inv_sqrt_h = Vec::with_capacity(m + 1);
    for (n, h) in grams.iter().take(m + 1).enumerate() {
        if !is_positive_definite(h) {
            return Err(Error::NotPositiveDefinite { degree: n });
        }
        let (s, si) = hermitian_powers(h);
        sqrt_h.push(s);
        inv_sqrt_h.push(si);
    }
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut gamma = Vec::with_capacity(m);
    let mut relation_residual: f64 = 0.0;
    for n in 0..m {
        let co = &coeffs[n];
        alpha.push(inv_sqrt_h[n].matmul(&co.alpha).matmul(&sqrt_h[n + 1]));
        beta.push(inv_sqrt_h[n].matmul(&co.beta).matmul(&sqrt_h[n]));
        let g = if n == 0 {
            CMatrix::zeros(1, 0)
        } else {
            inv_sqrt_h[n].matmul(&co.gamma).matmul(&sqrt_h[n - 1])
        };
        if n >= 1 {
            let want: CMatrix<Complex64> = alpha[n - 1].adjoint().vee();
            relation_residual = relation_residual.max(g.max_abs_diff(&want));
        }
        gamma.push(g);
    }
    Ok(Orthonormal {
        alpha,
        beta,
        gamma,
        inv_sqrt_h,
        relation_residual,
    })
}

/// Truncated multiplication operators for `x` and `y` in the real
/// orthonormal basis of degrees `0..m`.
#[derive(Clone, Debug)]
pub struct JacobiPair {
    pub m: usize,
    pub t1: DMatrix<f64>,
    pub t2: DMatrix<f64>,
    /// largest discarded imaginary part of a rotated block
    pub imag_residual: f64,
    /// largest asymmetry before symmetrization (diagonal blocks, and lower
    /// blocks against transposed upper blocks)
    pub symmetry_residual: f64,
}

fn offset(n: usize) -> usize {
    n * (n + 1) / 2
}

/// `((M + M^∨)/2, (M − M^∨)/(2i))` rotated into the real bases.
fn real_parts(mat: &CMatrix<Complex64>, sl: &CMatrix<Complex64>, sr: &CMatrix<Complex64>) -> [CMatrix<Complex64>; 2] {
    let v = mat.vee();
    let half = Complex64::new(0.5, 0.0);
    let x = mat.add(&v).scale(&half);
    let y = mat.sub(&v).scale(&Complex64::new(0.0, -0.5));
    [x, y].map(|blk| sl.matmul(&blk).matmul(&sr.adjoint()))
}

pub fn build_jacobi(m: usize, on: &Orthonormal) -> JacobiPair {
    let size = offset(m);
    let mut t = [DMatrix::<f64>::zeros(size, size), DMatrix::<f64>::zeros(size, size)];
    let mut imag: f64 = 0.0;
    let mut asym: f64 = 0.0;
    let s: Vec<_> = (0..=m).map(real_basis_matrix).collect();
    let mut place = |t: &mut DMatrix<f64>, blk: &CMatrix<Complex64>, r0: usize, c0: usize, mirror: bool| {
        for i in 0..blk.rows() {
            for j in 0..blk.cols() {
                let v = blk[(i, j)];
                imag = imag.max(v.im.abs());
                t[(r0 + i, c0 + j)] = v.re;
                if mirror {
                    t[(c0 + j, r0 + i)] = v.re;
                }
            }
        }
    };
    for n in 0..m {
        let diag = real_parts(&on.beta[n], &s[n], &s[n]);
        for (ti, blk) in t.iter_mut().zip(diag.iter()) {
            asym = asym.max(blk.max_abs_diff(&blk.transpose()));
            let sym = blk.add(&blk.transpose()).scale(&Complex64::new(0.5, 0.0));
            place(ti, &sym, offset(n), offset(n), false);
        }
        if n + 1 < m {
            let upper = real_parts(&on.alpha[n], &s[n], &s[n + 1]);
            let lower = real_parts(&on.gamma[n + 1], &s[n + 1], &s[n]);
            for ((ti, up), lo) in t.iter_mut().zip(upper.iter()).zip(lower.iter()) {
                asym = asym.max(lo.max_abs_diff(&up.transpose()));
                place(ti, up, offset(n), offset(n + 1), true);
            }
        }
    }
    let [t1, t2] = t;
    JacobiPair {
        m,
        t1,
        t2,
        imag_residual: imag,
        symmetry_residual: asym,
    }
}

impl JacobiPair {
    pub fn size(&self) -> usize {
        self.t1.nrows()
    }

    /// `‖T1 T2 − T2 T1‖_max / (‖T1‖_F ‖T2‖_F)`, zero when either factor is.
    pub fn commutator(&self) -> f64 {
        let denom = self.t1.norm() * self.t2.norm();
        if denom == 0.0 {
            return 0.0;
        }
        let c = &self.t1 * &self.t2 - &self.t2 * &self.t1;
        c.amax() / denom
    }

    /// `max(‖T1‖_F, ‖T2‖_F)`
    pub fn scale(&self) -> f64 {
        self.t1.norm().max(self.t2.norm())
    }
}

/// Joint eigenpairs of a commuting Jacobi pair.
#[derive(Clone, Debug)]
pub struct JointEigen {
    pub nodes: Vec<(f64, f64)>,
    /// orthonormal eigenvectors as columns
    pub vectors: DMatrix<f64>,
    /// `max_k max(‖T1 v − x v‖, ‖T2 v − y v‖)`
    pub joint_residual: f64,
    /// `max_k ‖T v − λ v‖` for the mixed matrix
    pub eigen_residual: f64,
}

// Mixing directions tried in order; a single one can merge eigenvalues when
// two nodes share a projection.
const MIX_ANGLES: [f64; 5] = [0.955_316_618_124_509_3, 0.401, 1.303, 2.207, 0.677];

fn mixed_eigen(jac: &JacobiPair, theta: f64) -> JointEigen {
    let (s, c) = theta.sin_cos();
    let mixed = &jac.t1 * c + &jac.t2 * s;
    let eig = SymmetricEigen::new(mixed.clone());
    let vectors = eig.eigenvectors;
    let mut nodes = Vec::with_capacity(jac.size());
    let mut joint: f64 = 0.0;
    let mut eres: f64 = 0.0;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let v = vectors.column(k);
        let t1v = &jac.t1 * v;
        let t2v = &jac.t2 * v;
        let x = v.dot(&t1v);
        let y = v.dot(&t2v);
        joint = joint.max((t1v - v * x).norm()).max((t2v - v * y).norm());
        eres = eres.max((&mixed * v - v * *lambda).norm());
        nodes.push((x, y));
    }
    JointEigen {
        nodes,
        vectors,
        joint_residual: joint,
        eigen_residual: eres,
    }
}

/// Eigendecomposes `cos θ T1 + sin θ T2` for a few fixed `θ` and keeps the
/// decomposition with the smallest joint residual. Nodes are read back with
/// Rayleigh quotients.
pub fn common_zeros(jac: &JacobiPair) -> JointEigen {
    let mut best: Option<JointEigen> = None;
    for theta in MIX_ANGLES {
        let e = mixed_eigen(jac, theta);
        if best.as_ref().map_or(true, |b| e.joint_residual < b.joint_residual) {
            best = Some(e);
        }
        if best.as_ref().unwrap().joint_residual <= 1e-13 * jac.scale().max(1.0) {
            break;
        }
    }
    best.expect("at least one mixing angle")
}

/// `λ_k = v_k[0]² · L(1)`.
pub fn gaussian_weights(eig: &JointEigen, total_mass: f64) -> Result<Vec<f64>> {
    (0..eig.vectors.ncols())
        .map(|k| {
            let v0 = eig.vectors[(0, k)];
            if v0.abs() < 1e-150 {
                Err(Error::ZeroFirstComponent)
            } else {
                Ok(v0 * v0 * total_mass)
            }
        })
        .collect()
}

/// `λ = 1 / Σ_{n<m} ‖H_n^{−1/2} Q_n(node)‖²`.
pub fn christoffel_weights(
    nodes: &[(f64, f64)],
    m: usize,
    qfam: &PolyFamily<Complex64>,
    inv_sqrt_h: &[CMatrix<Complex64>],
) -> Vec<f64> {
    nodes
        .iter()
        .map(|&(x, y)| {
            let z = Complex64::new(x, y);
            let mut sum = 0.0;
            for n in 0..m {
                let q = qfam.eval_level(n, z);
                let h = &inv_sqrt_h[n];
                for i in 0..=n {
                    let p: Complex64 = (0..=n).map(|j| h[(i, j)] * q[j]).sum();
                    sum += p.norm_sqr();
                }
            }
            1.0 / sum
        })
        .collect()
}

/// Largest relative moment error over `z^j z̄^k`, `j + k ≤ 2m − 1`.
///
/// Vanishing moments have no relative error of their own; there the error is
/// measured against `Σ w_i |z_i|^(j+k)`, the size of the cancelling sum.
pub fn verify_exactness(nodes: &[(f64, f64)], weights: &[f64], m: usize, moments: &MomentTable<Complex64>) -> Result<f64> {
    let deg = 2 * m - 1;
    if moments.max_degree() < deg {
        return Err(Error::InsufficientDepth {
            needed: deg,
            available: moments.max_degree(),
        });
    }
    let mut worst: f64 = 0.0;
    for j in 0..=deg {
        for k in 0..=deg - j {
            let mut approx = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            for (&(x, y), &w) in nodes.iter().zip(weights) {
                let z = Complex64::new(x, y);
                approx += z.powu(j as u32) * z.conj().powu(k as u32) * w;
                mass += w.abs() * z.norm().powi((j + k) as i32);
            }
            let mu = *moments.get(j, k)?;
            let err = (approx - mu).norm();
            let vanishing = mu.norm() <= 1e-14 * mass.max(1.0);
            worst = worst.max(if vanishing { err / mass.max(1.0) } else { err / mu.norm() });
        }
    }
    Ok(worst)
}

/// `−3(x²+y²+1)² + 8(x³−3xy²) + 4`, nonnegative on the closed deltoid.
pub fn deltoid_margin(x: f64, y: f64) -> f64 {
    let r = x * x + y * y + 1.0;
    -3.0 * r * r + 8.0 * (x * x * x - 3.0 * x * y * y) + 4.0
}

/// Scale `s` with `s²/s̄ = c`; the P-family at `c` is the one at `1` with
/// `z ↦ z/s`.
pub fn deltoid_scale(c: Complex64) -> Complex64 {
    Complex64::from_polar(c.norm(), c.arg() / 3.0)
}

/// Boundary of the region carrying the nodes when `a = c`, sampled at
/// `samples` angles (closed: the last point repeats the first).
pub fn deltoid_boundary(c: Complex64, samples: usize) -> Vec<(f64, f64)> {
    let s = deltoid_scale(c);
    (0..=samples)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / samples as f64;
            let w = s * (Complex64::from_polar(2.0, th) + Complex64::from_polar(1.0, -2.0 * th));
            (w.re, w.im)
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub commutator: f64,
    pub joint_residual: f64,
    pub eigen_residual: f64,
    pub orthonormal_residual: f64,
    pub imag_residual: f64,
    pub symmetry_residual: f64,
    pub weight_crosscheck: f64,
    pub weight_sum_error: f64,
    pub min_weight: f64,
    pub min_separation: f64,
    pub exactness: f64,
    pub vanishing: f64,
    /// smallest deltoid margin of the rescaled nodes, only when `a = c`
    pub deltoid_min: Option<f64>,
}

/// Nodes `(x, y)` and weights, sorted lexicographically by node.
#[derive(Clone, Debug, PartialEq)]
pub struct CubatureRule {
    pub m: usize,
    pub a: Complex64,
    pub c: Complex64,
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    /// emitted outside the Gaussian regime without guarantees
    pub forced: bool,
    pub diagnostics: Diagnostics,
}

impl CubatureRule {
    /// Descriptions of every tolerance breach; empty for a certified rule.
    pub fn failures(&self, tol: &Tolerances) -> Vec<String> {
        let d = &self.diagnostics;
        let mut out = Vec::new();
        let mut check = |name: &str, value: f64, limit: f64| {
            if !(value <= limit) {
                out.push(format!("{name} {value:e} exceeds {limit:e}"));
            }
        };
        check("commutator", d.commutator, tol.commutator);
        check("joint residual", d.joint_residual, tol.joint_residual);
        check("orthonormal relation", d.orthonormal_residual, tol.orthonormal);
        check("weight cross-check", d.weight_crosscheck, tol.weight_crosscheck);
        check("exactness", d.exactness, tol.exactness);
        check("vanishing", d.vanishing, tol.vanishing);
        if self.nodes.len() != self.m * (self.m + 1) / 2 {
            out.push(format!("node count {}", self.nodes.len()));
        }
        if !(d.min_weight > 0.0) {
            out.push(format!("non-positive weight {:e}", d.min_weight));
        }
        if self.nodes.len() > 1 && !(d.min_separation > tol.separation) {
            out.push(format!("nodes not separated ({:e})", d.min_separation));
        }
        if let Some(g) = d.deltoid_min {
            if g < -1e-9 {
                out.push(format!("node outside deltoid (margin {g:e})"));
            }
        }
        out
    }
}

fn sort_nodes(nodes: &mut Vec<(f64, f64)>, weights: &mut Vec<f64>) {
    let mut idx: Vec<usize> = (0..nodes.len()).collect();
    idx.sort_by(|&i, &j| {
        nodes[i]
            .0
            .total_cmp(&nodes[j].0)
            .then(nodes[i].1.total_cmp(&nodes[j].1))
    });
    *nodes = idx.iter().map(|&i| nodes[i]).collect();
    *weights = idx.iter().map(|&i| weights[i]).collect();
}

fn min_separation(nodes: &[(f64, f64)]) -> f64 {
    let mut dmin = f64::INFINITY;
    let mut diam: f64 = 0.0;
    for (i, p) in nodes.iter().enumerate() {
        for q in &nodes[i + 1..] {
            let d = (p.0 - q.0).hypot(p.1 - q.1);
            dmin = dmin.min(d);
            diam = diam.max(d);
        }
    }
    if diam == 0.0 {
        f64::INFINITY
    } else {
        dmin / diam
    }
}

/// `max_{node, k} |Q_k^m(node)| / max coeff |Q_k^m|`.
pub fn vanishing_residual(nodes: &[(f64, f64)], m: usize, qfam: &PolyFamily<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for p in qfam.level(m) {
        let scale = p.max_coeff_magnitude();
        for &(x, y) in nodes {
            worst = worst.max(p.eval_xy(x, y).norm() / scale);
        }
    }
    worst
}

/// Degree `2m − 1` Gaussian rule for `(a, c)`.
///
/// Refuses parameters outside the Gaussian regime, and fails if the Jacobi
/// pair does not commute or the joint eigenvectors miss the tolerance.
/// The remaining checks are recorded in the diagnostics; see
/// [`CubatureRule::failures`].
pub fn build_rule<S: Scalar>(m: usize, a: &S, c: &S, tol: &Tolerances) -> Result<CubatureRule> {
    if m == 0 {
        return Err(Error::Dimension("cubature needs m ≥ 1".into()));
    }
    let regime = param_classify(a, c, REALITY_TOL);
    if regime != ParamRegime::GaussianValid {
        let first_failure = if regime == ParamRegime::Degenerate {
            None
        } else {
            posdef_probe(m.max(12), a, c)
        };
        return Err(Error::RegimeRefused {
            regime,
            first_failure,
        });
    }
    let (qfam, _) = gen_q(m, a, c);
    let coeffs = q_coeffs(2 * m, a, c);
    let grams = gram_recursive(m, &coeffs)?;
    let moments = moment_table(2 * m - 1, &coeffs)?.to_complex();

    let coeffs_c: Vec<_> = coeffs.iter().map(ThreeTermCoeffs::to_complex).collect();
    let grams_c: Vec<_> = grams.iter().map(CMatrix::to_complex).collect();
    let on = orthonormalize(m, &coeffs_c, &grams_c)?;
    let jac = build_jacobi(m, &on);

    let commutator = jac.commutator();
    if commutator > tol.commutator {
        return Err(Error::NonCommuting { commutator });
    }
    let eig = common_zeros(&jac);
    let limit = tol.joint_residual * jac.scale();
    if eig.joint_residual > limit {
        return Err(Error::JointResidual {
            residual: eig.joint_residual,
            tol: limit,
        });
    }
    let total_mass = moments.get(0, 0)?.re;
    let mut weights = gaussian_weights(&eig, total_mass)?;
    let mut nodes = eig.nodes.clone();

    let qc = qfam.to_complex();
    let christoffel = christoffel_weights(&nodes, m, &qc, &on.inv_sqrt_h);
    let weight_crosscheck = weights
        .iter()
        .zip(&christoffel)
        .map(|(w, cw)| ((w - cw) / w).abs())
        .fold(0.0, f64::max);

    sort_nodes(&mut nodes, &mut weights);
    let (ac, cc) = (a.to_c64(), c.to_c64());
    let deltoid_min = (a.clone() - c.clone()).is_zero().then(|| {
        let s = deltoid_scale(cc);
        nodes
            .iter()
            .map(|&(x, y)| {
                let w = Complex64::new(x, y) / s / 3.0;
                deltoid_margin(w.re, w.im)
            })
            .fold(f64::INFINITY, f64::min)
    });
    let diagnostics = Diagnostics {
        commutator,
        joint_residual: eig.joint_residual,
        eigen_residual: eig.eigen_residual,
        orthonormal_residual: on.relation_residual,
        imag_residual: jac.imag_residual,
        symmetry_residual: jac.symmetry_residual,
        weight_crosscheck,
        weight_sum_error: (weights.iter().sum::<f64>() - total_mass).abs(),
        min_weight: weights.iter().copied().fold(f64::INFINITY, f64::min),
        min_separation: min_separation(&nodes),
        exactness: verify_exactness(&nodes, &weights, m, &moments)?,
        vanishing: vanishing_residual(&nodes, m, &qc),
        deltoid_min,
    };
    Ok(CubatureRule {
        m,
        a: ac,
        c: cc,
        nodes,
        weights,
        forced: false,
        diagnostics,
    })
}

/// Common zeros of `Q_0^m, …, Q_m^m` for any `(a, c)`, without realness or
/// positivity guarantees. Nodes are the real parts of the joint
/// eigenvalues; weights are NaN.
pub fn forced_nodes<S: Scalar>(m: usize, a: &S, c: &S) -> Result<CubatureRule> {
    if m == 0 {
        return Err(Error::Dimension("cubature needs m ≥ 1".into()));
    }
    let coeffs: Vec<_> = q_coeffs(m, a, c).iter().map(ThreeTermCoeffs::to_complex).collect();
    let size = offset(m);
    let mut zop = DMatrix::<Complex64>::zeros(size, size);
    let mut wop = DMatrix::<Complex64>::zeros(size, size);
    for n in 0..m {
        let co = &coeffs[n];
        let put = |dst: &mut DMatrix<Complex64>, blk: &CMatrix<Complex64>, c0: usize| {
            for i in 0..blk.rows() {
                for j in 0..blk.cols() {
                    dst[(offset(n) + i, c0 + j)] = blk[(i, j)];
                }
            }
        };
        put(&mut zop, &co.beta, offset(n));
        put(&mut wop, &co.beta_vee(), offset(n));
        if n + 1 < m {
            put(&mut zop, &co.alpha, offset(n + 1));
            put(&mut wop, &co.alpha_vee(), offset(n + 1));
        }
        if n >= 1 {
            put(&mut zop, &co.gamma, offset(n - 1));
            put(&mut wop, &co.gamma_vee(), offset(n - 1));
        }
    }
    let half = Complex64::new(0.5, 0.0);
    let xop = (&zop + &wop) * half;
    let yop = (&zop - &wop) * Complex64::new(0.0, -0.5);
    let mixed = &xop + &yop * Complex64::new(std::f64::consts::SQRT_2, 0.0);
    let schur = Schur::try_new(mixed.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::Dimension("eigenvalue iteration did not converge".into()))?;
    let (_, tri) = schur.unpack();
    let scale = mixed.norm().max(1.0);
    let mut nodes = Vec::with_capacity(size);
    for k in 0..size {
        let lambda = tri[(k, k)];
        let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
        let lu = (&mixed - DMatrix::identity(size, size) * shift).lu();
        let mut v = DVector::from_element(size, Complex64::new(1.0, 0.0));
        for _ in 0..3 {
            if let Some(next) = lu.solve(&v) {
                let nrm = next.norm();
                if nrm > 0.0 && nrm.is_finite() {
                    v = next / Complex64::new(nrm, 0.0);
                }
            }
        }
        let vv = v.dotc(&v);
        let x = v.dotc(&(&xop * &v)) / vv;
        let y = v.dotc(&(&yop * &v)) / vv;
        nodes.push((x.re, y.re));
    }
    let mut weights = vec![f64::NAN; size];
    sort_nodes(&mut nodes, &mut weights);
    Ok(CubatureRule {
        m,
        a: a.to_c64(),
        c: c.to_c64(),
        nodes,
        weights,
        forced: true,
        diagnostics: Diagnostics {
            min_weight: f64::NAN,
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::int(re, im)
    }

    #[test]
    fn single_node_rule() {
        let one = g(1, 0);
        let rule = build_rule(1, &one, &one, &Tolerances::default()).unwrap();
        assert_eq!(rule.nodes, vec![(0.0, 0.0)]);
        assert!((rule.weights[0] - 1.0).abs() < 1e-15);
        assert!(rule.failures(&Tolerances::default()).is_empty());
    }

    #[test]
    fn deltoid_rule_m2() {
        let one = g(1, 0);
        let rule = build_rule(2, &one, &one, &Tolerances::default()).unwrap();
        assert_eq!(rule.nodes.len(), 3);
        let u = crate::families::gen_chebyshev_u::<Complex64>(2);
        for &(x, y) in &rule.nodes {
            for k in 0..=2 {
                assert!(u.get(2, k).eval_xy(x / 3.0, y / 3.0).norm() < 1e-10);
            }
        }
        assert!(rule.failures(&Tolerances::default()).is_empty(), "{:?}", rule.diagnostics);
    }

    #[test]
    fn orthonormal_relation_at_degree_one() {
        let (a, c) = (Complex64::new(1.2, 0.0), Complex64::new(1.0, 0.0));
        let co: Vec<_> = q_coeffs(3, &a, &c);
        let grams = gram_recursive(3, &co).unwrap();
        let on = orthonormalize(3, &co, &grams).unwrap();
        assert!(on.relation_residual < 1e-12);
    }

    #[test]
    fn deltoid_weights_repeat_in_orbits() {
        let one = g(1, 0);
        let rule = build_rule(4, &one, &one, &Tolerances::default()).unwrap();
        let rot = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        for (&(x, y), &w) in rule.nodes.iter().zip(&rule.weights) {
            let p = Complex64::new(x, y) * rot;
            let (i, _) = rule
                .nodes
                .iter()
                .enumerate()
                .map(|(i, &(u, v))| (i, (Complex64::new(u, v) - p).norm()))
                .min_by(|l, r| l.1.total_cmp(&r.1))
                .unwrap();
            assert!((rule.weights[i] - w).abs() < 1e-10);
        }
    }

    #[test]
    fn refusal_outside_regime() {
        let err = build_rule(8, &GaussRat::real(5, 2), &g(1, 0), &Tolerances::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::RegimeRefused {
                regime: ParamRegime::QuasiDefiniteOnly,
                first_failure: Some(_)
            }
        ));
        let err = build_rule(3, &g(0, 0), &g(1, 0), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::RegimeRefused { regime: ParamRegime::Degenerate, .. }));
    }

    #[test]
    fn non_posdef_gram_is_reported() {
        let (a, c) = (Complex64::new(2.5, 0.0), Complex64::new(1.0, 0.0));
        let co = q_coeffs(4, &a, &c);
        let grams = gram_recursive(4, &co).unwrap();
        assert!(matches!(
            orthonormalize(4, &co, &grams),
            Err(Error::NotPositiveDefinite { degree: 2 })
        ));
    }

    #[test]
    fn forced_nodes_match_gaussian_nodes() {
        let a = GaussRat::real(3, 2);
        let one = g(1, 0);
        let rule = build_rule(4, &a, &one, &Tolerances::default()).unwrap();
        let forced = forced_nodes(4, &a, &one).unwrap();
        assert!(forced.forced);
        assert_eq!(rule.nodes.len(), forced.nodes.len());
        for p in &rule.nodes {
            let nearest = forced
                .nodes
                .iter()
                .map(|q| (p.0 - q.0).hypot(p.1 - q.1))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-7, "{p:?}");
        }
    }

    #[test]
    fn shared_projection_does_not_merge_nodes() {
        // at m = 6 on the deltoid two nodes share x + √2 y
        let rule = build_rule(6, &g(1, 0), &g(1, 0), &Tolerances::default()).unwrap();
        assert!(rule.failures(&Tolerances::default()).is_empty());
        assert!(rule.diagnostics.joint_residual < 1e-12);
    }

    #[test]
    fn exactness_holds_at_degree_twelve() {
        for a in [g(1, 0), GaussRat::real(3, 2), GaussRat::real(1, 2)] {
            let rule = build_rule(12, &a, &g(1, 0), &Tolerances::default()).unwrap();
            assert_eq!(rule.nodes.len(), 78);
            assert!(rule.diagnostics.exactness <= 1e-8, "{a}: {}", rule.diagnostics.exactness);
        }
    }

    #[test]
    fn boundary_curve() {
        let b = deltoid_boundary(Complex64::new(1.0, 0.0), 360);
        assert_eq!(b.len(), 361);
        assert!((b[0].0 - 3.0).abs() < 1e-15);
        for &(x, y) in &b {
            assert!(deltoid_margin(x / 3.0, y / 3.0).abs() < 1e-12);
        }
    }
}
