//! Invariant metrics and differential forms on `m`: the reference metric
//! `h`, the layer-coefficient HKT family, hyperhermitian checks, the
//! exterior derivative of invariant forms, and the HKT residual on
//! holomorphic triples.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::joyce::{complexify, CosetSpace, HypercomplexStructure, MLabel};
use crate::lie::{RootId, C64};

/// A residual reported both raw and relative to the metric's operator norm.
#[derive(Debug, Clone, Copy)]
pub struct Residual {
    pub raw: f64,
    pub relative: f64,
}

impl Residual {
    pub fn new(raw: f64, scale: f64) -> Residual {
        Residual {
            raw,
            relative: raw / scale.max(f64::MIN_POSITIVE),
        }
    }
}

/// An invariant metric as a Gram matrix on the real basis of `m`, optionally
/// tagged with the layer coefficients when it is of the layer-diagonal form.
#[derive(Debug, Clone)]
pub struct InvariantMetric {
    pub gram: DMatrix<f64>,
    pub layer_coeffs: Option<Vec<f64>>,
}

impl InvariantMetric {
    /// Largest absolute eigenvalue of the Gram matrix.
    pub fn op_norm(&self) -> f64 {
        self.gram
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.gram
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .all(|x| *x > 0.0)
    }

    /// C-bilinear evaluation on complexified real-basis coordinates.
    pub fn eval(&self, x: &DVector<C64>, y: &DVector<C64>) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..x.len() {
            if x[a].norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..y.len() {
                acc += x[a] * y[b] * self.gram[(a, b)];
            }
        }
        acc
    }

    /// Gram matrix on the cw basis (C-bilinear extension).
    pub fn cw_gram(&self, coset: &CosetSpace) -> DMatrix<C64> {
        let si = coset.s_inv_matrix();
        si.transpose() * complexify(&self.gram) * si
    }

    /// Both sign conventions for the root norm: `(g(E_a, conj E_a),
    /// g(E_a, E_{-a}))`. They differ by sign since `conj E_a = -E_{-a}`;
    /// the first is the positive one used throughout.
    pub fn g_root_conventions(&self, coset: &CosetSpace, r: RootId) -> (f64, f64) {
        let v = self.g_root(coset, r);
        (v, -v)
    }

    /// `g_a := g(E_a, conj E_a)` for a root of `R-hat` (either sign).
    pub fn g_root(&self, coset: &CosetSpace, r: RootId) -> f64 {
        let model = &coset.algebra.model;
        let pos = if model.is_positive(r) {
            r
        } else {
            model.negate(r)
        };
        let gc = self.cw_gram(coset);
        let p = coset.cw_index_of_root(pos).unwrap();
        let q = coset.cw_index_of_root(model.negate(pos)).unwrap();
        // conj E_a = -E_{-a}
        -gc[(p, q)].re
    }

    /// Max violation of ad(l)-invariance over the `l^C` basis.
    pub fn ad_invariance_residual(&self, coset: &CosetSpace) -> Residual {
        let gc = self.cw_gram(coset);
        let mut raw = 0.0f64;
        for k in 0..coset.dim_l() {
            let ad = coset.ad_l(k);
            let d = ad.transpose() * &gc + &gc * ad;
            raw = raw.max(d.iter().fold(0.0f64, |a, x| a.max(x.norm())));
        }
        Residual::new(raw, self.op_norm())
    }
}

/// The reference metric `h`: `-B` on each `d_j + f_j`, the frame direction
/// orthogonal to them with `h(X_1^j, X_1^j) = 4/|a_j|^2`, distinct layers
/// orthogonal.
pub fn reference_metric(coset: &CosetSpace) -> InvariantMetric {
    let n = coset.dim_m();
    let mut gram = DMatrix::from_element(n, n, 0.0);
    for (a, label) in coset.m_labels.iter().enumerate() {
        gram[(a, a)] = match label {
            MLabel::X1(j) | MLabel::X2(j) | MLabel::X3(j) | MLabel::X4(j) => {
                4.0 / coset.alpha_norm2(*j)
            }
            MLabel::U(_) | MLabel::V(_) => 2.0,
        };
    }
    InvariantMetric {
        gram,
        layer_coeffs: Some(vec![1.0; coset.layer_count()]),
    }
}

/// The layer metric `g = sum_j g_j h|_{m_j}`.
pub fn layer_metric(coset: &CosetSpace, coeffs: &[f64]) -> Result<InvariantMetric> {
    assert_eq!(
        coeffs.len(),
        coset.layer_count(),
        "one coefficient per layer"
    );
    for (index, &value) in coeffs.iter().enumerate() {
        // Rejects NaN along with non-positive values.
        if value.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NonPositiveCoefficient { index, value });
        }
    }
    let mut metric = reference_metric(coset);
    for a in 0..coset.dim_m() {
        metric.gram[(a, a)] *= coeffs[coset.layer_of[a]];
    }
    metric.layer_coeffs = Some(coeffs.to_vec());
    Ok(metric)
}

/// Max of `|g(P., P.) - g|` over basis pairs, for `P = I, J`.
pub fn is_hyperhermitian(g: &InvariantMetric, h: &HypercomplexStructure) -> Residual {
    let gi = h.i_mat.transpose() * &g.gram * &h.i_mat - &g.gram;
    let gj = h.j_mat.transpose() * &g.gram * &h.j_mat - &g.gram;
    let raw = gi
        .iter()
        .chain(gj.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    Residual::new(raw, g.op_norm())
}

/// A degree-`p` invariant form with a fully antisymmetric dense coefficient
/// tensor over the real basis of `m`. Antisymmetry is exact by construction:
/// components are written through [`InvariantForm::set`], which mirrors every
/// permutation with its sign.
#[derive(Debug, Clone)]
pub struct InvariantForm {
    pub degree: usize,
    pub dim: usize,
    data: Vec<f64>,
}

impl InvariantForm {
    pub fn zero(degree: usize, dim: usize) -> InvariantForm {
        InvariantForm {
            degree,
            dim,
            data: vec![0.0; dim.pow(degree as u32)],
        }
    }

    fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for &i in idx {
            f = f * self.dim + i;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat(idx)]
    }

    /// Sets the component on a strictly increasing index tuple and mirrors
    /// all permutations.
    pub fn set(&mut self, idx: &[usize], value: f64) {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let mut perm: Vec<usize> = idx.to_vec();
        self.fill_perms(&mut perm, 0, 1.0, value);
    }

    fn fill_perms(&mut self, perm: &mut Vec<usize>, k: usize, sign: f64, value: f64) {
        if k == perm.len() {
            let f = self.flat(perm);
            self.data[f] = sign * value;
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            let s = if i == k { sign } else { -sign };
            self.fill_perms(perm, k + 1, s, value);
            perm.swap(k, i);
        }
    }

    /// Contraction with complexified coordinate vectors.
    pub fn eval(&self, args: &[&DVector<C64>]) -> C64 {
        assert_eq!(args.len(), self.degree);
        let sparse: Vec<Vec<(usize, C64)>> = args
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm_sqr() != 0.0)
                    .map(|(i, c)| (i, *c))
                    .collect()
            })
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        let mut idx = vec![0usize; self.degree];
        self.eval_rec(&sparse, 0, C64::new(1.0, 0.0), &mut idx, &mut acc);
        acc
    }

    fn eval_rec(
        &self,
        sparse: &[Vec<(usize, C64)>],
        k: usize,
        coeff: C64,
        idx: &mut Vec<usize>,
        acc: &mut C64,
    ) {
        if k == sparse.len() {
            *acc += coeff * self.get(idx);
            return;
        }
        for &(i, c) in &sparse[k] {
            idx[k] = i;
            self.eval_rec(sparse, k + 1, coeff * c, idx, acc);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }
}

pub(crate) fn increasing_tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if len > dim {
        return out;
    }
    let mut idx: Vec<usize> = (0..len).collect();
    loop {
        out.push(idx.clone());
        let mut k = len;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < dim - (len - k) {
                idx[k] += 1;
                for j in k + 1..len {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Builds a 2-form from an antisymmetric matrix.
pub fn form_from_matrix(m: &DMatrix<f64>) -> InvariantForm {
    let dim = m.nrows();
    let mut f = InvariantForm::zero(2, dim);
    for a in 0..dim {
        for b in a + 1..dim {
            f.set(&[a, b], m[(a, b)]);
        }
    }
    f
}

/// The Kähler-type forms `w_P = g(P., .)` and the (2,0)-form
/// `Omega = (w_J + i w_K)/2` of a hyperhermitian metric.
pub struct OmegaForms {
    pub omega_i: InvariantForm,
    pub omega_j: InvariantForm,
    pub omega_k: InvariantForm,
    /// Complex matrix of `Omega` on the real basis.
    pub omega: DMatrix<C64>,
}

pub fn omega_forms(g: &InvariantMetric, h: &HypercomplexStructure, tol: f64) -> Result<OmegaForms> {
    let res = is_hyperhermitian(g, h);
    if res.relative > tol {
        return Err(Error::NotHyperhermitian {
            residual: res.relative,
            tolerance: tol,
        });
    }
    let wi = h.i_mat.transpose() * &g.gram;
    let wj = h.j_mat.transpose() * &g.gram;
    let wk = h.k_mat.transpose() * &g.gram;
    let omega = DMatrix::from_fn(wi.nrows(), wi.ncols(), |a, b| {
        C64::new(wj[(a, b)] / 2.0, wk[(a, b)] / 2.0)
    });
    Ok(OmegaForms {
        omega_i: form_from_matrix(&wi),
        omega_j: form_from_matrix(&wj),
        omega_k: form_from_matrix(&wk),
        omega,
    })
}

/// Exterior derivative of an invariant form:
/// `(d f)(X_0..X_p) = sum_{a<b} (-1)^{a+b} f([X_a, X_b]_m, ..)`.
pub fn exterior_derivative(coset: &CosetSpace, phi: &InvariantForm) -> InvariantForm {
    let n = coset.dim_m();
    let p = phi.degree;
    assert!(p >= 1, "derivative of a scalar invariant is zero");
    let mut out = InvariantForm::zero(p + 1, n);

    let mut rest = vec![0usize; p - 1];
    let mut idx = vec![0usize; p];
    for tuple in increasing_tuples(n, p + 1) {
        let mut value = 0.0;
        for a in 0..p + 1 {
            for b in a + 1..p + 1 {
                let br = coset.bracket_m_real(tuple[a], tuple[b]);
                let mut k = 0;
                for (pos, &t) in tuple.iter().enumerate() {
                    if pos != a && pos != b {
                        rest[k] = t;
                        k += 1;
                    }
                }
                let mut term = 0.0;
                for r in 0..n {
                    if br[r] != 0.0 {
                        idx[0] = r;
                        idx[1..].copy_from_slice(&rest);
                        term += br[r] * phi.get(&idx);
                    }
                }
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                value += sign * term;
            }
        }
        if value != 0.0 {
            out.set(&tuple, value);
        }
    }
    out
}

/// Max over holomorphic triples of
/// `|g([X,Y]_{m^{10}}, JZ) + g([Z,X]_{m^{10}}, JY) + g([Y,Z]_{m^{10}}, JX)|`;
/// zero exactly when the metric is HKT.
pub fn hkt_residual(
    coset: &CosetSpace,
    g: &InvariantMetric,
    h: &HypercomplexStructure,
) -> Residual {
    let nh = coset.hol_len();
    let n = coset.dim_m();
    let gc = g.cw_gram(coset);
    let j_cw = coset.s_matrix() * complexify(&h.j_mat) * coset.s_inv_matrix();

    let w: Vec<DVector<C64>> = (0..nh)
        .map(|r| &gc * j_cw.column(r).clone_owned())
        .collect();

    // Holomorphic projection: zero the antiholomorphic block.
    let proj = |v: &DVector<C64>| -> DVector<C64> {
        DVector::from_fn(n, |i, _| if i < nh { v[i] } else { C64::new(0.0, 0.0) })
    };

    let mut raw = 0.0f64;
    for x in 0..nh {
        for y in x + 1..nh {
            let bxy = proj(coset.bracket_m_cw(x, y));
            for z in y + 1..nh {
                let bzx = proj(coset.bracket_m_cw(z, x));
                let byz = proj(coset.bracket_m_cw(y, z));
                let s = bxy.dot(&w[z]) + bzx.dot(&w[y]) + byz.dot(&w[x]);
                raw = raw.max(s.norm());
            }
        }
    }
    Residual::new(raw, g.op_norm())
}

/// Max residual of `g([X,Y]_m, Z) + g(Y, [X,Z]_m)` over real basis triples.
pub fn is_naturally_reductive(coset: &CosetSpace, g: &InvariantMetric) -> Residual {
    let n = coset.dim_m();
    let gv: Vec<Vec<DVector<f64>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| &g.gram * coset.bracket_m_real(a, b))
                .collect()
        })
        .collect();
    let mut raw = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let v = gv[x][y][z] + gv[x][z][y];
                raw = raw.max(v.abs());
            }
        }
    }
    Residual::new(raw, g.op_norm())
}

fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

fn sym_to_matrix(n: usize, v: &DVector<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::from_element(n, n, 0.0);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    m
}

fn matrix_to_sym(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::from_element(sym_dim(n), 0.0);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            v[k] = m[(i, j)];
            k += 1;
        }
    }
    v
}

/// Orthonormal basis (as symmetric matrices) of the space of ad(l)-invariant
/// hyperhermitian symmetric bilinear forms on `m`.
pub fn invariant_hyperhermitian_basis(
    coset: &CosetSpace,
    h: &HypercomplexStructure,
) -> Vec<DMatrix<f64>> {
    let n = coset.dim_m();
    let nd = sym_dim(n);

    // Linear constraint operators on symmetric forms, stacked as blocks:
    // S -> P^T S P - S for P = I, J, and real/imaginary parts of
    // S -> Ad^T S + S Ad for each l basis vector.
    type SymOp = Box<dyn Fn(&DMatrix<f64>) -> DMatrix<f64>>;
    let mut ops: Vec<SymOp> = Vec::new();
    let i_mat = h.i_mat.clone();
    let j_mat = h.j_mat.clone();
    ops.push(Box::new(move |s| i_mat.transpose() * s * &i_mat - s));
    ops.push(Box::new(move |s| j_mat.transpose() * s * &j_mat - s));
    for k in 0..coset.dim_l() {
        let ad = coset.s_inv_matrix() * coset.ad_l(k) * coset.s_matrix();
        for part in 0..2 {
            let adr = DMatrix::from_fn(n, n, |i, j| {
                if part == 0 {
                    ad[(i, j)].re
                } else {
                    ad[(i, j)].im
                }
            });
            if adr.iter().all(|x| x.abs() < 1e-14) {
                continue;
            }
            ops.push(Box::new(move |s| adr.transpose() * s + s * &adr));
        }
    }

    let mut constraint = DMatrix::from_element(ops.len() * nd, nd, 0.0);
    for col in 0..nd {
        let mut unit = DVector::from_element(nd, 0.0);
        unit[col] = 1.0;
        let s = sym_to_matrix(n, &unit);
        for (block, op) in ops.iter().enumerate() {
            let d = matrix_to_sym(&op(&s));
            for r in 0..nd {
                constraint[(block * nd + r, col)] = d[r];
            }
        }
    }

    let svd = constraint.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let smax = svd.singular_values.iter().fold(0.0f64, |a, x| a.max(*x));
    let mut basis = Vec::new();
    for (k, sv) in svd.singular_values.iter().enumerate() {
        if *sv <= 1e-10 * smax.max(1.0) {
            basis.push(sym_to_matrix(n, &v_t.row(k).transpose()));
        }
    }
    for k in svd.singular_values.len()..nd {
        basis.push(sym_to_matrix(n, &v_t.row(k).transpose()));
    }
    basis
}

/// A random ad(l)-invariant hyperhermitian perturbation of a layer metric,
/// with no layer-diagonal component, scaled to Frobenius size `size`.
pub fn perturbed_metric(
    coset: &CosetSpace,
    h: &HypercomplexStructure,
    base: &InvariantMetric,
    seed: u64,
    size: f64,
) -> Result<InvariantMetric> {
    let basis = invariant_hyperhermitian_basis(coset, h);
    let n = coset.dim_m();

    // Normalized layer-diagonal directions (disjoint supports).
    let layer_dirs: Vec<DVector<f64>> = (0..coset.layer_count())
        .map(|j| {
            let mut m = reference_metric(coset).gram;
            for a in 0..n {
                if coset.layer_of[a] != j {
                    for b in 0..n {
                        m[(a, b)] = 0.0;
                        m[(b, a)] = 0.0;
                    }
                }
            }
            let v = matrix_to_sym(&m);
            let norm = v.norm();
            v / norm
        })
        .collect();

    let sym_basis: Vec<DVector<f64>> = basis.iter().map(matrix_to_sym).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..64 {
        let mut w = DVector::from_element(sym_dim(n), 0.0);
        for b in &sym_basis {
            let c: f64 = rng.gen_range(-1.0..1.0);
            w += b * c;
        }
        for dir in &layer_dirs {
            let c = w.dot(dir);
            w -= dir * c;
        }
        let mat = sym_to_matrix(n, &w);
        let norm = mat.norm();
        if norm < 1e-9 {
            continue;
        }
        let gram = &base.gram + &mat * (size / norm);
        let candidate = InvariantMetric {
            gram,
            layer_coeffs: None,
        };
        if candidate.is_positive_definite() {
            return Ok(candidate);
        }
    }
    Err(Error::InternalConsistency(
        "no admissible perturbation direction found".into(),
    ))
}
