//! Chern-Ricci computation and the HKT-Einstein solution; Bismut
//! Lambda-operators with derived torsion and curvature, the parallel-torsion
//! and parallel-curvature residuals, and the strong-HKT residual.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::{
    exterior_derivative, hkt_residual, increasing_tuples, InvariantForm, InvariantMetric, Residual,
};
use crate::joyce::{complexify, CosetSpace, HolLabel, HypercomplexStructure};
use crate::lie::{RootId, C64};

/// Which invariant connection a [`ConnectionModel`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    Canonical,
    Bismut,
    ChernPartial,
}

/// Sparse column-major matrix: entry list `(row, coefficient)` per column.
type SparseCols = Vec<Vec<(usize, C64)>>;

/// An invariant connection through its Nomizu map on the cw basis, with the
/// torsion and curvature tensors derived from it.
pub struct ConnectionModel {
    pub kind: ConnectionKind,
    /// Lambda of each cw basis vector, as a matrix on `m^C` in cw coordinates.
    lambda: Vec<DMatrix<C64>>,
    /// Sparse columns of each Lambda matrix.
    lambda_sparse: Vec<SparseCols>,
    /// `T(e_p, e_q)` in cw coordinates.
    torsion: Vec<Vec<DVector<C64>>>,
    /// `R(e_p, e_q)` in cw coordinates, stored sparse (the matrices are
    /// diagonal-plus-shift for the connections built here).
    curvature: Vec<Vec<SparseCols>>,
}

impl ConnectionModel {
    pub fn lambda_cw(&self, p: usize) -> &DMatrix<C64> {
        &self.lambda[p]
    }

    /// Lambda of a real basis vector, as a real endomorphism of `m`.
    pub fn lambda_real(&self, coset: &CosetSpace, a: usize) -> DMatrix<f64> {
        let n = coset.dim_m();
        let mut acc = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let s = coset.s_matrix();
        for p in 0..n {
            let c = s[(p, a)];
            if c.norm_sqr() != 0.0 {
                acc += &self.lambda[p] * c;
            }
        }
        let real = coset.s_inv_matrix() * acc * coset.s_matrix();
        DMatrix::from_fn(n, n, |i, j| real[(i, j)].re)
    }

    pub fn torsion_cw(&self, p: usize, q: usize) -> &DVector<C64> {
        &self.torsion[p][q]
    }

    /// `R(e_p, e_q)` as a dense matrix.
    pub fn curvature_cw(&self, p: usize, q: usize) -> DMatrix<C64> {
        let n = self.lambda.len();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for (col, entries) in self.curvature[p][q].iter().enumerate() {
            for &(row, c) in entries {
                m[(row, col)] = c;
            }
        }
        m
    }

    /// Torsion in real coordinates, `T(m_a, m_b)` as real vectors.
    pub fn torsion_real(&self, coset: &CosetSpace) -> Vec<Vec<DVector<f64>>> {
        let n = coset.dim_m();
        let s = coset.s_matrix();
        let si = coset.s_inv_matrix();
        let mut out = vec![vec![DVector::from_element(n, 0.0); n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let mut acc = DVector::from_element(n, C64::new(0.0, 0.0));
                for p in 0..n {
                    let cp = s[(p, a)];
                    if cp.norm_sqr() == 0.0 {
                        continue;
                    }
                    for q in 0..n {
                        let cq = s[(q, b)];
                        if cq.norm_sqr() != 0.0 {
                            acc += &self.torsion[p][q] * (cp * cq);
                        }
                    }
                }
                let real = si * acc;
                debug_assert!(
                    real.iter().all(|c| c.im.abs() < 1e-8),
                    "torsion of real arguments must be real"
                );
                let v = DVector::from_fn(n, |i, _| real[i].re);
                out[b][a] = -v.clone();
                out[a][b] = v;
            }
        }
        out
    }

    /// Max residual of recomputing the torsion from Lambda and the brackets.
    pub fn recompute_residual(&self, coset: &CosetSpace) -> f64 {
        let n = coset.dim_m();
        let mut res = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                let t = lambda_apply(&self.lambda_sparse[p], q)
                    - lambda_apply(&self.lambda_sparse[q], p)
                    - coset.bracket_m_cw(p, q);
                res = res.max((&t - &self.torsion[p][q]).norm());
            }
        }
        res
    }
}

fn lambda_apply(sparse: &[Vec<(usize, C64)>], col: usize) -> DVector<C64> {
    let n = sparse.len();
    let mut v = DVector::from_element(n, C64::new(0.0, 0.0));
    for &(row, c) in &sparse[col] {
        v[row] += c;
    }
    v
}

fn lambda_matvec(sparse: &[Vec<(usize, C64)>], x: &DVector<C64>) -> DVector<C64> {
    let n = sparse.len();
    let mut out = DVector::from_element(n, C64::new(0.0, 0.0));
    for (col, xc) in x.iter().enumerate() {
        if xc.norm_sqr() == 0.0 {
            continue;
        }
        for &(row, c) in &sparse[col] {
            out[row] += c * xc;
        }
    }
    out
}

fn sparsify(m: &DMatrix<C64>) -> Vec<Vec<(usize, C64)>> {
    (0..m.ncols())
        .map(|q| {
            (0..m.nrows())
                .filter(|&r| m[(r, q)].norm_sqr() > 0.0)
                .map(|r| (r, m[(r, q)]))
                .collect()
        })
        .collect()
}

fn finish_connection(
    coset: &CosetSpace,
    kind: ConnectionKind,
    lambda: Vec<DMatrix<C64>>,
) -> ConnectionModel {
    let n = coset.dim_m();
    let lambda_sparse: Vec<_> = lambda.iter().map(sparsify).collect();

    let mut torsion = vec![vec![DVector::from_element(n, C64::new(0.0, 0.0)); n]; n];
    for p in 0..n {
        for q in 0..n {
            torsion[p][q] = lambda_apply(&lambda_sparse[p], q)
                - lambda_apply(&lambda_sparse[q], p)
                - coset.bracket_m_cw(p, q);
        }
    }

    let mut curvature = vec![vec![SparseCols::new(); n]; n];
    for p in 0..n {
        for q in p + 1..n {
            let mut r = &lambda[p] * &lambda[q] - &lambda[q] * &lambda[p];
            let mc = coset.bracket_m_cw(p, q);
            for (s, c) in mc.iter().enumerate() {
                if c.norm_sqr() != 0.0 {
                    r -= &lambda[s] * *c;
                }
            }
            let lc = coset.bracket_l_cw(p, q);
            for (k, c) in lc.iter().enumerate() {
                if c.norm_sqr() != 0.0 {
                    r -= coset.ad_l(k) * *c;
                }
            }
            let sparse = sparsify(&r);
            let neg: SparseCols = sparse
                .iter()
                .map(|col| col.iter().map(|&(row, c)| (row, -c)).collect())
                .collect();
            curvature[q][p] = neg;
            curvature[p][q] = sparse;
        }
    }
    for p in 0..n {
        curvature[p][p] = vec![Vec::new(); n];
    }

    ConnectionModel {
        kind,
        lambda,
        lambda_sparse,
        torsion,
        curvature,
    }
}

/// The canonical connection: `Lambda = 0`, torsion `-[X,Y]_m`.
pub fn canonical_connection(coset: &CosetSpace) -> ConnectionModel {
    let n = coset.dim_m();
    let lambda = vec![DMatrix::from_element(n, n, C64::new(0.0, 0.0)); n];
    finish_connection(coset, ConnectionKind::Canonical, lambda)
}

/// `H_delta-hat = (1/2) sum_{a in R-hat^+} t_a`, exact, in `t_{a_i}` coordinates.
pub fn delta_hat(coset: &CosetSpace) -> Vec<BigRational> {
    let model = &coset.algebra.model;
    let mut acc = vec![BigRational::zero(); model.rank];
    for &g in &coset.r_hat_plus {
        for (i, c) in model.t_vector_rat(g).iter().enumerate() {
            acc[i] += c;
        }
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for c in acc.iter_mut() {
        *c *= &half;
    }
    acc
}

/// `a(H_delta-hat)` for a root, exact.
pub fn root_on_delta_hat(coset: &CosetSpace, a: RootId) -> BigRational {
    let model = &coset.algebra.model;
    let dh = delta_hat(coset);
    model.weight_pairing(&model.t_vector_rat(a), &dh)
}

/// Closed-form Chern-Ricci on the holomorphic frame:
/// `Ric(E_g, conj E_g) = 2i g(H_delta-hat)`, all other components zero.
/// Metric-independent.
pub fn chern_ricci_closed_form(coset: &CosetSpace) -> DMatrix<C64> {
    let nh = coset.hol_len();
    let mut ric = DMatrix::from_element(nh, nh, C64::new(0.0, 0.0));
    for (p, label) in coset.hol_labels.iter().enumerate() {
        if let HolLabel::E(g) = label {
            let v = root_on_delta_hat(coset, *g).to_f64().unwrap();
            ric[(p, p)] = C64::new(0.0, 2.0 * v);
        }
    }
    ric
}

/// Sign relating the mirrored cw slot to the actual conjugate:
/// `conj H_j` is the slot itself, `conj E_g = -E_{-g}`.
fn conj_hol_sign(coset: &CosetSpace, q: usize) -> f64 {
    match coset.hol_labels[q] {
        HolLabel::H(_) => 1.0,
        HolLabel::E(_) => -1.0,
    }
}

/// cw coordinates of the conjugate of an element given in cw coordinates.
fn conj_cw_coords(coset: &CosetSpace, z: &DVector<C64>) -> DVector<C64> {
    let nh = coset.hol_len();
    let n = coset.dim_m();
    let mut out = DVector::from_element(n, C64::new(0.0, 0.0));
    for p in 0..nh {
        let sign = conj_hol_sign(coset, p);
        out[p + nh] = z[p].conj() * sign;
        out[p] = z[p + nh].conj() * sign;
    }
    out
}

/// Chern-Ricci via the Nomizu-map traces
/// `Ric(V, conj W) = -i tr Lambda([V, conj W]_m) - i tr ad([V, conj W]_l)`
/// on the holomorphic frame. Requires a projectable (layer) metric; the
/// result agrees with the closed form and is coefficient-independent.
pub fn chern_ricci_trace(coset: &CosetSpace, g: &InvariantMetric) -> Result<DMatrix<C64>> {
    if g.layer_coeffs.is_none() {
        return Err(Error::NotLayerMetric);
    }
    let nh = coset.hol_len();
    let n = coset.dim_m();

    // tr over m^{1,0} of Lambda(Z_{m^{01}}), an honest diagonal sum of the
    // operator W -> [Z_{01}, W]_{m^{10}} on the holomorphic frame.
    let tr01 = |z: &DVector<C64>| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for s in nh..n {
            if z[s].norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..nh {
                acc += z[s] * coset.bracket_m_cw(s, r)[r];
            }
        }
        acc
    };
    let tr_lambda = |z: &DVector<C64>| -> C64 {
        let conj_z = conj_cw_coords(coset, z);
        tr01(z) - tr01(&conj_z).conj()
    };

    // tr over m^{1,0} of ad(lc_k).
    let trad: Vec<C64> = (0..coset.dim_l())
        .map(|k| {
            let ad = coset.ad_l(k);
            (0..nh).map(|r| ad[(r, r)]).sum()
        })
        .collect();

    let mut ric = DMatrix::from_element(nh, nh, C64::new(0.0, 0.0));
    let minus_i = C64::new(0.0, -1.0);
    for p in 0..nh {
        for q in 0..nh {
            let sign = conj_hol_sign(coset, q);
            let mc = coset.bracket_m_cw(p, nh + q);
            let lc = coset.bracket_l_cw(p, nh + q);
            let mut v = tr_lambda(mc);
            for (k, c) in lc.iter().enumerate() {
                if c.norm_sqr() != 0.0 {
                    v += *c * trad[k];
                }
            }
            ric[(p, q)] = minus_i * v * sign;
        }
    }
    Ok(ric)
}

/// The invariant HKT-Einstein solution.
#[derive(Debug, Clone)]
pub struct EinsteinSolution {
    pub coeffs: Vec<f64>,
    pub coeffs_rat: Vec<BigRational>,
    pub lambda_constant: f64,
    pub delta_hat: Vec<BigRational>,
    pub residual: f64,
}

/// Einstein coefficients `g_j = a_j(H_delta-hat)` (normalization
/// `lambda = 1`), cross-checked against the closed form
/// `(a_j, a_j)/4 * (2 + dim_C f_j)`.
pub fn einstein_coefficients(coset: &CosetSpace) -> Result<EinsteinSolution> {
    let model = &coset.algebra.model;
    let mut coeffs_rat = Vec::new();
    for layer in coset.decomp.layers.iter().take(coset.layer_count()) {
        let v = root_on_delta_hat(coset, layer.alpha);
        let closed_form = model.norm2_rat(layer.alpha) / BigRational::from(BigInt::from(4))
            * BigRational::from(BigInt::from(2 + layer.f_roots.len() as i64));
        if v != closed_form {
            return Err(Error::InternalConsistency(format!(
                "Einstein coefficient mismatch: {v} vs closed form {closed_form}"
            )));
        }
        if !v.is_positive() {
            return Err(Error::InternalConsistency(
                "non-positive Einstein coefficient".into(),
            ));
        }
        coeffs_rat.push(v);
    }
    let coeffs: Vec<f64> = coeffs_rat.iter().map(|c| c.to_f64().unwrap()).collect();
    Ok(EinsteinSolution {
        coeffs,
        coeffs_rat,
        lambda_constant: 1.0,
        delta_hat: delta_hat(coset),
        residual: 0.0,
    })
}

/// Assembles the J-anti-invariant part of the Chern-Ricci form and compares
/// it against `lambda w_I` on the holomorphic frame. Returns the estimated
/// `lambda` (median componentwise ratio) and the max deviation.
pub fn hkt_einstein_residual(
    coset: &CosetSpace,
    g: &InvariantMetric,
    h: &HypercomplexStructure,
    tol: f64,
) -> Result<(f64, Residual)> {
    let hkt = hkt_residual(coset, g, h);
    if hkt.relative > tol {
        return Err(Error::NotHkt {
            residual: hkt.relative,
            tolerance: tol,
        });
    }
    let nh = coset.hol_len();
    let gc = g.cw_gram(coset);

    // rho = (Ric - J Ric)/2 on the frame: i a_j(H_dh) on root slots,
    // 2i |a_j|^2 a_j(H_dh) on H_j slots, zero off the diagonal.
    let mut rho = DMatrix::from_element(nh, nh, C64::new(0.0, 0.0));
    let adh: Vec<f64> = (0..coset.layer_count())
        .map(|j| {
            root_on_delta_hat(coset, coset.decomp.layers[j].alpha)
                .to_f64()
                .unwrap()
        })
        .collect();
    for (p, label) in coset.hol_labels.iter().enumerate() {
        match label {
            HolLabel::H(j) => {
                rho[(p, p)] = C64::new(0.0, 2.0 * coset.alpha_norm2(*j) * adh[*j]);
            }
            HolLabel::E(gr) => {
                let j = coset.layer_of_root(*gr).unwrap();
                rho[(p, p)] = C64::new(0.0, adh[j]);
            }
        }
    }

    // w_I(V, conj W) = i g(V, conj W).
    let mut omega = DMatrix::from_element(nh, nh, C64::new(0.0, 0.0));
    for p in 0..nh {
        for q in 0..nh {
            let sign = conj_hol_sign(coset, q);
            omega[(p, q)] = C64::new(0.0, 1.0) * gc[(p, nh + q)] * sign;
        }
    }

    let omega_scale = omega.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let mut ratios: Vec<f64> = Vec::new();
    for p in 0..nh {
        for q in 0..nh {
            if omega[(p, q)].norm() > 1e-10 * omega_scale {
                ratios.push((rho[(p, q)] / omega[(p, q)]).re);
            }
        }
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lambda = ratios[(ratios.len() - 1) / 2];

    let mut raw = 0.0f64;
    for p in 0..nh {
        for q in 0..nh {
            raw = raw.max((rho[(p, q)] - omega[(p, q)] * lambda).norm());
        }
    }
    Ok((lambda, Residual::new(raw, omega_scale)))
}

/// The Bismut connection of an HKT layer metric through its only possibly
/// non-zero Nomizu components:
///
/// `Lambda(E_a) E_b = (1/2) N_{a,b} (1 + e_a e_b
///     + (1 - e_a e_{a+b}) g_b/g_{a+b} - (1 + e_b e_{a+b}) g_a/g_{a+b}) E_{a+b}`
///
/// for `a, b, a+b` in `R-hat`, and
///
/// `Lambda(H) E_a = ( g(H, (H_a)_m)/g_a + a(H) ) E_a` for toral `H`.
pub fn bismut_lambda(coset: &CosetSpace, g: &InvariantMetric) -> Result<ConnectionModel> {
    let coeffs = g.layer_coeffs.clone().ok_or(Error::NotLayerMetric)?;
    let model = coset.algebra.model.clone();
    let n = coset.dim_m();
    let nh = coset.hol_len();
    let gc = g.cw_gram(coset);

    let g_of_layer = |r: RootId| -> f64 { coeffs[coset.layer_of_root(r).unwrap()] };

    let hat_roots: Vec<(RootId, usize)> = coset
        .r_hat_plus
        .iter()
        .map(|&r| (r, coset.cw_index_of_root(r).unwrap()))
        .chain(coset.r_hat_plus.iter().map(|&r| {
            let neg = model.negate(r);
            (neg, coset.cw_index_of_root(neg).unwrap())
        }))
        .collect();

    let mut lambda = vec![DMatrix::from_element(n, n, C64::new(0.0, 0.0)); n];

    // Root-vector arguments.
    for &(a, pa) in &hat_roots {
        for &(b, pb) in &hat_roots {
            if b == model.negate(a) {
                continue;
            }
            let sum = match model.sum_root(a, b) {
                Some(s) => s,
                None => continue,
            };
            let psum = match coset.cw_index_of_root(sum) {
                Some(p) => p,
                None => continue, // isotropy root: no m-component
            };
            let ea = coset.epsilon(a);
            let eb = coset.epsilon(b);
            let es = coset.epsilon(sum);
            let ga = g_of_layer(a);
            let gb = g_of_layer(b);
            let gs = g_of_layer(sum);
            let coeff = 0.5
                * coset.algebra.constants.n(a, b)
                * (1.0 + ea * eb + (1.0 - ea * es) * gb / gs - (1.0 + eb * es) * ga / gs);
            lambda[pa][(psum, pb)] += C64::new(coeff, 0.0);
        }
    }

    // Toral arguments H_j and conj H_j.
    for p in (0..coset.layer_count()).chain(nh..nh + coset.layer_count()) {
        let h_cartan = cw_basis_cartan(coset, p);
        for &(a, pa) in &hat_roots {
            let (ha_m, _) = coset.split(&coset.algebra.t_element(a));
            let mut ghm = C64::new(0.0, 0.0);
            for (r, c) in ha_m.iter().enumerate() {
                if c.norm_sqr() != 0.0 {
                    ghm += gc[(p, r)] * c;
                }
            }
            let alpha_h = model.root_on_cartan(a, &h_cartan);
            let coeff = ghm / g_of_layer(a) + alpha_h;
            lambda[p][(pa, pa)] += coeff;
        }
    }

    Ok(finish_connection(coset, ConnectionKind::Bismut, lambda))
}

/// Cartan coordinates of a toral cw basis vector (`H_j` or its conjugate).
fn cw_basis_cartan(coset: &CosetSpace, p: usize) -> DVector<C64> {
    let nh = coset.hol_len();
    let el = if p < nh {
        &coset.hol_elements[p]
    } else {
        &coset.antihol_elements[p - nh]
    };
    el.cartan.clone()
}

/// Residual report for a connection against a metric and structure.
#[derive(Debug, Clone)]
pub struct ConnectionReport {
    pub skew_adjoint: f64,
    pub commutes_i: f64,
    pub commutes_j: f64,
    pub recompute: f64,
}

pub fn verify_connection(
    coset: &CosetSpace,
    g: &InvariantMetric,
    h: &HypercomplexStructure,
    model: &ConnectionModel,
) -> ConnectionReport {
    let n = coset.dim_m();
    let gc = g.cw_gram(coset);
    let i_cw = coset.s_matrix() * complexify(&h.i_mat) * coset.s_inv_matrix();
    let j_cw = coset.s_matrix() * complexify(&h.j_mat) * coset.s_inv_matrix();

    let mut skew = 0.0f64;
    let mut ci = 0.0f64;
    let mut cj = 0.0f64;
    for p in 0..n {
        let l = model.lambda_cw(p);
        let s = l.transpose() * &gc + &gc * l;
        skew = skew.max(s.iter().fold(0.0f64, |a, c| a.max(c.norm())));
        ci = ci.max(crate::joyce::cmax(&(l * &i_cw - &i_cw * l)));
        cj = cj.max(crate::joyce::cmax(&(l * &j_cw - &j_cw * l)));
    }
    ConnectionReport {
        skew_adjoint: skew,
        commutes_i: ci,
        commutes_j: cj,
        recompute: model.recompute_residual(coset),
    }
}

/// Sparse rows of the cw Gram matrix, used to pair residual vectors with
/// every basis vector cheaply.
fn gram_rows(gc: &DMatrix<C64>) -> Vec<Vec<(usize, C64)>> {
    (0..gc.nrows())
        .map(|r| {
            (0..gc.ncols())
                .filter(|&c| gc[(r, c)].norm_sqr() > 0.0)
                .map(|c| (c, gc[(r, c)]))
                .collect()
        })
        .collect()
}

fn max_gram_pairing(rows: &[Vec<(usize, C64)>], v: &DVector<C64>) -> f64 {
    let mut best = 0.0f64;
    for row in rows {
        let mut acc = C64::new(0.0, 0.0);
        for &(c, gcv) in row {
            acc += gcv * v[c];
        }
        best = best.max(acc.norm());
    }
    best
}

/// Max over basis tuples of `|g((nabla_W T)(X, Y), Z)|`.
pub fn nabla_torsion_residual(
    coset: &CosetSpace,
    g: &InvariantMetric,
    model: &ConnectionModel,
) -> Residual {
    let n = coset.dim_m();
    let gc = g.cw_gram(coset);
    let rows = gram_rows(&gc);
    let mut raw = 0.0f64;
    for w in 0..n {
        let lw = &model.lambda_sparse[w];
        for x in 0..n {
            let lwx = lambda_apply(lw, x);
            for y in x + 1..n {
                let mut v = lambda_matvec(lw, &model.torsion[x][y]);
                for (b, c) in lwx.iter().enumerate() {
                    if c.norm_sqr() != 0.0 {
                        v -= &model.torsion[b][y] * *c;
                    }
                }
                let lwy = lambda_apply(lw, y);
                for (b, c) in lwy.iter().enumerate() {
                    if c.norm_sqr() != 0.0 {
                        v -= &model.torsion[x][b] * *c;
                    }
                }
                raw = raw.max(max_gram_pairing(&rows, &v));
            }
        }
    }
    Residual::new(raw, g.op_norm())
}

/// Deterministic quadruple enumeration: full when `dim m` is at most the
/// cap (64), otherwise stratified — all quadruples supported on the union of
/// two layers (these cover the discriminating configurations) plus a million
/// seeded random ones. Returns whether sampling was used.
fn for_each_quadruple<F: FnMut(usize, usize, usize, usize)>(
    coset: &CosetSpace,
    cap: usize,
    mut f: F,
) -> bool {
    let n = coset.dim_m();
    if n <= cap {
        for w in 0..n {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        f(w, x, y, z);
                    }
                }
            }
        }
        return false;
    }
    let m = coset.layer_count();
    let layer_indices: Vec<Vec<usize>> = (0..m)
        .map(|j| (0..n).filter(|&a| cw_layer_of(coset, a) == j).collect())
        .collect();
    for j1 in 0..m {
        for j2 in j1 + 1..m {
            let support: Vec<usize> = layer_indices[j1]
                .iter()
                .chain(layer_indices[j2].iter())
                .copied()
                .collect();
            for &w in &support {
                for &x in &support {
                    for &y in &support {
                        for &z in &support {
                            f(w, x, y, z);
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x4a6f7963);
    for _ in 0..1_000_000 {
        f(
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
        );
    }
    true
}

const FULL_ENUMERATION_CAP: usize = 64;

fn cw_layer_of(coset: &CosetSpace, p: usize) -> usize {
    let nh = coset.hol_len();
    match coset.hol_labels[p % nh] {
        HolLabel::H(j) => j,
        HolLabel::E(g) => coset.layer_of_root(g).unwrap(),
    }
}

/// Max over basis tuples of `|g((nabla_V R)(W, X) Y, Z)|`.
pub fn nabla_curvature_residual(
    coset: &CosetSpace,
    g: &InvariantMetric,
    model: &ConnectionModel,
) -> Residual {
    let n = coset.dim_m();
    let gc = g.cw_gram(coset);
    let rows = gram_rows(&gc);
    let mut raw = 0.0f64;
    let add_sparse = |t: &mut DVector<C64>, col: &[(usize, C64)], scale: C64| {
        for &(row, c) in col {
            t[row] += c * scale;
        }
    };
    let mut eval = |v: usize, w: usize, x: usize, y: usize| {
        if x >= w {
            // R is antisymmetric in (W, X); skip the redundant half.
            return;
        }
        let lv = &model.lambda_sparse[v];
        let rwx = &model.curvature[w][x];
        let mut t = DVector::from_element(n, C64::new(0.0, 0.0));
        // Lambda_V (R(W,X) Y)
        for &(row, c) in &rwx[y] {
            for &(r2, c2) in &lv[row] {
                t[r2] += c2 * c;
            }
        }
        for &(b, c) in &lv[w] {
            add_sparse(&mut t, &model.curvature[b][x][y], -c);
        }
        for &(b, c) in &lv[x] {
            add_sparse(&mut t, &model.curvature[w][b][y], -c);
        }
        for &(b, c) in &lv[y] {
            add_sparse(&mut t, &rwx[b], -c);
        }
        raw = raw.max(max_gram_pairing(&rows, &t));
    };
    for_each_quadruple(coset, FULL_ENUMERATION_CAP, |v, w, x, y| eval(v, w, x, y));
    Residual::new(raw, g.op_norm())
}

/// True when the layer coefficients are constant on each irreducible
/// component of the root system meeting `R-hat` — the parallel-torsion
/// condition.
pub fn btp_predicate(coset: &CosetSpace, coeffs: &[f64]) -> bool {
    assert_eq!(coeffs.len(), coset.layer_count());
    let model = &coset.algebra.model;
    for f in 0..model.factors.len() {
        let in_component: Vec<f64> = coset
            .decomp
            .layers
            .iter()
            .take(coset.layer_count())
            .enumerate()
            .filter(|(_, l)| model.component(l.alpha) == f)
            .map(|(j, _)| coeffs[j])
            .collect();
        for w in in_component.windows(2) {
            if (w[0] - w[1]).abs() > 1e-9 * w[0].abs().max(w[1].abs()) {
                return false;
            }
        }
    }
    true
}

/// Outcome of the strong-HKT check.
#[derive(Debug, Clone)]
pub struct StrongReport {
    /// Max skew-symmetry violation of the torsion 3-form.
    pub skew_residual: f64,
    /// Max of `|dc|` over basis quadruples.
    pub dc: Residual,
    /// Max deviation of `dc` on root quadruples from the expanded
    /// coefficient formula.
    pub cross_check: f64,
    /// Number of root quadruples cross-checked.
    pub cross_checked: usize,
}

/// Builds the Bismut torsion 3-form `c(X,Y,Z) = g(T(X,Y), Z)`, verifies its
/// total skew-symmetry, and returns the max of `|dc|`; the metric is strong
/// HKT exactly when this vanishes. Root-vector quadruples summing to zero
/// are additionally cross-checked against the expanded two-product
/// coefficient formula.
pub fn strong_residual(
    coset: &CosetSpace,
    g: &InvariantMetric,
    h: &HypercomplexStructure,
    tol: f64,
) -> Result<StrongReport> {
    let hkt = hkt_residual(coset, g, h);
    if hkt.relative > tol {
        return Err(Error::NotHkt {
            residual: hkt.relative,
            tolerance: tol,
        });
    }
    let model = bismut_lambda(coset, g)?;
    let n = coset.dim_m();
    let torsion = model.torsion_real(coset);

    let scale = g.op_norm();
    let mut skew_residual = 0.0f64;
    let mut c_form = InvariantForm::zero(3, n);
    {
        let mut c = vec![vec![vec![0.0f64; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                let gv = &g.gram * &torsion[a][b];
                for z in 0..n {
                    c[a][b][z] = gv[z];
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for z in 0..n {
                    skew_residual = skew_residual.max((c[a][b][z] + c[a][z][b]).abs());
                }
            }
        }
        if skew_residual > tol * scale.max(1.0) {
            return Err(Error::TorsionNotSkew {
                residual: skew_residual,
            });
        }
        for t in increasing_tuples(n, 3) {
            c_form.set(&t, c[t[0]][t[1]][t[2]]);
        }
    }

    // dc on an arbitrary index quadruple, straight from the 3-form and the
    // bracket tables (multilinear in the four slots).
    let dc_on = |q: [usize; 4]| -> f64 {
        let mut acc = 0.0;
        for a in 0..4usize {
            for b in a + 1..4 {
                let br = coset.bracket_m_real(q[a], q[b]);
                let rest: Vec<usize> = (0..4)
                    .filter(|p| *p != a && *p != b)
                    .map(|p| q[p])
                    .collect();
                let mut term = 0.0;
                for (r, brc) in br.iter().enumerate() {
                    if *brc != 0.0 {
                        term += brc * c_form.get(&[r, rest[0], rest[1]]);
                    }
                }
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * term;
            }
        }
        acc
    };

    // Full exterior derivative up to the enumeration cap; on larger spaces
    // evaluate dc only on the stratified quadruples.
    let (dc, dc_res) = if n <= FULL_ENUMERATION_CAP {
        let dc = exterior_derivative(coset, &c_form);
        let raw = dc.max_abs();
        (Some(dc), Residual::new(raw, scale))
    } else {
        let mut raw = 0.0f64;
        for_each_quadruple(coset, FULL_ENUMERATION_CAP, |w, x, y, z| {
            raw = raw.max(dc_on([w, x, y, z]).abs());
        });
        (None, Residual::new(raw, scale))
    };

    // Cross-check on the configuration of the layer analysis:
    // a + b + c + v = 0, no opposite pair, a + c not a root.
    let mdl = &coset.algebra.model;
    let nt = &coset.algebra.constants;
    let mut cross = 0.0f64;
    let mut checked = 0usize;
    let hat: Vec<RootId> = coset
        .r_hat_plus
        .iter()
        .copied()
        .chain(coset.r_hat_plus.iter().map(|&r| mdl.negate(r)))
        .collect();
    let coeffs = g.layer_coeffs.as_ref().unwrap();
    let g_of = |r: RootId| coeffs[coset.layer_of_root(r).unwrap()];
    let real_coords = |r: RootId| -> DVector<C64> {
        let p = coset.cw_index_of_root(r).unwrap();
        coset.s_inv_matrix().column(p).clone_owned()
    };
    for &a in &hat {
        for &b in &hat {
            if b == a || b == mdl.negate(a) {
                continue;
            }
            for &c in &hat {
                if c == mdl.negate(a) || c == mdl.negate(b) {
                    continue;
                }
                let vcoords: Vec<i64> = (0..mdl.rank)
                    .map(|i| -(mdl.coords(a)[i] + mdl.coords(b)[i] + mdl.coords(c)[i]))
                    .collect();
                let v = match mdl.root_id(&vcoords) {
                    Some(v) => v,
                    None => continue,
                };
                if coset.layer_of_root(v).is_none() || v == mdl.negate(a) {
                    continue;
                }
                if mdl.sum_root(a, c).is_some() {
                    continue;
                }
                // The expansion below is derived for the configuration with
                // a, b holomorphic and c, v antiholomorphic.
                if coset.epsilon(a) < 0.0
                    || coset.epsilon(b) < 0.0
                    || coset.epsilon(c) > 0.0
                    || coset.epsilon(v) > 0.0
                {
                    continue;
                }
                let term1 = match mdl.sum_root(a, b) {
                    Some(ab) if coset.layer_of_root(ab).is_some() => {
                        nt.n(a, b)
                            * nt.n(c, v)
                            * (g_of(a) + g_of(b) + g_of(c) + g_of(v) - 2.0 * g_of(ab))
                    }
                    _ => 0.0,
                };
                let term2 = match mdl.sum_root(a, v) {
                    Some(av) if coset.layer_of_root(av).is_some() => {
                        let eav = coset.epsilon(av);
                        eav * nt.n(a, v)
                            * nt.n(b, c)
                            * (-g_of(a) + g_of(b) - g_of(c) + g_of(v) + 2.0 * eav * g_of(av))
                    }
                    _ => 0.0,
                };
                // The torsion form is minus the twisted derivative of w_I,
                // so dc carries the opposite sign of the expansion.
                let formula = -(term1 + term2);
                let args = [
                    real_coords(a),
                    real_coords(b),
                    real_coords(c),
                    real_coords(v),
                ];
                let dc_val = match &dc {
                    Some(form) => form.eval(&[&args[0], &args[1], &args[2], &args[3]]).re,
                    None => {
                        // Multilinear expansion over the sparse complex
                        // coordinates of the root vectors.
                        let sparse: Vec<Vec<(usize, C64)>> = args
                            .iter()
                            .map(|v| {
                                v.iter()
                                    .enumerate()
                                    .filter(|(_, c)| c.norm_sqr() > 0.0)
                                    .map(|(i, c)| (i, *c))
                                    .collect()
                            })
                            .collect();
                        let mut acc = C64::new(0.0, 0.0);
                        for &(i0, c0) in &sparse[0] {
                            for &(i1, c1) in &sparse[1] {
                                for &(i2, c2) in &sparse[2] {
                                    for &(i3, c3) in &sparse[3] {
                                        acc += c0 * c1 * c2 * c3 * dc_on([i0, i1, i2, i3]);
                                    }
                                }
                            }
                        }
                        acc.re
                    }
                };
                cross = cross.max((dc_val - formula).abs());
                checked += 1;
            }
        }
    }

    Ok(StrongReport {
        skew_residual,
        dc: dc_res,
        cross_check: cross,
        cross_checked: checked,
    })
}

/// A Kähler-obstruction witness: three roots of one layer with equal
/// projected metric values.
#[derive(Debug, Clone)]
pub struct FlagWitness {
    pub layer: usize,
    pub gamma: RootId,
    pub complement: RootId,
    pub sum: RootId,
    pub value: f64,
}

/// Returns a triple `(g, a_j - g, a_j)` inside one layer carrying the same
/// metric value `g_j`; `None` exactly when every layer has `R_j^+ = {a_j}`.
pub fn flag_kahler_obstruction(coset: &CosetSpace, g: &InvariantMetric) -> Option<FlagWitness> {
    let coeffs = g.layer_coeffs.as_ref()?;
    let model = &coset.algebra.model;
    for (j, layer) in coset
        .decomp
        .layers
        .iter()
        .take(coset.layer_count())
        .enumerate()
    {
        if let Some(&gamma) = layer.f_roots.first() {
            let complement = model
                .sum_root(layer.alpha, model.negate(gamma))
                .expect("a_j - g is a root for layer roots");
            debug_assert!(layer.r_plus.contains(&complement));
            return Some(FlagWitness {
                layer: j,
                gamma,
                complement,
                sum: layer.alpha,
                value: coeffs[j],
            });
        }
    }
    None
}
