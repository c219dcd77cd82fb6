//! Joyce decomposition of a compact reductive algebra, coset spaces `G/L`
//! with the layer structure, and the invariant hypercomplex structure on `m`.
//!
//! The decomposition recursion picks a maximal root `a_j` of the shrinking
//! orthogonal subsystem (maximal height, ties broken lexicographically on
//! simple-root coordinates), collects the layer roots
//! `R_j^+ = { g : (g, a_j) > 0 }`, and stops when only an abelian
//! centralizer `b_d` is left. Different admissible tie-breaks give
//! decompositions conjugate under inner automorphisms; only the layer
//! invariants are promised to agree.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lie::{Algebra, CwElement, RootId, C64};

const ZERO_TOL: f64 = 1e-10;

/// One layer of the decomposition: the strongly orthogonal root `a_j`, the
/// layer roots `R_j^+` (with `a_j` listed first) and the `f_j` roots.
#[derive(Debug, Clone)]
pub struct Layer {
    pub alpha: RootId,
    pub r_plus: Vec<RootId>,
    pub f_roots: Vec<RootId>,
}

/// Result of the full recursion: layers, the (always empty) final root set,
/// and a rational basis of the semisimple Cartan directions of `b_d`.
#[derive(Debug, Clone)]
pub struct JoyceDecomposition {
    pub layers: Vec<Layer>,
    pub theta_final: Vec<RootId>,
    pub b_cartan_kernel: Vec<Vec<BigRational>>,
    pub center_dim: usize,
}

impl JoyceDecomposition {
    /// Number of layers `d`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Dimension of the final abelian centralizer `b_d`.
    pub fn b_dim(&self) -> usize {
        self.b_cartan_kernel.len() + self.center_dim
    }
}

/// Tie-break among maximal-height candidates; both choices are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    LexGreatest,
    LexSmallest,
}

/// Runs the decomposition recursion to completion with the default tie-break.
pub fn joyce_decompose(algebra: &Algebra) -> JoyceDecomposition {
    joyce_decompose_with_tiebreak(algebra, TieBreak::LexGreatest)
}

pub fn joyce_decompose_with_tiebreak(algebra: &Algebra, tie: TieBreak) -> JoyceDecomposition {
    let model = &algebra.model;
    let mut theta: Vec<RootId> = (0..model.positive_count()).collect();
    let mut layers = Vec::new();

    while !theta.is_empty() {
        let alpha = *theta
            .iter()
            .max_by(|&&a, &&b| {
                let ha = model.height(a);
                let hb = model.height(b);
                ha.cmp(&hb).then_with(|| match tie {
                    TieBreak::LexGreatest => model.coords(a).cmp(model.coords(b)),
                    TieBreak::LexSmallest => model.coords(b).cmp(model.coords(a)),
                })
            })
            .unwrap();

        let mut r_plus = vec![alpha];
        let mut next = Vec::new();
        for &g in &theta {
            if g == alpha {
                continue;
            }
            let p = model.pairing_rat(g, alpha);
            if p.is_zero() {
                next.push(g);
            } else {
                assert!(p.is_positive(), "maximal root pairs non-negatively");
                r_plus.push(g);
            }
        }
        let f_roots: Vec<RootId> = r_plus[1..].to_vec();

        // Layer sanity: Cartan integer 1 on f-roots, so g - a_j is a root
        // and g + a_j is not.
        for &g in &f_roots {
            let two = BigRational::from(BigInt::from(2));
            let c = two * model.pairing_rat(g, alpha) / model.norm2_rat(alpha);
            assert!(c == BigRational::from(BigInt::from(1)));
            assert!(model.sum_root(g, model.negate(alpha)).is_some());
            assert!(model.sum_root(g, alpha).is_none());
        }

        layers.push(Layer {
            alpha,
            r_plus,
            f_roots,
        });
        theta = next;
    }

    // Strong orthogonality across layers.
    for i in 0..layers.len() {
        for j in 0..i {
            let a = layers[i].alpha;
            let b = layers[j].alpha;
            assert!(model.sum_root(a, b).is_none());
            assert!(model.sum_root(a, model.negate(b)).is_none());
        }
    }

    let alphas: Vec<RootId> = layers.iter().map(|l| l.alpha).collect();
    let b_cartan_kernel = cartan_kernel(algebra, &alphas);

    JoyceDecomposition {
        layers,
        theta_final: Vec::new(),
        b_cartan_kernel,
        center_dim: model.center_dim,
    }
}

/// Rational basis of `{ H in h : a_j(H) = 0 for all j }` in `t_{a_i}` coordinates.
fn cartan_kernel(algebra: &Algebra, alphas: &[RootId]) -> Vec<Vec<BigRational>> {
    let model = &algebra.model;
    let rank = model.rank;
    if rank == 0 {
        return Vec::new();
    }
    let mut rows: Vec<Vec<BigRational>> = alphas
        .iter()
        .map(|&a| {
            (0..rank)
                .map(|i| {
                    let mut ei = vec![BigRational::zero(); rank];
                    ei[i] = BigRational::from(BigInt::from(1));
                    model.weight_pairing(&model.t_vector_rat(a), &ei)
                })
                .collect()
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..rank {
        if let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) {
            rows.swap(r, p);
            let inv = rows[r][c].clone();
            for x in rows[r].iter_mut() {
                *x /= &inv;
            }
            for i in 0..rows.len() {
                if i != r && !rows[i][c].is_zero() {
                    let f = rows[i][c].clone();
                    for k in 0..rank {
                        let sub = &f * &rows[r][k];
                        rows[i][k] -= sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
    }

    let mut basis = Vec::new();
    for free in 0..rank {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); rank];
        v[free] = BigRational::from(BigInt::from(1));
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -rows[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Isotropy data: the retained layer count `m`, a basis of `v = b_d ∩ l`,
/// and the frame `X_1^1, ..., X_1^m` spanning `u = b_d ∩ m`.
#[derive(Debug, Clone)]
pub struct IsotropySpec {
    pub m: usize,
    pub v_subspace: Vec<DVector<C64>>,
    pub u_frame: Vec<DVector<C64>>,
}

impl IsotropySpec {
    pub fn new(m: usize, v_subspace: Vec<DVector<C64>>, u_frame: Vec<DVector<C64>>) -> Self {
        IsotropySpec {
            m,
            v_subspace,
            u_frame,
        }
    }

    /// Trivial isotropy: all layers retained, `v = 0`, default frame.
    pub fn trivial(algebra: &Algebra, decomp: &JoyceDecomposition) -> Result<Self> {
        let m = decomp.depth();
        let u_frame = default_u_frame(algebra, decomp, m, &[])?;
        Ok(IsotropySpec::new(m, Vec::new(), u_frame))
    }

    /// Isotropy with the given `v` and the default bi-invariant-compatible frame.
    pub fn with_default_frame(
        algebra: &Algebra,
        decomp: &JoyceDecomposition,
        m: usize,
        v_subspace: Vec<DVector<C64>>,
    ) -> Result<Self> {
        let u_frame = default_u_frame(algebra, decomp, m, &v_subspace)?;
        Ok(IsotropySpec::new(m, v_subspace, u_frame))
    }
}

/// Positive-definite inner product `-B` on compact Cartan vectors.
fn minus_b(algebra: &Algebra, x: &DVector<C64>, y: &DVector<C64>) -> f64 {
    -algebra.model.cartan_killing(x, y).re
}

/// Deterministic frame for `u`: the `-B`-orthogonal complement of `v` inside
/// `b_d`, Gram-Schmidt over the kernel-then-center spanning set, with the
/// `j`-th vector scaled so `-B(X_1^j, X_1^j) = 4/|a_j|^2`. The scaling makes
/// the reference metric agree with `-B` whenever that is possible at all.
pub fn default_u_frame(
    algebra: &Algebra,
    decomp: &JoyceDecomposition,
    m: usize,
    v_subspace: &[DVector<C64>],
) -> Result<Vec<DVector<C64>>> {
    let model = &algebra.model;
    let dim = model.cartan_dim();
    let mut spanning: Vec<DVector<C64>> = Vec::new();
    for k in &decomp.b_cartan_kernel {
        let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
        for (i, c) in k.iter().enumerate() {
            v[i] = C64::new(0.0, c.to_f64().unwrap());
        }
        spanning.push(v);
    }
    for z in 0..model.center_dim {
        let mut v = DVector::from_element(dim, C64::new(0.0, 0.0));
        v[model.rank + z] = C64::new(0.0, 1.0);
        spanning.push(v);
    }

    let mut frame: Vec<DVector<C64>> = Vec::new();
    let mut ortho: Vec<DVector<C64>> = v_subspace.to_vec();
    for mut cand in spanning {
        for prev in &ortho {
            let c = minus_b(algebra, &cand, prev) / minus_b(algebra, prev, prev);
            cand -= prev * C64::new(c, 0.0);
        }
        let n2 = minus_b(algebra, &cand, &cand);
        if n2 > 1e-14 {
            ortho.push(cand.clone());
            frame.push(cand);
        }
    }

    if frame.len() != m {
        return Err(Error::InvalidIsotropy(format!(
            "dim u = {} but m = {} layers are retained",
            frame.len(),
            m
        )));
    }
    for (j, x) in frame.iter_mut().enumerate() {
        let target = 4.0 / algebra.model.norm2(decomp.layers[j].alpha);
        let scale = (target / minus_b(algebra, x, x)).sqrt();
        *x *= C64::new(scale, 0.0);
    }
    Ok(frame)
}

/// Labels for the real basis of `m`, grouped by layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MLabel {
    X1(usize),
    X2(usize),
    X3(usize),
    X4(usize),
    /// `E_g - E_{-g}` for an `f_j` root.
    U(RootId),
    /// `i(E_g + E_{-g})` for an `f_j` root.
    V(RootId),
}

/// Labels for the complex basis of `l^C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcLabel {
    /// `t_{a_j}` for a tail layer.
    T(usize),
    /// `E_g` for a tail-layer root (either sign).
    E(RootId),
    /// A basis vector of `v`.
    V(usize),
}

/// Labels of the holomorphic frame: `H_j = H_{a_j} + (|a_j|^2/2) X_1^j` and
/// the root vectors of `R-hat^+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolLabel {
    H(usize),
    E(RootId),
}

/// The coset space `G/L` with its graded bases, coordinate solver and
/// bracket tables. Immutable after construction.
pub struct CosetSpace {
    pub algebra: Algebra,
    pub decomp: JoyceDecomposition,
    pub isotropy: IsotropySpec,

    pub m_labels: Vec<MLabel>,
    pub m_elements: Vec<CwElement>,
    pub lc_labels: Vec<LcLabel>,
    pub lc_elements: Vec<CwElement>,
    pub hol_labels: Vec<HolLabel>,
    pub hol_elements: Vec<CwElement>,
    pub antihol_elements: Vec<CwElement>,

    /// Layer index of each real basis vector.
    pub layer_of: Vec<usize>,
    /// `R-hat^+` in frame order (layer by layer, `a_j` first).
    pub r_hat_plus: Vec<RootId>,

    solver: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    /// Real basis expressed over the cw basis: column `a` holds `m_a`.
    s: DMatrix<C64>,
    s_inv: DMatrix<C64>,

    /// m- and l-parts of cw-basis brackets, in cw / lc coordinates.
    cbm: Vec<Vec<DVector<C64>>>,
    cbl: Vec<Vec<DVector<C64>>>,
    /// Real-basis bracket m-parts, in real coordinates.
    bm: Vec<Vec<DVector<f64>>>,
    /// ad of each `l^C` basis vector on `m^C`, in cw coordinates.
    adl: Vec<DMatrix<C64>>,
}

impl CosetSpace {
    pub fn dim_m(&self) -> usize {
        self.m_elements.len()
    }

    pub fn dim_l(&self) -> usize {
        self.lc_elements.len()
    }

    pub fn layer_count(&self) -> usize {
        self.isotropy.m
    }

    pub fn hol_len(&self) -> usize {
        self.hol_elements.len()
    }

    /// `|a_j|^2` for a retained layer.
    pub fn alpha_norm2(&self, j: usize) -> f64 {
        self.algebra.model.norm2(self.decomp.layers[j].alpha)
    }

    /// Layer of a root of `R-hat` (either sign).
    pub fn layer_of_root(&self, r: RootId) -> Option<usize> {
        let model = &self.algebra.model;
        let pos = if model.is_positive(r) {
            r
        } else {
            model.negate(r)
        };
        self.decomp.layers[..self.isotropy.m]
            .iter()
            .position(|l| l.r_plus.contains(&pos))
    }

    /// Sign `e_a = +-1` for a root of `R-hat^+/-`.
    pub fn epsilon(&self, r: RootId) -> f64 {
        if self.algebra.model.is_positive(r) {
            1.0
        } else {
            -1.0
        }
    }

    /// Coordinates of an element over `[hol, antihol, lc]`.
    pub fn expand(&self, el: &CwElement) -> DVector<C64> {
        let model = &self.algebra.model;
        let dim = model.cartan_dim() + model.root_count();
        let mut rhs = DVector::from_element(dim, C64::new(0.0, 0.0));
        for i in 0..model.cartan_dim() {
            rhs[i] = el.cartan[i];
        }
        for r in 0..model.root_count() {
            rhs[model.cartan_dim() + r] = el.roots[r];
        }
        self.solver.solve(&rhs).expect("basis solver is invertible")
    }

    /// cw-coordinates (length `dim m`) of the `m`-part of an element, plus
    /// the `lc` remainder.
    pub fn split(&self, el: &CwElement) -> (DVector<C64>, DVector<C64>) {
        let full = self.expand(el);
        let n = self.dim_m();
        (
            DVector::from_fn(n, |i, _| full[i]),
            DVector::from_fn(self.dim_l(), |i, _| full[n + i]),
        )
    }

    /// Real-basis coordinates of the `m`-part of an element.
    pub fn m_real_coords(&self, el: &CwElement) -> DVector<C64> {
        let (mc, _) = self.split(el);
        &self.s_inv * mc
    }

    pub fn element_from_m_coords(&self, coords: &DVector<C64>) -> CwElement {
        let mut acc = self.algebra.zero_element();
        for (a, c) in coords.iter().enumerate() {
            if c.norm_sqr() != 0.0 {
                acc = acc.add(&self.m_elements[a].scaled(*c));
            }
        }
        acc
    }

    /// Change of basis: column `a` holds the cw coordinates of real basis
    /// vector `a`.
    pub fn s_matrix(&self) -> &DMatrix<C64> {
        &self.s
    }

    pub fn s_inv_matrix(&self) -> &DMatrix<C64> {
        &self.s_inv
    }

    /// m-part of `[cw_p, cw_q]` in cw coordinates.
    pub fn bracket_m_cw(&self, p: usize, q: usize) -> &DVector<C64> {
        &self.cbm[p][q]
    }

    /// l-part of `[cw_p, cw_q]` in lc coordinates.
    pub fn bracket_l_cw(&self, p: usize, q: usize) -> &DVector<C64> {
        &self.cbl[p][q]
    }

    /// m-part of `[m_a, m_b]` in real coordinates.
    pub fn bracket_m_real(&self, a: usize, b: usize) -> &DVector<f64> {
        &self.bm[a][b]
    }

    /// ad of `lc_k` on `m^C` in cw coordinates.
    pub fn ad_l(&self, k: usize) -> &DMatrix<C64> {
        &self.adl[k]
    }

    /// Index of `E_r` (for `r` in `R-hat`, either sign) in the cw basis.
    pub fn cw_index_of_root(&self, r: RootId) -> Option<usize> {
        let model = &self.algebra.model;
        let nh = self.hol_len();
        let m = self.isotropy.m;
        if model.is_positive(r) {
            self.r_hat_plus.iter().position(|&g| g == r).map(|i| m + i)
        } else {
            self.r_hat_plus
                .iter()
                .position(|&g| g == model.negate(r))
                .map(|i| nh + m + i)
        }
    }
}

/// Assembles the coset space, validating the isotropy data against the
/// required shape: `dim u = m`, `v` inside `b_d`, `u` and `v` independent
/// and `-B`-orthogonal, `l = v + (tail layers)`.
pub fn coset_space(
    algebra: &Algebra,
    decomp: &JoyceDecomposition,
    isotropy: IsotropySpec,
) -> Result<CosetSpace> {
    let model = algebra.model.clone();
    let m = isotropy.m;
    let d = decomp.depth();
    if m == 0 || m > d {
        return Err(Error::InvalidIsotropy(format!(
            "retained layer count m = {m} outside 1..=d = {d}"
        )));
    }
    if isotropy.u_frame.len() != m {
        return Err(Error::InvalidIsotropy(format!(
            "dim u = {} but m = {m} layers are retained",
            isotropy.u_frame.len()
        )));
    }
    let b_dim = decomp.b_dim();
    if isotropy.v_subspace.len() + m != b_dim {
        return Err(Error::InvalidIsotropy(format!(
            "dim v + m = {} does not fill dim b_d = {b_dim}",
            isotropy.v_subspace.len() + m
        )));
    }

    let all_alphas: Vec<RootId> = decomp.layers.iter().map(|l| l.alpha).collect();
    let check_in_bd = |v: &DVector<C64>, what: &str| -> Result<()> {
        if v.len() != model.cartan_dim() {
            return Err(Error::InvalidIsotropy(format!(
                "{what} vector has length {} instead of {}",
                v.len(),
                model.cartan_dim()
            )));
        }
        for i in 0..v.len() {
            if v[i].re.abs() > ZERO_TOL {
                return Err(Error::InvalidIsotropy(format!(
                    "{what} vector is not in the compact real form"
                )));
            }
        }
        for &a in &all_alphas {
            if model.root_on_cartan(a, v).norm() > ZERO_TOL {
                return Err(Error::InvalidIsotropy(format!(
                    "{what} vector does not lie in b_d"
                )));
            }
        }
        Ok(())
    };
    for v in &isotropy.v_subspace {
        check_in_bd(v, "v_subspace")?;
    }
    for u in &isotropy.u_frame {
        check_in_bd(u, "u_frame")?;
    }
    {
        let mut all: Vec<&DVector<C64>> = isotropy.v_subspace.iter().collect();
        all.extend(isotropy.u_frame.iter());
        let k = all.len();
        let gram = DMatrix::from_fn(k, k, |i, j| minus_b(algebra, all[i], all[j]));
        let nv = isotropy.v_subspace.len();
        for i in 0..nv {
            for j in nv..k {
                if gram[(i, j)].abs() > ZERO_TOL * gram[(i, i)].abs().max(1.0) {
                    return Err(Error::InvalidIsotropy(
                        "u_frame is not -B-orthogonal to v_subspace".into(),
                    ));
                }
            }
        }
        if k > 0 && gram.determinant().abs() < 1e-12 {
            return Err(Error::InvalidIsotropy(
                "v_subspace and u_frame vectors are not linearly independent".into(),
            ));
        }
    }

    // Real basis of m, layer by layer.
    let mut m_labels = Vec::new();
    let mut m_elements = Vec::new();
    let mut layer_of = Vec::new();
    let mut r_hat_plus = Vec::new();
    for (j, layer) in decomp.layers.iter().take(m).enumerate() {
        let a = layer.alpha;
        let na2 = model.norm2(a);
        let k0 = 1.0 / (2.0 * na2).sqrt();

        let x1 = algebra.cartan_element(isotropy.u_frame[j].clone());
        let x2 = algebra.t_element(a).scaled(C64::new(0.0, 2.0 / na2));
        let ea = algebra.root_element(a);
        let em = algebra.root_element(model.negate(a));
        let x3 = ea.sub(&em).scaled(C64::new(2.0 * k0, 0.0));
        let x4 = ea.add(&em).scaled(C64::new(0.0, 2.0 * k0));
        m_labels.extend([MLabel::X1(j), MLabel::X2(j), MLabel::X3(j), MLabel::X4(j)]);
        m_elements.extend([x1, x2, x3, x4]);
        layer_of.extend([j; 4]);

        r_hat_plus.push(a);
        for &g in &layer.f_roots {
            let eg = algebra.root_element(g);
            let eng = algebra.root_element(model.negate(g));
            m_labels.push(MLabel::U(g));
            m_elements.push(eg.sub(&eng));
            m_labels.push(MLabel::V(g));
            m_elements.push(eg.add(&eng).scaled(C64::new(0.0, 1.0)));
            layer_of.extend([j; 2]);
            r_hat_plus.push(g);
        }
    }

    // Complex basis of l^C: tail layers plus v.
    let mut lc_labels = Vec::new();
    let mut lc_elements = Vec::new();
    for (j, layer) in decomp.layers.iter().enumerate().skip(m) {
        lc_labels.push(LcLabel::T(j));
        lc_elements.push(algebra.t_element(layer.alpha));
        for &g in &layer.r_plus {
            lc_labels.push(LcLabel::E(g));
            lc_elements.push(algebra.root_element(g));
            lc_labels.push(LcLabel::E(model.negate(g)));
            lc_elements.push(algebra.root_element(model.negate(g)));
        }
    }
    for (k, v) in isotropy.v_subspace.iter().enumerate() {
        lc_labels.push(LcLabel::V(k));
        lc_elements.push(algebra.cartan_element(v.clone()));
    }

    // Holomorphic frame: H_j first, then the R-hat^+ root vectors.
    let mut hol_labels = Vec::new();
    let mut hol_elements = Vec::new();
    for (j, layer) in decomp.layers.iter().take(m).enumerate() {
        let na2 = model.norm2(layer.alpha);
        let x1_index = layer_offset(&decomp.layers, j);
        let h = algebra
            .t_element(layer.alpha)
            .add(&m_elements[x1_index].scaled(C64::new(na2 / 2.0, 0.0)));
        hol_labels.push(HolLabel::H(j));
        hol_elements.push(h);
    }
    for &g in &r_hat_plus {
        hol_labels.push(HolLabel::E(g));
        hol_elements.push(algebra.root_element(g));
    }
    // Antiholomorphic frame: conj H_j on the Cartan block, but the literal
    // root vectors E_{-g} (= -conj E_g) on the root block.
    let antihol_elements: Vec<CwElement> = hol_labels
        .iter()
        .map(|label| match label {
            HolLabel::H(j) => algebra.conjugate(&hol_elements[*j]),
            HolLabel::E(g) => algebra.root_element(model.negate(*g)),
        })
        .collect();

    let dim_g = model.cartan_dim() + model.root_count();
    let n_m = m_elements.len();
    let n_l = lc_elements.len();
    if 2 * hol_elements.len() != n_m {
        return Err(Error::InternalConsistency(
            "holomorphic frame does not halve dim m".into(),
        ));
    }
    if n_m + n_l != dim_g {
        return Err(Error::InvalidIsotropy(format!(
            "dim m + dim l = {} does not match dim g = {dim_g}",
            n_m + n_l
        )));
    }
    let to_cw = |el: &CwElement| -> DVector<C64> {
        let mut v = DVector::from_element(dim_g, C64::new(0.0, 0.0));
        for i in 0..model.cartan_dim() {
            v[i] = el.cartan[i];
        }
        for r in 0..model.root_count() {
            v[model.cartan_dim() + r] = el.roots[r];
        }
        v
    };
    let mut cols = DMatrix::from_element(dim_g, dim_g, C64::new(0.0, 0.0));
    for (c, el) in hol_elements
        .iter()
        .chain(antihol_elements.iter())
        .chain(lc_elements.iter())
        .enumerate()
    {
        cols.set_column(c, &to_cw(el));
    }
    let solver = cols.lu();

    // Real basis over the cw basis.
    let nh = hol_elements.len();
    let mut s = DMatrix::from_element(n_m, n_m, C64::new(0.0, 0.0));
    for (a, label) in m_labels.iter().enumerate() {
        match label {
            MLabel::X1(j) => {
                let na2 = model.norm2(decomp.layers[*j].alpha);
                s[(*j, a)] = C64::new(1.0 / na2, 0.0);
                s[(nh + *j, a)] = C64::new(1.0 / na2, 0.0);
            }
            MLabel::X2(j) => {
                let na2 = model.norm2(decomp.layers[*j].alpha);
                s[(*j, a)] = C64::new(0.0, 1.0 / na2);
                s[(nh + *j, a)] = C64::new(0.0, -1.0 / na2);
            }
            MLabel::X3(j) => {
                let a_root = decomp.layers[*j].alpha;
                let k0 = 1.0 / (2.0 * model.norm2(a_root)).sqrt();
                let pe = m + r_hat_plus.iter().position(|&g| g == a_root).unwrap();
                s[(pe, a)] = C64::new(2.0 * k0, 0.0);
                s[(nh + pe, a)] = C64::new(-2.0 * k0, 0.0);
            }
            MLabel::X4(j) => {
                let a_root = decomp.layers[*j].alpha;
                let k0 = 1.0 / (2.0 * model.norm2(a_root)).sqrt();
                let pe = m + r_hat_plus.iter().position(|&g| g == a_root).unwrap();
                s[(pe, a)] = C64::new(0.0, 2.0 * k0);
                s[(nh + pe, a)] = C64::new(0.0, 2.0 * k0);
            }
            MLabel::U(g) => {
                let pe = m + r_hat_plus.iter().position(|&x| x == *g).unwrap();
                s[(pe, a)] = C64::new(1.0, 0.0);
                s[(nh + pe, a)] = C64::new(-1.0, 0.0);
            }
            MLabel::V(g) => {
                let pe = m + r_hat_plus.iter().position(|&x| x == *g).unwrap();
                s[(pe, a)] = C64::new(0.0, 1.0);
                s[(nh + pe, a)] = C64::new(0.0, 1.0);
            }
        }
    }
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InternalConsistency("singular real-to-cw change of basis".into()))?;

    let mut coset = CosetSpace {
        algebra: algebra.clone(),
        decomp: decomp.clone(),
        isotropy,
        m_labels,
        m_elements,
        lc_labels,
        lc_elements,
        hol_labels,
        hol_elements,
        antihol_elements,
        layer_of,
        r_hat_plus,
        solver,
        s,
        s_inv,
        cbm: Vec::new(),
        cbl: Vec::new(),
        bm: Vec::new(),
        adl: Vec::new(),
    };

    // Bracket tables.
    let cw_elements: Vec<CwElement> = coset
        .hol_elements
        .iter()
        .chain(coset.antihol_elements.iter())
        .cloned()
        .collect();
    let mut cbm = vec![vec![DVector::from_element(n_m, C64::new(0.0, 0.0)); n_m]; n_m];
    let mut cbl = vec![vec![DVector::from_element(n_l, C64::new(0.0, 0.0)); n_m]; n_m];
    for p in 0..n_m {
        for q in p + 1..n_m {
            let br = coset
                .algebra
                .bracket_unchecked(&cw_elements[p], &cw_elements[q]);
            let (mc, lc) = coset.split(&br);
            cbm[q][p] = -mc.clone();
            cbl[q][p] = -lc.clone();
            cbm[p][q] = mc;
            cbl[p][q] = lc;
        }
    }
    coset.cbm = cbm;
    coset.cbl = cbl;

    let mut bm = vec![vec![DVector::from_element(n_m, 0.0); n_m]; n_m];
    for a in 0..n_m {
        for b in a + 1..n_m {
            let br = coset
                .algebra
                .bracket_unchecked(&coset.m_elements[a], &coset.m_elements[b]);
            let real = coset.m_real_coords(&br);
            let mut v = DVector::from_element(n_m, 0.0);
            for i in 0..n_m {
                debug_assert!(real[i].im.abs() < 1e-9, "compact bracket must stay real");
                v[i] = real[i].re;
            }
            bm[b][a] = -v.clone();
            bm[a][b] = v;
        }
    }
    coset.bm = bm;

    let mut adl = Vec::with_capacity(n_l);
    for k in 0..n_l {
        let mut mat = DMatrix::from_element(n_m, n_m, C64::new(0.0, 0.0));
        for (q, eq) in cw_elements.iter().enumerate() {
            let br = coset.algebra.bracket_unchecked(&coset.lc_elements[k], eq);
            let (mc, lc) = coset.split(&br);
            debug_assert!(lc.norm() < 1e-9, "[l, m] must stay inside m");
            mat.set_column(q, &mc);
        }
        adl.push(mat);
    }
    coset.adl = adl;

    Ok(coset)
}

fn layer_offset(layers: &[Layer], j: usize) -> usize {
    layers[..j].iter().map(|l| 4 + 2 * l.f_roots.len()).sum()
}

/// The invariant hypercomplex structure as real matrices on the `m` basis.
#[derive(Debug, Clone)]
pub struct HypercomplexStructure {
    pub i_mat: DMatrix<f64>,
    pub j_mat: DMatrix<f64>,
    pub k_mat: DMatrix<f64>,
    pub k_params: Vec<C64>,
    /// The su(2) triples `(X_2^j, X_3^j, X_4^j)` actually used (phase-rotated
    /// for non-real `k_j`), as real coordinates.
    pub x_triples: Vec<[DVector<f64>; 3]>,
}

impl HypercomplexStructure {
    /// Default parameters `k_j = 1/(sqrt(2) |a_j|)`, real and positive.
    pub fn default_k(coset: &CosetSpace) -> Vec<C64> {
        (0..coset.layer_count())
            .map(|j| C64::new(1.0 / (2.0 * coset.alpha_norm2(j)).sqrt(), 0.0))
            .collect()
    }
}

/// Builds `I`, `J`, `K` from the layer data and the `k_j` parameters
/// (`|k_j|^2 = 1/(2 |a_j|^2)` is required).
pub fn hypercomplex_structure(
    coset: &CosetSpace,
    k_params: &[C64],
) -> Result<HypercomplexStructure> {
    let n = coset.dim_m();
    let m = coset.layer_count();
    assert_eq!(k_params.len(), m, "one k parameter per layer");

    for (j, k) in k_params.iter().enumerate() {
        let required = 1.0 / (2.0 * coset.alpha_norm2(j));
        if (k.norm_sqr() - required).abs() > 1e-9 * required {
            return Err(Error::KNormalization {
                layer: j,
                got: k.norm_sqr(),
                required,
            });
        }
    }

    let idx = |label: MLabel| coset.m_labels.iter().position(|l| *l == label).unwrap();

    let mut i_mat = DMatrix::from_element(n, n, 0.0);
    let mut j_mat = DMatrix::from_element(n, n, 0.0);
    let mut x_triples = Vec::new();

    for j in 0..m {
        let (i1, i2, i3, i4) = (
            idx(MLabel::X1(j)),
            idx(MLabel::X2(j)),
            idx(MLabel::X3(j)),
            idx(MLabel::X4(j)),
        );
        let phi = k_params[j].arg();
        let (c, sn) = (phi.cos(), phi.sin());

        // I on R X_1 + d_j: X1 -> X2, X3 -> X4 (phase invariant).
        i_mat[(i2, i1)] = 1.0;
        i_mat[(i1, i2)] = -1.0;
        i_mat[(i4, i3)] = 1.0;
        i_mat[(i3, i4)] = -1.0;

        // Phase-rotated triple: X3' = cos X3 - sin X4, X4' = sin X3 + cos X4.
        // J X1 = X3', J X2 = -X4', J X3' = -X1, J X4' = X2.
        j_mat[(i3, i1)] = c;
        j_mat[(i4, i1)] = -sn;
        j_mat[(i3, i2)] = -sn;
        j_mat[(i4, i2)] = -c;
        j_mat[(i1, i3)] = -c;
        j_mat[(i2, i3)] = sn;
        j_mat[(i1, i4)] = sn;
        j_mat[(i2, i4)] = c;

        let mut x2 = DVector::from_element(n, 0.0);
        x2[i2] = 1.0;
        let mut x3 = DVector::from_element(n, 0.0);
        x3[i3] = c;
        x3[i4] = -sn;
        let mut x4 = DVector::from_element(n, 0.0);
        x4[i3] = sn;
        x4[i4] = c;
        x_triples.push([x2, x3, x4]);
    }

    // On f_j: I = ad(X_2^j), J = ad(X_3^j) with the phase-rotated X_3.
    let to_el = |v: &DVector<f64>| {
        coset.element_from_m_coords(&DVector::from_fn(n, |i, _| C64::new(v[i], 0.0)))
    };
    for (a, label) in coset.m_labels.iter().enumerate() {
        match label {
            MLabel::U(_) | MLabel::V(_) => {}
            _ => continue,
        }
        let j = coset.layer_of[a];
        let x2_el = &coset.m_elements[idx(MLabel::X2(j))];
        let x3_el = to_el(&x_triples[j][1]);
        let target = &coset.m_elements[a];
        let iv = coset.m_real_coords(&coset.algebra.bracket_unchecked(x2_el, target));
        let jv = coset.m_real_coords(&coset.algebra.bracket_unchecked(&x3_el, target));
        for r in 0..n {
            i_mat[(r, a)] = iv[r].re;
            j_mat[(r, a)] = jv[r].re;
        }
    }

    let k_mat = &i_mat * &j_mat;

    // su(2) bracket relations for the triples actually used.
    for (j, [x2, x3, x4]) in x_triples.iter().enumerate() {
        let cyc = [
            (to_el(x2), to_el(x3), to_el(x4)),
            (to_el(x3), to_el(x4), to_el(x2)),
            (to_el(x4), to_el(x2), to_el(x3)),
        ];
        let mut residual = 0.0f64;
        for (x, y, z) in &cyc {
            let br = coset.algebra.bracket_unchecked(x, y);
            let diff = br.sub(&z.scaled(C64::new(2.0, 0.0)));
            residual = residual.max(diff.norm());
        }
        if residual > 1e-9 {
            return Err(Error::TripleBracketResidual { layer: j, residual });
        }
    }

    Ok(HypercomplexStructure {
        i_mat,
        j_mat,
        k_mat,
        k_params: k_params.to_vec(),
        x_triples,
    })
}

/// Residual report for a hypercomplex structure.
#[derive(Debug, Clone)]
pub struct HypercomplexReport {
    pub i_squared: f64,
    pub j_squared: f64,
    pub anticommutation: f64,
    pub k_equals_ij: f64,
    pub ad_l_commutes_i: f64,
    pub ad_l_commutes_j: f64,
    pub closure_i: f64,
    pub closure_j: f64,
    pub k_normalization: Vec<f64>,
    pub max_residual: f64,
}

/// Verifies the defining identities and the integrability closure
/// `[m^{1,0}, m^{1,0}] ⊂ m^{1,0} + l^C` for both `I` and `J`. Report only.
pub fn verify_hypercomplex(coset: &CosetSpace, h: &HypercomplexStructure) -> HypercomplexReport {
    let n = coset.dim_m();
    let id = DMatrix::<f64>::identity(n, n);
    let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));

    let i_squared = max_abs(&(&h.i_mat * &h.i_mat + &id));
    let j_squared = max_abs(&(&h.j_mat * &h.j_mat + &id));
    let anticommutation = max_abs(&(&h.i_mat * &h.j_mat + &h.j_mat * &h.i_mat));
    let k_equals_ij = max_abs(&(&h.i_mat * &h.j_mat - &h.k_mat));

    // ad(l)-invariance, checked on the cw basis.
    let i_on_cw = coset.s_matrix() * complexify(&h.i_mat) * coset.s_inv_matrix();
    let j_on_cw = coset.s_matrix() * complexify(&h.j_mat) * coset.s_inv_matrix();
    let mut ad_l_commutes_i = 0.0f64;
    let mut ad_l_commutes_j = 0.0f64;
    for k in 0..coset.dim_l() {
        let ad = coset.ad_l(k);
        ad_l_commutes_i = ad_l_commutes_i.max(cmax(&(ad * &i_on_cw - &i_on_cw * ad)));
        ad_l_commutes_j = ad_l_commutes_j.max(cmax(&(ad * &j_on_cw - &j_on_cw * ad)));
    }

    // Closure for I: brackets of the holomorphic frame must have no
    // antiholomorphic component.
    let nh = coset.hol_len();
    let mut closure_i = 0.0f64;
    for p in 0..nh {
        for q in 0..nh {
            let mc = coset.bracket_m_cw(p, q);
            for r in nh..coset.dim_m() {
                closure_i = closure_i.max(mc[r].norm());
            }
        }
    }

    // Closure for J on a spanning set of the J-holomorphic space.
    let mut closure_j = 0.0f64;
    {
        let jc = complexify(&h.j_mat);
        let i_unit = C64::new(0.0, 1.0);
        let spanning: Vec<DVector<C64>> = (0..n)
            .map(|a| {
                let e = DVector::from_fn(n, |i, _| C64::new(if i == a { 1.0 } else { 0.0 }, 0.0));
                let je = &jc * &e;
                (e - je * i_unit) * C64::new(0.5, 0.0)
            })
            .collect();
        let elements: Vec<CwElement> = spanning
            .iter()
            .map(|z| coset.element_from_m_coords(z))
            .collect();
        for x in &elements {
            for y in &elements {
                let br = coset.algebra.bracket_unchecked(x, y);
                let mreal = coset.m_real_coords(&br);
                let anti = (&mreal + &jc * &mreal * i_unit) * C64::new(0.5, 0.0);
                closure_j = closure_j.max(anti.iter().fold(0.0f64, |acc, c| acc.max(c.norm())));
            }
        }
    }

    let k_normalization: Vec<f64> = h
        .k_params
        .iter()
        .enumerate()
        .map(|(j, k)| {
            let req = 1.0 / (2.0 * coset.alpha_norm2(j));
            (k.norm_sqr() - req).abs() / req
        })
        .collect();

    let max_residual = [
        i_squared,
        j_squared,
        anticommutation,
        k_equals_ij,
        ad_l_commutes_i,
        ad_l_commutes_j,
        closure_i,
        closure_j,
    ]
    .into_iter()
    .chain(k_normalization.iter().copied())
    .fold(0.0f64, f64::max);

    HypercomplexReport {
        i_squared,
        j_squared,
        anticommutation,
        k_equals_ij,
        ad_l_commutes_i,
        ad_l_commutes_j,
        closure_i,
        closure_j,
        k_normalization,
        max_residual,
    }
}

pub(crate) fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

pub(crate) fn cmax(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.norm()))
}
