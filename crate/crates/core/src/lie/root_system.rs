//! Root systems of compact reductive Lie algebras with the Killing-form
//! normalization: the pairing on the weight lattice is scaled, factor by
//! factor, so that it agrees with the Killing form `B` of that factor.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{Complex, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Index into [`AlgebraModel::roots`]. Positive roots come first (sorted by
/// height, then lexicographically); the negative of root `i` is `i + n_positive`.
pub type RootId = usize;

/// Default cap on the rank of the classical families.
pub const DEFAULT_RANK_CAP: usize = 8;

/// Simple type labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn parse(label: &str) -> Result<Family> {
        match label.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" | "E6" | "E7" | "E8" => Ok(Family::E),
            "F" | "F4" => Ok(Family::F),
            "G" | "G2" => Ok(Family::G),
            other => Err(Error::UnknownTypeLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
            Family::F => "F",
            Family::G => "G",
        };
        write!(f, "{s}")
    }
}

/// One simple factor of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorSpec {
    pub family: Family,
    pub rank: usize,
}

impl FactorSpec {
    pub fn new(family: Family, rank: usize) -> Self {
        FactorSpec { family, rank }
    }
}

impl fmt::Display for FactorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

fn rank_bounds(family: Family, cap: usize) -> (usize, usize) {
    match family {
        Family::A => (1, cap),
        Family::B => (2, cap),
        Family::C => (2, cap),
        Family::D => (3, cap),
        Family::E => (6, 8),
        Family::F => (4, 4),
        Family::G => (2, 2),
    }
}

/// Cartan matrix entries `a[i][j] = 2(a_i, a_j)/(a_i, a_i)` for one factor.
fn cartan_matrix(family: Family, rank: usize) -> Vec<Vec<i64>> {
    let n = rank;
    let mut a = vec![vec![0i64; n]; n];
    for i in 0..n {
        a[i][i] = 2;
    }
    let mut link = |i: usize, j: usize, aij: i64, aji: i64| {
        a[i][j] = aij;
        a[j][i] = aji;
    };
    match family {
        Family::A => {
            for i in 0..n.saturating_sub(1) {
                link(i, i + 1, -1, -1);
            }
        }
        Family::B => {
            // Last simple root is short.
            for i in 0..n - 2 {
                link(i, i + 1, -1, -1);
            }
            link(n - 2, n - 1, -1, -2);
        }
        Family::C => {
            // Last simple root is long.
            for i in 0..n - 2 {
                link(i, i + 1, -1, -1);
            }
            link(n - 2, n - 1, -2, -1);
        }
        Family::D => {
            for i in 0..n - 2 {
                link(i, i + 1, -1, -1);
            }
            link(n - 3, n - 1, -1, -1);
        }
        Family::E => {
            // Bourbaki numbering: chain 1-3-4-5-...-n, node 2 attached to node 4.
            link(0, 2, -1, -1);
            for i in 2..n - 1 {
                link(i, i + 1, -1, -1);
            }
            link(1, 3, -1, -1);
        }
        Family::F => {
            link(0, 1, -1, -1);
            link(1, 2, -1, -2);
            link(2, 3, -1, -1);
        }
        Family::G => {
            link(0, 1, -1, -3);
        }
    }
    a
}

/// Half squared lengths `d_i = (a_i, a_i)/2` in the long-root-square-2 scale.
fn symmetrizer(family: Family, rank: usize) -> Vec<BigRational> {
    let one = BigRational::one();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let mut d = vec![one.clone(); rank];
    match family {
        Family::A | Family::D | Family::E => {}
        Family::B => d[rank - 1] = half,
        Family::C => {
            for di in d.iter_mut().take(rank - 1) {
                *di = half.clone();
            }
        }
        Family::F => {
            d[2] = half.clone();
            d[3] = half;
        }
        Family::G => d[1] = third,
    }
    d
}

/// A reductive compact Lie algebra presented by simple factors plus an
/// abelian center, with roots in simple-root coordinates and the pairing on
/// the weight lattice normalized to the Killing form of each factor.
#[derive(Debug, Clone)]
pub struct AlgebraModel {
    pub factors: Vec<FactorSpec>,
    pub center_dim: usize,
    /// Total semisimple rank (sum of factor ranks).
    pub rank: usize,
    /// All roots; positive first (height then lex), negatives mirrored after.
    roots: Vec<Vec<i64>>,
    n_positive: usize,
    index: HashMap<Vec<i64>, RootId>,
    component_of: Vec<usize>,
    heights: Vec<i64>,
    /// Killing pairing on the simple-root basis, exact.
    simple_gram: Vec<Vec<BigRational>>,
    simple_gram_f64: Vec<Vec<f64>>,
    pair_f64: Vec<Vec<f64>>,
}

impl AlgebraModel {
    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn positive_count(&self) -> usize {
        self.n_positive
    }

    pub fn is_positive(&self, r: RootId) -> bool {
        r < self.n_positive
    }

    pub fn negate(&self, r: RootId) -> RootId {
        if r < self.n_positive {
            r + self.n_positive
        } else {
            r - self.n_positive
        }
    }

    pub fn coords(&self, r: RootId) -> &[i64] {
        &self.roots[r]
    }

    pub fn height(&self, r: RootId) -> i64 {
        self.heights[r]
    }

    pub fn component(&self, r: RootId) -> usize {
        self.component_of[r]
    }

    pub fn root_id(&self, coords: &[i64]) -> Option<RootId> {
        self.index.get(coords).copied()
    }

    /// Id of `a + b` when the sum is again a root.
    pub fn sum_root(&self, a: RootId, b: RootId) -> Option<RootId> {
        let sum: Vec<i64> = self.roots[a]
            .iter()
            .zip(&self.roots[b])
            .map(|(x, y)| x + y)
            .collect();
        self.index.get(&sum).copied()
    }

    /// Killing pairing `(a, b)` of two roots.
    pub fn pairing(&self, a: RootId, b: RootId) -> f64 {
        self.pair_f64[a][b]
    }

    /// Exact Killing pairing of two roots.
    pub fn pairing_rat(&self, a: RootId, b: RootId) -> BigRational {
        self.weight_pairing_int(&self.roots[a], &self.roots[b])
    }

    pub fn norm2(&self, a: RootId) -> f64 {
        self.pair_f64[a][a]
    }

    pub fn norm2_rat(&self, a: RootId) -> BigRational {
        self.pairing_rat(a, a)
    }

    fn weight_pairing_int(&self, x: &[i64], y: &[i64]) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0 {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj == 0 {
                    continue;
                }
                acc += &self.simple_gram[i][j] * BigRational::from(BigInt::from(xi * yj));
            }
        }
        acc
    }

    /// Killing pairing of two weights given by exact coordinates in the
    /// simple-root basis. Symmetric, bilinear, block-diagonal across factors.
    pub fn weight_pairing(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        assert_eq!(x.len(), self.rank);
        assert_eq!(y.len(), self.rank);
        let mut acc = BigRational::zero();
        for i in 0..self.rank {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                if y[j].is_zero() {
                    continue;
                }
                acc += &x[i] * &y[j] * &self.simple_gram[i][j];
            }
        }
        acc
    }

    /// Evaluation `a(H)` of a root on a Cartan vector. Cartan coordinates are
    /// over the basis `t_{a_1}, ..., t_{a_rank}, Z_1, ..., Z_center`.
    pub fn root_on_cartan(&self, a: RootId, h: &DVector<C64>) -> C64 {
        debug_assert_eq!(h.len(), self.cartan_dim());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rank {
            acc += h[i] * self.simple_pairing_f64_row(a, i);
        }
        acc
    }

    fn simple_pairing_f64_row(&self, a: RootId, i: usize) -> f64 {
        let coords = &self.roots[a];
        let mut acc = 0.0;
        for (j, cj) in coords.iter().enumerate() {
            if *cj != 0 {
                acc += (*cj as f64) * self.simple_gram_f64[j][i];
            }
        }
        acc
    }

    /// Dimension of the Cartan part of the model: rank plus center.
    pub fn cartan_dim(&self) -> usize {
        self.rank + self.center_dim
    }

    /// Dimension of the compact algebra.
    pub fn dim(&self) -> usize {
        self.cartan_dim() + self.root_count()
    }

    /// Ad-invariant extension of the Killing form to Cartan coordinate
    /// vectors: the Killing form on the semisimple part, the standard
    /// euclidean pairing on the center block.
    pub fn cartan_killing(&self, x: &DVector<C64>, y: &DVector<C64>) -> C64 {
        debug_assert_eq!(x.len(), self.cartan_dim());
        debug_assert_eq!(y.len(), self.cartan_dim());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rank {
            if x[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..self.rank {
                acc += x[i] * y[j] * self.simple_gram_f64[i][j];
            }
        }
        for k in self.rank..self.cartan_dim() {
            acc += x[k] * y[k];
        }
        acc
    }

    /// Cartan coordinates of `t_a` for a root `a` (these are just the root
    /// coordinates, padded with zeros on the center block).
    pub fn t_vector(&self, a: RootId) -> DVector<C64> {
        let mut v = DVector::from_element(self.cartan_dim(), C64::new(0.0, 0.0));
        for (i, c) in self.roots[a].iter().enumerate() {
            v[i] = C64::new(*c as f64, 0.0);
        }
        v
    }

    /// Exact Cartan coordinates of `t_a`.
    pub fn t_vector_rat(&self, a: RootId) -> Vec<BigRational> {
        self.roots[a]
            .iter()
            .map(|c| BigRational::from(BigInt::from(*c)))
            .collect()
    }

    /// The (p, q) integers of the `a`-string through `b`:
    /// `b - p a, ..., b + q a` are all roots.
    pub fn root_string(&self, a: RootId, b: RootId) -> Result<(usize, usize)> {
        if b == a || b == self.negate(a) {
            return Err(Error::ProportionalRoots);
        }
        let walk = |dir: i64| -> usize {
            let mut k = 0usize;
            loop {
                let probe: Vec<i64> = self.roots[b]
                    .iter()
                    .zip(&self.roots[a])
                    .map(|(x, y)| x + dir * (k as i64 + 1) * y)
                    .collect();
                if self.index.contains_key(&probe) {
                    k += 1;
                } else {
                    return k;
                }
            }
        };
        Ok((walk(-1), walk(1)))
    }
}

/// Builds the root system of the reductive algebra given by `factors` plus an
/// `center_dim`-dimensional center, with the default rank cap.
pub fn build_algebra(factors: &[FactorSpec], center_dim: usize) -> Result<AlgebraModel> {
    build_algebra_with_cap(factors, center_dim, DEFAULT_RANK_CAP)
}

/// Same as [`build_algebra`] with an explicit rank cap for the classical families.
pub fn build_algebra_with_cap(
    factors: &[FactorSpec],
    center_dim: usize,
    cap: usize,
) -> Result<AlgebraModel> {
    for f in factors {
        let (lo, hi) = rank_bounds(f.family, cap);
        if f.rank < lo || f.rank > hi {
            return Err(Error::RankOutOfRange {
                family: f.family.to_string(),
                rank: f.rank,
                min: lo,
                max: hi,
            });
        }
    }

    let rank: usize = factors.iter().map(|f| f.rank).sum();

    // Assemble the block-diagonal Gram matrix in the long-root-square-2 scale.
    let mut gram0 = vec![vec![BigRational::zero(); rank]; rank];
    let mut offset = 0;
    for f in factors {
        let a = cartan_matrix(f.family, f.rank);
        let d = symmetrizer(f.family, f.rank);
        for i in 0..f.rank {
            for j in 0..f.rank {
                gram0[offset + i][offset + j] = &d[i] * BigRational::from(BigInt::from(a[i][j]));
            }
        }
        offset += f.rank;
    }

    // Generate positive roots per factor by closing root strings upward.
    let mut positives: Vec<Vec<i64>> = Vec::new();
    let mut comp_of_pos: Vec<usize> = Vec::new();
    let mut offset = 0;
    for (fi, f) in factors.iter().enumerate() {
        let pos = positive_roots_of_factor(f, &gram0, offset, rank);
        comp_of_pos.extend(std::iter::repeat_n(fi, pos.len()));
        positives.extend(pos);
        offset += f.rank;
    }

    // Canonical order: height, then lexicographic (descending) on coordinates.
    let mut order: Vec<usize> = (0..positives.len()).collect();
    let height = |v: &Vec<i64>| -> i64 { v.iter().sum() };
    order.sort_by(|&i, &j| {
        let hi = height(&positives[i]);
        let hj = height(&positives[j]);
        hi.cmp(&hj).then_with(|| positives[j].cmp(&positives[i]))
    });
    let positives_sorted: Vec<Vec<i64>> = order.iter().map(|&i| positives[i].clone()).collect();
    let comp_sorted: Vec<usize> = order.iter().map(|&i| comp_of_pos[i]).collect();

    let n_positive = positives_sorted.len();
    let mut roots = positives_sorted;
    for i in 0..n_positive {
        let neg: Vec<i64> = roots[i].iter().map(|c| -c).collect();
        roots.push(neg);
    }
    let mut component_of = comp_sorted;
    component_of.extend_from_within(..);

    let mut index = HashMap::with_capacity(roots.len());
    for (i, r) in roots.iter().enumerate() {
        index.insert(r.clone(), i);
    }
    let heights: Vec<i64> = roots.iter().map(|v| v.iter().sum()).collect();

    // Rescale each factor block to the Killing normalization, fixed by
    // B(t_l, t_m) = sum_gamma (l, gamma)(gamma, m) over the factor's roots.
    let mut simple_gram = gram0;
    let mut offset = 0;
    for (fi, f) in factors.iter().enumerate() {
        let alpha = offset; // first simple root of the factor
        let mut sum = BigRational::zero();
        for (r, root) in roots.iter().enumerate() {
            if component_of[r] != fi {
                continue;
            }
            let mut p = BigRational::zero();
            for (j, cj) in root.iter().enumerate() {
                if *cj != 0 {
                    p += &simple_gram[alpha][j] * BigRational::from(BigInt::from(*cj));
                }
            }
            sum += &p * &p;
        }
        let c = sum / simple_gram[alpha][alpha].clone();
        assert!(c.is_positive());
        for i in offset..offset + f.rank {
            for j in 0..rank {
                simple_gram[i][j] /= &c;
            }
        }
        // Restore symmetry on the mirrored block writes.
        for i in 0..rank {
            for j in offset..offset + f.rank {
                simple_gram[i][j] = simple_gram[j][i].clone();
            }
        }
        offset += f.rank;
    }

    let simple_gram_f64: Vec<Vec<f64>> = simple_gram
        .iter()
        .map(|row| row.iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();

    let model = AlgebraModel {
        factors: factors.to_vec(),
        center_dim,
        rank,
        roots,
        n_positive,
        index,
        component_of,
        heights,
        simple_gram,
        simple_gram_f64,
        pair_f64: Vec::new(),
    };

    let nr = model.root_count();
    let mut pair = vec![vec![0.0; nr]; nr];
    for a in 0..nr {
        for b in a..nr {
            let v = model.pairing_rat(a, b).to_f64().unwrap();
            pair[a][b] = v;
            pair[b][a] = v;
        }
    }
    let mut model = model;
    model.pair_f64 = pair;
    Ok(model)
}

fn positive_roots_of_factor(
    f: &FactorSpec,
    gram0: &[Vec<BigRational>],
    offset: usize,
    rank: usize,
) -> Vec<Vec<i64>> {
    let mut found: HashMap<Vec<i64>, ()> = HashMap::new();
    let mut levels: Vec<Vec<Vec<i64>>> = Vec::new();

    let mut first = Vec::new();
    for i in 0..f.rank {
        let mut v = vec![0i64; rank];
        v[offset + i] = 1;
        found.insert(v.clone(), ());
        first.push(v);
    }
    levels.push(first);

    let pairing = |x: &[i64], y: &[i64]| -> BigRational {
        let mut acc = BigRational::zero();
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0 {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj != 0 {
                    acc += &gram0[i][j] * BigRational::from(BigInt::from(xi * yj));
                }
            }
        }
        acc
    };

    loop {
        let current = levels.last().unwrap().clone();
        let mut next: Vec<Vec<i64>> = Vec::new();
        for beta in &current {
            for i in 0..f.rank {
                let mut simple = vec![0i64; rank];
                simple[offset + i] = 1;
                // Cartan integer 2(beta, a_i)/(a_i, a_i).
                let c2 = BigRational::from(BigInt::from(2)) * pairing(beta, &simple)
                    / pairing(&simple, &simple);
                debug_assert!(c2.is_integer());
                let c = c2.to_integer().to_i64().unwrap();
                // Walk down to find p, then the string gives q = p - c.
                let mut p = 0i64;
                loop {
                    let probe: Vec<i64> = beta
                        .iter()
                        .zip(&simple)
                        .map(|(x, y)| x - (p + 1) * y)
                        .collect();
                    if found.contains_key(&probe) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                if p - c >= 1 {
                    let up: Vec<i64> = beta.iter().zip(&simple).map(|(x, y)| x + y).collect();
                    if !found.contains_key(&up) && !next.contains(&up) {
                        next.push(up);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for v in &next {
            found.insert(v.clone(), ());
        }
        levels.push(next);
    }

    levels.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: usize) -> AlgebraModel {
        build_algebra(&[FactorSpec::new(Family::A, n)], 0).unwrap()
    }

    #[test]
    fn root_counts_match_the_classification() {
        let cases = [
            (Family::A, 4, 20),
            (Family::B, 3, 18),
            (Family::C, 3, 18),
            (Family::D, 4, 24),
            (Family::G, 2, 12),
            (Family::F, 4, 48),
            (Family::E, 6, 72),
        ];
        for (fam, rank, count) in cases {
            let m = build_algebra(&[FactorSpec::new(fam, rank)], 0).unwrap();
            assert_eq!(m.root_count(), count, "{fam}{rank}");
            assert_eq!(m.positive_count() * 2, count);
        }
    }

    #[test]
    fn a2_killing_values() {
        // su(3): every root has (a, a) = 1/3, adjacent simple roots pair to -1/6.
        let m = a(2);
        assert_eq!(m.root_count(), 6);
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let sixth = BigRational::new(BigInt::from(1), BigInt::from(6));
        for r in 0..m.root_count() {
            assert_eq!(m.norm2_rat(r), third);
        }
        let a1 = m.root_id(&[1, 0]).unwrap();
        let a2 = m.root_id(&[0, 1]).unwrap();
        let theta = m.root_id(&[1, 1]).unwrap();
        assert_eq!(m.pairing_rat(a1, a2), -sixth.clone());
        // (e1-e2, e1-e3) = 1/6
        assert_eq!(m.pairing_rat(a1, theta), sixth);
        // (a, -a) = -(a, a)
        assert_eq!(m.pairing_rat(a1, m.negate(a1)), -third);
    }

    #[test]
    fn killing_scale_matches_dual_coxeter_numbers() {
        // (theta, theta) = 1/h_vee for the highest root theta.
        let cases = [
            (Family::A, 5, 6i64),
            (Family::B, 3, 5),
            (Family::C, 3, 4),
            (Family::D, 4, 6),
            (Family::G, 2, 4),
            (Family::F, 4, 9),
            (Family::E, 6, 12),
        ];
        for (fam, rank, hv) in cases {
            let m = build_algebra(&[FactorSpec::new(fam, rank)], 0).unwrap();
            // Highest root = last positive in the height order.
            let theta = m.positive_count() - 1;
            assert_eq!(
                m.norm2_rat(theta),
                BigRational::new(BigInt::from(1), BigInt::from(hv)),
                "{fam}{rank}"
            );
        }
    }

    #[test]
    fn cartan_integrality_and_negation_closure() {
        for spec in [
            FactorSpec::new(Family::B, 2),
            FactorSpec::new(Family::G, 2),
            FactorSpec::new(Family::D, 4),
        ] {
            let m = build_algebra(&[spec], 0).unwrap();
            for x in 0..m.root_count() {
                let neg = m.negate(x);
                let c: Vec<i64> = m.coords(x).iter().map(|v| -v).collect();
                assert_eq!(m.coords(neg), c.as_slice());
                for y in 0..m.root_count() {
                    let two_xy = BigRational::from(BigInt::from(2)) * m.pairing_rat(x, y);
                    assert!((two_xy / m.norm2_rat(y)).is_integer());
                }
            }
        }
    }

    #[test]
    fn product_roots_are_orthogonal_across_factors() {
        let m = build_algebra(
            &[FactorSpec::new(Family::A, 2), FactorSpec::new(Family::A, 2)],
            2,
        )
        .unwrap();
        assert_eq!(m.root_count(), 12);
        assert_eq!(m.cartan_dim(), 6);
        for x in 0..m.root_count() {
            for y in 0..m.root_count() {
                if m.component(x) != m.component(y) {
                    assert!(m.pairing_rat(x, y).is_zero());
                }
            }
        }
    }

    #[test]
    fn a4_has_ten_positive_roots() {
        let m = a(4);
        assert_eq!(m.root_count(), 20);
        assert_eq!(m.positive_count(), 10);
    }

    #[test]
    fn root_strings_on_a2_and_g2() {
        let m = a(2);
        let a1 = m.root_id(&[1, 0]).unwrap();
        let a2 = m.root_id(&[0, 1]).unwrap();
        let theta = m.root_id(&[1, 1]).unwrap();
        assert_eq!(m.root_string(a1, a2).unwrap(), (0, 1));
        assert_eq!(m.root_string(a1, theta).unwrap(), (1, 0));
        assert!(m.root_string(a1, m.negate(a1)).is_err());

        let g = build_algebra(&[FactorSpec::new(Family::G, 2)], 0).unwrap();
        let long = g.root_id(&[1, 0]).unwrap();
        let short = g.root_id(&[0, 1]).unwrap();
        assert_eq!(g.root_string(short, long).unwrap(), (0, 3));
        // p - q = 2(b, a)/(a, a) on every admissible pair.
        for x in 0..g.root_count() {
            for y in 0..g.root_count() {
                if y == x || y == g.negate(x) {
                    continue;
                }
                let (p, q) = g.root_string(x, y).unwrap();
                let c = BigRational::from(BigInt::from(2)) * g.pairing_rat(y, x) / g.norm2_rat(x);
                assert_eq!(BigRational::from(BigInt::from(p as i64 - q as i64)), c);
            }
        }
    }

    #[test]
    fn rank_validation() {
        assert!(build_algebra(&[FactorSpec::new(Family::A, 9)], 0).is_err());
        assert!(build_algebra(&[FactorSpec::new(Family::D, 2)], 0).is_err());
        assert!(build_algebra_with_cap(&[FactorSpec::new(Family::A, 9)], 0, 10).is_ok());
        assert!(Family::parse("Q").is_err());
    }
}
