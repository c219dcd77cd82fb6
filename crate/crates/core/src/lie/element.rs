//! Elements of the complexified algebra in the Cartan-Weyl basis, with the
//! bracket and the antilinear conjugation fixing the compact real form
//! (`conj E_g = -E_{-g}`, `conj t = -t` on the real span of the `t_l`).

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::lie::chevalley::{structure_constants, StructureConstantTable};
use crate::lie::root_system::{AlgebraModel, RootId, C64};

/// A root-system model together with its signed structure constants.
#[derive(Debug, Clone)]
pub struct Algebra {
    pub model: Arc<AlgebraModel>,
    pub constants: Arc<StructureConstantTable>,
}

impl Algebra {
    pub fn new(model: AlgebraModel) -> Result<Algebra> {
        let constants = structure_constants(&model)?;
        Ok(Algebra {
            model: Arc::new(model),
            constants: Arc::new(constants),
        })
    }

    pub fn zero_element(&self) -> CwElement {
        CwElement {
            cartan: DVector::from_element(self.model.cartan_dim(), C64::new(0.0, 0.0)),
            roots: DVector::from_element(self.model.root_count(), C64::new(0.0, 0.0)),
        }
    }

    /// The root vector `E_r`.
    pub fn root_element(&self, r: RootId) -> CwElement {
        let mut e = self.zero_element();
        e.roots[r] = C64::new(1.0, 0.0);
        e
    }

    /// The Cartan element `t_r = [E_r, E_{-r}]`.
    pub fn t_element(&self, r: RootId) -> CwElement {
        CwElement {
            cartan: self.model.t_vector(r),
            roots: DVector::from_element(self.model.root_count(), C64::new(0.0, 0.0)),
        }
    }

    /// Cartan element from coordinates over `t_{a_1}, ..., Z_center`.
    pub fn cartan_element(&self, coords: DVector<C64>) -> CwElement {
        assert_eq!(coords.len(), self.model.cartan_dim());
        CwElement {
            cartan: coords,
            roots: DVector::from_element(self.model.root_count(), C64::new(0.0, 0.0)),
        }
    }

    fn compatible(&self, x: &CwElement) -> bool {
        x.cartan.len() == self.model.cartan_dim() && x.roots.len() == self.model.root_count()
    }

    /// Lie bracket. Errors when the elements do not match this model's shape.
    pub fn bracket(&self, x: &CwElement, y: &CwElement) -> Result<CwElement> {
        if !self.compatible(x) || !self.compatible(y) {
            return Err(Error::ModelMismatch);
        }
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &CwElement, y: &CwElement) -> CwElement {
        let model = &self.model;
        let mut out = self.zero_element();
        let zero = C64::new(0.0, 0.0);

        let xr: Vec<(RootId, C64)> = x.nonzero_roots();
        let yr: Vec<(RootId, C64)> = y.nonzero_roots();

        // [H, E_s] terms.
        if x.cartan.iter().any(|c| *c != zero) {
            for &(s, ys) in &yr {
                out.roots[s] += model.root_on_cartan(s, &x.cartan) * ys;
            }
        }
        if y.cartan.iter().any(|c| *c != zero) {
            for &(s, xs) in &xr {
                out.roots[s] -= model.root_on_cartan(s, &y.cartan) * xs;
            }
        }

        // [E_r, E_s] terms.
        for &(r, xr_c) in &xr {
            for &(s, ys_c) in &yr {
                let c = xr_c * ys_c;
                if s == model.negate(r) {
                    let t = model.t_vector(r);
                    for i in 0..model.rank {
                        out.cartan[i] += c * t[i];
                    }
                } else if let Some(sum) = model.sum_root(r, s) {
                    out.roots[sum] += c * self.constants.n(r, s);
                }
            }
        }
        out
    }

    /// Antilinear conjugation with respect to the compact real form.
    pub fn conjugate(&self, x: &CwElement) -> CwElement {
        let mut out = self.zero_element();
        for i in 0..x.cartan.len() {
            out.cartan[i] = -x.cartan[i].conj();
        }
        for (r, c) in x.nonzero_roots() {
            out.roots[self.model.negate(r)] = -c.conj();
        }
        out
    }

    /// Ad-invariant extension of the Killing form (`B(E_r, E_{-r}) = 1`,
    /// Killing on the semisimple Cartan, euclidean on the center block).
    pub fn killing(&self, x: &CwElement, y: &CwElement) -> C64 {
        let mut acc = self.model.cartan_killing(&x.cartan, &y.cartan);
        for (r, c) in x.nonzero_roots() {
            acc += c * y.roots[self.model.negate(r)];
        }
        acc
    }
}

/// Element over the Cartan-Weyl basis: a Cartan part (coordinates over
/// `t_{a_i}` and the center) plus root-vector coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CwElement {
    pub cartan: DVector<C64>,
    pub roots: DVector<C64>,
}

impl CwElement {
    pub fn nonzero_roots(&self) -> Vec<(RootId, C64)> {
        self.roots
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() != 0.0)
            .map(|(r, c)| (r, *c))
            .collect()
    }

    pub fn scaled(&self, c: C64) -> CwElement {
        CwElement {
            cartan: &self.cartan * c,
            roots: &self.roots * c,
        }
    }

    pub fn add(&self, other: &CwElement) -> CwElement {
        CwElement {
            cartan: &self.cartan + &other.cartan,
            roots: &self.roots + &other.roots,
        }
    }

    pub fn sub(&self, other: &CwElement) -> CwElement {
        CwElement {
            cartan: &self.cartan - &other.cartan,
            roots: &self.roots - &other.roots,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.cartan.norm_squared() + self.roots.norm_squared()).sqrt()
    }
}
