//! Index groups and their duals.
//!
//! Two families are supported: the integers ℤ, whose dual is the circle
//! `[0, 2π)` (discretised on a uniform grid for densities), and finite products
//! `ℤ_{n₁} × … × ℤ_{n_d}`, which are self-dual. Haar measure on the dual is
//! normalised to total mass one.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    #[serde(rename = "Z")]
    IntegerGroup,
    #[serde(rename = "ZN")]
    FiniteCyclicProduct,
}

/// An element of the index group. Integers carry one coordinate; cyclic
/// products carry one canonical residue per factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement(pub Vec<i64>);

impl GroupElement {
    pub fn int(a: i64) -> Self {
        GroupElement(vec![a])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl From<i64> for GroupElement {
    fn from(a: i64) -> Self {
        GroupElement::int(a)
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0.as_slice() {
            [a] => write!(f, "{a}"),
            coords => {
                let parts: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
                write!(f, "{}", parts.join(":"))
            }
        }
    }
}

/// Rank-one elements serialize as a bare integer, others as a coordinate array.
impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.as_slice() {
            [a] => s.serialize_i64(*a),
            coords => coords.serialize(s),
        }
    }
}

/// A character of the index group.
#[derive(Debug, Clone, PartialEq)]
pub enum DualPoint {
    /// χ_θ(a) = e^{iaθ}, θ ∈ [0, 2π).
    Angle(f64),
    /// χ_m(a) = exp(2πi Σ m_j a_j / n_j).
    Residues(Vec<i64>),
}

/// A measurable subset of the dual used for Haar-measure queries.
#[derive(Debug, Clone, PartialEq)]
pub enum DualSubset {
    /// Half-open intervals `[lo, hi)` inside `[0, 2π]`.
    Intervals(Vec<(f64, f64)>),
    /// Explicit dual points of a finite group.
    Points(Vec<DualPoint>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupDescriptor {
    kind: GroupKind,
    moduli: Vec<u64>,
    dual_grid_size: usize,
}

/// Largest supported dual grid for ℤ.
pub const MAX_DUAL_GRID: usize = 1 << 20;

impl GroupDescriptor {
    /// ℤ with its dual circle sampled at `dual_grid_size` uniform points.
    pub fn integers(dual_grid_size: usize) -> Result<Self> {
        if dual_grid_size < 2 || dual_grid_size % 2 != 0 || dual_grid_size > MAX_DUAL_GRID {
            return Err(Error::domain(format!(
                "dual_grid_size must be even and in 2..={MAX_DUAL_GRID}, got {dual_grid_size}"
            )));
        }
        Ok(GroupDescriptor {
            kind: GroupKind::IntegerGroup,
            moduli: Vec::new(),
            dual_grid_size,
        })
    }

    pub fn cyclic(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::domain("a cyclic product needs at least one modulus"));
        }
        if moduli.iter().any(|&n| n == 0) {
            return Err(Error::domain("moduli must be positive"));
        }
        let order = moduli
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n as usize))
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| Error::domain("group order too large"))?;
        Ok(GroupDescriptor {
            kind: GroupKind::FiniteCyclicProduct,
            moduli: moduli.to_vec(),
            dual_grid_size: order,
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn is_finite(&self) -> bool {
        self.kind == GroupKind::FiniteCyclicProduct
    }

    /// Number of coordinates in a group element.
    pub fn rank(&self) -> usize {
        match self.kind {
            GroupKind::IntegerGroup => 1,
            GroupKind::FiniteCyclicProduct => self.moduli.len(),
        }
    }

    /// Number of dual grid points: the torus resolution for ℤ, the group
    /// order for a finite product.
    pub fn dual_grid_size(&self) -> usize {
        self.dual_grid_size
    }

    /// Haar weight of one dual grid cell.
    pub fn cell_weight(&self) -> f64 {
        1.0 / self.dual_grid_size as f64
    }

    /// Largest |lag| whose character is resolved by the dual grid of ℤ.
    pub fn nyquist_lag(&self) -> Option<i64> {
        match self.kind {
            GroupKind::IntegerGroup => Some(self.dual_grid_size as i64 / 2 - 1),
            GroupKind::FiniteCyclicProduct => None,
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Reduces an element to canonical form, checking its rank.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::domain(format!(
                "group element has {} coordinates, group rank is {}",
                coords.len(),
                self.rank()
            )));
        }
        Ok(match self.kind {
            GroupKind::IntegerGroup => GroupElement(coords.to_vec()),
            GroupKind::FiniteCyclicProduct => GroupElement(
                coords
                    .iter()
                    .zip(&self.moduli)
                    .map(|(&a, &n)| a.rem_euclid(n as i64))
                    .collect(),
            ),
        })
    }

    pub fn canonical(&self, a: &GroupElement) -> Result<GroupElement> {
        self.element(&a.0)
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        let negated: Vec<i64> = a.0.iter().map(|x| -x).collect();
        self.element(&negated).expect("rank preserved by negation")
    }

    /// `b − a` in canonical form.
    pub fn sub(&self, b: &GroupElement, a: &GroupElement) -> GroupElement {
        let diff: Vec<i64> = b.0.iter().zip(&a.0).map(|(x, y)| x - y).collect();
        self.element(&diff).expect("rank preserved by subtraction")
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let sum: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        self.element(&sum).expect("rank preserved by addition")
    }

    /// All elements of a finite group in mixed-radix order (last factor fastest).
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        if !self.is_finite() {
            return Err(Error::Unsupported("cannot enumerate the integers".into()));
        }
        Ok((0..self.dual_grid_size)
            .map(|idx| GroupElement(self.unravel(idx)))
            .collect())
    }

    fn unravel(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.moduli.len()];
        for (slot, &n) in out.iter_mut().zip(&self.moduli).rev() {
            *slot = (idx % n as usize) as i64;
            idx /= n as usize;
        }
        out
    }

    fn ravel(&self, residues: &[i64]) -> usize {
        residues
            .iter()
            .zip(&self.moduli)
            .fold(0usize, |acc, (&r, &n)| acc * n as usize + r as usize)
    }

    /// Dual point at grid index `j`.
    pub fn dual_point(&self, j: usize) -> DualPoint {
        match self.kind {
            GroupKind::IntegerGroup => DualPoint::Angle(self.grid_angle(j)),
            GroupKind::FiniteCyclicProduct => DualPoint::Residues(self.unravel(j)),
        }
    }

    pub fn dual_grid(&self) -> Vec<DualPoint> {
        (0..self.dual_grid_size).map(|j| self.dual_point(j)).collect()
    }

    /// Angle θ_j = 2πj/G of the ℤ dual grid.
    pub fn grid_angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.dual_grid_size as f64
    }

    /// Grid index of the inverse character χ⁻¹ = χ̄.
    pub fn conjugate_index(&self, j: usize) -> usize {
        match self.kind {
            GroupKind::IntegerGroup => (self.dual_grid_size - j) % self.dual_grid_size,
            GroupKind::FiniteCyclicProduct => {
                let res: Vec<i64> = self
                    .unravel(j)
                    .iter()
                    .zip(&self.moduli)
                    .map(|(&m, &n)| (-m).rem_euclid(n as i64))
                    .collect();
                self.ravel(&res)
            }
        }
    }

    /// Grid index of a dual point, when it lies on the grid.
    pub fn dual_index(&self, point: &DualPoint) -> Result<usize> {
        self.check_dual(point)?;
        match point {
            DualPoint::Angle(theta) => {
                let x = theta / TAU * self.dual_grid_size as f64;
                let j = x.round();
                if (x - j).abs() > 1e-9 {
                    return Err(Error::domain(format!("angle {theta} is not a grid point")));
                }
                Ok(j as usize % self.dual_grid_size)
            }
            DualPoint::Residues(r) => Ok(self.ravel(r)),
        }
    }

    fn check_dual(&self, point: &DualPoint) -> Result<()> {
        match (self.kind, point) {
            (GroupKind::IntegerGroup, DualPoint::Angle(theta)) => {
                if theta.is_finite() && (0.0..TAU).contains(theta) {
                    Ok(())
                } else {
                    Err(Error::domain(format!("angle {theta} outside [0, 2π)")))
                }
            }
            (GroupKind::FiniteCyclicProduct, DualPoint::Residues(r)) => {
                if r.len() == self.moduli.len()
                    && r.iter().zip(&self.moduli).all(|(&m, &n)| m >= 0 && m < n as i64)
                {
                    Ok(())
                } else {
                    Err(Error::domain(format!("dual point {r:?} out of range")))
                }
            }
            _ => Err(Error::domain("dual point does not match the group kind")),
        }
    }

    fn check_element(&self, a: &GroupElement) -> Result<()> {
        if a.0.len() != self.rank() {
            return Err(Error::domain(format!(
                "group element {a} has wrong rank for this group"
            )));
        }
        if self.is_finite()
            && a.0.iter().zip(&self.moduli).any(|(&x, &n)| x < 0 || x >= n as i64)
        {
            return Err(Error::domain(format!("group element {a} is not reduced")));
        }
        Ok(())
    }

    /// χ(a) for a dual point χ and group element a.
    pub fn character_value(&self, point: &DualPoint, a: &GroupElement) -> Result<Complex64> {
        self.check_dual(point)?;
        self.check_element(a)?;
        Ok(match point {
            DualPoint::Angle(theta) => Complex64::cis(a.0[0] as f64 * theta),
            DualPoint::Residues(m) => self.residue_character(m, &a.0),
        })
    }

    /// χ_j(a) for the grid point with index `j`; `a` must be canonical.
    pub fn grid_character(&self, j: usize, a: &GroupElement) -> Complex64 {
        match self.kind {
            GroupKind::IntegerGroup => {
                // Exact phase reduction: e^{2πi·a·j/G}.
                let g = self.dual_grid_size as i64;
                let r = (a.0[0].rem_euclid(g) * j as i64).rem_euclid(g);
                Complex64::cis(TAU * r as f64 / g as f64)
            }
            GroupKind::FiniteCyclicProduct => self.residue_character(&self.unravel(j), &a.0),
        }
    }

    fn residue_character(&self, m: &[i64], a: &[i64]) -> Complex64 {
        let mut frac = 0.0;
        for ((&mi, &ai), &n) in m.iter().zip(a).zip(&self.moduli) {
            let n = n as i64;
            frac += (mi * ai).rem_euclid(n) as f64 / n as f64;
        }
        Complex64::cis(TAU * frac.fract())
    }

    /// Normalised Haar measure λ(S) of a finite union of dual cells.
    pub fn haar_weight(&self, subset: &DualSubset) -> Result<f64> {
        match (self.kind, subset) {
            (GroupKind::IntegerGroup, DualSubset::Intervals(ivs)) => {
                let mut sorted = ivs.clone();
                for &(lo, hi) in &sorted {
                    if !(0.0..=TAU).contains(&lo) || !(0.0..=TAU).contains(&hi) || lo > hi {
                        return Err(Error::domain(format!(
                            "interval [{lo}, {hi}) is not inside [0, 2π]"
                        )));
                    }
                }
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                for pair in sorted.windows(2) {
                    if pair[0].1 > pair[1].0 {
                        return Err(Error::domain("overlapping intervals"));
                    }
                }
                Ok(sorted.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / TAU)
            }
            (GroupKind::FiniteCyclicProduct, DualSubset::Points(points)) => {
                let mut seen = std::collections::BTreeSet::new();
                for p in points {
                    if !seen.insert(self.dual_index(p)?) {
                        return Err(Error::domain("repeated dual point"));
                    }
                }
                Ok(seen.len() as f64 / self.dual_grid_size as f64)
            }
            _ => Err(Error::domain("subset description does not match the group kind")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn integer_character_values() {
        let z = GroupDescriptor::integers(256).unwrap();
        let v = z
            .character_value(&DualPoint::Angle(PI / 2.0), &GroupElement::int(2))
            .unwrap();
        assert!(close(v, Complex64::new(-1.0, 0.0)));
        let one = z
            .character_value(&DualPoint::Angle(1.234), &GroupElement::int(0))
            .unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cyclic_character_matches_root_table() {
        let g = GroupDescriptor::cyclic(&[4]).unwrap();
        // Table of e^{2πi r/4} for r = 0..3.
        let roots = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for m in 0..4i64 {
            for a in 0..4i64 {
                let v = g
                    .character_value(&DualPoint::Residues(vec![m]), &GroupElement::int(a))
                    .unwrap();
                assert!(close(v, roots[((m * a) % 4) as usize]));
            }
        }
        let v = g
            .character_value(&DualPoint::Residues(vec![1]), &GroupElement::int(3))
            .unwrap();
        assert!(close(v, Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn out_of_range_inputs_rejected() {
        let z = GroupDescriptor::integers(8).unwrap();
        assert!(z
            .character_value(&DualPoint::Angle(7.0), &GroupElement::int(1))
            .is_err());
        let g = GroupDescriptor::cyclic(&[4]).unwrap();
        assert!(g
            .character_value(&DualPoint::Residues(vec![4]), &GroupElement::int(1))
            .is_err());
        assert!(g
            .character_value(&DualPoint::Residues(vec![1]), &GroupElement::int(5))
            .is_err());
        assert!(GroupDescriptor::integers(7).is_err());
        assert!(GroupDescriptor::cyclic(&[3, 0]).is_err());
    }

    #[test]
    fn haar_examples() {
        let z = GroupDescriptor::integers(64).unwrap();
        assert_eq!(z.haar_weight(&DualSubset::Intervals(vec![(0.0, PI)])).unwrap(), 0.5);
        assert_eq!(z.haar_weight(&DualSubset::Intervals(vec![])).unwrap(), 0.0);
        assert_eq!(z.haar_weight(&DualSubset::Intervals(vec![(0.0, TAU)])).unwrap(), 1.0);
        assert!(z
            .haar_weight(&DualSubset::Intervals(vec![(0.0, 2.0), (1.0, 3.0)]))
            .is_err());
        let g = GroupDescriptor::cyclic(&[8]).unwrap();
        let pts = (0..3).map(|m| DualPoint::Residues(vec![m])).collect();
        assert_eq!(g.haar_weight(&DualSubset::Points(pts)).unwrap(), 3.0 / 8.0);
        let dup = vec![DualPoint::Residues(vec![1]), DualPoint::Residues(vec![1])];
        assert!(g.haar_weight(&DualSubset::Points(dup)).is_err());
    }

    #[test]
    fn conjugate_index_maps_grid_to_grid() {
        let z = GroupDescriptor::integers(16).unwrap();
        for j in 0..16 {
            let c = z.conjugate_index(j);
            assert_eq!(z.conjugate_index(c), j);
            let s = z.grid_angle(j) + z.grid_angle(c);
            assert!(s.abs() < 1e-12 || (s - TAU).abs() < 1e-12);
        }
        let g = GroupDescriptor::cyclic(&[3, 4]).unwrap();
        for j in 0..12 {
            let c = g.conjugate_index(j);
            let a = GroupElement(vec![1, 1]);
            let prod = g.grid_character(j, &a) * g.grid_character(c, &a);
            assert!(close(prod, Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn grid_character_agrees_with_character_value() {
        let z = GroupDescriptor::integers(32).unwrap();
        for j in 0..32 {
            for a in -20..20 {
                let e = GroupElement::int(a);
                let direct = z.character_value(&z.dual_point(j), &e).unwrap();
                assert!((direct - z.grid_character(j, &e)).norm() < 1e-12);
            }
        }
    }
}
