use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    /// Legendre polynomials of degree `0..n`.
    Legendre,
    /// Piecewise-linear hat functions on `n` equally spaced nodes of
    /// `[-1, 1]`; a single node means the constant function.
    LagrangeNodes,
}

/// Basis for the voltage function on the normalized radial coordinate
/// `α̂ ∈ [-1, 1]` of the winding.
///
/// Function `l` is `scale[l] · f_{order[l]}` where `f_k` is the `k`-th member
/// of the family; scaling and reordering only exist to check that derived
/// quantities do not depend on how the basis is labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageBasis {
    family: BasisFamily,
    order: Vec<usize>,
    scale: Vec<f64>,
}

impl VoltageBasis {
    pub fn new(family: BasisFamily, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "voltage basis needs at least one function".into(),
            ));
        }
        Ok(VoltageBasis {
            family,
            order: (0..n).collect(),
            scale: vec![1.0; n],
        })
    }

    pub fn legendre(n: usize) -> Result<Self> {
        Self::new(BasisFamily::Legendre, n)
    }

    pub fn hats(n: usize) -> Result<Self> {
        Self::new(BasisFamily::LagrangeNodes, n)
    }

    /// Relabelled and rescaled copy: new function `l` is
    /// `scale[l] · old function perm[l]`.
    pub fn transformed(&self, perm: &[usize], scale: &[f64]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || scale.len() != n {
            return Err(Error::Dimension(format!(
                "basis transform needs {n} entries"
            )));
        }
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        if scale.iter().any(|s| !s.is_finite() || *s == 0.0) {
            return Err(Error::InvalidArgument(
                "basis scale must be finite and nonzero".into(),
            ));
        }
        Ok(VoltageBasis {
            family: self.family,
            order: perm.iter().map(|&p| self.order[p]).collect(),
            scale: perm
                .iter()
                .zip(scale)
                .map(|(&p, s)| s * self.scale[p])
                .collect(),
        })
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Value of function `l` at `a ∈ [-1, 1]`.
    pub fn eval(&self, l: usize, a: f64) -> Result<f64> {
        if l >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "basis index {l} out of range (N_p = {})",
                self.len()
            )));
        }
        Ok(self.eval_unchecked(l, a))
    }

    pub(crate) fn eval_unchecked(&self, l: usize, a: f64) -> f64 {
        let k = self.order[l];
        let v = match self.family {
            BasisFamily::Legendre => legendre(k, a),
            BasisFamily::LagrangeNodes => hat(k, self.len(), a),
        };
        self.scale[l] * v
    }

    /// `∫_{-1}^{1} f_l(a) da` for every function, in closed form.
    pub fn integrals(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|l| {
                let k = self.order[l];
                let raw = match self.family {
                    BasisFamily::Legendre => {
                        if k == 0 {
                            2.0
                        } else {
                            0.0
                        }
                    }
                    BasisFamily::LagrangeNodes if n == 1 => 2.0,
                    BasisFamily::LagrangeNodes => {
                        let h = 2.0 / (n - 1) as f64;
                        if k == 0 || k == n - 1 {
                            0.5 * h
                        } else {
                            h
                        }
                    }
                };
                self.scale[l] * raw
            })
            .collect()
    }
}

/// Legendre polynomial `P_k(a)` by the three-term recurrence.
pub fn legendre(k: usize, a: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, a);
    if k == 0 {
        return p0;
    }
    for j in 1..k {
        let j = j as f64;
        let p2 = ((2.0 * j + 1.0) * a * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn hat(k: usize, n: usize, a: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let h = 2.0 / (n - 1) as f64;
    let node = -1.0 + k as f64 * h;
    (1.0 - (a - node).abs() / h).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values() {
        let b = VoltageBasis::legendre(5).unwrap();
        assert_eq!(b.eval(0, 0.3).unwrap(), 1.0);
        assert_eq!(b.eval(1, 0.5).unwrap(), 0.5);
        // P2(a) = (3a² - 1)/2
        assert!((b.eval(2, 0.5).unwrap() - (-0.125)).abs() < 1e-15);
        assert!(b.eval(5, 0.0).is_err());
        assert_eq!(b.integrals(), vec![2.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn hats_partition_unity() {
        let b = VoltageBasis::hats(4).unwrap();
        for i in 0..=20 {
            let a = -1.0 + 0.1 * i as f64;
            let s: f64 = (0..4).map(|l| b.eval(l, a).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        let s: f64 = b.integrals().iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
        assert_eq!(VoltageBasis::hats(2).unwrap().integrals(), vec![1.0, 1.0]);
    }

    #[test]
    fn transform_permutes_and_scales() {
        let b = VoltageBasis::legendre(3).unwrap();
        let t = b.transformed(&[2, 0, 1], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.eval(0, 0.4).unwrap(), b.eval(2, 0.4).unwrap());
        assert_eq!(t.eval(1, 0.4).unwrap(), 2.0);
        assert_eq!(t.integrals(), vec![0.0, 4.0, 0.0]);
        assert!(b.transformed(&[0, 0, 1], &[1.0; 3]).is_err());
    }
}
