//! a- and b-invariants, the Fano prediction and orbifold canonical coefficients.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sector::{is_adequate, junior_count, RaisingFunction, SectorLabel, StackDescriptor};
use crate::Q;

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub a: Q,
    pub b: usize,
    pub rho: usize,
    pub j_c: usize,
    pub adequate: bool,
    pub predicted_alpha: Q,
    pub predicted_log_exponent: i64,
}

#[derive(Serialize)]
struct ReportJson {
    a: String,
    b: usize,
    rho: usize,
    j_c: usize,
    adequate: bool,
    prediction: String,
}

impl InvariantReport {
    /// `C*B^(alpha)*(log B)^k`.
    pub fn prediction(&self) -> String {
        format!(
            "C*B^({})*(log B)^{}",
            self.predicted_alpha, self.predicted_log_exponent
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ReportJson {
            a: self.a.to_string(),
            b: self.b,
            rho: self.rho,
            j_c: self.j_c,
            adequate: self.adequate,
            prediction: self.prediction(),
        })
        .expect("report serializes")
    }
}

/// `(a, b)` of `(O, c)` on a zero-dimensional stack: `a = 1/min c` over
/// twisted sectors, `b` the number of sectors attaining it.
pub fn ab_invariants(stack: &StackDescriptor, c: &RaisingFunction) -> Result<(Q, usize)> {
    if stack.dim() != 0 {
        return Err(Error::Unsupported(format!(
            "(a, b) of (O, c) needs a zero-dimensional stack, {stack} has dimension {}",
            stack.dim()
        )));
    }
    let values: Vec<(SectorLabel, Q)> = stack
        .sectors()?
        .into_iter()
        .filter(|s| s.is_twisted)
        .map(|s| {
            let v = c
                .get(&s.label)
                .ok_or_else(|| Error::Raising(format!("no value on sector {}", s.label)))?;
            Ok((s.label, v))
        })
        .collect::<Result<_>>()?;
    ab_from_values(values.iter().map(|(l, v)| (l.to_string(), *v)))
}

/// `(a, b)` from the c-values on twisted sectors (or Galois orbits).
pub fn ab_from_values(values: impl IntoIterator<Item = (String, Q)>) -> Result<(Q, usize)> {
    let mut min: Option<Q> = None;
    let mut count = 0;
    for (label, v) in values {
        if !v.is_positive() {
            return Err(Error::NotBig(format!("c vanishes on twisted sector {label}")));
        }
        match min {
            Some(m) if v > m => {}
            Some(m) if v == m => count += 1,
            _ => {
                min = Some(v);
                count = 1;
            }
        }
    }
    let min = min.ok_or(Error::NoTwistedSector)?;
    Ok((min.recip(), count))
}

/// `(a, b)` of `(O, r·c)`.
pub fn scaling_check(stack: &StackDescriptor, c: &RaisingFunction, r: Q) -> Result<(Q, usize)> {
    if !r.is_positive() {
        return Err(Error::InvalidArgument(format!("scale {r} must be positive")));
    }
    ab_invariants(stack, &c.scaled(r))
}

/// Prediction for an adequate pair on a Fano stack: `C·B·(log B)^{ρ + j_c − 1}`.
pub fn fano_prediction(stack: &StackDescriptor, c: &RaisingFunction) -> Result<InvariantReport> {
    let adequacy = is_adequate(stack, c)?;
    if !adequacy.adequate {
        return Err(Error::Inadequate(adequacy.reason));
    }
    let rho = stack.rho();
    let j_c = junior_count(stack, c)?;
    let b = rho + j_c;
    if stack.dim() == 0 {
        let (a, b0) = ab_invariants(stack, c)?;
        debug_assert!(a.is_one() && b0 == b);
        if !a.is_one() || b0 != b {
            return Err(Error::Inadequate(format!(
                "internal mismatch: (a, b) = ({a}, {b0}) but rho + j_c = {b}"
            )));
        }
    }
    Ok(InvariantReport {
        a: Q::one(),
        b,
        rho,
        j_c,
        adequate: true,
        predicted_alpha: Q::one(),
        predicted_log_exponent: b as i64 - 1,
    })
}

/// The report the `invariants` command prints: the Fano prediction when the
/// pair is adequate, otherwise `(a, b)` for zero-dimensional stacks.
pub fn invariant_report(stack: &StackDescriptor, c: &RaisingFunction) -> Result<InvariantReport> {
    let adequacy = is_adequate(stack, c)?;
    if adequacy.adequate {
        return fano_prediction(stack, c);
    }
    if stack.dim() > 0 {
        return Err(Error::Inadequate(adequacy.reason));
    }
    let (a, b) = ab_invariants(stack, c)?;
    Ok(InvariantReport {
        a,
        b,
        rho: 0,
        j_c: junior_count(stack, c)?,
        adequate: false,
        predicted_alpha: a,
        predicted_log_exponent: b as i64 - 1,
    })
}

/// Coefficient `age(Y) − 1` of each twisted sector in the orbifold canonical class.
pub fn orbifold_canonical_coefficients(stack: &StackDescriptor) -> Result<Vec<(SectorLabel, Q)>> {
    Ok(stack
        .sectors()?
        .into_iter()
        .filter(|s| s.is_twisted)
        .map(|s| (s.label, s.age - Q::one()))
        .collect())
}

/// Twisted sectors where `c` attains its minimum.
pub fn argmin_sectors(stack: &StackDescriptor, c: &RaisingFunction) -> Result<Vec<SectorLabel>> {
    let twisted: Vec<(SectorLabel, Q)> = stack
        .sectors()?
        .into_iter()
        .filter(|s| s.is_twisted)
        .filter_map(|s| c.get(&s.label).map(|v| (s.label, v)))
        .collect();
    let Some(min) = twisted.iter().map(|(_, v)| *v).min() else {
        return Ok(Vec::new());
    };
    Ok(twisted
        .into_iter()
        .filter(|(_, v)| *v == min && !min.is_zero())
        .map(|(l, _)| l)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::FieldDescriptor;
    use crate::group::FiniteGroup;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn kluners() -> (StackDescriptor, RaisingFunction) {
        let x = StackDescriptor::bg(FiniteGroup::kluners(), FieldDescriptor::Rationals);
        let c = RaisingFunction::index(&x).unwrap();
        (x, c)
    }

    #[test]
    fn mu_invariants() {
        let mu3 = StackDescriptor::Mu(3);
        let c = RaisingFunction::mu_table(3, &[q(1, 1), q(1, 1)]).unwrap();
        assert_eq!(ab_invariants(&mu3, &c).unwrap(), (q(1, 1), 2));
        let mu2 = StackDescriptor::Mu(2);
        let c = RaisingFunction::mu_table(2, &[q(1, 1)]).unwrap();
        assert_eq!(ab_invariants(&mu2, &c).unwrap(), (q(1, 1), 1));
        assert_eq!(scaling_check(&mu2, &c, q(2, 1)).unwrap(), (q(1, 2), 1));
        assert_eq!(scaling_check(&mu2, &c, q(1, 1)).unwrap(), (q(1, 1), 1));
        assert!(scaling_check(&mu2, &c, q(0, 1)).is_err());
    }

    #[test]
    fn kluners_ab() {
        let (x, c) = kluners();
        assert_eq!(ab_invariants(&x, &c).unwrap(), (q(1, 2), 1));
        assert_eq!(scaling_check(&x, &c, q(1, 2)).unwrap(), (q(1, 1), 1));
        let r = invariant_report(&x, &c).unwrap();
        assert!(!r.adequate);
        assert_eq!(r.prediction(), "C*B^(1/2)*(log B)^0");
        let json = r.to_json();
        assert_eq!(json["a"], "1/2");
        assert_eq!(json["b"], 1);
    }

    #[test]
    fn not_big_and_no_twisted() {
        let mu2 = StackDescriptor::Mu(2);
        let zero = RaisingFunction::zero(&mu2).unwrap();
        assert!(matches!(ab_invariants(&mu2, &zero), Err(Error::NotBig(_))));
        let mu1 = StackDescriptor::Mu(1);
        let c = RaisingFunction::zero(&mu1).unwrap();
        assert_eq!(ab_invariants(&mu1, &c), Err(Error::NoTwistedSector));
        assert!(ab_invariants(&StackDescriptor::Wps(vec![1, 2]), &RaisingFunction::quasi_toric(&[1, 2]).unwrap()).is_err());
    }

    #[test]
    fn fano_predictions() {
        let p23 = StackDescriptor::Wps(vec![2, 3]);
        let r = fano_prediction(&p23, &RaisingFunction::quasi_toric(&[2, 3]).unwrap()).unwrap();
        assert_eq!((r.predicted_alpha, r.predicted_log_exponent), (q(1, 1), 0));

        let p112 = StackDescriptor::Wps(vec![1, 1, 2]);
        let r = fano_prediction(&p112, &RaisingFunction::zero(&p112).unwrap()).unwrap();
        assert_eq!((r.predicted_alpha, r.predicted_log_exponent), (q(1, 1), 1));

        let x = StackDescriptor::Product(vec![p23, StackDescriptor::Mu(2)]);
        let c = RaisingFunction::boxplus_on(
            &x,
            &[
                RaisingFunction::quasi_toric(&[2, 3]).unwrap(),
                RaisingFunction::mu_table(2, &[q(1, 1)]).unwrap(),
            ],
        )
        .unwrap();
        let r = fano_prediction(&x, &c).unwrap();
        assert_eq!((r.rho, r.j_c, r.predicted_log_exponent), (1, 1, 1));
    }

    #[test]
    fn inadequate_rejected() {
        let mu2 = StackDescriptor::Mu(2);
        let c = RaisingFunction::mu_table(2, &[q(1, 2)]).unwrap();
        assert!(matches!(fano_prediction(&mu2, &c), Err(Error::Inadequate(_))));
    }

    #[test]
    fn canonical_coefficients() {
        let p112 = StackDescriptor::Wps(vec![1, 1, 2]);
        let coeffs = orbifold_canonical_coefficients(&p112).unwrap();
        assert_eq!(coeffs, vec![(SectorLabel::Fraction(q(1, 2)), q(0, 1))]);
        let p23 = StackDescriptor::Wps(vec![2, 3]);
        let coeffs = orbifold_canonical_coefficients(&p23).unwrap();
        assert_eq!(coeffs[0], (SectorLabel::Fraction(q(1, 3)), q(-2, 3)));
        let (x, _) = kluners();
        assert!(orbifold_canonical_coefficients(&x)
            .unwrap()
            .iter()
            .all(|(_, v)| *v == q(-1, 1)));
    }
}
