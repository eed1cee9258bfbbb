//! Reduced-state purity and the separability test.

use num_complex::Complex64;

use super::sim::StateVector;
use super::OracleError;

pub const SEPARABLE_TOLERANCE: f64 = 1e-9;

/// `tr(ρ_A²)` for the reduced state on `part`.
pub fn reduced_purity(sv: &StateVector, part: &[usize]) -> Result<f64, OracleError> {
    let n = sv.n();
    let mut in_a = vec![false; n];
    for &q in part {
        if q >= n {
            return Err(OracleError::UnknownQubit(q.to_string()));
        }
        in_a[q] = true;
    }
    let a: Vec<usize> = (0..n).filter(|&q| in_a[q]).collect();
    let b: Vec<usize> = (0..n).filter(|&q| !in_a[q]).collect();
    if a.is_empty() || b.is_empty() {
        return Err(OracleError::EmptyPartition);
    }
    // Purity is symmetric across the cut; work on the smaller side.
    let (keep, rest) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let sub_index =
        |i: usize, qs: &[usize]| -> usize { qs.iter().fold(0, |acc, &q| (acc << 1) | usize::from(i & sv.bit(q) != 0)) };
    let (dk, dr) = (1usize << keep.len(), 1usize << rest.len());
    let mut m = vec![Complex64::new(0.0, 0.0); dk * dr];
    for (i, amp) in sv.amps().iter().enumerate() {
        m[sub_index(i, &keep) * dr + sub_index(i, &rest)] = *amp;
    }
    let mut purity = 0.0;
    for x in 0..dk {
        for y in 0..dk {
            let rho: Complex64 = (0..dr).map(|k| m[x * dr + k] * m[y * dr + k].conj()).sum();
            purity += rho.norm_sqr();
        }
    }
    Ok(purity)
}

pub fn is_separable_partition(sv: &StateVector, part: &[usize]) -> Result<bool, OracleError> {
    Ok(reduced_purity(sv, part)? >= 1.0 - SEPARABLE_TOLERANCE)
}
