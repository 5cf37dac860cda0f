//! Verification point sets.

use crate::network::Domain;

/// `n` equally spaced points covering `[a, b]` including both ends.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Halton points in the box, plus its corners when there are at most 2^d ≤ 16 of them.
pub fn halton(domain: &Domain, n: usize) -> Vec<Vec<f64>> {
    let d = domain.lo.len();
    assert!(d <= PRIMES.len(), "Halton sampling supports up to {} dimensions", PRIMES.len());
    let mut pts: Vec<Vec<f64>> = (1..=n as u64)
        .map(|i| {
            (0..d)
                .map(|j| domain.lo[j] + (domain.hi[j] - domain.lo[j]) * radical_inverse(i, PRIMES[j]))
                .collect()
        })
        .collect();
    if d <= 4 {
        for mask in 0..(1usize << d) {
            pts.push((0..d).map(|j| if mask >> j & 1 == 1 { domain.hi[j] } else { domain.lo[j] }).collect());
        }
    }
    pts
}

/// A grid for one dimension and Halton points otherwise.
pub fn domain_points(domain: &Domain, n: usize) -> Vec<Vec<f64>> {
    if domain.lo.len() == 1 {
        linspace(domain.lo[0], domain.hi[0], n).into_iter().map(|x| vec![x]).collect()
    } else {
        halton(domain, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn halton_stays_in_box() {
        let dom = Domain { lo: vec![0.0, -1.0], hi: vec![1.0, 2.0] };
        for p in halton(&dom, 1000) {
            assert!((0.0..=1.0).contains(&p[0]) && (-1.0..=2.0).contains(&p[1]));
        }
    }
}
