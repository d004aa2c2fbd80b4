use super::{NodalArray, Provenance};
use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

pub fn smallest_prime_at_least(n: u64) -> u64 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

fn pow_mod(base: u64, exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc = 1u128 % m;
    let mut b = base as u128 % m;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

pub fn check_prime(prime: u64) -> Result<()> {
    if !is_prime(prime) {
        return Err(Error::NotPrime(prime));
    }
    if prime < 3 {
        return Err(Error::InvalidArgument("Weil points need a prime of at least 3".into()));
    }
    Ok(())
}

/// Residues `j^q mod p` folded to `min(r, p - r)`, for `q = 1..=d`.
fn folded_residues(prime: u64, dimension: usize, j: u64) -> impl Iterator<Item = u64> {
    (1..=dimension as u64).map(move |q| {
        let r = pow_mod(j, q, prime);
        r.min(prime - r)
    })
}

/// The point `z_j` with coordinates `cos(2π j^q / p)`, `q = 1..=d`.
///
/// The angle is reduced to the folded residue first, so `z_j` and `z_{p-j}`
/// agree bit for bit.
pub fn weil_point(prime: u64, dimension: usize, j: u64) -> Vec<f64> {
    let p = prime as f64;
    folded_residues(prime, dimension, j)
        .map(|a| (2.0 * std::f64::consts::PI * a as f64 / p).cos())
        .collect()
}

fn weil_range(prime: u64, dimension: usize, range: std::ops::Range<u64>, sampler: &str) -> Result<NodalArray> {
    check_prime(prime)?;
    if dimension == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut points = Vec::with_capacity((range.end - range.start) as usize * dimension);
    for j in range {
        points.extend(weil_point(prime, dimension, j));
    }
    NodalArray::new(
        dimension,
        points,
        Provenance {
            sampler: sampler.into(),
            prime: Some(prime),
            ..Provenance::default()
        },
    )
}

/// The `⌊p/2⌋` points `z_0, …, z_{⌊p/2⌋-1}`. The first is the corner `(1, …, 1)`.
pub fn weil_points(prime: u64, dimension: usize) -> Result<NodalArray> {
    weil_range(prime, dimension, 0..prime / 2, "weil")
}

/// The `⌊p/2⌋` points `z_1, …, z_{⌊p/2⌋}`, all strictly inside the cube.
/// Together with `z_0` and their mirrors these make up the whole orbit.
pub fn weil_points_interior(prime: u64, dimension: usize) -> Result<NodalArray> {
    weil_range(prime, dimension, 1..prime / 2 + 1, "weil_interior")
}

/// Checks `z_j = z_{p-j}` for every `j = 1..p-1`, both on the integer residues
/// and on the computed coordinates.
pub fn weil_symmetry_holds(prime: u64, dimension: usize) -> Result<bool> {
    check_prime(prime)?;
    for j in 1..prime {
        let k = prime - j;
        for q in 1..=dimension as u64 {
            let a = pow_mod(j, q, prime);
            let b = pow_mod(k, q, prime);
            if a != b && a != prime - b {
                return Ok(false);
            }
        }
        let zj = weil_point(prime, dimension, j);
        let zk = weil_point(prime, dimension, k);
        if zj.iter().zip(&zk).any(|(x, y)| x.to_bits() != y.to_bits()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        for p in [101, 359, 751, 1511] {
            assert!(is_prime(p));
        }
        assert_eq!(smallest_prime_at_least(360), 367);
    }

    #[test]
    fn counts_and_corner() {
        let w = weil_points(359, 4).unwrap();
        assert_eq!(w.count(), 179);
        assert_eq!(w.point(0), &[1.0; 4]);
        let inner = weil_points_interior(359, 4).unwrap();
        assert_eq!(inner.count(), 179);
        assert!(inner.as_flat().iter().all(|x| x.abs() < 1.0));
        assert_eq!(inner.point(0), w.point(1));
    }

    #[test]
    fn rejects_composites() {
        assert!(matches!(weil_points(100, 2), Err(Error::NotPrime(100))));
        assert!(weil_points(2, 2).is_err());
    }

    #[test]
    fn symmetry() {
        for p in [101, 359] {
            assert!(weil_symmetry_holds(p, 4).unwrap());
        }
    }

    #[test]
    fn first_coordinate_is_a_rotation() {
        let w = weil_points(101, 2).unwrap();
        for j in 0..50 {
            let want = (2.0 * std::f64::consts::PI * j as f64 / 101.0).cos();
            assert!((w.point(j)[0] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn large_exponent_residues() {
        assert_eq!(pow_mod(2, 10, 1511), 1024);
        assert_eq!(pow_mod(1510, 15, 1511), 1510);
    }
}
