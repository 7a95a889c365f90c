//! Segmented sieve of Eratosthenes producing primality bits and the von
//! Mangoldt function.
//!
//! Segments are sieved independently (in parallel when a rayon pool is
//! available) and write disjoint slices of the output, so the table content
//! does not depend on the segment size or the thread count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sum::Neumaier;

/// Default sieve segment length in integers (a multiple of 64).
pub const DEFAULT_SEGMENT: usize = 1 << 22;
/// Largest limit accepted by [`build_prime_tables`].
pub const TABLE_CEILING: u64 = 1 << 34;
/// Default memory ceiling for a table, in bytes.
pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

const CACHE_MAGIC: &[u8; 4] = b"WGL1";
const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy)]
pub struct SieveConfig {
    pub segment_size: usize,
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_size: DEFAULT_SEGMENT,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Von Mangoldt values, primality bits and the primes up to `limit`.
///
/// `lambda[n]` is `ln p` when `n = p^j` with `j >= 1`, and `0.0` otherwise.
/// The table is immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VonMangoldtTable {
    limit: u64,
    lambda: Vec<f64>,
    prime_bits: Vec<u64>,
    primes: Vec<u64>,
    prime_powers: Vec<u64>,
}

/// Rough upper estimate of the bytes a table of `limit` occupies.
pub fn estimated_table_bytes(limit: u64) -> u64 {
    let n = limit as f64 + 1.0;
    let pi_upper = if limit < 17 { 8.0 } else { 1.26 * n / n.ln() };
    (8.0 * n + n / 8.0 + 16.0 * pi_upper) as u64
}

pub fn build_prime_tables(limit: u64) -> Result<VonMangoldtTable> {
    build_prime_tables_with(limit, &SieveConfig::default())
}

pub fn build_prime_tables_with(limit: u64, config: &SieveConfig) -> Result<VonMangoldtTable> {
    if limit < 2 {
        return Err(Error::param(format!("sieve limit must be at least 2, got {limit}")));
    }
    if limit > TABLE_CEILING {
        return Err(Error::Resource {
            message: format!("limit {limit} exceeds the table ceiling {TABLE_CEILING}"),
            advisory_segment: config.segment_size.max(64),
        });
    }
    let need = estimated_table_bytes(limit);
    if need > config.memory_budget {
        return Err(Error::Resource {
            message: format!(
                "table for limit {limit} needs about {need} bytes, budget is {}",
                config.memory_budget
            ),
            advisory_segment: DEFAULT_SEGMENT.min(config.segment_size.max(64)),
        });
    }
    if config.segment_size == 0 {
        return Err(Error::param("segment size must be positive"));
    }
    let segment = config.segment_size.div_ceil(64) * 64;

    let len = (limit + 1) as usize;
    let root = isqrt(limit);
    let base = simple_primes(root);

    let mut lambda = vec![0.0f64; len];
    let mut prime_bits = vec![0u64; len.div_ceil(64)];

    let per_segment: Vec<Vec<u64>> = prime_bits
        .par_chunks_mut(segment / 64)
        .zip(lambda.par_chunks_mut(segment))
        .enumerate()
        .map(|(s, (bits, lam))| {
            let lo = (s * segment) as u64;
            let hi = lo + lam.len() as u64;
            sieve_segment(lo, hi, &base, bits, lam)
        })
        .collect();

    let primes: Vec<u64> = per_segment.into_iter().flatten().collect();

    let mut higher = Vec::new();
    for &p in &base {
        let lp = (p as f64).ln();
        let mut pk = p * p;
        while pk <= limit {
            lambda[pk as usize] = lp;
            higher.push(pk);
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }
    higher.sort_unstable();
    let prime_powers = merge_sorted(&primes, &higher);

    Ok(VonMangoldtTable {
        limit,
        lambda,
        prime_bits,
        primes,
        prime_powers,
    })
}

fn sieve_segment(lo: u64, hi: u64, base: &[u64], bits: &mut [u64], lam: &mut [f64]) -> Vec<u64> {
    let span = (hi - lo) as usize;
    for w in bits.iter_mut() {
        *w = !0;
    }
    let tail = span % 64;
    if tail != 0 {
        let last = bits.len() - 1;
        bits[last] &= (1u64 << tail) - 1;
    }
    for n in lo..hi.min(2) {
        let i = (n - lo) as usize;
        bits[i >> 6] &= !(1u64 << (i & 63));
    }
    for &p in base {
        if p * p >= hi {
            break;
        }
        let first = (p * p).max(lo.div_ceil(p) * p);
        let mut m = first;
        while m < hi {
            let i = (m - lo) as usize;
            bits[i >> 6] &= !(1u64 << (i & 63));
            m += p;
        }
    }
    let mut found = Vec::new();
    for (wi, &w) in bits.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            let i = wi * 64 + b;
            let n = lo + i as u64;
            lam[i] = (n as f64).ln();
            found.push(n);
        }
    }
    found
}

fn simple_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn merge_sorted(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    iroot(n, 2)
}

/// Largest `r` with `r^k <= n`.
pub fn iroot(n: u64, k: u32) -> u64 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && r.checked_pow(k).map_or(true, |v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

impl VonMangoldtTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Λ(n), natural-log scale; zero outside the table.
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        if n <= self.limit {
            self.lambda[n as usize]
        } else {
            0.0
        }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        n <= self.limit && (self.prime_bits[(n >> 6) as usize] >> (n & 63)) & 1 == 1
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p <= x`.
    pub fn primes_up_to(&self, x: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }

    /// Every `n <= limit` with Λ(n) > 0, ascending.
    pub fn prime_powers(&self) -> &[u64] {
        &self.prime_powers
    }

    pub fn prime_powers_up_to(&self, x: u64) -> &[u64] {
        let end = self.prime_powers.partition_point(|&p| p <= x);
        &self.prime_powers[..end]
    }

    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    /// Chebyshev ψ(x) = Σ_{n≤x} Λ(n).
    pub fn chebyshev_psi(&self, x: u64) -> f64 {
        let mut acc = Neumaier::new();
        for &n in self.prime_powers_up_to(x) {
            acc.add(self.lambda[n as usize]);
        }
        acc.value()
    }

    pub(crate) fn require(&self, n: u64, what: &str) -> Result<()> {
        if n > self.limit {
            Err(Error::param(format!(
                "{what} needs a table up to {n}, table limit is {}",
                self.limit
            )))
        } else {
            Ok(())
        }
    }

    /// Serialise to the binary cache layout: `WGL1`, version (u32 LE),
    /// limit (u64 LE), bit-packed primality (LSB first), then Λ as f64 LE.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.limit.to_le_bytes())?;
        let nbytes = (self.limit as usize + 1).div_ceil(8);
        let mut packed = Vec::with_capacity(self.prime_bits.len() * 8);
        for word in &self.prime_bits {
            packed.extend_from_slice(&word.to_le_bytes());
        }
        w.write_all(&packed[..nbytes])?;
        let mut buf = Vec::with_capacity(8 * 8192);
        for chunk in self.lambda.chunks(8192) {
            buf.clear();
            for v in chunk {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Data("cache file has the wrong magic".into()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != CACHE_VERSION {
            return Err(Error::Data(format!("unsupported cache version {version}")));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let limit = u64::from_le_bytes(u64buf);
        if !(2..=TABLE_CEILING).contains(&limit) {
            return Err(Error::Data(format!("cache limit {limit} out of range")));
        }
        let len = limit as usize + 1;
        let mut packed = vec![0u8; len.div_ceil(8)];
        r.read_exact(&mut packed)?;
        packed.resize(len.div_ceil(64) * 8, 0);
        let prime_bits: Vec<u64> = packed
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut raw = vec![0u8; 8 * len];
        r.read_exact(&mut raw)?;
        let lambda: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();

        let mut primes = Vec::new();
        for (wi, &w) in prime_bits.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                let n = wi as u64 * 64 + b;
                if n <= limit {
                    primes.push(n);
                }
            }
        }
        if let Some(n) = lambda.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Data(format!("cache holds an invalid Λ({n})")));
        }
        // the support of Λ must be exactly the prime powers, each carrying ln p
        let mut expected = 0usize;
        for &p in &primes {
            let lp = (p as f64).ln();
            let mut q = p;
            loop {
                if lambda[q as usize] != lp {
                    return Err(Error::Data(format!("cache holds a wrong Λ({q})")));
                }
                expected += 1;
                match q.checked_mul(p) {
                    Some(next) if next <= limit => q = next,
                    _ => break,
                }
            }
        }
        let prime_powers: Vec<u64> = (0..len as u64).filter(|&n| lambda[n as usize] > 0.0).collect();
        if prime_powers.len() != expected {
            return Err(Error::Data("cache marks a composite with nonzero Λ".into()));
        }
        Ok(Self {
            limit,
            lambda,
            prime_bits,
            primes,
            prime_powers,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_cache(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_cache(BufReader::new(File::open(path)?))
    }
}

/// File name of the cache entry for `limit`.
pub fn cache_file_name(limit: u64) -> String {
    format!("wgl1-{limit}.bin")
}

/// Load the table for `limit` from `dir` if cached, otherwise build and store
/// it. An unreadable entry is rebuilt and replaced.
pub fn cached_prime_tables(dir: &Path, limit: u64) -> Result<VonMangoldtTable> {
    let path = dir.join(cache_file_name(limit));
    if path.exists() {
        if let Ok(table) = VonMangoldtTable::load(&path) {
            if table.limit == limit {
                return Ok(table);
            }
        }
    }
    let table = build_prime_tables(limit)?;
    std::fs::create_dir_all(dir)?;
    // concurrent runs may race on the same entry; each renames a complete file
    static SERIAL: std::sync::atomic::AtomicUsize = std::sync::atomic::AtomicUsize::new(0);
    let serial = SERIAL.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let tmp = dir.join(format!("{}.{}-{serial}.tmp", cache_file_name(limit), std::process::id()));
    table.save(&tmp)?;
    std::fs::rename(&tmp, &path)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table() {
        let t = build_prime_tables(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        assert_eq!(t.lambda(8), 2f64.ln());
        assert_eq!(t.lambda(9), 3f64.ln());
        assert_eq!(t.lambda(6), 0.0);
        assert_eq!(t.lambda(1), 0.0);
        assert_eq!(t.prime_powers(), &[2, 3, 4, 5, 7, 8, 9]);
        assert!(!t.is_prime(9));
        assert!(t.is_prime(7));
    }

    #[test]
    fn limit_two_edge() {
        let t = build_prime_tables(2).unwrap();
        assert_eq!(t.primes(), &[2]);
        assert_eq!(t.lambda(2), 2f64.ln());
    }

    #[test]
    fn rejects_small_limit() {
        assert!(matches!(build_prime_tables(1), Err(Error::Parameter(_))));
        assert!(matches!(build_prime_tables(0), Err(Error::Parameter(_))));
    }

    #[test]
    fn memory_budget_is_enforced() {
        let cfg = SieveConfig {
            segment_size: 1 << 16,
            memory_budget: 1 << 20,
        };
        match build_prime_tables_with(10_000_000, &cfg) {
            Err(Error::Resource {
                advisory_segment, ..
            }) => assert!(advisory_segment > 0),
            other => panic!("expected resource error, got {other:?}"),
        }
        assert!(matches!(
            build_prime_tables(TABLE_CEILING + 1),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn psi_of_100() {
        // prime powers <= 100 enumerated by hand: each prime once, plus
        // 4 8 16 32 64 (2), 9 27 81 (3), 25 (5), 49 (7).
        let primes = [
            2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
            83, 89, 97,
        ];
        let mut expected: f64 = primes.iter().map(|&p| (p as f64).ln()).sum();
        expected += 5.0 * 2f64.ln() + 3.0 * 3f64.ln() + 5f64.ln() + 7f64.ln();
        let t = build_prime_tables(100).unwrap();
        assert!((t.chebyshev_psi(100) - expected).abs() < 1e-12);
        assert!((t.chebyshev_psi(100) - 94.045).abs() < 1e-3);
    }

    #[test]
    fn segment_size_does_not_change_content() {
        let reference = build_prime_tables(200_003).unwrap();
        for seg in [64usize, 128, 1000, 4096, 65536] {
            let cfg = SieveConfig {
                segment_size: seg,
                ..SieveConfig::default()
            };
            let t = build_prime_tables_with(200_003, &cfg).unwrap();
            assert_eq!(t.prime_bits, reference.prime_bits, "segment {seg}");
            let a: Vec<u64> = t.lambda.iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = reference.lambda.iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b, "segment {seg}");
        }
    }

    #[test]
    fn cache_round_trip() {
        let t = build_prime_tables(10_007).unwrap();
        let mut bytes = Vec::new();
        t.write_cache(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"WGL1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 10_007);
        assert_eq!(bytes.len(), 16 + 10_008usize.div_ceil(8) + 8 * 10_008);
        let back = VonMangoldtTable::read_cache(&bytes[..]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn cache_rejects_bad_magic() {
        let mut bytes = Vec::new();
        build_prime_tables(100).unwrap().write_cache(&mut bytes).unwrap();
        bytes[0] = b'X';
        assert!(matches!(VonMangoldtTable::read_cache(&bytes[..]), Err(Error::Data(_))));
    }

    #[test]
    fn integer_roots() {
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
        assert_eq!(iroot(1000, 3), 10);
        assert_eq!(iroot(999, 3), 9);
        assert_eq!(iroot(u64::MAX, 2), 4294967295);
    }
}
