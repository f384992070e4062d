//! Continued fractions and the standard words `s_n` of a rotation number.
//!
//! The rotation number never appears as a decimal here. It is carried by its
//! coefficients `[a_1, a_2, ...]` and every word is built by exact
//! concatenation:
//!
//! ```text
//! s_{-1} = 1,  s_0 = 0,  s_1 = s_0^{a_1 - 1} s_{-1},  s_n = s_{n-1}^{a_n} s_{n-2}
//! ```
//!
//! `|s_n| = q_n`, and for `n >= 2` each `s_{n-1}` is a prefix of `s_n`, so the
//! tower converges to the one-sided characteristic sequence `c_alpha`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::symbolic::{occurrences, Word};

/// Coefficients `a_1..a_N` with their convergents `p_n / q_n`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuedFraction {
    coefficients: Vec<u64>,
    numerators: Vec<BigUint>,
    denominators: Vec<BigUint>,
}

impl ContinuedFraction {
    pub fn depth(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// `a_n` for `1 <= n <= depth`.
    pub fn a(&self, n: usize) -> u64 {
        self.coefficients[n - 1]
    }

    pub fn p(&self, n: usize) -> &BigUint {
        &self.numerators[n]
    }

    pub fn q(&self, n: usize) -> &BigUint {
        &self.denominators[n]
    }

    /// `q_n` as a machine integer; words longer than `usize` cannot be built anyway.
    pub fn q_usize(&self, n: usize) -> Option<usize> {
        self.denominators[n].to_usize()
    }

    pub fn convergent(&self, n: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerators[n].clone()),
            BigInt::from(self.denominators[n].clone()),
        )
    }

    pub fn convergent_f64(&self, n: usize) -> f64 {
        self.convergent(n).to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest level whose denominator exceeds `bound`.
    pub fn level_with_denominator_above(&self, bound: &BigUint) -> Option<usize> {
        (0..=self.depth()).find(|&n| &self.denominators[n] > bound)
    }

    /// Recomputes the convergent table and checks every stored invariant:
    /// the recursions, strict growth of `q_n` for `n >= 1`, coprimality and
    /// `|p_n q_{n+1} - p_{n+1} q_n| = 1`.
    pub fn verify(&self) -> bool {
        let fresh = match convergents(&self.coefficients) {
            Ok(cf) => cf,
            Err(_) => return false,
        };
        if fresh != *self {
            return false;
        }
        let n_max = self.depth();
        let growing = (1..n_max).all(|n| self.denominators[n] < self.denominators[n + 1]);
        let coprime = (0..=n_max).all(|n| self.numerators[n].gcd(&self.denominators[n]).is_one());
        let adjacent = (0..n_max).all(|n| {
            let lhs = &self.numerators[n] * &self.denominators[n + 1];
            let rhs = &self.numerators[n + 1] * &self.denominators[n];
            let diff = if lhs > rhs { lhs - rhs } else { rhs - lhs };
            diff.is_one()
        });
        growing && coprime && adjacent
    }

    /// `|p_n/q_n - p_{n+1}/q_{n+1}| == 1/(q_n q_{n+1})`, exactly.
    pub fn adjacent_gap_is_exact(&self, n: usize) -> bool {
        let diff = (self.convergent(n) - self.convergent(n + 1)).abs();
        let expected = BigRational::new(
            BigInt::one(),
            BigInt::from(&self.denominators[n] * &self.denominators[n + 1]),
        );
        diff == expected
    }
}

/// Builds the convergent table for `[a_1, ..., a_N]`.
pub fn convergents(coefficients: &[u64]) -> Result<ContinuedFraction> {
    if coefficients.is_empty() {
        return Err(Error::InvalidContinuedFraction("no coefficients".into()));
    }
    if let Some(i) = coefficients.iter().position(|&a| a == 0) {
        return Err(Error::InvalidContinuedFraction(format!(
            "coefficient a_{} is zero",
            i + 1
        )));
    }
    let n_max = coefficients.len();
    let mut numerators = Vec::with_capacity(n_max + 1);
    let mut denominators = Vec::with_capacity(n_max + 1);
    numerators.push(BigUint::zero());
    denominators.push(BigUint::one());
    numerators.push(BigUint::one());
    denominators.push(BigUint::from(coefficients[0]));
    for n in 2..=n_max {
        let a = BigUint::from(coefficients[n - 1]);
        numerators.push(&a * &numerators[n - 1] + &numerators[n - 2]);
        denominators.push(&a * &denominators[n - 1] + &denominators[n - 2]);
    }
    Ok(ContinuedFraction {
        coefficients: coefficients.to_vec(),
        numerators,
        denominators,
    })
}

/// Eventually periodic expansion `[pre..., period, period, ...]` unrolled to
/// `depth` coefficients.
pub fn periodic(preperiod: &[u64], period: &[u64], depth: usize) -> Result<ContinuedFraction> {
    if period.is_empty() {
        return Err(Error::InvalidContinuedFraction("empty period".into()));
    }
    let coefficients: Vec<u64> = preperiod
        .iter()
        .copied()
        .chain(period.iter().copied().cycle())
        .take(depth)
        .collect();
    convergents(&coefficients)
}

/// The golden mean `[1, 1, 1, ...]` to `depth` coefficients.
pub fn golden_mean(depth: usize) -> ContinuedFraction {
    periodic(&[], &[1], depth).expect("all-ones expansion is valid")
}

/// Parses coefficient lists such as `1,1,1x40` or `2,1x3,4`: `axk` stands
/// for `k` copies of `a`.
pub fn parse_coefficients(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (value, count) = match item.split_once(['x', 'X']) {
            Some((v, c)) => (v.trim(), c.trim()),
            None => (item, "1"),
        };
        let value: u64 = value.parse().map_err(|_| {
            Error::InvalidContinuedFraction(format!("`{item}` is not a positive integer"))
        })?;
        let count: usize = count.parse().map_err(|_| {
            Error::InvalidContinuedFraction(format!("bad repeat count in `{item}`"))
        })?;
        out.extend(std::iter::repeat_n(value, count));
    }
    if out.is_empty() {
        return Err(Error::InvalidContinuedFraction(format!(
            "`{text}` lists no coefficients"
        )));
    }
    Ok(out)
}

/// The words `s_{-1}, s_0, ..., s_N`.
#[derive(Debug, Clone)]
pub struct StandardWordTower {
    cf: ContinuedFraction,
    words: Vec<Word>,
}

impl StandardWordTower {
    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    /// Highest level `N` in the tower.
    pub fn level(&self) -> usize {
        self.words.len() - 2
    }

    /// `s_n` for `-1 <= n <= N`.
    pub fn s(&self, n: isize) -> &Word {
        &self.words[(n + 1) as usize]
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Checks the length, recursion and prefix invariants of the tower.
    pub fn verify(&self) -> bool {
        let n_max = self.level() as isize;
        let lengths = (0..=n_max).all(|n| BigUint::from(self.s(n).len()) == *self.cf.q(n as usize));
        let prefixes = (2..=n_max).all(|n| self.s(n - 1).is_prefix_of(self.s(n)));
        let recursion = (1..=n_max)
            .all(|n| next_word(&self.cf, n as usize, self.s(n - 1), self.s(n - 2)) == *self.s(n));
        self.s(-1).to_string() == "1"
            && self.s(0).to_string() == "0"
            && lengths
            && prefixes
            && recursion
    }
}

fn next_word(cf: &ContinuedFraction, n: usize, prev: &Word, prev2: &Word) -> Word {
    let exponent = if n == 1 { cf.a(1) - 1 } else { cf.a(n) };
    prev.power(exponent as usize).concat(prev2)
}

fn depth_error(requested: usize, available: usize) -> Error {
    Error::Depth {
        module: "sturmian",
        requested,
        available,
    }
}

/// Builds `s_{-1}, ..., s_level`.
pub fn standard_words(cf: &ContinuedFraction, level: usize) -> Result<StandardWordTower> {
    if level > cf.depth() {
        return Err(depth_error(level, cf.depth()));
    }
    let mut words = vec![Word::binary("1")?, Word::binary("0")?];
    for n in 1..=level {
        let next = next_word(cf, n, &words[n], &words[n - 1]);
        words.push(next);
    }
    Ok(StandardWordTower {
        cf: cf.clone(),
        words,
    })
}

/// First `len` symbols of `c_alpha`.
pub fn c_alpha_prefix(cf: &ContinuedFraction, len: usize) -> Result<Word> {
    let level = (1..=cf.depth())
        .find(|&n| cf.q_usize(n).is_none_or(|q| q >= len))
        .ok_or_else(|| depth_error(cf.depth() + 1, cf.depth()))?;
    // only the last two words are needed
    let mut prev2 = Word::binary("1")?;
    let mut prev = Word::binary("0")?;
    for n in 1..=level {
        let next = next_word(cf, n, &prev, &prev2);
        prev2 = prev;
        prev = next;
    }
    Ok(prev.prefix(len))
}

/// Both sides of `s_n s_{n+1} = s_{n+1} s_{n-1}^{a_n - 1} s_{n-2} s_{n-1}`.
#[derive(Debug, Clone)]
pub struct ConjugationCheck {
    pub n: usize,
    pub holds: bool,
    pub lhs: Word,
    pub rhs: Word,
}

/// Builds both sides of the conjugation identity as explicit words.
pub fn verify_conjugation_identity(
    tower: &StandardWordTower,
    n: usize,
) -> Result<ConjugationCheck> {
    if n < 2 {
        return Err(Error::InvalidContinuedFraction(format!(
            "conjugation identity needs n >= 2, got {n}"
        )));
    }
    if n + 1 > tower.level() {
        return Err(depth_error(n + 1, tower.level()));
    }
    let k = n as isize;
    let lhs = tower.s(k).concat(tower.s(k + 1));
    let rhs = tower
        .s(k + 1)
        .concat(&tower.s(k - 1).power(tower.cf().a(n) as usize - 1))
        .concat(tower.s(k - 2))
        .concat(tower.s(k - 1));
    Ok(ConjugationCheck {
        n,
        holds: lhs == rhs,
        lhs,
        rhs,
    })
}

/// Result of sliding a window over a prefix of `c_alpha` looking for `s_n^3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowReport {
    pub level: usize,
    pub q: usize,
    pub window_length: usize,
    pub prefix_length: usize,
    pub cube_occurrences: usize,
    pub all_windows_contain_cube: bool,
    /// Start of the window with the least room to spare; when the property
    /// fails this is the first window with no cube.
    pub worst_offset: usize,
    /// Spare room at `worst_offset`: how far the cube occurrence could still
    /// move right and fit. Negative iff some window misses the cube.
    pub worst_slack: i64,
}

/// Window length used for the cube search at level `n`: `6 q_n` when
/// `a_{n+1} >= 2`, else `7 q_n`.
pub fn cube_window_length(cf: &ContinuedFraction, n: usize) -> Result<usize> {
    if n + 1 > cf.depth() {
        return Err(depth_error(n + 1, cf.depth()));
    }
    let q = cf.q_usize(n).ok_or_else(|| depth_error(n, cf.depth()))?;
    Ok(if cf.a(n + 1) >= 2 { 6 * q } else { 7 * q })
}

/// Checks that every window of [`cube_window_length`] in the first
/// `prefix_length` symbols of `c_alpha` contains an occurrence of `s_n s_n s_n`.
pub fn window_coverage_check(
    cf: &ContinuedFraction,
    n: usize,
    prefix_length: usize,
) -> Result<WindowReport> {
    let window_length = cube_window_length(cf, n)?;
    let q = window_length / if cf.a(n + 1) >= 2 { 6 } else { 7 };
    if prefix_length < 8 * q {
        return Err(Error::Window {
            module: "sturmian",
            needed: 8 * q,
            available: prefix_length,
        });
    }
    let tower = standard_words(cf, n)?;
    let cube = tower.s(n as isize).power(3);
    let prefix = c_alpha_prefix(cf, prefix_length)?;
    let hits = occurrences(prefix.symbols(), cube.symbols());
    let (worst_offset, worst_slack) = worst_window(&hits, prefix_length, window_length, cube.len());
    Ok(WindowReport {
        level: n,
        q,
        window_length,
        prefix_length,
        cube_occurrences: hits.len(),
        all_windows_contain_cube: worst_slack >= 0,
        worst_offset,
        worst_slack,
    })
}

/// For windows `[k, k + window)` with `k + window <= len`, finds the one where
/// the next pattern start lies furthest past its last admissible position
/// `k + window - pattern`.
pub(crate) fn worst_window(
    hits: &[usize],
    len: usize,
    window: usize,
    pattern: usize,
) -> (usize, i64) {
    let last_start = len - window;
    let mut idx = 0;
    let mut worst = (0usize, i64::MAX);
    for k in 0..=last_start {
        while idx < hits.len() && hits[idx] < k {
            idx += 1;
        }
        let latest = (k + window - pattern) as i64;
        let slack = match hits.get(idx) {
            Some(&h) => latest - h as i64,
            None => latest - len as i64,
        };
        if slack < worst.1 {
            worst = (k, slack);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergent_examples() {
        let cf = convergents(&[1, 1, 1, 1, 1]).unwrap();
        let q: Vec<u64> = (0..=5).map(|n| cf.q(n).to_u64().unwrap()).collect();
        assert_eq!(q, vec![1, 1, 2, 3, 5, 8]);
        assert_eq!((cf.p(5).to_u64(), cf.q(5).to_u64()), (Some(5), Some(8)));
        let cf = convergents(&[2]).unwrap();
        assert_eq!((cf.p(1).to_u64(), cf.q(1).to_u64()), (Some(1), Some(2)));
        let cf = convergents(&[1, 2]).unwrap();
        assert_eq!((cf.p(2).to_u64(), cf.q(2).to_u64()), (Some(2), Some(3)));
        assert!(cf.verify());
        assert!(cf.adjacent_gap_is_exact(1));
    }

    #[test]
    fn convergent_errors() {
        assert!(matches!(
            convergents(&[1, 0, 2]),
            Err(Error::InvalidContinuedFraction(_))
        ));
        assert!(convergents(&[]).is_err());
    }

    #[test]
    fn parse_repeat_syntax() {
        assert_eq!(parse_coefficients("1,1,1x3").unwrap(), vec![1; 5]);
        assert_eq!(parse_coefficients("2, 3x2 ,1").unwrap(), vec![2, 3, 3, 1]);
        assert!(parse_coefficients("1,a").is_err());
        assert!(parse_coefficients("").is_err());
        assert!(parse_coefficients("1x0").is_err());
    }

    #[test]
    fn periodic_unrolls() {
        let cf = periodic(&[2], &[1, 3], 6).unwrap();
        assert_eq!(cf.coefficients(), &[2, 1, 3, 1, 3, 1]);
    }

    #[test]
    fn golden_tower_words() {
        let tower = standard_words(&golden_mean(5), 5).unwrap();
        assert_eq!(tower.s(3).to_string(), "101");
        assert_eq!(tower.s(4).to_string(), "10110");
        assert_eq!(tower.s(5).to_string(), "10110101");
        assert!(tower.verify());
    }

    #[test]
    fn first_level_edge_cases() {
        let tower = standard_words(&convergents(&[1, 3]).unwrap(), 1).unwrap();
        assert_eq!(tower.s(1).to_string(), "1");
        let tower = standard_words(&convergents(&[2, 5]).unwrap(), 1).unwrap();
        assert_eq!(tower.s(1).to_string(), "01");
        assert!(matches!(
            standard_words(&golden_mean(3), 4),
            Err(Error::Depth { .. })
        ));
    }

    #[test]
    fn c_alpha_examples() {
        let cf = golden_mean(10);
        assert_eq!(c_alpha_prefix(&cf, 8).unwrap().to_string(), "10110101");
        assert_eq!(c_alpha_prefix(&cf, 1).unwrap().to_string(), "1");
        assert!(c_alpha_prefix(&cf, 20)
            .unwrap()
            .is_prefix_of(&c_alpha_prefix(&cf, 40).unwrap()));
        assert!(matches!(
            c_alpha_prefix(&cf, 1000),
            Err(Error::Depth { .. })
        ));
    }

    #[test]
    fn conjugation_small_case() {
        let tower = standard_words(&golden_mean(6), 6).unwrap();
        let check = verify_conjugation_identity(&tower, 2).unwrap();
        assert_eq!(check.lhs.to_string(), "10101");
        assert_eq!(check.rhs.to_string(), "10101");
        assert!(check.holds);
        assert!(verify_conjugation_identity(&tower, 1).is_err());
        assert!(matches!(
            verify_conjugation_identity(&tower, 6),
            Err(Error::Depth { .. })
        ));
    }

    #[test]
    fn worst_window_by_hand() {
        // pattern length 2 at 0 and 5 in a length-10 text, windows of 5
        let (offset, slack) = worst_window(&[0, 5], 10, 5, 2);
        // window starting at 1 can hold a start at most at 4; next start is 5
        assert_eq!((offset, slack), (1, -1));
        let (_, slack) = worst_window(&[0, 2, 4, 6, 8], 10, 5, 2);
        assert!(slack >= 0);
    }

    #[test]
    fn window_length_choice() {
        let cf = convergents(&[1, 2, 1, 2, 1, 2, 1, 2]).unwrap();
        // a_4 = 2
        assert_eq!(
            cube_window_length(&cf, 3).unwrap(),
            6 * cf.q_usize(3).unwrap()
        );
        assert_eq!(
            cube_window_length(&cf, 4).unwrap(),
            7 * cf.q_usize(4).unwrap()
        );
    }

    #[test]
    fn window_check_rejects_short_prefix() {
        let cf = golden_mean(30);
        assert!(matches!(
            window_coverage_check(&cf, 5, 50),
            Err(Error::Window { .. })
        ));
    }
}
