//! Words over small alphabets and the substitutions acting on them.
//!
//! Symbols are stored as `u8` alphabet indices. Rendering to text is kept
//! separate: [`Word`]'s `Display` writes digits, [`Word::render_letters`]
//! writes `a, b, c, ...`, which is how substitution tables are usually given.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// A finite sequence of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    symbols: Vec<u8>,
    alphabet_size: u8,
}

impl Word {
    pub fn new(symbols: Vec<u8>, alphabet_size: u8) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidSubstitution(
                "alphabet must be non-empty".into(),
            ));
        }
        if let Some((position, &symbol)) = symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s >= alphabet_size)
        {
            return Err(Error::InvalidWord {
                symbol,
                position,
                alphabet_size,
            });
        }
        Ok(Word {
            symbols,
            alphabet_size,
        })
    }

    pub fn empty(alphabet_size: u8) -> Self {
        Word {
            symbols: Vec::new(),
            alphabet_size,
        }
    }

    /// Binary word from a string of `0`/`1` characters.
    pub fn binary(text: &str) -> Result<Self> {
        Self::parse_digits(text, 2)
    }

    pub fn parse_digits(text: &str, alphabet_size: u8) -> Result<Self> {
        let symbols = text
            .chars()
            .enumerate()
            .map(|(position, c)| {
                c.to_digit(10).map(|d| d as u8).ok_or_else(|| {
                    Error::InvalidTarget(format!("`{c}` at position {position} is not a digit"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(symbols, alphabet_size)
    }

    /// Parses letters `a`, `b`, ... as symbols 0, 1, ...
    pub fn parse_letters(text: &str, alphabet_size: u8) -> Result<Self> {
        let symbols = text
            .chars()
            .enumerate()
            .map(|(position, c)| {
                if c.is_ascii_lowercase() {
                    Ok(c as u8 - b'a')
                } else {
                    Err(Error::InvalidTarget(format!(
                        "`{c}` at position {position} is not a lowercase letter"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(symbols, alphabet_size)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.symbols
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = Vec::with_capacity(self.len() + other.len());
        symbols.extend_from_slice(&self.symbols);
        symbols.extend_from_slice(&other.symbols);
        Word {
            symbols,
            alphabet_size: self.alphabet_size.max(other.alphabet_size),
        }
    }

    /// `self` repeated `times` times; `times == 0` gives the empty word.
    pub fn power(&self, times: usize) -> Word {
        Word {
            symbols: self.symbols.repeat(times),
            alphabet_size: self.alphabet_size,
        }
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word {
            symbols: self.symbols[..len.min(self.len())].to_vec(),
            alphabet_size: self.alphabet_size,
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> Word {
        Word {
            symbols: self.symbols[start..start + len].to_vec(),
            alphabet_size: self.alphabet_size,
        }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.symbols.starts_with(&self.symbols)
    }

    pub fn render_letters(&self) -> String {
        self.symbols.iter().map(|&s| (b'a' + s) as char).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            if s < 10 {
                write!(f, "{s}")?;
            } else {
                write!(f, "[{s}]")?;
            }
        }
        Ok(())
    }
}

/// A substitution, one non-empty image word per alphabet symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        let size = images.len();
        if size == 0 || size > u8::MAX as usize {
            return Err(Error::InvalidSubstitution(format!(
                "alphabet size {size} is out of range"
            )));
        }
        for (symbol, image) in images.iter().enumerate() {
            if image.is_empty() {
                return Err(Error::InvalidSubstitution(format!(
                    "image of symbol {symbol} is empty"
                )));
            }
            if let Some(&bad) = image.symbols.iter().find(|&&s| s as usize >= size) {
                return Err(Error::InvalidSubstitution(format!(
                    "image of symbol {symbol} uses symbol {bad} outside an alphabet of size {size}"
                )));
            }
        }
        let images = images
            .into_iter()
            .map(|w| Word {
                symbols: w.symbols,
                alphabet_size: size as u8,
            })
            .collect();
        Ok(Substitution { images })
    }

    /// Parses the `a:ab,b:a` notation. Letters on the left must be
    /// `a, b, c, ...` in order.
    pub fn parse(spec: &str) -> Result<Self> {
        let rules: Vec<&str> = spec
            .split(',')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .collect();
        let size = rules.len();
        if size == 0 || size > 26 {
            return Err(Error::InvalidSubstitution(format!(
                "`{spec}` has {size} rules"
            )));
        }
        let mut images = Vec::with_capacity(size);
        for (i, rule) in rules.iter().enumerate() {
            let (lhs, rhs) = rule
                .split_once(':')
                .ok_or_else(|| Error::InvalidSubstitution(format!("rule `{rule}` has no `:`")))?;
            let expected = (b'a' + i as u8) as char;
            if lhs.trim() != expected.to_string() {
                return Err(Error::InvalidSubstitution(format!(
                    "rule {i} defines `{}`, expected `{expected}`",
                    lhs.trim()
                )));
            }
            images.push(
                Word::parse_letters(rhs.trim(), size as u8)
                    .map_err(|e| Error::InvalidSubstitution(format!("rule `{rule}`: {e}")))?,
            );
        }
        Substitution::new(images)
    }

    /// The classical examples: `fibonacci`, `period-doubling`,
    /// `binary-non-pisot`, `thue-morse`, `rudin-shapiro`.
    pub fn named(name: &str) -> Option<Self> {
        let table = match name {
            "fibonacci" => "a:ab,b:a",
            "period-doubling" => "a:ab,b:aa",
            "binary-non-pisot" => "a:ab,b:aaa",
            "thue-morse" => "a:ab,b:ba",
            "rudin-shapiro" => "a:ab,b:ac,c:db,d:dc",
            _ => return None,
        };
        Some(Self::parse(table).expect("built-in table parses"))
    }

    pub const NAMES: [&'static str; 5] = [
        "fibonacci",
        "period-doubling",
        "binary-non-pisot",
        "thue-morse",
        "rudin-shapiro",
    ];

    pub fn alphabet_size(&self) -> u8 {
        self.images.len() as u8
    }

    pub fn image(&self, symbol: u8) -> &Word {
        &self.images[symbol as usize]
    }

    /// Smallest `k` such that every `S^k(a)` contains every symbol, if the
    /// substitution is primitive. Searches up to the Wielandt bound
    /// `(d-1)^2 + 1` for a `d`-letter alphabet.
    pub fn primitivity_power(&self) -> Option<usize> {
        let d = self.images.len();
        let base: Vec<Vec<bool>> = self
            .images
            .iter()
            .map(|img| {
                let mut row = vec![false; d];
                for &s in img.symbols() {
                    row[s as usize] = true;
                }
                row
            })
            .collect();
        let mut power = base.clone();
        let bound = (d - 1) * (d - 1) + 1;
        for k in 1..=bound {
            if power.iter().all(|row| row.iter().all(|&x| x)) {
                return Some(k);
            }
            power = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..d).any(|m| power[i][m] && base[m][j]))
                        .collect()
                })
                .collect();
        }
        None
    }

    pub fn render(&self) -> String {
        self.images
            .iter()
            .enumerate()
            .map(|(i, img)| format!("{}:{}", (b'a' + i as u8) as char, img.render_letters()))
            .collect::<Vec<_>>()
            .join(",")
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        let size = self.alphabet_size();
        match w.symbols.iter().enumerate().find(|(_, &s)| s >= size) {
            Some((position, &symbol)) => Err(Error::InvalidWord {
                symbol,
                position,
                alphabet_size: size,
            }),
            None => Ok(()),
        }
    }

    fn apply_once(&self, w: &[u8]) -> Vec<u8> {
        let len = w.iter().map(|&s| self.images[s as usize].len()).sum();
        let mut out = Vec::with_capacity(len);
        for &s in w {
            out.extend_from_slice(&self.images[s as usize].symbols);
        }
        out
    }
}

/// `S^power(w)`, applying the substitution letter by letter.
pub fn substitute(s: &Substitution, w: &Word, power: usize) -> Result<Word> {
    if power == 0 {
        return Err(Error::InvalidSubstitution(
            "power must be at least 1".into(),
        ));
    }
    s.check_word(w)?;
    let mut symbols = w.symbols.clone();
    for _ in 0..power {
        symbols = s.apply_once(&symbols);
    }
    Ok(Word {
        symbols,
        alphabet_size: s.alphabet_size(),
    })
}

/// Rounds of substitution allowed before giving up on reaching the
/// requested length.
pub const MAX_FIXED_POINT_ROUNDS: usize = 64;

/// Prefix of length `min_length` of the one-sided fixed point `lim S^n(seed)`.
pub fn fixed_point_prefix(s: &Substitution, seed: u8, min_length: usize) -> Result<Word> {
    if seed >= s.alphabet_size() {
        return Err(Error::InvalidWord {
            symbol: seed,
            position: 0,
            alphabet_size: s.alphabet_size(),
        });
    }
    if s.image(seed).symbols[0] != seed {
        return Err(Error::NotAFixedPoint { seed });
    }
    let mut current = vec![seed];
    let mut rounds = 0;
    while current.len() < min_length.max(1) {
        if rounds == MAX_FIXED_POINT_ROUNDS {
            return Err(Error::DivergenceFailure {
                seed,
                length: current.len(),
            });
        }
        let next = s.apply_once(&current);
        if next.len() == current.len() {
            return Err(Error::DivergenceFailure {
                seed,
                length: current.len(),
            });
        }
        current = next;
        rounds += 1;
    }
    current.truncate(min_length.max(1));
    Ok(Word {
        symbols: current,
        alphabet_size: s.alphabet_size(),
    })
}

fn window_error(needed: usize, available: usize) -> Error {
    Error::Window {
        module: "symbolic",
        needed,
        available,
    }
}

/// All distinct factors (contiguous subwords) of length `len`.
pub fn factor_set(w: &Word, len: usize) -> Result<BTreeSet<Word>> {
    if len == 0 || len > w.len() {
        return Err(window_error(len, w.len()));
    }
    let distinct: BTreeSet<&[u8]> = w.symbols.windows(len).collect();
    Ok(distinct
        .into_iter()
        .map(|f| Word {
            symbols: f.to_vec(),
            alphabet_size: w.alphabet_size,
        })
        .collect())
}

/// Start positions of every (possibly overlapping) occurrence of `needle`
/// in `haystack`, by Knuth-Morris-Pratt.
pub fn occurrences(haystack: &[u8], needle: &[u8]) -> Vec<usize> {
    let m = needle.len();
    if m == 0 || m > haystack.len() {
        return Vec::new();
    }
    let mut failure = vec![0usize; m];
    let mut k = 0;
    for i in 1..m {
        while k > 0 && needle[i] != needle[k] {
            k = failure[k - 1];
        }
        if needle[i] == needle[k] {
            k += 1;
        }
        failure[i] = k;
    }
    let mut found = Vec::new();
    let mut k = 0;
    for (i, &c) in haystack.iter().enumerate() {
        while k > 0 && c != needle[k] {
            k = failure[k - 1];
        }
        if c == needle[k] {
            k += 1;
        }
        if k == m {
            found.push(i + 1 - m);
            k = failure[k - 1];
        }
    }
    found
}

/// Empirical frequency of a word inside a finite prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyEstimate {
    pub target: Word,
    pub prefix_length: usize,
    pub occurrence_count: usize,
    /// `occurrence_count / (prefix_length - |target| + 1)`, unrounded.
    pub density: Ratio<u64>,
}

impl FrequencyEstimate {
    pub fn density_f64(&self) -> f64 {
        *self.density.numer() as f64 / *self.density.denom() as f64
    }
}

/// Counts overlapping occurrences of `target` in `w`.
pub fn frequency(w: &Word, target: &Word) -> Result<FrequencyEstimate> {
    if target.is_empty() {
        return Err(Error::InvalidTarget("target word is empty".into()));
    }
    if target.len() > w.len() {
        return Err(window_error(target.len(), w.len()));
    }
    let count = occurrences(&w.symbols, &target.symbols).len();
    let positions = w.len() - target.len() + 1;
    Ok(FrequencyEstimate {
        target: target.clone(),
        prefix_length: w.len(),
        occurrence_count: count,
        density: Ratio::new(count as u64, positions as u64),
    })
}

/// Whether `w` begins with a square of period `n`: `w(k) = w(k+n)` for
/// `1 <= k <= n`.
pub fn detect_square_prefix(w: &Word, n: usize) -> Result<bool> {
    square_prefix(&w.symbols, n)
}

pub(crate) fn square_prefix(symbols: &[u8], n: usize) -> Result<bool> {
    if n == 0 || symbols.len() < 2 * n {
        return Err(window_error(2 * n, symbols.len()));
    }
    Ok(symbols[..n] == symbols[n..2 * n])
}

/// Start positions of palindromic factors of length `len`.
pub fn detect_palindromes(w: &Word, len: usize) -> Result<Vec<usize>> {
    if len == 0 || len > w.len() {
        return Err(window_error(len, w.len()));
    }
    Ok(w.symbols
        .windows(len)
        .enumerate()
        .filter(|(_, f)| (0..len / 2).all(|i| f[i] == f[len - 1 - i]))
        .map(|(i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> Substitution {
        Substitution::named("fibonacci").unwrap()
    }

    fn letters(s: &str, size: u8) -> Word {
        Word::parse_letters(s, size).unwrap()
    }

    #[test]
    fn substitute_examples() {
        let a = letters("a", 2);
        assert_eq!(substitute(&fib(), &a, 2).unwrap().render_letters(), "aba");
        let tm = Substitution::named("thue-morse").unwrap();
        assert_eq!(substitute(&tm, &a, 2).unwrap().render_letters(), "abba");
        for name in Substitution::NAMES {
            let s = Substitution::named(name).unwrap();
            let img = substitute(&s, &Word::new(vec![0], s.alphabet_size()).unwrap(), 1).unwrap();
            assert_eq!(img.symbols()[0], 0, "{name}");
        }
    }

    #[test]
    fn substitute_rejects_foreign_symbols() {
        let w = Word::new(vec![0, 2], 3).unwrap();
        assert!(matches!(
            substitute(&fib(), &w, 1),
            Err(Error::InvalidWord {
                symbol: 2,
                position: 1,
                ..
            })
        ));
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(
            fixed_point_prefix(&fib(), 0, 5).unwrap().render_letters(),
            "abaab"
        );
        let pd = Substitution::named("period-doubling").unwrap();
        assert_eq!(
            fixed_point_prefix(&pd, 0, 4).unwrap().render_letters(),
            "abaa"
        );
    }

    #[test]
    fn fixed_point_errors() {
        // b -> a does not start with b
        assert_eq!(
            fixed_point_prefix(&fib(), 1, 4),
            Err(Error::NotAFixedPoint { seed: 1 })
        );
        let stuck = Substitution::parse("a:a,b:ab").unwrap();
        assert!(matches!(
            fixed_point_prefix(&stuck, 0, 4),
            Err(Error::DivergenceFailure { seed: 0, length: 1 })
        ));
        // linear growth never reaches the target within the round budget
        let slow = Substitution::parse("a:ab,b:b").unwrap();
        assert!(matches!(
            fixed_point_prefix(&slow, 0, 1000),
            Err(Error::DivergenceFailure { .. })
        ));
        assert_eq!(
            fixed_point_prefix(&slow, 0, 10).unwrap().render_letters(),
            "abbbbbbbbb"
        );
    }

    #[test]
    fn fixed_point_is_prefix_of_its_image() {
        for name in [
            "fibonacci",
            "period-doubling",
            "binary-non-pisot",
            "thue-morse",
            "rudin-shapiro",
        ] {
            let s = Substitution::named(name).unwrap();
            let p = fixed_point_prefix(&s, 0, 300).unwrap();
            assert!(p.is_prefix_of(&substitute(&s, &p, 1).unwrap()), "{name}");
        }
    }

    #[test]
    fn parse_and_primitivity() {
        let s = Substitution::parse("a:ab, b:a").unwrap();
        assert_eq!(s, fib());
        assert_eq!(s.render(), "a:ab,b:a");
        assert!(Substitution::parse("b:ab,a:a").is_err());
        assert!(Substitution::parse("a:ac,b:a").is_err());
        assert!(Substitution::parse("a:,b:a").is_err());
        for name in Substitution::NAMES {
            assert!(
                Substitution::named(name)
                    .unwrap()
                    .primitivity_power()
                    .is_some(),
                "{name}"
            );
        }
        assert_eq!(fib().primitivity_power(), Some(2));
        assert_eq!(
            Substitution::parse("a:ab,b:b").unwrap().primitivity_power(),
            None
        );
    }

    #[test]
    fn factor_set_examples() {
        let w = Word::binary("10110").unwrap();
        let f: Vec<String> = factor_set(&w, 2)
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(f, vec!["01", "10", "11"]);
        assert_eq!(
            factor_set(&w, 5).unwrap().into_iter().collect::<Vec<_>>(),
            vec![w.clone()]
        );
        assert!(matches!(factor_set(&w, 6), Err(Error::Window { .. })));
    }

    #[test]
    fn frequency_examples() {
        let f = frequency(&letters("aaaa", 1), &letters("aa", 1)).unwrap();
        assert_eq!((f.occurrence_count, f.density), (3, Ratio::new(1, 1)));
        let f = frequency(
            &Word::binary("10110").unwrap(),
            &Word::binary("11").unwrap(),
        )
        .unwrap();
        assert_eq!((f.occurrence_count, f.density), (1, Ratio::new(1, 4)));
        assert!(matches!(
            frequency(&Word::binary("10").unwrap(), &Word::empty(2)),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn square_prefix_examples() {
        assert!(detect_square_prefix(&Word::binary("0101").unwrap(), 2).unwrap());
        assert!(!detect_square_prefix(&Word::binary("0110").unwrap(), 2).unwrap());
        assert!(detect_square_prefix(&Word::binary("1011010110").unwrap(), 5).unwrap());
        assert!(detect_square_prefix(&Word::binary("011").unwrap(), 2).is_err());
    }

    #[test]
    fn palindrome_examples() {
        assert_eq!(detect_palindromes(&letters("aba", 2), 3).unwrap(), vec![0]);
        assert!(detect_palindromes(&letters("ab", 2), 2).unwrap().is_empty());
        let w = fixed_point_prefix(&fib(), 0, 100).unwrap();
        let s = w.symbols();
        let brute: Vec<usize> = (0..=s.len() - 3)
            .filter(|&i| {
                let f: Vec<u8> = s[i..i + 3].to_vec();
                let mut r = f.clone();
                r.reverse();
                f == r
            })
            .collect();
        assert_eq!(detect_palindromes(&w, 3).unwrap(), brute);
    }

    #[test]
    fn kmp_matches_naive_search() {
        let hay = Word::binary("1011010110110101101011011010110").unwrap();
        let needle = Word::binary("10110").unwrap();
        let naive: Vec<usize> = (0..=hay.len() - needle.len())
            .filter(|&i| hay.symbols()[i..i + needle.len()] == *needle.symbols())
            .collect();
        assert_eq!(occurrences(hay.symbols(), needle.symbols()), naive);
    }
}
