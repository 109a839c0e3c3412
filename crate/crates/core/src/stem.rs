//! English Snowball (Porter2) stemmer.
//!
//! This is the classic Porter2 algorithm, the variant shipped by libstemmer
//! before the 3.0 rewrite. Words are handled as ASCII bytes; any input that
//! is not pure ASCII is returned unchanged.

/// Stems a single lowercase word.
///
/// ```
/// assert_eq!(lexicorp::stem::stem("listening"), "listen");
/// assert_eq!(lexicorp::stem::stem("accumulation"), "accumul");
/// ```
pub fn stem(word: &str) -> String {
    if !word.is_ascii() {
        return word.to_string();
    }
    let lower = word.to_ascii_lowercase();
    if let Some(fixed) = exception1(&lower) {
        return fixed.to_string();
    }
    if lower.len() < 3 {
        return lower;
    }

    let mut w = Word::new(lower.into_bytes());
    w.prelude();
    w.mark_regions();

    w.step_0();
    w.step_1a();
    if !w.is_exception2() {
        w.step_1b();
        w.step_1c();
        w.step_2();
        w.step_3();
        w.step_4();
        w.step_5();
    }
    w.postlude()
}

fn exception1(word: &str) -> Option<&'static str> {
    Some(match word {
        "skis" => "ski",
        "skies" => "sky",
        "dying" => "die",
        "lying" => "lie",
        "tying" => "tie",
        "idly" => "idl",
        "gently" => "gentl",
        "ugly" => "ugli",
        "early" => "earli",
        "only" => "onli",
        "singly" => "singl",
        "sky" => "sky",
        "news" => "news",
        "howe" => "howe",
        "atlas" => "atlas",
        "cosmos" => "cosmos",
        "bias" => "bias",
        "andes" => "andes",
        _ => return None,
    })
}

const EXCEPTION2: [&[u8]; 8] = [
    b"inning", b"outing", b"canning", b"herring", b"earring", b"proceed", b"exceed", b"succeed",
];

const DOUBLES: [&[u8]; 9] = [b"bb", b"dd", b"ff", b"gg", b"mm", b"nn", b"pp", b"rr", b"tt"];

// Lowercase `y` is a vowel; the marker `Y` (a consonantal y) is not.
fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

fn is_valid_li(c: u8) -> bool {
    matches!(c, b'c' | b'd' | b'e' | b'g' | b'h' | b'k' | b'm' | b'n' | b'r' | b't')
}

struct Word {
    b: Vec<u8>,
    p1: usize,
    p2: usize,
}

impl Word {
    fn new(b: Vec<u8>) -> Self {
        let len = b.len();
        Word { b, p1: len, p2: len }
    }

    fn len(&self) -> usize {
        self.b.len()
    }

    fn ends_with(&self, suffix: &[u8]) -> bool {
        self.b.ends_with(suffix)
    }

    /// Longest suffix from `candidates` that the word ends with.
    fn longest_suffix<'a>(&self, candidates: &[&'a [u8]]) -> Option<&'a [u8]> {
        candidates
            .iter()
            .filter(|s| self.ends_with(s))
            .max_by_key(|s| s.len())
            .copied()
    }

    fn replace_suffix(&mut self, suffix_len: usize, with: &[u8]) {
        let at = self.len() - suffix_len;
        self.b.truncate(at);
        self.b.extend_from_slice(with);
    }

    fn has_vowel(&self, range: std::ops::Range<usize>) -> bool {
        self.b[range].iter().any(|&c| is_vowel(c))
    }

    fn prelude(&mut self) {
        if self.b.first() == Some(&b'\'') {
            self.b.remove(0);
        }
        if self.b.first() == Some(&b'y') {
            self.b[0] = b'Y';
        }
        for i in 1..self.b.len() {
            if self.b[i] == b'y' && is_vowel(self.b[i - 1]) {
                self.b[i] = b'Y';
            }
        }
    }

    /// Position just after the first non-vowel that follows a vowel, searching from `start`.
    fn region_after(&self, start: usize) -> usize {
        let n = self.len();
        let mut i = start;
        while i < n && !is_vowel(self.b[i]) {
            i += 1;
        }
        while i < n && is_vowel(self.b[i]) {
            i += 1;
        }
        if i < n {
            i + 1
        } else {
            n
        }
    }

    fn mark_regions(&mut self) {
        let special = [&b"gener"[..], b"commun", b"arsen"]
            .into_iter()
            .find(|p| self.b.starts_with(p));
        self.p1 = match special {
            Some(p) => p.len(),
            None => self.region_after(0),
        };
        self.p2 = self.region_after(self.p1);
    }

    fn suffix_in_r1(&self, suffix_len: usize) -> bool {
        self.len() - suffix_len >= self.p1
    }

    fn suffix_in_r2(&self, suffix_len: usize) -> bool {
        self.len() - suffix_len >= self.p2
    }

    /// Whether the word prefix `b[..end]` ends in a short syllable.
    fn ends_short_syllable(&self, end: usize) -> bool {
        let b = &self.b[..end];
        match b.len() {
            0 | 1 => false,
            2 => is_vowel(b[0]) && !is_vowel(b[1]),
            n => {
                let (c0, c1, c2) = (b[n - 3], b[n - 2], b[n - 1]);
                !is_vowel(c0)
                    && is_vowel(c1)
                    && !is_vowel(c2)
                    && !matches!(c2, b'w' | b'x' | b'Y')
            }
        }
    }

    fn is_short(&self) -> bool {
        self.p1 >= self.len() && self.ends_short_syllable(self.len())
    }

    fn step_0(&mut self) {
        if let Some(s) = self.longest_suffix(&[b"'s'", b"'s", b"'"]) {
            self.replace_suffix(s.len(), b"");
        }
    }

    fn step_1a(&mut self) {
        let Some(s) = self.longest_suffix(&[b"sses", b"ied", b"ies", b"s", b"us", b"ss"]) else {
            return;
        };
        match s {
            b"sses" => self.replace_suffix(4, b"ss"),
            b"ied" | b"ies" => {
                if self.len() > 4 {
                    self.replace_suffix(3, b"i");
                } else {
                    self.replace_suffix(3, b"ie");
                }
            }
            b"s" => {
                // needs a vowel somewhere before the letter preceding the s
                let n = self.len();
                if n >= 3 && self.has_vowel(0..n - 2) {
                    self.replace_suffix(1, b"");
                }
            }
            _ => {}
        }
    }

    fn is_exception2(&self) -> bool {
        EXCEPTION2.contains(&self.b.as_slice())
    }

    fn step_1b(&mut self) {
        let Some(s) =
            self.longest_suffix(&[b"eed", b"eedly", b"ed", b"edly", b"ing", b"ingly"])
        else {
            return;
        };
        match s {
            b"eed" | b"eedly" => {
                if self.suffix_in_r1(s.len()) {
                    self.replace_suffix(s.len(), b"ee");
                }
            }
            _ => {
                let stem_end = self.len() - s.len();
                if !self.has_vowel(0..stem_end) {
                    return;
                }
                self.b.truncate(stem_end);
                if self.ends_with(b"at") || self.ends_with(b"bl") || self.ends_with(b"iz") {
                    self.b.push(b'e');
                } else if DOUBLES.iter().any(|d| self.ends_with(d)) {
                    self.b.pop();
                } else if self.is_short() {
                    self.b.push(b'e');
                }
            }
        }
    }

    fn step_1c(&mut self) {
        let n = self.len();
        if n > 2 && matches!(self.b[n - 1], b'y' | b'Y') && !is_vowel(self.b[n - 2]) {
            self.b[n - 1] = b'i';
        }
    }

    fn step_2(&mut self) {
        const SUFFIXES: [&[u8]; 24] = [
            b"tional", b"enci", b"anci", b"abli", b"entli", b"izer", b"ization", b"ational",
            b"ation", b"ator", b"alism", b"aliti", b"alli", b"fulness", b"ousli", b"ousness",
            b"iveness", b"iviti", b"biliti", b"bli", b"ogi", b"fulli", b"lessli", b"li",
        ];
        let Some(s) = self.longest_suffix(&SUFFIXES) else {
            return;
        };
        if !self.suffix_in_r1(s.len()) {
            return;
        }
        let with: &[u8] = match s {
            b"tional" => b"tion",
            b"enci" => b"ence",
            b"anci" => b"ance",
            b"abli" => b"able",
            b"entli" => b"ent",
            b"izer" | b"ization" => b"ize",
            b"ational" | b"ation" | b"ator" => b"ate",
            b"alism" | b"aliti" | b"alli" => b"al",
            b"fulness" => b"ful",
            b"ousli" | b"ousness" => b"ous",
            b"iveness" | b"iviti" => b"ive",
            b"biliti" | b"bli" => b"ble",
            b"ogi" => {
                let n = self.len();
                if n >= 4 && self.b[n - 4] == b'l' {
                    b"og"
                } else {
                    return;
                }
            }
            b"fulli" => b"ful",
            b"lessli" => b"less",
            b"li" => {
                let n = self.len();
                if n >= 3 && is_valid_li(self.b[n - 3]) {
                    b""
                } else {
                    return;
                }
            }
            _ => unreachable!(),
        };
        self.replace_suffix(s.len(), with);
    }

    fn step_3(&mut self) {
        const SUFFIXES: [&[u8]; 9] = [
            b"tional", b"ational", b"alize", b"icate", b"iciti", b"ical", b"ful", b"ness",
            b"ative",
        ];
        let Some(s) = self.longest_suffix(&SUFFIXES) else {
            return;
        };
        if !self.suffix_in_r1(s.len()) {
            return;
        }
        let with: &[u8] = match s {
            b"tional" => b"tion",
            b"ational" => b"ate",
            b"alize" => b"al",
            b"icate" | b"iciti" | b"ical" => b"ic",
            b"ful" | b"ness" => b"",
            b"ative" => {
                if self.suffix_in_r2(s.len()) {
                    b""
                } else {
                    return;
                }
            }
            _ => unreachable!(),
        };
        self.replace_suffix(s.len(), with);
    }

    fn step_4(&mut self) {
        const SUFFIXES: [&[u8]; 18] = [
            b"al", b"ance", b"ence", b"er", b"ic", b"able", b"ible", b"ant", b"ement", b"ment",
            b"ent", b"ism", b"ate", b"iti", b"ous", b"ive", b"ize", b"ion",
        ];
        let Some(s) = self.longest_suffix(&SUFFIXES) else {
            return;
        };
        if !self.suffix_in_r2(s.len()) {
            return;
        }
        if s == b"ion" {
            let n = self.len();
            if n < 4 || !matches!(self.b[n - 4], b's' | b't') {
                return;
            }
        }
        self.replace_suffix(s.len(), b"");
    }

    fn step_5(&mut self) {
        let n = self.len();
        match self.b.last() {
            Some(b'e') => {
                if self.suffix_in_r2(1)
                    || (self.suffix_in_r1(1) && !self.ends_short_syllable(n - 1))
                {
                    self.b.pop();
                }
            }
            Some(b'l') if self.suffix_in_r2(1) && n >= 2 && self.b[n - 2] == b'l' => {
                self.b.pop();
            }
            _ => {}
        }
    }

    fn postlude(self) -> String {
        let bytes: Vec<u8> = self
            .b
            .into_iter()
            .map(|c| if c == b'Y' { b'y' } else { c })
            .collect();
        // only ASCII bytes ever enter the buffer
        String::from_utf8(bytes).expect("ascii input")
    }
}
