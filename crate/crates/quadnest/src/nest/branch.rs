//! Return branches I^j_n and landing domains C^d_n ⊂ I^d_n, discovered lazily.

use std::collections::HashMap;

use rug::Float;

use super::{central_pullback, NestError, PrincipalNest, MARGIN_BITS};
use crate::quad::{sign_of, ErrorTracker, QuadraticMap, Sign};
use crate::real::log2_abs;

#[derive(Clone, Debug, PartialEq)]
pub struct ReturnBranch {
    pub level: usize,
    /// 0 for the central branch, positive on the right of 0, negative on the left.
    pub index: i64,
    /// Signs of x, f(x), …, f^{r−1}(x) on the branch (central: 0 first).
    pub word: Vec<Sign>,
    pub return_time: usize,
    pub lo: Float,
    pub hi: Float,
    /// Sign of Df^r on the branch; 0 for the folding central branch.
    pub orientation: Sign,
}

impl ReturnBranch {
    pub fn is_central(&self) -> bool {
        self.index == 0
    }

    pub fn length(&self) -> Float {
        Float::with_val(self.lo.prec().max(self.hi.prec()), &self.hi - &self.lo)
    }

    pub fn contains(&self, x: &Float) -> bool {
        *x > self.lo && *x < self.hi
    }

    fn mirrored(&self) -> ReturnBranch {
        let mut word = self.word.clone();
        word[0] = -word[0];
        ReturnBranch {
            level: self.level,
            index: -self.index,
            word,
            return_time: self.return_time,
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
            orientation: -self.orientation,
        }
    }
}

/// Right-side branches of one level, keyed by their word.
#[derive(Clone, Debug, Default)]
pub struct BranchTable {
    entries: Vec<ReturnBranch>,
    by_word: HashMap<Vec<Sign>, usize>,
}

impl BranchTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReturnBranch> {
        self.entries.iter()
    }

    fn find(&self, x: &Float) -> Option<&ReturnBranch> {
        self.entries.iter().find(|b| b.contains(x))
    }

    fn by_index(&self, j: i64) -> Option<ReturnBranch> {
        let b = self.entries.get(j.unsigned_abs() as usize - 1)?;
        Some(if j > 0 { b.clone() } else { b.mirrored() })
    }

    /// Insert a right-side branch, returning its index.
    fn insert(&mut self, mut b: ReturnBranch) -> i64 {
        if let Some(&i) = self.by_word.get(&b.word) {
            return i as i64 + 1;
        }
        let i = self.entries.len();
        b.index = i as i64 + 1;
        self.by_word.insert(b.word.clone(), i);
        self.entries.push(b);
        i as i64 + 1
    }
}

/// d = (j_1, …, j_m) with its domains.  The empty address is the identity
/// on the central domain.
#[derive(Clone, Debug, PartialEq)]
pub struct LandingAddress {
    pub level: usize,
    pub indices: Vec<i64>,
    pub times: Vec<usize>,
    pub landing_time: usize,
    /// C^d_n = (R^d_n)^{-1}(I_{n+1}).
    pub domain: (Float, Float),
    /// I^d_n = (R^d_n)^{-1}(I_n).
    pub enclosing: (Float, Float),
}

impl LandingAddress {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn domain_ratio(&self) -> f64 {
        let p = self.domain.0.prec().max(self.enclosing.0.prec());
        let c = Float::with_val(p, &self.domain.1 - &self.domain.0);
        let i = Float::with_val(p, &self.enclosing.1 - &self.enclosing.0);
        (c / i).to_f64()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapeReport {
    pub level: usize,
    pub half_width: Float,
    /// |Ĩ_{n+1}| / |I_n|
    pub ratio: f64,
    /// s_{n−1}
    pub s_prev: Option<usize>,
    pub nested: bool,
    /// (index, inside) for every discovered right-side branch of level n;
    /// `None` marks a branch straddling the boundary.
    pub branches: Vec<(i64, Option<bool>)>,
}

enum Walk {
    Landed { times: Vec<usize>, word: Vec<Sign> },
    Returned { word: Vec<Sign> },
}

/// `None` asks the caller for more precision.
type Attempt<T> = Result<Option<T>, NestError>;

fn ordered(a: Float, b: Float) -> (Float, Float) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl PrincipalNest {
    fn escalate<T>(&self, mut attempt: impl FnMut(u32) -> Attempt<T>, on_fail: NestError) -> Result<T, NestError> {
        let mut prec = self.precision;
        loop {
            if let Some(t) = attempt(prec)? {
                return Ok(t);
            }
            if prec * 2 > self.budgets.precision_max.max(self.precision) {
                return Err(on_fail);
            }
            prec *= 2;
        }
    }

    /// Half-width of I_{n+1}, pulled back on demand past the deepest level.
    fn central_width(&self, n: usize, prec: u32) -> Result<Float, NestError> {
        let w = self.half_widths_at(prec)?;
        if n + 1 < w.len() {
            return Ok(w[n + 1].clone());
        }
        let v = self.levels[n].v.ok_or(NestError::NeverReturnsWithinBudget(self.budgets.orbit_steps))?;
        let map = QuadraticMap::new(&self.a, prec)?;
        Ok(central_pullback(&map, self.critical_word(v), &w[n]).ok_or(NestError::InadmissibleWord)?.0)
    }

    /// Reject points within the base threshold of ±u_n or ±u_{n+1}.
    fn place(&self, n: usize, x: &Float) -> Result<bool, NestError> {
        let lvl = self.level(n)?;
        let map = self.map();
        let log2_thr = map.log2_threshold();
        let xa = Float::with_val(self.precision.max(x.prec()), x.abs_ref());
        let d = Float::with_val(xa.prec(), &xa - &lvl.half_width);
        if log2_abs(&d) < log2_thr {
            return Err(NestError::LandsOnBoundary(0));
        }
        if !d.is_sign_negative() {
            return Err(NestError::OutsideLevel(n));
        }
        let c = self.central_width(n, self.precision)?;
        let d = Float::with_val(xa.prec(), &xa - &c);
        if log2_abs(&d) < log2_thr {
            return Err(NestError::LandsOnBoundary(0));
        }
        Ok(d.is_sign_negative())
    }

    /// Iterate x until it returns to I_n (`to_landing` false) or until it
    /// enters I_{n+1} (`to_landing` true).
    fn walk(&self, n: usize, x: &Float, prec: u32, to_landing: bool) -> Attempt<Walk> {
        let widths = self.half_widths_at(prec)?;
        let u = &widths[n];
        let c = self.central_width(n, prec)?;
        let map = QuadraticMap::new(&self.a, prec)?;
        let mut y = Float::with_val(prec.max(x.prec()), x);
        y.set_prec(prec.max(x.prec()));
        let mut tracker = ErrorTracker::new(prec);
        let mut word = vec![sign_of(&y)];
        let mut times = Vec::new();
        for k in 1..=self.budgets.query_steps {
            tracker.step(log2_abs(&y));
            map.step(&mut y);
            let ya = Float::with_val(prec, y.abs_ref());
            let d = Float::with_val(prec, &ya - u);
            if !tracker.resolves(log2_abs(&d), MARGIN_BITS) {
                return Ok(None);
            }
            if d.is_sign_negative() {
                if !to_landing {
                    return Ok(Some(Walk::Returned { word }));
                }
                times.push(k);
                let dc = Float::with_val(prec, &ya - &c);
                if !tracker.resolves(log2_abs(&dc), MARGIN_BITS) {
                    return Ok(None);
                }
                if dc.is_sign_negative() {
                    return Ok(Some(Walk::Landed { times, word }));
                }
            }
            word.push(sign_of(&y));
        }
        Err(NestError::NeverReturnsWithinBudget(self.budgets.query_steps))
    }

    /// The non-central branch with the given word, endpoints by pullback of ±u_n.
    fn branch_from_word(&self, n: usize, word: &[Sign], prec: u32) -> Attempt<ReturnBranch> {
        let widths = self.half_widths_at(prec)?;
        let u = &widths[n];
        let map = QuadraticMap::new(&self.a, prec)?;
        let log2_thr = map.log2_threshold();
        let mut ends = Vec::with_capacity(2);
        for target in [Float::with_val(prec, u), Float::with_val(prec, -u)] {
            let mut ok = true;
            let e = map.pullback_visit(word, &target, |k, y| {
                if k >= 1 {
                    // chain points may sit on ∂I_n (−p ↦ p at level 0)
                    let d = Float::with_val(prec, y.abs_ref()) - u;
                    if d.is_sign_negative() && log2_abs(&d) >= log2_thr {
                        ok = false;
                    }
                }
            });
            match e {
                Some(e) if ok => ends.push(e),
                Some(_) => return Ok(None),
                None => return Err(NestError::InadmissibleWord),
            }
        }
        let hi = ends.pop().expect("two ends");
        let lo = ends.pop().expect("two ends");
        let (lo, hi) = ordered(lo, hi);
        if log2_abs(&Float::with_val(prec, &hi - &lo)) < log2_thr + MARGIN_BITS {
            return Ok(None);
        }
        let positives = word.iter().filter(|&&s| s > 0).count();
        Ok(Some(ReturnBranch {
            level: n,
            index: 0,
            word: word.to_vec(),
            return_time: word.len(),
            lo,
            hi,
            orientation: if positives % 2 == 0 { 1 } else { -1 },
        }))
    }

    fn central_branch(&self, n: usize) -> Result<ReturnBranch, NestError> {
        let v = self.levels[n].v.ok_or(NestError::NeverReturnsWithinBudget(self.budgets.orbit_steps))?;
        let c = self.central_width(n, self.precision)?;
        let mut word = vec![0];
        word.extend_from_slice(self.critical_word(v));
        Ok(ReturnBranch {
            level: n,
            index: 0,
            word,
            return_time: v,
            lo: Float::with_val(self.precision, -&c),
            hi: c,
            orientation: 0,
        })
    }

    /// Register a branch word (any side) and return the signed index.
    fn register(&self, n: usize, word: &[Sign]) -> Result<ReturnBranch, NestError> {
        let side = word[0];
        let mut canon = word.to_vec();
        canon[0] = 1;
        if let Some(&i) = self.table(n).read().expect("branch table").by_word.get(&canon) {
            let j = (i as i64 + 1) * side as i64;
            return Ok(self.table(n).read().expect("branch table").by_index(j).expect("present"));
        }
        let b = self.escalate(|p| self.branch_from_word(n, &canon, p), NestError::LandsOnBoundary(canon.len()))?;
        let j = self.table(n).write().expect("branch table").insert(b) * side as i64;
        Ok(self.table(n).read().expect("branch table").by_index(j).expect("present"))
    }

    /// Branch of the first return map R_n containing x.
    pub fn return_branch_at(&self, n: usize, x: &Float) -> Result<ReturnBranch, NestError> {
        if self.place(n, x)? {
            return self.central_branch(n);
        }
        {
            let t = self.table(n).read().expect("branch table");
            let xa = Float::with_val(x.prec(), x.abs_ref());
            if let Some(b) = t.find(&xa) {
                return Ok(if x.is_sign_negative() { b.mirrored() } else { b.clone() });
            }
        }
        let word = match self.escalate(|p| self.walk(n, x, p, false), NestError::LandsOnBoundary(0))? {
            Walk::Returned { word, .. } => word,
            Walk::Landed { .. } => unreachable!("return walk"),
        };
        self.register(n, &word)
    }

    /// Branch of level n by signed index, if discovered.
    pub fn branch_by_index(&self, n: usize, j: i64) -> Result<ReturnBranch, NestError> {
        if j == 0 {
            return self.central_branch(n);
        }
        self.table(n)
            .read()
            .expect("branch table")
            .by_index(j)
            .ok_or(NestError::LevelMissing(n))
    }

    /// The branch of level n with the given return word (central when the
    /// word starts at 0).
    pub fn branch_with_word(&self, n: usize, word: &[Sign]) -> Result<ReturnBranch, NestError> {
        match word.first() {
            None => Err(NestError::InadmissibleWord),
            Some(0) => self.central_branch(n),
            Some(_) => self.register(n, word),
        }
    }

    /// Right-side branches discovered so far at level n.
    pub fn discovered_branches(&self, n: usize) -> Vec<ReturnBranch> {
        self.table(n).read().expect("branch table").iter().cloned().collect()
    }

    /// Address d^{(n)}(x) of the first landing of x in I_{n+1}.
    pub fn landing_address(&self, n: usize, x: &Float) -> Result<LandingAddress, NestError> {
        if self.place(n, x)? {
            let c = self.central_width(n, self.precision)?;
            let u = &self.levels[n].half_width;
            return Ok(LandingAddress {
                level: n,
                indices: Vec::new(),
                times: Vec::new(),
                landing_time: 0,
                domain: (Float::with_val(self.precision, -&c), c),
                enclosing: (Float::with_val(self.precision, -u), u.clone()),
            });
        }
        let (times, word) = match self.escalate(|p| self.walk(n, x, p, true), NestError::LandsOnBoundary(0))? {
            Walk::Landed { times, word } => (times, word),
            Walk::Returned { .. } => unreachable!("landing walk"),
        };
        let mut indices = Vec::with_capacity(times.len());
        let mut start = 0;
        for &t in &times {
            indices.push(self.register(n, &word[start..t])?.index);
            start = t;
        }
        self.address_from_indices(n, &indices)
    }

    /// Build C^d_n ⊂ I^d_n for any sequence of discovered non-central branches.
    pub fn address_from_indices(&self, n: usize, indices: &[i64]) -> Result<LandingAddress, NestError> {
        let mut word = Vec::new();
        let mut times = Vec::with_capacity(indices.len());
        for &j in indices {
            if j == 0 {
                return Err(NestError::InadmissibleWord);
            }
            let b = self.branch_by_index(n, j)?;
            times.push(b.return_time);
            word.extend_from_slice(&b.word);
        }
        let (domain, enclosing) =
            self.escalate(|p| self.address_domains(n, &word, p), NestError::PrecisionExhausted(self.budgets.precision_max))?;
        Ok(LandingAddress {
            level: n,
            indices: indices.to_vec(),
            landing_time: times.iter().sum(),
            times,
            domain,
            enclosing,
        })
    }

    fn address_domains(&self, n: usize, word: &[Sign], prec: u32) -> Attempt<((Float, Float), (Float, Float))> {
        let widths = self.half_widths_at(prec)?;
        let c = self.central_width(n, prec)?;
        let map = QuadraticMap::new(&self.a, prec)?;
        let log2_thr = map.log2_threshold();
        let pull = |u: &Float| -> Attempt<(Float, Float)> {
            let a = map.pullback(word, &Float::with_val(prec, u)).ok_or(NestError::InadmissibleWord)?;
            let b = map.pullback(word, &Float::with_val(prec, -u)).ok_or(NestError::InadmissibleWord)?;
            let (a, b) = ordered(a, b);
            if log2_abs(&Float::with_val(prec, &b - &a)) < log2_thr + MARGIN_BITS {
                return Ok(None);
            }
            Ok(Some((a, b)))
        };
        let Some(domain) = pull(&c)? else { return Ok(None) };
        let Some(enclosing) = pull(&widths[n])? else { return Ok(None) };
        Ok(Some((domain, enclosing)))
    }

    /// d^{(n)}(0): the landing address of the critical value R_n(0), read
    /// off the stored critical orbit.
    pub fn critical_address(&self, n: usize) -> Result<LandingAddress, NestError> {
        let lvl = self.level(n)?;
        let v = lvl.v.ok_or(NestError::LevelMissing(n))?;
        if self.levels.get(n + 1).and_then(|l| l.v).is_none() {
            return Err(NestError::LevelMissing(n + 1));
        }
        let mut indices = Vec::with_capacity(lvl.returns.len());
        let mut start = v;
        for &t in &lvl.returns {
            indices.push(self.register(n, &self.orbit.signs[start..t])?.index);
            start = t;
        }
        self.address_from_indices(n, &indices)
    }

    /// τ_n: index of the branch containing R_n(0); 0 at central returns.
    pub fn tau(&self, n: usize) -> Result<i64, NestError> {
        let lvl = self.level(n)?;
        let v = lvl.v.ok_or(NestError::LevelMissing(n))?;
        match lvl.returns.first() {
            None if self.levels.get(n + 1).and_then(|l| l.v) == Some(v) => Ok(0),
            None => Err(NestError::NeverReturnsWithinBudget(self.budgets.orbit_steps)),
            Some(&t) => Ok(self.register(n, &self.orbit.signs[v..t])?.index),
        }
    }

    /// Ĩ_{n+1} with its nesting and branch-containment report.
    pub fn gape_interval(&self, n_plus_1: usize) -> Result<GapeReport, NestError> {
        if n_plus_1 < 2 {
            return Err(NestError::LevelMissing(n_plus_1));
        }
        let lvl = self.level(n_plus_1)?;
        let g = lvl.gape.clone().ok_or(NestError::LevelMissing(n_plus_1))?;
        let n = n_plus_1 - 1;
        let un = &self.levels[n].half_width;
        let slack = Float::with_val(self.precision, self.map().threshold());
        let nested = lvl.half_width < g && g <= Float::with_val(self.precision, un + &slack);
        let ratio = Float::with_val(self.precision, &g / un).to_f64();
        let branches = self
            .discovered_branches(n)
            .iter()
            .map(|b| {
                let inside = if b.hi <= g {
                    Some(true)
                } else if b.lo >= g {
                    Some(false)
                } else {
                    None
                };
                (b.index, inside)
            })
            .collect();
        Ok(GapeReport { level: n_plus_1, half_width: g, ratio, s_prev: self.s(n - 1), nested, branches })
    }
}
