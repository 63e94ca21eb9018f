//! Finite-state sources: i.i.d. products and homogeneous Markov chains over a
//! coordinate-structured state space, with exact finite-horizon laws,
//! chain-rule entropy curves, stationary laws, Cesàro means, entropy rates
//! and rate brackets for coordinate projections that are not Markov.
//!
//! Time starts at 1: `X(1)` has the initial law.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dist::{entropy_of, Caps, JointDistribution, ProductSpace, ATOM_FLOOR};
use crate::error::{Error, Result};
use crate::subset::Subset;

const ROW_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSource {
    space: ProductSpace,
    /// Row-major `S x S`.
    transition: Vec<f64>,
    initial: Vec<f64>,
    /// Positive entries of each row.
    moves: Vec<Vec<(usize, f64)>>,
}

impl MarkovSource {
    pub fn new(space: ProductSpace, transition: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let s = space.total_size();
        if transition.len() != s || transition.iter().any(|r| r.len() != s) {
            return Err(Error::shape(format!(
                "transition matrix must be {s} x {s}"
            )));
        }
        if initial.len() != s {
            return Err(Error::shape(format!(
                "initial law has {} entries for {s} states",
                initial.len()
            )));
        }
        for (i, row) in transition.iter().enumerate() {
            check_probability(row).map_err(|e| Error::arg(format!("row {}: {e}", i + 1)))?;
        }
        check_probability(&initial).map_err(|e| Error::arg(format!("initial law: {e}")))?;
        Ok(Self::from_parts(space, transition.concat(), initial))
    }

    fn from_parts(space: ProductSpace, transition: Vec<f64>, initial: Vec<f64>) -> Self {
        let s = space.total_size();
        let moves = (0..s)
            .map(|i| {
                transition[i * s..(i + 1) * s]
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|&(_, p)| p > 0.0)
                    .collect()
            })
            .collect();
        MarkovSource {
            space,
            transition,
            initial,
            moves,
        }
    }

    /// i.i.d. sequence with marginal `base`, as a chain whose rows all equal
    /// `base`.
    pub fn iid(base: &JointDistribution) -> Self {
        let s = base.space().total_size();
        let row = base.mass().to_vec();
        let transition = (0..s).flat_map(|_| row.iter().copied()).collect();
        Self::from_parts(base.space().clone(), transition, row)
    }

    /// Walk on the torus `Z_n x Z_n` with four equiprobable unit moves,
    /// started at the origin.
    pub fn screwed_board(size: usize) -> Result<Self> {
        board(size, |i, j| {
            let n = size as i64;
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .map(|&(di, dj)| ((((i + di) % n + n) % n), (((j + dj) % n + n) % n), 0.25))
                .collect()
        })
    }

    /// Simple random walk on the `n x n` grid graph (each neighbour with
    /// probability `1/degree`), started at the origin.
    pub fn grid_board(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::arg("grid board needs at least 2 rows"));
        }
        board(size, |i, j| {
            let n = size as i64;
            let nb: Vec<(i64, i64)> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .map(|&(di, dj)| (i + di, j + dj))
                .filter(|&(a, b)| (0..n).contains(&a) && (0..n).contains(&b))
                .collect();
            let p = 1.0 / nb.len() as f64;
            nb.into_iter().map(|(a, b)| (a, b, p)).collect()
        })
    }

    /// Lazy walk on `Z_n`: stay with probability 1/2, step `±1` with 1/4
    /// each, started at 0.
    pub fn lazy_cycle(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::arg("cycle needs at least one state"));
        }
        let mut t = vec![0.0; size * size];
        for i in 0..size {
            t[i * size + i] += 0.5;
            t[i * size + (i + 1) % size] += 0.25;
            t[i * size + (i + size - 1) % size] += 0.25;
        }
        let mut init = vec![0.0; size];
        init[0] = 1.0;
        Ok(Self::from_parts(
            ProductSpace::from_sizes(&[size])?,
            t,
            init,
        ))
    }

    pub fn with_initial(&self, initial: Vec<f64>) -> Result<Self> {
        if initial.len() != self.states() {
            return Err(Error::shape(format!(
                "initial law has {} entries for {} states",
                initial.len(),
                self.states()
            )));
        }
        check_probability(&initial).map_err(|e| Error::arg(format!("initial law: {e}")))?;
        Ok(Self::from_parts(
            self.space.clone(),
            self.transition.clone(),
            initial,
        ))
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn states(&self) -> usize {
        self.space.total_size()
    }

    pub fn k(&self) -> usize {
        self.space.k()
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.states() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let s = self.states();
        &self.transition[from * s..(from + 1) * s]
    }

    /// `mu P`.
    pub fn step(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.states()];
        for (s, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for &(t, p) in &self.moves[s] {
                out[t] += m * p;
            }
        }
        out
    }

    fn reachable(&self, start: usize, forward: bool) -> Vec<bool> {
        let s = self.states();
        let mut seen = vec![false; s];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            let next: Vec<usize> = if forward {
                self.moves[u].iter().map(|&(v, _)| v).collect()
            } else {
                (0..s).filter(|&v| self.transition(v, u) > 0.0).collect()
            };
            for v in next {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn is_irreducible(&self) -> bool {
        self.reachable(0, true).iter().all(|&b| b) && self.reachable(0, false).iter().all(|&b| b)
    }

    /// Period of an irreducible chain: gcd of `level(u) + 1 - level(v)` over
    /// all edges `u -> v`, levels taken from a breadth-first search.
    pub fn period(&self) -> Result<usize> {
        self.require_irreducible()?;
        let s = self.states();
        let mut level = vec![usize::MAX; s];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.moves[u] {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..s {
            for &(v, _) in &self.moves[u] {
                let d = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, d);
            }
        }
        Ok(g)
    }

    fn require_irreducible(&self) -> Result<()> {
        if self.is_irreducible() {
            Ok(())
        } else {
            Err(Error::domain("chain is reducible"))
        }
    }

    /// Unique `pi` with `pi P = pi`, from a dense linear solve in which one
    /// balance equation is replaced by normalization.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        self.require_irreducible()?;
        let s = self.states();
        let mut a = DMatrix::<f64>::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                a[(j, i)] = self.transition(i, j);
            }
            a[(i, i)] -= 1.0;
        }
        for j in 0..s {
            a[(s - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(s);
        b[s - 1] = 1.0;
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::domain("singular balance equations"))?;
        let mut pi: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= total);
        Ok(pi)
    }

    /// `(1/n) sum_{i=1..n} mu P^i` with the distance to the stationary law
    /// when the chain is irreducible.
    pub fn cesaro_mean(&self, n: usize) -> Result<CesaroMean> {
        if n == 0 {
            return Err(Error::arg("Cesàro mean needs n ≥ 1"));
        }
        let mut mu = self.initial.clone();
        let mut acc = vec![0.0; self.states()];
        for _ in 0..n {
            mu = self.step(&mu);
            acc.iter_mut().zip(&mu).for_each(|(a, m)| *a += m);
        }
        acc.iter_mut().for_each(|a| *a /= n as f64);
        let tv_to_stationary = if self.is_irreducible() {
            let pi = self.stationary_distribution()?;
            Some(total_variation(&acc, &pi))
        } else {
            None
        };
        Ok(CesaroMean {
            n,
            mean: acc,
            tv_to_stationary,
        })
    }

    fn row_entropies(&self) -> Vec<f64> {
        (0..self.states())
            .map(|s| entropy_of(self.row(s)))
            .collect()
    }

    /// `sum_s pi_s H(P(s, .))`.
    pub fn entropy_rate(&self) -> Result<f64> {
        let pi = self.stationary_distribution()?;
        Ok(pi
            .iter()
            .zip(self.row_entropies())
            .map(|(p, h)| p * h)
            .sum())
    }

    /// `H(X(1), .., X(n))` for `n = 1..=n_max` by the chain rule on the
    /// marginal state laws.
    pub fn entropy_curve(&self, n_max: usize) -> Vec<f64> {
        let rows = self.row_entropies();
        let mut mu = self.initial.clone();
        let mut h = entropy_of(&mu);
        let mut out = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            out.push(h);
            if n < n_max {
                h += mu.iter().zip(&rows).map(|(m, r)| m * r).sum::<f64>();
                mu = self.step(&mu);
            }
        }
        out
    }

    /// Law of `X^(n) = (X(1), .., X(n))`, regrouped into `k` coordinate
    /// blocks: coordinate `i` of the result is the word `(X_i(1), .., X_i(n))`
    /// over `A_i^n`, with `X_i(1)` the most significant letter.
    pub fn finite_horizon_distribution(&self, n: usize) -> Result<JointDistribution> {
        self.finite_horizon_distribution_with_caps(n, &Caps::default())
    }

    pub fn finite_horizon_distribution_with_caps(
        &self,
        n: usize,
        caps: &Caps,
    ) -> Result<JointDistribution> {
        if n == 0 {
            return Err(Error::arg("horizon must be at least 1"));
        }
        let k = self.k();
        let mut block_sizes = Vec::with_capacity(k);
        for &a in self.space.sizes() {
            let size = u32::try_from(n)
                .ok()
                .and_then(|n| a.checked_pow(n))
                .filter(|&s| s <= caps.max_total_size)
                .ok_or_else(|| {
                    Error::capacity(
                        "finite-horizon block",
                        (a as u128).saturating_pow(n.min(128) as u32),
                        caps.max_total_size as u128,
                    )
                })?;
            block_sizes.push(size);
        }
        let out_space = ProductSpace::from_sizes_with_caps(&block_sizes, caps)?;
        let mut block_strides = vec![1usize; k];
        for i in (0..k.saturating_sub(1)).rev() {
            block_strides[i] = block_strides[i + 1] * block_sizes[i + 1];
        }
        // contrib[t][s]: contribution of state s at time t to the flat index
        let sizes = self.space.sizes();
        let contrib: Vec<Vec<usize>> = (0..n)
            .map(|t| {
                let weights: Vec<usize> = (0..k)
                    .map(|i| sizes[i].pow((n - 1 - t) as u32) * block_strides[i])
                    .collect();
                (0..self.states())
                    .map(|s| {
                        (0..k)
                            .map(|i| self.space.digit(s, i) * weights[i])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let mut mass = vec![0.0; out_space.total_size()];
        let mut stack: Vec<(usize, usize, f64, usize)> = self
            .initial
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(s, &p)| (0, s, p, contrib[0][s]))
            .collect();
        while let Some((t, s, p, idx)) = stack.pop() {
            if t + 1 == n {
                mass[idx] += p;
                continue;
            }
            for &(s2, q) in &self.moves[s] {
                stack.push((t + 1, s2, p * q, idx + contrib[t + 1][s2]));
            }
        }
        JointDistribution::from_weights(out_space, mass)
    }

    /// Law of `X^(n)` with each coordinate block reduced to the words that
    /// occur with positive probability, relabelled `0, 1, ..` in increasing
    /// order of the word read as a base-`|A_i|` number with `X_i(1)` most
    /// significant.
    ///
    /// Entropies and fluctuations of every marginal are those of
    /// [`Self::finite_horizon_distribution`], and so is the law of `f(X^(n))`
    /// for a uniformly random coordinate-wise encoding `f`: restricting a
    /// uniform map to part of its domain leaves it uniform. Reachable paths
    /// are enumerated twice, so their number is capped instead of `|A_i|^n`.
    pub fn active_horizon_distribution(&self, n: usize, caps: &Caps) -> Result<ActiveLaw> {
        if n == 0 {
            return Err(Error::arg("horizon must be at least 1"));
        }
        let k = self.k();
        let sizes = self.space.sizes().to_vec();
        for &a in &sizes {
            if (a as u64).checked_pow(n as u32).is_none() {
                return Err(Error::capacity(
                    "block word",
                    (a as u128).saturating_pow(n as u32),
                    u64::MAX as u128,
                ));
            }
        }
        let digits: Vec<Vec<usize>> = (0..self.states()).map(|s| self.space.digits(s)).collect();

        let paths = self.count_paths(n);
        if paths > caps.max_total_size as f64 {
            return Err(Error::capacity(
                "reachable paths",
                paths.min(u128::MAX as f64) as u128,
                caps.max_total_size as u128,
            ));
        }
        let mut seen: Vec<std::collections::HashSet<u64>> = vec![Default::default(); k];
        self.walk_paths(n, &digits, &sizes, |words, _| {
            for (set, &w) in seen.iter_mut().zip(words) {
                set.insert(w);
            }
        });
        let words: Vec<Vec<u64>> = seen
            .into_iter()
            .map(|set| {
                let mut v: Vec<u64> = set.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        let space = ProductSpace::from_sizes_with_caps(
            &words.iter().map(Vec::len).collect::<Vec<_>>(),
            caps,
        )?;
        let mut mass = vec![0.0; space.total_size()];
        let mut idx = vec![0usize; k];
        self.walk_paths(n, &digits, &sizes, |w, p| {
            for i in 0..k {
                idx[i] = words[i].binary_search(&w[i]).expect("word seen in first pass");
            }
            let flat = space.flat_index(&idx).expect("indices within active alphabets");
            mass[flat] += p;
        });
        Ok(ActiveLaw {
            dist: JointDistribution::from_weights(space, mass)?,
            words,
        })
    }

    /// Number of positive-probability paths of length `n`.
    fn count_paths(&self, n: usize) -> f64 {
        let mut count: Vec<f64> = self.initial.iter().map(|&p| f64::from(u8::from(p > 0.0))).collect();
        for _ in 1..n {
            let mut next = vec![0.0; self.states()];
            for (s, &c) in count.iter().enumerate() {
                for &(t, _) in &self.moves[s] {
                    next[t] += c;
                }
            }
            count = next;
        }
        count.iter().sum()
    }

    /// Depth-first walk over positive-probability paths of length `n`,
    /// calling `leaf` with the per-coordinate words and the path mass.
    fn walk_paths(
        &self,
        n: usize,
        digits: &[Vec<usize>],
        sizes: &[usize],
        mut leaf: impl FnMut(&[u64], f64),
    ) {
        let k = sizes.len();
        let mut stack: Vec<(usize, usize, f64, Vec<u64>)> = self
            .initial
            .iter()
            .enumerate()
            .rev()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(s, &p)| (1, s, p, digits[s].iter().map(|&d| d as u64).collect()))
            .collect();
        while let Some((t, s, p, words)) = stack.pop() {
            if t == n {
                leaf(&words, p);
                continue;
            }
            for &(s2, q) in self.moves[s].iter().rev() {
                let next = (0..k)
                    .map(|i| words[i] * sizes[i] as u64 + digits[s2][i] as u64)
                    .collect();
                stack.push((t + 1, s2, p * q, next));
            }
        }
    }

    /// The chain seen through the coordinates in `subset`, when that
    /// projection is itself Markov for every initial law (strong
    /// lumpability). `None` otherwise.
    pub fn lump(&self, subset: Subset) -> Result<Option<MarkovSource>> {
        subset.check_within(self.k())?;
        let sub = self.space.subspace(subset)?;
        let c = sub.total_size();
        let class: Vec<usize> = self.space.projected_indices(subset).collect();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; c];
        for s in 0..self.states() {
            let mut q = vec![0.0; c];
            for &(t, p) in &self.moves[s] {
                q[class[t]] += p;
            }
            match &rows[class[s]] {
                None => rows[class[s]] = Some(q),
                Some(r) => {
                    if r.iter().zip(&q).any(|(a, b)| (a - b).abs() > ROW_TOL) {
                        return Ok(None);
                    }
                }
            }
        }
        let mut init = vec![0.0; c];
        for (s, &p) in self.initial.iter().enumerate() {
            init[class[s]] += p;
        }
        let transition = rows
            .into_iter()
            .map(|r| r.expect("every class is hit by some state"))
            .collect::<Vec<_>>()
            .concat();
        Ok(Some(Self::from_parts(sub, transition, init)))
    }

    /// Conditional-entropy sandwich for the entropy rate of the projection
    /// `Y = X_J` under the stationary law, for depths `1..=depth`:
    /// `H(Y(m+1) | Y(m..1), X(1)) ≤ h(Y) ≤ H(Y(m+1) | Y(m..1))`.
    pub fn hidden_rate_brackets(&self, subset: Subset, depth: usize) -> Result<Vec<RateBracket>> {
        self.hidden_rate_brackets_with_caps(subset, depth, &Caps::default())
    }

    pub fn hidden_rate_brackets_with_caps(
        &self,
        subset: Subset,
        depth: usize,
        caps: &Caps,
    ) -> Result<Vec<RateBracket>> {
        if depth == 0 {
            return Err(Error::arg("bracket depth must be at least 1"));
        }
        subset.check_within(self.k())?;
        let s = self.states();
        let obs = self.space.subspace(subset)?.total_size();
        let needed = (s as u128).saturating_mul((obs as u128).saturating_pow(depth as u32));
        if needed > caps.max_total_size as u128 {
            return Err(Error::capacity(
                "hidden-process enumeration",
                needed,
                caps.max_total_size as u128,
            ));
        }
        let pi = self.stationary_distribution()?;
        let class: Vec<usize> = self.space.projected_indices(subset).collect();

        // key: (x(1), y(2..t)) packed as x1 * obs^(t-1) + word; the value is
        // the joint mass with each current hidden state.
        let mut level: BTreeMap<u64, Vec<(usize, f64)>> = pi
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > 0.0)
            .map(|(x, &p)| (x as u64, vec![(x, p)]))
            .collect();
        let mut joint_h = vec![entropy_of(&pi)];
        let mut obs_h = vec![observed_entropy(&level, &class, obs, 1)];
        for t in 1..=depth {
            let mut next: BTreeMap<u64, BTreeMap<usize, f64>> = BTreeMap::new();
            for (&key, alpha) in &level {
                for &(x, a) in alpha {
                    for &(x2, p) in &self.moves[x] {
                        let k2 = key * obs as u64 + class[x2] as u64;
                        *next.entry(k2).or_default().entry(x2).or_insert(0.0) += a * p;
                    }
                }
            }
            level = next
                .into_iter()
                .map(|(k, m)| (k, m.into_iter().collect()))
                .collect();
            let masses: Vec<f64> = level
                .values()
                .map(|v| v.iter().map(|&(_, p)| p).sum())
                .collect();
            joint_h.push(entropy_of(&masses));
            obs_h.push(observed_entropy(&level, &class, obs, t + 1));
        }
        Ok((1..=depth)
            .map(|m| RateBracket {
                depth: m,
                lower: joint_h[m] - joint_h[m - 1],
                upper: obs_h[m] - obs_h[m - 1],
            })
            .collect())
    }

    /// Bracket at a single depth.
    pub fn hidden_rate_bracket(&self, subset: Subset, depth: usize) -> Result<RateBracket> {
        Ok(*self
            .hidden_rate_brackets(subset, depth)?
            .last()
            .expect("depth ≥ 1"))
    }

    /// Per-horizon entropy rates of every coordinate sub-process.
    pub fn process_profile(&self, n_max: usize, opts: &ProfileOptions) -> Result<ProcessProfile> {
        if n_max == 0 {
            return Err(Error::arg("horizon must be at least 1"));
        }
        opts.caps.check_coords(self.k())?;
        let mut tracks = Vec::with_capacity(1 << self.k());
        for subset in Subset::all(self.k()) {
            if subset.is_empty() {
                tracks.push(SubsetTrack {
                    subset,
                    kind: RateKind::Exact,
                    entropies: Some(vec![0.0; n_max]),
                    rates: vec![0.0; n_max],
                    brackets: None,
                });
                continue;
            }
            match self.lump(subset)? {
                Some(chain) => {
                    let entropies = chain.entropy_curve(n_max);
                    let rates = entropies
                        .iter()
                        .enumerate()
                        .map(|(i, h)| h / (i + 1) as f64)
                        .collect();
                    tracks.push(SubsetTrack {
                        subset,
                        kind: RateKind::Exact,
                        entropies: Some(entropies),
                        rates,
                        brackets: None,
                    });
                }
                None => {
                    let depth = opts.bracket_depth.max(1);
                    let brackets =
                        self.hidden_rate_brackets_with_caps(subset, depth, &opts.caps)?;
                    let rates = (1..=n_max)
                        .map(|n| {
                            let b = brackets[n.min(depth) - 1];
                            0.5 * (b.lower + b.upper)
                        })
                        .collect();
                    tracks.push(SubsetTrack {
                        subset,
                        kind: RateKind::Bracketed,
                        entropies: None,
                        rates,
                        brackets: Some(brackets),
                    });
                }
            }
        }
        let mut fluctuation = Vec::new();
        for n in 1..=opts.fluctuation_horizon.min(n_max) {
            match self.active_horizon_distribution(n, &opts.caps) {
                Ok(law) => fluctuation.push(law.dist.max_fluctuation()? / n as f64),
                Err(Error::Capacity { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(ProcessProfile {
            k: self.k(),
            n_max,
            tracks,
            fluctuation,
        })
    }
}

fn observed_entropy(
    level: &BTreeMap<u64, Vec<(usize, f64)>>,
    class: &[usize],
    obs: usize,
    len: usize,
) -> f64 {
    // strip x(1) from the key and put y(1) back in front
    let word_space = (obs as u64).pow(len as u32 - 1);
    let mut agg: BTreeMap<u64, f64> = BTreeMap::new();
    for (&key, alpha) in level {
        let x1 = key / word_space;
        let word = key % word_space;
        let y_key = class[x1 as usize] as u64 * word_space + word;
        *agg.entry(y_key).or_insert(0.0) += alpha.iter().map(|&(_, p)| p).sum::<f64>();
    }
    entropy_of(&agg.into_values().collect::<Vec<_>>())
}

fn board(
    size: usize,
    neighbours: impl Fn(i64, i64) -> Vec<(i64, i64, f64)>,
) -> Result<MarkovSource> {
    if size == 0 {
        return Err(Error::arg("board size must be positive"));
    }
    let space = ProductSpace::from_sizes(&[size, size])?;
    let s = size * size;
    let mut t = vec![0.0; s * s];
    for i in 0..size {
        for j in 0..size {
            let from = i * size + j;
            for (a, b, p) in neighbours(i as i64, j as i64) {
                t[from * s + a as usize * size + b as usize] += p;
            }
        }
    }
    let mut init = vec![0.0; s];
    init[0] = 1.0;
    Ok(MarkovSource::from_parts(space, t, init))
}

fn check_probability(v: &[f64]) -> std::result::Result<(), String> {
    if let Some(bad) = v.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(format!("invalid probability {bad}"));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > ROW_TOL {
        return Err(format!("sums to {total}"));
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Law of `n` independent copies of `base`, grouped into coordinate blocks
/// as in [`MarkovSource::finite_horizon_distribution`].
pub fn iid_expansion(base: &JointDistribution, n: usize) -> Result<JointDistribution> {
    MarkovSource::iid(base).finite_horizon_distribution(n)
}

/// A finite-horizon law on active alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveLaw {
    pub dist: JointDistribution,
    /// For each coordinate, the original block word of every active symbol.
    pub words: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CesaroMean {
    pub n: usize,
    pub mean: Vec<f64>,
    pub tv_to_stationary: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBracket {
    pub depth: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    Exact,
    Bracketed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetTrack {
    pub subset: Subset,
    pub kind: RateKind,
    /// `H(X_J^(n))` for `n = 1..=n_max`, when the sub-process is Markov.
    pub entropies: Option<Vec<f64>>,
    /// `H(X_J^(n)) / n`, or the bracket midpoint at depth `min(n, depth)`.
    pub rates: Vec<f64>,
    pub brackets: Option<Vec<RateBracket>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessProfile {
    pub k: usize,
    pub n_max: usize,
    /// One track per subset, in bitmask order.
    pub tracks: Vec<SubsetTrack>,
    /// `M'(X^(n)) / n` for `n = 1, 2, ..` while the explicit law fits.
    pub fluctuation: Vec<f64>,
}

impl ProcessProfile {
    /// Rate estimates at horizon `n` as a profile vector.
    pub fn rates_at(&self, n: usize) -> Result<crate::profiles::ProfileVector> {
        if n == 0 || n > self.n_max {
            return Err(Error::arg(format!("horizon {n} outside 1..={}", self.n_max)));
        }
        crate::profiles::ProfileVector::new(
            self.k,
            self.tracks.iter().map(|t| t.rates[n - 1]).collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileOptions {
    pub bracket_depth: usize,
    /// Largest horizon at which `M'(X^(n))` is computed from the explicit law.
    pub fluctuation_horizon: usize,
    pub caps: Caps,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            bracket_depth: 6,
            fluctuation_horizon: 4,
            caps: Caps::default(),
        }
    }
}

fn default_board_size() -> usize {
    8
}

/// JSON description of a source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Iid {
        alphabet_sizes: Vec<usize>,
        distribution: Vec<f64>,
    },
    Markov {
        alphabet_sizes: Vec<usize>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
    },
    ScrewedBoard {
        #[serde(default = "default_board_size")]
        board_size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
    },
    GridBoard {
        #[serde(default = "default_board_size")]
        board_size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
    },
}

impl SourceSpec {
    pub fn build(&self) -> Result<MarkovSource> {
        match self {
            SourceSpec::Iid {
                alphabet_sizes,
                distribution,
            } => {
                let base = JointDistribution::new(
                    ProductSpace::from_sizes(alphabet_sizes)?,
                    distribution.clone(),
                )?;
                Ok(MarkovSource::iid(&base))
            }
            SourceSpec::Markov {
                alphabet_sizes,
                transition,
                initial,
            } => MarkovSource::new(
                ProductSpace::from_sizes(alphabet_sizes)?,
                transition.clone(),
                initial.clone(),
            ),
            SourceSpec::ScrewedBoard {
                board_size,
                initial,
            } => {
                let src = MarkovSource::screwed_board(*board_size)?;
                match initial {
                    Some(init) => src.with_initial(init.clone()),
                    None => Ok(src),
                }
            }
            SourceSpec::GridBoard {
                board_size,
                initial,
            } => {
                let src = MarkovSource::grid_board(*board_size)?;
                match initial {
                    Some(init) => src.with_initial(init.clone()),
                    None => Ok(src),
                }
            }
        }
    }

    /// Single-step law of an i.i.d. source.
    pub fn iid_base(&self) -> Option<Result<JointDistribution>> {
        match self {
            SourceSpec::Iid {
                alphabet_sizes,
                distribution,
            } => Some(ProductSpace::from_sizes(alphabet_sizes).and_then(|space| {
                JointDistribution::new(space, distribution.clone())
            })),
            _ => None,
        }
    }
}

/// Whether a probability vector is supported on more than one atom.
pub fn is_degenerate(mass: &[f64]) -> bool {
    mass.iter().filter(|&&p| p > ATOM_FLOOR).count() <= 1
}
