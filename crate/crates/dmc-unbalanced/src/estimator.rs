use std::cmp::Ordering;

use dmc_graph::{GraphBuilder, Weight, WeightedMultigraph};
use serde::{Deserialize, Serialize};

use crate::classes::EdgeClassIndex;
use crate::real::{cmp, Arith, Fixed, Real};
use crate::UnbalancedError;

pub const DEFAULT_PRECISION_BITS: u32 = 96;
pub const PRECISION_ENV: &str = "DETMINCUT_PRECISION_BITS";

/// Mantissa width from `DETMINCUT_PRECISION_BITS`, or the default.
pub fn precision_from_env() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&b| b >= 16)
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

/// The sampling weight `W̄ = λ̃ / D̂`, kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonWeight {
    pub lambda_tilde: Weight,
    pub d_hat: u64,
}

impl SkeletonWeight {
    pub fn value(&self) -> f64 {
        self.lambda_tilde as f64 / self.d_hat as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    /// The additive accuracy; each class stays within `ε·λ̃/6` of its weight.
    pub eps: f64,
    pub weight: SkeletonWeight,
    pub precision_bits: u32,
    /// Accept `w(e) > W̄` by splitting `e` implicitly into `⌊w(e)/W̄⌋` pieces
    /// of weight `W̄`, which are always kept, plus one remainder piece.
    pub allow_bundles: bool,
    /// Fail when `Φ(∅) > 1/2`.
    pub require_initial_bound: bool,
}

impl SampleParams {
    pub fn new(eps: f64, weight: SkeletonWeight) -> Self {
        SampleParams { eps, weight, precision_bits: precision_from_env(), allow_bundles: false, require_initial_bound: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiTrace {
    pub initial: f64,
    /// `Φ` after each decision, in edge order.
    pub decisions: Vec<f64>,
    pub final_phi: f64,
    /// Largest observed increase of `Φ` over one decision (0 when exact).
    pub max_increase: f64,
    pub error_budget: f64,
    pub precision_bits: u32,
    /// Classes with `δ ≥ 1`, whose lower tail is empty and carries no term.
    pub lower_terms_dropped: usize,
}

impl PhiTrace {
    pub fn is_monotone(&self) -> bool {
        self.max_increase <= self.error_budget
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbalancedSkeleton {
    /// Same vertices as `G`; an edge keeps its id and its weight is the
    /// number of sampled pieces.
    pub h_hat: WeightedMultigraph,
    pub weight: SkeletonWeight,
    /// Sampled pieces per edge of `G`, by edge position.
    pub multiplicity: Vec<u64>,
    pub trace: PhiTrace,
}

#[derive(Debug, Clone)]
struct ClassState {
    delta: Real,
    one_plus_delta: Real,
    /// `1 - δ` when `δ < 1`.
    one_minus_delta: Option<Real>,
    t_upper: Real,
    t_lower: Option<Real>,
    /// `(1+δ)μ` and `(1-δ)μ`.
    upper_mean: Real,
    lower_mean: Option<Real>,
    forced: u128,
    upper: Real,
    lower: Option<Real>,
    value: Fixed,
}

/// Pessimistic estimator over the in-scope classes with per-edge decisions.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    arith: Arith,
    frac_bits: u32,
    classes: Vec<Option<ClassState>>,
    membership: Vec<Vec<usize>>,
    class_edges: Vec<Vec<usize>>,
    forced: Vec<u64>,
    remainder: Vec<Option<Real>>,
    decided: Vec<Option<bool>>,
    phi: Fixed,
    initial: Fixed,
    conversions: u64,
    max_increase: f64,
    decisions: Vec<f64>,
    lower_dropped: usize,
    params: SampleParams,
    g: WeightedMultigraph,
}

impl EstimatorState {
    pub fn new(g: &WeightedMultigraph, index: &EdgeClassIndex, params: &SampleParams) -> Result<Self, UnbalancedError> {
        let SkeletonWeight { lambda_tilde, d_hat } = params.weight;
        if !(params.eps > 0.0 && params.eps.is_finite()) || lambda_tilde == 0 || d_hat == 0 {
            return Err(UnbalancedError::InvalidParams("need ε > 0, λ̃ > 0 and D̂ > 0".into()));
        }
        if index.membership.len() != g.edge_count() {
            return Err(UnbalancedError::IndexMismatch { edges: g.edge_count(), indexed: index.membership.len() });
        }
        let mut arith = Arith::new(params.precision_bits);
        let frac_bits = arith.bits() + 32;
        let lt = lambda_tilde as u128;
        let mut forced = Vec::with_capacity(g.edge_count());
        let mut remainder = Vec::with_capacity(g.edge_count());
        for e in g.edges() {
            let scaled = e.w as u128 * d_hat as u128;
            if scaled > lt && !params.allow_bundles {
                return Err(UnbalancedError::HeavyEdge { edge: e.id, weight: e.w, w_bar: params.weight.value() });
            }
            let k = (scaled / lt) as u64;
            let r = scaled % lt;
            forced.push(k);
            remainder.push(if r == 0 { None } else { Some(arith.from_ratio(r, lt)) });
        }
        let eps = arith.from_f64(params.eps);
        let d = arith.from_u128(d_hat as u128);
        let eps_d = arith.mul(&eps, &d);
        let six = arith.from_u128(6);
        let delta_mu = arith.div(&eps_d, &six);
        let one = arith.one();

        let mut classes = Vec::with_capacity(index.classes.len());
        let mut lower_dropped = 0;
        for c in &index.classes {
            if !c.in_scope {
                classes.push(None);
                continue;
            }
            let lt_over = arith.from_ratio(lt, 6 * c.weight as u128);
            let delta = arith.mul(&eps, &lt_over);
            let mu = arith.from_ratio(c.weight as u128 * d_hat as u128, lt);
            let one_plus_delta = arith.add(&one, &delta);
            let t_upper = arith.ln(&one_plus_delta);
            let upper_mean = arith.add(&mu, &delta_mu);
            let (one_minus_delta, t_lower, lower_mean) = if cmp(&delta, &one) == Ordering::Less {
                let omd = arith.sub(&one, &delta);
                let inv = arith.div(&one, &omd);
                let tl = arith.ln(&inv);
                let lm = arith.sub(&mu, &delta_mu);
                (Some(omd), Some(tl), Some(lm))
            } else {
                lower_dropped += 1;
                (None, None, None)
            };
            let forced_total: u128 = c.edges.iter().map(|&p| forced[p] as u128).sum();
            classes.push(Some(ClassState {
                delta,
                one_plus_delta,
                one_minus_delta,
                t_upper,
                t_lower,
                upper_mean,
                lower_mean,
                forced: forced_total,
                upper: arith.zero(),
                lower: None,
                value: Fixed::zero(),
            }));
        }
        let membership = index
            .membership
            .iter()
            .map(|ids| ids.iter().copied().filter(|&c| index.classes[c].in_scope).collect())
            .collect();
        let class_edges = index.classes.iter().map(|c| c.edges.clone()).collect();
        let mut st = EstimatorState {
            arith,
            frac_bits,
            classes,
            membership,
            class_edges,
            forced,
            remainder,
            decided: vec![None; g.edge_count()],
            phi: Fixed::zero(),
            initial: Fixed::zero(),
            conversions: 0,
            max_increase: 0.0,
            decisions: Vec::with_capacity(g.edge_count()),
            lower_dropped,
            params: *params,
            g: g.clone(),
        };
        let mut total = Fixed::zero();
        for c in 0..st.classes.len() {
            if st.classes[c].is_none() {
                continue;
            }
            let (u, l) = st.class_terms(c);
            let value = st.fixed_of(&u, l.as_ref());
            total.0 += &value.0;
            let cs = st.classes[c].as_mut().unwrap();
            cs.upper = u;
            cs.lower = l;
            cs.value = value;
        }
        st.initial = total.clone();
        st.phi = total;
        if params.require_initial_bound && st.initial_phi() > 0.5 {
            return Err(UnbalancedError::InitialBound { phi: st.initial_phi() });
        }
        Ok(st)
    }

    fn fixed_of(&mut self, upper: &Real, lower: Option<&Real>) -> Fixed {
        self.conversions += 1;
        let mut v = Fixed::of(upper, self.frac_bits);
        if let Some(l) = lower {
            self.conversions += 1;
            v.0 += Fixed::of(l, self.frac_bits).0;
        }
        v
    }

    /// Upper and lower terms of class `c` from the current decisions, using
    /// exponentials of the decided totals rather than running products.
    fn class_terms(&mut self, c: usize) -> (Real, Option<Real>) {
        let a = &mut self.arith;
        let cs = self.classes[c].as_ref().unwrap();
        let mut count = cs.forced;
        let mut prod_u = a.one();
        let mut prod_l = a.one();
        for &p in &self.class_edges[c] {
            match (self.decided[p], &self.remainder[p]) {
                (Some(true), _) => count += 1,
                (Some(false), _) | (None, None) => {}
                (None, Some(pe)) => {
                    let pd = a.mul(pe, &cs.delta);
                    let grow = a.mul(&prod_u, &pd);
                    prod_u = a.add(&prod_u, &grow);
                    if cs.one_minus_delta.is_some() {
                        let drop = a.mul(&prod_l, &pd);
                        prod_l = a.sub(&prod_l, &drop);
                    }
                }
            }
        }
        let count = a.from_u128(count);
        // e^{t^u (count - (1+δ)μ)}
        let (neg, mag) = a.signed_diff(&count, &cs.upper_mean);
        let arg = a.mul(&cs.t_upper, &mag);
        let eu = a.exp_signed(neg, &arg);
        let upper = a.mul(&eu, &prod_u);
        let lower = match (&cs.t_lower, &cs.lower_mean) {
            (Some(tl), Some(lm)) => {
                // e^{t^l ((1-δ)μ - count)}
                let (neg, mag) = a.signed_diff(lm, &count);
                let arg = a.mul(tl, &mag);
                let el = a.exp_signed(neg, &arg);
                Some(a.mul(&el, &prod_l))
            }
            _ => None,
        };
        (upper, lower)
    }

    /// New `(upper, lower)` of class `c` if the remainder piece of an edge with
    /// probability `p` is set to `x`.
    fn updated_terms(&mut self, c: usize, p: &Real, x: bool) -> (Real, Option<Real>) {
        let a = &mut self.arith;
        let cs = self.classes[c].as_ref().unwrap();
        let one = a.one();
        let pd = a.mul(p, &cs.delta);
        let den_u = a.add(&one, &pd);
        let mut upper = a.div(&cs.upper, &den_u);
        if x {
            upper = a.mul(&upper, &cs.one_plus_delta);
        }
        let lower = match (&cs.lower, &cs.one_minus_delta) {
            (Some(l), Some(omd)) => {
                let den_l = a.sub(&one, &pd);
                let mut v = a.div(l, &den_l);
                if x {
                    v = a.mul(&v, omd);
                }
                Some(v)
            }
            _ => None,
        };
        (upper, lower)
    }

    fn hypothetical(&mut self, pos: usize, x: bool) -> (Fixed, Vec<(usize, Real, Option<Real>, Fixed)>) {
        let mut sum = Fixed::zero();
        let mut updates = Vec::new();
        let p = match self.remainder[pos].clone() {
            Some(p) => p,
            None => return (sum, updates),
        };
        for c in self.membership[pos].clone() {
            let (u, l) = self.updated_terms(c, &p, x);
            let v = self.fixed_of(&u, l.as_ref());
            sum.0 += &v.0;
            updates.push((c, u, l, v));
        }
        (sum, updates)
    }

    fn old_sum(&self, pos: usize) -> Fixed {
        let mut s = Fixed::zero();
        for &c in &self.membership[pos] {
            s.0 += &self.classes[c].as_ref().unwrap().value.0;
        }
        s
    }

    /// `Φ` after hypothetically fixing the remainder piece of edge position
    /// `pos` to `x`; nothing is changed.
    pub fn conditional_phi(&mut self, pos: usize, x: bool) -> Result<f64, UnbalancedError> {
        self.check_undecided(pos)?;
        if self.remainder[pos].is_none() {
            // p ∈ {0, 1}: the piece is already determined, Φ is unchanged.
            return Ok(self.phi());
        }
        let (new, _) = self.hypothetical(pos, x);
        let old = self.old_sum(pos);
        Ok(Fixed(&self.phi.0 - old.0 + new.0).to_f64(self.frac_bits))
    }

    fn check_undecided(&self, pos: usize) -> Result<(), UnbalancedError> {
        match self.decided.get(pos) {
            None => Err(UnbalancedError::UnknownEdge(pos)),
            Some(Some(_)) => Err(UnbalancedError::AlreadyDecided(pos)),
            Some(None) => Ok(()),
        }
    }

    /// Fix `X_e` for edge position `pos` to the value giving the smaller `Φ`
    /// (0 on ties) and return it.
    pub fn decide(&mut self, pos: usize) -> Result<bool, UnbalancedError> {
        self.check_undecided(pos)?;
        let x = if self.remainder[pos].is_none() {
            self.decided[pos] = Some(false);
            false
        } else {
            let (s0, up0) = self.hypothetical(pos, false);
            let (s1, up1) = self.hypothetical(pos, true);
            let (x, sum, ups) = if s1.0 < s0.0 { (true, s1, up1) } else { (false, s0, up0) };
            let old = self.old_sum(pos);
            let delta = Fixed(&sum.0 - &old.0);
            if delta.0 > num_bigint::BigInt::from(0) {
                self.max_increase = self.max_increase.max(delta.to_f64(self.frac_bits));
            }
            self.phi.0 += delta.0;
            for (c, u, l, v) in ups {
                let cs = self.classes[c].as_mut().unwrap();
                cs.upper = u;
                cs.lower = l;
                cs.value = v;
            }
            self.decided[pos] = Some(x);
            x
        };
        self.decisions.push(self.phi());
        Ok(x)
    }

    pub fn phi(&self) -> f64 {
        self.phi.to_f64(self.frac_bits)
    }

    pub fn initial_phi(&self) -> f64 {
        self.initial.to_f64(self.frac_bits)
    }

    /// `Φ` recomputed term by term from the decisions so far.
    pub fn recompute_phi(&mut self) -> f64 {
        let mut total = Fixed::zero();
        for c in 0..self.classes.len() {
            if self.classes[c].is_none() {
                continue;
            }
            let (u, l) = self.class_terms(c);
            total.0 += self.fixed_of(&u, l.as_ref()).0;
        }
        total.to_f64(self.frac_bits)
    }

    /// Worst-case absolute error of the maintained `Φ`.
    pub fn error_budget(&self) -> f64 {
        self.arith.error_budget() + self.conversions as f64 * 2f64.powi(-(self.frac_bits as i32))
    }

    pub fn decided_count(&self) -> usize {
        self.decided.iter().filter(|d| d.is_some()).count()
    }

    pub fn finish(self) -> Result<UnbalancedSkeleton, UnbalancedError> {
        if let Some(pos) = self.decided.iter().position(|d| d.is_none()) {
            return Err(UnbalancedError::Undecided(pos));
        }
        let budget = self.error_budget();
        if budget > 0.5 {
            return Err(UnbalancedError::PrecisionBudget { budget, bits: self.arith.bits() });
        }
        let multiplicity: Vec<u64> =
            self.forced.iter().zip(&self.decided).map(|(&k, d)| k + d.unwrap() as u64).collect();
        let mut b = GraphBuilder::new(self.g.vertex_count());
        for (e, &mlt) in self.g.edges().iter().zip(&multiplicity) {
            if mlt > 0 {
                b.add_edge_with_id(e.id, e.u, e.v, mlt)?;
            }
        }
        let trace = PhiTrace {
            initial: self.initial_phi(),
            final_phi: self.phi(),
            decisions: self.decisions,
            max_increase: self.max_increase,
            error_budget: budget,
            precision_bits: self.arith.bits(),
            lower_terms_dropped: self.lower_dropped,
        };
        Ok(UnbalancedSkeleton { h_hat: b.build()?, weight: self.params.weight, multiplicity, trace })
    }
}

/// Decide every edge in ascending id order.
pub fn derandomized_sample(
    g: &WeightedMultigraph,
    index: &EdgeClassIndex,
    params: &SampleParams,
) -> Result<UnbalancedSkeleton, UnbalancedError> {
    let mut st = EstimatorState::new(g, index, params)?;
    for pos in 0..g.edge_count() {
        st.decide(pos)?;
    }
    st.finish()
}
