//! Propagation rules, rule strategy, clash detection and the backtracking
//! completion search.
//!
//! Rules are applied under a fixed strategy: objects are processed in order
//! (individuals first, then variables by creation index), and on each object
//! nongenerating rules come before the generating `exists`/`atleast` rules.
//! Generating rules never fire on a blocked variable, which is what keeps
//! the search finite under cyclic inclusions.
//!
//! The search is depth-first. Deterministic rules are applied in place; `or`
//! and `atmost` open a branch point whose choices are tried in canonical
//! order. The system is checked for a clash after every application.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::constraint_system::{Constraint, ConstraintSystem, Object};
use crate::syntax::{Concept, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    And,
    Or,
    ForAll,
    Exists,
    AtLeast,
    AtMost,
    UniversalX,
}

impl RuleKind {
    pub fn is_generating(self) -> bool {
        matches!(self, RuleKind::Exists | RuleKind::AtLeast)
    }

    pub fn is_deterministic(self) -> bool {
        !matches!(self, RuleKind::Or | RuleKind::AtMost)
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::And => "and",
            RuleKind::Or => "or",
            RuleKind::ForAll => "forall",
            RuleKind::Exists => "exists",
            RuleKind::AtLeast => "atleast",
            RuleKind::AtMost => "atmost",
            RuleKind::UniversalX => "forall-x",
        })
    }
}

/// One way a rule can fire on the current system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub kind: RuleKind,
    pub object: Object,
    /// The member or universal concept that triggers the rule.
    pub concept: Concept,
    /// For `forall`: the successor receiving the value restriction.
    pub successor: Option<Object>,
    /// For `atmost`: candidate `(replaced variable, kept object)` pairs.
    pub merges: Vec<(Object, Object)>,
}

impl RuleInstance {
    fn new(kind: RuleKind, object: &Object, concept: &Concept) -> Self {
        RuleInstance {
            kind,
            object: object.clone(),
            concept: concept.clone(),
            successor: None,
            merges: Vec::new(),
        }
    }

    /// Number of alternatives; 1 for deterministic rules.
    pub fn choice_count(&self) -> usize {
        match self.kind {
            RuleKind::Or => 2,
            RuleKind::AtMost => self.merges.len(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClashKind {
    BottomMember,
    ComplementPair,
    NumberViolation,
}

impl fmt::Display for ClashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClashKind::BottomMember => "bottom",
            ClashKind::ComplementPair => "complement",
            ClashKind::NumberViolation => "number",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClashReport {
    pub kind: ClashKind,
    pub object: Object,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("rule instance is not applicable to this system")]
    NotApplicable,
    #[error("choice {choice} is out of range for a rule with {count} alternative(s)")]
    InvalidChoice { choice: usize, count: usize },
}

/// Which resource guard stopped the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    Variables(u32),
    Constraints(usize),
    Branches(u64),
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Variables(n) => write!(
                f,
                "variable guard ({n}) exceeded; completions can be exponentially large in the \
                 knowledge-base size n (up to O(2^(4n)) constraints), raise --max-vars"
            ),
            Guard::Constraints(n) => write!(f, "constraint guard ({n}) exceeded, raise --max-constraints"),
            Guard::Branches(n) => write!(f, "branch guard ({n}) exceeded, raise --max-branches"),
        }
    }
}

/// Resource limits and instrumentation switches for [`complete`].
#[derive(Debug, Clone, Copy)]
pub struct Guards {
    pub max_vars: u32,
    pub max_constraints: usize,
    pub max_branches: u64,
    /// Keep only the last N trace events; `None` keeps everything.
    pub trace_capacity: Option<usize>,
    /// Assert the stability, blocking and size invariants at every step.
    pub check_invariants: bool,
    /// On a clash, jump back to the newest branch point the clash depends
    /// on instead of the newest one overall. Skips only alternatives that
    /// would fail the same way, so verdicts and models are unchanged.
    pub backjumping: bool,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_vars: 20_000,
            max_constraints: 2_000_000,
            max_branches: 1_000_000,
            trace_capacity: Some(10_000),
            check_invariants: cfg!(debug_assertions),
            backjumping: true,
        }
    }
}

// ---------------------------------------------------------------------------
// Rule applicability

/// Finds `k` pairwise separated objects among `candidates`, if they exist.
pub(crate) fn find_separated(s: &ConstraintSystem, candidates: &[Object], k: usize) -> Option<Vec<Object>> {
    if k == 0 {
        return Some(Vec::new());
    }
    if candidates.len() < k {
        return None;
    }
    // greedy pass first; it settles the common all-separated case
    let mut greedy: Vec<Object> = Vec::new();
    for c in candidates {
        if greedy.iter().all(|g| s.separated(g, c)) {
            greedy.push(c.clone());
            if greedy.len() == k {
                return Some(greedy);
            }
        }
    }
    fn extend(s: &ConstraintSystem, cands: &[Object], k: usize, start: usize, acc: &mut Vec<Object>) -> bool {
        if acc.len() == k {
            return true;
        }
        for i in start..cands.len() {
            if cands.len() - i < k - acc.len() {
                return false;
            }
            if acc.iter().all(|a| s.separated(a, &cands[i])) {
                acc.push(cands[i].clone());
                if extend(s, cands, k, i + 1, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }
    let mut acc = Vec::new();
    extend(s, candidates, k, 0, &mut acc).then_some(acc)
}

fn as_count(n: u64) -> usize {
    usize::try_from(n).unwrap_or(usize::MAX)
}

fn merge_candidates(s: &ConstraintSystem, succ: &[Object]) -> Vec<(Object, Object)> {
    let mut pairs = Vec::new();
    for (i, a) in succ.iter().enumerate() {
        for b in &succ[i + 1..] {
            if s.separated(a, b) {
                continue;
            }
            // replace the later variable, keep the other object
            let (y, t) = match (a.is_var(), b.is_var()) {
                (false, false) => continue,
                (true, false) => (a, b),
                (false, true) => (b, a),
                (true, true) => {
                    if a > b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                }
            };
            pairs.push((y.clone(), t.clone()));
        }
    }
    pairs.sort();
    pairs
}

fn number_violation(s: &ConstraintSystem, o: &Object, n: u64, r: &Role) -> Option<Vec<Object>> {
    let succ = s.r_successors(o, r);
    let need = as_count(n).checked_add(1)?;
    if succ.len() < need {
        return None;
    }
    find_separated(s, &succ, need)
}

/// What the strategy finds on one object: its applicable instances in
/// priority order, plus the witness when generating rules were suppressed by
/// blocking.
struct ObjectScan {
    instances: Vec<RuleInstance>,
    blocked_by: Option<Object>,
}

fn scan_object(s: &ConstraintSystem, o: &Object) -> ObjectScan {
    let sigma = s.sigma(o);
    let mut out = Vec::new();

    for c in sigma {
        if let Concept::All(r, d) = c {
            for t in s.r_successors(o, r) {
                if !s.has_member(&t, d) {
                    let mut inst = RuleInstance::new(RuleKind::ForAll, o, c);
                    inst.successor = Some(t);
                    out.push(inst);
                }
            }
        }
    }
    for u in s.universals() {
        if !sigma.contains(u) {
            out.push(RuleInstance::new(RuleKind::UniversalX, o, u));
        }
    }
    for c in sigma {
        if let Concept::And(a, b) = c {
            if !(sigma.contains(a) && sigma.contains(b)) {
                out.push(RuleInstance::new(RuleKind::And, o, c));
            }
        }
    }
    for c in sigma {
        if let Concept::Or(a, b) = c {
            if !sigma.contains(a) && !sigma.contains(b) {
                out.push(RuleInstance::new(RuleKind::Or, o, c));
            }
        }
    }
    for c in sigma {
        if let Concept::AtMost(n, r) = c {
            let succ = s.r_successors(o, r);
            if succ.len() as u64 > *n {
                let merges = merge_candidates(s, &succ);
                if !merges.is_empty() {
                    let mut inst = RuleInstance::new(RuleKind::AtMost, o, c);
                    inst.merges = merges;
                    out.push(inst);
                }
            }
        }
    }

    let mut generating = Vec::new();
    for c in sigma {
        match c {
            Concept::Some(r, d) => {
                if !s.r_successors(o, r).iter().any(|t| s.has_member(t, d)) {
                    generating.push(RuleInstance::new(RuleKind::Exists, o, c));
                }
            }
            Concept::AtLeast(n, r) => {
                let succ = s.r_successors(o, r);
                if find_separated(s, &succ, as_count(*n)).is_none() {
                    generating.push(RuleInstance::new(RuleKind::AtLeast, o, c));
                }
            }
            _ => {}
        }
    }
    let mut blocked_by = None;
    if !generating.is_empty() {
        match s.witness(o) {
            Some(w) => blocked_by = Some(w),
            None => out.extend(generating),
        }
    }
    ObjectScan {
        instances: out,
        blocked_by,
    }
}

/// All applicable rule instances in strategy order. Empty iff the system is
/// complete.
pub fn applicable_rule_instances(s: &ConstraintSystem) -> Vec<RuleInstance> {
    s.objects().iter().flat_map(|o| scan_object(s, o).instances).collect()
}

/// The first object with work to do, its first instance, and the blocking
/// events seen on objects scanned before it.
fn next_instance(s: &ConstraintSystem) -> (Option<RuleInstance>, Vec<(Object, Object)>) {
    let mut blocks = Vec::new();
    for o in s.objects() {
        let scan = scan_object(s, o);
        if let Some(w) = scan.blocked_by {
            blocks.push((o.clone(), w));
        }
        if let Some(first) = scan.instances.into_iter().next() {
            return (Some(first), blocks);
        }
    }
    (None, blocks)
}

/// Outcome of one rule application, for the trace.
#[derive(Debug, Clone, Default)]
struct Effect {
    added: Vec<Constraint>,
    subst: Option<(Object, Object)>,
}

fn apply_unchecked(s: &mut ConstraintSystem, inst: &RuleInstance, choice: usize) -> Effect {
    let mut fx = Effect::default();
    let o = &inst.object;
    let member = |s: &mut ConstraintSystem, t: &Object, c: &Concept, fx: &mut Effect| {
        if s.add_member(t.clone(), c.clone()) {
            fx.added.push(Constraint::Member(t.clone(), c.clone()));
        }
    };
    match (&inst.kind, &inst.concept) {
        (RuleKind::And, Concept::And(a, b)) => {
            member(s, o, a, &mut fx);
            member(s, o, b, &mut fx);
        }
        (RuleKind::Or, Concept::Or(a, b)) => {
            let d = if choice == 0 { a } else { b };
            member(s, o, d, &mut fx);
        }
        (RuleKind::ForAll, Concept::All(_, d)) => {
            let t = inst.successor.as_ref().expect("forall instance has a successor");
            member(s, t, d, &mut fx);
        }
        (RuleKind::UniversalX, c) => member(s, o, c, &mut fx),
        (RuleKind::Exists, Concept::Some(r, d)) => {
            let y = s.fresh_var();
            for p in r.names() {
                s.add_link(o.clone(), p.clone(), y.clone());
                fx.added.push(Constraint::RoleLink(o.clone(), p.clone(), y.clone()));
            }
            member(s, &y, d, &mut fx);
        }
        (RuleKind::AtLeast, Concept::AtLeast(n, r)) => {
            let fresh: Vec<Object> = (0..*n).map(|_| s.fresh_var()).collect();
            for y in &fresh {
                for p in r.names() {
                    s.add_link(o.clone(), p.clone(), y.clone());
                    fx.added.push(Constraint::RoleLink(o.clone(), p.clone(), y.clone()));
                }
            }
            for (i, a) in fresh.iter().enumerate() {
                for b in &fresh[i + 1..] {
                    s.add_distinct(a.clone(), b.clone());
                    fx.added.push(Constraint::distinct(a.clone(), b.clone()));
                }
            }
        }
        (RuleKind::AtMost, _) => {
            let (y, t) = &inst.merges[choice];
            s.substitute_in_place(y, t)
                .expect("merge candidates are unseparated and y is a variable");
            fx.subst = Some((y.clone(), t.clone()));
        }
        (kind, c) => unreachable!("malformed {kind} instance on {c}"),
    }
    fx
}

/// Applies one rule instance, with `choice` selecting the disjunct (for
/// `or`) or the merge pair (for `atmost`).
pub fn apply_rule_instance(
    s: &ConstraintSystem,
    inst: &RuleInstance,
    choice: usize,
) -> Result<ConstraintSystem, TableauError> {
    if !applicable_rule_instances(s).contains(inst) {
        return Err(TableauError::NotApplicable);
    }
    let count = inst.choice_count();
    if choice >= count {
        return Err(TableauError::InvalidChoice { choice, count });
    }
    let mut out = s.clone();
    apply_unchecked(&mut out, inst, choice);
    Ok(out)
}

/// Reports the first clash found, scanning objects in order.
pub fn detect_clash(s: &ConstraintSystem) -> Option<ClashReport> {
    for o in s.objects() {
        let sigma = s.sigma(o);
        if sigma.contains(&Concept::Bottom) {
            return Some(ClashReport {
                kind: ClashKind::BottomMember,
                object: o.clone(),
                constraints: vec![Constraint::Member(o.clone(), Concept::Bottom)],
            });
        }
        for c in sigma {
            if let Concept::Not(a) = c {
                if sigma.contains(a) {
                    return Some(ClashReport {
                        kind: ClashKind::ComplementPair,
                        object: o.clone(),
                        constraints: vec![
                            Constraint::Member(o.clone(), (**a).clone()),
                            Constraint::Member(o.clone(), c.clone()),
                        ],
                    });
                }
            }
        }
        for c in sigma {
            if let Concept::AtMost(n, r) = c {
                if let Some(witnesses) = number_violation(s, o, *n, r) {
                    let mut constraints = vec![Constraint::Member(o.clone(), c.clone())];
                    for (i, t) in witnesses.iter().enumerate() {
                        for p in r.names() {
                            constraints.push(Constraint::RoleLink(o.clone(), p.clone(), t.clone()));
                        }
                        for u in &witnesses[i + 1..] {
                            if t != u {
                                constraints.push(Constraint::distinct(t.clone(), u.clone()));
                            }
                        }
                    }
                    return Some(ClashReport {
                        kind: ClashKind::NumberViolation,
                        object: o.clone(),
                        constraints,
                    });
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Trace

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// The input system already contains a clash.
    Initial {
        clash: ClashKind,
    },
    Apply {
        step: u64,
        rule: RuleKind,
        object: Object,
        concept: Concept,
        choice: Option<(usize, usize)>,
        added: Vec<Constraint>,
        subst: Option<(Object, Object)>,
        clash: Option<ClashKind>,
    },
    Block {
        step: u64,
        var: Object,
        witness: Object,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Initial { clash } => write!(f, "step 0: initial | clash: {clash}"),
            TraceEvent::Apply {
                step,
                rule,
                object,
                concept,
                choice,
                added,
                subst,
                clash,
            } => {
                write!(f, "step {step}: {rule} on {object} : {concept}")?;
                if let Some((i, k)) = choice {
                    write!(f, " choice {i}/{k}")?;
                }
                if !added.is_empty() {
                    let items: Vec<String> = added.iter().map(|c| c.to_string()).collect();
                    write!(f, " | added: {}", items.join("; "))?;
                }
                if let Some((y, t)) = subst {
                    write!(f, " | subst: {y} -> {t}")?;
                }
                if let Some(k) = clash {
                    write!(f, " | clash: {k}")?;
                }
                Ok(())
            }
            TraceEvent::Block { step, var, witness } => write!(f, "step {step}: block on {var} | witness: {witness}"),
        }
    }
}

/// Derivation log; keeps the most recent events when bounded.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    events: VecDeque<TraceEvent>,
    capacity: Option<usize>,
    dropped: u64,
}

impl Trace {
    pub fn new(capacity: Option<usize>) -> Self {
        Trace {
            events: VecDeque::new(),
            capacity,
            dropped: 0,
        }
    }

    fn push(&mut self, e: TraceEvent) {
        if let Some(cap) = self.capacity {
            if cap == 0 {
                self.dropped += 1;
                return;
            }
            if self.events.len() == cap {
                self.events.pop_front();
                self.dropped += 1;
            }
        }
        self.events.push_back(e);
    }

    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter()
    }

    /// Events discarded by the ring buffer.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.dropped > 0 {
            out.push_str(&format!("... {} earlier events dropped\n", self.dropped));
        }
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Search

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub steps: u64,
    /// Alternatives tried at branch points.
    pub branches: u64,
    pub backtracks: u64,
    pub variables_created: u64,
    pub blocking_events: u64,
    /// `n_S` of the input system.
    pub n_s: usize,
    /// Largest non-blocked variable count seen (every step when invariants
    /// are checked, otherwise at completion).
    pub max_non_blocked: usize,
}

impl SearchStats {
    /// `2^n_S`, saturating.
    pub fn non_blocked_bound(&self) -> u128 {
        1u128.checked_shl(self.n_s as u32).unwrap_or(u128::MAX)
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Satisfiable(ConstraintSystem),
    Unsatisfiable,
    ResourceExceeded(Guard),
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub outcome: Outcome,
    pub trace: Trace,
    pub stats: SearchStats,
}

impl Completion {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self.outcome, Outcome::Satisfiable(_))
    }
}

/// Branch points (by stack depth) a constraint depends on.
type Deps = BTreeSet<usize>;

/// One search branch: the system plus the bookkeeping needed for
/// backjumping, the per-branch invariant checks and trace deduplication.
#[derive(Clone)]
struct Node {
    system: ConstraintSystem,
    // constraints absent from the map depend on no branch point
    deps: BTreeMap<Constraint, Deps>,
    // branch points a variable's existence depends on
    created: BTreeMap<Object, Deps>,
    // variables a generating rule fired on, with their label at that moment
    generated: BTreeMap<Object, BTreeSet<Concept>>,
    reported_blocks: BTreeSet<Object>,
}

impl Node {
    fn deps_of(&self, c: &Constraint) -> Deps {
        self.deps.get(c).cloned().unwrap_or_default()
    }

    fn link_deps(&self, from: &Object, r: &Role, to: &Object, acc: &mut Deps) {
        for p in r.names() {
            acc.extend(self.deps_of(&Constraint::RoleLink(from.clone(), p.clone(), to.clone())));
        }
    }

    fn record(&mut self, added: &[Constraint], deps: &Deps) {
        if deps.is_empty() {
            return;
        }
        for c in added {
            self.deps.entry(c.clone()).or_default().extend(deps.iter().copied());
        }
    }

    /// Dependencies of what `inst` is about to add, given the branch point
    /// `level` for nondeterministic rules.
    fn rule_deps(&self, inst: &RuleInstance, level: Option<usize>) -> Deps {
        let o = &inst.object;
        let mut d = match inst.kind {
            RuleKind::UniversalX => self.created.get(o).cloned().unwrap_or_default(),
            _ => self.deps_of(&Constraint::Member(o.clone(), inst.concept.clone())),
        };
        match (&inst.kind, &inst.concept) {
            (RuleKind::ForAll, Concept::All(r, _)) => {
                let t = inst.successor.as_ref().expect("forall instance has a successor");
                self.link_deps(o, r, t, &mut d);
            }
            (RuleKind::AtMost, Concept::AtMost(_, r)) => {
                for (y, t) in &inst.merges {
                    self.link_deps(o, r, y, &mut d);
                    self.link_deps(o, r, t, &mut d);
                }
            }
            _ => {}
        }
        d.extend(level);
        d
    }

    /// Carries dependencies across the substitution of `y` by `t`.
    fn rename(&mut self, y: &Object, t: &Object, merge: &Deps) {
        let swap = |o: &Object| if o == y { t.clone() } else { o.clone() };
        let old = std::mem::take(&mut self.deps);
        for (c, d) in old {
            let (c2, touched) = match &c {
                Constraint::Member(o, k) => (Constraint::Member(swap(o), k.clone()), o == y),
                Constraint::RoleLink(a, p, b) => (Constraint::RoleLink(swap(a), p.clone(), swap(b)), a == y || b == y),
                Constraint::Distinct(a, b) => (Constraint::distinct(swap(a), swap(b)), a == y || b == y),
                Constraint::Universal(_) => (c.clone(), false),
            };
            let e = self.deps.entry(c2).or_default();
            e.extend(d);
            if touched {
                e.extend(merge.iter().copied());
            }
        }
        // constraints that only existed on y pick up the merge dependencies
        for c in self.system.constraints() {
            let mentions_t = match &c {
                Constraint::Member(o, _) => o == t,
                Constraint::RoleLink(a, _, b) | Constraint::Distinct(a, b) => a == t || b == t,
                Constraint::Universal(_) => false,
            };
            if mentions_t && !merge.is_empty() && !self.deps.contains_key(&c) {
                self.deps.insert(c, merge.clone());
            }
        }
        self.created.remove(y);
    }

    fn clash_deps(&self, clash: &ClashReport) -> Deps {
        let mut d = self.created.get(&clash.object).cloned().unwrap_or_default();
        for c in &clash.constraints {
            d.extend(self.deps_of(c));
        }
        d
    }
}

struct Frame {
    // taken when the last alternative starts
    node: Option<Node>,
    inst: RuleInstance,
    next: usize,
    // union of the clash dependencies of the failed alternatives
    failed: Deps,
}

struct Searcher {
    guards: Guards,
    trace: Trace,
    stats: SearchStats,
}

enum Advance {
    /// Reached a branch point.
    Branch(Box<Node>, RuleInstance),
    /// Clash, with the branch points it depends on.
    Dead(Deps),
    Done(ConstraintSystem),
    Stop(Guard),
}

impl Searcher {
    fn check_stability(&self, node: &Node, inst: &RuleInstance) {
        if let Some((last, _)) = node.generated.iter().next_back() {
            assert!(
                inst.object.is_var() && inst.object >= *last,
                "strategy violated: {} rule on {} after a generating rule on {}",
                inst.kind,
                inst.object,
                last
            );
        }
    }

    fn check_after(&mut self, node: &Node) {
        let s = &node.system;
        for (x, label) in &node.generated {
            assert!(s.objects().contains(x), "generated variable {x} was substituted away");
            assert_eq!(
                s.sigma(x),
                label,
                "label of {x} changed after a generating rule fired on it"
            );
        }
        let nb = s.non_blocked_count();
        self.stats.max_non_blocked = self.stats.max_non_blocked.max(nb);
        assert!(
            (nb as u128) <= self.stats.non_blocked_bound(),
            "{nb} non-blocked variables exceed 2^{}",
            self.stats.n_s
        );
    }

    fn check_complete(&self, s: &ConstraintSystem) {
        for v in s.variables() {
            if let Some(w) = s.witness(v) {
                assert!(!s.has_successors(v), "blocked variable {v} has successors");
                assert!(s.witness(&w).is_none(), "witness {w} of {v} is itself blocked");
            }
        }
    }

    /// Runs deterministic rules until a branch point, a clash, or completion.
    /// `choice` is an alternative of the branch point at depth `level`.
    fn advance(&mut self, mut node: Node, choice: Option<(usize, RuleInstance, usize)>) -> Advance {
        let mut pending = choice;
        loop {
            let (inst, choice_idx, level) = match pending.take() {
                Some((i, inst, level)) => (inst, i, Some(level)),
                None => {
                    let (next, blocks) = next_instance(&node.system);
                    for (var, witness) in blocks {
                        if node.reported_blocks.insert(var.clone()) {
                            self.stats.blocking_events += 1;
                            self.trace.push(TraceEvent::Block {
                                step: self.stats.steps,
                                var,
                                witness,
                            });
                        }
                    }
                    match next {
                        None => {
                            if self.guards.check_invariants {
                                self.check_complete(&node.system);
                            }
                            let nb = node.system.non_blocked_count();
                            self.stats.max_non_blocked = self.stats.max_non_blocked.max(nb);
                            return Advance::Done(node.system);
                        }
                        Some(inst) if !inst.kind.is_deterministic() => {
                            return Advance::Branch(Box::new(node), inst);
                        }
                        Some(inst) => (inst, 0, None),
                    }
                }
            };

            if self.guards.check_invariants {
                self.check_stability(&node, &inst);
            }
            let new_vars = match (&inst.kind, &inst.concept) {
                (RuleKind::Exists, _) => 1,
                (RuleKind::AtLeast, Concept::AtLeast(n, _)) => *n,
                _ => 0,
            };
            if new_vars > 0 && node.system.allocated_vars() as u64 + new_vars > self.guards.max_vars as u64 {
                return Advance::Stop(Guard::Variables(self.guards.max_vars));
            }
            let objects_before = node.system.objects().len();
            let len_before = node.system.len();
            let first_new = node.system.allocated_vars();
            let deps = if self.guards.backjumping {
                node.rule_deps(&inst, level)
            } else {
                Deps::new()
            };

            self.stats.steps += 1;
            let fx = apply_unchecked(&mut node.system, &inst, choice_idx);
            self.stats.variables_created += new_vars;
            if self.guards.backjumping {
                node.record(&fx.added, &deps);
                if let Some((y, t)) = &fx.subst {
                    node.rename(y, t, &deps);
                }
                if !deps.is_empty() {
                    for v in first_new..node.system.allocated_vars() {
                        node.created.insert(Object::Var(v), deps.clone());
                    }
                }
            }
            if inst.kind.is_generating() && inst.object.is_var() {
                node.generated
                    .insert(inst.object.clone(), node.system.sigma(&inst.object).clone());
            }
            if self.guards.check_invariants {
                if inst.kind == RuleKind::AtMost {
                    assert!(
                        node.system.objects().len() < objects_before,
                        "atmost did not merge objects"
                    );
                } else {
                    assert!(node.system.len() > len_before, "{} rule added nothing", inst.kind);
                }
                self.check_after(&node);
            }
            let clash = detect_clash(&node.system);
            let count = inst.choice_count();
            self.trace.push(TraceEvent::Apply {
                step: self.stats.steps,
                rule: inst.kind,
                object: inst.object.clone(),
                concept: inst.concept.clone(),
                choice: (!inst.kind.is_deterministic()).then_some((choice_idx + 1, count)),
                added: fx.added,
                subst: fx.subst,
                clash: clash.as_ref().map(|c| c.kind),
            });
            if let Some(clash) = clash {
                return Advance::Dead(node.clash_deps(&clash));
            }
            if node.system.len() > self.guards.max_constraints {
                return Advance::Stop(Guard::Constraints(self.guards.max_constraints));
            }
        }
    }
}

/// Searches for a complete clash-free system derivable from `s`.
pub fn complete(s: &ConstraintSystem, guards: &Guards) -> Completion {
    let mut searcher = Searcher {
        guards: *guards,
        trace: Trace::new(guards.trace_capacity),
        stats: SearchStats {
            n_s: s.measure().n_s,
            ..SearchStats::default()
        },
    };
    let finish = |searcher: Searcher, outcome| Completion {
        outcome,
        trace: searcher.trace,
        stats: searcher.stats,
    };

    if let Some(clash) = detect_clash(s) {
        searcher.trace.push(TraceEvent::Initial { clash: clash.kind });
        return finish(searcher, Outcome::Unsatisfiable);
    }

    let mut stack: Vec<Frame> = Vec::new();
    let mut current = Some((
        Node {
            system: s.clone(),
            deps: BTreeMap::new(),
            created: BTreeMap::new(),
            generated: BTreeMap::new(),
            reported_blocks: BTreeSet::new(),
        },
        None,
    ));

    loop {
        let mut blame = None;
        if let Some((node, choice)) = current.take() {
            match searcher.advance(node, choice) {
                Advance::Done(sys) => return finish(searcher, Outcome::Satisfiable(sys)),
                Advance::Stop(g) => return finish(searcher, Outcome::ResourceExceeded(g)),
                Advance::Branch(node, inst) => {
                    stack.push(Frame {
                        node: Some(*node),
                        inst,
                        next: 0,
                        failed: Deps::new(),
                    });
                }
                Advance::Dead(d) => {
                    searcher.stats.backtracks += 1;
                    // without backjumping every open branch point is blamed
                    blame = Some(if guards.backjumping {
                        d
                    } else {
                        (0..stack.len()).collect()
                    });
                }
            }
        }
        // unwind to the innermost branch point the failure depends on and
        // take its next alternative
        loop {
            let level = stack.len().wrapping_sub(1);
            let Some(frame) = stack.last_mut() else {
                return finish(searcher, Outcome::Unsatisfiable);
            };
            if let Some(d) = blame.take() {
                if !d.contains(&level) {
                    // this branch point played no part: skip its alternatives
                    stack.pop();
                    blame = Some(d);
                    continue;
                }
                frame.failed.extend(d.into_iter().filter(|&l| l != level));
            }
            if frame.next < frame.inst.choice_count() {
                searcher.stats.branches += 1;
                if searcher.stats.branches > searcher.guards.max_branches {
                    let g = Guard::Branches(searcher.guards.max_branches);
                    return finish(searcher, Outcome::ResourceExceeded(g));
                }
                let choice = frame.next;
                frame.next += 1;
                let node = if frame.next == frame.inst.choice_count() {
                    frame.node.take().expect("node kept until the last alternative")
                } else {
                    frame.node.clone().expect("node kept until the last alternative")
                };
                current = Some((node, Some((choice, frame.inst.clone(), level))));
                break;
            }
            let frame = stack.pop().expect("nonempty");
            blame = Some(frame.failed);
        }
    }
}
