//! Rule machinery shared by classification and consistency checking.
//!
//! Three flavors cover every use in the pipelines:
//!
//! * [`LabelRules`] — ordered first-match classification: the first rule
//!   whose predicate accepts the subject supplies the label (and any
//!   attached properties).
//! * [`RuleSet`] — consistency rules over a single subject: each rule has an
//!   applicability test and a verdict; evaluation is deterministic, first
//!   matching rule first.
//! * [`PairRules`] — the same over ordered pairs of subjects.
//! * [`ClassRules`] — first-match labeling of node classes inside a graph,
//!   where rules see the class members together with the full graph.

use std::fmt;

use crate::ngraph::NGraph;
use crate::object::Props;

type Pred<S> = Box<dyn Fn(&S) -> bool + Send + Sync>;
type PairPred<S> = Box<dyn Fn(&S, &S) -> bool + Send + Sync>;

/// A named first-match classification rule.
pub struct LabelRule<S: ?Sized> {
    name: String,
    props: Props,
    pred: Pred<S>,
}

impl<S> LabelRule<S> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn props(&self) -> &Props {
        &self.props
    }
}

/// An ordered list of classification rules; the first whose predicate
/// accepts the subject wins.
pub struct LabelRules<S: ?Sized> {
    rules: Vec<LabelRule<S>>,
}

impl<S> Default for LabelRules<S> {
    fn default() -> Self {
        LabelRules { rules: Vec::new() }
    }
}

impl<S> LabelRules<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(
        mut self,
        name: &str,
        pred: impl Fn(&S) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.rules.push(LabelRule {
            name: name.into(),
            props: Props::new(),
            pred: Box::new(pred),
        });
        self
    }

    /// Like [`LabelRules::rule`], additionally attaching properties that the
    /// match carries along (e.g. a flag explaining the label).
    pub fn rule_with_props(
        mut self,
        name: &str,
        props: Props,
        pred: impl Fn(&S) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.rules.push(LabelRule {
            name: name.into(),
            props,
            pred: Box::new(pred),
        });
        self
    }

    pub fn first_match(&self, subject: &S) -> Option<&LabelRule<S>> {
        self.rules.iter().find(|r| (r.pred)(subject))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl<S> fmt::Debug for LabelRules<S> {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_list()
            .entries(self.rules.iter().map(|r| &r.name))
            .finish()
    }
}

/// A consistency rule: an applicability test plus a verdict, both over the
/// same subject.
pub struct Rule<S: ?Sized> {
    name: String,
    applies: Pred<S>,
    verdict: Pred<S>,
}

impl<S> Rule<S> {
    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Ordered consistency rules over a single subject.
pub struct RuleSet<S: ?Sized> {
    rules: Vec<Rule<S>>,
}

impl<S> Default for RuleSet<S> {
    fn default() -> Self {
        RuleSet { rules: Vec::new() }
    }
}

impl<S> RuleSet<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(
        mut self,
        name: &str,
        applies: impl Fn(&S) -> bool + Send + Sync + 'static,
        verdict: impl Fn(&S) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.rules.push(Rule {
            name: name.into(),
            applies: Box::new(applies),
            verdict: Box::new(verdict),
        });
        self
    }

    /// The verdict of the first rule that applies, if any.
    pub fn first_verdict(&self, subject: &S) -> Option<bool> {
        self.rules
            .iter()
            .find(|r| (r.applies)(subject))
            .map(|r| (r.verdict)(subject))
    }

    /// Conjunction of the verdicts of every applicable rule; vacuously true
    /// when none applies.
    pub fn all_hold(&self, subject: &S) -> bool {
        self.rules
            .iter()
            .filter(|r| (r.applies)(subject))
            .all(|r| (r.verdict)(subject))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl<S> fmt::Debug for RuleSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_list()
            .entries(self.rules.iter().map(|r| &r.name))
            .finish()
    }
}

/// A consistency rule over an ordered pair of subjects.
pub struct PairRule<S: ?Sized> {
    name: String,
    applies: PairPred<S>,
    verdict: PairPred<S>,
}

impl<S> PairRule<S> {
    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Ordered consistency rules over pairs.
pub struct PairRules<S: ?Sized> {
    rules: Vec<PairRule<S>>,
}

impl<S> Default for PairRules<S> {
    fn default() -> Self {
        PairRules { rules: Vec::new() }
    }
}

impl<S> PairRules<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(
        mut self,
        name: &str,
        applies: impl Fn(&S, &S) -> bool + Send + Sync + 'static,
        verdict: impl Fn(&S, &S) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.rules.push(PairRule {
            name: name.into(),
            applies: Box::new(applies),
            verdict: Box::new(verdict),
        });
        self
    }

    /// Conjunction over all applicable rules; vacuously true when none
    /// applies.
    pub fn all_hold(&self, a: &S, b: &S) -> bool {
        self.rules
            .iter()
            .filter(|r| (r.applies)(a, b))
            .all(|r| (r.verdict)(a, b))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl<S> fmt::Debug for PairRules<S> {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_list()
            .entries(self.rules.iter().map(|r| &r.name))
            .finish()
    }
}

/// What a class-labeling rule sees: the class's member node indices and the
/// graph they live in.
pub struct ClassView<'a> {
    pub graph: &'a NGraph,
    pub members: &'a [usize],
}

impl ClassView<'_> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True if the predicate holds for every member node.
    pub fn all_members(&self, pred: impl Fn(usize, &crate::object::SpatialObject) -> bool) -> bool {
        self.members.iter().all(|&i| pred(i, self.graph.node(i)))
    }
}

type ClassPred = Box<dyn for<'a> Fn(&ClassView<'a>) -> bool + Send + Sync>;

/// A named first-match rule over node classes.
pub struct ClassRule {
    name: String,
    props: Props,
    pred: ClassPred,
}

impl ClassRule {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn props(&self) -> &Props {
        &self.props
    }
}

/// Ordered first-match labeling rules for node classes.
#[derive(Default)]
pub struct ClassRules {
    rules: Vec<ClassRule>,
}

impl ClassRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(
        mut self,
        name: &str,
        pred: impl for<'a> Fn(&ClassView<'a>) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.rules.push(ClassRule {
            name: name.into(),
            props: Props::new(),
            pred: Box::new(pred),
        });
        self
    }

    pub fn rule_with_props(
        mut self,
        name: &str,
        props: Props,
        pred: impl for<'a> Fn(&ClassView<'a>) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.rules.push(ClassRule {
            name: name.into(),
            props,
            pred: Box::new(pred),
        });
        self
    }

    pub fn first_match(&self, view: &ClassView) -> Option<&ClassRule> {
        self.rules.iter().find(|r| (r.pred)(view))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl fmt::Debug for ClassRules {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_list()
            .entries(self.rules.iter().map(|r| &r.name))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Metric, PointSet};

    #[test]
    fn label_rules_fire_in_order() {
        let rules = LabelRules::new()
            .rule("small", |n: &i64| *n < 10)
            .rule("even", |n: &i64| n % 2 == 0);
        assert_eq!(rules.first_match(&4).unwrap().name(), "small");
        assert_eq!(rules.first_match(&12).unwrap().name(), "even");
        assert!(rules.first_match(&13).is_none());
    }

    #[test]
    fn rule_set_verdicts() {
        let rules = RuleSet::new()
            .rule("positive", |n: &i64| *n != 0, |n| *n > 0)
            .rule("even", |n: &i64| *n != 0, |n| n % 2 == 0);
        assert_eq!(rules.first_verdict(&4), Some(true));
        assert_eq!(rules.first_verdict(&-4), Some(false));
        assert_eq!(rules.first_verdict(&0), None);
        assert!(rules.all_hold(&4));
        assert!(!rules.all_hold(&3)); // positive holds, even fails
        assert!(rules.all_hold(&0)); // vacuous
    }

    #[test]
    fn empty_rule_sets_are_vacuously_consistent() {
        let rules: RuleSet<i64> = RuleSet::new();
        assert!(rules.all_hold(&7));
        let pair: PairRules<i64> = PairRules::new();
        assert!(pair.all_hold(&1, &2));
    }

    #[test]
    fn pair_rules_conjunction() {
        let rules = PairRules::new()
            .rule("ordered", |_: &i64, _: &i64| true, |a, b| a < b)
            .rule("distinct", |_, _| true, |a, b| a != b);
        assert!(rules.all_hold(&1, &2));
        assert!(!rules.all_hold(&2, &2));
        assert!(!rules.all_hold(&3, &2));
    }

    #[test]
    fn class_rules_see_graph_and_members() {
        let ps =
            PointSet::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0]]).unwrap();
        let g = NGraph::mst(&ps, &Metric::Euclidean).unwrap();
        let rules = ClassRules::new()
            .rule("singleton", |v: &ClassView| v.len() == 1)
            .rule("group", |v: &ClassView| v.len() > 1);
        let all = [0usize, 1, 2];
        let one = [2usize];
        assert_eq!(
            rules
                .first_match(&ClassView { graph: &g, members: &all })
                .unwrap()
                .name(),
            "group"
        );
        assert_eq!(
            rules
                .first_match(&ClassView { graph: &g, members: &one })
                .unwrap()
                .name(),
            "singleton"
        );
    }
}
