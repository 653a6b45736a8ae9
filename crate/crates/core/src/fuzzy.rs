//! Zero-order fuzzy inference: triangular/trapezoidal fuzzification, min/max
//! rule evaluation and weighted-average defuzzification over constant
//! consequents.
//!
//! Rule bases are plain data. They are built from a TOML document (see
//! [`FuzzyRuleBase::from_toml_str`]) and are immutable afterwards, so a single
//! instance can be shared between threads.

use std::path::Path;

use serde::Deserialize;

use crate::error::FuzzyError;

/// Shape of a membership function, breakpoints in the variable's units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Rises on `[a, b]`, falls on `[b, c]`. `a == b` or `b == c` gives a shoulder.
    Triangle { a: f64, b: f64, c: f64 },
    /// Rises on `[a, b]`, flat on `[b, c]`, falls on `[c, d]`.
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
}

impl Shape {
    fn from_points(points: &[f64]) -> Option<Self> {
        match *points {
            [a, b, c] if a <= b && b <= c && a < c => Some(Shape::Triangle { a, b, c }),
            [a, b, c, d] if a <= b && b <= c && c <= d && a < d => {
                Some(Shape::Trapezoid { a, b, c, d })
            }
            _ => None,
        }
    }

    fn corners(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Triangle { a, b, c } => (a, b, b, c),
            Shape::Trapezoid { a, b, c, d } => (a, b, c, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipFunction {
    pub label: String,
    pub shape: Shape,
}

impl MembershipFunction {
    pub fn triangle(label: impl Into<String>, a: f64, b: f64, c: f64) -> Self {
        Self {
            label: label.into(),
            shape: Shape::Triangle { a, b, c },
        }
    }

    pub fn trapezoid(label: impl Into<String>, a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            label: label.into(),
            shape: Shape::Trapezoid { a, b, c, d },
        }
    }

    /// Membership degree in `[0, 1]`; piecewise linear and continuous.
    pub fn degree(&self, x: f64) -> f64 {
        let (a, b, c, d) = self.shape.corners();
        if x < a || x > d {
            0.0
        } else if x < b {
            (x - a) / (b - a)
        } else if x <= c {
            1.0
        } else {
            (d - x) / (d - c)
        }
    }

    /// Nominal center: the peak of a triangle, the plateau midpoint of a trapezoid.
    pub fn center(&self) -> f64 {
        let (_, b, c, _) = self.shape.corners();
        0.5 * (b + c)
    }

    fn support(&self) -> (f64, f64) {
        let (a, _, _, d) = self.shape.corners();
        (a, d)
    }
}

/// A linguistic variable over a closed universe.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyVariable {
    name: String,
    universe: (f64, f64),
    terms: Vec<MembershipFunction>,
}

impl FuzzyVariable {
    /// Checks that centers strictly increase and that the terms cover the
    /// whole universe with a nonzero total degree.
    pub fn new(
        name: impl Into<String>,
        universe: (f64, f64),
        terms: Vec<MembershipFunction>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let (lo, hi) = universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::Config(format!(
                "variable `{name}`: universe [{lo}, {hi}] is empty or not finite"
            )));
        }
        if terms.is_empty() {
            return Err(FuzzyError::Config(format!("variable `{name}` has no terms")));
        }
        for w in terms.windows(2) {
            if w[1].center() <= w[0].center() {
                return Err(FuzzyError::Config(format!(
                    "variable `{name}`: term `{}` center is not above `{}`",
                    w[1].label, w[0].label
                )));
            }
        }
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].iter().any(|o| o.label == t.label) {
                return Err(FuzzyError::Config(format!(
                    "variable `{name}`: duplicate label `{}`",
                    t.label
                )));
            }
        }
        let var = Self {
            name,
            universe,
            terms,
        };
        var.check_coverage()?;
        Ok(var)
    }

    // Every point of the universe must sit strictly inside some support, or on
    // a peak. Checked at the boundaries of each support, where gaps can open.
    fn check_coverage(&self) -> Result<(), FuzzyError> {
        let (lo, hi) = self.universe;
        let mut probes = vec![lo, hi];
        for t in &self.terms {
            let (a, d) = t.support();
            probes.extend([a, d]);
        }
        for t in &self.terms {
            let (a, b, c, d) = t.shape.corners();
            probes.extend([0.5 * (a + b), 0.5 * (c + d)]);
        }
        for x in probes.into_iter().filter(|x| (lo..=hi).contains(x)) {
            let total: f64 = self.terms.iter().map(|t| t.degree(x)).sum();
            if total <= 0.0 {
                return Err(FuzzyError::Config(format!(
                    "variable `{}`: no term covers x = {x}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> (f64, f64) {
        self.universe
    }

    pub fn terms(&self) -> &[MembershipFunction] {
        &self.terms
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.label == label)
    }

    /// Degree per term, in term order. Inputs outside the universe are clamped
    /// to it; NaN maps to the universe center.
    pub fn fuzzify(&self, x: f64) -> Vec<f64> {
        let (lo, hi) = self.universe;
        let x = if x.is_nan() { 0.5 * (lo + hi) } else { x.clamp(lo, hi) };
        self.terms.iter().map(|t| t.degree(x)).collect()
    }
}

/// Firing strength per consequent label, in consequent order.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations(pub Vec<f64>);

impl Activations {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Result of defuzzification. `degenerate` is set when no rule fired and the
/// value fell back to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crisp {
    pub value: f64,
    pub degenerate: bool,
}

/// Weighted average of constant consequents.
pub fn defuzzify(activations: &Activations, constants: &[f64]) -> Crisp {
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, c) in activations.0.iter().zip(constants) {
        num += w * c;
        den += w;
    }
    if den > 0.0 {
        Crisp {
            value: num / den,
            degenerate: false,
        }
    } else {
        Crisp {
            value: 0.0,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Rule {
    antecedents: Vec<usize>,
    consequent: usize,
}

/// One- or two-input rule base with a complete rule table and a constant per
/// consequent label.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyRuleBase {
    name: String,
    inputs: Vec<FuzzyVariable>,
    output_name: String,
    labels: Vec<String>,
    constants: Vec<f64>,
    rules: Vec<Rule>,
}

impl FuzzyRuleBase {
    /// Builds a rule base from a label table. For one input `table` has a
    /// single row with one entry per term; for two inputs rows follow the
    /// first input's terms and columns the second's.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<FuzzyVariable>,
        output_name: impl Into<String>,
        consequents: Vec<(String, f64)>,
        table: &[Vec<String>],
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        let cfg = |msg: String| FuzzyError::Config(format!("rule base `{name}`: {msg}"));
        if !(1..=2).contains(&inputs.len()) {
            return Err(cfg(format!("expected 1 or 2 inputs, got {}", inputs.len())));
        }
        if consequents.is_empty() {
            return Err(cfg("no consequent constants".into()));
        }
        let mut labels = Vec::with_capacity(consequents.len());
        let mut constants = Vec::with_capacity(consequents.len());
        for (label, value) in consequents {
            if labels.contains(&label) {
                return Err(cfg(format!("duplicate consequent `{label}`")));
            }
            if !value.is_finite() {
                return Err(cfg(format!("consequent `{label}` is not finite")));
            }
            labels.push(label);
            constants.push(value);
        }
        let (rows, cols) = match inputs.len() {
            1 => (1, inputs[0].terms().len()),
            _ => (inputs[0].terms().len(), inputs[1].terms().len()),
        };
        if table.len() != rows || table.iter().any(|r| r.len() != cols) {
            return Err(cfg(format!("rule table must be {rows}x{cols}")));
        }
        let mut rules = Vec::with_capacity(rows * cols);
        for (i, row) in table.iter().enumerate() {
            for (j, label) in row.iter().enumerate() {
                let consequent = labels
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| cfg(format!("unknown consequent `{label}` in rule table")))?;
                let antecedents = if inputs.len() == 1 { vec![j] } else { vec![i, j] };
                rules.push(Rule {
                    antecedents,
                    consequent,
                });
            }
        }
        Ok(Self {
            name,
            inputs,
            output_name: output_name.into(),
            labels,
            constants,
            rules,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, FuzzyError> {
        let file: RuleBaseFile = toml::from_str(text)?;
        file.build()
    }

    pub fn from_file(path: &Path) -> Result<Self, FuzzyError> {
        let text = std::fs::read_to_string(path).map_err(|source| FuzzyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[FuzzyVariable] {
        &self.inputs
    }

    pub fn output_name(&self) -> &str {
        &self.output_name
    }

    pub fn consequent_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn constant(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.constants[i])
    }

    /// Consequent label of the rule matching the given antecedent labels.
    pub fn rule(&self, antecedents: &[&str]) -> Option<&str> {
        if antecedents.len() != self.inputs.len() {
            return None;
        }
        let idx: Option<Vec<usize>> = antecedents
            .iter()
            .zip(&self.inputs)
            .map(|(l, v)| v.label_index(l))
            .collect();
        let idx = idx?;
        self.rules
            .iter()
            .find(|r| r.antecedents == idx)
            .map(|r| self.labels[r.consequent].as_str())
    }

    /// Min over antecedents, max over rules sharing a consequent.
    pub fn infer(&self, inputs: &[f64]) -> Result<Activations, FuzzyError> {
        if inputs.len() != self.inputs.len() {
            return Err(FuzzyError::Config(format!(
                "rule base `{}` expects {} inputs, got {}",
                self.name,
                self.inputs.len(),
                inputs.len()
            )));
        }
        let degrees: Vec<Vec<f64>> = self
            .inputs
            .iter()
            .zip(inputs)
            .map(|(v, &x)| v.fuzzify(x))
            .collect();
        let mut act = vec![0.0_f64; self.labels.len()];
        for rule in &self.rules {
            let strength = rule
                .antecedents
                .iter()
                .zip(&degrees)
                .map(|(&t, d)| d[t])
                .fold(1.0_f64, f64::min);
            let slot = &mut act[rule.consequent];
            *slot = slot.max(strength);
        }
        Ok(Activations(act))
    }

    /// `infer` followed by `defuzzify` against this rule base's constants.
    pub fn evaluate(&self, inputs: &[f64]) -> Result<Crisp, FuzzyError> {
        let act = self.infer(inputs)?;
        Ok(defuzzify(&act, &self.constants))
    }

    pub fn min_constant(&self) -> f64 {
        self.constants.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_constant(&self) -> f64 {
        self.constants.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleBaseFile {
    name: String,
    #[serde(rename = "input")]
    inputs: Vec<VariableFile>,
    output: OutputFile,
    rules: RulesFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableFile {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    unit: Option<String>,
    universe: [f64; 2],
    terms: Vec<TermFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    label: String,
    points: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    name: String,
    #[serde(default)]
    #[allow(dead_code)]
    unit: Option<String>,
    constants: Vec<ConstantFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantFile {
    label: String,
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    table: Vec<Vec<String>>,
}

impl RuleBaseFile {
    fn build(self) -> Result<FuzzyRuleBase, FuzzyError> {
        let mut inputs = Vec::with_capacity(self.inputs.len());
        for v in self.inputs {
            let terms = v
                .terms
                .into_iter()
                .map(|t| {
                    Shape::from_points(&t.points)
                        .map(|shape| MembershipFunction {
                            label: t.label.clone(),
                            shape,
                        })
                        .ok_or_else(|| {
                            FuzzyError::Config(format!(
                                "variable `{}`, term `{}`: points must be 3 or 4 non-decreasing values",
                                v.name, t.label
                            ))
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            inputs.push(FuzzyVariable::new(
                v.name,
                (v.universe[0], v.universe[1]),
                terms,
            )?);
        }
        let consequents = self
            .output
            .constants
            .into_iter()
            .map(|c| (c.label, c.value))
            .collect();
        FuzzyRuleBase::new(
            self.name,
            inputs,
            self.output.name,
            consequents,
            &self.rules.table,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_labels() -> FuzzyVariable {
        FuzzyVariable::new(
            "x",
            (-2.0, 2.0),
            vec![
                MembershipFunction::triangle("-B", -2.0, -2.0, -1.0),
                MembershipFunction::triangle("-S", -2.0, -1.0, 0.0),
                MembershipFunction::triangle("Z", -1.0, 0.0, 1.0),
                MembershipFunction::triangle("S", 0.0, 1.0, 2.0),
                MembershipFunction::triangle("B", 1.0, 2.0, 2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn peak_of_zero_term() {
        assert_eq!(five_labels().fuzzify(0.0), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn midpoint_between_neighbours_splits_evenly() {
        let d = five_labels().fuzzify(1.5);
        assert_eq!(d, vec![0.0, 0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn clamps_outside_universe() {
        let v = five_labels();
        assert_eq!(v.fuzzify(12.0), v.fuzzify(2.0));
        assert_eq!(v.fuzzify(-1e9), v.fuzzify(-2.0));
        assert_eq!(v.fuzzify(2.0)[4], 1.0);
    }

    #[test]
    fn rejects_gap_in_coverage() {
        let err = FuzzyVariable::new(
            "gappy",
            (0.0, 3.0),
            vec![
                MembershipFunction::triangle("a", 0.0, 0.0, 1.0),
                MembershipFunction::triangle("b", 2.0, 3.0, 3.0),
            ],
        );
        assert!(matches!(err, Err(FuzzyError::Config(_))));
    }

    #[test]
    fn rejects_unordered_centers() {
        let err = FuzzyVariable::new(
            "x",
            (0.0, 1.0),
            vec![
                MembershipFunction::triangle("b", 0.0, 1.0, 1.0),
                MembershipFunction::triangle("a", 0.0, 0.0, 1.0),
            ],
        );
        assert!(err.is_err());
    }

    fn single_input(table: &[&str], consts: &[(&str, f64)]) -> FuzzyRuleBase {
        let var = FuzzyVariable::new(
            "x",
            (0.0, 1.0),
            vec![
                MembershipFunction::triangle("lo", 0.0, 0.0, 1.0),
                MembershipFunction::triangle("hi", 0.0, 1.0, 1.0),
            ],
        )
        .unwrap();
        FuzzyRuleBase::new(
            "t",
            vec![var],
            "y",
            consts.iter().map(|(l, v)| (l.to_string(), *v)).collect(),
            &[table.iter().map(|s| s.to_string()).collect()],
        )
        .unwrap()
    }

    #[test]
    fn full_antecedent_fires_consequent_fully() {
        let rb = single_input(&["a", "b"], &[("a", 0.0), ("b", 10.0)]);
        assert_eq!(rb.infer(&[1.0]).unwrap().0, vec![0.0, 1.0]);
    }

    #[test]
    fn shared_consequent_aggregates_by_max() {
        let rb = single_input(&["a", "a"], &[("a", 1.0)]);
        let act = rb.infer(&[0.7]).unwrap();
        assert!((act.0[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn wrong_input_count_is_config_error() {
        let rb = single_input(&["a", "b"], &[("a", 0.0), ("b", 1.0)]);
        assert!(matches!(rb.infer(&[]), Err(FuzzyError::Config(_))));
        assert!(rb.infer(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn unknown_consequent_rejected() {
        let var = five_labels();
        let err = FuzzyRuleBase::new(
            "t",
            vec![var],
            "y",
            vec![("a".into(), 1.0)],
            &[vec!["a".into(), "a".into(), "a".into(), "a".into(), "zz".into()]],
        );
        assert!(err.is_err());
    }

    #[test]
    fn defuzzify_weighted_average() {
        let c = defuzzify(&Activations(vec![0.5, 0.5, 0.0, 0.0]), &[0.0, 30.0, 60.0, 95.0]);
        assert_eq!(c.value, 15.0);
        assert!(!c.degenerate);
        let c = defuzzify(&Activations(vec![0.0, 0.0, 0.0, 1.0]), &[0.0, 30.0, 60.0, 95.0]);
        assert_eq!(c.value, 95.0);
    }

    #[test]
    fn defuzzify_all_zero_sets_flag() {
        let c = defuzzify(&Activations(vec![0.0; 4]), &[0.0, 30.0, 60.0, 95.0]);
        assert_eq!(c.value, 0.0);
        assert!(c.degenerate);
    }

    #[test]
    fn toml_round_trip_of_points() {
        let text = r#"
            name = "demo"
            [[input]]
            name = "x"
            universe = [0.0, 1.0]
            terms = [
              { label = "lo", points = [0.0, 0.0, 1.0] },
              { label = "hi", points = [0.0, 1.0, 1.0, 1.0] },
            ]
            [output]
            name = "y"
            constants = [ { label = "a", value = -1.0 }, { label = "b", value = 3.0 } ]
            [rules]
            table = [["a", "b"]]
        "#;
        let rb = FuzzyRuleBase::from_toml_str(text).unwrap();
        assert_eq!(rb.rule(&["hi"]), Some("b"));
        assert_eq!(rb.evaluate(&[0.5]).unwrap().value, 1.0);
    }

    #[test]
    fn toml_unknown_key_rejected() {
        let text = r#"
            name = "demo"
            colour = "red"
            [[input]]
            name = "x"
            universe = [0.0, 1.0]
            terms = [ { label = "lo", points = [0.0, 0.0, 1.0] } ]
            [output]
            name = "y"
            constants = [ { label = "a", value = 0.0 } ]
            [rules]
            table = [["a"]]
        "#;
        assert!(matches!(
            FuzzyRuleBase::from_toml_str(text),
            Err(FuzzyError::Parse(_))
        ));
    }
}
