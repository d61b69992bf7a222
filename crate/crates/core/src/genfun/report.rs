use std::fmt::Write as _;

/// Outcome of one numerical condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub name: String,
    pub passed: bool,
    /// Sample point where the condition failed (always set on failure).
    pub witness: Option<(f64, f64)>,
    pub measured: Vec<(String, f64)>,
}

impl ConditionResult {
    pub fn pass(name: impl Into<String>) -> Self {
        Self { name: name.into(), passed: true, witness: None, measured: Vec::new() }
    }

    pub fn fail(name: impl Into<String>, witness: (f64, f64)) -> Self {
        Self { name: name.into(), passed: false, witness: Some(witness), measured: Vec::new() }
    }

    /// Pass unless a witness was found.
    pub fn from_witness(name: impl Into<String>, witness: Option<(f64, f64)>) -> Self {
        match witness {
            Some(w) => Self::fail(name, w),
            None => Self::pass(name),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: f64) -> Self {
        self.measured.push((key.into(), value));
        self
    }

    pub fn measured(&self, key: &str) -> Option<f64> {
        self.measured.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

/// Collection of condition results for one subject (a generating function,
/// a twist map, a norm).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionReport {
    pub subject: String,
    pub results: Vec<ConditionResult>,
}

impl ConditionReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self { subject: subject.into(), results: Vec::new() }
    }

    pub fn push(&mut self, result: ConditionResult) {
        self.results.push(result);
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.get(name).is_some_and(|r| r.passed)
    }

    /// `key: value` lines, one block per condition.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "subject: {}", self.subject);
        let _ = writeln!(out, "all_passed: {}", self.all_passed());
        for r in &self.results {
            let _ = writeln!(out, "{}.passed: {}", r.name, r.passed);
            if let Some((a, b)) = r.witness {
                let _ = writeln!(out, "{}.witness: {:e}, {:e}", r.name, a, b);
            }
            for (k, v) in &r.measured {
                let _ = writeln!(out, "{}.{}: {:e}", r.name, k, v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_results_carry_witness() {
        let r = ConditionResult::from_witness("twist", Some((0.5, 0.5)));
        assert!(!r.passed);
        assert_eq!(r.witness, Some((0.5, 0.5)));
        let ok = ConditionResult::from_witness("twist", None);
        assert!(ok.passed && ok.witness.is_none());
    }

    #[test]
    fn text_report_lists_every_condition() {
        let mut rep = ConditionReport::new("h0");
        rep.push(ConditionResult::pass("H1").with("max_defect", 0.0));
        rep.push(ConditionResult::fail("H5.twist", (0.25, 0.25)));
        let text = rep.to_text();
        assert!(text.contains("subject: h0"));
        assert!(text.contains("all_passed: false"));
        assert!(text.contains("H1.passed: true"));
        assert!(text.contains("H5.twist.witness: 2.5e-1, 2.5e-1"));
        assert!(text.contains("H1.max_defect: 0e0"));
    }
}
