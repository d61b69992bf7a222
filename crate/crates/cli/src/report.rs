use std::fmt::Write as _;
use std::time::Duration;

/// One pass/fail check with the number it was decided on.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, measured, threshold, detail: detail.into() }
    }
}

/// Summary of a command run. Timings live here only, never in CSVs.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub command: String,
    pub scenario: String,
    /// Titled text blocks: condition reports, the plan manifest, statistics.
    pub sections: Vec<(String, String)>,
    pub verdicts: Vec<Verdict>,
    pub timings: Vec<(String, Duration)>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, scenario: impl Into<String>) -> Self {
        Self { command: command.into(), scenario: scenario.into(), ..Default::default() }
    }

    pub fn section(&mut self, title: impl Into<String>, body: impl Into<String>) {
        self.sections.push((title.into(), body.into()));
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn time(&mut self, stage: impl Into<String>, d: Duration) {
        self.timings.push((stage.into(), d));
    }

    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// 0 when every verdict passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            2
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "scenario: {}", self.scenario);
        for (title, body) in &self.sections {
            let _ = writeln!(s, "\n== {title}");
            s.push_str(body);
            if !body.ends_with('\n') {
                s.push('\n');
            }
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(s, "\n== verdicts");
            for v in &self.verdicts {
                let mark = if v.passed { "PASS" } else { "FAIL" };
                let _ = write!(s, "{mark} {}: measured {:.6e}", v.name, v.measured);
                if !v.threshold.is_nan() {
                    let _ = write!(s, " threshold {:.6e}", v.threshold);
                }
                if !v.detail.is_empty() {
                    let _ = write!(s, "  {}", v.detail);
                }
                s.push('\n');
            }
        }
        if !self.timings.is_empty() {
            let _ = writeln!(s, "\n== timings");
            for (stage, d) in &self.timings {
                let _ = writeln!(s, "{stage}: {:.3} s", d.as_secs_f64());
            }
        }
        if !self.artifacts.is_empty() {
            let _ = writeln!(s, "\n== artifacts");
            for a in &self.artifacts {
                let _ = writeln!(s, "{a}");
            }
        }
        s
    }
}
