//! Suite results as JSON or JUnit XML.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    pub secs: f64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Suite {
    pub name: String,
    pub cases: Vec<CaseResult>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Suite {
    pub fn new(name: &str) -> Suite {
        Suite { name: name.to_string(), cases: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, passed: bool, secs: f64, message: impl Into<String>) {
        self.cases.push(CaseResult { name: name.into(), passed, secs, message: message.into() });
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }

    pub fn to_junit(&self) -> String {
        let total: f64 = self.cases.iter().map(|c| c.secs).sum();
        let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        s += &format!(
            "<testsuite name=\"{}\" tests=\"{}\" failures=\"{}\" time=\"{total:.3}\">\n",
            xml_escape(&self.name),
            self.cases.len(),
            self.failures()
        );
        for c in &self.cases {
            s += &format!("  <testcase name=\"{}\" time=\"{:.3}\"", xml_escape(&c.name), c.secs);
            if c.passed {
                s += "/>\n";
            } else {
                s += &format!(">\n    <failure message=\"{}\"/>\n  </testcase>\n", xml_escape(&c.message));
            }
        }
        s += "</testsuite>\n";
        s
    }
}
