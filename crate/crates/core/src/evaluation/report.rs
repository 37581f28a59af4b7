//! `metric<TAB>setting<TAB>value` lines and an aligned text table.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricLine {
    pub metric: String,
    pub setting: String,
    pub value: f64,
}

impl MetricLine {
    pub fn new(metric: impl Into<String>, setting: impl Into<String>, value: f64) -> Self {
        Self {
            metric: metric.into(),
            setting: setting.into(),
            value,
        }
    }

    /// Parses one machine-format line.
    pub fn parse(line: &str) -> Option<Self> {
        let mut f = line.split('\t');
        let (m, s, v) = (f.next()?, f.next()?, f.next()?);
        if f.next().is_some() {
            return None;
        }
        Some(Self::new(m, s, v.parse().ok()?))
    }
}

impl fmt::Display for MetricLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{:?}", self.metric, self.setting, self.value)
    }
}

pub fn machine_report(lines: &[MetricLine]) -> String {
    lines.iter().map(|l| format!("{l}\n")).collect()
}

pub fn table_report(lines: &[MetricLine]) -> String {
    let mw = lines.iter().map(|l| l.metric.len()).max().unwrap_or(0).max(6);
    let sw = lines.iter().map(|l| l.setting.len()).max().unwrap_or(0).max(7);
    let mut out = format!("{:<mw$}  {:<sw$}  value\n", "metric", "setting");
    for l in lines {
        out.push_str(&format!("{:<mw$}  {:<sw$}  {:.4}\n", l.metric, l.setting, l.value));
    }
    out
}
