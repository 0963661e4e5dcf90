//! Simulators that run as child processes.
//!
//! The program is called as `program [args...] theta_1 ... theta_k run_seed`
//! and must print the statistics as one comma-separated line on stdout.

use std::process::Command;
use std::sync::Arc;

use regcal::experiment::{Simulator, SummaryVector};
use regcal::{Error, Result};

pub struct CommandSimulator {
    program: String,
    args: Vec<String>,
    names: Option<Arc<[String]>>,
}

impl CommandSimulator {
    pub fn new(command: &[String], names: Option<Vec<String>>) -> Self {
        Self {
            program: command[0].clone(),
            args: command[1..].to_vec(),
            names: names.map(Into::into),
        }
    }

    fn parse(&self, stdout: &str) -> Result<SummaryVector> {
        let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
        let line = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument(format!("`{}` printed nothing", self.program)))?;
        if lines.next().is_some() {
            return Err(Error::InvalidArgument(format!(
                "`{}` printed more than one line",
                self.program
            )));
        }
        let values = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("`{}` printed `{f}`, not a number", self.program)))
            })
            .collect::<Result<Vec<f64>>>()?;
        let names: Arc<[String]> = match &self.names {
            Some(n) if n.len() != values.len() => {
                return Err(Error::DimensionMismatch(format!(
                    "`{}` printed {} statistics, {} names configured",
                    self.program,
                    values.len(),
                    n.len()
                )))
            }
            Some(n) => Arc::clone(n),
            None => (0..values.len()).map(|i| i.to_string()).collect(),
        };
        SummaryVector::new(names, values)
    }
}

impl Simulator for CommandSimulator {
    fn run(&self, theta: &[f64], run_seed: u64) -> Result<SummaryVector> {
        let output = Command::new(&self.program)
            .args(&self.args)
            .args(theta.iter().map(|t| t.to_string()))
            .arg(run_seed.to_string())
            .output()
            .map_err(|e| Error::InvalidArgument(format!("cannot start `{}`: {e}", self.program)))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(Error::InvalidArgument(format!(
                "`{}` exited with {}: {}",
                self.program,
                output.status,
                stderr.trim()
            )));
        }
        self.parse(&String::from_utf8_lossy(&output.stdout))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(names: Option<Vec<String>>) -> CommandSimulator {
        CommandSimulator::new(&["sim".to_string()], names)
    }

    #[test]
    fn parses_one_line() {
        let s = sim(None).parse("1.5, -2,3e-1\n").unwrap();
        assert_eq!(s.names(), ["0", "1", "2"]);
        assert_eq!(s.values(), [1.5, -2.0, 0.3]);
        let s = sim(Some(vec!["a".into(), "b".into()])).parse("\n4,5\n\n").unwrap();
        assert_eq!(s.get("b"), Some(5.0));
    }

    #[test]
    fn rejects_bad_output() {
        assert!(sim(None).parse("").is_err());
        assert!(sim(None).parse("1,2\n3,4\n").is_err());
        assert!(sim(None).parse("1,x").is_err());
        assert!(sim(Some(vec!["a".into()])).parse("1,2").is_err());
    }
}
