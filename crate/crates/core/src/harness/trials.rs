use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::harness::random::{random_problem, RandomSpec};
use crate::solvers::{solve, Method, Problem, SolverConfig, TraceRecord};

/// Summary statistics of one quantity over trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); absent for
    /// deterministic methods and single trials.
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    pub fn from_samples(samples: &[f64], deterministic: bool) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let sd = (!deterministic && samples.len() > 1)
            .then(|| (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        Some(Self {
            mean,
            sd,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Iteration counts and loop wall times over the trials of one method.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialStats {
    pub iterations: Stat,
    pub cpu_seconds: Stat,
    pub trials: usize,
    /// Trials that stopped on `max_iters` rather than converging.
    pub not_converged: usize,
}

impl TrialStats {
    pub fn from_samples(iterations: &[usize], cpu_seconds: &[f64], deterministic: bool) -> Option<Self> {
        let its: Vec<f64> = iterations.iter().map(|&v| v as f64).collect();
        Some(Self {
            iterations: Stat::from_samples(&its, deterministic)?,
            cpu_seconds: Stat::from_samples(cpu_seconds, deterministic)?,
            trials: iterations.len(),
            not_converged: 0,
        })
    }
}

/// Where the problem of an experiment comes from.
#[derive(Clone, Debug)]
pub enum ProblemSource {
    Random(RandomSpec),
    Given(Box<Problem>),
}

impl ProblemSource {
    pub fn build(&self) -> Result<Problem> {
        match self {
            ProblemSource::Random(spec) => random_problem(spec),
            ProblemSource::Given(p) => Ok((**p).clone()),
        }
    }
}

/// A batch of runs: every method (and every `theta` for `Rgrbk`) over
/// `trials` seeds `config.seed + t`.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub source: ProblemSource,
    pub methods: Vec<Method>,
    /// Blends used for `Rgrbk`; ignored by the other methods.
    pub thetas: Vec<f64>,
    pub config: SolverConfig,
    pub trials: usize,
}

impl ExperimentSpec {
    pub fn new(source: ProblemSource, methods: Vec<Method>, config: SolverConfig) -> Self {
        Self {
            source,
            methods,
            thetas: vec![config.theta],
            config,
            trials: 20,
        }
    }
}

/// Results for one method (and blend).
#[derive(Clone, Debug)]
pub struct MethodSummary {
    pub method: Method,
    pub theta: Option<f64>,
    pub stats: Option<TrialStats>,
    /// Per-trial iteration counts in trial order.
    pub iterations: Vec<usize>,
    pub cpu_seconds: Vec<f64>,
    pub traces: Vec<Vec<TraceRecord>>,
    /// `(trial index, error message)` for failed trials.
    pub failures: Vec<(usize, String)>,
}

impl MethodSummary {
    pub fn label(&self) -> String {
        match self.theta {
            Some(t) => format!("{}(theta={t})", self.method),
            None => self.method.to_string(),
        }
    }
}

/// Runs the experiment. Deterministic methods run once. Solver failures are
/// recorded per trial and do not abort the batch.
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<MethodSummary>> {
    if spec.trials == 0 {
        return Err(Error::Invalid("at least one trial is required".into()));
    }
    let problem = spec.source.build()?;
    let mut out = Vec::new();
    for &method in &spec.methods {
        let thetas: Vec<Option<f64>> = if method == Method::Rgrbk {
            spec.thetas.iter().map(|&t| Some(t)).collect()
        } else {
            vec![None]
        };
        for theta in thetas {
            let trials = if method.is_randomized() { spec.trials } else { 1 };
            let mut summary = MethodSummary {
                method,
                theta,
                stats: None,
                iterations: Vec::new(),
                cpu_seconds: Vec::new(),
                traces: Vec::new(),
                failures: Vec::new(),
            };
            let mut not_converged = 0;
            for t in 0..trials {
                let mut cfg = spec.config.clone().with_seed(spec.config.seed.wrapping_add(t as u64));
                if let Some(th) = theta {
                    cfg.theta = th;
                }
                match solve(&problem, method, &cfg) {
                    Ok(rep) => {
                        if !rep.stop.converged() {
                            not_converged += 1;
                        }
                        summary.iterations.push(rep.iterations);
                        summary.cpu_seconds.push(rep.wall_seconds);
                        summary.traces.push(rep.trace);
                    }
                    Err(e) => summary.failures.push((t, e.to_string())),
                }
            }
            summary.stats = TrialStats::from_samples(&summary.iterations, &summary.cpu_seconds, !method.is_randomized())
                .map(|s| TrialStats { not_converged, ..s });
            out.push(summary);
        }
    }
    Ok(out)
}

/// Text table with IT, CPU, SD (of IT), Range (of IT) and CPU/IT columns;
/// `--` marks absent values.
pub fn format_summary_table(rows: &[MethodSummary]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24} {:>12} {:>12} {:>10} {:>21} {:>12} {:>8}",
        "method", "IT", "CPU", "SD", "Range", "CPU/IT", "failed"
    );
    for r in rows {
        match &r.stats {
            Some(st) => {
                let sd = st.iterations.sd.map_or("--".to_string(), |v| format!("{v:.1}"));
                let range = if st.iterations.sd.is_some() {
                    format!("[{}, {}]", st.iterations.min, st.iterations.max)
                } else {
                    "--".to_string()
                };
                let per_it = if st.iterations.mean > 0.0 {
                    format!("{:.3e}", st.cpu_seconds.mean / st.iterations.mean)
                } else {
                    "--".to_string()
                };
                let _ = writeln!(
                    s,
                    "{:<24} {:>12.1} {:>12.4e} {:>10} {:>21} {:>12} {:>8}",
                    r.label(),
                    st.iterations.mean,
                    st.cpu_seconds.mean,
                    sd,
                    range,
                    per_it,
                    r.failures.len() + st.not_converged
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "{:<24} {:>12} {:>12} {:>10} {:>21} {:>12} {:>8}",
                    r.label(),
                    "--",
                    "--",
                    "--",
                    "--",
                    "--",
                    r.failures.len()
                );
            }
        }
    }
    s
}

/// The same summary as CSV (`method,theta,it_mean,it_sd,it_min,it_max,cpu_mean,cpu_sd,cpu_per_it,failed`).
pub fn summary_csv(rows: &[MethodSummary]) -> String {
    let mut s = String::from("method,theta,it_mean,it_sd,it_min,it_max,cpu_mean,cpu_sd,cpu_per_it,failed\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        let theta = r.theta.map(|t| t.to_string()).unwrap_or_default();
        match &r.stats {
            Some(st) => {
                let _ = writeln!(
                    s,
                    "{},{},{:.16e},{},{},{},{:.16e},{},{},{}",
                    r.method,
                    theta,
                    st.iterations.mean,
                    opt(st.iterations.sd),
                    st.iterations.min,
                    st.iterations.max,
                    st.cpu_seconds.mean,
                    opt(st.cpu_seconds.sd),
                    opt((st.iterations.mean > 0.0).then(|| st.cpu_seconds.mean / st.iterations.mean)),
                    r.failures.len() + st.not_converged
                );
            }
            None => {
                let _ = writeln!(s, "{},{},,,,,,,,{}", r.method, theta, r.failures.len());
            }
        }
    }
    s
}
