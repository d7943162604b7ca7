//! Round trip through Matrix Market files and a CSV convergence trace.

use axb_kaczmarz::harness::{read_matrix_market, read_trace_csv, write_matrix_market, write_trace_csv};
use axb_kaczmarz::{DenseMat, Method, Problem, SolverConfig, SparseRowMat, StopRule};

fn main() -> axb_kaczmarz::Result<()> {
    let dir = std::env::temp_dir().join("axb_matrix_market");
    std::fs::create_dir_all(&dir)?;

    // A sparse banded A, written and read back.
    let n = 30;
    let mut triplets = Vec::new();
    for i in 0..n {
        triplets.push((i, i, 4.0));
        if i + 1 < n {
            triplets.push((i, i + 1, -1.0));
            triplets.push((i + 1, i, -1.0));
        }
    }
    let a = SparseRowMat::from_triplets(n, n, &triplets)?;
    let path = dir.join("a.mtx");
    write_matrix_market(&a, &path)?;
    let a = read_matrix_market(&path)?;
    println!("read {}x{} with {} nonzeros from {}", a.rows(), a.cols(), a.nnz(), path.display());

    let b = DenseMat::from_fn(4, 3, |i, j| 1.0 + (i * 3 + j) as f64 / 10.0 + if i == j { 2.0 } else { 0.0 });
    let x = DenseMat::from_fn(n, 4, |i, j| ((i + j) % 5) as f64);
    let c = a.mul_dense(&x).matmul(&b);
    let problem = Problem::new(a, b, c)?.with_min_norm_oracle()?;

    let cfg = SolverConfig::default().with_stop(StopRule::RseBelow(1e-10)).with_trace_stride(200);
    let rep = axb_kaczmarz::solve(&problem, Method::Mwrbk, &cfg)?;
    let trace = dir.join("trace.csv");
    write_trace_csv(&rep.trace, &trace)?;
    for r in read_trace_csv(&trace)?.iter().step_by(4) {
        println!("step {:>6}  row {:>3}  rse {:.3e}", r.k, r.row.map_or(-1, |v| v as i64), r.rse.unwrap_or(f64::NAN));
    }
    println!("{} steps, trace in {}", rep.iterations, trace.display());
    Ok(())
}
