//! Prints the comparison tables of the four benchmark problems.
//!
//! `cargo run --release -p conserve-core --example tables [case ...]`
//!
//! References for the two problems without exact solutions are cached under
//! `target/references/`.

use std::path::PathBuf;

use conserve::bench::{load_or_generate, run_case, BenchmarkCase, CaseId};
use conserve::{SchemeSpec, SolverConfig};

fn rows(case: CaseId) -> Vec<(&'static str, Vec<f64>)> {
    let r = |s: &'static str, p: &[f64]| (s, p.to_vec());
    match case {
        CaseId::BbmSoliton => vec![
            r("EC6", &[]),
            r("MC6", &[0.0]),
            r("MC6", &[8.0]),
            r("EC8", &[]),
            r("MC8", &[0.0, 0.0]),
            r("MC8", &[-4.0, 3.3]),
            r("EC10", &[0.0]),
            r("EC10", &[-32.0]),
            r("LS", &[]),
            r("PB", &[]),
        ],
        CaseId::BbmTwoWave => vec![
            r("EC6", &[]),
            r("MC6", &[0.0]),
            r("MC6", &[0.42]),
            r("EC8", &[]),
            r("MC8", &[0.0, 0.0]),
            r("MC8", &[0.3, -0.04]),
            r("EC10", &[0.0]),
            r("EC10", &[-0.4667]),
            r("LS", &[]),
            r("PB", &[]),
        ],
        CaseId::NlsSoliton => vec![
            r("EC6", &[0.0]),
            r("EC6", &[0.132]),
            r("MC6", &[0.0]),
            r("MC6", &[0.043]),
            r("M/EC-AL(1)", &[]),
            r("M/EC-AL(0)", &[]),
            r("MC-AL", &[]),
            r("MS", &[]),
            r("MoL-M", &[]),
        ],
        CaseId::NlsBreather => vec![
            r("EC6", &[0.0]),
            r("EC6", &[0.052]),
            r("MC6", &[0.0]),
            r("MC6", &[0.371]),
            r("M/EC-AL(1)", &[]),
            r("M/EC-AL(0)", &[]),
            r("MC-AL", &[]),
            r("MS", &[]),
            r("MoL-M", &[]),
        ],
        CaseId::Custom => Vec::new(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cases: Vec<CaseId> = if args.is_empty() {
        CaseId::ALL.to_vec()
    } else {
        args.iter().map(|a| CaseId::parse(a)).collect::<Result<_, _>>()?
    };
    let cfg = SolverConfig::default();
    let cache = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/references");
    for id in cases {
        let case = BenchmarkCase::standard(id);
        let reference = match case.reference_recipe() {
            Some(recipe) => {
                let path = cache.join(format!("{}.csv", id.label()));
                let t = std::time::Instant::now();
                let r = load_or_generate(&path, &case, &recipe, &cfg)?;
                eprintln!("reference {} ready in {:.1?}, drift {:?}", r.scheme, t.elapsed(), r.err);
                Some(r)
            }
            None => None,
        };
        println!("{}  (Δx = {}, Δt = {}, T = {})", id.label(), case.dx, case.dt, case.t_final);
        println!(
            "{:<14} {:>10} {:>10} {:>10} {:>10} {:>8} {:>6}",
            "scheme", "Err1", "Err2", "Err3", "error", "Errφ", "iters"
        );
        for (name, params) in rows(id) {
            let spec = SchemeSpec::new(case.equation(), name, &params);
            match run_case(&case, &spec, &cfg, reference.as_ref(), &[]) {
                Ok(o) => {
                    let r = o.report;
                    println!(
                        "{:<14} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.4} {:>8} {:>6}",
                        r.scheme,
                        r.err[0],
                        r.err[1],
                        r.err[2],
                        r.solution_error.unwrap_or(f64::NAN),
                        r.phase_shift.map_or("-".to_string(), |p| format!("{:.2}", p.node)),
                        r.newton.max_iterations
                    );
                }
                Err(e) => println!("{:<14} failed: {e}", spec.label()),
            }
        }
    }
    Ok(())
}
