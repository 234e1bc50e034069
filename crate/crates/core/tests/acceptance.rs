//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.
//!
//! Tolerances are pinned here rather than read from the config defaults, so
//! a change to the defaults cannot loosen the acceptance bar.

use std::process::ExitCode;
use std::time::Instant;

use sbq_core::config::RunConfig;
use sbq_core::verify::{checks, run_checks, TestReport};

const PINNED: &[(&str, f64)] = &[
    ("zeta_identity", 1e-10),
    ("zeta_identity.runtime_ms", 1000.0),
    ("measure_identity", 1e-12),
    ("isometry.circle", 1e-8),
    ("isometry.su2", 1e-4),
    ("isometry.runtime_ms", 60_000.0),
    ("pairing_unitarity", 1e-4),
    ("inversion.circle", 1e-8),
    ("inversion.su2", 1e-4),
    ("inversion_constant.circle", 1e-6),
    ("inversion_constant.su2", 1e-4),
    ("flat.unitarity", 1e-6),
    ("flat.pistarinv", 1e-10),
    ("flat.backward_heat", 1e-5),
    ("geodesic.circle", 1e-10),
    ("geodesic.su2", 1e-8),
    ("geodesic.factorial", 0.1),
    ("kappa_one_form", 1e-8),
    ("kappa_one_form.abelian", 1e-14),
    ("reduction.circle", 1e-6),
    ("reduction.su2.z_score", 3.0),
    ("reduction.su2.relative_stderr", 5e-2),
    ("reduction.runtime_ms", 300_000.0),
    ("measure_limits", 1e-2),
    ("oracle.casimir", 1e-5),
    ("oracle.pushforward", 1e-6),
    ("oracle.quadrature", 1e-10),
];

/// Criteria in order, each backed by one check.
const CRITERIA: &[(&str, &str)] = &[
    (
        "zeta_identity",
        "zeta squared equals the determinant identity",
    ),
    ("measure_identity", "nu / gamma is the constant c_hbar"),
    ("isometry", "C_hbar is isometric onto the nu-weighted space"),
    (
        "pairing_unitarity",
        "pairing map is unitary up to a constant",
    ),
    (
        "inversion",
        "adjoint of the pairing inverts it up to a constant",
    ),
    (
        "flat",
        "flat case unitarity, inverse formula, backward heat",
    ),
    ("geodesic", "bracket series converges factorially to f_C"),
    ("kappa_one_form", "Im dbar kappa equals theta"),
    (
        "reduction",
        "lattice transform reduces to the group transform",
    ),
    (
        "measure_limits",
        "regularized measures approach their limits",
    ),
    ("oracles", "Casimir, pushforward and quadrature oracles"),
];

fn worst(rows: &[&TestReport]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{}{} {:.3e}/{:.0e}",
                if r.pass { "" } else { "!" },
                r.test_id,
                r.err,
                r.tolerance
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn main() -> ExitCode {
    let mut cfg = RunConfig::default();
    for (k, v) in PINNED {
        cfg.tolerances.insert(k.to_string(), *v);
    }
    if let Err(e) = cfg.validate() {
        println!("FAIL config: {e}");
        return ExitCode::FAILURE;
    }
    let list = checks();
    let started = Instant::now();
    let outputs = run_checks(&list, &cfg, true);
    let mut failed = 0;
    for (name, what) in CRITERIA {
        let Some(i) = list.iter().position(|c| c.name == *name) else {
            println!("FAIL {name}: no such check");
            failed += 1;
            continue;
        };
        let rows: Vec<&TestReport> = outputs[i].reports.iter().collect();
        let ok = !rows.is_empty() && rows.iter().all(|r| r.pass);
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name}: {what} [{}]",
            if ok { "PASS" } else { "FAIL" },
            worst(&rows)
        );
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        CRITERIA.len() - failed,
        CRITERIA.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
