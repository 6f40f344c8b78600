use std::fmt::Write as _;

use num_complex::Complex64;
use ontochain::cogwheel::{verify_generator_with, CogwheelSpec, GENERATOR_TOLERANCE};
use ontochain::hamiltonian::{
    approx_hamiltonian_apply, default_pair_site, down_pair_state, shift_difference, verify_bch_with,
    BCH_TOLERANCE,
};
use ontochain::hybrid::{HybridExperiment, Schedule, PROBABILITY_TOLERANCE};
use ontochain::states::{chain_update, orbit_census, orbit_length_histogram, zero_modes, MAX_CENSUS_SPINS};
use ontochain::{ChainConfig, OntState, SparseVector};
use serde_json::{json, Value};

use crate::config::{usage, CommandName, HybridInputs, UsageError};
use crate::report::{float, Report, Table};

/// Largest chain for which `chain-report` enumerates orbits.
pub const CENSUS_LIMIT: usize = 24;
pub const COGWHEEL_MAX_STATES: usize = 64;

pub struct Output {
    pub report: Report,
    /// Human-readable text for stdout.
    pub text: String,
}

fn chain(spins: usize, timestep: f64) -> Result<ChainConfig, UsageError> {
    ChainConfig::new(spins, timestep).map_err(|e| usage(format!("invalid chain: {e}")))
}

pub fn cogwheel_verify(
    n_min: usize,
    n_max: usize,
    timestep: f64,
    tol: Option<f64>,
    corruption: f64,
) -> Result<Output, UsageError> {
    if n_min < 2 || n_max > COGWHEEL_MAX_STATES || n_min > n_max {
        return Err(usage(format!(
            "N range {n_min}..={n_max} invalid: need 2 <= N_min <= N_max <= {COGWHEEL_MAX_STATES}"
        )));
    }
    if !(timestep.is_finite() && timestep > 0.0) {
        return Err(usage(format!("timestep must be positive, got {timestep}")));
    }
    let tol = tol.unwrap_or(GENERATOR_TOLERANCE);
    let reports: Vec<_> = (n_min..=n_max)
        .map(|n| {
            let spec = CogwheelSpec::new(n, timestep).expect("validated");
            verify_generator_with(&spec, tol, corruption)
        })
        .collect();

    let mut table = Table::new(
        "cogwheel-verify",
        &["n_states", "max_deviation", "diagonal_deviation", "standard_deviation", "pass"],
    );
    let mut text = String::new();
    for r in &reports {
        let std_dev = r.standard_deviation.map(float).unwrap_or_default();
        table.push(vec![
            r.n_states.to_string(),
            float(r.max_deviation()),
            float(r.diagonal_deviation),
            std_dev,
            r.pass.to_string(),
        ]);
        writeln!(
            text,
            "N={:<3} max deviation {:.3e}  {}",
            r.n_states,
            r.max_deviation(),
            if r.pass { "ok" } else { "FAIL" }
        )
        .unwrap();
    }
    let results = reports
        .iter()
        .map(|r| {
            json!({
                "n_states": r.n_states,
                "max_deviation": r.max_deviation(),
                "diagonal_deviation": r.diagonal_deviation,
                "standard_deviation": r.standard_deviation,
                "pass": r.pass,
            })
        })
        .collect();
    let pass = reports.iter().all(|r| r.pass);
    let mut echo = json!({"n_min": n_min, "n_max": n_max, "timestep": timestep, "tolerance": tol});
    if corruption != 0.0 {
        echo["inject_corruption"] = json!(corruption);
    }
    Ok(Output {
        report: Report {
            command: CommandName::CogwheelVerify.as_str(),
            config_echo: echo,
            results,
            tables: vec![table],
            pass,
        },
        text,
    })
}

pub fn chain_report(spins: usize, steps: usize, start: Option<&str>) -> Result<Output, UsageError> {
    let cfg = chain(spins, 1.0)?;
    let mut text = String::new();
    let mut results = Vec::new();
    let mut tables = Vec::new();
    let mut pass = true;

    if spins <= CENSUS_LIMIT.min(MAX_CENSUS_SPINS) {
        let orbits = orbit_census(&cfg).map_err(|e| usage(e.to_string()))?;
        let histogram = orbit_length_histogram(&orbits);
        let covered: u64 = histogram.iter().map(|&(l, c)| (l * c) as u64).sum();
        pass &= covered == cfg.dimension() && histogram.first() == Some(&(1, 4));
        let mut table = Table::new("chain-report-histogram", &["orbit_length", "count"]);
        writeln!(text, "orbit length histogram (2S={spins}, {} orbits):", orbits.len()).unwrap();
        for &(len, count) in &histogram {
            table.push(vec![len.to_string(), count.to_string()]);
            writeln!(text, "  L={len:<3} {count}").unwrap();
            results.push(json!({"kind": "histogram", "orbit_length": len, "count": count}));
        }
        tables.push(table);
    } else {
        writeln!(text, "orbit census skipped: 2S={spins} exceeds {CENSUS_LIMIT}").unwrap();
    }

    let mut table = Table::new("chain-report-zero-modes", &["index", "state"]);
    writeln!(text, "zero modes:").unwrap();
    for z in zero_modes(&cfg) {
        pass &= chain_update(&z, &cfg).map(|u| u == z).unwrap_or(false);
        table.push(vec![z.index().to_string(), z.to_string()]);
        writeln!(text, "  {z}  ({})", z.index()).unwrap();
        results.push(json!({"kind": "zero_mode", "index": z.index(), "state": z.to_string()}));
    }
    tables.push(table);

    let start_state = match start {
        Some(s) => {
            let st: OntState = s.parse().map_err(|e| usage(format!("--start: {e}")))?;
            if st.num_spins() != spins {
                return Err(usage(format!("--start has {} sites, expected {spins}", st.num_spins())));
            }
            st
        }
        None => down_pair_state(&cfg, default_pair_site(&cfg)).map_err(|e| usage(e.to_string()))?,
    };
    if steps > 0 {
        let mut table = Table::new("chain-report-trajectory", &["step", "index", "state"]);
        writeln!(text, "trajectory:").unwrap();
        let mut cur = start_state;
        for step in 0..=steps {
            table.push(vec![step.to_string(), cur.index().to_string(), cur.to_string()]);
            writeln!(text, "  {step:>4}  {cur}").unwrap();
            results.push(json!({"kind": "trajectory", "step": step, "index": cur.index(), "state": cur.to_string()}));
            cur = chain_update(&cur, &cfg).expect("sizes match");
        }
        tables.push(table);
    }

    Ok(Output {
        report: Report {
            command: CommandName::ChainReport.as_str(),
            config_echo: json!({"spins": spins, "steps": steps, "start": start_state.to_string()}),
            results,
            tables,
            pass,
        },
        text,
    })
}

pub fn bch_verify(spins: usize, timestep: f64, tol: Option<f64>) -> Result<Output, UsageError> {
    let cfg = chain(spins, timestep)?;
    let tol = tol.unwrap_or(BCH_TOLERANCE);
    let report = verify_bch_with(&cfg, tol).map_err(|e| usage(e.to_string()))?;
    let mut table = Table::new("bch-verify", &["orbit_min_index", "orbit_length", "max_deviation", "pass"]);
    let mut results = Vec::with_capacity(report.orbits.len());
    for o in &report.orbits {
        table.push(vec![
            o.orbit_min_index.to_string(),
            o.orbit_length.to_string(),
            float(o.max_deviation()),
            o.pass.to_string(),
        ]);
        results.push(json!({
            "orbit_min_index": o.orbit_min_index,
            "orbit_length": o.orbit_length,
            "max_deviation": o.max_deviation(),
            "exp_deviation": o.exp_deviation,
            "block_defect": o.block_defect,
            "spectrum_deviation": o.spectrum_deviation,
            "complement_deviation": o.complement_deviation,
            "uniform_gap_deviation": o.uniform_gap_deviation,
            "pass": o.pass,
        }));
    }
    let failing = report.orbits.iter().filter(|o| !o.pass).count();
    let text = format!(
        "2S={spins}: {} orbits checked, {failing} failing, max deviation {:.3e}\n",
        report.orbits.len(),
        report.max_deviation
    );
    Ok(Output {
        report: Report {
            command: CommandName::BchVerify.as_str(),
            config_echo: json!({"spins": spins, "timestep": timestep, "tolerance": tol}),
            results,
            tables: vec![table],
            pass: report.pass,
        },
        text,
    })
}

fn spin_row(label: &str, s: &OntState) -> String {
    let mut line = format!("{label:<6}");
    for up in s.spins() {
        line.push_str(if up { "  u" } else { "  d" });
    }
    line
}

pub fn bell_demo(spins: usize, pair_site: Option<usize>, timestep: f64) -> Result<Output, UsageError> {
    let cfg = chain(spins, timestep)?;
    let e = pair_site.unwrap_or_else(|| default_pair_site(&cfg));
    let psi = down_pair_state(&cfg, e).map_err(|err| usage(format!("pair site {e}: {err}")))?;
    let one = Complex64::new(1.0, 0.0);
    let v = SparseVector::from_pairs(spins, [(psi.index(), one)]).expect("valid index");
    let diff = shift_difference(&v, &cfg).expect("sizes match");
    let approx = approx_hamiltonian_apply(&v, &cfg).expect("sizes match");

    let mut table = Table::new("bell-demo", &["expression", "index", "state", "re", "im"]);
    let mut results = Vec::new();
    for (name, vec) in [("approx_hamiltonian", &approx), ("shift_difference", &diff)] {
        for (k, a) in vec.iter() {
            let s = OntState::from_index(spins, k).expect("valid index");
            table.push(vec![name.into(), k.to_string(), s.to_string(), float(a.re), float(a.im)]);
            results.push(json!({"expression": name, "index": k, "state": s.to_string(), "re": a.re, "im": a.im}));
        }
    }

    let mut text = String::new();
    let mut sites = format!("{:<6}", "site");
    let mut marks = format!("{:<6}", "");
    for site in 1..=spins {
        write!(sites, "{site:>3}").unwrap();
        let m = if site == e {
            'e'
        } else if site == e % spins + 1 {
            'o'
        } else {
            '.'
        };
        write!(marks, "{m:>3}").unwrap();
    }
    writeln!(text, "(U - U^dagger) |psi> on 2S={spins}, down pair at sites {e},{}:", e % spins + 1).unwrap();
    writeln!(text, "{sites}\n{marks}\n{}", spin_row("psi", &psi)).unwrap();
    let mut branches: Vec<(u64, Complex64)> = diff.iter().collect();
    branches.sort_by(|a, b| b.1.re.total_cmp(&a.1.re).then(a.0.cmp(&b.0)));
    for (k, a) in &branches {
        let s = OntState::from_index(spins, *k).expect("valid index");
        writeln!(text, "{}", spin_row(&format!("{:+}", a.re), &s)).unwrap();
    }
    let pass = diff.len() == 2 && branches[0].1 == one && branches[1].1 == -one;

    Ok(Output {
        report: Report {
            command: CommandName::BellDemo.as_str(),
            config_echo: json!({"spins": spins, "pair_site": e, "timestep": timestep}),
            results,
            tables: vec![table],
            pass,
        },
        text,
    })
}

pub fn hybrid(inputs: &HybridInputs, tol: Option<f64>) -> Result<Output, UsageError> {
    let tol = tol.unwrap_or(PROBABILITY_TOLERANCE);
    let mut experiment = HybridExperiment::new(inputs.quantum_chain)
        .with_schedule(Schedule::new(inputs.schedule.0, inputs.schedule.1))
        .with_sites(inputs.sites);
    experiment.classical_chain = inputs.classical_chain;
    let report = experiment
        .run(&inputs.quantum, &inputs.classical)
        .map_err(|e| usage(format!("hybrid experiment: {e}")))?;

    let mut table = Table::new(
        "hybrid",
        &["member_index", "probability", "schmidt_rank", "entropy_bits", "classification"],
    );
    let mut results = Vec::new();
    let mut text = String::new();
    let mut members = report.members.clone();
    members.sort_by_key(|m| m.member_index);
    for m in &members {
        let v = &m.verdict;
        table.push(vec![
            m.member_index.to_string(),
            float(m.probability),
            v.schmidt_rank.to_string(),
            float(v.entropy_bits),
            v.classification.to_string(),
        ]);
        results.push(json!({
            "member_index": m.member_index,
            "probability": m.probability,
            "classical_state": m.classical_state,
            "schmidt_rank": v.schmidt_rank,
            "schmidt_coefficients": v.schmidt_coefficients,
            "entropy_bits": v.entropy_bits,
            "classification": v.classification.as_str(),
            "left_support": v.left_support,
            "right_support": v.right_support,
            "norm_deviation": m.norm_deviation,
            "final_state": m.final_state,
        }));
        writeln!(
            text,
            "member {} (p={}, chain 2 = {}): rank {}, {:.6} bits, {}",
            m.member_index, m.probability, m.classical_state, v.schmidt_rank, v.entropy_bits, v.classification
        )
        .unwrap();
    }
    for (class, weight) in report.classification_weights() {
        writeln!(text, "  P({class}) = {weight}").unwrap();
    }
    let pass = report.max_norm_deviation() <= tol;
    if !pass {
        writeln!(text, "norm deviation {:.3e} exceeds {tol:.3e}", report.max_norm_deviation()).unwrap();
    }

    let branches: Vec<Value> = inputs
        .quantum
        .iter()
        .map(|(k, a)| {
            let s = OntState::from_index(inputs.quantum_chain.num_spins(), k).expect("valid index");
            json!({"state": s.to_string(), "amplitude": [a.re, a.im]})
        })
        .collect();
    let classical: Vec<Value> = inputs
        .classical
        .members()
        .iter()
        .map(|(p, s)| json!({"state": s.to_string(), "probability": p}))
        .collect();
    let echo = json!({
        "spins": inputs.quantum_chain.num_spins(),
        "classical_spins": inputs.classical_chain.num_spins(),
        "timestep": inputs.quantum_chain.timestep(),
        "schedule": {"updates_before": inputs.schedule.0, "updates_after": inputs.schedule.1},
        "sites": inputs.sites.map(|(i, j)| vec![i, j]),
        "quantum": branches,
        "classical": classical,
        "tolerance": tol,
    });
    Ok(Output {
        report: Report {
            command: CommandName::Hybrid.as_str(),
            config_echo: echo,
            results,
            tables: vec![table],
            pass,
        },
        text,
    })
}
