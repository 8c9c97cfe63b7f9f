// Scratch tool: margin scan over candidate master seeds. Not part of the
// shipped surface; run as `cargo run --example seedscan -- [--full] SEED...`.

use imblab_harness::{run_experiment, ExperimentConfig, ResultRecord};

const LEARNERS: [&str; 5] = ["lr", "nn", "rf", "svm", "gbt"];
const RESAMPLED: [&str; 3] = ["under", "smote", "hybrid"];

fn cell(rs: &[ResultRecord], p: &str, r: &str, l: &str, ir: f64, m: &str) -> (f64, f64) {
    rs.iter()
        .find(|x| x.paradigm == p && x.resampler == r && x.learner == l && x.ir == ir && x.metric == m)
        .map(|x| (x.mean, x.stderr))
        .unwrap_or_else(|| panic!("missing cell {p}/{r}/{l}/{ir}/{m}"))
}

fn comb(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let full = args.iter().any(|a| a == "--full");
    let seeds: Vec<u64> =
        args.iter().filter(|a| a.as_str() != "--full").map(|a| a.parse().expect("seed")).collect();

    for seed in seeds {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_fast_profile();
        cfg.master_seed = seed;
        if !full {
            cfg.paradigms.truncate(2);
            cfg.ir_list = vec![1.0];
        }
        let start = std::time::Instant::now();
        let out = run_experiment(&cfg, 8);
        assert!(out.failures.is_empty(), "failures: {:?}", out.failures);
        let rs = &out.records;
        let irs = cfg.ir_list.clone();

        let mut worst2 = f64::INFINITY;
        let mut tag2 = String::new();
        for l in LEARNERS {
            for &ir in &irs {
                let (mo, so) = cell(rs, "cc", "original", l, ir, "risk");
                for r in RESAMPLED {
                    let (mr, sr) = cell(rs, "cc", r, l, ir, "risk");
                    let slack = mr + 2.0 * comb(so, sr) - mo;
                    if slack < worst2 {
                        worst2 = slack;
                        tag2 = format!("{l}/{r}/ir{ir}");
                    }
                }
            }
        }

        let mut worst4 = f64::INFINITY;
        let mut tag4 = String::new();
        for l in LEARNERS {
            for &ir in &irs {
                let (mcs, scs) = cell(rs, "cs", "original", l, ir, "cost");
                let (mcc, scc) = cell(rs, "cc", "original", l, ir, "cost");
                let slack = mcc + 2.0 * comb(scs, scc) - mcs;
                if slack < worst4 {
                    worst4 = slack;
                    tag4 = format!("{l}/ir{ir}");
                }
            }
        }

        print!(
            "seed {seed}: c2 {worst2:+.4} at {tag2}; c4 {worst4:+.4} at {tag4}"
        );

        if full {
            let mut worst3 = f64::INFINITY;
            let mut tag3 = String::new();
            for l in LEARNERS {
                let (mb, sb) = cell(rs, "cc", "original", l, 128.0, "type1");
                let (mu, su) = cell(rs, "cc", "under", l, 128.0, "type1");
                let slack = mb - mu - 2.0 * comb(sb, su);
                if slack < worst3 {
                    worst3 = slack;
                    tag3 = l.to_string();
                }
            }
            let mut max5 = f64::NEG_INFINITY;
            let mut tag5 = String::new();
            for r in ["original", "under", "smote", "hybrid"] {
                for l in LEARNERS {
                    for &ir in &irs {
                        let (m, _) = cell(rs, "np", r, l, ir, "type1");
                        if m > max5 {
                            max5 = m;
                            tag5 = format!("{r}/{l}/ir{ir}");
                        }
                    }
                }
            }
            let mut worst6 = f64::INFINITY;
            for l in ["rf", "svm"] {
                let (mb, _) = cell(rs, "np", "original", l, 128.0, "type2");
                let (mu, _) = cell(rs, "np", "under", l, 128.0, "type2");
                worst6 = worst6.min(mb - 0.7).min(mb - mu - 0.3);
            }
            print!(
                "; c3 {worst3:+.4} at {tag3}; c5 max {max5:.4} at {tag5}; c6 {worst6:+.4}"
            );
        }
        println!(" [{:.0}s]", start.elapsed().as_secs_f64());
    }
}
