//! Experiment driver: builds the federation from a config, runs the rounds,
//! evaluates metrics at the configured cadence, and writes traces/summaries.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{apply_axis, ExperimentConfig, RunMode};
use crate::error::{Error, Result};
use crate::metrics::{expected_calibration_error, per_class_accuracy, test_accuracy};
use crate::model::AgentShard;
use crate::protocol::FederationState;
use crate::rng::SeededRng;

const SUB_SWEEP_CELL: u64 = 0xce11;

/// One CSV row of the metric trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub agent: usize,
    pub bits: u64,
    pub cum_bits: u64,
    pub accuracy: f64,
    pub ece: f64,
    pub per_class: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RoundRecord>,
    pub num_classes: usize,
}

impl ExperimentOutput {
    pub fn final_record(&self) -> Option<&RoundRecord> {
        self.records.last()
    }
}

struct Evaluator {
    test: AgentShard,
    ece_bins: usize,
}

impl Evaluator {
    fn eval(&self, state: &FederationState) -> Result<(f64, f64, Vec<f64>)> {
        let acc = test_accuracy(&state.global_particles, &self.test, &state.model)?;
        let ece =
            expected_calibration_error(&state.global_particles, &self.test, &state.model, self.ece_bins)?
                .ece;
        let per_class = per_class_accuracy(&state.global_particles, &self.test, &state.model)?;
        Ok((acc, ece, per_class))
    }
}

/// Run one experiment to completion, returning the full per-round trace.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mode = cfg.mode()?;
    let ds = cfg.dataset_spec()?;
    let model = ds.model()?;
    let rng = SeededRng::new(cfg.run.seed);

    let mut shards = ds.generate_shards(cfg.federation.agents, &rng)?;
    if mode == RunMode::Scratch {
        // retrain from scratch over the retained agents only
        let forget = cfg.unlearn_request()?;
        shards = shards
            .into_iter()
            .enumerate()
            .filter(|(idx, _)| !forget.agents().contains(idx))
            .map(|(_, s)| s)
            .collect();
    }
    let evaluator = Evaluator {
        test: ds.generate_test_set(&rng)?,
        ece_bins: cfg.run.ece_bins,
    };

    let mut state = FederationState::init_learning(
        model,
        cfg.federation_config()?,
        cfg.compression_config()?,
        shards,
        rng.derive(&[0xfed]),
    )?;

    let total_rounds = cfg.run.rounds
        + if mode == RunMode::Forget {
            cfg.run.forget_rounds
        } else {
            0
        };
    let mut records = Vec::with_capacity(total_rounds);
    let (mut acc, mut ece, mut per_class) = evaluator.eval(&state)?;

    let push_round = |state: &FederationState,
                          records: &mut Vec<RoundRecord>,
                          acc: &mut f64,
                          ece: &mut f64,
                          per_class: &mut Vec<f64>,
                          outcome: crate::protocol::RoundOutcome|
     -> Result<()> {
        let round = records.len() + 1;
        if round % cfg.run.eval_every == 0 || round == total_rounds {
            let (a, e, p) = evaluator.eval(state)?;
            *acc = a;
            *ece = e;
            *per_class = p;
        }
        records.push(RoundRecord {
            round,
            agent: outcome.agent,
            bits: outcome.uplink_bits,
            cum_bits: state.cumulative_bits,
            accuracy: *acc,
            ece: *ece,
            per_class: per_class.clone(),
        });
        Ok(())
    };

    for _ in 0..cfg.run.rounds {
        let outcome = match mode {
            RunMode::FedAvg => state.run_fedavg_round()?,
            _ => state.run_learning_round()?,
        };
        push_round(&state, &mut records, &mut acc, &mut ece, &mut per_class, outcome)?;
    }

    if mode == RunMode::Forget {
        let request = cfg.unlearn_request()?;
        state.prepare_unlearning(&request)?;
        state.compression = cfg.forget_compression_config()?;
        for _ in 0..cfg.run.forget_rounds {
            let outcome = state.run_unlearning_round(&request)?;
            push_round(&state, &mut records, &mut acc, &mut ece, &mut per_class, outcome)?;
        }
    }

    Ok(ExperimentOutput {
        records,
        num_classes: model.num_classes,
    })
}

pub fn write_trace_csv(path: &Path, output: &ExperimentOutput) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = vec![
        "round".to_string(),
        "agent".to_string(),
        "bits".to_string(),
        "cum_bits".to_string(),
        "accuracy".to_string(),
        "ece".to_string(),
    ];
    header.extend((0..output.num_classes).map(|c| format!("acc_class_{c}")));
    writeln!(file, "{}", header.join(","))?;
    for r in &output.records {
        let mut row = vec![
            r.round.to_string(),
            r.agent.to_string(),
            r.bits.to_string(),
            r.cum_bits.to_string(),
            r.accuracy.to_string(),
            r.ece.to_string(),
        ];
        row.extend(r.per_class.iter().map(|v| v.to_string()));
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryResult {
    pub mode: String,
    pub seed: u64,
    pub rounds_completed: usize,
    pub total_bits: u64,
    pub final_accuracy: f64,
    pub final_ece: f64,
    pub final_per_class: Vec<f64>,
}

/// Summary file: final metrics plus a reloadable echo of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub result: SummaryResult,
    pub config: ExperimentConfig,
}

pub fn make_summary(cfg: &ExperimentConfig, output: &ExperimentOutput) -> Summary {
    let last = output.records.last();
    Summary {
        result: SummaryResult {
            mode: cfg.run.mode.clone(),
            seed: cfg.run.seed,
            rounds_completed: output.records.len(),
            total_bits: last.map_or(0, |r| r.cum_bits),
            final_accuracy: last.map_or(f64::NAN, |r| r.accuracy),
            final_ece: last.map_or(f64::NAN, |r| r.ece),
            final_per_class: last.map_or_else(Vec::new, |r| r.per_class.clone()),
        },
        config: cfg.clone(),
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = toml::to_string_pretty(summary)
        .map_err(|e| Error::invalid(format!("summary serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::invalid(format!("summary parse: {e}")))
}

/// Run one experiment and write `<prefix>_trace.csv` and `<prefix>_summary.toml`.
pub fn run_to_files(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let output = run_experiment(cfg)?;
    let trace = out_dir.join(format!("{}_trace.csv", cfg.output.prefix));
    let summary = out_dir.join(format!("{}_summary.toml", cfg.output.prefix));
    write_trace_csv(&trace, &output)?;
    write_summary(&summary, &make_summary(cfg, &output))?;
    Ok((trace, summary))
}

/// One sweep cell result; failed cells carry the error text instead of metrics.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub value: f64,
    pub status: std::result::Result<Summary, String>,
}

/// Derive the per-cell config (axis value applied, sub-seed installed).
pub fn sweep_cell_config(
    cfg: &ExperimentConfig,
    axis: &str,
    index: usize,
    value: f64,
) -> Result<ExperimentConfig> {
    let mut cell = apply_axis(cfg, axis, value)?;
    cell.sweep = None;
    // mask to 63 bits so the seed echoed into the TOML summary stays
    // representable as a TOML integer
    cell.run.seed = SeededRng::new(cfg.run.seed)
        .derive(&[SUB_SWEEP_CELL, index as u64])
        .seed()
        & (i64::MAX as u64);
    cell.output.prefix = format!("{}_{}_{}", cfg.output.prefix, axis, value);
    Ok(cell)
}

/// Run every sweep cell; cell failures are recorded, not fatal.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<SweepCell>> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::config("sweep", "config has no [sweep] section"))?;
    std::fs::create_dir_all(out_dir)?;
    let mut cells = Vec::new();
    for (i, &value) in sweep.values.iter().enumerate() {
        let status = (|| -> Result<Summary> {
            let cell_cfg = sweep_cell_config(cfg, &sweep.axis, i, value)?;
            cell_cfg.validate()?;
            let output = run_experiment(&cell_cfg)?;
            let trace = out_dir.join(format!("{}_trace.csv", cell_cfg.output.prefix));
            write_trace_csv(&trace, &output)?;
            let summary = make_summary(&cell_cfg, &output);
            write_summary(
                &out_dir.join(format!("{}_summary.toml", cell_cfg.output.prefix)),
                &summary,
            )?;
            Ok(summary)
        })();
        cells.push(SweepCell {
            value,
            status: status.map_err(|e| e.to_string()),
        });
    }
    write_sweep_summary(
        &out_dir.join(format!("{}_sweep_summary.csv", cfg.output.prefix)),
        &sweep.axis,
        &cells,
    )?;
    Ok(cells)
}

pub fn write_sweep_summary(path: &Path, axis: &str, cells: &[SweepCell]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        file,
        "{axis},status,rounds,total_bits,final_accuracy,final_ece"
    )?;
    for cell in cells {
        match &cell.status {
            Ok(s) => writeln!(
                file,
                "{},ok,{},{},{},{}",
                cell.value,
                s.result.rounds_completed,
                s.result.total_bits,
                s.result.final_accuracy,
                s.result.final_ece
            )?,
            Err(e) => writeln!(file, "{},failed,,,,{}", cell.value, e.replace(',', ";"))?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
[dataset]
generator = "blobs"
classes = 2
feature_dim = 1
agent_examples = 20
test_examples = 20

[federation]
agents = 2
particles = 3
local_steps = 1
local_distill_steps = 1

[compression]
scheme = "shared"
ratio = 0.5
quant_bits = 4

[run]
mode = "dsvgd"
rounds = 6
eval_every = 2
seed = 77
"#,
        )
        .unwrap()
    }

    #[test]
    fn trace_has_one_row_per_round() {
        let out = run_experiment(&small_cfg()).unwrap();
        assert_eq!(out.records.len(), 6);
        assert_eq!(out.records[0].round, 1);
        assert_eq!(out.records[5].round, 6);
    }

    #[test]
    fn zero_rounds_empty_trace() {
        let mut cfg = small_cfg();
        cfg.run.rounds = 0;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn deterministic_records() {
        let a = run_experiment(&small_cfg()).unwrap();
        let b = run_experiment(&small_cfg()).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn cumulative_bits_fixed_per_round() {
        let out = run_experiment(&small_cfg()).unwrap();
        let per_round = out.records[0].bits;
        for (i, r) in out.records.iter().enumerate() {
            assert_eq!(r.bits, per_round);
            assert_eq!(r.cum_bits, per_round * (i as u64 + 1));
        }
    }

    #[test]
    fn forget_override_switches_uplink_cost_between_phases() {
        let mut cfg = small_cfg();
        cfg.run.mode = "forget".to_string();
        cfg.run.forget_agents = vec![1];
        cfg.run.forget_rounds = 4;
        cfg.compression.forget = Some(Box::new(crate::config::CompressionSection {
            ratio: Some(0.25),
            forget: None,
            ..cfg.compression.clone()
        }));
        cfg.validate().unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 10);
        let learn_bits = out.records[0].bits;
        let forget_bits = out.records[6].bits;
        assert!(out.records[..6].iter().all(|r| r.bits == learn_bits));
        assert!(out.records[6..].iter().all(|r| r.bits == forget_bits));
        assert!(
            forget_bits < learn_bits,
            "expected the smaller forget-phase ratio to cost fewer bits \
             ({forget_bits} vs {learn_bits})"
        );
    }

    #[test]
    fn summary_config_round_trips() {
        let cfg = small_cfg();
        let out = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.toml");
        write_summary(&path, &make_summary(&cfg, &out)).unwrap();
        let back = read_summary(&path).unwrap();
        assert_eq!(back.config, cfg);
        back.config.validate().unwrap();
    }

    #[test]
    fn sweep_cells_match_individual_runs() {
        let mut cfg = small_cfg();
        cfg.sweep = Some(crate::config::SweepSection {
            axis: "N_p".to_string(),
            values: vec![2.0, 4.0],
        });
        let dir = tempfile::tempdir().unwrap();
        let cells = run_sweep(&cfg, dir.path()).unwrap();
        assert_eq!(cells.len(), 2);
        for (i, cell) in cells.iter().enumerate() {
            let summary = cell.status.as_ref().unwrap();
            let solo_cfg = sweep_cell_config(&cfg, "N_p", i, cell.value).unwrap();
            let solo = run_experiment(&solo_cfg).unwrap();
            assert_eq!(
                summary.result.final_accuracy,
                solo.records.last().unwrap().accuracy
            );
            assert_eq!(summary.result.final_ece, solo.records.last().unwrap().ece);
        }
    }

    #[test]
    fn sweep_continues_past_failed_cells() {
        let mut cfg = small_cfg();
        cfg.sweep = Some(crate::config::SweepSection {
            axis: "R_u".to_string(),
            values: vec![1.0, 10000.0], // 1 bit is infeasible
        });
        let dir = tempfile::tempdir().unwrap();
        let cells = run_sweep(&cfg, dir.path()).unwrap();
        assert!(cells[0].status.is_err());
        assert!(cells[1].status.is_ok());
    }

    #[test]
    fn empty_sweep_emits_no_rows() {
        let mut cfg = small_cfg();
        cfg.sweep = Some(crate::config::SweepSection {
            axis: "r".to_string(),
            values: vec![],
        });
        let dir = tempfile::tempdir().unwrap();
        let cells = run_sweep(&cfg, dir.path()).unwrap();
        assert!(cells.is_empty());
    }

    #[test]
    fn csv_is_byte_identical_across_reruns() {
        let cfg = small_cfg();
        let dir = tempfile::tempdir().unwrap();
        let (trace_a, _) = run_to_files(&cfg, &dir.path().join("a")).unwrap();
        let (trace_b, _) = run_to_files(&cfg, &dir.path().join("b")).unwrap();
        assert_eq!(
            std::fs::read(trace_a).unwrap(),
            std::fs::read(trace_b).unwrap()
        );
    }
}
