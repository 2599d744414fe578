//! Command-line front end: run mechanisms on profiles, verify truthfulness
//! over grids, decompose black-box tables, compute fairness reports, and
//! reproduce the experiment suites.
//!
//! Exit codes: 0 success, 1 a verified property failed (deviation witnesses
//! or falsification findings), 2 input or configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pexmech::analysis::{
    decompose, tabulate, tabulate_serial, tabulate_spec, verify_truthful, AnalysisError,
    BuiltinRule, MechanismTable,
};
use pexmech::experiments as exp;
use pexmech::fairness::fairness_report;
use pexmech::grid::{GridError, DEFAULT_BUDGET};
use pexmech::rat::{decimal_approx, format_rational, parse_rational, Q};
use pexmech::{Allocation, GridSpec, ItemSet, PickingExchangeSpec, Profile, SerialSpec};

#[derive(Parser)]
#[command(
    name = "pexmech",
    about = "Truthful no-payment allocation mechanisms: run, verify, decompose, and stress-test",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on a profile and print the allocation plus a fairness
    /// report.
    Run(RunArgs),
    /// Exhaustively search a grid for profitable unilateral deviations.
    Verify(VerifyArgs),
    /// Recover the picking/exchange structure of a mechanism from its table.
    Decompose(DecomposeArgs),
    /// Fairness report for an explicit allocation.
    Fairness(FairnessArgs),
    /// Reproducible experiment suites.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// Mechanism file (two-player or serial JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Profile file: {"m":…, "values":[[…]…]}.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated ascending positive levels; default 1,B,B^2,B^3 with
    /// B = m+1.
    #[arg(long)]
    grid_levels: Option<String>,
    /// Make grid profiles tie-free via the 2^j/2^(m+1) bump.
    #[arg(long)]
    perturb: bool,
    /// Cap on the number of grid profiles.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

impl GridArgs {
    fn build(&self, m: usize, players: usize) -> Result<GridSpec> {
        let levels = match &self.grid_levels {
            Some(text) => text
                .split(',')
                .map(|s| parse_rational(s).map_err(|e| anyhow!("bad grid level `{s}`: {e}")))
                .collect::<Result<Vec<Q>>>()?,
            None => GridSpec::default_levels(m),
        };
        GridSpec::new(m, levels, self.perturb, players).map_err(|e| anyhow!(e))
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Mechanism, serial mechanism, builtin rule, or table file.
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Directory for the binary table cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Mechanism, builtin rule, or table file.
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FairnessArgs {
    /// Profile file.
    #[arg(long)]
    profile: PathBuf,
    /// Allocation as bundles separated by `|`, e.g. "2,3,6|1,4,5"; an empty
    /// bundle is an empty segment.
    #[arg(long)]
    allocation: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// One of: app1-envy, app2-ef1, app3-mms, app4-v2, worst-singleton.
    id: String,
    /// Item count (app1-envy: number of unit items; the instance has m+1
    /// items).
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Exponents for app1-envy, as a comma list or lo..hi range.
    #[arg(long, default_value = "1..6")]
    d: String,
    /// Near-tie margin; must satisfy 0 < eps < 1.
    #[arg(long)]
    eps: Option<String>,
    /// Noise level; must satisfy 0 < delta < eps/m^2.
    #[arg(long)]
    delta: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Anything `verify`/`decompose` can take as input.
enum MechanismInput {
    Spec(PickingExchangeSpec),
    Serial(SerialSpec),
    Builtin(BuiltinRule),
    Table(MechanismTable),
}

fn load_mechanism_input(path: &Path) -> Result<MechanismInput> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| anyhow!("{} must hold a JSON object", path.display()))?;
    let input = if obj.contains_key("builtin") {
        MechanismInput::Builtin(serde_json::from_value(value).context("bad builtin rule file")?)
    } else if obj.contains_key("bundles") && obj.contains_key("grid") {
        MechanismInput::Table(serde_json::from_value(value).context("bad table file")?)
    } else if obj.contains_key("parts") {
        MechanismInput::Serial(serde_json::from_value(value).context("bad serial mechanism")?)
    } else {
        MechanismInput::Spec(serde_json::from_value(value).context("bad mechanism file")?)
    };
    Ok(input)
}

fn load_profile(path: &Path) -> Result<Profile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("bad profile in {}", path.display()))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn validate_spec(spec: &PickingExchangeSpec) -> Result<()> {
    let violations = spec.validate();
    if violations.is_empty() {
        return Ok(());
    }
    let mut msg = String::from("invalid mechanism:\n");
    for v in violations {
        msg.push_str(&format!("  - {v}\n"));
    }
    bail!(msg);
}

fn report_text(report: &pexmech::fairness::FairnessReport) -> String {
    let mut out = String::new();
    for pl in &report.players {
        let ratio = |x: &Option<pexmech::fairness::QJson>| match x {
            Some(j) => format!("{} ({})", format_rational(&j.0), decimal_approx(&j.0, 4)),
            None => "-".into(),
        };
        out.push_str(&format!(
            "player {}: bundle={} value={} envy={} proportional={} ef1={} mms={} mms_ratio={} alpha={} guarantee={} guarantee_ratio={}\n",
            pl.player,
            pl.bundle,
            format_rational(&pl.bundle_value),
            format_rational(&pl.envy),
            pl.proportional,
            pl.ef1,
            format_rational(&pl.mms),
            ratio(&pl.mms_ratio),
            format_rational(&pl.alpha),
            format_rational(&pl.guarantee),
            ratio(&pl.guarantee_ratio),
        ));
    }
    out.push_str(&format!(
        "allocation: envy_free={} proportional={} ef1={} max_envy={}\n",
        report.envy_free,
        report.proportional,
        report.ef1,
        format_rational(&report.max_envy)
    ));
    out
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode> {
    let profile = load_profile(&args.profile)?;
    let input = load_mechanism_input(&args.spec)?;
    let allocation: Allocation = match &input {
        MechanismInput::Spec(spec) => {
            validate_spec(spec)?;
            spec.allocate(&profile).map_err(|e| anyhow!(e))?
        }
        MechanismInput::Serial(spec) => spec.allocate(&profile).map_err(|e| anyhow!(e))?,
        _ => bail!("run needs a mechanism file, not a table or builtin rule"),
    };
    let report = if profile.player_count() == 2 {
        Some(fairness_report(&profile, &allocation).map_err(|e| anyhow!(e))?)
    } else {
        None
    };
    match args.format {
        Format::Json => {
            let json = serde_json::json!({
                "allocation": allocation,
                "report": report,
            });
            emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&json)?))?;
        }
        Format::Csv => {
            let mut content =
                format!("{}\n", pexmech::fairness::FairnessReport::csv_header());
            if let Some(r) = &report {
                for row in r.csv_rows() {
                    content.push_str(&row);
                    content.push('\n');
                }
            }
            emit(&args.out, &content)?;
        }
        Format::Text => {
            let mut content = format!("{allocation}\n");
            if let Some(r) = &report {
                content.push_str(&report_text(r));
            }
            emit(&args.out, &content)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn budget_hint(err: AnalysisError, m: usize) -> anyhow::Error {
    if let AnalysisError::Grid(GridError::BudgetExceeded { count, budget }) = &err {
        let b = (m + 1) as i64;
        return anyhow!(
            "grid has {count} profiles, exceeding the budget of {budget}; \
             try fewer levels, e.g. --grid-levels 1,{b},{}",
            b * b
        );
    }
    anyhow!(err)
}

fn build_table(
    input: &MechanismInput,
    grid_args: &GridArgs,
    cache_dir: Option<&Path>,
) -> Result<MechanismTable> {
    match input {
        MechanismInput::Table(t) => Ok(t.clone()),
        MechanismInput::Spec(spec) => {
            validate_spec(spec)?;
            let grid = grid_args.build(spec.m, 2)?;
            if let Some(dir) = cache_dir {
                let path = pexmech::cache::cache_path(dir, spec, &grid);
                if let Some(table) = pexmech::cache::load_table(&path)? {
                    return Ok(table);
                }
                let table = tabulate_spec(spec, &grid, grid_args.budget)
                    .map_err(|e| budget_hint(e, spec.m))?;
                pexmech::cache::save_table(&path, &table)?;
                Ok(table)
            } else {
                tabulate_spec(spec, &grid, grid_args.budget).map_err(|e| budget_hint(e, spec.m))
            }
        }
        MechanismInput::Serial(spec) => {
            spec.validate().map_err(|e| anyhow!(e))?;
            let grid = grid_args.build(spec.m, spec.players)?;
            tabulate_serial(spec, &grid, grid_args.budget).map_err(|e| budget_hint(e, spec.m))
        }
        MechanismInput::Builtin(rule) => {
            let violations = rule.validate();
            if !violations.is_empty() {
                bail!("invalid builtin rule: {violations:?}");
            }
            let m = rule.item_count();
            let grid = grid_args.build(m, 2)?;
            tabulate(rule.as_rule().as_ref(), &grid, grid_args.budget)
                .map_err(|e| budget_hint(e, m))
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let input = load_mechanism_input(&args.input)?;
    let table = build_table(&input, &args.grid, args.cache_dir.as_deref())?;
    let report = verify_truthful(&table).map_err(|e| anyhow!(e))?;
    match args.format {
        Format::Json => {
            let witnesses: Vec<serde_json::Value> = report
                .witnesses
                .iter()
                .take(20)
                .map(|w| {
                    serde_json::json!({
                        "profile_index": w.profile_index,
                        "player": w.player,
                        "deviation_combo": w.deviation_combo,
                        "gain": format_rational(&w.gain),
                    })
                })
                .collect();
            let json = serde_json::json!({
                "truthful": report.is_truthful(),
                "checks": report.checks,
                "violations": report.total_violations,
                "witnesses": witnesses,
            });
            emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&json)?))?;
        }
        _ => {
            let mut content = if report.is_truthful() {
                format!("TRUTHFUL on grid (0 violations / {} checks)\n", report.checks)
            } else {
                format!(
                    "NOT TRUTHFUL on grid ({} violations / {} checks)\n",
                    report.total_violations, report.checks
                )
            };
            for w in report.witnesses.iter().take(5) {
                let p = w.profile(&table);
                content.push_str(&format!(
                    "  witness: profile #{} player {} gains {} by reporting {:?}\n    profile: {:?}\n",
                    w.profile_index,
                    w.player,
                    format_rational(&w.gain),
                    w.deviation(&table),
                    p,
                ));
            }
            emit(&args.out, &content)?;
        }
    }
    Ok(if report.is_truthful() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<ExitCode> {
    let input = load_mechanism_input(&args.input)?;
    let table = build_table(&input, &args.grid, None)?;
    match decompose(&table) {
        Ok(d) => {
            let deals: Vec<serde_json::Value> = d
                .deals
                .iter()
                .map(|(g, t)| serde_json::json!({"give": g, "take": t}))
                .collect();
            let json = serde_json::json!({
                "N1": d.picking_regions[0],
                "O1": d.offers[0],
                "N2": d.picking_regions[1],
                "O2": d.offers[1],
                "E1": d.endowments[0],
                "E2": d.endowments[1],
                "deals": deals,
                "maximal_controlled_1": d.maximal_controlled[0],
                "maximal_controlled_2": d.maximal_controlled[1],
                "skipped_entries": d.skipped_entries,
            });
            match args.format {
                Format::Json | Format::Csv => {
                    emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&json)?))?
                }
                Format::Text => {
                    let mut content = String::new();
                    content.push_str(&format!(
                        "N1={} O1={:?}\nN2={} O2={:?}\nE1={} E2={}\n",
                        d.picking_regions[0],
                        d.offers[0],
                        d.picking_regions[1],
                        d.offers[1],
                        d.endowments[0],
                        d.endowments[1],
                    ));
                    for (g, t) in &d.deals {
                        content.push_str(&format!("deal: give {g} take {t}\n"));
                    }
                    emit(&args.out, &content)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(AnalysisError::NotTruthful { violations }) => {
            emit(
                &args.out,
                &format!("NOT TRUTHFUL: {violations} violating cases; decomposition refused\n"),
            )?;
            Ok(ExitCode::from(1))
        }
        Err(AnalysisError::Falsified { findings }) => {
            let mut content = String::from("STRUCTURE FALSIFIED:\n");
            for f in findings {
                content.push_str(&format!("  - {f}\n"));
            }
            emit(&args.out, &content)?;
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(anyhow!(e)),
    }
}

fn parse_allocation(text: &str, m: usize) -> Result<Allocation> {
    let mut bundles = Vec::new();
    for part in text.split('|') {
        let part = part.trim();
        let mut set = ItemSet::EMPTY;
        if !part.is_empty() {
            for item in part.split(',') {
                let item: usize = item
                    .trim()
                    .parse()
                    .with_context(|| format!("bad item `{item}` in allocation"))?;
                set = set.with(item);
            }
        }
        bundles.push(set);
    }
    Allocation::new(bundles, ItemSet::full(m)).map_err(|e| anyhow!(e))
}

fn cmd_fairness(args: &FairnessArgs) -> Result<ExitCode> {
    let profile = load_profile(&args.profile)?;
    let allocation = parse_allocation(&args.allocation, profile.item_count())?;
    let report = fairness_report(&profile, &allocation).map_err(|e| anyhow!(e))?;
    match args.format {
        Format::Json => emit(
            &args.out,
            &format!("{}\n", serde_json::to_string_pretty(&report)?),
        )?,
        Format::Csv => {
            let mut content = format!("{}\n", pexmech::fairness::FairnessReport::csv_header());
            for row in report.csv_rows() {
                content.push_str(&row);
                content.push('\n');
            }
            emit(&args.out, &content)?;
        }
        Format::Text => emit(&args.out, &report_text(&report))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_d_list(text: &str) -> Result<Vec<u32>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().context("bad d range")?;
        let hi: u32 = hi.trim().parse().context("bad d range")?;
        if lo > hi {
            bail!("empty d range `{text}`");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<u32>().context("bad d value"))
        .collect()
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let eps = match &args.eps {
        Some(s) => parse_rational(s).map_err(|e| anyhow!("bad --eps: {e}"))?,
        None => exp::default_eps(),
    };
    let delta = match &args.delta {
        Some(s) => parse_rational(s).map_err(|e| anyhow!("bad --delta: {e}"))?,
        None => exp::default_delta(),
    };
    let m = args.m;
    let render = |rows_json: serde_json::Value, rows_csv: String| -> Result<()> {
        match args.format {
            Format::Csv | Format::Text => emit(&args.out, &rows_csv),
            Format::Json => emit(&args.out, &format!("{}\n", serde_json::to_string_pretty(&rows_json)?)),
        }
    };
    match args.id.as_str() {
        "app1-envy" => {
            let d_values = parse_d_list(&args.d)?;
            let rows = exp::app1_envy(m, &d_values).map_err(|e| anyhow!(e))?;
            render(serde_json::to_value(&rows)?, exp::rows_to_csv(&rows))?;
        }
        "app2-ef1" => {
            let rows = exp::app2_ef1(m, &eps, &delta).map_err(|e| anyhow!(e))?;
            render(serde_json::to_value(&rows)?, exp::rows_to_csv(&rows))?;
        }
        "app3-mms" | "app4-v2" => {
            let rows = exp::share_family_rows(m, &eps, &delta).map_err(|e| anyhow!(e))?;
            render(serde_json::to_value(&rows)?, exp::rows_to_csv(&rows))?;
        }
        "worst-singleton" => {
            let grid = args.grid.build(m, 2)?;
            let rows =
                exp::worst_singleton(m, &grid, args.grid.budget).map_err(|e| anyhow!(e))?;
            render(serde_json::to_value(&rows)?, exp::rows_to_csv(&rows))?;
        }
        other => bail!(
            "unknown experiment `{other}`; expected app1-envy, app2-ef1, app3-mms, app4-v2, or worst-singleton"
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Fairness(args) => cmd_fairness(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
