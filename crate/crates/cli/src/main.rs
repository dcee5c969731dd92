//! `codehelp`: run the help service or inspect a query store offline.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::{NaiveDate, Utc};
use clap::{Args, Parser, Subcommand};
use codehelp_core::analytics;
use codehelp_core::guardrail::prompts::{render_main_prompt, render_removal_prompt, render_sufficiency_prompt};
use codehelp_core::llm::estimate_cost;
use codehelp_core::llm::mock::ScriptedBackend;
use codehelp_core::registry::{Page, Principal, QueryFilter, Registry, SortOrder};
use codehelp_core::{ClassId, CompletionBackend, HelpQuery};
use codehelp_server::ServerConfig;
use rust_decimal::Decimal;

#[derive(Parser)]
#[command(name = "codehelp", version, about = "Guardrailed programming help for classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service. Settings come from CODEHELP_* environment variables.
    Serve {
        /// Answer every request with a canned offline backend instead of the provider.
        #[arg(long)]
        mock: bool,
    },
    /// Write a class's queries as CSV.
    ExportCsv {
        #[command(flatten)]
        store: Store,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Usage analytics as CSV.
    Analytics {
        #[command(flatten)]
        store: Store,
        #[command(subcommand)]
        report: Report,
    },
    /// Total provider cost of a class's stored queries.
    Cost {
        #[command(flatten)]
        store: Store,
    },
    /// Print the prompts a query would produce, without calling any model.
    RenderPrompts {
        #[arg(long, default_value = "Python")]
        language: String,
        #[arg(long)]
        code: Option<String>,
        #[arg(long)]
        error: Option<String>,
        #[arg(long)]
        issue: String,
        /// Keyword the response should avoid. Repeatable.
        #[arg(long = "avoid")]
        avoid: Vec<String>,
        /// Also render the rewrite prompt for this response text.
        #[arg(long)]
        removal_of: Option<String>,
    },
}

#[derive(Args)]
struct Store {
    /// SQLite query store.
    #[arg(long, env = "CODEHELP_DB")]
    db: PathBuf,
    #[arg(long)]
    class: String,
}

#[derive(Subcommand)]
enum Report {
    Weekly {
        /// First day of term; defaults to the class setting.
        #[arg(long)]
        term_start: Option<NaiveDate>,
        #[arg(long, default_value_t = 12)]
        weeks: u32,
    },
    Heatmap {
        /// Defaults to the class timezone.
        #[arg(long)]
        tz: Option<String>,
    },
    Intensity {
        #[arg(long, value_delimiter = ',', default_value = "10,30,100")]
        thresholds: Vec<u64>,
    },
}

fn open_store(store: &Store) -> Result<(Registry, ClassId)> {
    if !store.db.exists() {
        bail!("no query store at {}", store.db.display());
    }
    let registry = Registry::open(&store.db).with_context(|| format!("opening {}", store.db.display()))?;
    let class = ClassId::new(store.class.as_str());
    if !registry.class_exists(&class)? {
        bail!("class {:?} is not in {}", store.class, store.db.display());
    }
    Ok((registry, class))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

async fn serve(mock: bool) -> Result<()> {
    let config = ServerConfig::from_env()?;
    let backend: Arc<dyn CompletionBackend> = if mock {
        Arc::new(ScriptedBackend::canned())
    } else {
        codehelp_server::provider_backend()?
    };
    codehelp_server::serve(config, backend).await?;
    Ok(())
}

fn analytics_report(store: &Store, report: &Report) -> Result<String> {
    let (registry, class) = open_store(store)?;
    let activity = registry.class_activity(Principal::Operator, &class)?;
    Ok(match report {
        Report::Weekly { term_start, weeks } => {
            let Some(start) = term_start.or(activity.config.term_start) else {
                bail!("class has no term start; pass --term-start");
            };
            analytics::csv::weekly(&activity.weekly(start, *weeks)?)
        }
        Report::Heatmap { tz } => analytics::csv::heatmap(&activity.heatmap(tz.as_deref())?),
        Report::Intensity { thresholds } => analytics::csv::intensity(&activity.intensity(thresholds)),
    })
}

fn total_cost(store: &Store) -> Result<(usize, Decimal)> {
    let (registry, class) = open_store(store)?;
    let prices = match std::env::var_os("CODEHELP_CONFIG") {
        Some(_) => ServerConfig::from_env()?.prices,
        None => codehelp_core::llm::PriceTable::june_2023(),
    };
    let page = registry.list_queries(Principal::Operator, &class, &QueryFilter::default(), SortOrder::default(), Page::ALL)?;
    let mut total = Decimal::ZERO;
    for record in &page.records {
        total += estimate_cost(&record.response.model_usages(), &prices)?;
    }
    Ok((page.total, total))
}

fn render(
    language: String,
    code: Option<String>,
    error: Option<String>,
    issue: String,
    avoid: &[String],
    removal_of: Option<&str>,
) -> Result<String> {
    let query = HelpQuery::new(language, code, error, issue)?;
    let mut out = format!(
        "=== sufficiency ===\n{}\n\n=== main ===\n{}\n",
        render_sufficiency_prompt(&query),
        render_main_prompt(&query, avoid)
    );
    if let Some(text) = removal_of {
        out.push_str(&format!("\n=== removal ===\n{}\n", render_removal_prompt(text)));
    }
    Ok(out)
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info,tower_http=debug".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Serve { mock } => serve(mock).await,
        Command::ExportCsv { store, output } => {
            let (registry, class) = open_store(&store)?;
            write_out(output.as_deref(), &registry.export_csv(Principal::Operator, &class)?)
        }
        Command::Analytics { store, report } => write_out(None, analytics_report(&store, &report)?.as_bytes()),
        Command::Cost { store } => {
            let (count, total) = total_cost(&store)?;
            println!("queries: {count}");
            println!("total_usd: {}", total.normalize());
            if count > 0 {
                println!("mean_usd: {}", (total / Decimal::from(count)).round_dp(6).normalize());
            }
            println!("as_of: {}", Utc::now().to_rfc3339());
            Ok(())
        }
        Command::RenderPrompts { language, code, error, issue, avoid, removal_of } => {
            print!("{}", render(language, code, error, issue, &avoid, removal_of.as_deref())?);
            Ok(())
        }
    }
}
