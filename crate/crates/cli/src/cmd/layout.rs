//! `htmlforge layout`: build a local/transient-global attention layout and
//! report its geometry; optionally dump the full edge list in COO form.

use std::path::PathBuf;

use htmlforge_core::attention::{
    build_layout, LayoutConfig, DEFAULT_BLOCK_SIZE, DEFAULT_LOCAL_RADIUS,
};
use serde::{Deserialize, Serialize};

use crate::run::{finish, parse_config, resolved_json, Failure, RunManifest};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutCliConfig {
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub r: Option<usize>,
    pub k: Option<usize>,
}

/// The fully-determined geometry that gets hashed into the manifest.
#[derive(Debug, Serialize)]
struct ResolvedLayout {
    #[serde(rename = "L")]
    l: usize,
    r: usize,
    k: usize,
}

pub struct LayoutArgs<'a> {
    pub l: Option<usize>,
    pub r: Option<usize>,
    pub k: Option<usize>,
    pub output: Option<&'a PathBuf>,
    pub seed: u64,
    pub config: Option<&'a str>,
}

pub fn run(args: LayoutArgs<'_>) -> Result<(), Failure> {
    let cli_config: LayoutCliConfig = parse_config(args.config)?;
    let l = args
        .l
        .or(cli_config.l)
        .ok_or_else(|| Failure::config_invalid("L: required (sequence length)"))?;
    let r = args.r.or(cli_config.r).unwrap_or(DEFAULT_LOCAL_RADIUS);
    let k = args.k.or(cli_config.k).unwrap_or(DEFAULT_BLOCK_SIZE);
    let resolved = resolved_json(&ResolvedLayout { l, r, k });
    let mut manifest = RunManifest::new("layout", &resolved, args.seed);

    let layout = build_layout(LayoutConfig { seq_len: l, local_radius: r, block_size: k })
        .map_err(|e| Failure::config_invalid(e.to_string()))?;
    let summary = layout.summary_json();

    manifest.count("L", l as u64);
    manifest.count("r", r as u64);
    manifest.count("k", k as u64);
    manifest.count("global-blocks", layout.global_blocks() as u64);
    manifest.count("nnz", layout.nnz());

    println!("{summary}");
    match args.output {
        Some(dir) => {
            let mut summary_pretty =
                serde_json::to_string_pretty(&summary).expect("summary serializes");
            summary_pretty.push('\n');
            let mut coo = Vec::new();
            layout
                .write_coo(&mut coo)
                .map_err(|e| Failure::internal(format!("render edge list: {e}")))?;
            let coo = String::from_utf8(coo).expect("edge list is ASCII");
            finish(
                Some(dir),
                manifest,
                &[("layout.json", &summary_pretty), ("layout.coo", &coo)],
            )
        }
        None => finish(None, manifest, &[]),
    }
}
