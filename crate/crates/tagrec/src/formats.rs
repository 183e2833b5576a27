//! Tab-separated file formats: datasets, split files and model snapshots.
//!
//! Every file may open with `# key=value` header lines; other `#` lines are
//! comments. Floats are written with Rust's shortest round-trip formatting.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use tagrec_core::{Blacklist, DatasetSplit, Folksonomy, FolksonomyBuilder, LdaConfig, ResourceId, TopicModel};

use crate::config::{hex, parse_hex};
use crate::error::CliError;

pub type Header = BTreeMap<String, String>;

pub const DATASET_MAGIC: &str = "tagrec-dataset v1";
pub const SPLIT_MAGIC: &str = "tagrec-split v1";
pub const MODEL_MAGIC: &str = "tagrec-model v1";

pub const TRAIN_FILE: &str = "train.tsv";
pub const TEST_FILE: &str = "test.tsv";

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes `contents`, creating parent directories as needed.
pub fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Renders header pairs as `# key=value` lines, after an optional magic line.
pub fn header_block(magic: Option<&str>, pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    if let Some(magic) = magic {
        let _ = writeln!(out, "# {magic}");
    }
    for (k, v) in pairs {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

/// Splits `text` into header pairs and data lines (1-based line numbers).
fn split_lines(text: &str) -> (Header, Vec<(usize, &str)>) {
    let mut header = Header::new();
    let mut data = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.trim_start().split_once('=') {
                header.entry(k.trim().to_string()).or_insert_with(|| v.trim().to_string());
            }
        } else if !line.trim().is_empty() {
            data.push((i + 1, line));
        }
    }
    (header, data)
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Header value parsed as a hex fingerprint, if present.
fn header_hex(header: &Header, key: &str, path: &Path) -> Result<Option<u64>, CliError> {
    match header.get(key) {
        None => Ok(None),
        Some(v) => parse_hex(v)
            .map(Some)
            .ok_or_else(|| parse_error(path, 0, format!("bad {key} value '{v}'"))),
    }
}

/// Feeds each `user\tresource\ttag\ttimestamp` row to `add`.
fn read_rows(
    path: &Path,
    text: &str,
    mut add: impl FnMut(&str, &str, &str, i64) -> Result<bool, tagrec_core::FolksonomyError>,
) -> Result<Header, CliError> {
    let (header, lines) = split_lines(text);
    for (n, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_error(path, n, format!("expected 4 tab-separated fields, got {}", fields.len())));
        }
        let ts: i64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| parse_error(path, n, format!("bad timestamp '{}'", fields[3])))?;
        add(fields[0].trim(), fields[1].trim(), fields[2], ts).map_err(|e| parse_error(path, n, e.to_string()))?;
    }
    Ok(header)
}

/// Summary of a dataset load.
#[derive(Debug)]
pub struct Loaded {
    pub folksonomy: Folksonomy,
    pub header: Header,
    pub rows_seen: usize,
    pub rows_dropped: usize,
}

/// Reads a raw tag-assignment file or a dataset snapshot. A snapshot's
/// declared fingerprint must match its content.
pub fn load_dataset(path: &Path, blacklist: Blacklist) -> Result<Loaded, CliError> {
    let text = read_text(path)?;
    let mut builder = FolksonomyBuilder::new(blacklist);
    let header = read_rows(path, &text, |u, r, t, ts| builder.add_row(u, r, t, ts))?;
    let (rows_seen, rows_dropped) = (builder.rows_seen(), builder.rows_dropped());
    let folksonomy = builder.build()?;
    if let Some(declared) = header_hex(&header, "dataset", path)? {
        if declared != folksonomy.fingerprint() {
            return Err(CliError::Fingerprint(format!(
                "{}: content fingerprint {} does not match declared {}",
                path.display(),
                hex(folksonomy.fingerprint()),
                hex(declared)
            )));
        }
    }
    Ok(Loaded {
        folksonomy,
        header,
        rows_seen,
        rows_dropped,
    })
}

fn push_rows(out: &mut String, f: &Folksonomy) {
    for row in f.canonical_rows() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", row.user, row.resource, row.tag, row.timestamp);
    }
}

/// Canonical dataset snapshot: header plus rows sorted by
/// (user, timestamp, resource, tag).
pub fn dataset_snapshot(f: &Folksonomy, header: &[(String, String)]) -> String {
    let stats = f.stats();
    let mut pairs = vec![
        ("dataset".to_string(), hex(f.fingerprint())),
        ("posts".to_string(), stats.posts.to_string()),
        ("users".to_string(), stats.users.to_string()),
        ("resources".to_string(), stats.resources.to_string()),
        ("tags".to_string(), stats.tags.to_string()),
        ("tag_assignments".to_string(), stats.tag_assignments.to_string()),
    ];
    pairs.extend_from_slice(header);
    let mut out = header_block(Some(DATASET_MAGIC), &pairs);
    out.push_str("# columns: user\tresource\ttag\ttimestamp\n");
    push_rows(&mut out, f);
    out
}

/// Contents of `train.tsv` and `test.tsv`.
pub fn split_files(split: &DatasetSplit, header: &[(String, String)]) -> (String, String) {
    let split_id = split.split_id();
    let mut pairs = vec![
        ("split_id".to_string(), hex(split_id)),
        ("train".to_string(), hex(split.train.fingerprint())),
    ];
    pairs.extend_from_slice(header);

    let mut train = header_block(Some(SPLIT_MAGIC), &pairs);
    train.push_str("# part=train\n");
    push_rows(&mut train, &split.train);

    let test_f = Folksonomy::from_posts(split.train.shared_vocab(), split.test.iter().cloned());
    let mut test = header_block(Some(SPLIT_MAGIC), &pairs);
    test.push_str("# part=test\n");
    push_rows(&mut test, &test_f);
    (train, test)
}

pub fn write_split(dir: &Path, split: &DatasetSplit, header: &[(String, String)]) -> Result<(), CliError> {
    let (train, test) = split_files(split, header);
    write_text(&dir.join(TRAIN_FILE), &train)?;
    write_text(&dir.join(TEST_FILE), &test)
}

#[derive(Debug)]
pub struct LoadedSplit {
    pub split: DatasetSplit,
    pub split_id: u64,
}

/// Loads a split directory, refusing halves from different splits or
/// content that does not match the declared split id.
pub fn load_split(dir: &Path) -> Result<LoadedSplit, CliError> {
    let train_path = dir.join(TRAIN_FILE);
    let test_path = dir.join(TEST_FILE);
    let train_text = read_text(&train_path)?;
    let test_text = read_text(&test_path)?;

    // split files are already normalized
    let mut builder = FolksonomyBuilder::new(Blacklist::empty());
    let train_header = read_rows(&train_path, &train_text, |u, r, t, ts| builder.add_row(u, r, t, ts))?;
    let test_header = read_rows(&test_path, &test_text, |u, r, t, ts| builder.add_held_out_row(u, r, t, ts))?;

    let ids = (
        header_hex(&train_header, "split_id", &train_path)?,
        header_hex(&test_header, "split_id", &test_path)?,
    );
    let declared = match ids {
        (Some(a), Some(b)) if a == b => a,
        (Some(a), Some(b)) => {
            return Err(CliError::Fingerprint(format!(
                "train split_id {} differs from test split_id {}",
                hex(a),
                hex(b)
            )))
        }
        _ => return Err(CliError::Fingerprint(format!("{}: split files carry no split_id", dir.display()))),
    };
    let split = builder.build_split()?;
    if split.test.is_empty() {
        return Err(CliError::Data(format!("{}: no test posts", test_path.display())));
    }
    let actual = split.split_id();
    if actual != declared {
        return Err(CliError::Fingerprint(format!(
            "split content fingerprint {} does not match declared {}",
            hex(actual),
            hex(declared)
        )));
    }
    Ok(LoadedSplit { split, split_id: actual })
}

/// A model snapshot keyed by names, so it can be rebound to any folksonomy
/// holding the same tags and resources.
pub fn model_snapshot(
    model: &TopicModel,
    f: &Folksonomy,
    split_id: u64,
    paper_mode: bool,
    header: &[(String, String)],
) -> String {
    let c = model.config();
    let mut pairs = vec![
        ("topics".to_string(), c.num_topics.to_string()),
        ("alpha".to_string(), c.alpha.to_string()),
        ("eta".to_string(), c.eta.to_string()),
        ("iterations".to_string(), c.iterations.to_string()),
        ("seed".to_string(), c.seed.to_string()),
        ("fold_in_sweeps".to_string(), c.fold_in_sweeps.to_string()),
        ("trained_on".to_string(), hex(model.trained_on())),
        ("split_id".to_string(), hex(split_id)),
        ("paper_mode".to_string(), paper_mode.to_string()),
    ];
    pairs.extend_from_slice(header);
    let mut out = header_block(Some(MODEL_MAGIC), &pairs);
    for (col, &tag) in model.tags().iter().enumerate() {
        let _ = write!(out, "phi\t{}", f.tag_name(tag));
        for row in model.phi() {
            let _ = write!(out, "\t{}", row[col]);
        }
        out.push('\n');
    }
    let mut thetas: Vec<(&str, &[f64])> = model.thetas().map(|(r, row)| (f.resource_name(r), row)).collect();
    thetas.sort_by(|a, b| a.0.cmp(b.0));
    for (name, row) in thetas {
        let _ = write!(out, "theta\t{name}");
        for v in row {
            let _ = write!(out, "\t{v}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug)]
pub struct LoadedModel {
    pub model: TopicModel,
    pub paper_mode: bool,
}

fn header_value<T: std::str::FromStr>(header: &Header, key: &str, path: &Path) -> Result<T, CliError> {
    let raw = header
        .get(key)
        .ok_or_else(|| parse_error(path, 0, format!("missing header '{key}'")))?;
    raw.parse()
        .map_err(|_| parse_error(path, 0, format!("bad header value {key}={raw}")))
}

/// Loads a model snapshot for `split`, checking it was trained on that
/// split: on its training part, or on all of it in paper mode.
pub fn load_model(path: &Path, split: &LoadedSplit) -> Result<LoadedModel, CliError> {
    let text = read_text(path)?;
    let (header, lines) = split_lines(&text);
    let split_id = header_hex(&header, "split_id", path)?
        .ok_or_else(|| parse_error(path, 0, "missing header 'split_id'"))?;
    let trained_on = header_hex(&header, "trained_on", path)?
        .ok_or_else(|| parse_error(path, 0, "missing header 'trained_on'"))?;
    let paper_mode: bool = header_value(&header, "paper_mode", path)?;
    if split_id != split.split_id {
        return Err(CliError::Fingerprint(format!(
            "model belongs to split {}, not {}",
            hex(split_id),
            hex(split.split_id)
        )));
    }
    let expected = if paper_mode { split.split_id } else { split.split.train.fingerprint() };
    if trained_on != expected {
        return Err(CliError::Fingerprint(format!(
            "model trained on {}, expected {}",
            hex(trained_on),
            hex(expected)
        )));
    }

    let config = LdaConfig {
        num_topics: header_value(&header, "topics", path)?,
        alpha: header_value(&header, "alpha", path)?,
        eta: header_value(&header, "eta", path)?,
        iterations: header_value(&header, "iterations", path)?,
        seed: header_value(&header, "seed", path)?,
        fold_in_sweeps: header_value(&header, "fold_in_sweeps", path)?,
    };
    let z = config.num_topics;
    let f = &split.split.train;
    let mut tags = Vec::new();
    let mut phi = vec![Vec::new(); z];
    let mut theta: BTreeMap<ResourceId, Vec<f64>> = BTreeMap::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != z + 2 {
            return Err(parse_error(path, n, format!("expected {} fields, got {}", z + 2, fields.len())));
        }
        let values = fields[2..]
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| parse_error(path, n, e.to_string()))?;
        match fields[0] {
            "phi" => {
                let tag = f
                    .tag_id(fields[1])
                    .ok_or_else(|| parse_error(path, n, format!("unknown tag '{}'", fields[1])))?;
                tags.push(tag);
                for (k, v) in values.into_iter().enumerate() {
                    phi[k].push(v);
                }
            }
            "theta" => {
                let r = f
                    .resource_id(fields[1])
                    .ok_or_else(|| parse_error(path, n, format!("unknown resource '{}'", fields[1])))?;
                theta.insert(r, values);
            }
            other => return Err(parse_error(path, n, format!("unknown record '{other}'"))),
        }
    }
    let model = TopicModel::from_parts(config, tags, theta, phi, trained_on)
        .map_err(|e| parse_error(path, 0, e.to_string()))?;
    Ok(LoadedModel { model, paper_mode })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_comments() {
        let (h, data) = split_lines("# tagrec-dataset v1\n# a=1\n# columns: x\n\nu\tr\tt\t5\n");
        assert_eq!(h.get("a").map(String::as_str), Some("1"));
        assert_eq!(h.len(), 1);
        assert_eq!(data, vec![(5, "u\tr\tt\t5")]);
    }

    #[test]
    fn bad_rows_are_located() {
        let path = Path::new("x.tsv");
        let err = read_rows(path, "u\tr\tt\t1\nu\tr\tt\n", |_, _, _, _| Ok(true)).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
        let err = read_rows(path, "u\tr\tt\tsoon\n", |_, _, _, _| Ok(true)).unwrap_err();
        assert_eq!(err.exit_code(), 5);
    }
}
