//! Reader and writer for the TUDataset text layout.
//!
//! A dataset `DS` lives in one directory:
//!
//! ```text
//! DS_A.txt                 "u, v" per line, 1-indexed global node ids
//! DS_graph_indicator.txt   graph id (1-indexed) of node i on line i
//! DS_graph_labels.txt      class value of graph i on line i
//! DS_node_labels.txt       optional, label of node i on line i
//! ```
//!
//! Class values are remapped to `0..class_count` in ascending order of the
//! raw value; the inverse map is kept in [`DatasetBundle::class_map`].

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{one_hot, DatasetBundle, GraphBuilder, GraphError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("required file {0} not found")]
    MissingFile(PathBuf),
    #[error("no *_A.txt file in {0}")]
    NoDataset(PathBuf),
    #[error("{file}:{line}: cannot parse {token:?} as an integer")]
    Parse { file: String, line: usize, token: String },
    #[error("{file}:{line}: {message}")]
    Consistency { file: String, line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn read_file(path: &Path) -> Result<String, IngestError> {
    if !path.exists() {
        return Err(IngestError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

/// Parses every non-empty line as a comma-separated list of integers.
/// Returns `(line_number, values)` pairs, 1-based line numbers.
fn parse_rows(path: &Path) -> Result<Vec<(usize, Vec<i64>)>, IngestError> {
    let text = read_file(path)?;
    let file = file_name(path);
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut values = Vec::new();
        for token in trimmed.split(',') {
            let token = token.trim();
            let value = token
                .parse::<i64>()
                .map_err(|_| IngestError::Parse { file: file.clone(), line: i + 1, token: token.to_string() })?;
            values.push(value);
        }
        rows.push((i + 1, values));
    }
    Ok(rows)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Finds the dataset prefix `DS` from the `DS_A.txt` file in `dir`.
pub fn dataset_prefix(dir: &Path) -> Result<String, IngestError> {
    let entries = fs::read_dir(dir).map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter_map(|name| name.strip_suffix("_A.txt").map(str::to_string))
        .collect();
    names.sort();
    names.into_iter().next().ok_or_else(|| IngestError::NoDataset(dir.to_path_buf()))
}

fn single_column(path: &Path, rows: Vec<(usize, Vec<i64>)>) -> Result<Vec<(usize, i64)>, IngestError> {
    rows.into_iter()
        .map(|(line, values)| match values.as_slice() {
            [v] => Ok((line, *v)),
            _ => Err(IngestError::Consistency {
                file: file_name(path),
                line,
                message: format!("expected one value, found {}", values.len()),
            }),
        })
        .collect()
}

pub fn load_tudataset(dir: impl AsRef<Path>) -> Result<DatasetBundle, IngestError> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(IngestError::NoDataset(dir.to_path_buf()));
    }
    let prefix = dataset_prefix(dir)?;
    let path = |suffix: &str| dir.join(format!("{prefix}_{suffix}"));

    let a_path = path("A.txt");
    let indicator_path = path("graph_indicator.txt");
    let graph_labels_path = path("graph_labels.txt");
    let node_labels_path = path("node_labels.txt");

    // Check required files up front so the error names the first missing one.
    for p in [&a_path, &indicator_path, &graph_labels_path] {
        if !p.exists() {
            return Err(IngestError::MissingFile(p.clone()));
        }
    }

    let indicator = single_column(&indicator_path, parse_rows(&indicator_path)?)?;
    let graph_label_rows = single_column(&graph_labels_path, parse_rows(&graph_labels_path)?)?;
    let num_graphs = graph_label_rows.len();

    // node (0-based global) -> (graph, local index)
    let mut node_graph = Vec::with_capacity(indicator.len());
    let mut graph_sizes = vec![0usize; num_graphs];
    for &(line, gid) in &indicator {
        if gid < 1 || gid as usize > num_graphs {
            return Err(IngestError::Consistency {
                file: file_name(&indicator_path),
                line,
                message: format!("graph id {gid} outside 1..={num_graphs}"),
            });
        }
        let g = gid as usize - 1;
        node_graph.push((g, graph_sizes[g]));
        graph_sizes[g] += 1;
    }
    let total_nodes = node_graph.len();

    let (node_labels, has_node_labels) = if node_labels_path.exists() {
        let rows = single_column(&node_labels_path, parse_rows(&node_labels_path)?)?;
        if rows.len() != total_nodes {
            return Err(IngestError::Invalid(format!(
                "{} has {} lines but there are {total_nodes} nodes",
                file_name(&node_labels_path),
                rows.len()
            )));
        }
        let mut labels = Vec::with_capacity(total_nodes);
        for (line, value) in rows {
            if value < 0 || value > u32::MAX as i64 {
                return Err(IngestError::Consistency {
                    file: file_name(&node_labels_path),
                    line,
                    message: format!("node label {value} is negative or too large"),
                });
            }
            labels.push(value as u32);
        }
        (labels, true)
    } else {
        (vec![0; total_nodes], false)
    };

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    let a_file = file_name(&a_path);
    for (line, values) in parse_rows(&a_path)? {
        let [u, v] = values.as_slice() else {
            return Err(IngestError::Consistency {
                file: a_file.clone(),
                line,
                message: format!("expected two endpoints, found {}", values.len()),
            });
        };
        let lookup = |x: i64| -> Result<(usize, usize), IngestError> {
            if x < 1 || x as usize > total_nodes {
                return Err(IngestError::Consistency {
                    file: a_file.clone(),
                    line,
                    message: format!("node {x} outside 1..={total_nodes}"),
                });
            }
            Ok(node_graph[x as usize - 1])
        };
        let (gu, lu) = lookup(*u)?;
        let (gv, lv) = lookup(*v)?;
        if gu != gv {
            return Err(IngestError::Consistency {
                file: a_file.clone(),
                line,
                message: format!("edge ({u}, {v}) joins graphs {} and {}", gu + 1, gv + 1),
            });
        }
        if lu == lv {
            return Err(IngestError::Consistency {
                file: a_file.clone(),
                line,
                message: format!("self-loop on node {u}"),
            });
        }
        edges[gu].push((lu, lv));
    }

    let raw_classes: BTreeSet<i64> = graph_label_rows.iter().map(|&(_, v)| v).collect();
    let class_map: Vec<i64> = raw_classes.into_iter().collect();
    let label_vocab_size = node_labels.iter().map(|&l| l as usize + 1).max().unwrap_or(1);

    let mut per_graph_labels: Vec<Vec<u32>> = graph_sizes.iter().map(|&n| Vec::with_capacity(n)).collect();
    for (node, &(g, _)) in node_graph.iter().enumerate() {
        per_graph_labels[g].push(node_labels[node]);
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    for (g, labels) in per_graph_labels.into_iter().enumerate() {
        let class = class_map.binary_search(&graph_label_rows[g].1).expect("class in map");
        let features = one_hot(&labels, label_vocab_size);
        let graph = GraphBuilder::new(graph_sizes[g])
            .edges(std::mem::take(&mut edges[g]))
            .labels(labels)
            .features(features)
            .graph_label(class)
            .build_dedup()?;
        graphs.push(graph);
    }

    Ok(DatasetBundle {
        name: prefix,
        graphs,
        label_vocab_size,
        class_count: class_map.len(),
        class_map,
        has_node_labels,
    })
}

/// Writes `bundle` in the same layout under `dir`, listing each edge in both
/// directions. Loading the result gives back an equal bundle.
pub fn save_tudataset(bundle: &DatasetBundle, dir: impl AsRef<Path>) -> Result<(), IngestError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
    let name = &bundle.name;
    let mut a = String::new();
    let mut indicator = String::new();
    let mut graph_labels = String::new();
    let mut node_labels = String::new();
    let mut offset = 0usize;
    for (gi, g) in bundle.graphs.iter().enumerate() {
        for &(u, v) in g.edges() {
            a.push_str(&format!("{}, {}\n", u + offset + 1, v + offset + 1));
            a.push_str(&format!("{}, {}\n", v + offset + 1, u + offset + 1));
        }
        for &l in g.node_labels() {
            indicator.push_str(&format!("{}\n", gi + 1));
            node_labels.push_str(&format!("{l}\n"));
        }
        let class = g.graph_label().unwrap_or(0);
        graph_labels.push_str(&format!("{}\n", bundle.class_map.get(class).copied().unwrap_or(class as i64)));
        offset += g.num_nodes();
    }
    let mut files = vec![("A.txt", a), ("graph_indicator.txt", indicator), ("graph_labels.txt", graph_labels)];
    if bundle.has_node_labels {
        files.push(("node_labels.txt", node_labels));
    }
    for (suffix, body) in files {
        let path = dir.join(format!("{name}_{suffix}"));
        let mut f = fs::File::create(&path).map_err(|source| IngestError::Io { path: path.clone(), source })?;
        f.write_all(body.as_bytes()).map_err(|source| IngestError::Io { path: path.clone(), source })?;
    }
    Ok(())
}
