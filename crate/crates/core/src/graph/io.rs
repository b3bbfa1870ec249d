use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::io::{parse_err, read_matrix_csv, read_to_string, write_matrix_csv, write_string};

use super::Graph;

/// Loads a whitespace-separated, 0-indexed edge list and a headerless feature CSV.
pub fn load_graph(edge_path: &Path, feature_path: &Path) -> Result<Graph> {
    let features = read_features(feature_path)?;
    let edges = read_edges(edge_path)?;
    Graph::new(&edges, features)
}

pub fn read_features(path: &Path) -> Result<DenseMatrix> {
    let x = read_matrix_csv(path)?;
    if let Some(r) = (0..x.rows()).find(|&r| x.row(r).iter().any(|v| !v.is_finite())) {
        return Err(RslError::Validation(format!(
            "{}: non-finite feature in row {}",
            path.display(),
            r + 1
        )));
    }
    Ok(x)
}

fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = read_to_string(path)?;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] => continue,
            [a, b] => {
                let parse = |t: &str| {
                    t.parse::<usize>().map_err(|_| {
                        parse_err(path, i + 1, format!("`{t}` is not a node index"))
                    })
                };
                edges.push((parse(a)?, parse(b)?));
            }
            _ => {
                return Err(parse_err(
                    path,
                    i + 1,
                    format!("expected two indices, found {}", toks.len()),
                ))
            }
        }
    }
    Ok(edges)
}

pub fn write_edges(path: &Path, graph: &Graph) -> Result<()> {
    let mut s = String::new();
    for (i, j) in graph.edges() {
        s.push_str(&format!("{i} {j}\n"));
    }
    write_string(path, &s)
}

pub fn write_features(path: &Path, graph: &Graph) -> Result<()> {
    write_matrix_csv(path, graph.features())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files(edges: &str, feats: &str) -> (tempfile::TempDir, std::path::PathBuf, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("edges.txt");
        let f = dir.path().join("features.csv");
        std::fs::write(&e, edges).unwrap();
        std::fs::write(&f, feats).unwrap();
        (dir, e, f)
    }

    #[test]
    fn empty_edges_give_isolated_nodes() {
        let (_d, e, f) = files("", "1,2\n3,4\n5,6\n");
        let g = load_graph(&e, &f).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn single_edge_is_symmetric() {
        let (_d, e, f) = files("0 1\n", "1\n2\n");
        let g = load_graph(&e, &f).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert!(g.has_edge(1, 0));
    }

    #[test]
    fn out_of_range_edge() {
        let (_d, e, f) = files("0 5\n", "1\n2\n");
        assert!(matches!(load_graph(&e, &f), Err(RslError::Bounds { index: 5, len: 2 })));
    }

    #[test]
    fn malformed_line_reports_number() {
        let (_d, e, f) = files("0 1\n1 x\n", "1\n2\n");
        match load_graph(&e, &f) {
            Err(RslError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let (_d, e, f) = files("0 1 2\n", "1\n2\n");
        assert!(matches!(load_graph(&e, &f), Err(RslError::Parse { line: 1, .. })));
    }

    #[test]
    fn non_finite_feature() {
        let (_d, e, f) = files("", "1\ninf\n");
        assert!(matches!(load_graph(&e, &f), Err(RslError::Validation(_))));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let g = Graph::new(&[(0, 2), (1, 2)], DenseMatrix::from_vec(3, 1, vec![0.5, 1.5, -2.0]).unwrap()).unwrap();
        let e = dir.path().join("e.txt");
        let f = dir.path().join("f.csv");
        write_edges(&e, &g).unwrap();
        write_features(&f, &g).unwrap();
        assert_eq!(load_graph(&e, &f).unwrap(), g);
    }
}
