//! Text input formats for the applications.
//!
//! * graphs: one `u v w` edge per line (whitespace or commas)
//! * trees: `thresholds:`, `labels:` and optional `features:` lines, each a
//!   level-order value list
//! * tables: CSV with a header row

use crate::apps::{Graph, Table, Tree};
use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn numbers<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("line {line}: '{t}' is not a non-negative integer"))))
        .collect()
}

/// Node count is one past the largest index, or the `nodes N` header if present.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut g = Graph::default();
    let mut declared = None;
    for (line, l) in content_lines(text) {
        if let Some(rest) = l.strip_prefix("nodes") {
            declared = Some(
                rest.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {line}: bad node count")))?,
            );
            continue;
        }
        let v: Vec<u64> = numbers(line, l)?;
        let [u, w_to, w] = v[..] else {
            return Err(Error::Parse(format!("line {line}: expected 'u v w', got {} fields", v.len())));
        };
        g.edges.push((u as usize, w_to as usize, w));
    }
    let used = g.edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    g.n = match declared {
        Some(n) if n < used => return Err(Error::Parse(format!("edge index {} beyond {n} nodes", used - 1))),
        Some(n) => n,
        None => used,
    };
    Ok(g)
}

pub fn parse_tree(text: &str) -> Result<Tree> {
    let (mut thresholds, mut labels, mut features) = (None, None, None);
    for (line, l) in content_lines(text) {
        let (key, rest) = l
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("line {line}: expected 'key: values'")))?;
        match key.trim() {
            "thresholds" => thresholds = Some(numbers::<u64>(line, rest)?),
            "labels" => labels = Some(numbers::<u64>(line, rest)?),
            "features" => features = Some(numbers::<usize>(line, rest)?),
            k => return Err(Error::Parse(format!("line {line}: unknown key '{k}'"))),
        }
    }
    let thresholds = thresholds.ok_or_else(|| Error::Parse("missing thresholds".into()))?;
    let labels = labels.ok_or_else(|| Error::Parse("missing labels".into()))?;
    let nodes = thresholds.len();
    if !(nodes + 1).is_power_of_two() || nodes == 0 {
        return Err(Error::Parse(format!("{nodes} thresholds do not form a complete tree")));
    }
    let depth = (nodes + 1).trailing_zeros() as usize;
    let split = |flat: &[usize]| (0..depth).map(|l| flat[(1 << l) - 1..(1 << (l + 1)) - 1].to_vec()).collect();
    let features = match features {
        Some(f) if f.len() != nodes => return Err(Error::Parse(format!("{} features for {nodes} nodes", f.len()))),
        Some(f) => Some(split(&f)),
        None => None,
    };
    let levels = (0..depth).map(|l| thresholds[(1 << l) - 1..(1 << (l + 1)) - 1].to_vec()).collect();
    Tree::from_levels(levels, features, labels).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_table_csv(text: &str) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let mut cols: Vec<Vec<u64>> = vec![Vec::new(); headers.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        for (c, cell) in rec.iter().enumerate() {
            let v = cell
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: '{cell}' in column '{}' is not an integer", i + 1, &headers[c])))?;
            cols[c].push(v);
        }
    }
    Table::new(headers.iter().zip(cols).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list() {
        let g = parse_edge_list("# demo\n0 1 4\n1,2,1\n0 2 10  # long way\n").unwrap();
        assert_eq!(g.n, 3);
        assert_eq!(g.edges, vec![(0, 1, 4), (1, 2, 1), (0, 2, 10)]);
        assert_eq!(parse_edge_list("nodes 5\n0 1 2").unwrap().n, 5);
        assert!(matches!(parse_edge_list("0 1"), Err(Error::Parse(_))));
        assert!(matches!(parse_edge_list("0 1 -3"), Err(Error::Parse(_))));
        assert!(parse_edge_list("nodes 1\n0 1 2").is_err());
    }

    #[test]
    fn tree() {
        let t = parse_tree("thresholds: 5 3 7\nlabels: 10 20 30 40\n").unwrap();
        assert_eq!(t.depth, 2);
        assert_eq!(t.infer_plain(&[4]), 20);
        let t = parse_tree("thresholds: 5 3 7\nfeatures: 0 1 1\nlabels: 1 2 3 4").unwrap();
        assert_eq!(t.features, vec![vec![0], vec![1, 1]]);
        assert!(parse_tree("thresholds: 5 3\nlabels: 1 2 3").is_err());
        assert!(parse_tree("labels: 1 2").is_err());
        assert!(parse_tree("thresholds: 1\nlabels: 1 2 3").is_err());
        assert!(parse_tree("depth: 3").is_err());
    }

    #[test]
    fn table() {
        let t = parse_table_csv("id, salary\n7, 100\n8, 110\n").unwrap();
        assert_eq!(t.rows(), 2);
        assert_eq!(t.column("salary").unwrap(), &[100, 110]);
        assert!(matches!(parse_table_csv("a,b\n1,x\n"), Err(Error::Parse(_))));
        assert!(parse_table_csv("a,b\n1\n").is_err());
    }
}
