//! CSV artifacts: labelled square matrices, coordinates and cluster labels.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so a matrix survives a write/read round trip bit for bit.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::embed::{Embedding, UserGeometry};
use crate::netstruct::SpanningTree;
use crate::synthgen::GaussianGroups;
use crate::{Error, Result, Scalar};

fn num<T: Scalar>(v: T) -> String {
    format!("{}", v.as_f64())
}

/// Square matrix with a header row and a leading ID column.
pub fn write_matrix_csv<T: Scalar, W: Write>(w: W, ids: &[String], m: &DMatrix<T>) -> Result<()> {
    if m.shape() != (ids.len(), ids.len()) {
        return Err(Error::InvalidInput(format!(
            "matrix {:?} does not match {} ids",
            m.shape(),
            ids.len()
        )));
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["id".to_string()];
    header.extend(ids.iter().cloned());
    out.write_record(&header)?;
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend((0..ids.len()).map(|j| num(m[(i, j)])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv<T: Scalar, R: Read>(r: R) -> Result<(Vec<String>, DMatrix<T>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let ids: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_string).collect();
    let n = ids.len();
    let mut m = DMatrix::zeros(n, n);
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if i >= n || rec.len() != n + 1 {
            return Err(Error::Malformed {
                line,
                message: format!("expected {n} rows of {} fields", n + 1),
            });
        }
        if rec[0] != ids[i] {
            return Err(Error::Malformed {
                line,
                message: format!("row id {:?} does not match column id {:?}", &rec[0], ids[i]),
            });
        }
        for j in 0..n {
            let v: f64 = rec[j + 1].trim().parse().map_err(|_| Error::Malformed {
                line,
                message: format!("bad number {:?}", &rec[j + 1]),
            })?;
            m[(i, j)] = T::lit(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Malformed {
            line: rows + 2,
            message: format!("expected {n} rows, found {rows}"),
        });
    }
    Ok((ids, m))
}

fn write_rows<T: Scalar, W: Write>(w: W, key: &str, ids: &[String], coords: &DMatrix<T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![key.to_string()];
    header.extend((1..=coords.ncols()).map(|c| format!("coord_{c}")));
    out.write_record(&header)?;
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(coords.row(i).iter().map(|&v| num(v)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per post: `post_id,coord_1,...,coord_k`.
pub fn write_embedding_csv<T: Scalar, W: Write>(w: W, e: &Embedding<T>) -> Result<()> {
    write_rows(w, "post_id", &e.doc_ids, &e.coords)
}

/// Full spectrum, one value per line, with a `singular_value` header.
pub fn write_spectrum_csv<T: Scalar, W: Write>(w: W, values: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "singular_value"])?;
    for (i, &v) in values.iter().enumerate() {
        out.write_record([(i + 1).to_string(), num(v)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_centroids_csv<T: Scalar, W: Write>(w: W, g: &UserGeometry<T>) -> Result<()> {
    write_rows(w, "user_id", &g.user_ids, &g.centroids)
}

/// Reads a file written by [`write_embedding_csv`] or
/// [`write_centroids_csv`]: IDs in the first column, coordinates after.
pub fn read_rows_csv<T: Scalar, R: Read>(r: R) -> Result<(Vec<String>, DMatrix<T>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let k = rdr.headers()?.len().saturating_sub(1);
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != k + 1 {
            return Err(Error::Malformed {
                line,
                message: format!("expected {} fields, found {}", k + 1, rec.len()),
            });
        }
        ids.push(rec[0].to_string());
        for field in rec.iter().skip(1) {
            let v: f64 = field.trim().parse().map_err(|_| Error::Malformed {
                line,
                message: format!("bad number {field:?}"),
            })?;
            values.push(T::lit(v));
        }
    }
    Ok((ids.clone(), DMatrix::from_row_slice(ids.len(), k, &values)))
}

/// `source,target,weight` per tree edge, in acceptance order.
pub fn write_edges_csv<T: Scalar, W: Write>(w: W, tree: &SpanningTree<T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["source", "target", "weight"])?;
    for &(i, j, weight) in &tree.edges {
        out.write_record([tree.node_ids[i].as_str(), tree.node_ids[j].as_str(), &num(weight)])?;
    }
    out.flush()?;
    Ok(())
}

/// `id,group,x,y` per generated point.
pub fn write_points_csv<W: Write>(w: W, groups: &GaussianGroups) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "group", "x", "y"])?;
    for ((id, p), g) in groups.ids().iter().zip(&groups.points).zip(&groups.labels) {
        out.write_record([id.as_str(), &g.to_string(), &num(p[0]), &num(p[1])])?;
    }
    out.flush()?;
    Ok(())
}

/// `id,cluster` pairs in the order given.
pub fn write_labels_csv<W: Write>(w: W, ids: &[String], labels: &[usize]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "cluster"])?;
    for (id, l) in ids.iter().zip(labels) {
        out.write_record([id.as_str(), &l.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<usize>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| Error::Malformed { line: i + 2, message };
        if rec.len() != 2 {
            return Err(bad("expected id,cluster".into()));
        }
        ids.push(rec[0].to_string());
        labels.push(rec[1].parse().map_err(|_| bad(format!("bad cluster {:?}", &rec[1])))?);
    }
    Ok((ids, labels))
}
