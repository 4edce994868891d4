//! CSV, JSON and plot-data emitters with matching loaders.
//!
//! Exact values are written as `p/q` strings next to a decimal column; the
//! decimals are for reading only and loaders ignore them.

use serde::{Serialize, Serializer};

use crate::carpet::{LevelResistance, ResistanceScaling};
use crate::dimension::{CellSpectrum, RankSpectrumReport};
use crate::error::{Error, Result};
use crate::harmonic::PiecewiseHarmonic;
use crate::linalg::Matrix;
use crate::measures::{CellMeasureTable, PhiCellField};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};
use crate::structure::{format_point, VertexTable, Word};

pub fn serialize_opt_rational<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(q) => s.serialize_some(&format_rational(q)),
        None => s.serialize_none(),
    }
}

/// `p/q` for exact scalars, shortest round-trip decimal otherwise.
pub fn format_scalar<T: Scalar>(x: &T) -> String {
    match x.as_rational() {
        Some(q) => format_rational(&q),
        None => format_f64(x.to_f64()),
    }
}

pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_scalar<T: Scalar>(text: &str) -> Result<T> {
    if T::EXACT {
        Ok(T::from_rational(&parse_rational(text)?))
    } else {
        let x: f64 = text.trim().parse().map_err(|_| Error::Parse(format!("not a number: {text:?}")))?;
        Ok(T::from_rational(&Rational::from_float(x).ok_or_else(|| Error::Parse(format!("not finite: {text}")))?))
    }
}

fn parse_f64(text: &str) -> Result<f64> {
    text.trim().parse().map_err(|_| Error::Parse(format!("not a number: {text:?}")))
}

fn parse_usize(text: &str) -> Result<usize> {
    text.trim().parse().map_err(|_| Error::Parse(format!("not a nonnegative integer: {text:?}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn write_rows(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn read_rows(text: &str, expected: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    for name in expected {
        if !header.iter().any(|h| h == *name) {
            return Err(Error::Parse(format!("missing column {name:?}")));
        }
    }
    r.records().map(|x| x.map_err(csv_err)).collect()
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).expect("column written by this module")
}

fn headers(text: &str) -> Result<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    Ok(r.headers().map_err(csv_err)?.iter().map(String::from).collect())
}

/// `id,point,value,decimal` for a function on `V_m`.
pub fn vertex_values_csv<T: Scalar>(table: &VertexTable, f: &PiecewiseHarmonic<T>) -> Result<String> {
    if f.values.len() != table.vertex_count() {
        return Err(Error::Invalid("function and vertex table sizes differ".into()));
    }
    let header = ["id", "point", "value", "decimal"].map(String::from);
    write_rows(
        &header,
        f.values.iter().enumerate().map(|(i, v)| {
            vec![i.to_string(), format_point(table.point(i)), format_scalar(v), format_f64(v.to_f64())]
        }),
    )
}

/// Reads back the values of [`vertex_values_csv`], in id order.
pub fn parse_vertex_values<T: Scalar>(text: &str, level: usize) -> Result<PiecewiseHarmonic<T>> {
    let rows = read_rows(text, &["id", "value"])?;
    let h = headers(text)?;
    let (ci, cv) = (column(&h, "id"), column(&h, "value"));
    let mut values = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        if parse_usize(&r[ci])? != k {
            return Err(Error::Parse(format!("row {k} has id {}", &r[ci])));
        }
        values.push(parse_scalar(&r[cv])?);
    }
    Ok(PiecewiseHarmonic::new(level, values))
}

/// `word,value,decimal` in word order.
pub fn measure_table_csv<T: Scalar>(t: &CellMeasureTable<T>) -> Result<String> {
    let header = ["word", "value", "decimal"].map(String::from);
    write_rows(
        &header,
        t.values.iter().enumerate().map(|(i, v)| {
            vec![Word::from_index(i, t.level, t.n_symbols).to_string(), format_scalar(v), format_f64(v.to_f64())]
        }),
    )
}

fn words_and_level(words: &[String], n_symbols: usize) -> Result<(usize, Vec<usize>)> {
    let parsed = words.iter().map(|w| Word::parse(w, n_symbols)).collect::<Result<Vec<_>>>()?;
    let level = parsed.first().map_or(0, Word::level);
    if parsed.len() != n_symbols.pow(level as u32) {
        return Err(Error::Parse(format!("expected {} cells at level {level}, found {}", n_symbols.pow(level as u32), parsed.len())));
    }
    for (k, w) in parsed.iter().enumerate() {
        if w.level() != level || w.index(n_symbols) != k {
            return Err(Error::Parse(format!("cell {w} is out of order")));
        }
    }
    Ok((level, parsed.iter().map(|w| w.index(n_symbols)).collect()))
}

pub fn parse_measure_table<T: Scalar>(text: &str, n_symbols: usize) -> Result<CellMeasureTable<T>> {
    let rows = read_rows(text, &["word", "value"])?;
    let h = headers(text)?;
    let (cw, cv) = (column(&h, "word"), column(&h, "value"));
    let words: Vec<String> = rows.iter().map(|r| r[cw].to_string()).collect();
    let (level, _) = words_and_level(&words, n_symbols)?;
    let values = rows.iter().map(|r| parse_scalar(&r[cv])).collect::<Result<Vec<_>>>()?;
    Ok(CellMeasureTable { level, n_symbols, values })
}

/// `word,kusuoka,kusuoka_decimal,phi_i_j,phi_i_j_decimal…` for `i ≤ j`.
pub fn phi_field_csv<T: Scalar>(p: &PhiCellField<T>) -> Result<String> {
    let mut header = vec!["word".to_string(), "kusuoka".into(), "kusuoka_decimal".into()];
    let pairs: Vec<(usize, usize)> = (0..p.d).flat_map(|i| (i..p.d).map(move |j| (i, j))).collect();
    for (i, j) in &pairs {
        header.push(format!("phi_{i}_{j}"));
        header.push(format!("phi_{i}_{j}_decimal"));
    }
    write_rows(
        &header,
        (0..p.matrices.len()).map(|c| {
            let mut row = vec![
                Word::from_index(c, p.level, p.n_symbols).to_string(),
                format_scalar(&p.kusuoka[c]),
                format_f64(p.kusuoka[c].to_f64()),
            ];
            for &(i, j) in &pairs {
                let v = p.matrices[c].get(i, j);
                row.push(format_scalar(v));
                row.push(format_f64(v.to_f64()));
            }
            row
        }),
    )
}

pub fn parse_phi_field<T: Scalar>(text: &str, n_symbols: usize) -> Result<PhiCellField<T>> {
    let h = headers(text)?;
    let d = h.iter().filter(|c| c.starts_with("phi_0_") && !c.ends_with("_decimal")).count();
    let rows = read_rows(text, &["word", "kusuoka"])?;
    let words: Vec<String> = rows.iter().map(|r| r[column(&h, "word")].to_string()).collect();
    let (level, _) = words_and_level(&words, n_symbols)?;
    let ck = column(&h, "kusuoka");
    let mut kusuoka = Vec::with_capacity(rows.len());
    let mut matrices = Vec::with_capacity(rows.len());
    for r in &rows {
        kusuoka.push(parse_scalar(&r[ck])?);
        let mut m: Matrix<T> = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let name = format!("phi_{i}_{j}");
                let c = h.iter().position(|x| *x == name).ok_or_else(|| Error::Parse(format!("missing column {name}")))?;
                let v: T = parse_scalar(&r[c])?;
                m.set(i, j, v.clone());
                m.set(j, i, v);
            }
        }
        matrices.push(m);
    }
    Ok(PhiCellField { level, n_symbols, d, kusuoka, matrices })
}

/// `word,weight,eps_rank,lambda_1…lambda_d`.
pub fn rank_spectrum_csv(r: &RankSpectrumReport) -> Result<String> {
    let mut header = vec!["word".to_string(), "weight".into(), "eps_rank".into()];
    header.extend((1..=r.d).map(|k| format!("lambda_{k}")));
    write_rows(
        &header,
        r.cells.iter().map(|c| {
            let mut row = vec![c.word.clone(), format_f64(c.weight), c.eps_rank.to_string()];
            row.extend(c.eigenvalues.iter().map(|x| format_f64(*x)));
            row
        }),
    )
}

pub fn parse_rank_spectrum(text: &str) -> Result<Vec<CellSpectrum>> {
    let h = headers(text)?;
    let rows = read_rows(text, &["word", "weight", "eps_rank"])?;
    let lambdas: Vec<usize> = (0..h.len()).filter(|&i| h[i].starts_with("lambda_")).collect();
    rows.iter()
        .map(|r| {
            Ok(CellSpectrum {
                word: r[column(&h, "word")].to_string(),
                weight: parse_f64(&r[column(&h, "weight")])?,
                eps_rank: parse_usize(&r[column(&h, "eps_rank")])?,
                eigenvalues: lambdas.iter().map(|&i| parse_f64(&r[i])).collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// `level,vertices,edges,resistance,ratio,iterations,relative_residual`;
/// `ratio` on row `n` is `R_{n+1}/R_n` and empty on the last row.
pub fn resistance_csv(s: &ResistanceScaling) -> Result<String> {
    let header = ["level", "vertices", "edges", "resistance", "ratio", "iterations", "relative_residual"].map(String::from);
    write_rows(
        &header,
        s.levels.iter().enumerate().map(|(k, l)| {
            vec![
                l.level.to_string(),
                l.vertices.to_string(),
                l.edges.to_string(),
                format_f64(l.resistance),
                s.ratios.get(k).map(|x| format_f64(*x)).unwrap_or_default(),
                l.iterations.to_string(),
                format_f64(l.relative_residual),
            ]
        }),
    )
}

pub fn parse_resistance(text: &str) -> Result<(Vec<LevelResistance>, Vec<f64>)> {
    let h = headers(text)?;
    let rows = read_rows(text, &["level", "vertices", "edges", "resistance", "ratio", "iterations", "relative_residual"])?;
    let mut levels = Vec::new();
    let mut ratios = Vec::new();
    for r in &rows {
        let get = |name: &str| &r[column(&h, name)];
        levels.push(LevelResistance {
            level: parse_usize(get("level"))?,
            vertices: parse_usize(get("vertices"))?,
            edges: parse_usize(get("edges"))?,
            resistance: parse_f64(get("resistance"))?,
            iterations: parse_usize(get("iterations"))?,
            relative_residual: parse_f64(get("relative_residual"))?,
        });
        if !get("ratio").is_empty() {
            ratios.push(parse_f64(get("ratio"))?);
        }
    }
    Ok((levels, ratios))
}

/// Two whitespace-separated columns under a `#` comment header.
pub fn plot_data(comment: &str, points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for (x, y) in points {
        out.push_str(&format!("{} {}\n", format_f64(*x), format_f64(*y)));
    }
    out
}

pub fn parse_plot_data(text: &str) -> Result<Vec<(f64, f64)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(x), Some(y), None) => Ok((parse_f64(x)?, parse_f64(y)?)),
                _ => Err(Error::Parse(format!("plot line {l:?} does not have two columns"))),
            }
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::presets;

    fn gasket_tuple() -> (crate::ExactModel, Vec<VertexTable>, Vec<PiecewiseHarmonic<Rational>>) {
        let p = presets::sg2();
        let tables = p.structure.vertex_tables(3).unwrap();
        let basis = p.basis.iter().map(|b| PiecewiseHarmonic::new(0, b.clone())).collect();
        (p.model().unwrap(), tables, basis)
    }

    #[test]
    fn vertex_values_roundtrip() {
        let (model, tables, basis) = gasket_tuple();
        let f = model.harmonic_extension(&basis[0].values, &tables, 2).unwrap();
        let text = vertex_values_csv(&tables[2], &f).unwrap();
        assert!(text.contains("\"(1/2, 0)\""));
        assert_eq!(parse_vertex_values::<Rational>(&text, 2).unwrap(), f);
        let floats = f.map_scalar(Scalar::to_f64);
        let text = vertex_values_csv(&tables[2], &floats).unwrap();
        assert_eq!(parse_vertex_values::<f64>(&text, 2).unwrap(), floats);
    }

    #[test]
    fn tables_roundtrip() {
        let (model, tables, basis) = gasket_tuple();
        let t = model.cell_energy_measure(&basis[0], 2, &tables).unwrap();
        let back: CellMeasureTable<Rational> = parse_measure_table(&measure_table_csv(&t).unwrap(), 3).unwrap();
        assert_eq!(back.values, t.values);
        let phi = model.phi_field(&basis, 2, &tables).unwrap();
        let back: PhiCellField<Rational> = parse_phi_field(&phi_field_csv(&phi).unwrap(), 3).unwrap();
        assert_eq!(back.matrices, phi.matrices);
        assert_eq!(back.kusuoka, phi.kusuoka);
        let spec = crate::dimension::rank_spectrum_of(&phi, 0.1).unwrap();
        let cells = parse_rank_spectrum(&rank_spectrum_csv(&spec).unwrap()).unwrap();
        assert_eq!(cells.len(), spec.cells.len());
        assert!(cells.iter().zip(&spec.cells).all(|(a, b)| a.eigenvalues == b.eigenvalues && a.weight == b.weight));
    }

    #[test]
    fn plot_data_roundtrip() {
        let pts = vec![(1.0, 0.1), (2.0, 1.0 / 3.0)];
        assert_eq!(parse_plot_data(&plot_data("x y", &pts)).unwrap(), pts);
        assert!(parse_plot_data("1 2 3\n").is_err());
    }

    #[test]
    fn out_of_order_words_are_rejected() {
        let text = "word,value,decimal\n1,1,1.0\n0,1,1.0\n2,1,1.0\n";
        assert!(parse_measure_table::<Rational>(text, 3).is_err());
    }
}
