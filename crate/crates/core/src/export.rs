//! Text and JSON formats for lattices and reports.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, PositiveElement};
use crate::catalog::Family;
use crate::error::{Error, Result};
use crate::exact;
use crate::lattice::{LatticeInstance, Provenance};
use crate::search::CodeOutcome;

pub const SCHEMA: u32 = 1;

/// JSON header accompanying an integer basis file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeHeader {
    pub schema: u32,
    pub family: Option<Family>,
    pub p: Option<u64>,
    pub code: Option<Vec<u64>>,
    pub code_index: Option<String>,
    pub t: usize,
    pub k: Option<usize>,
    pub a: Vec<i64>,
    pub dimension: usize,
    /// Exact `det G` as a `"num/den"` string.
    pub gram_det: String,
    pub index: String,
}

impl LatticeHeader {
    pub fn of(instance: &LatticeInstance) -> Self {
        let pr = &instance.provenance;
        LatticeHeader {
            schema: SCHEMA,
            family: pr.family,
            p: pr.p,
            code: pr.code.clone(),
            code_index: pr.code_index.map(|i| i.to_string()),
            t: instance.t,
            k: pr.k,
            a: pr.a.clone(),
            dimension: instance.dim(),
            gram_det: exact::rational_string(&exact::Rational::from_integer(instance.gram_det())),
            index: instance.index().to_string(),
        }
    }
}

/// ASCII integer matrix: rows newline-separated, entries space-separated.
pub fn matrix_text<T: std::fmt::Display>(rows: &[Vec<T>]) -> String {
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.split_whitespace()
                .map(|x| x.parse::<i64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
                .collect()
        })
        .collect()
}

/// Rebuilds an instance from its header and basis text, recomputing the
/// Gram matrix from the family and form element. Fails if the recomputed
/// determinant differs from the header.
pub fn load_lattice(header: &LatticeHeader, basis_text: &str) -> Result<LatticeInstance> {
    let family = header
        .family
        .ok_or_else(|| Error::Parse("lattice header has no family".into()))?;
    let built = family.build()?;
    let form = PositiveElement::new(&built.order, AlgebraElement::from_ints(&header.a))?;
    let rows = parse_matrix(basis_text)?;
    let provenance = Provenance {
        family: Some(family),
        p: header.p,
        code: header.code.clone(),
        code_index: match &header.code_index {
            Some(s) => Some(s.parse().map_err(|_| Error::Parse("code index".into()))?),
            None => None,
        },
        t: header.t,
        k: header.k,
        a: header.a.clone(),
    };
    let inst = LatticeInstance::from_basis(&rows, &form.gram_int()?, header.t, provenance)?;
    let det = exact::parse_rational(&header.gram_det).ok_or_else(|| Error::Parse("gram_det".into()))?;
    if exact::Rational::from_integer(inst.gram_det()) != det {
        return Err(Error::Invariant(format!(
            "reloaded Gram determinant {} differs from header {}",
            inst.gram_det(),
            header.gram_det
        )));
    }
    Ok(inst)
}

pub fn index_of(header: &LatticeHeader) -> Result<BigInt> {
    header.index.parse().map_err(|_| Error::Parse("index".into()))
}

/// One CSV line per evaluated code.
pub fn outcomes_csv(outcomes: &[CodeOutcome]) -> String {
    let mut s = String::from("index,lambda1_sq,kissing,density,primitive_in_ball,hit,log_minima_margin,code\n");
    for o in outcomes {
        let code: Vec<String> = o.code.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{:.17e},{},{},{},{}",
            o.index,
            o.lambda1_sq,
            o.kissing,
            o.density,
            o.primitive_in_ball,
            o.hit,
            o.log_minima_margin.map(|m| format!("{m:.17e}")).unwrap_or_default(),
            code.join(" ")
        );
    }
    s
}
