//! Characters of the symmetric groups `S_n` (`2 <= n <= 8`) and the
//! decomposition of the edge-permutation representation of a star.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 8;

pub type Partition = Vec<usize>;

fn check_n(n: usize) -> Result<()> {
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(invalid(format!("symmetric group degree must be in {MIN_N}..={MAX_N}, got {n}")));
    }
    Ok(())
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Partitions of `n` in reverse lexicographic order (`[n]` first).
pub fn partitions(n: usize) -> Vec<Partition> {
    fn rec(rest: usize, max: usize, cur: &mut Partition, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=max.min(rest)).rev() {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugacyClass {
    pub cycle_type: Partition,
    pub size: i64,
    /// Cycles of a representative on `1..=n`, fixed points omitted.
    pub representative: Vec<Vec<usize>>,
}

impl ConjugacyClass {
    fn new(n: usize, cycle_type: Partition) -> Self {
        let mut denom = 1i64;
        for j in 1..=n {
            let m = cycle_type.iter().filter(|&&p| p == j).count();
            denom *= (j as i64).pow(m as u32) * factorial(m);
        }
        let mut next = 1;
        let mut representative = Vec::new();
        for &len in &cycle_type {
            let cycle: Vec<usize> = (next..next + len).collect();
            next += len;
            if len > 1 {
                representative.push(cycle);
            }
        }
        Self {
            size: factorial(n) / denom,
            cycle_type,
            representative,
        }
    }

    pub fn fixed_points(&self) -> usize {
        self.cycle_type.iter().filter(|&&p| p == 1).count()
    }
}

impl fmt::Display for ConjugacyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.representative.is_empty() {
            return write!(f, "e");
        }
        for c in &self.representative {
            let items: Vec<String> = c.iter().map(usize::to_string).collect();
            write!(f, "({})", items.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Irrep {
    pub name: String,
    pub partition: Partition,
    pub dimension: i64,
    /// One value per class, in table class order.
    pub characters: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterTable {
    pub n: usize,
    pub classes: Vec<ConjugacyClass>,
    pub irreps: Vec<Irrep>,
}

impl CharacterTable {
    pub fn order(&self) -> i64 {
        factorial(self.n)
    }

    /// `sum_beta n_beta chi_beta psi_beta`
    pub fn pairing(&self, chi: &[i64], psi: &[i64]) -> i64 {
        self.classes
            .iter()
            .zip(chi.iter().zip(psi))
            .map(|(c, (a, b))| c.size * a * b)
            .sum()
    }

    pub fn to_text(&self) -> String {
        let labels: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        let name_width = self.irreps.iter().map(|r| r.name.len()).max().unwrap_or(0).max(5);
        let widths: Vec<usize> = labels.iter().map(|l| l.len().max(4)).collect();
        let mut out = format!("{:<name_width$}", "class");
        for (l, w) in labels.iter().zip(&widths) {
            out += &format!("  {l:>w$}");
        }
        out += &format!("\n{:<name_width$}", "size");
        for (c, w) in self.classes.iter().zip(&widths) {
            out += &format!("  {:>w$}", c.size);
        }
        out.push('\n');
        for r in &self.irreps {
            out += &format!("{:<name_width$}", r.name);
            for (v, w) in r.characters.iter().zip(&widths) {
                out += &format!("  {v:>w$}");
            }
            out.push('\n');
        }
        out
    }
}

/// `chi^lambda(mu)` by Murnaghan-Nakayama on beta-sets: removing a rim hook
/// of length `r` moves one bead from `b` to `b - r`, with sign
/// `(-1)^(beads strictly between)`.
pub fn character(lambda: &[usize], mu: &[usize]) -> i64 {
    let len = lambda.len();
    let beads: Vec<usize> = lambda.iter().enumerate().map(|(i, &p)| p + len - 1 - i).collect();
    mn(&beads, mu)
}

fn mn(beads: &[usize], mu: &[usize]) -> i64 {
    let Some((&r, rest)) = mu.split_first() else {
        return 1;
    };
    let mut total = 0;
    for (i, &b) in beads.iter().enumerate() {
        if b < r || beads.contains(&(b - r)) {
            continue;
        }
        let between = beads.iter().filter(|&&c| c > b - r && c < b).count();
        let mut next = beads.to_vec();
        next[i] = b - r;
        let sign = if between % 2 == 0 { 1 } else { -1 };
        total += sign * mn(&next, rest);
    }
    total
}

fn irrep_order(n: usize) -> Vec<Partition> {
    let mut order: Vec<Partition> = vec![vec![n], vec![1; n], vec![n - 1, 1]];
    order.dedup();
    for p in partitions(n) {
        if !order.contains(&p) {
            order.push(p);
        }
    }
    order
}

fn irrep_name(n: usize, p: &Partition) -> String {
    if *p == vec![n] {
        "trivial".into()
    } else if *p == vec![1; n] {
        "sign".into()
    } else if *p == vec![n - 1, 1] {
        "standard".into()
    } else {
        let parts: Vec<String> = p.iter().map(usize::to_string).collect();
        format!("[{}]", parts.join(","))
    }
}

/// Classes ordered by number of cycles (descending), then by cycle type in
/// reverse lexicographic order; for `n = 4` that is
/// `(1^4), (2,1^2), (3,1), (2^2), (4)`.
pub fn character_table(n: usize) -> Result<CharacterTable> {
    check_n(n)?;
    let mut types = partitions(n);
    types.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| b.cmp(a)));
    let classes: Vec<ConjugacyClass> = types.into_iter().map(|t| ConjugacyClass::new(n, t)).collect();
    let irreps = irrep_order(n)
        .into_iter()
        .map(|p| {
            let characters: Vec<i64> = classes.iter().map(|c| character(&p, &c.cycle_type)).collect();
            Irrep {
                name: irrep_name(n, &p),
                dimension: characters[0],
                partition: p,
                characters,
            }
        })
        .collect();
    Ok(CharacterTable { n, classes, irreps })
}

/// Fixed points of each class representative, in table class order.
pub fn permutation_character(n: usize) -> Result<Vec<i64>> {
    Ok(character_table(n)?
        .classes
        .iter()
        .map(|c| c.fixed_points() as i64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepDecomposition {
    pub source_character: Vec<i64>,
    /// Multiplicity of each irrep, in table irrep order.
    pub coefficients: Vec<i64>,
    pub dimension: i64,
}

impl RepDecomposition {
    pub fn describe(&self, table: &CharacterTable) -> String {
        let terms: Vec<String> = table
            .irreps
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, &c)| c > 0)
            .map(|(r, &c)| if c == 1 { r.name.clone() } else { format!("{c} x {}", r.name) })
            .collect();
        terms.join(" + ")
    }
}

/// `c_alpha = (1/|G|) sum_beta n_beta chi_beta chi^alpha_beta`, computed in
/// integers; a non-integral or negative result means `character` was not
/// the character of a representation.
pub fn decompose(character: &[i64], table: &CharacterTable) -> Result<RepDecomposition> {
    if character.len() != table.classes.len() {
        return Err(invalid(format!(
            "character has {} entries, the table {} classes",
            character.len(),
            table.classes.len()
        )));
    }
    let order = table.order();
    let mut coefficients = Vec::with_capacity(table.irreps.len());
    for irrep in &table.irreps {
        let num = table.pairing(character, &irrep.characters);
        if num % order != 0 || num < 0 {
            return Err(Error::InvalidCharacter(format!(
                "multiplicity of {} would be {}/{}",
                irrep.name, num, order
            )));
        }
        coefficients.push(num / order);
    }
    let dimension = table.irreps.iter().zip(&coefficients).map(|(r, c)| r.dimension * c).sum();
    if dimension != character[0] {
        return Err(Error::InvalidCharacter(format!(
            "identity value {} but the irreps add up to dimension {dimension}",
            character[0]
        )));
    }
    Ok(RepDecomposition {
        source_character: character.to_vec(),
        coefficients,
        dimension,
    })
}

/// Dimensions of the irreps in the edge-permutation representation of an
/// equal-length star, repeated by multiplicity, ascending.
pub fn predict_star_degeneracies(num_edges: usize) -> Result<Vec<i64>> {
    let table = character_table(num_edges)?;
    let dec = decompose(&permutation_character(num_edges)?, &table)?;
    let mut dims: Vec<i64> = table
        .irreps
        .iter()
        .zip(&dec.coefficients)
        .flat_map(|(r, &c)| std::iter::repeat_n(r.dimension, c as usize))
        .collect();
    dims.sort_unstable();
    Ok(dims)
}
