use rug::Integer;
use serde::Serialize;

use super::memo;

/// Bell numbers and the Stirling triangle of the second kind up to row `L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellStirlingTable {
    #[serde(serialize_with = "ser_ints")]
    pub bell: Vec<Integer>,
    /// `stirling2[l][m]` for `0 ≤ m ≤ l ≤ L`.
    #[serde(serialize_with = "ser_rows")]
    pub stirling2: Vec<Vec<Integer>>,
}

fn ser_ints<S: serde::Serializer>(v: &[Integer], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn ser_rows<S: serde::Serializer>(v: &[Vec<Integer>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
}

impl BellStirlingTable {
    pub fn len(&self) -> usize {
        self.bell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bell.is_empty()
    }

    pub fn stirling(&self, l: usize, m: usize) -> &Integer {
        &self.stirling2[l][m]
    }

    /// `Σ_m m·S(l, m)`.
    pub fn weighted_row_sum(&self, l: usize) -> Integer {
        self.stirling2[l]
            .iter()
            .enumerate()
            .map(|(m, s)| Integer::from(s * m as u64))
            .sum()
    }
}

/// Builds the table through row `l_max`, checking the row-sum identities.
///
/// Row `l_max + 1` is computed as well so that `Σ m·S(l, m) = B_{l+1} - B_l`
/// can be checked on every returned row.
pub fn bell_stirling(l_max: usize) -> BellStirlingTable {
    memo::with_stirling(l_max + 1, |rows| {
        let bell: Vec<Integer> = rows.iter().map(|row| row.iter().sum()).collect();
        let table = BellStirlingTable {
            bell: bell[..=l_max].to_vec(),
            stirling2: rows[..=l_max].to_vec(),
        };
        for l in 0..=l_max {
            let diff = Integer::from(&bell[l + 1] - &bell[l]);
            assert_eq!(table.weighted_row_sum(l), diff, "Σ m S({l}, m) != B_{{l+1}} - B_l");
        }
        table
    })
}

/// `B_l` alone.
pub fn bell_number(l: usize) -> Integer {
    bell_stirling(l).bell[l].clone()
}

/// `B_0..=B_{l_max}` from the Bell (Aitken) triangle, independent of the Stirling rows.
pub fn bell_by_triangle(l_max: usize) -> Vec<Integer> {
    let mut out = vec![Integer::from(1)];
    let mut row = vec![Integer::from(1)];
    while out.len() <= l_max {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().expect("nonempty row").clone());
        for x in &row {
            let v = Integer::from(next.last().expect("nonempty row") + x);
            next.push(v);
        }
        out.push(next[0].clone());
        row = next;
    }
    out
}
