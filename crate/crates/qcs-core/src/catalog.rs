//! Best-configuration catalogs: per experimental condition, which
//! (algorithm, bit depth) pair reconstructs best on average.

use crate::experiment::TrialRecord;
use std::collections::BTreeMap;

/// Record fields a catalog can group on. Algorithm and bit depth are not
/// here; they are what the catalog ranks inside each group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupField {
    N,
    K,
    TotalBits,
    Isnr,
    Corruption,
}

impl GroupField {
    pub fn name(self) -> &'static str {
        match self {
            GroupField::N => "n",
            GroupField::K => "k",
            GroupField::TotalBits => "total_bits",
            GroupField::Isnr => "isnr_db",
            GroupField::Corruption => "corruption",
        }
    }

    fn value(self, r: &TrialRecord) -> f64 {
        match self {
            GroupField::N => r.n as f64,
            GroupField::K => r.k as f64,
            GroupField::TotalBits => r.total_bits as f64,
            GroupField::Isnr => r.isnr_db,
            GroupField::Corruption => r.corruption,
        }
    }
}

impl std::str::FromStr for GroupField {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(GroupField::N),
            "k" => Ok(GroupField::K),
            "total_bits" => Ok(GroupField::TotalBits),
            "isnr" | "isnr_db" => Ok(GroupField::Isnr),
            "corruption" => Ok(GroupField::Corruption),
            other => Err(format!(
                "unknown group field '{other}' (expected n, k, total_bits, isnr, corruption)"
            )),
        }
    }
}

/// One catalog line: the winning configuration for one group.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogRow {
    /// Group key, in the order of the requested fields.
    pub key: Vec<(GroupField, f64)>,
    pub algorithm: String,
    pub bit_depth: u32,
    pub mean_rsnr: f64,
    /// Trials behind the winning mean.
    pub trial_count: usize,
}

/// Fixed ranking of the solver family for tie-breaks and output order;
/// names outside the family sort after it, alphabetically.
pub fn algorithm_rank(name: &str) -> (u8, &str) {
    let class = match name {
        "qiht" => 0,
        "aop-qiht" => 1,
        "qcosamp" => 2,
        "qsp" => 3,
        _ => 4,
    };
    (class, name)
}

/// Groups records by the given fields and, within each group, picks the
/// (algorithm, bit_depth) pair with the highest mean RSNR. Ties go to the
/// lower bit depth, then to the earlier algorithm in family order. Rows
/// come back sorted by group key.
pub fn best_catalog(records: &[TrialRecord], group_by: &[GroupField]) -> Vec<CatalogRow> {
    // f64 keys are grouped through their bit patterns; every key value
    // here is a finite count, a budget, or a configured level (possibly
    // +inf), so bitwise identity is the right equality
    type Key = Vec<u64>;
    // (bit_depth, family rank, name) -> (rsnr sum, trial count)
    type PerAlgorithm = BTreeMap<(u32, u8, String), (f64, usize)>;
    let mut groups: BTreeMap<Key, PerAlgorithm> = BTreeMap::new();
    for r in records {
        let key: Key = group_by.iter().map(|f| f.value(r).to_bits()).collect();
        let (rank, _) = algorithm_rank(&r.algorithm);
        let entry = groups
            .entry(key)
            .or_default()
            .entry((r.bit_depth, rank, r.algorithm.clone()))
            .or_insert((0.0, 0));
        entry.0 += r.rsnr_db;
        entry.1 += 1;
    }

    let mut rows: Vec<CatalogRow> = groups
        .into_iter()
        .map(|(key, contenders)| {
            let mut best: Option<(f64, u32, u8, String, usize)> = None;
            for ((bit_depth, rank, name), (sum, count)) in contenders {
                let mean = sum / count as f64;
                let better = match &best {
                    None => true,
                    // strictly higher mean wins; the BTreeMap iteration
                    // order (depth, then family rank) makes "first seen
                    // wins ties" exactly the tie-break rule
                    Some((best_mean, ..)) => mean > *best_mean,
                };
                if better {
                    best = Some((mean, bit_depth, rank, name, count));
                }
            }
            let (mean_rsnr, bit_depth, _, algorithm, trial_count) =
                best.expect("groups are never empty");
            CatalogRow {
                key: group_by
                    .iter()
                    .zip(&key)
                    .map(|(f, bits)| (*f, f64::from_bits(*bits)))
                    .collect(),
                algorithm,
                bit_depth,
                mean_rsnr,
                trial_count,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        let ka = a.key.iter().map(|(_, v)| v.to_bits());
        let kb = b.key.iter().map(|(_, v)| v.to_bits());
        // bit patterns of the non-negative values used here order like the
        // values themselves
        ka.cmp(kb)
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(alg: &str, b: u32, tb: u64, isnr: f64, rsnr: f64, trial: usize) -> TrialRecord {
        TrialRecord {
            algorithm: alg.into(),
            bit_depth: b,
            total_bits: tb,
            m: (tb / b.max(1) as u64) as usize,
            n: 100,
            k: 5,
            isnr_db: isnr,
            corruption: 0.0,
            trial_index: trial,
            seed: 1,
            rsnr_db: rsnr,
            iterations_run: 10,
            mismatch_count: 0,
            runtime_ms: 1.0,
        }
    }

    #[test]
    fn single_record_wins_its_group() {
        let rows = best_catalog(&[record("qsp", 2, 1000, 20.0, 15.0, 0)], &[GroupField::TotalBits]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].algorithm, "qsp");
        assert_eq!(rows[0].bit_depth, 2);
        assert_eq!(rows[0].mean_rsnr, 15.0);
        assert_eq!(rows[0].trial_count, 1);
        assert_eq!(rows[0].key, vec![(GroupField::TotalBits, 1000.0)]);
    }

    #[test]
    fn higher_mean_wins() {
        let recs = vec![
            record("qiht", 1, 1000, 20.0, 10.0, 0),
            record("qiht", 1, 1000, 20.0, 14.0, 1), // mean 12
            record("qcosamp", 2, 1000, 20.0, 9.0, 0),
            record("qcosamp", 2, 1000, 20.0, 9.0, 1), // mean 9
        ];
        let rows = best_catalog(&recs, &[GroupField::TotalBits]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].algorithm, "qiht");
        assert_eq!(rows[0].mean_rsnr, 12.0);
        assert_eq!(rows[0].trial_count, 2);
    }

    #[test]
    fn exact_tie_prefers_lower_depth_then_family_order() {
        let recs = vec![
            record("qiht", 2, 1000, 20.0, 10.0, 0),
            record("qiht", 1, 1000, 20.0, 10.0, 0),
        ];
        let rows = best_catalog(&recs, &[GroupField::TotalBits]);
        assert_eq!(rows[0].bit_depth, 1);

        let recs = vec![
            record("qsp", 1, 1000, 20.0, 10.0, 0),
            record("qiht", 1, 1000, 20.0, 10.0, 0),
        ];
        let rows = best_catalog(&recs, &[GroupField::TotalBits]);
        assert_eq!(rows[0].algorithm, "qiht");
    }

    #[test]
    fn groups_split_and_sort_on_every_requested_field() {
        let recs = vec![
            record("qiht", 1, 2000, 10.0, 5.0, 0),
            record("qsp", 1, 1000, 10.0, 6.0, 0),
            record("qsp", 1, 1000, 35.0, 7.0, 0),
        ];
        let rows = best_catalog(&recs, &[GroupField::TotalBits, GroupField::Isnr]);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].key, vec![(GroupField::TotalBits, 1000.0), (GroupField::Isnr, 10.0)]);
        assert_eq!(rows[1].key, vec![(GroupField::TotalBits, 1000.0), (GroupField::Isnr, 35.0)]);
        assert_eq!(rows[2].key, vec![(GroupField::TotalBits, 2000.0), (GroupField::Isnr, 10.0)]);
    }

    #[test]
    fn infinite_means_are_legal_winners() {
        let recs = vec![
            record("qiht", 1, 1000, 20.0, f64::INFINITY, 0),
            record("qsp", 2, 1000, 20.0, 50.0, 0),
        ];
        let rows = best_catalog(&recs, &[GroupField::TotalBits]);
        assert_eq!(rows[0].algorithm, "qiht");
        assert!(rows[0].mean_rsnr.is_infinite());
    }

    #[test]
    fn empty_input_yields_empty_catalog() {
        assert!(best_catalog(&[], &[GroupField::K]).is_empty());
    }

    #[test]
    fn group_field_names_round_trip() {
        for f in [
            GroupField::N,
            GroupField::K,
            GroupField::TotalBits,
            GroupField::Isnr,
            GroupField::Corruption,
        ] {
            assert_eq!(f.name().parse::<GroupField>().unwrap(), f);
        }
        assert!("algorithm".parse::<GroupField>().is_err());
    }
}
