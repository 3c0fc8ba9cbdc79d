use std::fmt::Write as _;

use crate::{Error, Result};

use super::sweep::{run_sweep, SweepConfig};
use super::BerPoint;

/// Ranking of all configurations at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRanking {
    pub ebn0_db: f64,
    /// 1-based rank per configuration; equal BERs share a rank.
    pub ranks: Vec<usize>,
    /// `better[i][j]`: configuration `i`'s 3-sigma interval lies entirely
    /// below `j`'s.
    pub better: Vec<Vec<bool>>,
    /// Configuration's interval is disjoint from every other one.
    pub significant: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub grid: Vec<f64>,
    /// `points[config][grid_index]`.
    pub points: Vec<Vec<BerPoint>>,
    pub rankings: Vec<PointRanking>,
}

/// Runs every sweep and ranks the configurations at each grid point.
pub fn compare_architectures(cfgs: &[SweepConfig]) -> Result<Comparison> {
    let first = cfgs
        .first()
        .ok_or_else(|| Error::InvalidParams("nothing to compare".into()))?;
    if cfgs
        .iter()
        .any(|c| c.ebn0_grid != first.ebn0_grid || c.n_bits_per_point != first.n_bits_per_point)
    {
        return Err(Error::GridMismatch);
    }
    let points = cfgs.iter().map(run_sweep).collect::<Result<Vec<_>>>()?;
    let labels = cfgs.iter().map(SweepConfig::label).collect();
    Comparison::from_results(labels, points)
}

impl Comparison {
    pub fn from_results(labels: Vec<String>, points: Vec<Vec<BerPoint>>) -> Result<Self> {
        let grid: Vec<f64> = points
            .first()
            .map(|p| p.iter().map(|x| x.ebn0_db).collect())
            .unwrap_or_default();
        if labels.len() != points.len()
            || points
                .iter()
                .any(|p| p.len() != grid.len() || p.iter().zip(&grid).any(|(x, g)| x.ebn0_db != *g))
        {
            return Err(Error::GridMismatch);
        }
        let rankings = (0..grid.len())
            .map(|g| {
                let column: Vec<&BerPoint> = points.iter().map(|p| &p[g]).collect();
                let n = column.len();
                let ranks = column
                    .iter()
                    .map(|a| 1 + column.iter().filter(|b| b.ber < a.ber).count())
                    .collect();
                let better: Vec<Vec<bool>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| i != j && column[i].significantly_below(column[j]))
                            .collect()
                    })
                    .collect();
                let significant = (0..n)
                    .map(|i| (0..n).all(|j| i == j || better[i][j] || better[j][i]))
                    .collect();
                PointRanking {
                    ebn0_db: grid[g],
                    ranks,
                    better,
                    significant,
                }
            })
            .collect();
        Ok(Self {
            labels,
            grid,
            points,
            rankings,
        })
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Fixed-width text table: one BER column per configuration, then the
    /// ranking, `*` marking statistically separated entries.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>8}", "Eb/N0");
        for l in &self.labels {
            let _ = write!(out, " {l:>14}");
        }
        out.push_str("  ranking\n");
        for (g, ranking) in self.rankings.iter().enumerate() {
            let _ = write!(out, "{:>8}", format!("{:?}", self.grid[g]));
            for p in &self.points {
                let _ = write!(out, " {:>14}", format!("{:.3e}", p[g].ber));
            }
            let mut order: Vec<usize> = (0..self.labels.len()).collect();
            order.sort_by_key(|&i| (ranking.ranks[i], i));
            let entries: Vec<String> = order
                .iter()
                .map(|&i| {
                    let mark = if ranking.significant[i] { "*" } else { "" };
                    format!("{}:{}{}", ranking.ranks[i], self.labels[i], mark)
                })
                .collect();
            let _ = writeln!(out, "  {}", entries.join(" "));
        }
        out
    }

    /// Long-format CSV: `config,ebn0_db,errors,bits,ber,ci95,rank,significant`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,ebn0_db,errors,bits,ber,ci95,rank,significant\n");
        for (c, label) in self.labels.iter().enumerate() {
            for (g, p) in self.points[c].iter().enumerate() {
                let r = &self.rankings[g];
                let _ = writeln!(
                    out,
                    "{label},{:?},{},{},{:e},{:e},{},{}",
                    p.ebn0_db,
                    p.errors,
                    p.bits,
                    p.ber,
                    p.ci95_halfwidth,
                    r.ranks[c],
                    u8::from(r.significant[c])
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transmitter::Scheme;

    #[test]
    fn single_config_is_first_everywhere() {
        let pts = vec![vec![BerPoint::new(0.0, 50, 1000), BerPoint::new(2.0, 20, 1000)]];
        let c = Comparison::from_results(vec!["a".into()], pts).unwrap();
        assert!(c
            .rankings
            .iter()
            .all(|r| r.ranks == vec![1] && r.significant == vec![true]));
        assert!(c.render_table().contains("1:a*"));
    }

    #[test]
    fn ranks_and_flags() {
        let pts = vec![
            vec![BerPoint::new(4.0, 400, 100_000)],
            vec![BerPoint::new(4.0, 100, 100_000)],
            vec![BerPoint::new(4.0, 105, 100_000)],
        ];
        let c = Comparison::from_results(vec!["ook".into(), "bpam".into(), "ppm".into()], pts).unwrap();
        let r = &c.rankings[0];
        assert_eq!(r.ranks, vec![3, 1, 2]);
        assert!(r.better[1][0] && r.better[2][0]);
        assert!(!r.better[1][2]);
        assert_eq!(r.significant, vec![true, false, false]);
        assert_eq!(c.to_csv().lines().count(), 4);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let mut a = SweepConfig::new(Scheme::Bpam);
        let mut b = SweepConfig::new(Scheme::Ook);
        a.ebn0_grid = vec![0.0, 2.0];
        b.ebn0_grid = vec![0.0, 4.0];
        assert!(matches!(
            compare_architectures(&[a.clone(), b.clone()]),
            Err(Error::GridMismatch)
        ));
        b.ebn0_grid = a.ebn0_grid.clone();
        b.n_bits_per_point = 5000;
        assert!(matches!(compare_architectures(&[a, b]), Err(Error::GridMismatch)));
    }
}
