//! CVT-shaped MAP-Elites archives.
//!
//! Cells are the Voronoi regions of a fixed centroid set in the unit
//! hypercube. [`CvtArchive`] keeps one elite per cell; [`DeepGridArchive`]
//! keeps up to `depth` entries per cell and treats them as samples of the
//! same behaviour.

use std::fs::File;
use std::io::{BufReader, BufWriter, Seek, SeekFrom, Write};
use std::ops::Deref;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::neuro::ParamVector;

pub const ARCHIVE_CSV: &str = "archive.csv";
pub const GENOTYPES_BIN: &str = "genotypes.bin";

/// Behavioural descriptor, normalised to `[0, 1]` per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BdPoint(Vec<f64>);

impl BdPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(c) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::Config(format!("BD coordinate {c} outside [0, 1]")));
        }
        Ok(BdPoint(coords))
    }

    /// Clamps every coordinate into `[0, 1]`; NaN maps to 0.
    pub fn clamped(coords: Vec<f64>) -> Self {
        BdPoint(
            coords
                .into_iter()
                .map(|c| if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for BdPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[BdPoint], point: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, point);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Lloyd's k-means over `n_samples` uniform points of `[0,1]^bd_dim`.
///
/// The first `n_centroids` samples seed the centroids; iteration stops once
/// no centroid moves more than `1e-6` or after 100 rounds. A cluster that
/// loses all of its points keeps its previous centroid.
pub fn build_cvt(bd_dim: usize, n_centroids: usize, n_samples: usize, seed: u64) -> Result<Vec<BdPoint>> {
    if bd_dim == 0 || n_centroids == 0 {
        return Err(Error::Config("CVT needs bd_dim >= 1 and n_centroids >= 1".into()));
    }
    if n_samples < n_centroids {
        return Err(Error::Config(format!(
            "CVT sample budget {n_samples} is smaller than the centroid count {n_centroids}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| (0..bd_dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    Ok(lloyd(&samples, n_centroids, 100, 1e-6))
}

fn lloyd(samples: &[Vec<f64>], k: usize, max_iter: usize, tol: f64) -> Vec<BdPoint> {
    let dim = samples[0].len();
    let mut centroids: Vec<BdPoint> = samples[..k].iter().cloned().map(BdPoint).collect();
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for _ in 0..max_iter {
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for s in samples {
            let c = nearest(&centroids, s);
            counts[c] += 1;
            for (acc, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(s) {
                *acc += v;
            }
        }
        let mut max_move: f64 = 0.0;
        for (c, centroid) in centroids.iter_mut().enumerate() {
            if counts[c] == 0 {
                continue;
            }
            let n = counts[c] as f64;
            let updated: Vec<f64> = sums[c * dim..(c + 1) * dim].iter().map(|s| s / n).collect();
            max_move = max_move.max(sq_dist(&updated, centroid).sqrt());
            centroid.0 = updated;
        }
        if max_move < tol {
            break;
        }
    }
    centroids
}

#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub genotype: ParamVector,
    pub fitness: f64,
    pub bd: BdPoint,
    pub eval_record_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AddOutcome {
    NewCell,
    Improved,
    Rejected,
}

impl AddOutcome {
    pub fn is_addition(self) -> bool {
        !matches!(self, AddOutcome::Rejected)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvtArchive {
    centroids: Vec<BdPoint>,
    cells: Vec<Option<Elite>>,
    /// Occupied cell ids in the order they were first filled.
    occupied: Vec<usize>,
    non_finite_rejections: u64,
}

impl CvtArchive {
    pub fn new(centroids: Vec<BdPoint>) -> Self {
        let n = centroids.len();
        Self {
            centroids,
            cells: vec![None; n],
            occupied: Vec::new(),
            non_finite_rejections: 0,
        }
    }

    /// Empty archive over the same tessellation.
    pub fn empty_like(&self) -> Self {
        Self::new(self.centroids.clone())
    }

    pub fn centroids(&self) -> &[BdPoint] {
        &self.centroids
    }

    pub fn bd_dim(&self) -> usize {
        self.centroids.first().map_or(0, BdPoint::dim)
    }

    pub fn n_cells(&self) -> usize {
        self.centroids.len()
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn coverage(&self) -> f64 {
        self.len() as f64 / self.n_cells() as f64
    }

    pub fn non_finite_rejections(&self) -> u64 {
        self.non_finite_rejections
    }

    /// Nearest centroid; exact ties go to the lowest index.
    pub fn cell_index(&self, bd: &[f64]) -> usize {
        nearest(&self.centroids, bd)
    }

    pub fn get(&self, cell: usize) -> Option<&Elite> {
        self.cells.get(cell).and_then(Option::as_ref)
    }

    /// Occupied `(cell, elite)` pairs in ascending cell order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Elite)> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (i, e)))
    }

    pub fn try_add(&mut self, genotype: ParamVector, fitness: f64, bd: BdPoint, eval_record_id: u64) -> AddOutcome {
        if !fitness.is_finite() {
            self.non_finite_rejections += 1;
            return AddOutcome::Rejected;
        }
        let cell = self.cell_index(&bd);
        let outcome = match &self.cells[cell] {
            None => AddOutcome::NewCell,
            Some(incumbent) if fitness > incumbent.fitness => AddOutcome::Improved,
            Some(_) => AddOutcome::Rejected,
        };
        if outcome == AddOutcome::NewCell {
            self.occupied.push(cell);
        }
        if outcome.is_addition() {
            self.cells[cell] = Some(Elite {
                genotype,
                fitness,
                bd,
                eval_record_id,
            });
        }
        outcome
    }

    /// `k` genotypes drawn uniformly, with replacement, over occupied cells.
    pub fn uniform_select<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<&ParamVector>> {
        if self.is_empty() {
            return Err(Error::EmptyArchive);
        }
        Ok((0..k)
            .map(|_| {
                let cell = self.occupied[rng.random_range(0..self.occupied.len())];
                &self.cells[cell].as_ref().unwrap().genotype
            })
            .collect())
    }

    /// Writes `archive.csv` (one row per cell, empty fields for vacant cells)
    /// and the `genotypes.bin` sidecar into `dir`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        let csv_path = dir.join(ARCHIVE_CSV);
        let bin_path = dir.join(GENOTYPES_BIN);
        let dim = self.bd_dim();
        let mut header = vec!["cell_id".to_string()];
        header.extend((0..dim).map(|i| format!("centroid_{i}")));
        header.extend((0..dim).map(|i| format!("bd_{i}")));
        header.push("fitness".into());
        header.push("genotype_offset".into());

        let mut writer = csv::Writer::from_path(&csv_path)?;
        writer.write_record(&header)?;
        let bin = File::create(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
        let mut bin = BufWriter::new(bin);
        let mut offset = 0usize;
        for (cell, centroid) in self.centroids.iter().enumerate() {
            let mut row = vec![cell.to_string()];
            row.extend(centroid.iter().map(f64::to_string));
            match &self.cells[cell] {
                Some(elite) => {
                    row.extend(elite.bd.iter().map(f64::to_string));
                    row.push(elite.fitness.to_string());
                    row.push(offset.to_string());
                    elite.genotype.write_to(&mut bin).map_err(|e| Error::io(&bin_path, e))?;
                    offset += elite.genotype.encoded_len();
                }
                None => row.extend(std::iter::repeat_n(String::new(), dim + 2)),
            }
            writer.write_record(&row)?;
        }
        writer.flush().map_err(|e| Error::io(&csv_path, e))?;
        bin.flush().map_err(|e| Error::io(&bin_path, e))?;
        Ok(())
    }

    /// Inverse of [`CvtArchive::dump`]. Elite eval ids are not part of the
    /// dump and come back as the cell id.
    pub fn load(dir: &Path) -> Result<Self> {
        let csv_path = dir.join(ARCHIVE_CSV);
        let bin_path = dir.join(GENOTYPES_BIN);
        let mut reader = csv::Reader::from_path(&csv_path)?;
        let n_cols = reader.headers()?.len();
        if n_cols < 4 || (n_cols - 3) % 2 != 0 {
            return Err(Error::Dump(format!("{} has {n_cols} columns", csv_path.display())));
        }
        let dim = (n_cols - 3) / 2;
        let bin = File::open(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
        let mut bin = BufReader::new(bin);

        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Dump(format!("bad {what} value {s:?}")))
        };
        let mut centroids = Vec::new();
        let mut filled = Vec::new();
        for (row_idx, record) in reader.records().enumerate() {
            let record = record?;
            let cell: usize = record[0]
                .parse()
                .map_err(|_| Error::Dump(format!("bad cell id {:?}", &record[0])))?;
            if cell != row_idx {
                return Err(Error::Dump(format!("cell ids out of order at row {row_idx}")));
            }
            let centroid = (0..dim)
                .map(|i| parse(&record[1 + i], "centroid"))
                .collect::<Result<Vec<_>>>()?;
            centroids.push(BdPoint::new(centroid)?);
            if record[1 + dim].is_empty() {
                continue;
            }
            let bd = (0..dim)
                .map(|i| parse(&record[1 + dim + i], "bd"))
                .collect::<Result<Vec<_>>>()?;
            let fitness = parse(&record[1 + 2 * dim], "fitness")?;
            let offset: u64 = record[2 + 2 * dim]
                .parse()
                .map_err(|_| Error::Dump(format!("bad genotype offset {:?}", &record[2 + 2 * dim])))?;
            bin.seek(SeekFrom::Start(offset)).map_err(|e| Error::io(&bin_path, e))?;
            let genotype = ParamVector::read_from(&mut bin).map_err(|e| Error::io(&bin_path, e))?;
            filled.push((cell, Elite {
                genotype,
                fitness,
                bd: BdPoint::new(bd)?,
                eval_record_id: cell as u64,
            }));
        }
        if centroids.is_empty() {
            return Err(Error::Dump(format!("{} has no cells", csv_path.display())));
        }
        let mut archive = CvtArchive::new(centroids);
        for (cell, elite) in filled {
            if archive.cell_index(&elite.bd) != cell {
                return Err(Error::Dump(format!("elite BD does not map to its cell {cell}")));
            }
            archive.occupied.push(cell);
            archive.cells[cell] = Some(elite);
        }
        Ok(archive)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeepEntry {
    pub genotype: ParamVector,
    pub fitness: f64,
    pub bd: BdPoint,
}

/// One Deep-grid cell holding at most `capacity` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepCell {
    capacity: usize,
    entries: Vec<DeepEntry>,
}

impl DeepCell {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "deep-grid depth must be positive");
        Self {
            capacity,
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[DeepEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends `entry`; when the cell is full, a uniformly drawn existing
    /// entry is evicted first so the newcomer always survives.
    pub fn add<R: Rng + ?Sized>(&mut self, entry: DeepEntry, rng: &mut R) {
        if self.entries.len() >= self.capacity {
            let victim = rng.random_range(0..self.entries.len());
            self.entries.remove(victim);
        }
        self.entries.push(entry);
    }

    /// Mean fitness over the cell's entries.
    pub fn score(&self) -> Result<f64> {
        if self.entries.is_empty() {
            return Err(Error::EmptyCell);
        }
        Ok(self.entries.iter().map(|e| e.fitness).sum::<f64>() / self.entries.len() as f64)
    }

    /// A uniformly drawn entry for reproduction, plus the cell score.
    pub fn select_and_score<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(&ParamVector, f64)> {
        let score = self.score()?;
        let entry = self.entries.choose(rng).ok_or(Error::EmptyCell)?;
        Ok((&entry.genotype, score))
    }

    pub fn best(&self) -> Option<&DeepEntry> {
        self.entries
            .iter()
            .reduce(|best, e| if e.fitness > best.fitness { e } else { best })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeepGridArchive {
    centroids: Vec<BdPoint>,
    cells: Vec<DeepCell>,
    occupied: Vec<usize>,
}

impl DeepGridArchive {
    pub fn new(centroids: Vec<BdPoint>, depth: usize) -> Self {
        let cells = (0..centroids.len()).map(|_| DeepCell::new(depth)).collect();
        Self {
            centroids,
            cells,
            occupied: Vec::new(),
        }
    }

    pub fn cell_index(&self, bd: &[f64]) -> usize {
        nearest(&self.centroids, bd)
    }

    pub fn cell(&self, idx: usize) -> &DeepCell {
        &self.cells[idx]
    }

    pub fn n_cells(&self) -> usize {
        self.centroids.len()
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    /// Stores the entry in its cell. Non-finite fitness is dropped.
    pub fn add<R: Rng + ?Sized>(&mut self, entry: DeepEntry, rng: &mut R) -> AddOutcome {
        if !entry.fitness.is_finite() {
            return AddOutcome::Rejected;
        }
        let idx = self.cell_index(&entry.bd);
        let cell = &mut self.cells[idx];
        let outcome = if cell.is_empty() {
            self.occupied.push(idx);
            AddOutcome::NewCell
        } else {
            AddOutcome::Improved
        };
        cell.add(entry, rng);
        outcome
    }

    /// Uniform over occupied cells, then uniform inside the cell.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&ParamVector> {
        if self.occupied.is_empty() {
            return Err(Error::EmptyArchive);
        }
        let idx = self.occupied[rng.random_range(0..self.occupied.len())];
        Ok(self.cells[idx].select_and_score(rng)?.0)
    }

    /// Occupied cells with their mean-fitness scores, ascending cell order.
    pub fn cell_scores(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, c)| (i, c.score().unwrap()))
    }

    /// Single-elite view with the best entry of every cell.
    pub fn best_archive(&self) -> CvtArchive {
        let mut archive = CvtArchive::new(self.centroids.clone());
        for &idx in &self.occupied {
            let best = self.cells[idx].best().unwrap();
            archive.occupied.push(idx);
            archive.cells[idx] = Some(Elite {
                genotype: best.genotype.clone(),
                fitness: best.fitness,
                bd: best.bd.clone(),
                eval_record_id: idx as u64,
            });
        }
        archive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_corner_archive() -> CvtArchive {
        CvtArchive::new(vec![
            BdPoint::new(vec![0.0, 0.0]).unwrap(),
            BdPoint::new(vec![1.0, 1.0]).unwrap(),
        ])
    }

    fn bd(c: &[f64]) -> BdPoint {
        BdPoint::new(c.to_vec()).unwrap()
    }

    fn g(v: f64) -> ParamVector {
        ParamVector::new(vec![v])
    }

    #[test]
    fn nearest_centroid_and_tie_break() {
        let a = two_corner_archive();
        assert_eq!(a.cell_index(&[0.1, 0.1]), 0);
        assert_eq!(a.cell_index(&[0.9, 0.8]), 1);
        assert_eq!(a.cell_index(&[0.5, 0.5]), 0);
        let single = CvtArchive::new(vec![bd(&[0.3, 0.7])]);
        assert_eq!(single.cell_index(&[1.0, 0.0]), 0);
    }

    #[test]
    fn single_centroid_cvt_is_sample_mean() {
        let c = build_cvt(3, 1, 4000, 11).unwrap();
        assert_eq!(c.len(), 1);
        // Reproduce the sample mean directly from the same stream.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut mean = [0.0; 3];
        for _ in 0..4000 {
            for m in mean.iter_mut() {
                *m += rng.random::<f64>() / 4000.0;
            }
        }
        for (x, m) in c[0].iter().zip(mean) {
            assert!((x - m).abs() < 1e-12);
            assert!((x - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn degenerate_cvt_returns_samples() {
        let c = build_cvt(2, 16, 16, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for centroid in &c {
            let s: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
            assert_eq!(&centroid[..], &s[..]);
        }
    }

    #[test]
    fn cvt_is_inside_unit_cube_and_deterministic() {
        let a = build_cvt(2, 32, 2000, 3).unwrap();
        let b = build_cvt(2, 32, 2000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|c| c.iter().all(|x| (0.0..=1.0).contains(x))));
        assert!(build_cvt(2, 32, 10, 3).is_err());
    }

    #[test]
    fn try_add_rules() {
        let mut a = two_corner_archive();
        assert_eq!(a.try_add(g(1.0), 3.0, bd(&[0.1, 0.0]), 0), AddOutcome::NewCell);
        assert_eq!(a.try_add(g(2.0), 3.0, bd(&[0.2, 0.0]), 1), AddOutcome::Rejected);
        assert_eq!(a.get(0).unwrap().genotype, g(1.0));
        assert_eq!(a.try_add(g(3.0), 5.0, bd(&[0.2, 0.1]), 2), AddOutcome::Improved);
        assert_eq!(a.get(0).unwrap().fitness, 5.0);
        assert_eq!(a.try_add(g(4.0), f64::NAN, bd(&[0.9, 0.9]), 3), AddOutcome::Rejected);
        assert_eq!(a.non_finite_rejections(), 1);
        assert_eq!(a.coverage(), 0.5);
    }

    #[test]
    fn uniform_select_contracts() {
        let mut a = two_corner_archive();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(a.uniform_select(1, &mut rng), Err(Error::EmptyArchive)));
        a.try_add(g(7.0), 1.0, bd(&[0.0, 0.0]), 0);
        let picks = a.uniform_select(3, &mut rng).unwrap();
        assert_eq!(picks, vec![&g(7.0); 3]);

        a.try_add(g(8.0), 1.0, bd(&[1.0, 1.0]), 1);
        let draw = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            a.uniform_select(20, &mut r).unwrap().into_iter().cloned().collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
    }

    #[test]
    fn uniform_select_is_uniform() {
        let centroids: Vec<BdPoint> = (0..10).map(|i| bd(&[i as f64 / 9.0])).collect();
        let mut a = CvtArchive::new(centroids);
        for i in 0..10 {
            a.try_add(g(i as f64), 0.0, bd(&[i as f64 / 9.0]), i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mut counts = [0usize; 10];
        for p in a.uniform_select(n, &mut rng).unwrap() {
            counts[p[0] as usize] += 1;
        }
        // Binomial(n, 0.1): mean 10_000, sd 94.9.
        let sd = (n as f64 * 0.1 * 0.9).sqrt();
        let mut chi2 = 0.0;
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 3.0 * sd, "{counts:?}");
            chi2 += (c as f64 - 10_000.0).powi(2) / 10_000.0;
        }
        // 99.9% quantile of chi-square with 9 degrees of freedom.
        assert!(chi2 < 27.88, "chi2 = {chi2}");
    }

    #[test]
    fn deep_cell_capacity_and_eviction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let entry = |f: f64| DeepEntry {
            genotype: g(f),
            fitness: f,
            bd: bd(&[0.5]),
        };
        let mut cell = DeepCell::new(2);
        for f in [1.0, 2.0, 3.0] {
            cell.add(entry(f), &mut rng);
        }
        assert_eq!(cell.len(), 2);
        assert_eq!(cell.entries().last().unwrap().fitness, 3.0);

        let mut big = DeepCell::new(50);
        for f in 0..10 {
            big.add(entry(f as f64), &mut rng);
        }
        assert_eq!(big.len(), 10);

        let run = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut c = DeepCell::new(3);
            for f in 0..20 {
                c.add(entry(f as f64), &mut r);
            }
            c
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn deep_cell_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut cell = DeepCell::new(50);
        assert!(matches!(cell.select_and_score(&mut rng), Err(Error::EmptyCell)));
        cell.add(DeepEntry { genotype: g(4.0), fitness: 4.0, bd: bd(&[0.1]) }, &mut rng);
        let (geno, score) = cell.select_and_score(&mut rng).unwrap();
        assert_eq!((geno.clone(), score), (g(4.0), 4.0));
        cell.add(DeepEntry { genotype: g(2.0), fitness: 2.0, bd: bd(&[0.1]) }, &mut rng);
        assert_eq!(cell.score().unwrap(), 3.0);

        let mut same = DeepCell::new(50);
        for _ in 0..50 {
            same.add(DeepEntry { genotype: g(0.0), fitness: -1.25, bd: bd(&[0.1]) }, &mut rng);
        }
        assert_eq!(same.score().unwrap(), -1.25);
    }

    #[test]
    fn dump_and_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = CvtArchive::new(build_cvt(2, 8, 200, 1).unwrap());
        a.try_add(ParamVector::new(vec![0.1, -0.2, 1e-300]), -1.5, bd(&[0.2, 0.3]), 0);
        a.try_add(ParamVector::new(vec![3.0]), 2.25, bd(&[0.9, 0.1]), 1);
        a.dump(dir.path()).unwrap();
        let b = CvtArchive::load(dir.path()).unwrap();
        assert_eq!(a.centroids(), b.centroids());
        assert_eq!(a.len(), b.len());
        for ((ca, ea), (cb, eb)) in a.iter().zip(b.iter()) {
            assert_eq!(ca, cb);
            assert_eq!(ea.genotype, eb.genotype);
            assert_eq!(ea.fitness, eb.fitness);
            assert_eq!(ea.bd, eb.bd);
        }
    }
}
