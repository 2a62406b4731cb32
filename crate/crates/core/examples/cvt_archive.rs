//! CVT archive basics: tessellation, elitist insertion, uniform selection,
//! and the CSV + binary dump.
//!
//! `cargo run --release --example cvt_archive -- [out_dir]`

use pga_map_elites::archive::{build_cvt, AddOutcome, BdPoint, CvtArchive};
use pga_map_elites::metrics::compute_metrics;
use pga_map_elites::neuro::ParamVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pga_map_elites::Result<()> {
    let centroids = build_cvt(2, 64, 6400, 0)?;
    let mut archive = CvtArchive::new(centroids);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut new_cells, mut improved) = (0, 0);
    for id in 0..2000 {
        let bd = BdPoint::new(vec![rng.random(), rng.random()])?;
        // Fitness peaks at the centre of the descriptor space.
        let fitness = -((bd[0] - 0.5).powi(2) + (bd[1] - 0.5).powi(2)) + 0.05 * rng.random::<f64>();
        let genotype = ParamVector::new(vec![bd[0], bd[1]]);
        match archive.try_add(genotype, fitness, bd, id) {
            AddOutcome::NewCell => new_cells += 1,
            AddOutcome::Improved => improved += 1,
            AddOutcome::Rejected => {}
        }
    }
    let m = compute_metrics(&archive, -1.0);
    println!("new cells {new_cells}, improvements {improved}");
    println!("coverage {:.3}, QD-score {:.3}, max fitness {:.4}", m.coverage, m.qd_score, m.max_fitness);

    let parents = archive.uniform_select(3, &mut rng)?;
    println!("three uniformly selected parents: {parents:.3?}");

    let out = std::env::args().nth(1).unwrap_or_else(|| "out/cvt_archive".into());
    std::fs::create_dir_all(&out).map_err(|e| pga_map_elites::Error::Dump(e.to_string()))?;
    archive.dump(out.as_ref())?;
    let reloaded = CvtArchive::load(out.as_ref())?;
    println!("dumped to {out}, reloaded {} elites", reloaded.len());
    Ok(())
}
