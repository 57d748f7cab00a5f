//! Export of the generated datasets and starting points.

use std::path::{Path, PathBuf};

use iadmmn_core::formats::{write_dense, write_sparse};

use crate::config::ExperimentConfig;
use crate::error::{io_err, Result};
use crate::experiment::cell_inputs;

/// Write `data/Y__m{m}_n{n}__d{d}.txt` and `init/{U,V}__m{m}_n{n}__d{d}_i{i}.txt`
/// under `out`, exactly as the experiment runner generates them.
pub fn generate_data(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.check()?;
    let (data_dir, init_dir) = (out.join("data"), out.join("init"));
    for d in [&data_dir, &init_dir] {
        std::fs::create_dir_all(d).map_err(io_err(d))?;
    }
    let mut written = Vec::new();
    for (si, size) in cfg.sizes.iter().enumerate() {
        let (m, n) = (size.m, size.n);
        for d in 0..cfg.n_datasets {
            for i in 0..cfg.n_inits {
                let (inst, u, v) = cell_inputs(cfg, si, d, i)?;
                if i == 0 {
                    let p = data_dir.join(format!("Y__m{m}_n{n}__d{d}.txt"));
                    write_sparse(&p, inst.data())?;
                    written.push(p);
                }
                for (name, mat) in [("U", &u), ("V", &v)] {
                    let p = init_dir.join(format!("{name}__m{m}_n{n}__d{d}_i{i}.txt"));
                    write_dense(&p, mat)?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use iadmmn_core::formats::{read_dense, read_sparse};

    #[test]
    fn files_match_the_runner_inputs() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
name = "g"
rank = 2
density = 0.3
c = 1.0
lambda_d = 0.25
lambda_t = 0.25
beta = 1.0
n_datasets = 2
n_inits = 2
master_seed = 5
gd = true
budget = { iterations = 1 }
sizes = [{ m = 4, n = 3 }]
variants = []
"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = generate_data(&cfg, dir.path()).unwrap();
        assert_eq!(files.len(), 2 + 2 * 2 * 2);
        let (inst, u, v) = cell_inputs(&cfg, 0, 1, 1).unwrap();
        let y = read_sparse(&dir.path().join("data/Y__m4_n3__d1.txt")).unwrap();
        assert_eq!(&y, inst.data());
        assert_eq!(read_dense(&dir.path().join("init/U__m4_n3__d1_i1.txt")).unwrap(), u);
        assert_eq!(read_dense(&dir.path().join("init/V__m4_n3__d1_i1.txt")).unwrap(), v);
    }
}
