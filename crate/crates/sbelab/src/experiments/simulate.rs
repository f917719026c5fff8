use sbelab_core::dynamics::{simulate_path, Dynamics};
use sbelab_core::spectral::{Disk, Lattice, Line};

use super::{ensemble, outcome, stream};
use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::output::{Outcome, RowKey, Table};

/// Plain ensemble run: tracked coefficients at every recorded time.
pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    let key = RowKey::new(spec);
    let mut table = Table::new("trajectory", &["path", "t", "mode", "re", "im"]);
    if spec.model.kind.is_2d() {
        let d = Dynamics::<Disk>::from_config(&spec.model)?;
        let idx: Vec<usize> = (0..d.lattice().len()).collect();
        rows(spec, &d, &idx, &key, &mut table)?;
    } else {
        let d = Dynamics::<Line>::from_config(&spec.model)?;
        let idx: Vec<usize> = spec.modes_or(8).iter().map(|k| k - 1).collect();
        rows(spec, &d, &idx, &key, &mut table)?;
    }
    Ok(outcome(vec![table], Vec::new()))
}

fn rows<L: Lattice>(spec: &ExperimentSpec, d: &Dynamics<L>, idx: &[usize], key: &RowKey, table: &mut Table) -> Result<()> {
    let paths = ensemble(spec.paths, |p| Ok(simulate_path(d, None, &stream(spec, p))?))?;
    let lat = d.lattice();
    for (p, tr) in paths.iter().enumerate() {
        for (t, u) in tr.times.iter().zip(&tr.fields) {
            for &i in idx {
                let c = u.coeffs()[i];
                table.push(
                    key,
                    vec![p.to_string(), t.to_string(), format!("{:?}", lat.mode(i)), c.re.to_string(), c.im.to_string()],
                );
            }
        }
    }
    Ok(())
}
