use super::{Sample, TrainingLoad};
use crate::arch::PnwArchitecture;
use crate::dataset::Dataset;
use crate::error::{PnwError, Result};
use crate::rng::SeededRng;
use std::collections::HashSet;

/// Builds the N_T training loads, in [`PnwArchitecture::ann_indices`] order.
///
/// Each datum goes to the class owning its label. Within a class, data in
/// ascending id order are cut into contiguous chunks of `ceil(n / n_g)`;
/// chunk `j` is the home data of group `j`. Every ANN of a group trains on
/// all home data of the group under its own feature, targeted at the
/// datum's label node.
///
/// With two or more classes each group also draws expat data, as many as
/// it has home data (or all available, if fewer), targeted at the expat
/// node. Expat data come round-robin from every other group of every class,
/// starting with the next group in flat order. Each source group's data are
/// shuffled once, and each receiving group starts reading every source at a
/// random offset. All randomness comes from `rng`, consumed in flat group
/// order. Expat candidates whose image bytes equal a home image of the
/// receiving group are skipped. The n_f ANNs of a group share the same
/// expat data.
pub fn assign_loads(ds: &Dataset, arch: &PnwArchitecture, rng: &mut SeededRng) -> Result<Vec<TrainingLoad>> {
    arch.validate()?;
    let (n_c, n_g) = (arch.n_classes, arch.n_groups);

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_c];
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by_key(|&i| ds.ids()[i]);
    for i in order {
        let label = ds.labels()[i];
        let class = arch
            .partition
            .class_of(label)
            .ok_or(PnwError::LabelOutOfRange { label, max: arch.n_labels })?;
        by_class[class].push(i);
    }

    // homes[class * n_g + group] = dataset positions.
    let mut homes: Vec<Vec<usize>> = Vec::with_capacity(n_c * n_g);
    for (class, members) in by_class.iter().enumerate() {
        if members.is_empty() {
            return Err(PnwError::EmptyClass { class: class + 1 });
        }
        let chunk = members.len().div_ceil(n_g);
        for group in 0..n_g {
            let start = (group * chunk).min(members.len());
            let end = ((group + 1) * chunk).min(members.len());
            if start == end {
                return Err(PnwError::InvalidDataset(format!(
                    "class {} has {} data, too few for {n_g} groups",
                    class + 1,
                    members.len()
                )));
            }
            homes.push(members[start..end].to_vec());
        }
    }

    let expats: Vec<Vec<usize>> = if n_c >= 2 { draw_expats(ds, &homes, rng) } else { vec![Vec::new(); homes.len()] };

    let mut loads = Vec::with_capacity(arch.total_anns());
    for idx in arch.ann_indices() {
        let g = idx.class * n_g + idx.group;
        let spec = &arch.feature_specs[idx.feature];
        let labels = arch.output_labels(idx.class);
        let expat_node = labels.len() - 1;
        let mut samples = Vec::with_capacity(homes[g].len() + expats[g].len());
        for &i in &homes[g] {
            let (id, image, label) = ds.get(i);
            let target = labels.iter().position(|&l| l == label).expect("label belongs to its class");
            samples.push(Sample { id, features: spec.apply(image)?, target });
        }
        for &i in &expats[g] {
            let (id, image, _) = ds.get(i);
            samples.push(Sample { id, features: spec.apply(image)?, target: expat_node });
        }
        loads.push(TrainingLoad {
            ann_index: idx,
            samples,
            home_count: homes[g].len(),
            expat_count: expats[g].len(),
        });
    }
    Ok(loads)
}

fn draw_expats(ds: &Dataset, homes: &[Vec<usize>], rng: &mut SeededRng) -> Vec<Vec<usize>> {
    let n_groups = homes.len();
    let shuffled: Vec<Vec<usize>> = homes
        .iter()
        .map(|h| {
            let mut h = h.clone();
            rng.shuffle(&mut h);
            h
        })
        .collect();
    let mut out = Vec::with_capacity(n_groups);
    for (g, home) in homes.iter().enumerate() {
        let home_bytes: HashSet<&[u8]> = home.iter().map(|&i| ds.images()[i].bytes()).collect();
        let sources: Vec<usize> = (1..n_groups).map(|d| (g + d) % n_groups).collect();
        let mut cursor: Vec<usize> = sources.iter().map(|&s| rng.below(shuffled[s].len())).collect();
        let mut taken = vec![0usize; sources.len()];
        let want = home.len();
        let mut picked = Vec::with_capacity(want);
        'fill: while picked.len() < want {
            let mut progressed = false;
            for (n, &s) in sources.iter().enumerate() {
                if picked.len() == want {
                    break 'fill;
                }
                // Skip candidates that duplicate a home image.
                while taken[n] < shuffled[s].len() {
                    let cand = shuffled[s][cursor[n] % shuffled[s].len()];
                    cursor[n] += 1;
                    taken[n] += 1;
                    if !home_bytes.contains(ds.images()[cand].bytes()) {
                        picked.push(cand);
                        progressed = true;
                        break;
                    }
                }
            }
            if !progressed {
                break;
            }
        }
        out.push(picked);
    }
    out
}
