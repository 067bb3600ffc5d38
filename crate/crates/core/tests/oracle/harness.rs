//! Engine-versus-oracle comparison on seeded random configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_seq, Setup, Space, V};
use roughstat::analysis::{
    rough_convergent, rough_limit_set, rough_stat_convergent, stat_bounded, stat_cauchy,
    stat_cluster_points, stat_limit_set, ClusterVerdict, EpsSchedule, TailFraction, Verdict,
};
use roughstat::density::Tau;
use roughstat::pm::{PartialMetricSpace, RealPoint};
use roughstat::seq::parse_sequence;

pub fn v(x: Verdict) -> V {
    match x {
        Verdict::Yes => V::Yes,
        Verdict::No => V::No,
        Verdict::Inconclusive => V::Unsure,
    }
}

pub fn c(x: ClusterVerdict) -> V {
    match x {
        ClusterVerdict::Cluster => V::Yes,
        ClusterVerdict::NotCluster => V::No,
        ClusterVerdict::Inconclusive => V::Unsure,
    }
}

fn pt(x: f64) -> RealPoint {
    RealPoint::new(x).unwrap()
}

fn note<T: PartialEq + std::fmt::Debug>(
    bad: &mut Vec<String>,
    tag: &str,
    what: String,
    got: T,
    want: T,
) {
    if got != want {
        bad.push(format!("{tag} {what}: engine {got:?}, oracle {want:?}"));
    }
}

/// Runs every engine on one random configuration and returns a description
/// of each verdict that disagrees with the oracle.
pub fn compare(seed: u64, n: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = if rng.gen_bool(0.5) {
        Space::Max
    } else {
        Space::Shifted(f64::from(rng.gen_range(1..=4)) / 2.0)
    };
    let nonneg = space == Space::Max;
    let seq = random_seq(&mut rng, nonneg);
    let (kind, a) = space.descriptor();
    let lib_space = PartialMetricSpace::from_descriptor(&kind, a.as_deref()).unwrap();
    let lib_seq = parse_sequence(&seq.text()).unwrap();
    let schedule = EpsSchedule::default();
    let tau = Tau::default();
    let setup = Setup::new(space, seq, n, schedule.values().to_vec(), (1, 100));

    let lo = if nonneg { 0 } else { -8 };
    let grid: Vec<f64> = (lo..=8).map(|k| f64::from(k) / 2.0).collect();
    let r = f64::from(rng.gen_range(0..=4)) / 2.0;
    let x = grid[rng.gen_range(0..grid.len())];
    let tail = TailFraction::default();
    let tag = format!(
        "seed {seed} ({:?}, `{}`, x={x}, r={r})",
        space,
        setup.seq.text()
    );
    let mut bad = Vec::new();

    let got = rough_stat_convergent(&lib_space, &lib_seq, pt(x), r, &schedule, n, tau).unwrap();
    note(
        &mut bad,
        &tag,
        "rough_stat".into(),
        v(got.verdict),
        setup.rough_stat(x, r),
    );
    let got = rough_convergent(&lib_space, &lib_seq, pt(x), r, &schedule, n, tail).unwrap();
    note(
        &mut bad,
        &tag,
        "rough".into(),
        v(got.verdict),
        setup.rough(x, r, (1, 2)),
    );

    let set = stat_limit_set(&lib_space, &lib_seq, r, &grid, &schedule, n, tau).unwrap();
    for p in &set.points {
        note(
            &mut bad,
            &tag,
            format!("stat_limit_set@{}", p.x),
            v(p.membership.verdict),
            setup.rough_stat(p.x, r),
        );
    }
    let set = rough_limit_set(&lib_space, &lib_seq, r, &grid, &schedule, n, tail).unwrap();
    for p in &set.points {
        note(
            &mut bad,
            &tag,
            format!("rough_limit_set@{}", p.x),
            v(p.membership.verdict),
            setup.rough(p.x, r, (1, 2)),
        );
    }
    let clusters = stat_cluster_points(&lib_space, &lib_seq, &grid, &schedule, n, tau).unwrap();
    for p in &clusters.points {
        note(
            &mut bad,
            &tag,
            format!("cluster@{}", p.c),
            c(p.verdict),
            setup.cluster(p.c),
        );
    }

    let ms = [1.0, 2.0, 5.0, 10.0, 100.0];
    let got = stat_bounded(&lib_space, &lib_seq, pt(x), &ms, n, tau).unwrap();
    let (want, witness) = setup.bounded(x, &ms);
    note(
        &mut bad,
        &tag,
        "bounded".into(),
        v(got.result.verdict),
        want,
    );
    note(
        &mut bad,
        &tag,
        "bounded witness".into(),
        got.witness_m,
        witness,
    );

    let cand = [1, 2, 3, 4];
    let ls = [0.0, 0.5, 1.0, 2.0];
    let got = stat_cauchy(&lib_space, &lib_seq, &cand, &ls, &schedule, n, tau).unwrap();
    let (want, witness) = setup.cauchy(&cand, &ls);
    note(&mut bad, &tag, "cauchy".into(), v(got.verdict), want);
    note(
        &mut bad,
        &tag,
        "cauchy witness".into(),
        got.witness,
        witness,
    );
    bad
}
