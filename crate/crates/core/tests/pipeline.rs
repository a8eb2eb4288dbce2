//! End-to-end runs through the public API at small sizes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fcoupling::coupling::{run_static_coupling, verify_failure_implies_bad, CouplingConfig};
use fcoupling::factor::{find_f_factor, verify_factor, Search, DEFAULT_FACTOR_BUDGET};
use fcoupling::process::{couple_gh_processes, verify_embedding_chain};
use fcoupling::{ParamSet64, Pattern, UGraph};

#[test]
fn static_runs_are_sound() {
    let k4 = Pattern::complete_graph(4).unwrap();
    let params = ParamSet64::with_defaults(14, k4.clone()).unwrap();
    let (p, pi) = (params.p_plus().unwrap(), params.pi_plus().unwrap());
    let config = CouplingConfig { sweeps: 50, ..CouplingConfig::hybrid(64, usize::MAX) };
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = run_static_coupling(&k4, 14, p, pi, &config, &mut rng).unwrap();
        assert_eq!(t.failed, !t.h_within_g());
        let verdict = verify_failure_implies_bad(&t, params.m().unwrap(), pi, 1_000_000).unwrap();
        assert_ne!(verdict, Some(false), "seed {seed}: failure outside B1 and B2");
    }
}

#[test]
fn process_chain_is_self_consistent() {
    let k4_3 = Pattern::complete_uniform(3, 4).unwrap();
    let params = ParamSet64::with_defaults(16, k4_3).unwrap();
    let config = CouplingConfig { sweeps: 0, ..CouplingConfig::hybrid(64, 20) };
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let res = couple_gh_processes(&params, &config, &mut rng).unwrap();
        assert_eq!(verify_embedding_chain(&res).unwrap(), res.chain_holds);
        assert!(res.dummies.is_empty(), "no dummies for u = 3");
        assert!(res.t_h <= res.h_proc.order.len() && res.t_g <= res.g_proc.order.len());
    }
}

#[test]
fn complete_host_has_factor() {
    let k33 = Pattern::complete_bipartite(3, 3).unwrap();
    let g = UGraph::complete(12, 2);
    let Search::Found(f) = find_f_factor(&g, &k33, DEFAULT_FACTOR_BUDGET).unwrap() else { panic!("K12 has a K3,3-factor") };
    assert!(verify_factor(&g, &k33, &f));
}
