//! Finite-difference checks of the autodiff layers at 64-bit precision.

use factsum::neuro::layers::{init_attention, init_bilstm, init_gat, init_linear};
use factsum::neuro::{
    bilstm_final, finite_diff_check, gat_layer, kg_cross_attention, linear, multi_head_attention,
    ParameterStore, Tape, DEFAULT_STEP,
};

fn main() -> factsum::Result<()> {
    for seed in 0..5 {
        let mut p = ParameterStore::new(seed);
        p.add_uniform("x", vec![3, 6], 1.0);
        p.add_uniform("nodes", vec![4, 6], 1.0);
        init_linear(&mut p, "lin", 6, 6);
        init_attention(&mut p, "att", 6);
        init_bilstm(&mut p, "lstm", 6, 3);
        init_gat(&mut p, "gat", 6, 2, 3);
        let adjacency = vec![vec![1], vec![0, 2], vec![1], vec![]];

        let lin = finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
            let x = t.param(s, "x");
            let y = linear(t, s, "lin", x);
            let y = t.tanh(y);
            t.sum(y)
        });
        let att = finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
            let x = t.param(s, "x");
            let n = t.param(s, "nodes");
            let a = multi_head_attention(t, s, "att", x, n, n, 2, None, 0.0).expect("shapes");
            let y = t.tanh(a.context);
            t.sum(y)
        });
        let kg = finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
            let x = t.param(s, "x");
            let n = t.param(s, "nodes");
            let u = kg_cross_attention(t, x, Some(n));
            let y = t.tanh(u);
            t.sum(y)
        });
        let lstm = finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
            let x = t.param(s, "x");
            let h = bilstm_final(t, s, "lstm", x).expect("non-empty");
            let y = t.mul(h, h);
            t.sum(y)
        });
        let gat = finite_diff_check(&p, DEFAULT_STEP, |t: &mut Tape, s| {
            let n = t.param(s, "nodes");
            let g = gat_layer(t, s, "gat", n, &adjacency, 2, false, 0.0).expect("shapes");
            let y = t.tanh(g);
            t.sum(y)
        });
        println!(
            "seed {seed}: linear {lin:.1e}  attention {att:.1e}  kg {kg:.1e}  bilstm {lstm:.1e}  gat {gat:.1e}"
        );
    }
    Ok(())
}
