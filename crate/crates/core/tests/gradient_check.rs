//! Reverse-mode gradients against central finite differences.

mod common;

use common::{random_nets, synthetic_batch};
use pime_core::neuralnet::{GaussianPolicy, NetSizes, ValueNet};
use pime_core::ppo::{ppo_loss, ppo_loss_and_grad, PpoHyper, RolloutBatch};
use pime_core::rng::substream;
use rand::Rng;

const STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;

struct Setup {
    policy: GaussianPolicy,
    value: ValueNet,
    batch: RolloutBatch,
    idx: Vec<usize>,
    hyper: PpoHyper,
}

impl Setup {
    fn new(sizes: &NetSizes, value_hidden: &[usize], n: usize, seed: u64) -> Self {
        let (policy, value) = random_nets(sizes, value_hidden, seed);
        let mut rng = substream(seed, &[99]);
        let mut batch = synthetic_batch(&policy, n, &mut rng);
        // Move every ratio off 1 but inside the clip band so the surrogate is
        // smooth around the evaluation point.
        for s in &mut batch.samples {
            s.log_prob_old += 0.1 * (rng.random::<f64>() - 0.5);
        }
        let idx = (0..n).collect();
        Setup { policy, value, batch, idx, hyper: PpoHyper::tanks() }
    }

    fn loss(&self, pp: &[f64], vp: &[f64]) -> f64 {
        let mut p = self.policy.clone();
        let mut v = self.value.clone();
        p.set_params(pp).unwrap();
        v.set_params(vp).unwrap();
        ppo_loss(&self.batch, &self.batch.advantages, &self.idx, &p, &v, &self.hyper).unwrap().total
    }

    fn analytic(&self) -> (Vec<f64>, Vec<f64>) {
        let mut pg = vec![0.0; self.policy.param_count()];
        let mut vg = vec![0.0; self.value.param_count()];
        ppo_loss_and_grad(
            &self.batch,
            &self.batch.advantages,
            &self.idx,
            &self.policy,
            &self.value,
            &self.hyper,
            &mut pg,
            &mut vg,
        )
        .unwrap();
        (pg, vg)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-8 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[test]
fn elementwise_small_modular_net() {
    let sizes = NetSizes { main: vec![5, 4], z: vec![3, 3], trunk: vec![4, 4] };
    let s = Setup::new(&sizes, &[6, 5], 6, 1);
    let (pg, vg) = s.analytic();
    let pp = s.policy.params().to_vec();
    let vp = s.value.params().to_vec();

    let mut worst = 0.0f64;
    for i in 0..pp.len() {
        let (mut up, mut dn) = (pp.clone(), pp.clone());
        up[i] += STEP;
        dn[i] -= STEP;
        let fd = (s.loss(&up, &vp) - s.loss(&dn, &vp)) / (2.0 * STEP);
        worst = worst.max(rel_err(pg[i], fd));
        assert!(rel_err(pg[i], fd) <= REL_TOL, "policy param {i}: {} vs {fd}", pg[i]);
    }
    for i in 0..vp.len() {
        let (mut up, mut dn) = (vp.clone(), vp.clone());
        up[i] += STEP;
        dn[i] -= STEP;
        let fd = (s.loss(&pp, &up) - s.loss(&pp, &dn)) / (2.0 * STEP);
        assert!(rel_err(vg[i], fd) <= REL_TOL, "value param {i}: {} vs {fd}", vg[i]);
    }
    println!("worst elementwise relative error {worst:e}");
}

#[test]
fn directional_full_size_net() {
    let s = Setup::new(&NetSizes::default(), &[64, 64], 8, 2);
    let (pg, vg) = s.analytic();
    let pp = s.policy.params().to_vec();
    let vp = s.value.params().to_vec();
    let mut rng = substream(2, &[7]);
    for k in 0..64 {
        let dp: Vec<f64> = (0..pp.len()).map(|_| rng.random::<f64>() - 0.5).collect();
        let dv: Vec<f64> = (0..vp.len()).map(|_| rng.random::<f64>() - 0.5).collect();
        let shift = |base: &[f64], d: &[f64], h: f64| -> Vec<f64> {
            base.iter().zip(d).map(|(b, d)| b + h * d).collect()
        };
        let fd = (s.loss(&shift(&pp, &dp, STEP), &shift(&vp, &dv, STEP))
            - s.loss(&shift(&pp, &dp, -STEP), &shift(&vp, &dv, -STEP)))
            / (2.0 * STEP);
        let an: f64 = pg.iter().zip(&dp).map(|(g, d)| g * d).sum::<f64>()
            + vg.iter().zip(&dv).map(|(g, d)| g * d).sum::<f64>();
        assert!(rel_err(an, fd) <= REL_TOL, "direction {k}: {an} vs {fd}");
    }
}

#[test]
fn zero_advantage_zero_value_error_has_only_entropy_gradient() {
    let (policy, value) = random_nets(&NetSizes::default(), &[64, 64], 3);
    let mut rng = substream(3, &[1]);
    let mut batch = synthetic_batch(&policy, 5, &mut rng);
    batch.advantages.iter_mut().for_each(|a| *a = 0.0);
    for (i, s) in batch.samples.iter().enumerate() {
        batch.returns[i] = value.value(&s.x_ext.x, s.y_ref, s.x_ext.z).unwrap();
    }
    let mut hyper = PpoHyper::tanks();
    hyper.c2 = 0.0;
    let mut pg = vec![0.0; policy.param_count()];
    let mut vg = vec![0.0; value.param_count()];
    let idx: Vec<usize> = (0..5).collect();
    ppo_loss_and_grad(&batch, &batch.advantages, &idx, &policy, &value, &hyper, &mut pg, &mut vg).unwrap();
    assert!(pg.iter().all(|&g| g == 0.0));
    assert!(vg.iter().all(|&g| g == 0.0));
}
