mod common;

use common::{random_nets, synthetic_batch, tank_scaling};
use pime_core::neuralnet::{GaussianPolicy, NetSizes, ValueNet};
use pime_core::ppo::{normalize_advantages, ppo_loss, update, Optimizers, PpoHyper};
use pime_core::rng::substream;

#[test]
fn ratio_is_exactly_one_at_unchanged_parameters() {
    let (p, v) = random_nets(&NetSizes::default(), &[64, 64], 5);
    let batch = synthetic_batch(&p, 32, &mut substream(5, &[1]));
    for s in &batch.samples {
        let mean = s.prior + p.mean_correction(&s.x_ext.x, s.y_ref, s.x_ext.z).unwrap();
        assert_eq!(p.log_prob(mean, s.u).to_bits(), s.log_prob_old.to_bits());
    }
    let idx: Vec<usize> = (0..batch.len()).collect();
    let r = ppo_loss(&batch, &batch.advantages, &idx, &p, &v, &PpoHyper::tanks()).unwrap();
    assert_eq!(r.approx_kl, 0.0);
    assert_eq!(r.clip_frac, 0.0);
}

#[test]
fn zero_objective_leaves_parameters() {
    let mut rng = substream(6, &[]);
    let mut p = GaussianPolicy::new(tank_scaling(), &NetSizes::default(), 5.0, -0.7, (-8.0, 1.0), &mut rng).unwrap();
    let mut v = ValueNet::new(tank_scaling(), &[64, 64], 10.0, &mut rng).unwrap();
    let mut batch = synthetic_batch(&p, 40, &mut rng);
    batch.advantages.iter_mut().for_each(|a| *a = 0.0);
    for (i, s) in batch.samples.iter().enumerate() {
        batch.returns[i] = v.value(&s.x_ext.x, s.y_ref, s.x_ext.z).unwrap();
    }
    let before = (p.params().to_vec(), v.params().to_vec());

    // Entropy only moves log σ.
    let hyper = PpoHyper { epochs: 2, minibatch: 16, ..PpoHyper::tanks() };
    let mut opt = Optimizers::new(&p, &v, hyper.stepsize);
    let mut p1 = p.clone();
    let mut v1 = v.clone();
    update(&mut p1, &mut v1, &batch, &hyper, &mut opt, &mut substream(6, &[1])).unwrap();
    let n = p.param_count();
    assert_eq!(&p1.params()[..n - 1], &before.0[..n - 1]);
    assert!(p1.log_std() > before.0[n - 1]);
    assert_eq!(v1.params(), &before.1[..]);

    let hyper = PpoHyper { c2: 0.0, ..hyper };
    let mut opt = Optimizers::new(&p, &v, hyper.stepsize);
    update(&mut p, &mut v, &batch, &hyper, &mut opt, &mut substream(6, &[1])).unwrap();
    assert_eq!(p.params(), &before.0[..]);
    assert_eq!(v.params(), &before.1[..]);
}

#[test]
fn identical_seeds_identical_weights() {
    let run = || {
        let (mut p, mut v) = random_nets(&NetSizes::default(), &[64, 64], 7);
        let batch = synthetic_batch(&p, 300, &mut substream(7, &[1]));
        let hyper = PpoHyper { epochs: 3, ..PpoHyper::tanks() };
        let mut opt = Optimizers::new(&p, &v, hyper.stepsize);
        let stats = update(&mut p, &mut v, &batch, &hyper, &mut opt, &mut substream(7, &[2])).unwrap();
        assert_eq!(stats.steps, 3 * 2);
        (p.params().to_vec(), v.params().to_vec())
    };
    assert_eq!(run(), run());
}

#[test]
fn small_step_descends() {
    let (mut p, mut v) = random_nets(&NetSizes::default(), &[64, 64], 8);
    let batch = synthetic_batch(&p, 64, &mut substream(8, &[1]));
    let hyper = PpoHyper { epochs: 1, minibatch: 64, stepsize: 1e-5, ..PpoHyper::tanks() };
    let mut adv = batch.advantages.clone();
    normalize_advantages(&mut adv);
    let idx: Vec<usize> = (0..64).collect();
    let before = ppo_loss(&batch, &adv, &idx, &p, &v, &hyper).unwrap().total;
    let mut opt = Optimizers::new(&p, &v, hyper.stepsize);
    update(&mut p, &mut v, &batch, &hyper, &mut opt, &mut substream(8, &[2])).unwrap();
    let after = ppo_loss(&batch, &adv, &idx, &p, &v, &hyper).unwrap().total;
    assert!(after < before, "{after} !< {before}");
}

#[test]
fn failed_update_restores_state() {
    let (mut p, mut v) = random_nets(&NetSizes::default(), &[64, 64], 9);
    let mut batch = synthetic_batch(&p, 20, &mut substream(9, &[1]));
    batch.returns[13] = f64::NAN;
    let hyper = PpoHyper { epochs: 2, minibatch: 5, ..PpoHyper::tanks() };
    let mut opt = Optimizers::new(&p, &v, hyper.stepsize);
    let before = (p.clone(), v.clone(), opt.clone());
    assert!(update(&mut p, &mut v, &batch, &hyper, &mut opt, &mut substream(9, &[2])).is_err());
    assert_eq!((p, v, opt), before);
}
