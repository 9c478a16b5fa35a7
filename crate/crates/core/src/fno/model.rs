use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{affine_backward, affine_forward, relu_in_place, relu_mask};
use super::spectral::{mode_multiply, mode_multiply_backward, ModeSet};
use super::{FnoConfig, Layout};
use crate::dataset::Normalizer;
use crate::{Error, Result};

/// Parameters, normalizer and the plans needed to evaluate them.
#[derive(Debug, Clone)]
pub struct Model {
    config: FnoConfig,
    layout: Layout,
    modes: ModeSet,
    params: Vec<f64>,
    normalizer: Normalizer,
}

/// Intermediate values kept by [`Model::forward_trace`] for the reverse pass.
#[derive(Debug, Clone)]
pub struct Trace {
    input: Vec<f64>,
    /// Lifted field followed by each layer's activated output.
    acts: Vec<Vec<f64>>,
    vhats: Vec<Vec<Complex64>>,
    hidden: Vec<f64>,
    /// Denormalized output.
    pub output: Vec<f64>,
}

impl Trace {
    /// Which ReLU units are active. Finite-difference checks use it to detect
    /// perturbations that cross a kink.
    pub fn active_units(&self) -> Vec<bool> {
        self.acts[1..]
            .iter()
            .chain(std::iter::once(&self.hidden))
            .flat_map(|a| a.iter().map(|&v| v > 0.0))
            .collect()
    }
}

impl Model {
    /// Uniform `+-1/sqrt(fan_in)` for affine maps; real and imaginary parts
    /// of `R` uniform in `[0, 1/d_v^2)`.
    pub fn init(config: FnoConfig, normalizer: Normalizer, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; layout.total];
        let (cin, dv, pw) = (config.in_channels(), config.width, config.proj_width);
        let mut fill = |params: &mut [f64], off: usize, len: usize, lo: f64, hi: f64| {
            for v in &mut params[off..off + len] {
                *v = rng.gen_range(lo..hi);
            }
        };
        let sym = |fan: usize| 1.0 / (fan as f64).sqrt();
        fill(&mut params, layout.lift_w, dv * cin, -sym(cin), sym(cin));
        fill(&mut params, layout.lift_b, dv, -sym(cin), sym(cin));
        for l in &layout.layers {
            let spec_len = 2 * config.kept_modes() * dv * dv;
            fill(&mut params, l.spectral, spec_len, 0.0, 1.0 / (dv * dv) as f64);
            fill(&mut params, l.w, dv * dv, -sym(dv), sym(dv));
            fill(&mut params, l.b, dv, -sym(dv), sym(dv));
        }
        fill(&mut params, layout.proj1_w, pw * dv, -sym(dv), sym(dv));
        fill(&mut params, layout.proj1_b, pw, -sym(dv), sym(dv));
        let cout = config.out_channels();
        fill(&mut params, layout.proj2_w, cout * pw, -sym(pw), sym(pw));
        fill(&mut params, layout.proj2_b, cout, -sym(pw), sym(pw));
        Self::from_parts(config, normalizer, params)
    }

    pub fn from_parts(config: FnoConfig, normalizer: Normalizer, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(Error::shape(layout.total, params.len()));
        }
        if let Some(index) = params.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "model parameters", index });
        }
        Ok(Self {
            modes: ModeSet::new(config.grid_n, config.modes)?,
            config,
            layout,
            params,
            normalizer,
        })
    }

    pub fn config(&self) -> &FnoConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn mode_set(&self) -> &ModeSet {
        &self.modes
    }

    /// Denormalized prediction for a channel-major, normalized input.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(input)?.output)
    }

    pub fn forward_trace(&self, input: &[f64]) -> Result<Trace> {
        self.run(input, None)
    }

    /// Forward pass with every ReLU replaced by the fixed 0/1 gate `pattern`,
    /// laid out as [`Trace::active_units`]. Smooth in the parameters, and
    /// equal to [`Model::forward`] near the point the pattern was taken at.
    pub fn forward_frozen(&self, input: &[f64], pattern: &[bool]) -> Result<Vec<f64>> {
        let c = &self.config;
        let units = (c.layers * c.width + c.proj_width) * c.points();
        if pattern.len() != units {
            return Err(Error::shape(units, pattern.len()));
        }
        Ok(self.run(input, Some(pattern))?.output)
    }

    fn run(&self, input: &[f64], gate: Option<&[bool]>) -> Result<Trace> {
        let c = &self.config;
        let p = c.points();
        let (cin, dv, pw, cout) = (c.in_channels(), c.width, c.proj_width, c.out_channels());
        if input.len() != cin * p {
            return Err(Error::shape(format!("{cin} x {p}"), input.len()));
        }
        let mut gates = gate.map(|g| g.chunks_exact(dv * p));
        let activate = |v: &mut [f64], g: Option<&[bool]>| match g {
            Some(g) => v.iter_mut().zip(g).filter(|(_, on)| !**on).for_each(|(x, _)| *x = 0.0),
            None => relu_in_place(v),
        };
        let l = &self.layout;
        let w = &self.params;
        let mut a = vec![0.0; dv * p];
        affine_forward(&w[l.lift_w..], &w[l.lift_b..], input, cin, dv, p, &mut a);
        let mut acts = vec![a];
        let mut vhats = Vec::with_capacity(c.layers);
        let k = self.modes.len();
        for layer in &l.layers {
            let a = acts.last().expect("lifted field");
            let vhat = self.modes.analyze(a, dv, 1.0);
            let z = mode_multiply(&w[layer.spectral..layer.spectral + 2 * k * dv * dv], &vhat, k, dv);
            let mut pre = vec![0.0; dv * p];
            self.modes.synthesize(&z, dv, 1.0 / p as f64, &mut pre);
            let mut local = vec![0.0; dv * p];
            affine_forward(&w[layer.w..], &w[layer.b..], a, dv, dv, p, &mut local);
            for (s, q) in pre.iter_mut().zip(&local) {
                *s += q;
            }
            activate(&mut pre, gates.as_mut().and_then(|g| g.next()));
            vhats.push(vhat);
            acts.push(pre);
        }
        let mut hidden = vec![0.0; pw * p];
        affine_forward(&w[l.proj1_w..], &w[l.proj1_b..], acts.last().expect("layer output"), dv, pw, p, &mut hidden);
        activate(&mut hidden, gate.map(|g| &g[c.layers * dv * p..]));
        let mut output = vec![0.0; cout * p];
        affine_forward(&w[l.proj2_w..], &w[l.proj2_b..], &hidden, pw, cout, p, &mut output);
        for (ch, row) in output.chunks_exact_mut(p).enumerate() {
            for v in row {
                *v = self.normalizer.denormalize_output(ch % 3, *v);
            }
        }
        Ok(Trace {
            input: input.to_vec(),
            acts,
            vhats,
            hidden,
            output,
        })
    }

    /// Accumulate into `grad` the gradient of a scalar whose derivative with
    /// respect to the denormalized output is `g_out`.
    pub fn backward(&self, trace: &Trace, g_out: &[f64], grad: &mut [f64]) -> Result<()> {
        let c = &self.config;
        let p = c.points();
        let (cin, dv, pw, cout) = (c.in_channels(), c.width, c.proj_width, c.out_channels());
        if g_out.len() != cout * p {
            return Err(Error::shape(cout * p, g_out.len()));
        }
        if grad.len() != self.layout.total {
            return Err(Error::shape(self.layout.total, grad.len()));
        }
        let l = &self.layout;
        let w = &self.params;
        let k = self.modes.len();

        let mut gy = g_out.to_vec();
        for (ch, row) in gy.chunks_exact_mut(p).enumerate() {
            let s = self.normalizer.output_std[ch % 3];
            for v in row {
                *v *= s;
            }
        }
        let (mut gh, mut ga) = (vec![0.0; pw * p], vec![0.0; dv * p]);
        {
            let (gw, rest) = grad[l.proj2_w..].split_at_mut(cout * pw);
            affine_backward(&w[l.proj2_w..], &trace.hidden, &gy, pw, cout, p, gw, &mut rest[..cout], Some(&mut gh));
        }
        relu_mask(&mut gh, &trace.hidden);
        {
            let (gw, rest) = grad[l.proj1_w..].split_at_mut(pw * dv);
            let last = trace.acts.last().expect("layer output");
            affine_backward(&w[l.proj1_w..], last, &gh, dv, pw, p, gw, &mut rest[..pw], Some(&mut ga));
        }
        for (li, layer) in l.layers.iter().enumerate().rev() {
            let a_in = &trace.acts[li];
            relu_mask(&mut ga, &trace.acts[li + 1]);
            let mut g_in = vec![0.0; dv * p];
            {
                let (gw, rest) = grad[layer.w..].split_at_mut(dv * dv);
                affine_backward(&w[layer.w..], a_in, &ga, dv, dv, p, gw, &mut rest[..dv], Some(&mut g_in));
            }
            let gz = self.modes.analyze(&ga, dv, 1.0 / p as f64);
            let len = 2 * k * dv * dv;
            let gv = mode_multiply_backward(
                &w[layer.spectral..layer.spectral + len],
                &trace.vhats[li],
                &gz,
                k,
                dv,
                &mut grad[layer.spectral..layer.spectral + len],
            );
            let mut g_spec = vec![0.0; dv * p];
            self.modes.synthesize(&gv, dv, 1.0, &mut g_spec);
            for (a, b) in g_in.iter_mut().zip(&g_spec) {
                *a += b;
            }
            ga = g_in;
        }
        let (gw, rest) = grad[l.lift_w..].split_at_mut(dv * cin);
        affine_backward(&w[l.lift_w..], &trace.input, &ga, cin, dv, p, gw, &mut rest[..dv], None);
        Ok(())
    }
}

/// Relative L2 loss `|pred - target| / |target|`, falling back to the
/// absolute norm (and reporting it) when the target is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub zero_reference: bool,
}

pub fn loss_rel_l2(pred: &[f64], target: &[f64]) -> Result<LossValue> {
    if pred.len() != target.len() {
        return Err(Error::shape(target.len(), pred.len()));
    }
    let (d, t) = norms(pred, target);
    Ok(if t > 0.0 {
        LossValue { value: d / t, zero_reference: false }
    } else {
        LossValue { value: d, zero_reference: true }
    })
}

/// Loss and its gradient with respect to `pred`. The gradient of the norm at
/// zero is taken to be zero.
pub fn loss_rel_l2_grad(pred: &[f64], target: &[f64]) -> Result<(LossValue, Vec<f64>)> {
    let loss = loss_rel_l2(pred, target)?;
    let (d, t) = norms(pred, target);
    let denom = if loss.zero_reference { d } else { d * t };
    let grad = if d == 0.0 {
        vec![0.0; pred.len()]
    } else {
        pred.iter().zip(target).map(|(p, q)| (p - q) / denom).collect()
    };
    Ok((loss, grad))
}

fn norms(pred: &[f64], target: &[f64]) -> (f64, f64) {
    let mut d = 0.0;
    let mut t = 0.0;
    for (p, q) in pred.iter().zip(target) {
        d += (p - q) * (p - q);
        t += q * q;
    }
    (d.sqrt(), t.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny(out_steps: usize) -> FnoConfig {
        FnoConfig {
            grid_n: 8,
            modes: 2,
            width: 2,
            layers: 1,
            in_steps: 2,
            out_steps,
            proj_width: 128,
            membrane_mask: false,
        }
    }

    fn input(c: &FnoConfig, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..c.in_channels() * c.points()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let c = tiny(1);
        let a = Model::init(c, Normalizer::identity(), 3).unwrap();
        let b = Model::init(c, Normalizer::identity(), 3).unwrap();
        let d = Model::init(c, Normalizer::identity(), 4).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), d.params());
        let l = &a.layout().layers[0];
        let spec = &a.params()[l.spectral..l.w];
        assert!(spec.iter().all(|&v| (0.0..0.25).contains(&v)));
        assert!(a.params().iter().all(|v| v.is_finite()));
        assert!(Model::init(FnoConfig { modes: 5, ..c }, Normalizer::identity(), 0).is_err());
    }

    #[test]
    fn output_shapes_for_both_heads() {
        for out in [1, 2] {
            let c = tiny(out);
            let m = Model::init(c, Normalizer::identity(), 1).unwrap();
            let y = m.forward(&input(&c, 2)).unwrap();
            assert_eq!(y.len(), 3 * out * 512);
            assert_eq!(y, m.forward(&input(&c, 2)).unwrap());
            assert!(m.forward(&[0.0; 10]).is_err());
            let z = m.forward(&vec![0.0; c.in_channels() * 512]).unwrap();
            assert!(z.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn fourier_layer_identity_and_dead_relu() {
        let c = FnoConfig { layers: 1, ..tiny(1) };
        let mut m = Model::init(c, Normalizer::identity(), 5).unwrap();
        let l = m.layout().layers[0];
        let dv = c.width;
        let p = m.params_mut();
        p[l.spectral..l.w].fill(0.0);
        p[l.w..l.b].fill(0.0);
        for i in 0..dv {
            p[l.w + i * dv + i] = 1.0;
        }
        p[l.b..l.b + dv].fill(0.0);
        let t = m.forward_trace(&input(&c, 6)).unwrap();
        let lifted: Vec<f64> = t.acts[0].iter().map(|v| v.max(0.0)).collect();
        assert_eq!(t.acts[1], lifted);

        let lift = (m.layout().lift_w, m.layout().lift_b);
        let p = m.params_mut();
        p[lift.0..lift.1].fill(0.0);
        p[lift.1..lift.1 + dv].fill(0.0);
        p[l.b..l.b + dv].fill(-1.0);
        let t = m.forward_trace(&input(&c, 6)).unwrap();
        assert!(t.acts[1].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn loss_examples() {
        let x = [1.0, -2.0, 3.0];
        assert_eq!(loss_rel_l2(&x, &x).unwrap().value, 0.0);
        assert!((loss_rel_l2(&[0.0; 3], &x).unwrap().value - 1.0).abs() < 1e-15);
        let twice = x.map(|v| 2.0 * v);
        assert!((loss_rel_l2(&twice, &x).unwrap().value - 1.0).abs() < 1e-15);
        let z = loss_rel_l2(&x, &[0.0; 3]).unwrap();
        assert!(z.zero_reference);
        let (_, g) = loss_rel_l2_grad(&x, &x).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        check_gradient(tiny(2));
    }

    #[test]
    fn gradient_matches_with_odd_width_and_two_layers() {
        check_gradient(FnoConfig { width: 3, layers: 2, proj_width: 6, ..tiny(1) });
    }

    #[test]
    fn frozen_gates_reproduce_the_forward_pass() {
        let c = FnoConfig { layers: 2, ..tiny(2) };
        let m = Model::init(c, Normalizer::identity(), 5).unwrap();
        let x = input(&c, 6);
        let t = m.forward_trace(&x).unwrap();
        assert_eq!(m.forward_frozen(&x, &t.active_units()).unwrap(), t.output);
        assert!(m.forward_frozen(&x, &[true; 3]).is_err());
    }

    fn check_gradient(c: FnoConfig) {
        let norm = Normalizer {
            input_mean: [0.0; 3],
            input_std: [1.0; 3],
            output_mean: [0.1, -0.2, 0.05],
            output_std: [0.5, 2.0, 1.5],
        };
        let mut m = Model::init(c, norm, 11).unwrap();
        let x = input(&c, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let target: Vec<f64> = (0..c.out_channels() * 512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let trace = m.forward_trace(&x).unwrap();
        let (_, g) = loss_rel_l2_grad(&trace.output, &target).unwrap();
        let mut grad = vec![0.0; m.layout().total];
        m.backward(&trace, &g, &mut grad).unwrap();

        // five-point stencil on the network with its ReLU gates frozen at
        // the base point: smooth, and with the same gradient there
        let pattern = trace.active_units();
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for i in 0..grad.len() {
            let orig = m.params()[i];
            let mut probe = |d: f64| {
                m.params_mut()[i] = orig + d;
                loss_rel_l2(&m.forward_frozen(&x, &pattern).unwrap(), &target).unwrap().value
            };
            let fd = (-probe(2.0 * h) + 8.0 * probe(h) - 8.0 * probe(-h) + probe(-2.0 * h)) / (12.0 * h);
            m.params_mut()[i] = orig;
            let err = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6);
            worst = worst.max(err);
        }
        assert!(worst <= 1e-5, "worst relative gradient error {worst:e}");
    }
}
