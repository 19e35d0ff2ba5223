//! Single-agent attention Q-network over image observations, and the plain
//! DQN baseline. The image is cut into a uniform grid of patches; a shared
//! feature network embeds each patch; parallel attention layers each pick
//! out a weighted blend of per-patch value features; the concatenated
//! blends feed the Q head. The single-attention baseline is this model
//! with one attention layer.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{attention_rows, distance_penalty, entropy_penalty};
use crate::nn::tensor::Tensor;
use crate::nn::{Activation, Mlp, ParamId, ParamSet, Tape, Var, LEAKY_SLOPE};

/// How an image splits into a uniform grid of flattened patches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentationSpec {
    pub image_height: usize,
    pub image_width: usize,
    pub channels: usize,
    pub patch_height: usize,
    pub patch_width: usize,
}

impl SegmentationSpec {
    pub fn new(
        image_height: usize,
        image_width: usize,
        channels: usize,
        patch_height: usize,
        patch_width: usize,
    ) -> Result<SegmentationSpec> {
        let spec = SegmentationSpec { image_height, image_width, channels, patch_height, patch_width };
        if [image_height, image_width, channels, patch_height, patch_width].contains(&0) {
            return Err(Error::Config("segmentation dimensions must be positive".into()));
        }
        if !image_height.is_multiple_of(patch_height) || !image_width.is_multiple_of(patch_width) {
            return Err(Error::Config(format!(
                "patch {patch_height}x{patch_width} does not tile image {image_height}x{image_width}"
            )));
        }
        if spec.patches() < 2 {
            return Err(Error::Config(
                "segmentation must produce at least 2 patches; a single patch defeats attention".into(),
            ));
        }
        Ok(spec)
    }

    pub fn grid_rows(&self) -> usize {
        self.image_height / self.patch_height
    }

    pub fn grid_cols(&self) -> usize {
        self.image_width / self.patch_width
    }

    pub fn patches(&self) -> usize {
        self.grid_rows() * self.grid_cols()
    }

    pub fn patch_len(&self) -> usize {
        self.patch_height * self.patch_width * self.channels
    }

    pub fn grid_position(&self, patch: usize) -> (usize, usize) {
        (patch / self.grid_cols(), patch % self.grid_cols())
    }

    fn check_image(&self, image: &Tensor) -> Result<()> {
        let want = [self.image_height, self.image_width, self.channels];
        if image.shape() != want {
            return Err(Error::Config(format!(
                "image shape {:?} does not match segmentation {:?}",
                image.shape(),
                want
            )));
        }
        Ok(())
    }
}

/// Cut an image into its K flattened patches, row-major over the grid;
/// patch k corresponds to grid cell `spec.grid_position(k)`.
pub fn segment(image: &Tensor, spec: &SegmentationSpec) -> Result<Tensor> {
    spec.check_image(image)?;
    let mut out = vec![0.0; spec.patches() * spec.patch_len()];
    segment_into(&mut out, image, spec);
    Ok(Tensor::new(&[spec.patches(), spec.patch_len()], out))
}

fn segment_into(out: &mut [f64], image: &Tensor, spec: &SegmentationSpec) {
    let (ph, pw, ch) = (spec.patch_height, spec.patch_width, spec.channels);
    let width = spec.image_width;
    let plen = spec.patch_len();
    let data = image.data();
    for k in 0..spec.patches() {
        let (gr, gc) = spec.grid_position(k);
        let dst = &mut out[k * plen..(k + 1) * plen];
        for pr in 0..ph {
            let src_row = (gr * ph + pr) * width + gc * pw;
            let src = &data[src_row * ch..(src_row + pw) * ch];
            dst[pr * pw * ch..(pr + 1) * pw * ch].copy_from_slice(src);
        }
    }
}

/// Normalized (row, col) grid coordinates per patch, appended to each
/// patch's feature vector so position survives the shared embedding.
fn index_features(spec: &SegmentationSpec) -> Vec<f64> {
    let (rows, cols) = (spec.grid_rows(), spec.grid_cols());
    let norm = |v: usize, n: usize| if n > 1 { v as f64 / (n - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(spec.patches() * 2);
    for k in 0..spec.patches() {
        let (gr, gc) = spec.grid_position(k);
        out.push(norm(gr, rows));
        out.push(norm(gc, cols));
    }
    out
}

/// Output of a batched forward pass, shared by all model families. For
/// single-agent models `q_all` is [batch, actions]; for team models it is
/// [batch * agents, actions] with agents varying fastest.
pub struct BatchForward {
    pub q_all: Var,
    /// Per-item attention weight matrices (empty for attention-free models).
    pub attention: Vec<Var>,
    /// Per-item raw attention logits, kept for logit regularization.
    pub logits: Vec<Var>,
}

/// A Q-network over single image observations.
pub trait ImageQNet: Clone {
    fn num_actions(&self) -> usize;
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    fn forward_batch(&self, tape: &mut Tape, images: &[Tensor]) -> Result<BatchForward>;
    /// Optional penalty term derived from this batch (already averaged).
    fn regularizer(&self, tape: &mut Tape, fwd: &BatchForward) -> Option<Var>;

    fn forward_one(&self, tape: &mut Tape, image: &Tensor) -> Result<(Var, Option<Var>)> {
        let fwd = self.forward_batch(tape, std::slice::from_ref(image))?;
        Ok((fwd.q_all, fwd.attention.into_iter().next()))
    }
}

#[derive(Clone, Debug)]
pub struct SingleManetConfig {
    pub seg: SegmentationSpec,
    /// Number of parallel attention layers (N >= 1; 1 = the
    /// single-attention baseline).
    pub attention_layers: usize,
    pub feature_hidden: usize,
    pub key_width: usize,
    pub value_width: usize,
    pub q_hidden: usize,
    pub num_actions: usize,
    pub lambda_entropy: f64,
    pub lambda_distance: f64,
}

impl SingleManetConfig {
    /// Navigation-task defaults: 40x40x3 images in 5x5 patches, two
    /// attention layers, regularizers off.
    pub fn nav_default() -> SingleManetConfig {
        SingleManetConfig {
            seg: SegmentationSpec::new(40, 40, 3, 5, 5).unwrap(),
            attention_layers: 2,
            feature_hidden: 64,
            key_width: 16,
            value_width: 32,
            q_hidden: 128,
            num_actions: 4,
            lambda_entropy: 0.0,
            lambda_distance: 0.0,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.attention_layers == 0 {
            return Err(Error::Config("attention_layers must be at least 1".into()));
        }
        if self.num_actions == 0 {
            return Err(Error::Config("num_actions must be positive".into()));
        }
        if self.lambda_entropy < 0.0 || self.lambda_distance < 0.0 {
            return Err(Error::Config("regularizer weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// The single-agent multi-focus attention network.
#[derive(Clone, Debug)]
pub struct SingleManet {
    cfg: SingleManetConfig,
    params: ParamSet,
    feature_net: Mlp,
    w_key: ParamId,
    w_val: ParamId,
    selectors: Vec<ParamId>,
    q_net: Mlp,
    /// [K, 2] normalized grid coordinates, fixed at construction.
    index_block: Vec<f64>,
}

impl SingleManet {
    pub fn new(cfg: SingleManetConfig, rng: &mut ChaCha8Rng) -> Result<SingleManet> {
        cfg.validate()?;
        let mut params = ParamSet::new();
        let feature_net = Mlp::new(
            &mut params,
            "ff",
            &[cfg.seg.patch_len(), cfg.feature_hidden, cfg.feature_hidden],
            &[Activation::LeakyRelu, Activation::LeakyRelu],
            rng,
        )?;
        let common_width = cfg.feature_hidden + 2;
        let w_key = params.add_uniform("w_key", &[common_width, cfg.key_width], common_width, rng);
        let w_val = params.add_uniform("w_val", &[common_width, cfg.value_width], common_width, rng);
        let selectors = (0..cfg.attention_layers)
            .map(|n| params.add_uniform(format!("selector{n}"), &[1, cfg.key_width], cfg.key_width, rng))
            .collect();
        let q_net = Mlp::new(
            &mut params,
            "q",
            &[cfg.attention_layers * cfg.value_width, cfg.q_hidden, cfg.num_actions],
            &[Activation::LeakyRelu, Activation::Identity],
            rng,
        )?;
        let index_block = index_features(&cfg.seg);
        Ok(SingleManet { cfg, params, feature_net, w_key, w_val, selectors, q_net, index_block })
    }

    pub fn config(&self) -> &SingleManetConfig {
        &self.cfg
    }

    /// Common, key, and value features for every patch of every image,
    /// stacked as [batch * K, width] matrices.
    fn stacked_features(&self, tape: &mut Tape, images: &[Tensor]) -> Result<(Var, Var, Var)> {
        let k = self.cfg.seg.patches();
        let plen = self.cfg.seg.patch_len();
        let b = images.len();
        let mut stacked = vec![0.0; b * k * plen];
        for (i, image) in images.iter().enumerate() {
            self.cfg.seg.check_image(image)?;
            segment_into(&mut stacked[i * k * plen..(i + 1) * k * plen], image, &self.cfg.seg);
        }
        let patches = tape.constant(Tensor::new(&[b * k, plen], stacked));
        let embedded = self.feature_net.forward(tape, &self.params, patches)?;
        let index = tape.constant(Tensor::new(&[b * k, 2], self.index_block.repeat(b)));
        let common = tape.concat_cols(&[embedded, index]);
        let wk = tape.param(&self.params, self.w_key);
        let keys = tape.matmul(common, wk);
        let wv = tape.param(&self.params, self.w_val);
        let val_lin = tape.matmul(common, wv);
        let values = tape.leaky_relu(val_lin, LEAKY_SLOPE);
        Ok((common, keys, values))
    }

    /// Per-patch features for one image: (common, keys, values) with K rows
    /// each. Exposed for inspection and tests.
    pub fn extract_features(&self, tape: &mut Tape, image: &Tensor) -> Result<(Var, Var, Var)> {
        self.stacked_features(tape, std::slice::from_ref(image))
    }

    fn selector_matrix(&self, tape: &mut Tape) -> Var {
        let rows: Vec<Var> = self.selectors.iter().map(|&s| tape.param(&self.params, s)).collect();
        if rows.len() == 1 {
            rows[0]
        } else {
            tape.concat_rows(&rows)
        }
    }
}

impl ImageQNet for SingleManet {
    fn num_actions(&self) -> usize {
        self.cfg.num_actions
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward_batch(&self, tape: &mut Tape, images: &[Tensor]) -> Result<BatchForward> {
        assert!(!images.is_empty(), "forward_batch on an empty batch");
        let b = images.len();
        let k = self.cfg.seg.patches();
        let (_, keys_all, values_all) = self.stacked_features(tape, images)?;
        let selectors = self.selector_matrix(tape);
        let mut focus = Vec::with_capacity(b);
        let mut attention = Vec::with_capacity(b);
        let mut logits_per_item = Vec::with_capacity(b);
        for i in 0..b {
            let keys = tape.rows(keys_all, i * k, k);
            let values = tape.rows(values_all, i * k, k);
            let (logits, weights) = attention_rows(tape, selectors, keys);
            let h = tape.matmul(weights, values);
            let g = tape.reshape(h, &[1, self.cfg.attention_layers * self.cfg.value_width]);
            focus.push(g);
            attention.push(weights);
            logits_per_item.push(logits);
        }
        let g_all = if b == 1 { focus[0] } else { tape.concat_rows(&focus) };
        let q_all = self.q_net.forward(tape, &self.params, g_all)?;
        Ok(BatchForward { q_all, attention, logits: logits_per_item })
    }

    fn regularizer(&self, tape: &mut Tape, fwd: &BatchForward) -> Option<Var> {
        let (le, ld) = (self.cfg.lambda_entropy, self.cfg.lambda_distance);
        if le == 0.0 && ld == 0.0 {
            return None;
        }
        let scale = 1.0 / fwd.attention.len() as f64;
        let mut total: Option<Var> = None;
        for &weights in &fwd.attention {
            let mut term: Option<Var> = None;
            if le > 0.0 {
                term = Some(entropy_penalty(tape, weights, le));
            }
            if ld > 0.0 {
                let d = distance_penalty(tape, weights, ld);
                term = Some(match term {
                    Some(t) => tape.add(t, d),
                    None => d,
                });
            }
            if let Some(t) = term {
                total = Some(match total {
                    Some(acc) => tape.add(acc, t),
                    None => t,
                });
            }
        }
        total.map(|t| tape.scale(t, scale))
    }
}

/// Plain DQN baseline: the whole flattened image through a fully-connected
/// stack, no segmentation or attention.
#[derive(Clone, Debug)]
pub struct DqnBaseline {
    input_shape: [usize; 3],
    num_actions: usize,
    params: ParamSet,
    net: Mlp,
}

impl DqnBaseline {
    pub fn new(
        input_shape: [usize; 3],
        hidden: &[usize],
        num_actions: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<DqnBaseline> {
        if num_actions == 0 {
            return Err(Error::Config("num_actions must be positive".into()));
        }
        let input_len: usize = input_shape.iter().product();
        if input_len == 0 {
            return Err(Error::Config("input dimensions must be positive".into()));
        }
        let mut widths = vec![input_len];
        widths.extend_from_slice(hidden);
        widths.push(num_actions);
        let mut acts = vec![Activation::LeakyRelu; hidden.len()];
        acts.push(Activation::Identity);
        let mut params = ParamSet::new();
        let net = Mlp::new(&mut params, "dqn", &widths, &acts, rng)?;
        Ok(DqnBaseline { input_shape, num_actions, params, net })
    }
}

impl ImageQNet for DqnBaseline {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward_batch(&self, tape: &mut Tape, images: &[Tensor]) -> Result<BatchForward> {
        assert!(!images.is_empty(), "forward_batch on an empty batch");
        let input_len: usize = self.input_shape.iter().product();
        let mut stacked = Vec::with_capacity(images.len() * input_len);
        for image in images {
            if image.shape() != self.input_shape {
                return Err(Error::Config(format!(
                    "image shape {:?} does not match network input {:?}",
                    image.shape(),
                    self.input_shape
                )));
            }
            stacked.extend_from_slice(image.data());
        }
        let x = tape.constant(Tensor::new(&[images.len(), input_len], stacked));
        let q_all = self.net.forward(tape, &self.params, x)?;
        Ok(BatchForward { q_all, attention: Vec::new(), logits: Vec::new() })
    }

    fn regularizer(&self, _tape: &mut Tape, _fwd: &BatchForward) -> Option<Var> {
        None
    }
}
