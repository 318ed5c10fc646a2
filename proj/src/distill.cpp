#include "glomkit/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace glomkit::distill {

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  const int in_h = static_cast<int>(src.rows());
  const int in_w = static_cast<int>(src.cols());
  Image out(out_h, out_w);
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, in_h - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, in_w - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double wx = fx - x0;
      out(y, x) = (1.0 - wy) * ((1.0 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                  wy * ((1.0 - wx) * src(y1, x0) + wx * src(y1, x1));
    }
  }
  return out;
}

namespace {

Image box_blur3(const Image& img) {
  const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
  Image out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          sum += img(ny, nx);
          ++count;
        }
      out(y, x) = sum / count;
    }
  return out;
}

// Photometric/flip perturbation shared by both view operators. The rng
// consumption order is part of the determinism contract.
Image augment(Image img, const ViewConfig& cfg, Rng& rng) {
  if (cfg.flips) {
    if (rng.bernoulli(0.5)) img = img.rowwise().reverse().eval();  // horizontal
    if (rng.bernoulli(0.5)) img = img.colwise().reverse().eval();  // vertical
  }
  if (cfg.jitter) {
    const double brightness = rng.uniform(-0.2, 0.2);
    const double contrast = rng.uniform(0.7, 1.3);
    const double mean = img.mean();
    img = ((img.array() - mean) * contrast + mean + brightness)
              .cwiseMax(0.0)
              .cwiseMin(1.0)
              .matrix();
  }
  if (cfg.blur && rng.bernoulli(0.5)) img = box_blur3(img);
  return img;
}

}  // namespace

ViewBatch make_views(const Image& entity, const ViewConfig& cfg, Rng& rng) {
  const int h = static_cast<int>(entity.rows());
  const int w = static_cast<int>(entity.cols());
  if (h < cfg.local_size || w < cfg.local_size || h < 1 || w < 1)
    throw EntityTooSmall("make_views: entity smaller than the local view size");
  if (!(cfg.s_min > 0.0 && cfg.s_min <= cfg.s_max && cfg.s_max <= 1.0))
    throw ValidationError("make_views: need 0 < s_min <= s_max <= 1");

  ViewBatch batch;
  for (int i = 0; i < cfg.n_global; ++i) {
    Image view = augment(entity, cfg, rng);
    batch.globals.push_back(resize_bilinear(view, cfg.global_size, cfg.global_size));
  }
  const double area = static_cast<double>(w) * h;
  for (int i = 0; i < cfg.n_local; ++i) {
    const double s = rng.uniform(cfg.s_min, cfg.s_max);
    // ceil keeps the realized area fraction >= s; the clamp keeps it <= 1.
    int side = static_cast<int>(std::ceil(std::sqrt(s * area)));
    side = std::clamp(side, 1, std::min(w, h));
    const int x0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(w - side + 1)));
    const int y0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(h - side + 1)));
    Image crop = entity.block(y0, x0, side, side);
    crop = augment(std::move(crop), cfg, rng);
    batch.locals.push_back(resize_bilinear(crop, cfg.local_size, cfg.local_size));
    batch.local_scales.push_back(s);
  }
  return batch;
}

Image synthetic_entity(int size, int latent_class, Rng& rng) {
  Image img(size, size);
  const double cx = size / 2.0 + rng.uniform(-1.5, 1.5);
  const double cy = size / 2.0 + rng.uniform(-1.5, 1.5);
  const double a = rng.uniform(0.32, 0.42) * size;
  const double b = rng.uniform(0.32, 0.42) * size;
  const double theta = rng.uniform(0.0, std::numbers::pi);
  const double ct = std::cos(theta), st = std::sin(theta);
  // class 0: small inner blob, slow texture; class 1: large blob, fast texture
  const double inner_ratio = latent_class == 0 ? 0.45 : 0.75;
  const double freq = latent_class == 0 ? 2.0 : 5.0;

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double u = dx * ct + dy * st;
      const double v = -dx * st + dy * ct;
      const double r2 = (u / a) * (u / a) + (v / b) * (v / b);
      double value = 0.15 + 0.05 * rng.uniform();
      if (r2 <= 1.0) {
        value = 0.5;
        if (r2 <= inner_ratio * inner_ratio) {
          value = 0.8 + 0.08 * std::sin(2.0 * std::numbers::pi * freq * u / size);
        }
      }
      img(y, x) = std::clamp(value + 0.02 * rng.normal(), 0.0, 1.0);
    }
  }
  return img;
}

Encoder::Encoder(int input_pixels, int hidden, int out_dim)
    : input_pixels_(input_pixels), hidden_(hidden), out_dim_(out_dim) {}

Eigen::Index Encoder::param_count() const {
  return static_cast<Eigen::Index>(input_pixels_) * hidden_ + hidden_ +
         static_cast<Eigen::Index>(hidden_) * out_dim_ + out_dim_;
}

namespace {

struct EncoderViews {
  Eigen::Map<const MatrixXd> w1;
  Eigen::Map<const VectorXd> b1;
  Eigen::Map<const MatrixXd> w2;
  Eigen::Map<const VectorXd> b2;
};

EncoderViews map_params(const VectorXd& theta, int in, int hidden, int out) {
  const double* p = theta.data();
  return {Eigen::Map<const MatrixXd>(p, in, hidden),
          Eigen::Map<const VectorXd>(p + static_cast<Eigen::Index>(in) * hidden, hidden),
          Eigen::Map<const MatrixXd>(
              p + static_cast<Eigen::Index>(in) * hidden + hidden, hidden, out),
          Eigen::Map<const VectorXd>(
              p + static_cast<Eigen::Index>(in) * hidden + hidden +
                  static_cast<Eigen::Index>(hidden) * out,
              out)};
}

}  // namespace

void Encoder::init(VectorXd& theta, Rng& rng, double scale) const {
  theta.resize(param_count());
  const double s1 = scale / std::sqrt(static_cast<double>(input_pixels_));
  const double s2 = scale / std::sqrt(static_cast<double>(hidden_));
  Eigen::Index i = 0;
  for (; i < static_cast<Eigen::Index>(input_pixels_) * hidden_; ++i)
    theta[i] = rng.normal() * s1;
  for (Eigen::Index k = 0; k < hidden_; ++k) theta[i++] = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(hidden_) * out_dim_; ++k)
    theta[i++] = rng.normal() * s2;
  for (Eigen::Index k = 0; k < out_dim_; ++k) theta[i++] = 0.0;
}

VectorXd Encoder::logits(const VectorXd& theta, const VectorXd& flat_image) const {
  const auto views = map_params(theta, input_pixels_, hidden_, out_dim_);
  const VectorXd h = (views.w1.transpose() * flat_image + views.b1).array().tanh();
  return views.w2.transpose() * h + views.b2;
}

void Encoder::accumulate_gradient(const VectorXd& theta, const VectorXd& flat_image,
                                  const VectorXd& dlogits, VectorXd& grad) const {
  const auto views = map_params(theta, input_pixels_, hidden_, out_dim_);
  const VectorXd pre = views.w1.transpose() * flat_image + views.b1;
  const VectorXd h = pre.array().tanh();

  double* g = grad.data();
  Eigen::Map<MatrixXd> g_w1(g, input_pixels_, hidden_);
  Eigen::Map<VectorXd> g_b1(g + static_cast<Eigen::Index>(input_pixels_) * hidden_, hidden_);
  Eigen::Map<MatrixXd> g_w2(
      g + static_cast<Eigen::Index>(input_pixels_) * hidden_ + hidden_, hidden_, out_dim_);
  Eigen::Map<VectorXd> g_b2(
      g + static_cast<Eigen::Index>(input_pixels_) * hidden_ + hidden_ +
          static_cast<Eigen::Index>(hidden_) * out_dim_,
      out_dim_);

  g_w2 += h * dlogits.transpose();
  g_b2 += dlogits;
  const VectorXd dh = views.w2 * dlogits;
  const VectorXd dpre = dh.array() * (1.0 - h.array().square());
  g_w1 += flat_image * dpre.transpose();
  g_b1 += dpre;
}

void LossBatch::validate() const {
  auto check = [](const MatrixXd& m, const char* what) {
    if (m.rows() == 0 || m.cols() == 0)
      throw ValidationError(std::string("LossBatch: empty ") + what);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::fabs(m.row(i).sum() - 1.0) > 1e-9)
        throw ValidationError(std::string("LossBatch: ") + what +
                              " row does not sum to 1");
      if ((m.row(i).array() <= 0.0).any())
        throw ValidationError(std::string("LossBatch: ") + what +
                              " row has non-positive entries");
    }
  };
  check(teacher, "teacher");
  check(student, "student");
  if (teacher.cols() != student.cols())
    throw ValidationError("LossBatch: dimension mismatch");
}

VectorXd sharpened_softmax(const VectorXd& logits, double temp,
                           const VectorXd& center) {
  if (!(temp > 0.0)) throw ValidationError("sharpened_softmax: temp must be > 0");
  VectorXd z = logits;
  if (center.size() > 0) {
    if (center.size() != logits.size())
      throw ValidationError("sharpened_softmax: center dimension mismatch");
    z -= center;
  }
  z /= temp;
  const double zmax = z.maxCoeff();
  VectorXd e = (z.array() - zmax).exp();
  return e / e.sum();
}

double multicrop_loss(const LossBatch& batch) {
  batch.validate();
  const Eigen::Index n = batch.student.rows();
  double total = 0.0;
  const MatrixXd log_student = batch.student.array().log();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < batch.teacher.rows(); ++j)
      total -= batch.teacher.row(j).dot(log_student.row(i));
  return total / (2.0 * static_cast<double>(n));
}

void ema_update(DistillState& state) {
  state.teacher += (1.0 - state.ema_momentum) * (state.student - state.teacher);
}

VectorXd center_update(const VectorXd& center, const MatrixXd& teacher_logits,
                       double momentum) {
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ValidationError("center_update: momentum outside [0,1)");
  const VectorXd batch_mean = teacher_logits.colwise().mean().transpose();
  return momentum * center + (1.0 - momentum) * batch_mean;
}

CollapseMetric collapse_metric(const MatrixXd& rows) {
  if (rows.rows() < 2)
    throw ValidationError("collapse_metric: need at least 2 rows");
  CollapseMetric m;
  const Eigen::Index n = rows.rows();
  const VectorXd mean = rows.colwise().mean().transpose();
  m.per_dim_std = ((rows.rowwise() - mean.transpose()).array().square().colwise().sum() /
                   static_cast<double>(n - 1))
                      .sqrt()
                      .transpose();
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double p = rows(i, j);
      if (p > 0.0) entropy -= p * std::log(p);
    }
  }
  m.mean_entropy = entropy / static_cast<double>(n);
  return m;
}

namespace {

VectorXd flatten(const Image& img) {
  return Eigen::Map<const VectorXd>(img.data(), img.size());
}

struct BatchForward {
  MatrixXd teacher_probs;   // m x d
  MatrixXd teacher_logits;  // m x d
  MatrixXd student_probs;   // n x d
  std::vector<VectorXd> local_inputs;
};

BatchForward forward_views(const Encoder& encoder, const DistillState& state,
                           const VectorXd& student_params, const ViewBatch& views,
                           bool centering) {
  BatchForward f;
  const int d = encoder.out_dim();
  f.teacher_probs.resize(static_cast<Eigen::Index>(views.globals.size()), d);
  f.teacher_logits.resize(static_cast<Eigen::Index>(views.globals.size()), d);
  for (std::size_t j = 0; j < views.globals.size(); ++j) {
    const VectorXd z = encoder.logits(state.teacher, flatten(views.globals[j]));
    f.teacher_logits.row(static_cast<Eigen::Index>(j)) = z.transpose();
    f.teacher_probs.row(static_cast<Eigen::Index>(j)) =
        sharpened_softmax(z, state.teacher_temp,
                          centering ? state.center : VectorXd())
            .transpose();
  }
  f.student_probs.resize(static_cast<Eigen::Index>(views.locals.size()), d);
  for (std::size_t i = 0; i < views.locals.size(); ++i) {
    f.local_inputs.push_back(flatten(views.locals[i]));
    const VectorXd z = encoder.logits(student_params, f.local_inputs.back());
    f.student_probs.row(static_cast<Eigen::Index>(i)) =
        sharpened_softmax(z, state.student_temp).transpose();
  }
  return f;
}

}  // namespace

double batch_loss(const Encoder& encoder, const DistillState& state,
                  const VectorXd& student_params, const ViewBatch& views,
                  bool centering) {
  const BatchForward f =
      forward_views(encoder, state, student_params, views, centering);
  return multicrop_loss({f.teacher_probs, f.student_probs});
}

VectorXd loss_gradient(const Encoder& encoder, const DistillState& state,
                       const ViewBatch& views, bool centering) {
  const BatchForward f =
      forward_views(encoder, state, state.student, views, centering);
  const Eigen::Index n = f.student_probs.rows();
  const Eigen::Index m = f.teacher_probs.rows();
  const VectorXd target_sum = f.teacher_probs.colwise().sum().transpose();

  VectorXd grad = VectorXd::Zero(encoder.param_count());
  const double scale = 1.0 / (2.0 * static_cast<double>(n) * state.student_temp);
  for (Eigen::Index i = 0; i < n; ++i) {
    // d(loss)/d(student logits_i) = (m l_i - sum_j g_j) / (2 n tau_s)
    const VectorXd dz =
        scale * (static_cast<double>(m) * f.student_probs.row(i).transpose() -
                 target_sum);
    encoder.accumulate_gradient(state.student, f.local_inputs[static_cast<std::size_t>(i)],
                                dz, grad);
  }
  return grad;
}

TrainResult train(const DistillConfig& cfg, long steps, std::uint64_t master_seed) {
  const int input_pixels = cfg.views.global_size * cfg.views.global_size;
  if (cfg.views.local_size != cfg.views.global_size)
    throw ValidationError("train: encoder expects equal global/local view sizes");
  const Encoder encoder(input_pixels, cfg.hidden, cfg.out_dim);

  Rng data_rng(mix_seed({master_seed, 0x64617461ULL}));
  std::vector<Image> entities;
  entities.reserve(static_cast<std::size_t>(cfg.n_entities));
  for (int i = 0; i < cfg.n_entities; ++i)
    entities.push_back(synthetic_entity(cfg.entity_size, i % 2, data_rng));

  // Probe inputs: un-augmented whole-entity resizes, fixed for the run.
  std::vector<VectorXd> probe;
  probe.reserve(entities.size());
  for (const Image& e : entities)
    probe.push_back(flatten(resize_bilinear(e, cfg.views.global_size,
                                            cfg.views.global_size)));

  DistillState state;
  state.student_temp = cfg.student_temp;
  state.teacher_temp = cfg.teacher_temp;
  state.ema_momentum = cfg.ema_momentum;
  Rng init_rng(mix_seed({master_seed, 0x696e6974ULL}));
  encoder.init(state.student, init_rng, cfg.init_scale);
  state.teacher = state.student;
  state.center = VectorXd::Zero(cfg.out_dim);

  Rng train_rng(mix_seed({master_seed, 0x747261696eULL}));
  TrainResult result;
  for (long step = 0; step < steps; ++step) {
    VectorXd grad = VectorXd::Zero(encoder.param_count());
    double loss_sum = 0.0;
    std::vector<MatrixXd> teacher_logit_blocks;
    for (int b = 0; b < cfg.batch_entities; ++b) {
      const std::size_t idx = static_cast<std::size_t>(
          train_rng.uniform_int(static_cast<std::uint64_t>(entities.size())));
      const ViewBatch views = make_views(entities[idx], cfg.views, train_rng);
      const BatchForward f =
          forward_views(encoder, state, state.student, views, cfg.centering);
      loss_sum += multicrop_loss({f.teacher_probs, f.student_probs});
      teacher_logit_blocks.push_back(f.teacher_logits);

      const Eigen::Index nl = f.student_probs.rows();
      const Eigen::Index m = f.teacher_probs.rows();
      const VectorXd target_sum = f.teacher_probs.colwise().sum().transpose();
      const double scale =
          1.0 / (2.0 * static_cast<double>(nl) * state.student_temp);
      for (Eigen::Index i = 0; i < nl; ++i) {
        const VectorXd dz =
            scale * (static_cast<double>(m) * f.student_probs.row(i).transpose() -
                     target_sum);
        encoder.accumulate_gradient(state.student,
                                    f.local_inputs[static_cast<std::size_t>(i)], dz,
                                    grad);
      }
    }
    const double loss = loss_sum / cfg.batch_entities;
    if (!std::isfinite(loss)) {
      std::ostringstream diag;
      diag << "non-finite loss at step " << step
           << "; |student|=" << state.student.norm()
           << " |teacher|=" << state.teacher.norm()
           << " |center|=" << state.center.norm();
      throw NonFiniteLoss(diag.str());
    }
    grad /= static_cast<double>(cfg.batch_entities);
    state.student -= cfg.learning_rate * grad;
    ema_update(state);

    MatrixXd all_teacher_logits(
        static_cast<Eigen::Index>(teacher_logit_blocks.size()) *
            teacher_logit_blocks.front().rows(),
        cfg.out_dim);
    for (std::size_t b = 0; b < teacher_logit_blocks.size(); ++b)
      all_teacher_logits.middleRows(
          static_cast<Eigen::Index>(b) * teacher_logit_blocks[b].rows(),
          teacher_logit_blocks[b].rows()) = teacher_logit_blocks[b];
    state.center = center_update(state.center, all_teacher_logits,
                                 cfg.center_momentum);
    ++state.step;

    // Probe diagnostics on the fixed un-augmented pool.
    MatrixXd embeddings(static_cast<Eigen::Index>(probe.size()), cfg.out_dim);
    double teacher_entropy = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
      embeddings.row(static_cast<Eigen::Index>(i)) =
          encoder.logits(state.student, probe[i]).transpose();
      const VectorXd tz = encoder.logits(state.teacher, probe[i]);
      const VectorXd tp = sharpened_softmax(
          tz, state.teacher_temp, cfg.centering ? state.center : VectorXd());
      for (Eigen::Index j = 0; j < tp.size(); ++j)
        if (tp[j] > 0.0) teacher_entropy -= tp[j] * std::log(tp[j]);
    }
    teacher_entropy /= static_cast<double>(probe.size());

    StepLog entry;
    entry.step = state.step;
    entry.loss = loss;
    entry.embedding_std = collapse_metric(embeddings).per_dim_std.mean();
    entry.teacher_entropy = teacher_entropy;
    result.log.push_back(entry);
    result.final_embeddings = std::move(embeddings);
  }

  if (steps == 0) {
    MatrixXd embeddings(static_cast<Eigen::Index>(probe.size()), cfg.out_dim);
    for (std::size_t i = 0; i < probe.size(); ++i)
      embeddings.row(static_cast<Eigen::Index>(i)) =
          encoder.logits(state.student, probe[i]).transpose();
    result.final_embeddings = std::move(embeddings);
  }
  result.state = std::move(state);
  return result;
}

}  // namespace glomkit::distill
