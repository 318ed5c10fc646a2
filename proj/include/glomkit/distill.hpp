#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glomkit/rng.hpp"
#include "glomkit/types.hpp"

namespace glomkit::distill {

using Image = MatrixXd;  // grayscale, row-major semantics (row = y)

struct EntityTooSmall : ValidationError {
  using ValidationError::ValidationError;
};
struct NonFiniteLoss : Error {
  using Error::Error;
};

struct ViewConfig {
  int n_global = 2;
  int n_local = 6;
  double s_min = 0.4;
  double s_max = 1.0;
  int global_size = 16;
  int local_size = 16;
  bool flips = true;
  bool jitter = true;
  bool blur = true;
};

struct ViewBatch {
  std::vector<Image> globals;
  std::vector<Image> locals;
  std::vector<double> local_scales;  // sampled area fractions, one per local view
};

/// Global views keep the whole entity under photometric/flip perturbation;
/// local views crop an area fraction s ~ U(s_min, s_max) at a uniform
/// position first. Everything is resized bilinearly to the configured
/// sizes.
ViewBatch make_views(const Image& entity, const ViewConfig& cfg, Rng& rng);

Image resize_bilinear(const Image& src, int out_h, int out_w);

/// Procedural glomerulus-like test image: elliptical capsule with an
/// inner blob; the two latent classes differ in inner/outer area ratio
/// and texture frequency.
Image synthetic_entity(int size, int latent_class, Rng& rng);

/// Flatten -> linear -> tanh -> linear head over a flat parameter vector.
class Encoder {
 public:
  Encoder(int input_pixels, int hidden, int out_dim);

  Eigen::Index param_count() const;
  int out_dim() const { return out_dim_; }
  int input_pixels() const { return input_pixels_; }

  void init(VectorXd& theta, Rng& rng, double scale = 1.0) const;
  VectorXd logits(const VectorXd& theta, const VectorXd& flat_image) const;
  /// Accumulate d(loss)/d(theta) given d(loss)/d(logits) for one image.
  void accumulate_gradient(const VectorXd& theta, const VectorXd& flat_image,
                           const VectorXd& dlogits, VectorXd& grad) const;

 private:
  int input_pixels_, hidden_, out_dim_;
};

struct DistillConfig {
  ViewConfig views;
  int entity_size = 32;
  int n_entities = 64;
  int batch_entities = 8;
  int hidden = 32;
  int out_dim = 8;
  double teacher_temp = 0.04;
  double student_temp = 0.1;
  double ema_momentum = 0.996;
  double center_momentum = 0.9;
  bool centering = true;
  double learning_rate = 0.5;
  double init_scale = 1.0;
};

struct DistillState {
  VectorXd student;
  VectorXd teacher;
  VectorXd center;  // dim = out_dim
  double student_temp = 0.1;
  double teacher_temp = 0.04;
  double ema_momentum = 0.996;
  long step = 0;
};

/// Teacher/student output distributions of one multi-crop batch; every
/// row is a simplex point.
struct LossBatch {
  MatrixXd teacher;  // m x d
  MatrixXd student;  // n x d
  void validate() const;
};

/// Softmax over (z - center)/temp; pass an empty center for the student
/// path.
VectorXd sharpened_softmax(const VectorXd& logits, double temp,
                           const VectorXd& center = VectorXd());

/// (1/2n) sum_i sum_j cross_entropy(teacher_j, student_i).
double multicrop_loss(const LossBatch& batch);

/// theta_t += (1 - m) (theta_s - theta_t): contraction toward the
/// student with modulus m.
void ema_update(DistillState& state);

/// c' = rho c + (1 - rho) mean(teacher logit rows).
VectorXd center_update(const VectorXd& center, const MatrixXd& teacher_logits,
                       double momentum);

struct CollapseMetric {
  VectorXd per_dim_std;
  double mean_entropy = 0.0;
};

/// Per-dimension sample standard deviation of the rows plus the mean
/// Shannon entropy of the rows read as distributions.
CollapseMetric collapse_metric(const MatrixXd& rows);

struct StepLog {
  long step = 0;
  double loss = 0.0;
  double embedding_std = 0.0;   // mean over dims of per-dim student logit std
  double teacher_entropy = 0.0; // mean entropy of teacher outputs on the probe set
};

struct TrainResult {
  DistillState state;
  std::vector<StepLog> log;
  MatrixXd final_embeddings;  // student logits over the entity pool
};

/// Deterministic training loop: per step, sample a batch of entities,
/// build views, distill locals toward centered/sharpened global targets,
/// take one gradient step, then EMA and center updates. Throws
/// NonFiniteLoss with a diagnostic message if the loss leaves the reals.
TrainResult train(const DistillConfig& cfg, long steps, std::uint64_t master_seed);

/// Gradient of multicrop_loss w.r.t. the student parameters for one
/// view batch (teacher branch held constant). Exposed for the
/// finite-difference contract.
VectorXd loss_gradient(const Encoder& encoder, const DistillState& state,
                       const ViewBatch& views, bool centering);

/// Loss of the same batch at the given student parameters.
double batch_loss(const Encoder& encoder, const DistillState& state,
                  const VectorXd& student_params, const ViewBatch& views,
                  bool centering);

}  // namespace glomkit::distill
