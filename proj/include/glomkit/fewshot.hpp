#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glomkit/rng.hpp"
#include "glomkit/types.hpp"

namespace glomkit::fewshot {

struct InsufficientClassMembers : ValidationError {
  using ValidationError::ValidationError;
};

/// Frozen embedding vectors with binary labels; one row per entity.
struct EmbeddingDataset {
  MatrixXd vectors;
  std::vector<int> labels;  // 0/1
  std::vector<std::string> ids;

  Eigen::Index n() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
  void validate() const;
};

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Exactly k entities per class drawn without replacement by the seeded
/// generator; the complement is the test pool. Deterministic per seed.
Split sample_k_shot(const EmbeddingDataset& data, int k, std::uint64_t seed);

/// Nearest-centroid prototype scores: distance to the negative center
/// minus distance to the positive center (monotone in the posterior).
VectorXd ptl_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                         const MatrixXd& test_x);

/// L2-regularized logistic model fit by Newton/IRLS; scores are log-odds.
VectorXd lr_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                        const MatrixXd& test_x);

struct MlpConfig {
  int hidden1 = 256;
  int hidden2 = 128;
  int epochs = 200;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// Two-hidden-layer ReLU network trained full-batch with Adam on the
/// logistic loss; scores are output logits. Deterministic per seed.
VectorXd mlp_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                         const MatrixXd& test_x, std::uint64_t seed,
                         const MlpConfig& cfg = {});

struct ForestConfig {
  int n_trees = 100;
  int min_leaf = 1;
};

/// 100 CART trees (Gini, bootstrap, sqrt(d) features per split, grown to
/// purity); score = fraction of trees voting positive.
VectorXd rf_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                        const MatrixXd& test_x, std::uint64_t seed,
                        const ForestConfig& cfg = {});

enum class Classifier { PTL, LR, MLP, RF };
std::string to_string(Classifier c);
Classifier classifier_from_string(const std::string& name);

struct CellResult {
  Classifier classifier{};
  int k = 0;
  std::vector<double> run_aucs;  // one per repeat; NaN marks a failed run
  double mean_auc = 0.0;
  double std_auc = 0.0;  // sample standard deviation over the repeats
  bool failed = false;
  std::string note;
};

struct ProtocolTable {
  std::vector<Classifier> classifiers;
  std::vector<int> ks;
  int repeats = 0;
  std::uint64_t master_seed = 0;
  std::vector<CellResult> cells;  // classifier-major, then k

  const CellResult& cell(Classifier c, int k) const;
};

/// Full few-shot protocol: for each (classifier, k, repeat) the split
/// seed is derived from the master seed via mix_seed, so cells are
/// independent streams and the table is reproducible bit for bit.
ProtocolTable run_protocol(const EmbeddingDataset& data,
                           const std::vector<Classifier>& classifiers,
                           const std::vector<int>& ks, int repeats,
                           std::uint64_t master_seed);

}  // namespace glomkit::fewshot
