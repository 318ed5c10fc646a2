#include "glomkit/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glomkit/metrics.hpp"
#include "glomkit/mlp.hpp"
#include "glomkit/regression.hpp"

namespace glomkit::fewshot {

void EmbeddingDataset::validate() const {
  if (vectors.rows() == 0 || vectors.cols() == 0)
    throw ValidationError("EmbeddingDataset: empty matrix");
  if (labels.size() != static_cast<std::size_t>(vectors.rows()))
    throw ValidationError("EmbeddingDataset: label count mismatch");
  if (!ids.empty() && ids.size() != labels.size())
    throw ValidationError("EmbeddingDataset: id count mismatch");
  bool has0 = false, has1 = false;
  for (int l : labels) {
    if (l == 0) has0 = true;
    else if (l == 1) has1 = true;
    else throw ValidationError("EmbeddingDataset: labels must be 0/1");
  }
  if (!has0 || !has1)
    throw ValidationError("EmbeddingDataset: both classes required");
}

Split sample_k_shot(const EmbeddingDataset& data, int k, std::uint64_t seed) {
  data.validate();
  if (k < 1) throw ValidationError("sample_k_shot: k < 1");

  std::vector<Eigen::Index> by_class[2];
  for (Eigen::Index i = 0; i < data.n(); ++i)
    by_class[data.labels[static_cast<std::size_t>(i)]].push_back(i);
  for (int c = 0; c < 2; ++c)
    if (by_class[c].size() <= static_cast<std::size_t>(k))
      throw InsufficientClassMembers(
          "sample_k_shot: class " + std::to_string(c) + " has " +
          std::to_string(by_class[c].size()) + " members, need > " +
          std::to_string(k));

  Split split;
  std::vector<std::uint8_t> in_train(static_cast<std::size_t>(data.n()), 0);
  for (int c = 0; c < 2; ++c) {
    Rng rng(mix_seed({seed, static_cast<std::uint64_t>(c)}));
    auto pool = by_class[c];
    rng.shuffle(pool);
    for (int i = 0; i < k; ++i) {
      split.train.push_back(pool[static_cast<std::size_t>(i)]);
      in_train[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = 1;
    }
  }
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (!in_train[static_cast<std::size_t>(i)]) split.test.push_back(i);
  return split;
}

namespace {

MatrixXd gather_rows(const MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

void require_both_classes(const std::vector<int>& y) {
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1)
    throw ValidationError("classifier: train set must contain both classes");
}

}  // namespace

VectorXd ptl_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                         const MatrixXd& test_x) {
  require_both_classes(train_y);
  VectorXd centroid[2] = {VectorXd::Zero(train_x.cols()),
                          VectorXd::Zero(train_x.cols())};
  int counts[2] = {0, 0};
  for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
    const int c = train_y[static_cast<std::size_t>(i)];
    centroid[c] += train_x.row(i).transpose();
    ++counts[c];
  }
  for (int c = 0; c < 2; ++c) centroid[c] /= static_cast<double>(counts[c]);

  VectorXd scores(test_x.rows());
  for (Eigen::Index i = 0; i < test_x.rows(); ++i) {
    const double d_neg = (test_x.row(i).transpose() - centroid[0]).norm();
    const double d_pos = (test_x.row(i).transpose() - centroid[1]).norm();
    scores[i] = d_neg - d_pos;
  }
  return scores;
}

VectorXd lr_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                        const MatrixXd& test_x) {
  require_both_classes(train_y);
  const Eigen::Index n = train_x.rows(), d = train_x.cols();
  MatrixXd design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = train_x;
  VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = train_y[static_cast<std::size_t>(i)];

  std::vector<std::string> names(static_cast<std::size_t>(d) + 1);
  names[0] = "intercept";
  for (Eigen::Index j = 0; j < d; ++j)
    names[static_cast<std::size_t>(j) + 1] = "f" + std::to_string(j);
  const auto fit = stats::logistic_regression_mv(design, y, names);
  const VectorXd beta = stats::coefficients(fit);
  return (test_x * beta.tail(d)).array() + beta[0];
}

VectorXd mlp_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                         const MatrixXd& test_x, std::uint64_t seed,
                         const MlpConfig& cfg) {
  require_both_classes(train_y);
  const int d = static_cast<int>(train_x.cols());
  TinyMlp<double> net(d, cfg.hidden1, cfg.hidden2);
  Rng rng(mix_seed({seed, 0x6d6c70ULL}));
  net.init_he(rng);

  VectorXd y(train_x.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y[i] = train_y[static_cast<std::size_t>(i)];

  VectorXd m = VectorXd::Zero(net.param_count());
  VectorXd v = VectorXd::Zero(net.param_count());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const VectorXd g = net.loss_gradient(train_x, y);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.array().square().matrix();
    const double bc1 = 1.0 - std::pow(cfg.beta1, epoch);
    const double bc2 = 1.0 - std::pow(cfg.beta2, epoch);
    net.params().array() -=
        cfg.learning_rate * (m.array() / bc1) /
        ((v.array() / bc2).sqrt() + cfg.adam_eps);
  }
  return net.logits(test_x);
}

namespace {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double positive_fraction = 0.0;
};

class CartTree {
 public:
  void fit(const MatrixXd& x, const std::vector<int>& y,
           std::vector<Eigen::Index> indices, int n_features_per_split,
           int min_leaf, Rng& rng) {
    nodes_.clear();
    build(x, y, std::move(indices), n_features_per_split, min_leaf, rng);
  }

  double leaf_fraction(const Eigen::RowVectorXd& v) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const TreeNode& nd = nodes_[static_cast<std::size_t>(node)];
      node = v[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].positive_fraction;
  }

 private:
  int build(const MatrixXd& x, const std::vector<int>& y,
            std::vector<Eigen::Index> indices, int mtry, int min_leaf,
            Rng& rng) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::size_t positives = 0;
    for (Eigen::Index idx : indices)
      positives += static_cast<std::size_t>(y[static_cast<std::size_t>(idx)]);
    const double frac =
        static_cast<double>(positives) / static_cast<double>(indices.size());
    nodes_[static_cast<std::size_t>(node_id)].positive_fraction = frac;

    const bool pure = positives == 0 || positives == indices.size();
    if (pure || indices.size() < 2 * static_cast<std::size_t>(min_leaf)) {
      return node_id;
    }

    // mtry features sampled without replacement.
    std::vector<int> features(static_cast<std::size_t>(x.cols()));
    std::iota(features.begin(), features.end(), 0);
    rng.shuffle(features);
    features.resize(static_cast<std::size_t>(mtry));

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, int>> column(indices.size());
    for (int f : features) {
      for (std::size_t i = 0; i < indices.size(); ++i)
        column[i] = {x(indices[i], f), y[static_cast<std::size_t>(indices[i])]};
      std::sort(column.begin(), column.end());
      double left_pos = 0.0, left_n = 0.0;
      const double total_pos = static_cast<double>(positives);
      const double total_n = static_cast<double>(indices.size());
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        left_n += 1.0;
        if (column[i].first == column[i + 1].first) continue;
        if (left_n < min_leaf || total_n - left_n < min_leaf) continue;
        const double right_pos = total_pos - left_pos;
        const double right_n = total_n - left_n;
        const double gini_l = left_pos / left_n * (1.0 - left_pos / left_n);
        const double gini_r = right_pos / right_n * (1.0 - right_pos / right_n);
        const double impurity = left_n * gini_l + right_n * gini_r;
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = f;
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;  // unsplittable (duplicate points)

    std::vector<Eigen::Index> left_idx, right_idx;
    for (Eigen::Index idx : indices) {
      if (x(idx, best_feature) <= best_threshold) left_idx.push_back(idx);
      else right_idx.push_back(idx);
    }
    if (left_idx.empty() || right_idx.empty()) return node_id;

    nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    const int left = build(x, y, std::move(left_idx), mtry, min_leaf, rng);
    nodes_[static_cast<std::size_t>(node_id)].left = left;
    const int right = build(x, y, std::move(right_idx), mtry, min_leaf, rng);
    nodes_[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }

  std::vector<TreeNode> nodes_;
};

}  // namespace

VectorXd rf_fit_predict(const MatrixXd& train_x, const std::vector<int>& train_y,
                        const MatrixXd& test_x, std::uint64_t seed,
                        const ForestConfig& cfg) {
  require_both_classes(train_y);
  const Eigen::Index n = train_x.rows();
  const int mtry = std::max(
      1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(train_x.cols())))));

  VectorXd votes = VectorXd::Zero(test_x.rows());
  for (int t = 0; t < cfg.n_trees; ++t) {
    Rng rng(mix_seed({seed, 0x7266ULL, static_cast<std::uint64_t>(t)}));
    std::vector<Eigen::Index> bootstrap(static_cast<std::size_t>(n));
    for (auto& idx : bootstrap)
      idx = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    CartTree tree;
    tree.fit(train_x, train_y, std::move(bootstrap), mtry, cfg.min_leaf, rng);
    for (Eigen::Index i = 0; i < test_x.rows(); ++i) {
      const double frac = tree.leaf_fraction(test_x.row(i));
      votes[i] += frac > 0.5 ? 1.0 : (frac == 0.5 ? 0.5 : 0.0);
    }
  }
  return votes / static_cast<double>(cfg.n_trees);
}

std::string to_string(Classifier c) {
  switch (c) {
    case Classifier::PTL: return "PTL";
    case Classifier::LR: return "LR";
    case Classifier::MLP: return "MLP";
    default: return "RF";
  }
}

Classifier classifier_from_string(const std::string& name) {
  std::string up;
  for (char ch : name) up += static_cast<char>(std::toupper(ch));
  if (up == "PTL") return Classifier::PTL;
  if (up == "LR") return Classifier::LR;
  if (up == "MLP") return Classifier::MLP;
  if (up == "RF") return Classifier::RF;
  throw ValidationError("unknown classifier: " + name);
}

const CellResult& ProtocolTable::cell(Classifier c, int k) const {
  for (const CellResult& r : cells)
    if (r.classifier == c && r.k == k) return r;
  throw ValidationError("ProtocolTable: no cell for " + to_string(c) + ", k=" +
                        std::to_string(k));
}

ProtocolTable run_protocol(const EmbeddingDataset& data,
                           const std::vector<Classifier>& classifiers,
                           const std::vector<int>& ks, int repeats,
                           std::uint64_t master_seed) {
  data.validate();
  if (repeats < 1) throw ValidationError("run_protocol: repeats < 1");

  ProtocolTable table;
  table.classifiers = classifiers;
  table.ks = ks;
  table.repeats = repeats;
  table.master_seed = master_seed;

  for (Classifier cls : classifiers) {
    for (int k : ks) {
      CellResult cell;
      cell.classifier = cls;
      cell.k = k;
      for (int rep = 0; rep < repeats; ++rep) {
        const std::uint64_t cell_seed =
            mix_seed({master_seed, static_cast<std::uint64_t>(cls),
                      static_cast<std::uint64_t>(k),
                      static_cast<std::uint64_t>(rep)});
        try {
          const Split split = sample_k_shot(data, k, cell_seed);
          const MatrixXd train_x = gather_rows(data.vectors, split.train);
          const MatrixXd test_x = gather_rows(data.vectors, split.test);
          std::vector<int> train_y, test_y;
          for (Eigen::Index i : split.train)
            train_y.push_back(data.labels[static_cast<std::size_t>(i)]);
          for (Eigen::Index i : split.test)
            test_y.push_back(data.labels[static_cast<std::size_t>(i)]);

          VectorXd scores;
          switch (cls) {
            case Classifier::PTL:
              scores = ptl_fit_predict(train_x, train_y, test_x);
              break;
            case Classifier::LR:
              scores = lr_fit_predict(train_x, train_y, test_x);
              break;
            case Classifier::MLP:
              scores = mlp_fit_predict(train_x, train_y, test_x, cell_seed);
              break;
            case Classifier::RF:
              scores = rf_fit_predict(train_x, train_y, test_x, cell_seed);
              break;
          }
          const std::vector<double> s(scores.data(), scores.data() + scores.size());
          cell.run_aucs.push_back(metrics::roc_auc(s, test_y));
        } catch (const Error& e) {
          cell.run_aucs.push_back(std::numeric_limits<double>::quiet_NaN());
          cell.failed = true;
          if (cell.note.empty()) cell.note = e.what();
        }
      }
      double sum = 0.0;
      int valid = 0;
      for (double a : cell.run_aucs)
        if (!std::isnan(a)) {
          sum += a;
          ++valid;
        }
      cell.mean_auc = valid > 0 ? sum / valid
                                : std::numeric_limits<double>::quiet_NaN();
      if (valid > 1) {
        double ss = 0.0;
        for (double a : cell.run_aucs)
          if (!std::isnan(a)) ss += (a - cell.mean_auc) * (a - cell.mean_auc);
        cell.std_auc = std::sqrt(ss / (valid - 1));
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

}  // namespace glomkit::fewshot
