#pragma once

#include <cmath>

#include "glomkit/rng.hpp"
#include "glomkit/types.hpp"

namespace glomkit::fewshot {

/// ReLU network d -> h1 -> h2 -> 1 with a binary logistic head.
/// Parameters live in one flat vector so optimizers and
/// finite-difference checks can treat the model as theta -> loss.
template <typename Scalar>
class TinyMlp {
 public:
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;

  TinyMlp(int d, int h1, int h2) : d_(d), h1_(h1), h2_(h2) {
    theta_ = Vec::Zero(param_count());
  }

  Eigen::Index param_count() const {
    return static_cast<Eigen::Index>(d_) * h1_ + h1_ +
           static_cast<Eigen::Index>(h1_) * h2_ + h2_ + h2_ + 1;
  }

  Vec& params() { return theta_; }
  const Vec& params() const { return theta_; }

  /// He-scaled normal init on the weights, zero biases.
  void init_he(Rng& rng) {
    theta_.setZero();
    auto w1 = mat_w1(theta_);
    auto w2 = mat_w2(theta_);
    auto w3 = vec_w3(theta_);
    const Scalar s1 = std::sqrt(Scalar(2) / Scalar(d_));
    const Scalar s2 = std::sqrt(Scalar(2) / Scalar(h1_));
    const Scalar s3 = std::sqrt(Scalar(2) / Scalar(h2_));
    for (Eigen::Index i = 0; i < w1.size(); ++i)
      w1.data()[i] = static_cast<Scalar>(rng.normal()) * s1;
    for (Eigen::Index i = 0; i < w2.size(); ++i)
      w2.data()[i] = static_cast<Scalar>(rng.normal()) * s2;
    for (Eigen::Index i = 0; i < w3.size(); ++i)
      w3.data()[i] = static_cast<Scalar>(rng.normal()) * s3;
  }

  Vec logits(const Mat& x) const {
    const auto w1 = mat_w1(theta_);
    const auto b1 = vec_b1(theta_);
    const auto w2 = mat_w2(theta_);
    const auto b2 = vec_b2(theta_);
    const auto w3 = vec_w3(theta_);
    const Scalar b3 = theta_[theta_.size() - 1];
    Mat h1 = ((x * w1).rowwise() + b1.transpose()).cwiseMax(Scalar(0));
    Mat h2 = ((h1 * w2).rowwise() + b2.transpose()).cwiseMax(Scalar(0));
    return (h2 * w3).array() + b3;
  }

  /// Mean binary cross entropy with logits.
  Scalar loss(const Mat& x, const Vec& y) const {
    const Vec z = logits(x);
    Scalar total = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const Scalar e = z[i];
      const Scalar softplus =
          e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      total += softplus - y[i] * e;
    }
    return total / static_cast<Scalar>(z.size());
  }

  /// Analytic gradient of loss() w.r.t. the flat parameter vector.
  Vec loss_gradient(const Mat& x, const Vec& y) const {
    const auto w1 = mat_w1(theta_);
    const auto b1 = vec_b1(theta_);
    const auto w2 = mat_w2(theta_);
    const auto b2 = vec_b2(theta_);
    const auto w3 = vec_w3(theta_);
    const Scalar b3 = theta_[theta_.size() - 1];

    const Mat a1 = (x * w1).rowwise() + b1.transpose();
    const Mat h1 = a1.cwiseMax(Scalar(0));
    const Mat a2 = (h1 * w2).rowwise() + b2.transpose();
    const Mat h2 = a2.cwiseMax(Scalar(0));
    const Vec z = ((h2 * w3).array() + b3).matrix();

    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(x.rows());
    Vec dz(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      dz[i] = (Scalar(1) / (Scalar(1) + std::exp(-z[i])) - y[i]) * inv_n;

    Vec grad = Vec::Zero(theta_.size());
    auto g_w1 = mat_w1(grad);
    auto g_b1 = vec_b1(grad);
    auto g_w2 = mat_w2(grad);
    auto g_b2 = vec_b2(grad);
    auto g_w3 = vec_w3(grad);

    g_w3 = h2.transpose() * dz;
    grad[grad.size() - 1] = dz.sum();
    Mat dh2 = dz * w3.transpose();
    dh2 = (a2.array() > Scalar(0)).template cast<Scalar>() * dh2.array();
    g_w2 = h1.transpose() * dh2;
    g_b2 = dh2.colwise().sum();
    Mat dh1 = dh2 * w2.transpose();
    dh1 = (a1.array() > Scalar(0)).template cast<Scalar>() * dh1.array();
    g_w1 = x.transpose() * dh1;
    g_b1 = dh1.colwise().sum();
    return grad;
  }

 private:
  template <typename V>
  auto mat_w1(V& v) const {
    return Eigen::Map<std::conditional_t<std::is_const_v<V>, const Mat, Mat>>(
        v.data(), d_, h1_);
  }
  template <typename V>
  auto vec_b1(V& v) const {
    return Eigen::Map<std::conditional_t<std::is_const_v<V>, const Vec, Vec>>(
        v.data() + static_cast<Eigen::Index>(d_) * h1_, h1_);
  }
  template <typename V>
  auto mat_w2(V& v) const {
    return Eigen::Map<std::conditional_t<std::is_const_v<V>, const Mat, Mat>>(
        v.data() + static_cast<Eigen::Index>(d_) * h1_ + h1_, h1_, h2_);
  }
  template <typename V>
  auto vec_b2(V& v) const {
    return Eigen::Map<std::conditional_t<std::is_const_v<V>, const Vec, Vec>>(
        v.data() + static_cast<Eigen::Index>(d_) * h1_ + h1_ +
            static_cast<Eigen::Index>(h1_) * h2_,
        h2_);
  }
  template <typename V>
  auto vec_w3(V& v) const {
    return Eigen::Map<std::conditional_t<std::is_const_v<V>, const Vec, Vec>>(
        v.data() + static_cast<Eigen::Index>(d_) * h1_ + h1_ +
            static_cast<Eigen::Index>(h1_) * h2_ + h2_,
        h2_);
  }

  int d_, h1_, h2_;
  Vec theta_;
};

}  // namespace glomkit::fewshot
