#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "adi/dataset.hpp"
#include "adi/errors.hpp"

namespace adi {

/// A probability vector v = f(x): entries in [0,1], sum 1, at least 2 classes.
struct ConfidenceVector {
  Eigen::VectorXd probs;

  int classes() const { return static_cast<int>(probs.size()); }
  int argmax() const {
    Eigen::Index i = 0;
    probs.maxCoeff(&i);
    return static_cast<int>(i);
  }
  void validate(double tol = 1e-6) const;
};

/// Access accounting for a target model. The counter is atomic so concurrent
/// classify calls stay exact; the epoch log is driven by a single caller.
class OracleStats {
 public:
  std::uint64_t access_count() const { return count_.load(std::memory_order_relaxed); }
  void record() const { count_.fetch_add(1, std::memory_order_relaxed); }
  void mark_epoch() { epoch_log_.push_back(access_count()); }
  const std::vector<std::uint64_t>& epoch_log() const { return epoch_log_; }

 private:
  mutable std::atomic<std::uint64_t> count_{0};
  std::vector<std::uint64_t> epoch_log_;
};

/// Black-box target model: x -> confidence vector, plus access accounting.
/// Differentiable implementations also expose d log p_k / dx.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Eigen::Index input_dim() const = 0;
  virtual int num_classes() const = 0;
  virtual ConfidenceVector classify(const Eigen::VectorXd& x) const = 0;

  virtual bool differentiable() const { return false; }
  virtual Eigen::VectorXd grad_log_prob(const Eigen::VectorXd&, int) const {
    throw NonDifferentiable("this oracle does not expose gradients");
  }

  OracleStats& stats() const { return stats_; }

 protected:
  void check_input(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim())
      throw DimensionMismatch("input has length " + std::to_string(x.size()) + ", expected " +
                              std::to_string(input_dim()));
  }

 private:
  mutable OracleStats stats_;
};

enum class ModelKind : std::uint8_t { SoftmaxLinear = 0, NearestCentroid = 1 };

/// Serializable model parameters; see save_model_file for the binary layout.
struct TargetModelSpec {
  ModelKind kind = ModelKind::SoftmaxLinear;
  Eigen::Index input_dim = 0;
  int num_classes = 0;
  Eigen::MatrixXd weights;     // softmax: W (m x d); centroid: class centroids (m x d)
  Eigen::VectorXd bias;        // softmax only (m)
  double temperature = 1.0;    // centroid only, > 0
};

/// softmax(W x + b)
class SoftmaxLinearModel : public Oracle {
 public:
  SoftmaxLinearModel(Eigen::MatrixXd weights, Eigen::VectorXd bias);
  explicit SoftmaxLinearModel(const TargetModelSpec& spec);

  Eigen::Index input_dim() const override { return weights_.cols(); }
  int num_classes() const override { return static_cast<int>(weights_.rows()); }
  ConfidenceVector classify(const Eigen::VectorXd& x) const override;
  bool differentiable() const override { return true; }
  Eigen::VectorXd grad_log_prob(const Eigen::VectorXd& x, int k) const override;

  TargetModelSpec spec() const;

 private:
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

/// softmax(-||x - c_k||^2 / tau)
class NearestCentroidModel : public Oracle {
 public:
  NearestCentroidModel(Eigen::MatrixXd centroids, double temperature);
  explicit NearestCentroidModel(const TargetModelSpec& spec);

  Eigen::Index input_dim() const override { return centroids_.cols(); }
  int num_classes() const override { return static_cast<int>(centroids_.rows()); }
  ConfidenceVector classify(const Eigen::VectorXd& x) const override;
  bool differentiable() const override { return true; }
  Eigen::VectorXd grad_log_prob(const Eigen::VectorXd& x, int k) const override;

  double temperature() const { return temperature_; }
  TargetModelSpec spec() const;

 private:
  Eigen::MatrixXd centroids_;
  double temperature_;
};

struct SoftmaxTrainOptions {
  double learning_rate = 0.1;
  int epochs = 300;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  TargetModelSpec spec;
  double train_accuracy = 0.0;
  double holdout_accuracy = 0.0;
};

/// Full-batch gradient descent on the multinomial cross-entropy from zero
/// initialization. Model class index k = position of the class in
/// dataset.classes(). The seed only drives the train/holdout split.
TrainedModel train_softmax(const Dataset& dataset, const SoftmaxTrainOptions& opts);

struct CentroidFitOptions {
  double temperature = 0.0;     // > 0: use as-is; otherwise calibrate
  double entropy_target = 0.5;  // calibration: mean normalized entropy on train rows
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// Class means of the training split; the temperature is bisected so the mean
/// normalized entropy of the training rows hits entropy_target.
TrainedModel fit_centroid(const Dataset& dataset, const CentroidFitOptions& opts);

/// Binary model file: magic "ADIM", version u16, kind u8, d u32, m u32, then
/// row-major f64 parameters (softmax: W then bias; centroid: centroids then
/// temperature), all little-endian.
void save_model_file(const TargetModelSpec& spec, const std::string& path);
TargetModelSpec load_model_file(const std::string& path);

std::unique_ptr<Oracle> make_local_oracle(const TargetModelSpec& spec);

}  // namespace adi
