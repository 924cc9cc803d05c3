#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adi/errors.hpp"

namespace adi {

/// Source of a class inside a mixed/extracted dataset: (dataset id, class id).
struct ClassProvenance {
  std::uint32_t dataset_id = 0;
  std::uint32_t class_id = 0;
  friend bool operator==(const ClassProvenance&, const ClassProvenance&) = default;
};

struct ClassSamples {
  std::uint32_t id = 0;
  Eigen::MatrixXd samples;  // one sample per row
  std::optional<ClassProvenance> provenance;
};

/// Labeled feature-vector collection. Classes are non-empty, ids unique,
/// all samples share the feature dimension. Immutable once assembled.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::uint32_t id, std::string name, Eigen::Index dim)
      : id_(id), name_(std::move(name)), dim_(dim) {}

  void add_class(std::uint32_t class_id, Eigen::MatrixXd samples,
                 std::optional<ClassProvenance> provenance = std::nullopt);

  std::uint32_t id() const { return id_; }
  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }
  const std::vector<ClassSamples>& classes() const { return classes_; }
  const ClassSamples* find_class(std::uint32_t class_id) const;
  std::size_t total_samples() const;

 private:
  std::uint32_t id_ = 0;
  std::string name_;
  Eigen::Index dim_ = 0;
  std::vector<ClassSamples> classes_;
};

/// Ordered collection of datasets with a uniform feature dimension.
class DatasetPool {
 public:
  void add(Dataset ds);

  const std::vector<Dataset>& datasets() const { return datasets_; }
  const Dataset* find(std::uint32_t dataset_id) const;
  Eigen::Index dim() const { return dim_; }
  std::size_t total_samples() const;
  bool empty() const { return datasets_.empty(); }

 private:
  std::vector<Dataset> datasets_;
  Eigen::Index dim_ = 0;
};

/// How many classes to take from each pool dataset when building a mixed target.
struct MixSpec {
  std::vector<std::uint32_t> per_source_counts;
  std::uint32_t total_classes = 10;
  std::uint64_t seed = 0;
  bool keep_in_pool = false;  // skip removal; used for ground-truth recovery runs
};

struct MixedTarget {
  Dataset target;          // selected classes relabeled 0..total-1, provenance kept
  DatasetPool attack_pool; // pool minus the selected classes (or a copy when kept)
};

/// Synthesizes a pool of isotropic unit-variance Gaussian blob classes.
/// Centroids are rejection-sampled from N(0, (separation/2)^2 I) until every
/// pair of centroids in the pool is at least `separation` apart.
DatasetPool synth_pool(int n_datasets, int classes_per_dataset, Eigen::Index dim,
                       int samples_per_class, double separation, std::uint64_t seed);

MixedTarget build_mixed_target(const DatasetPool& pool, const MixSpec& spec);

/// The per-block random orthogonal matrices used by rmt_encode (Haar via QR).
std::vector<Eigen::MatrixXd> rmt_matrices(Eigen::Index dim, int block_count,
                                          std::uint64_t seed);

/// Applies a secret block-wise random orthogonal projection to every sample.
Dataset rmt_encode(const Dataset& ds, int block_count, std::uint64_t seed);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);
void save_pool(const DatasetPool& pool, const std::string& path);
DatasetPool load_pool(const std::string& path);

/// CSV import: header row, d numeric feature columns, final integer label column.
Dataset load_dataset_csv(const std::string& path, std::uint32_t dataset_id = 0,
                         const std::string& name = "csv");

}  // namespace adi
