#include "adi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "adi/binary_io.hpp"

namespace adi {

void Dataset::add_class(std::uint32_t class_id, Eigen::MatrixXd samples,
                        std::optional<ClassProvenance> provenance) {
  if (samples.rows() == 0)
    throw EmptyClass("class " + std::to_string(class_id) + " of dataset '" + name_ +
                     "' has no samples");
  if (samples.cols() != dim_)
    throw DimensionMismatch("class " + std::to_string(class_id) + " has dimension " +
                            std::to_string(samples.cols()) + ", dataset '" + name_ +
                            "' expects " + std::to_string(dim_));
  for (const auto& c : classes_) {
    if (c.id == class_id)
      throw Error("duplicate class id " + std::to_string(class_id) + " in dataset '" + name_ +
                  "'");
  }
  classes_.push_back({class_id, std::move(samples), provenance});
}

const ClassSamples* Dataset::find_class(std::uint32_t class_id) const {
  for (const auto& c : classes_) {
    if (c.id == class_id) return &c;
  }
  return nullptr;
}

std::size_t Dataset::total_samples() const {
  std::size_t n = 0;
  for (const auto& c : classes_) n += static_cast<std::size_t>(c.samples.rows());
  return n;
}

void DatasetPool::add(Dataset ds) {
  if (!datasets_.empty() && ds.dim() != dim_)
    throw DimensionMismatch("dataset '" + ds.name() + "' has dimension " +
                            std::to_string(ds.dim()) + ", pool expects " + std::to_string(dim_));
  for (const auto& d : datasets_) {
    if (d.name() == ds.name()) throw Error("duplicate dataset name '" + ds.name() + "'");
    if (d.id() == ds.id()) throw Error("duplicate dataset id " + std::to_string(ds.id()));
  }
  if (datasets_.empty()) dim_ = ds.dim();
  datasets_.push_back(std::move(ds));
}

const Dataset* DatasetPool::find(std::uint32_t dataset_id) const {
  for (const auto& d : datasets_) {
    if (d.id() == dataset_id) return &d;
  }
  return nullptr;
}

std::size_t DatasetPool::total_samples() const {
  std::size_t n = 0;
  for (const auto& d : datasets_) n += d.total_samples();
  return n;
}

DatasetPool synth_pool(int n_datasets, int classes_per_dataset, Eigen::Index dim,
                       int samples_per_class, double separation, std::uint64_t seed) {
  if (n_datasets < 1 || classes_per_dataset < 1 || dim < 1 || samples_per_class < 1)
    throw Error("synth_pool: all counts must be >= 1");
  if (separation <= 0.0) throw Error("synth_pool: separation must be > 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double centroid_scale = separation / 2.0;
  const double min_dist2 = separation * separation;

  std::vector<Eigen::VectorXd> centroids;
  centroids.reserve(static_cast<std::size_t>(n_datasets) * classes_per_dataset);

  DatasetPool pool;
  for (int di = 0; di < n_datasets; ++di) {
    Dataset ds(static_cast<std::uint32_t>(di), "synth-" + std::to_string(di), dim);
    for (int ci = 0; ci < classes_per_dataset; ++ci) {
      Eigen::VectorXd centroid(dim);
      bool placed = false;
      for (int attempt = 0; attempt < 10000; ++attempt) {
        for (Eigen::Index k = 0; k < dim; ++k) centroid[k] = centroid_scale * unit(rng);
        placed = std::all_of(centroids.begin(), centroids.end(), [&](const Eigen::VectorXd& c) {
          return (c - centroid).squaredNorm() >= min_dist2;
        });
        if (placed) break;
      }
      if (!placed)
        throw PackingFailure("could not place centroid " + std::to_string(ci) + " of dataset " +
                             std::to_string(di) + " at separation " +
                             std::to_string(separation) + " after 10000 attempts");
      centroids.push_back(centroid);

      Eigen::MatrixXd samples(samples_per_class, dim);
      for (int r = 0; r < samples_per_class; ++r)
        for (Eigen::Index k = 0; k < dim; ++k) samples(r, k) = centroid[k] + unit(rng);
      ds.add_class(static_cast<std::uint32_t>(ci), std::move(samples),
                   ClassProvenance{static_cast<std::uint32_t>(di),
                                   static_cast<std::uint32_t>(ci)});
    }
    pool.add(std::move(ds));
  }
  return pool;
}

MixedTarget build_mixed_target(const DatasetPool& pool, const MixSpec& spec) {
  const auto& sources = pool.datasets();
  if (spec.per_source_counts.size() != sources.size())
    throw SpecMismatch("mix spec has " + std::to_string(spec.per_source_counts.size()) +
                       " per-source counts for a pool of " + std::to_string(sources.size()) +
                       " datasets");
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    sum += spec.per_source_counts[i];
    if (spec.per_source_counts[i] > sources[i].classes().size())
      throw SpecMismatch("mix spec requests " + std::to_string(spec.per_source_counts[i]) +
                         " classes from dataset '" + sources[i].name() + "' which has only " +
                         std::to_string(sources[i].classes().size()));
  }
  if (sum != spec.total_classes)
    throw SpecMismatch("mix spec counts sum to " + std::to_string(sum) + ", expected " +
                       std::to_string(spec.total_classes));

  std::mt19937_64 rng(spec.seed);
  std::uint32_t max_id = 0;
  for (const auto& d : sources) max_id = std::max(max_id, d.id());

  Dataset target(max_id + 1, "mixed-target", pool.dim());
  std::vector<std::vector<std::uint32_t>> chosen(sources.size());
  std::uint32_t next_label = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    std::vector<std::uint32_t> ids;
    for (const auto& c : sources[i].classes()) ids.push_back(c.id);
    std::vector<std::uint32_t> pick;
    std::sample(ids.begin(), ids.end(), std::back_inserter(pick), spec.per_source_counts[i],
                rng);
    std::sort(pick.begin(), pick.end());
    chosen[i] = pick;
    for (std::uint32_t cid : pick) {
      const ClassSamples* cls = sources[i].find_class(cid);
      target.add_class(next_label++, cls->samples, ClassProvenance{sources[i].id(), cid});
    }
  }

  DatasetPool attack_pool;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Dataset reduced(sources[i].id(), sources[i].name(), sources[i].dim());
    for (const auto& c : sources[i].classes()) {
      bool removed = !spec.keep_in_pool &&
                     std::binary_search(chosen[i].begin(), chosen[i].end(), c.id);
      if (!removed) reduced.add_class(c.id, c.samples, c.provenance);
    }
    if (!reduced.classes().empty()) attack_pool.add(std::move(reduced));
  }
  return MixedTarget{std::move(target), std::move(attack_pool)};
}

std::vector<Eigen::MatrixXd> rmt_matrices(Eigen::Index dim, int block_count,
                                          std::uint64_t seed) {
  if (block_count < 1) throw Error("rmt: block_count must be >= 1");
  if (dim % block_count != 0)
    throw IndivisibleDim("dimension " + std::to_string(dim) + " is not divisible into " +
                         std::to_string(block_count) + " blocks");
  const Eigen::Index bs = dim / block_count;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(block_count));
  for (int b = 0; b < block_count; ++b) {
    Eigen::MatrixXd g(bs, bs);
    for (Eigen::Index r = 0; r < bs; ++r)
      for (Eigen::Index c = 0; c < bs; ++c) g(r, c) = unit(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // sign-fix so the factorization is unique and Q is Haar-distributed
    for (Eigen::Index c = 0; c < bs; ++c)
      if (r(c, c) < 0) q.col(c) = -q.col(c);
    out.push_back(std::move(q));
  }
  return out;
}

Dataset rmt_encode(const Dataset& ds, int block_count, std::uint64_t seed) {
  const auto qs = rmt_matrices(ds.dim(), block_count, seed);
  const Eigen::Index bs = ds.dim() / block_count;
  Dataset out(ds.id(), ds.name() + "-rmt", ds.dim());
  for (const auto& c : ds.classes()) {
    Eigen::MatrixXd enc(c.samples.rows(), c.samples.cols());
    for (int b = 0; b < block_count; ++b)
      enc.middleCols(b * bs, bs) = c.samples.middleCols(b * bs, bs) * qs[b].transpose();
    out.add_class(c.id, std::move(enc), c.provenance);
  }
  return out;
}

namespace {

constexpr char kDatasetMagic[5] = "ADID";
constexpr char kPoolMagic[5] = "ADIP";
constexpr std::uint16_t kFormatVersion = 1;

void write_dataset_body(io::BinaryWriter& w, const Dataset& ds) {
  w.write_magic(kDatasetMagic);
  w.write_u16(kFormatVersion);
  w.write_u32(static_cast<std::uint32_t>(ds.dim()));
  w.write_u32(static_cast<std::uint32_t>(ds.classes().size()));
  for (const auto& c : ds.classes()) {
    w.write_u32(c.id);
    w.write_u32(static_cast<std::uint32_t>(c.samples.rows()));
    for (Eigen::Index r = 0; r < c.samples.rows(); ++r)
      for (Eigen::Index k = 0; k < c.samples.cols(); ++k) w.write_f64(c.samples(r, k));
  }
}

Dataset read_dataset_body(io::BinaryReader& r, std::uint32_t dataset_id,
                          const std::string& name) {
  r.read_magic(kDatasetMagic);
  std::uint16_t version = r.read_u16();
  if (version != kFormatVersion) r.fail("unsupported dataset format version");
  std::uint32_t dim = r.read_u32();
  std::uint32_t n_classes = r.read_u32();
  if (dim == 0) r.fail("zero feature dimension");
  if (n_classes == 0) r.fail("dataset has no classes");
  Dataset ds(dataset_id, name, static_cast<Eigen::Index>(dim));
  for (std::uint32_t i = 0; i < n_classes; ++i) {
    std::uint32_t cid = r.read_u32();
    std::uint32_t rows = r.read_u32();
    if (rows == 0) r.fail("class " + std::to_string(cid) + " has zero samples");
    Eigen::MatrixXd samples(rows, dim);
    for (std::uint32_t rr = 0; rr < rows; ++rr)
      for (std::uint32_t k = 0; k < dim; ++k) samples(rr, k) = r.read_f64();
    ds.add_class(cid, std::move(samples));
  }
  return ds;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  io::BinaryWriter w(path);
  write_dataset_body(w, ds);
  w.close();
}

Dataset load_dataset(const std::string& path) {
  io::BinaryReader r(path);
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos)
    name = name.substr(slash + 1);
  return read_dataset_body(r, 0, name);
}

void save_pool(const DatasetPool& pool, const std::string& path) {
  io::BinaryWriter w(path);
  w.write_magic(kPoolMagic);
  w.write_u16(kFormatVersion);
  w.write_u32(static_cast<std::uint32_t>(pool.datasets().size()));
  for (const auto& ds : pool.datasets()) {
    w.write_u32(ds.id());
    w.write_u16(static_cast<std::uint16_t>(ds.name().size()));
    w.write_string(ds.name());
    write_dataset_body(w, ds);
  }
  w.close();
}

DatasetPool load_pool(const std::string& path) {
  io::BinaryReader r(path);
  r.read_magic(kPoolMagic);
  std::uint16_t version = r.read_u16();
  if (version != kFormatVersion) r.fail("unsupported pool format version");
  std::uint32_t count = r.read_u32();
  if (count == 0) r.fail("pool has no datasets");
  DatasetPool pool;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t id = r.read_u32();
    std::uint16_t name_len = r.read_u16();
    std::string name = r.read_string(name_len);
    pool.add(read_dataset_body(r, id, name));
  }
  return pool;
}

Dataset load_dataset_csv(const std::string& path, std::uint32_t dataset_id,
                         const std::string& name) {
  std::ifstream in(path);
  if (!in) throw MalformedFile(path, 0, "cannot open file");
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw MalformedFile(path, 0, "missing header row");
  offset += line.size() + 1;

  std::vector<std::pair<long, std::vector<double>>> rows;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        vals.push_back(v);
      } catch (const std::exception&) {
        throw MalformedFile(path, line_start, "non-numeric cell '" + cell + "'");
      }
    }
    if (vals.size() < 2) throw MalformedFile(path, line_start, "row needs features + label");
    if (dim < 0) dim = static_cast<Eigen::Index>(vals.size()) - 1;
    if (static_cast<Eigen::Index>(vals.size()) != dim + 1)
      throw MalformedFile(path, line_start, "inconsistent column count");
    double label = vals.back();
    if (label < 0 || label != std::floor(label))
      throw MalformedFile(path, line_start, "label column must be a non-negative integer");
    vals.pop_back();
    rows.emplace_back(static_cast<long>(label), std::move(vals));
  }
  if (rows.empty()) throw MalformedFile(path, offset, "no data rows");

  std::vector<long> labels;
  for (const auto& [l, _] : rows) labels.push_back(l);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  Dataset ds(dataset_id, name, dim);
  for (long l : labels) {
    std::size_t n = 0;
    for (const auto& [rl, _] : rows) n += (rl == l);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), dim);
    Eigen::Index rr = 0;
    for (const auto& [rl, vals] : rows) {
      if (rl != l) continue;
      for (Eigen::Index k = 0; k < dim; ++k) m(rr, k) = vals[static_cast<std::size_t>(k)];
      ++rr;
    }
    ds.add_class(static_cast<std::uint32_t>(l), std::move(m));
  }
  return ds;
}

}  // namespace adi
