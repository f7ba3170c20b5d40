// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "faa/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "faa/error.hpp"

namespace faa::data {

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw InputError("dataset has " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) +
                     " labels");
  for (std::size_t r = 0; r < y.size(); ++r)
    if (y[r] < 0 || y[r] >= num_classes)
      throw InputError("row " + std::to_string(r) + " label " + std::to_string(y[r]) + " outside [0, " +
                       std::to_string(num_classes) + ")");
  if (!x.allFinite()) throw InputError("dataset holds non-finite values");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= y.size()) throw InputError("row index " + std::to_string(rows[i]) + " out of range");
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    out.y.push_back(y[rows[i]]);
  }
  return out;
}

std::vector<std::size_t> LabeledDataset::rows_of(int label) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < y.size(); ++r)
    if (y[r] == label) rows.push_back(r);
  return rows;
}

namespace {

void check_spec(const PopulationSpec& spec) {
  if (spec.num_users <= 0 || spec.dim <= 0 || spec.samples_per_user <= 0)
    throw InputError("population counts must be positive");
  if (!(spec.separation >= 0.0) || !(spec.within_scale >= 0.0))
    throw InputError("separation and within_scale must be non-negative");
}

Vector random_direction(Rng& rng, int dim) {
  Vector v(dim);
  double norm = 0.0;
  while (norm < 1e-12) {
    for (int j = 0; j < dim; ++j) v[j] = rng.normal();
    norm = v.norm();
  }
  return v / norm;
}

LabeledDataset generate(const PopulationSpec& spec, std::uint64_t seed, Matrix* centroids_out) {
  check_spec(spec);
  const Eigen::Index n = spec.samples_per_user;
  LabeledDataset out;
  out.num_classes = spec.num_users;
  out.x.resize(static_cast<Eigen::Index>(spec.num_users) * n, spec.dim);
  out.y.reserve(static_cast<std::size_t>(out.x.rows()));
  if (centroids_out) centroids_out->resize(spec.num_users, spec.dim);
  for (int k = 0; k < spec.num_users; ++k) {
    // Per-user stream: adding users never changes earlier users' draws.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const Vector centroid = spec.separation * random_direction(rng, spec.dim);
    Vector stddev(spec.dim);
    for (int j = 0; j < spec.dim; ++j) stddev[j] = spec.within_scale * rng.uniform(0.5, 1.5);
    if (centroids_out) centroids_out->row(k) = centroid.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = k * n + i;
      for (int j = 0; j < spec.dim; ++j) out.x(r, j) = centroid[j] + stddev[j] * rng.normal();
      out.y.push_back(k);
    }
  }
  return out;
}

}  // namespace

LabeledDataset gen_population(const PopulationSpec& spec) { return generate(spec, spec.seed, nullptr); }

std::uint64_t base_seed(std::uint64_t seed) { return derive_seed(seed ^ 0xBA5EBA5EBA5EBA5EULL, "base"); }

LabeledDataset gen_base_dataset(const PopulationSpec& spec) {
  return generate(spec, base_seed(spec.seed), nullptr);
}

Matrix population_centroids(const PopulationSpec& spec) {
  Matrix c;
  generate(spec, spec.seed, &c);
  return c;
}

int count_users(const LabeledDataset& data, std::span<const std::size_t> rows, std::size_t threshold) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(data.num_classes, 0)), 0);
  for (std::size_t r : rows) ++counts.at(static_cast<std::size_t>(data.y.at(r)));
  return static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                        [&](std::size_t c) { return c > 0 && c >= threshold; }));
}

double compute_qiid(std::span<const int> users_per_device, int num_classes) {
  if (num_classes < 2) throw InputError("qIID needs at least 2 users, got " + std::to_string(num_classes));
  if (users_per_device.empty()) throw InputError("qIID needs at least one device");
  const double k = num_classes;
  double mean_frac = 0.0;
  for (int ki : users_per_device) mean_frac += ki / k;
  mean_frac /= static_cast<double>(users_per_device.size());
  const double q = (mean_frac - 1.0 / k) / (1.0 - 1.0 / k);
  return std::clamp(q, 0.0, 1.0);
}

Partition partition_by_qiid(const LabeledDataset& data, std::size_t num_devices, double target_qiid,
                            std::optional<std::size_t> samples_per_device) {
  if (!(target_qiid >= 0.0 && target_qiid <= 1.0)) throw InputError("target qIID must lie in [0, 1]");
  if (num_devices == 0) throw InputError("need at least one device");
  if (num_devices > data.size()) throw InputError("more devices than samples");
  const int k = data.num_classes;
  if (k < 2) throw InputError("partitioning needs at least 2 users");

  const auto per_device = static_cast<std::size_t>(std::lround(target_qiid * (k - 1) + 1.0));
  const auto num_users = static_cast<std::size_t>(k);

  // Slot s = (device i, position j) holds user (i * per_device + j) mod K.
  auto user_at = [&](std::size_t dev, std::size_t j) { return (dev * per_device + j) % num_users; };

  std::vector<std::vector<std::size_t>> rows(num_users);
  for (std::size_t u = 0; u < num_users; ++u) rows[u] = data.rows_of(static_cast<int>(u));

  std::vector<std::size_t> appearances(num_users, 0);
  for (std::size_t i = 0; i < num_devices; ++i)
    for (std::size_t j = 0; j < per_device; ++j) ++appearances[user_at(i, j)];

  // take[i][j]: samples device i draws from its j-th user.
  std::vector<std::vector<std::size_t>> take(num_devices, std::vector<std::size_t>(per_device, 0));
  if (samples_per_device) {
    const std::size_t q = *samples_per_device;
    for (std::size_t i = 0; i < num_devices; ++i)
      for (std::size_t j = 0; j < per_device; ++j) take[i][j] = q / per_device + (j < q % per_device ? 1 : 0);
  } else {
    std::size_t per_slot = SIZE_MAX;
    for (std::size_t u = 0; u < num_users; ++u)
      if (appearances[u] > 0) per_slot = std::min(per_slot, rows[u].size() / appearances[u]);
    for (auto& dev : take) std::fill(dev.begin(), dev.end(), per_slot);
  }

  std::vector<std::size_t> demand(num_users, 0);
  for (std::size_t i = 0; i < num_devices; ++i)
    for (std::size_t j = 0; j < per_device; ++j) demand[user_at(i, j)] += take[i][j];
  std::ostringstream shortfall;
  bool infeasible = false;
  for (std::size_t u = 0; u < num_users; ++u) {
    if (appearances[u] == 0) continue;
    if (demand[u] > rows[u].size() || demand[u] == 0) {
      infeasible = true;
      shortfall << " user " << u << " needs " << std::max<std::size_t>(demand[u], appearances[u]) << " has "
                << rows[u].size() << ";";
    }
  }
  if (infeasible) throw PartitionError("infeasible partition quota:" + shortfall.str());

  Partition p;
  p.device_indices.resize(num_devices);
  std::vector<std::size_t> cursor(num_users, 0);
  for (std::size_t i = 0; i < num_devices; ++i) {
    for (std::size_t j = 0; j < per_device; ++j) {
      const std::size_t u = user_at(i, j);
      for (std::size_t t = 0; t < take[i][j]; ++t) p.device_indices[i].push_back(rows[u][cursor[u]++]);
    }
    p.users_per_device.push_back(count_users(data, p.device_indices[i]));
  }
  p.measured_qiid = compute_qiid(p, k);
  return p;
}

std::pair<LabeledDataset, LabeledDataset> split_per_class(const LabeledDataset& data, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("split fraction must lie in (0, 1)");
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  for (int c = 0; c < data.num_classes; ++c) {
    const auto rows = data.rows_of(c);
    const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows.size())));
    first.insert(first.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(cut));
    second.insert(second.end(), rows.begin() + static_cast<std::ptrdiff_t>(cut), rows.end());
  }
  return {data.subset(first), data.subset(second)};
}

// Feature files: header `d=<dim>,k=<classes>`, then one row per sample with
// `dim` floats and a trailing integer label.

void save_features(const LabeledDataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << "d=" << data.dim() << ",k=" << data.num_classes << '\n';
  char buf[64];
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, data.x(static_cast<Eigen::Index>(r), j),
                                     std::chars_format::general, 17);
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << data.y[r] << '\n';
  }
  if (!out) throw InputError("write to " + path.string() + " failed");
}

namespace {

template <typename T>
T parse_number(std::string_view cell, std::size_t line, const char* what) {
  T value{};
  const auto* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end || cell.empty())
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(cell) + "'");
  return value;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    cells.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace

LabeledDataset load_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_commas(line);
  if (header.size() != 2 || !header[0].starts_with("d=") || !header[1].starts_with("k="))
    throw ParseError(1, "header must be 'd=<dim>,k=<classes>'");
  const int dim = parse_number<int>(header[0].substr(2), 1, "dimension");
  const int k = parse_number<int>(header[1].substr(2), 1, "class count");
  if (dim <= 0 || k < 0) throw ParseError(1, "dimension must be positive and class count non-negative");

  std::vector<double> values;
  LabeledDataset out;
  out.num_classes = k;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != static_cast<std::size_t>(dim) + 1)
      throw ParseError(lineno, "expected " + std::to_string(dim + 1) + " cells, got " +
                                   std::to_string(cells.size()));
    for (int j = 0; j < dim; ++j) {
      const double v = parse_number<double>(cells[static_cast<std::size_t>(j)], lineno, "float");
      if (!std::isfinite(v)) throw ParseError(lineno, "non-finite value");
      values.push_back(v);
    }
    const int label = parse_number<int>(cells.back(), lineno, "label");
    if (label < 0 || label >= k)
      throw ParseError(lineno, "label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
    out.y.push_back(label);
  }
  out.x = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(out.y.size()), dim);
  if (out.y.empty()) out.x.resize(0, dim);
  return out;
}

}  // namespace faa::data
