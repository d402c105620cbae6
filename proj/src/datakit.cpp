#include "jamguard/datakit.hpp"

#include "jamguard/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace jamguard {

Sample Sample::from_features(const Features& f, int label) {
  return Sample{f[0], f[1], f[2], f[3], label};
}

Dataset::Dataset(FeatureMatrix features, LabelVector labels,
                 std::map<std::string, std::string> meta)
    : features_(std::move(features)), labels_(std::move(labels)), meta_(std::move(meta)) {
  if (features_.rows() != labels_.size())
    throw DataError("dataset: feature rows and labels differ in length");
}

Dataset::Dataset(std::span<const Sample> samples)
    : features_(static_cast<Eigen::Index>(samples.size()), kFeatureCount),
      labels_(static_cast<Eigen::Index>(samples.size())) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    features_.row(row) = samples[i].features().transpose();
    labels_[row] = samples[i].label;
  }
}

Sample Dataset::sample(std::size_t i) const {
  const auto row = static_cast<Eigen::Index>(i);
  return Sample::from_features(features_.row(row).transpose(), labels_[row]);
}

std::vector<Sample> Dataset::samples() const {
  std::vector<Sample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(sample(i));
  return out;
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>((labels_.array() == label).count());
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix f(static_cast<Eigen::Index>(indices.size()), kFeatureCount);
  LabelVector y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(indices[i]);
    f.row(static_cast<Eigen::Index>(i)) = features_.row(src);
    y[static_cast<Eigen::Index>(i)] = labels_[src];
  }
  return Dataset(std::move(f), std::move(y), meta_);
}

bool Dataset::operator==(const Dataset& other) const {
  return features_ == other.features_ && labels_ == other.labels_;
}

Dataset shuffle(const Dataset& d, std::uint64_t seed) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, streams::kShuffle));
  // Explicit Fisher-Yates; std::shuffle's draw pattern is library-specific.
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return d.subset(order);
}

// ---- scaler ---------------------------------------------------------------

Scaler scaler_fit(const FeatureMatrix& x) {
  if (x.rows() == 0) throw DataError("scaler_fit: empty dataset");
  Scaler s;
  s.means = x.colwise().mean().transpose();
  const double n = static_cast<double>(x.rows());
  for (int j = 0; j < kFeatureCount; ++j) {
    const double var = (x.col(j).array() - s.means[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    s.stddevs[j] = (sd > 0.0 && std::isfinite(sd)) ? sd : 1.0;
  }
  return s;
}

Scaler scaler_fit(const Dataset& d) { return scaler_fit(d.features()); }

FeatureMatrix scaler_apply(const Scaler& s, const FeatureMatrix& x) {
  FeatureMatrix z = x;
  z.rowwise() -= s.means.transpose();
  z.array().rowwise() /= s.stddevs.transpose().array();
  return z;
}

Features scaler_apply(const Scaler& s, const Features& x) {
  return ((x - s.means).array() / s.stddevs.array()).matrix();
}

Dataset scaler_apply(const Scaler& s, const Dataset& d) {
  return Dataset(scaler_apply(s, d.features()), d.labels(), d.meta());
}

FeatureMatrix scaler_inverse(const Scaler& s, const FeatureMatrix& z) {
  FeatureMatrix x = z;
  x.array().rowwise() *= s.stddevs.transpose().array();
  x.rowwise() += s.means.transpose();
  return x;
}

// ---- folds ----------------------------------------------------------------

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : assignment) ++sizes[f];
  return sizes;
}

FoldPlan kfold_split(const Dataset& d, std::size_t k, std::uint64_t seed, bool stratified) {
  if (k < 2 || k > d.size())
    throw UsageError("kfold_split: k=" + std::to_string(k) + " outside [2, " +
                     std::to_string(d.size()) + "]");
  Rng rng(derive_seed(seed, streams::kFolds));
  auto permute = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(v[i - 1], v[pick(rng)]);
    }
  };

  std::vector<std::vector<std::size_t>> strata;
  if (stratified) {
    strata.resize(2);
    for (std::size_t i = 0; i < d.size(); ++i)
      strata[d.labels()[static_cast<Eigen::Index>(i)] == 1 ? 1 : 0].push_back(i);
  } else {
    strata.emplace_back(d.size());
    std::iota(strata[0].begin(), strata[0].end(), std::size_t{0});
  }

  FoldPlan plan{k, std::vector<std::size_t>(d.size(), 0)};
  // The deal continues across strata so overall fold sizes also stay within one.
  std::size_t next_fold = 0;
  for (auto& stratum : strata) {
    permute(stratum);
    for (auto idx : stratum) {
      plan.assignment[idx] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return plan;
}

// ---- csv ------------------------------------------------------------------

void csv_write(const Dataset& d, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Sample s = d.sample(i);
    out << format_double(s.pdr) << ',' << format_double(s.bpr) << ','
        << format_double(s.rss_dbm) << ',' << format_double(s.cca_busy_ratio) << ','
        << s.label << '\n';
  }
}

void csv_write(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  csv_write(d, out);
  if (!out) throw DataError("write failed: " + path.string());
}

namespace {

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty() || !std::isfinite(value))
    throw DataError("csv row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                    ": non-numeric cell '" + std::string(cell) + "'");
  return value;
}

}  // namespace

Dataset csv_read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw DataError("csv: no data (empty file)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw DataError("csv row 0: malformed header '" + line + "', expected '" + kCsvHeader + "'");

  std::vector<Sample> samples;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string_view, 5> cells;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      if (count == cells.size())
        throw DataError("csv row " + std::to_string(row) + ": too many columns");
      cells[count++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != cells.size())
      throw DataError("csv row " + std::to_string(row) + ": expected 5 columns, got " +
                      std::to_string(count));
    Sample s;
    s.pdr = parse_cell(cells[0], row, 0);
    s.bpr = parse_cell(cells[1], row, 1);
    s.rss_dbm = parse_cell(cells[2], row, 2);
    s.cca_busy_ratio = parse_cell(cells[3], row, 3);
    if (cells[4] == "0") {
      s.label = 0;
    } else if (cells[4] == "1") {
      s.label = 1;
    } else {
      throw DataError("csv row " + std::to_string(row) + ": label '" + std::string(cells[4]) +
                      "' not in {0,1}");
    }
    for (double frac : {s.pdr, s.bpr, s.cca_busy_ratio})
      if (frac < 0.0 || frac > 1.0)
        throw DataError("csv row " + std::to_string(row) + ": ratio outside [0,1]");
    samples.push_back(s);
  }
  if (samples.empty()) throw DataError("csv: no data rows");
  return Dataset(samples);
}

Dataset csv_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return csv_read(in);
}

}  // namespace jamguard
