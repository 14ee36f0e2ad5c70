#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qcut/error.hpp"
#include "qcut/iris_data.hpp"
#include "qcut/rng.hpp"
#include "qcut/statevector.hpp"

namespace qcut {

struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::size_t feature_count() const { return features.empty() ? 0 : features.front().size(); }

  Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    for (auto r : rows) {
      out.features.push_back(features[r]);
      out.labels.push_back(labels[r]);
    }
    return out;
  }
};

inline constexpr std::string_view kIrisClassNames[] = {"setosa", "versicolor", "virginica"};

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Parses "sepal_length,sepal_width,petal_length,petal_width,label" rows.
inline Dataset parse_iris_csv(std::string_view text) {
  Dataset d;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("sepal_length", 0) != 0) {
    throw Error(ErrorCode::AssetCorrupt, "missing iris header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::AssetCorrupt, "bad iris cell '" + cell + "'");
      }
    }
    if (values.size() != 5) throw Error(ErrorCode::AssetCorrupt, "iris rows need 5 columns");
    d.labels.push_back(static_cast<int>(values.back()));
    values.pop_back();
    d.features.push_back(std::move(values));
  }
  return d;
}

/// Iris bundled with the library; the checksum pins the asset version.
inline Dataset load_iris(std::string_view csv = assets::kIrisCsv) {
  if (fnv1a64(csv) != assets::kIrisCsvFnv1a) throw Error(ErrorCode::AssetCorrupt, "iris checksum mismatch");
  return parse_iris_csv(csv);
}

inline Dataset load_iris_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_iris(ss.str());
}

/// Seeded Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed, std::uint64_t stream = 0) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  Stream rng{seed, 0x5917ULL, stream};
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Unstratified shuffle split; the test side gets ceil(fraction * n) rows.
inline Split split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error(ErrorCode::BadRange, "test fraction must lie in (0, 1)");
  const auto n = data.size();
  const auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n)));
  const auto perm = permutation(n, seed);
  Split s;
  s.test_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  s.train = data.subset(s.train_rows);
  s.test = data.subset(s.test_rows);
  return s;
}

/// Feature preprocessing: identity (raw values as radians) or per-feature
/// min-max onto [0, pi] fitted on the training rows.
struct Scaler {
  bool minmax = false;
  std::vector<double> lo, hi;

  static Scaler identity() { return {}; }

  static Scaler fit_minmax(const Dataset& train) {
    Scaler s;
    s.minmax = true;
    const auto f = train.feature_count();
    s.lo.assign(f, 1e300);
    s.hi.assign(f, -1e300);
    for (const auto& row : train.features)
      for (std::size_t j = 0; j < f; ++j) {
        s.lo[j] = std::min(s.lo[j], row[j]);
        s.hi[j] = std::max(s.hi[j], row[j]);
      }
    return s;
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    if (!minmax) return x;
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double span = hi[j] - lo[j];
      out[j] = span > 0 ? kPi * (x[j] - lo[j]) / span : 0.0;
    }
    return out;
  }

  Dataset apply(const Dataset& d) const {
    Dataset out = d;
    for (auto& row : out.features) row = apply(row);
    return out;
  }
};

inline constexpr int kResultsSchemaVersion = 1;

/// Writes a results record; the top-level "schema_version" is added if absent.
inline void persist_results(const std::string& path, nlohmann::ordered_json record) {
  if (!record.contains("schema_version")) {
    nlohmann::ordered_json out;
    out["schema_version"] = kResultsSchemaVersion;
    for (auto& [k, v] : record.items()) out[k] = v;
    record = std::move(out);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  os << record.dump(2) << '\n';
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path);
}

inline nlohmann::ordered_json load_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version")) throw Error(ErrorCode::ParseError, "missing schema_version");
  return doc;
}

}  // namespace qcut
