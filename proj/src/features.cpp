#include "matnet/clustering/features.hpp"

#include <algorithm>
#include <cmath>

#include "matnet/error.hpp"

namespace matnet::clustering {

WellFeatureMatrix WellFeatureMatrix::build(std::vector<std::string> wells,
                                           std::vector<std::string> numeric_names,
                                           const std::vector<std::vector<double>>& raw_numeric,
                                           std::vector<std::string> categorical_names,
                                           const std::vector<std::vector<std::string>>& raw_categorical,
                                           const std::vector<std::vector<std::string>>& declared_vocab) {
  const std::size_t n = wells.size();
  if (n == 0) throw ConfigError("features: no wells");
  if (raw_numeric.size() != n && !numeric_names.empty())
    throw ConfigError("features: numeric row count mismatch");
  if (raw_categorical.size() != n && !categorical_names.empty())
    throw ConfigError("features: categorical row count mismatch");
  if (!declared_vocab.empty() && declared_vocab.size() != categorical_names.size())
    throw ConfigError("features: one declared vocabulary per categorical column");

  WellFeatureMatrix f;
  f.wells = std::move(wells);
  f.numeric.assign(n, {});
  f.categorical.assign(n, {});

  std::vector<std::string> missing_cols;
  std::vector<std::vector<int>> missing_flags;
  for (std::size_t c = 0; c < numeric_names.size(); ++c) {
    std::vector<double> col(n);
    std::vector<double> present;
    for (std::size_t i = 0; i < n; ++i) {
      if (raw_numeric[i].size() != numeric_names.size())
        throw ConfigError("features: well " + f.wells[i] + " has the wrong numeric field count");
      col[i] = raw_numeric[i][c];
      if (!std::isnan(col[i])) {
        if (!std::isfinite(col[i])) throw ConfigError("features: non-finite value in " + numeric_names[c]);
        present.push_back(col[i]);
      }
    }
    if (present.empty()) {
      f.dropped.push_back(numeric_names[c]);
      continue;
    }
    std::vector<int> flags(n, 0);
    if (present.size() < n) {
      std::sort(present.begin(), present.end());
      const std::size_t m = present.size();
      const double median = m % 2 ? present[m / 2] : 0.5 * (present[m / 2 - 1] + present[m / 2]);
      for (std::size_t i = 0; i < n; ++i)
        if (std::isnan(col[i])) {
          col[i] = median;
          flags[i] = 1;
        }
      missing_cols.push_back(numeric_names[c] + "_missing");
      missing_flags.push_back(flags);
    }
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      f.dropped.push_back(numeric_names[c]);
      continue;
    }
    f.numeric_names.push_back(numeric_names[c]);
    f.column_mean.push_back(mean);
    f.column_std.push_back(sd);
    for (std::size_t i = 0; i < n; ++i) f.numeric[i].push_back((col[i] - mean) / sd);
  }

  for (std::size_t c = 0; c < categorical_names.size(); ++c) {
    std::vector<std::string> vocab = declared_vocab.empty() ? std::vector<std::string>{} : declared_vocab[c];
    for (std::size_t i = 0; i < n; ++i) {
      if (raw_categorical[i].size() != categorical_names.size())
        throw ConfigError("features: well " + f.wells[i] + " has the wrong categorical field count");
      const auto& v = raw_categorical[i][c];
      auto it = std::find(vocab.begin(), vocab.end(), v);
      if (it == vocab.end()) {
        if (!declared_vocab.empty())
          throw ConfigError("features: value '" + v + "' not in the vocabulary of " + categorical_names[c]);
        vocab.push_back(v);
        it = vocab.end() - 1;
      }
      f.categorical[i].push_back(static_cast<int>(it - vocab.begin()));
    }
    f.categorical_names.push_back(categorical_names[c]);
    f.vocab.push_back(std::move(vocab));
  }
  for (std::size_t c = 0; c < missing_cols.size(); ++c) {
    f.categorical_names.push_back(missing_cols[c]);
    f.vocab.push_back({"0", "1"});
    for (std::size_t i = 0; i < n; ++i) f.categorical[i].push_back(missing_flags[c][i]);
  }
  return f;
}

}  // namespace matnet::clustering
