#pragma once

#include <limits>
#include <string>
#include <vector>

namespace matnet::clustering {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Mixed-type well attributes ready for clustering.
///
/// Numeric columns are standardized to zero mean / unit variance; constant
/// columns are dropped. Missing numeric values are replaced by the column
/// median and a companion categorical column `<name>_missing` records where.
/// Categorical values are stored as codes into per-column vocabularies.
struct WellFeatureMatrix {
  std::vector<std::string> wells;
  std::vector<std::string> numeric_names;
  std::vector<std::string> categorical_names;
  std::vector<std::vector<double>> numeric;  ///< [well][column]
  std::vector<std::vector<int>> categorical;  ///< [well][column]
  std::vector<std::vector<std::string>> vocab;
  std::vector<std::string> dropped;          ///< constant numeric columns
  std::vector<double> column_mean, column_std;

  std::size_t size() const { return wells.size(); }
  std::size_t numeric_dims() const { return numeric_names.size(); }
  std::size_t categorical_dims() const { return categorical_names.size(); }

  /// raw_numeric[well][col] may hold kMissing. Categorical vocabularies are
  /// built in order of first appearance unless `declared_vocab` is given, in
  /// which case undeclared values are rejected.
  static WellFeatureMatrix build(std::vector<std::string> wells, std::vector<std::string> numeric_names,
                                 const std::vector<std::vector<double>>& raw_numeric,
                                 std::vector<std::string> categorical_names,
                                 const std::vector<std::vector<std::string>>& raw_categorical,
                                 const std::vector<std::vector<std::string>>& declared_vocab = {});
};

}  // namespace matnet::clustering
