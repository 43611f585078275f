#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nfsrd {

// Row-major feature matrix with named columns and a response vector.
class Dataset {
 public:
  Dataset() = default;

  // Throws DataError unless n >= 1, p >= 1, all values finite, names unique
  // and the shapes agree.
  Dataset(std::vector<double> features, std::vector<std::string> names,
          std::vector<double> response);

  std::size_t rows() const { return response_.size(); }
  std::size_t cols() const { return names_.size(); }

  double at(std::size_t row, std::size_t col) const { return features_[row * cols() + col]; }
  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * cols(), cols()};
  }
  std::span<const double> response() const { return response_; }
  std::span<const double> features() const { return features_; }
  const std::vector<std::string>& names() const { return names_; }

  std::vector<double> column(std::size_t col) const;

  // Rows in the given order (duplicates allowed).
  Dataset subset_rows(std::span<const std::size_t> rows) const;
  // Columns in the given order.
  Dataset select_columns(std::span<const std::size_t> cols) const;

 private:
  std::vector<double> features_;
  std::vector<std::string> names_;
  std::vector<double> response_;
};

std::vector<std::string> default_feature_names(std::size_t p);

}  // namespace nfsrd
