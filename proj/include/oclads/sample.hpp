#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oclads {

struct Sample {
    std::vector<double> features;
    int label = 0;  // 0 = normal, 1 = anomaly
    int round = 0;
    int index_in_batch = 0;
};

struct Batch {
    int round = 0;
    std::vector<Sample> samples;
};

class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Dense row-major n x dim matrix of feature vectors.
class FeatureMatrix {
  public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(std::size_t dim) : dim_(dim) {}

    static FeatureMatrix from_samples(std::span<const Sample> samples);
    static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

    void append(std::span<const double> row);

    std::size_t rows() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

  private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

}  // namespace oclads
