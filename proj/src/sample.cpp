#include "oclads/sample.hpp"

namespace oclads {

FeatureMatrix FeatureMatrix::from_samples(std::span<const Sample> samples) {
    FeatureMatrix m(samples.empty() ? 0 : samples.front().features.size());
    for (const auto& s : samples) m.append(s.features);
    return m;
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m(rows.empty() ? 0 : rows.front().size());
    for (const auto& r : rows) m.append(r);
    return m;
}

void FeatureMatrix::append(std::span<const double> row) {
    if (dim_ == 0 && data_.empty()) dim_ = row.size();
    if (row.size() != dim_) {
        throw DimensionError("feature row has dimension " + std::to_string(row.size()) +
                             ", expected " + std::to_string(dim_));
    }
    data_.insert(data_.end(), row.begin(), row.end());
}

}  // namespace oclads
