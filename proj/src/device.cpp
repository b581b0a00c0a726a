#include "oclads/device.hpp"

#include <algorithm>
#include <numeric>

namespace oclads {

std::size_t selection_count(std::span<const double> sorted_scores, double s_threshold, int k_min) {
    const auto above = static_cast<std::size_t>(
        std::count_if(sorted_scores.begin(), sorted_scores.end(),
                      [&](double s) { return s >= s_threshold; }));
    const std::size_t floor_count = static_cast<std::size_t>(std::max(k_min, 0));
    return std::min(std::max(above, floor_count), sorted_scores.size());
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

InferenceResult Device::infer_batch(const Batch& batch) const {
    InferenceResult out;
    out.predictions.reserve(batch.samples.size());
    out.scores.reserve(batch.samples.size());
    for (const auto& sample : batch.samples) {
        const Prediction p = predict(model_, sample.features);
        out.predictions.push_back(p.label);
        out.scores.push_back(p.anomaly_score());
    }
    return out;
}

UplinkPayload Device::select_samples(const Batch& batch, std::span<const double> scores) const {
    if (scores.size() != batch.samples.size()) {
        throw std::invalid_argument("score count does not match batch size");
    }
    const auto order = rank_by_score(scores);
    std::vector<double> sorted(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = scores[order[k]];

    const std::size_t count = batch.round <= config_.calibration_rounds
                                  ? order.size()
                                  : selection_count(sorted, config_.s_threshold, config_.k_min);

    UplinkPayload payload;
    payload.round = batch.round;
    payload.selected.reserve(count);
    payload.scores.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(count));
    for (std::size_t k = 0; k < count; ++k) payload.selected.push_back(batch.samples[order[k]]);
    return payload;
}

void Device::install_model(const std::string& payload) {
    ModelParams incoming = deserialize_model(payload);
    if (incoming.input_dim != model_.input_dim || incoming.hidden_dim != model_.hidden_dim) {
        throw ModelFormatError("downlink model shape does not match the installed model");
    }
    model_ = std::move(incoming);
}

}  // namespace oclads
