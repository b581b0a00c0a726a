#pragma once

#include <span>
#include <string>
#include <vector>

#include "oclads/model.hpp"
#include "oclads/sample.hpp"

namespace oclads {

struct DeviceConfig {
    int calibration_rounds = 10;  // L
    double s_threshold = 0.25;    // S_th
    int k_min = 15;               // K_min
};

struct UplinkPayload {
    int round = 0;
    std::vector<Sample> selected;  // with ground-truth labels attached
    std::vector<double> scores;    // non-increasing, aligned with `selected`
};

struct InferenceResult {
    std::vector<int> predictions;
    std::vector<double> scores;  // anomaly-class softmax per sample
};

// Number of samples to send from a score vector sorted non-increasingly:
// max(K_min, #{scores >= S_th}) clamped to the batch size.
std::size_t selection_count(std::span<const double> sorted_scores, double s_threshold, int k_min);

// Batch positions ordered by descending score; ties keep batch order.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

class Device {
  public:
    Device(ModelParams initial_model, DeviceConfig config)
        : model_(std::move(initial_model)), config_(config) {}

    InferenceResult infer_batch(const Batch& batch) const;

    // During calibration (round <= L) the whole batch is sent, otherwise
    // the top-K_i samples by anomaly score.
    UplinkPayload select_samples(const Batch& batch, std::span<const double> scores) const;

    // Replaces the installed model from a downlink payload. On a malformed
    // or shape-mismatched payload it throws and keeps the current model.
    void install_model(const std::string& payload);

    const ModelParams& installed_model() const { return model_; }
    const DeviceConfig& config() const { return config_; }

  private:
    ModelParams model_;
    DeviceConfig config_;
};

}  // namespace oclads
