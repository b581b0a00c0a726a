#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oclads/random.hpp"
#include "oclads/sample.hpp"

namespace oclads {

class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ModelFormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kNumClasses = 2;

// input(M) -> tanh hidden(H) -> softmax over {normal, anomaly}.
// Weight matrices are row-major, one row per output unit.
struct ModelParams {
    int input_dim = 0;
    int hidden_dim = 0;
    std::vector<double> w1;  // hidden_dim x input_dim
    std::vector<double> b1;  // hidden_dim
    std::vector<double> w2;  // kNumClasses x hidden_dim
    std::vector<double> b2;  // kNumClasses

    static ModelParams zeros(int input_dim, int hidden_dim);
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
    static ModelParams random_init(int input_dim, int hidden_dim, Rng& rng);

    std::size_t parameter_count() const;
    // Order: w1, b1, w2, b2.
    std::vector<double> flatten() const;
    static ModelParams unflatten(int input_dim, int hidden_dim, std::span<const double> values);

    bool all_finite() const;
    // FNV-1a over the raw parameter bytes.
    std::uint64_t fingerprint() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Prediction {
    std::array<double, kNumClasses> softmax{};
    int label = 0;

    double anomaly_score() const { return softmax[1]; }
};

// Ties (equal probabilities) resolve to class 0.
Prediction predict(const ModelParams& params, std::span<const double> x);

struct TrainConfig {
    double learning_rate = 0.15;
    int steps_per_batch = 20;
    int minibatch_size = 32;
    double gamma_fl = 2.0;
    double alpha_fl = 0.8;
};

inline constexpr double kProbabilityClamp = 1e-12;

struct LossAndGradient {
    double loss = 0.0;
    ModelParams gradient;
};

// Mean focal loss -alpha_c (1 - p_c)^gamma log p_c over the minibatch, with
// alpha_1 = alpha_fl for anomalies and alpha_0 = 1 - alpha_fl for normals,
// and its exact gradient.
LossAndGradient focal_loss(const ModelParams& params, std::span<const Sample* const> minibatch,
                           double gamma_fl, double alpha_fl);
LossAndGradient focal_loss(const ModelParams& params, std::span<const Sample> minibatch,
                           double gamma_fl, double alpha_fl);

// cfg.steps_per_batch plain SGD steps; each minibatch is drawn uniformly with
// replacement from `pool`.
ModelParams train_steps(ModelParams params, std::span<const Sample> pool, const TrainConfig& cfg,
                        Rng& rng);

// Experience-replay steps: every step trains on all `incoming` samples
// together with cfg.minibatch_size draws (with replacement) from `memory`.
// With no incoming samples this is train_steps on `memory`.
ModelParams train_replay_steps(ModelParams params, std::span<const Sample> incoming,
                               std::span<const Sample> memory, const TrainConfig& cfg, Rng& rng);

// Draws the bootstrap set (n_normal + n_anomalous base samples).
std::vector<Sample> make_bootstrap_set(int dim, int n_normal, int n_anomalous, Rng& rng);

// `steps` SGD steps on the bootstrap set; the result seeds every policy.
ModelParams bootstrap_finetune(ModelParams params, std::span<const Sample> dataset,
                               const TrainConfig& cfg, int steps, Rng& rng);

// Downlink payload: versioned JSON text with a shape header and the
// flattened values. Doubles are written with round-trip precision.
std::string serialize_model(const ModelParams& params);
ModelParams deserialize_model(const std::string& payload);

}  // namespace oclads
