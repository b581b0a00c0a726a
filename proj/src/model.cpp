#include "oclads/model.hpp"
#include "oclads/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <json.hpp>

namespace oclads {

namespace {

constexpr const char* kModelFormat = "oclads-mlp";
constexpr int kModelVersion = 1;

struct Forward {
    std::vector<double> hidden;  // tanh activations
    std::array<double, kNumClasses> logits{};
    std::array<double, kNumClasses> probs{};
    double log_sum_exp = 0.0;
};

void check_dim(const ModelParams& params, std::size_t dim) {
    if (dim != static_cast<std::size_t>(params.input_dim)) {
        throw DimensionError("input has dimension " + std::to_string(dim) + ", model expects " +
                             std::to_string(params.input_dim));
    }
}

Forward forward(const ModelParams& params, std::span<const double> x) {
    const auto in = static_cast<std::size_t>(params.input_dim);
    const auto hid = static_cast<std::size_t>(params.hidden_dim);
    Forward f;
    f.hidden.resize(hid);
    for (std::size_t j = 0; j < hid; ++j) {
        double a = params.b1[j];
        const double* w = params.w1.data() + j * in;
        for (std::size_t i = 0; i < in; ++i) a += w[i] * x[i];
        f.hidden[j] = std::tanh(a);
    }
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        double z = params.b2[k];
        const double* w = params.w2.data() + k * hid;
        for (std::size_t j = 0; j < hid; ++j) z += w[j] * f.hidden[j];
        f.logits[k] = z;
    }
    const double zmax = std::max(f.logits[0], f.logits[1]);
    double total = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) total += std::exp(f.logits[k] - zmax);
    f.log_sum_exp = zmax + std::log(total);
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        f.probs[k] = std::exp(f.logits[k] - f.log_sum_exp);
    }
    return f;
}

void require_finite(double value, const char* where) {
    if (!std::isfinite(value)) throw TrainingError(std::string("non-finite value in ") + where);
}

}  // namespace

ModelParams ModelParams::zeros(int input_dim, int hidden_dim) {
    if (input_dim < 1 || hidden_dim < 1) {
        throw std::invalid_argument("model dimensions must be positive");
    }
    ModelParams p;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.w1.assign(static_cast<std::size_t>(input_dim * hidden_dim), 0.0);
    p.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    p.w2.assign(static_cast<std::size_t>(kNumClasses * hidden_dim), 0.0);
    p.b2.assign(kNumClasses, 0.0);
    return p;
}

ModelParams ModelParams::random_init(int input_dim, int hidden_dim, Rng& rng) {
    ModelParams p = zeros(input_dim, hidden_dim);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (double& v : p.w1) v = rng.uniform(-r1, r1);
    for (double& v : p.b1) v = rng.uniform(-r1, r1);
    for (double& v : p.w2) v = rng.uniform(-r2, r2);
    for (double& v : p.b2) v = rng.uniform(-r2, r2);
    return p;
}

std::size_t ModelParams::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

std::vector<double> ModelParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto* part : {&w1, &b1, &w2, &b2}) out.insert(out.end(), part->begin(), part->end());
    return out;
}

ModelParams ModelParams::unflatten(int input_dim, int hidden_dim, std::span<const double> values) {
    ModelParams p = zeros(input_dim, hidden_dim);
    if (values.size() != p.parameter_count()) {
        throw ModelFormatError("expected " + std::to_string(p.parameter_count()) +
                               " parameters, got " + std::to_string(values.size()));
    }
    auto it = values.begin();
    for (auto* part : {&p.w1, &p.b1, &p.w2, &p.b2}) {
        std::copy_n(it, part->size(), part->begin());
        it += static_cast<std::ptrdiff_t>(part->size());
    }
    return p;
}

bool ModelParams::all_finite() const {
    for (const auto* part : {&w1, &b1, &w2, &b2}) {
        if (!std::all_of(part->begin(), part->end(), [](double v) { return std::isfinite(v); })) {
            return false;
        }
    }
    return true;
}

std::uint64_t ModelParams::fingerprint() const {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const auto* part : {&w1, &b1, &w2, &b2}) {
        for (double v : *part) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof(double));
            for (unsigned char b : bytes) {
                hash ^= b;
                hash *= 0x100000001b3ULL;
            }
        }
    }
    return hash;
}

Prediction predict(const ModelParams& params, std::span<const double> x) {
    check_dim(params, x.size());
    const Forward f = forward(params, x);
    Prediction out;
    out.softmax = f.probs;
    out.label = f.probs[1] > f.probs[0] ? 1 : 0;
    return out;
}

LossAndGradient focal_loss(const ModelParams& params, std::span<const Sample* const> minibatch,
                           double gamma_fl, double alpha_fl) {
    if (minibatch.empty()) throw std::invalid_argument("focal_loss needs a nonempty minibatch");

    const auto in = static_cast<std::size_t>(params.input_dim);
    const auto hid = static_cast<std::size_t>(params.hidden_dim);
    LossAndGradient out;
    out.gradient = ModelParams::zeros(params.input_dim, params.hidden_dim);
    ModelParams& grad = out.gradient;
    std::vector<double> d_hidden(hid);

    for (const Sample* sample : minibatch) {
        const auto& x = sample->features;
        check_dim(params, x.size());
        const Forward f = forward(params, x);
        const auto c = static_cast<std::size_t>(sample->label);
        const double weight = c == 1 ? alpha_fl : 1.0 - alpha_fl;

        double p = f.probs[c];
        double log_p = f.logits[c] - f.log_sum_exp;
        bool clamped = false;
        if (p < kProbabilityClamp) {
            p = kProbabilityClamp;
            clamped = true;
        } else if (p > 1.0 - kProbabilityClamp) {
            p = 1.0 - kProbabilityClamp;
            clamped = true;
        }
        if (clamped) log_p = std::log(p);

        const double q = 1.0 - p;
        const double loss = -weight * std::pow(q, gamma_fl) * log_p;
        require_finite(loss, "focal loss forward pass");
        out.loss += loss;
        if (clamped) continue;  // the clamped branch is flat in the logits

        // dL/dz_k = g * (delta_ck - p_k), with g = dL/dp_c * p_c.
        double g = -weight * std::pow(q, gamma_fl);
        if (gamma_fl != 0.0) g += weight * gamma_fl * std::pow(q, gamma_fl - 1.0) * p * log_p;

        std::array<double, kNumClasses> d_logits{};
        for (std::size_t k = 0; k < kNumClasses; ++k) {
            d_logits[k] = g * ((k == c ? 1.0 : 0.0) - f.probs[k]);
        }

        std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
        for (std::size_t k = 0; k < kNumClasses; ++k) {
            grad.b2[k] += d_logits[k];
            double* gw = grad.w2.data() + k * hid;
            const double* w = params.w2.data() + k * hid;
            for (std::size_t j = 0; j < hid; ++j) {
                gw[j] += d_logits[k] * f.hidden[j];
                d_hidden[j] += d_logits[k] * w[j];
            }
        }
        for (std::size_t j = 0; j < hid; ++j) {
            const double d_pre = d_hidden[j] * (1.0 - f.hidden[j] * f.hidden[j]);
            grad.b1[j] += d_pre;
            double* gw = grad.w1.data() + j * in;
            for (std::size_t i = 0; i < in; ++i) gw[i] += d_pre * x[i];
        }
    }

    const double scale = 1.0 / static_cast<double>(minibatch.size());
    out.loss *= scale;
    for (auto* part : {&grad.w1, &grad.b1, &grad.w2, &grad.b2}) {
        for (double& v : *part) v *= scale;
    }
    return out;
}

LossAndGradient focal_loss(const ModelParams& params, std::span<const Sample> minibatch,
                           double gamma_fl, double alpha_fl) {
    std::vector<const Sample*> ptrs;
    ptrs.reserve(minibatch.size());
    for (const auto& s : minibatch) ptrs.push_back(&s);
    return focal_loss(params, ptrs, gamma_fl, alpha_fl);
}

ModelParams train_steps(ModelParams params, std::span<const Sample> pool, const TrainConfig& cfg,
                        Rng& rng) {
    if (pool.empty()) throw std::invalid_argument("train_steps needs a nonempty training pool");
    return train_replay_steps(std::move(params), {}, pool, cfg, rng);
}

ModelParams train_replay_steps(ModelParams params, std::span<const Sample> incoming,
                               std::span<const Sample> memory, const TrainConfig& cfg, Rng& rng) {
    if (incoming.empty() && memory.empty()) {
        throw std::invalid_argument("training needs at least one sample");
    }
    if (cfg.minibatch_size < 1 || cfg.steps_per_batch < 0) {
        throw std::invalid_argument("invalid training configuration");
    }
    const std::size_t replayed = memory.empty() ? 0 : static_cast<std::size_t>(cfg.minibatch_size);
    std::vector<const Sample*> minibatch(incoming.size() + replayed);
    for (std::size_t k = 0; k < incoming.size(); ++k) minibatch[k] = &incoming[k];
    for (int step = 0; step < cfg.steps_per_batch; ++step) {
        for (std::size_t k = incoming.size(); k < minibatch.size(); ++k) {
            minibatch[k] = &memory[rng.index(memory.size())];
        }
        const LossAndGradient lg = focal_loss(params, minibatch, cfg.gamma_fl, cfg.alpha_fl);
        require_finite(lg.loss, "training loss");
        auto apply = [&](std::vector<double>& w, const std::vector<double>& g) {
            for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * g[k];
        };
        apply(params.w1, lg.gradient.w1);
        apply(params.b1, lg.gradient.b1);
        apply(params.w2, lg.gradient.w2);
        apply(params.b2, lg.gradient.b2);
        if (!params.all_finite()) throw TrainingError("non-finite parameters after SGD step");
    }
    return params;
}

std::vector<Sample> make_bootstrap_set(int dim, int n_normal, int n_anomalous, Rng& rng) {
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(n_normal + n_anomalous));
    for (int k = 0; k < n_normal; ++k) out.push_back(draw_base_sample(0, dim, rng));
    for (int k = 0; k < n_anomalous; ++k) out.push_back(draw_base_sample(1, dim, rng));
    for (std::size_t k = 0; k < out.size(); ++k) out[k].index_in_batch = static_cast<int>(k);
    return out;
}

ModelParams bootstrap_finetune(ModelParams params, std::span<const Sample> dataset,
                               const TrainConfig& cfg, int steps, Rng& rng) {
    if (dataset.empty()) throw std::invalid_argument("bootstrap dataset is empty");
    TrainConfig boot = cfg;
    boot.steps_per_batch = steps;
    return train_steps(std::move(params), dataset, boot, rng);
}

std::string serialize_model(const ModelParams& params) {
    nlohmann::ordered_json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelVersion;
    doc["input_dim"] = params.input_dim;
    doc["hidden_dim"] = params.hidden_dim;
    doc["output_dim"] = kNumClasses;
    doc["values"] = params.flatten();
    return doc.dump();
}

ModelParams deserialize_model(const std::string& payload) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(payload);
        if (doc.at("format").get<std::string>() != kModelFormat) {
            throw ModelFormatError("unknown model format");
        }
        if (doc.at("version").get<int>() != kModelVersion) {
            throw ModelFormatError("unsupported model version");
        }
        if (doc.at("output_dim").get<int>() != kNumClasses) {
            throw ModelFormatError("model must have exactly 2 output units");
        }
        const auto values = doc.at("values").get<std::vector<double>>();
        ModelParams p = ModelParams::unflatten(doc.at("input_dim").get<int>(),
                                               doc.at("hidden_dim").get<int>(), values);
        if (!p.all_finite()) throw ModelFormatError("model payload contains non-finite values");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(std::string("malformed model payload: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ModelFormatError(std::string("malformed model payload: ") + e.what());
    }
}

}  // namespace oclads
