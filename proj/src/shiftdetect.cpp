#include "oclads/shiftdetect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oclads/random.hpp"

namespace oclads {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace

std::vector<double> ScoreFunction::score_all(const FeatureMatrix& points) const {
    std::vector<double> out(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) out[i] = score(points.row(i));
    return out;
}

double median_pairwise_distance(const FeatureMatrix& points) {
    const std::size_t n = points.rows();
    if (n < 2) throw std::invalid_argument("median distance needs at least two points");
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist.push_back(squared_distance(points.row(i), points.row(j)));
        }
    }
    // Squared distances are monotone in the distance, so select first.
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    const double upper = std::sqrt(dist[mid]);
    if (dist.size() % 2 == 1) return upper;
    const double lower =
        std::sqrt(*std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid)));
    return 0.5 * (lower + upper);
}

KernelMeanScorer::KernelMeanScorer(FeatureMatrix training) : training_(std::move(training)) {
    if (training_.rows() < 2) {
        throw std::invalid_argument("kernel scorer needs at least two training points");
    }
    const double h = median_pairwise_distance(training_);
    bandwidth_ = h > 0.0 ? h : 1.0;
}

double KernelMeanScorer::score(std::span<const double> x) const {
    if (x.size() != training_.dim()) throw DimensionError("scorer input dimension mismatch");
    const double inv = 1.0 / (2.0 * bandwidth_ * bandwidth_);
    double sum = 0.0;
    for (std::size_t t = 0; t < training_.rows(); ++t) {
        sum += std::exp(-squared_distance(x, training_.row(t)) * inv);
    }
    return -sum / static_cast<double>(training_.rows());
}

MahalanobisScorer::MahalanobisScorer(std::vector<double> mean, std::vector<double> covariance,
                                     double ridge)
    : mean_(std::move(mean)), cholesky_(std::move(covariance)) {
    const std::size_t d = mean_.size();
    if (cholesky_.size() != d * d) throw DimensionError("covariance shape does not match mean");
    for (std::size_t i = 0; i < d; ++i) cholesky_[i * d + i] += ridge;

    // In-place Cholesky, lower triangle.
    for (std::size_t j = 0; j < d; ++j) {
        double diag = cholesky_[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= cholesky_[j * d + k] * cholesky_[j * d + k];
        if (!(diag > 0.0)) throw std::runtime_error("covariance is not positive definite");
        const double ljj = std::sqrt(diag);
        cholesky_[j * d + j] = ljj;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = cholesky_[i * d + j];
            for (std::size_t k = 0; k < j; ++k) v -= cholesky_[i * d + k] * cholesky_[j * d + k];
            cholesky_[i * d + j] = v / ljj;
        }
        for (std::size_t k = j + 1; k < d; ++k) cholesky_[j * d + k] = 0.0;
    }
}

MahalanobisScorer MahalanobisScorer::fit(const FeatureMatrix& training, double ridge) {
    const std::size_t n = training.rows();
    const std::size_t d = training.dim();
    if (n < 2) throw std::invalid_argument("Mahalanobis scorer needs at least two training points");
    std::vector<double> mean(d, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = training.row(t);
        for (std::size_t i = 0; i < d; ++i) mean[i] += row[i];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = training.row(t);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                cov[i * d + j] += (row[i] - mean[i]) * (row[j] - mean[j]);
            }
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            cov[i * d + j] /= static_cast<double>(n - 1);
            cov[j * d + i] = cov[i * d + j];
        }
    }
    return MahalanobisScorer(std::move(mean), std::move(cov), ridge);
}

double MahalanobisScorer::score(std::span<const double> x) const {
    const std::size_t d = mean_.size();
    if (x.size() != d) throw DimensionError("scorer input dimension mismatch");
    // Forward substitution: L y = x - mu, score = |y|^2.
    std::vector<double> y(d);
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double v = x[i] - mean_[i];
        for (std::size_t k = 0; k < i; ++k) v -= cholesky_[i * d + k] * y[k];
        y[i] = v / cholesky_[i * d + i];
        total += y[i] * y[i];
    }
    return total;
}

std::string to_string(ScorerKind kind) {
    return kind == ScorerKind::mahalanobis ? "mahalanobis" : "kernel_mean";
}

ScorerKind scorer_kind_from_string(const std::string& name) {
    if (name == "kernel_mean") return ScorerKind::kernel_mean;
    if (name == "mahalanobis") return ScorerKind::mahalanobis;
    throw std::invalid_argument("unknown scorer: " + name);
}

std::unique_ptr<ScoreFunction> fit_scorer(const FeatureMatrix& training, ScorerKind kind) {
    if (training.rows() < 2) throw std::invalid_argument("scorer needs at least two training points");
    if (kind == ScorerKind::mahalanobis) {
        return std::make_unique<MahalanobisScorer>(MahalanobisScorer::fit(training));
    }
    return std::make_unique<KernelMeanScorer>(training);
}

EmpiricalCdf::EmpiricalCdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
    if (sorted_.empty()) throw std::invalid_argument("empirical CDF of an empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
    const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

double t_l2(std::span<const double> scores_cal, std::span<const double> scores_test) {
    if (scores_cal.empty() || scores_test.empty()) {
        throw std::invalid_argument("t_l2 needs two nonempty samples");
    }
    std::vector<double> a(scores_cal.begin(), scores_cal.end());
    std::vector<double> b(scores_test.begin(), scores_test.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double fa = 0.0;
    double fb = 0.0;
    double prev = 0.0;
    bool started = false;
    double total = 0.0;
    // Walk the pooled breakpoints; both CDFs are constant between them.
    while (i < a.size() || j < b.size()) {
        double v;
        if (i == a.size()) {
            v = b[j];
        } else if (j == b.size()) {
            v = a[i];
        } else {
            v = std::min(a[i], b[j]);
        }
        if (started) {
            const double diff = fa - fb;
            total += diff * diff * (v - prev);
        }
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        fa = static_cast<double>(i) / na;
        fb = static_cast<double>(j) / nb;
        prev = v;
        started = true;
    }
    return total;
}

ShiftVerdict permutation_test(std::span<const double> scores_cal,
                              std::span<const double> scores_test, const ShiftTestConfig& cfg) {
    if (scores_cal.empty() || scores_test.empty()) {
        throw std::invalid_argument("permutation test needs two nonempty batches");
    }
    if (cfg.n_permutations < 1) throw std::invalid_argument("n_permutations must be at least 1");

    ShiftVerdict verdict;
    verdict.t_observed = t_l2(scores_cal, scores_test);

    std::vector<double> pooled(scores_cal.begin(), scores_cal.end());
    pooled.insert(pooled.end(), scores_test.begin(), scores_test.end());
    const std::size_t n_cal = scores_cal.size();
    std::vector<double> shuffled(pooled.size());

    for (int k = 0; k < cfg.n_permutations; ++k) {
        Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        shuffled = pooled;
        rng.shuffle(std::span<double>(shuffled));
        const std::span<const double> all(shuffled);
        const double t = t_l2(all.first(n_cal), all.subspan(n_cal));
        if (t >= verdict.t_observed) ++verdict.exceedances;
    }
    verdict.p_value = static_cast<double>(1 + verdict.exceedances) /
                      static_cast<double>(cfg.n_permutations + 1);
    verdict.shift_detected = verdict.p_value <= cfg.alpha;
    return verdict;
}

ShiftVerdict permutation_test(const ScoreFunction& scorer, const FeatureMatrix& cal_batch,
                              const FeatureMatrix& test_batch, const ShiftTestConfig& cfg) {
    if (cal_batch.empty() || test_batch.empty()) {
        throw std::invalid_argument("permutation test needs two nonempty batches");
    }
    const auto cal_scores = scorer.score_all(cal_batch);
    const auto test_scores = scorer.score_all(test_batch);
    return permutation_test(cal_scores, test_scores, cfg);
}

}  // namespace oclads
