#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "oclads/sample.hpp"

namespace oclads {

// One-class novelty scorer; larger score means more novel.
class ScoreFunction {
  public:
    virtual ~ScoreFunction() = default;
    virtual double score(std::span<const double> x) const = 0;

    std::vector<double> score_all(const FeatureMatrix& points) const;
};

// s(x) = -(1/n) sum_t exp(-|x - x_t|^2 / (2 h^2)), h = median pairwise
// distance of the training set (1 if that median is zero).
class KernelMeanScorer final : public ScoreFunction {
  public:
    explicit KernelMeanScorer(FeatureMatrix training);

    double score(std::span<const double> x) const override;
    double bandwidth() const { return bandwidth_; }

  private:
    FeatureMatrix training_;
    double bandwidth_ = 1.0;
};

// s(x) = (x - mu)^T (Sigma + lambda I)^{-1} (x - mu).
class MahalanobisScorer final : public ScoreFunction {
  public:
    static constexpr double kRidge = 1e-6;

    static MahalanobisScorer fit(const FeatureMatrix& training, double ridge = kRidge);
    // `covariance` is row-major dim x dim.
    MahalanobisScorer(std::vector<double> mean, std::vector<double> covariance,
                      double ridge = kRidge);

    double score(std::span<const double> x) const override;

  private:
    std::vector<double> mean_;
    std::vector<double> cholesky_;  // lower factor of Sigma + lambda I, row-major
};

enum class ScorerKind { kernel_mean, mahalanobis };

std::string to_string(ScorerKind kind);
ScorerKind scorer_kind_from_string(const std::string& name);

// Requires at least two training points.
std::unique_ptr<ScoreFunction> fit_scorer(const FeatureMatrix& training,
                                          ScorerKind kind = ScorerKind::kernel_mean);

// Median of all pairwise Euclidean distances (mean of the two middle values
// for an even count).
double median_pairwise_distance(const FeatureMatrix& points);

// Right-continuous empirical CDF.
class EmpiricalCdf {
  public:
    explicit EmpiricalCdf(std::span<const double> values);

    double operator()(double x) const;
    std::span<const double> sorted() const { return sorted_; }

  private:
    std::vector<double> sorted_;
};

// Exact integral of (F_cal - F_test)^2 over the real line.
double t_l2(std::span<const double> scores_cal, std::span<const double> scores_test);

struct ShiftTestConfig {
    double alpha = 0.05;
    int n_permutations = 199;
    std::uint64_t seed = 0;
};

struct ShiftVerdict {
    double p_value = 1.0;
    bool shift_detected = false;
    double t_observed = 0.0;
    int exceedances = 0;  // #{k : T^(k) >= T_observed}
};

// Permutation test on precomputed scores. Permutation k draws its split from
// a substream derived from (cfg.seed, k).
ShiftVerdict permutation_test(std::span<const double> scores_cal,
                              std::span<const double> scores_test, const ShiftTestConfig& cfg);

ShiftVerdict permutation_test(const ScoreFunction& scorer, const FeatureMatrix& cal_batch,
                              const FeatureMatrix& test_batch, const ShiftTestConfig& cfg);

}  // namespace oclads
