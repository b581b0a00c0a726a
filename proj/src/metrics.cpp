#include "oclads/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace oclads {

double macro_f1(std::span<const int> truth, std::span<const int> pred, AbsentClass absent) {
    if (truth.size() != pred.size()) throw std::invalid_argument("macro_f1: length mismatch");
    if (truth.empty()) throw std::invalid_argument("macro_f1: empty input");

    // The per-class F1 values are kept as exact fractions and summed over a
    // common denominator, so the result is a single correctly rounded ratio.
    long long num = 0;
    long long den = 1;
    int classes = 0;
    for (int c = 0; c < 2; ++c) {
        long long tp = 0;
        long long fp = 0;
        long long fn = 0;
        for (std::size_t k = 0; k < truth.size(); ++k) {
            const bool t = truth[k] == c;
            const bool p = pred[k] == c;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        long long f_num = 1;
        long long f_den = 1;
        if (tp + fp + fn == 0) {
            if (absent == AbsentClass::excluded) continue;
        } else {
            // 2PR/(P+R) rewritten as 2TP/(2TP+FP+FN); zero when TP = 0.
            f_num = 2 * tp;
            f_den = 2 * tp + fp + fn;
        }
        num = num * f_den + f_num * den;
        den *= f_den;
        ++classes;
    }
    if (classes == 0) return 1.0;
    return static_cast<double>(num) / static_cast<double>(den * classes);
}

double online_f1(std::span<const double> batch_f1_history) {
    if (batch_f1_history.empty()) throw std::invalid_argument("online_f1: empty history");
    double sum = 0.0;
    for (double v : batch_f1_history) sum += v;
    return sum / static_cast<double>(batch_f1_history.size());
}

DetectionSummary match_detections(std::span<const std::pair<int, bool>> detections,
                                  std::span<const int> shift_rounds, int window) {
    std::vector<int> shifts(shift_rounds.begin(), shift_rounds.end());
    std::sort(shifts.begin(), shifts.end());
    std::vector<bool> matched(shifts.size(), false);

    std::vector<std::pair<int, bool>> ordered(detections.begin(), detections.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    DetectionSummary summary;
    for (const auto& [round, detected] : ordered) {
        if (!detected) continue;
        DetectionRecord record;
        record.round = round;
        record.detected = true;
        for (std::size_t s = 0; s < shifts.size(); ++s) {
            if (!matched[s] && shifts[s] >= round - window && shifts[s] <= round) {
                matched[s] = true;
                record.matched_true_shift = true;
                break;
            }
        }
        record.is_false_alarm = !record.matched_true_shift;
        if (record.matched_true_shift) {
            ++summary.true_detections;
        } else {
            ++summary.false_alarms;
        }
        summary.records.push_back(record);
    }
    summary.missed_shifts =
        static_cast<int>(std::count(matched.begin(), matched.end(), false));
    return summary;
}

}  // namespace oclads
