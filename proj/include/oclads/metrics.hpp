#pragma once

#include <span>
#include <utility>
#include <vector>

namespace oclads {

// How a class that appears in neither truth nor prediction is scored.
enum class AbsentClass {
    perfect,   // contributes F1 = 1
    excluded,  // dropped from the macro average
};

double macro_f1(std::span<const int> truth, std::span<const int> pred,
                AbsentClass absent = AbsentClass::perfect);

// Mean of the full history.
double online_f1(std::span<const double> batch_f1_history);

// Running form of online_f1 for the round loop.
class OnlineMean {
  public:
    double add(double value) {
        sum_ += value;
        ++count_;
        return sum_ / static_cast<double>(count_);
    }
    double value() const { return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_); }
    std::size_t count() const { return count_; }

  private:
    double sum_ = 0.0;
    std::size_t count_ = 0;
};

struct DetectionRecord {
    int round = 0;
    double p_value = 1.0;
    bool detected = false;
    bool matched_true_shift = false;
    bool is_false_alarm = false;
};

struct DetectionSummary {
    int true_detections = 0;
    int false_alarms = 0;
    int missed_shifts = 0;
    std::vector<DetectionRecord> records;  // one per detection, in round order
};

// A detection at round i matches the earliest unmatched true shift in
// [i - window, i]; every shift is matched at most once.
DetectionSummary match_detections(std::span<const std::pair<int, bool>> detections,
                                  std::span<const int> shift_rounds, int window = 0);

}  // namespace oclads
