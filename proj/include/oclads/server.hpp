#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oclads/device.hpp"
#include "oclads/model.hpp"
#include "oclads/random.hpp"
#include "oclads/sample.hpp"
#include "oclads/shiftdetect.hpp"

namespace oclads {

// Bounded sample store. Below capacity every sample is appended; at
// capacity an incoming sample overwrites a uniformly chosen sample of the
// current majority class (label 0 wins a tie).
class ReplayBuffer {
  public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {}

    void insert(const Sample& sample);
    void insert(std::span<const Sample> samples);

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t count(int label) const { return positions_[label].size(); }
    int majority_label() const { return count(1) > count(0) ? 1 : 0; }
    std::span<const Sample> items() const { return items_; }

  private:
    void move_position(std::size_t slot, int from, int to);

    std::size_t capacity_;
    Rng rng_;
    std::vector<Sample> items_;
    std::vector<std::size_t> positions_[2];  // slots holding each label
    std::vector<std::size_t> position_index_;  // slot -> index in positions_[label]
};

enum class PolicyKind { oclads, all_update, random_update, oracle, no_update };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);
const std::vector<PolicyKind>& all_policies();

struct UpdatePolicy {
    PolicyKind kind = PolicyKind::oclads;
    std::set<int> rounds;  // RandomUpdate schedule or Oracle's true shift rounds

    static UpdatePolicy oclads() { return {PolicyKind::oclads, {}}; }
    static UpdatePolicy all_update() { return {PolicyKind::all_update, {}}; }
    static UpdatePolicy no_update() { return {PolicyKind::no_update, {}}; }
    static UpdatePolicy random_update(std::set<int> schedule) {
        return {PolicyKind::random_update, std::move(schedule)};
    }
    static UpdatePolicy oracle(std::set<int> shift_rounds) {
        return {PolicyKind::oracle, std::move(shift_rounds)};
    }
};

// Splits (L, n_rounds] into n_updates equal segments and draws one round per
// segment from a Gaussian at the segment midpoint (sigma = length / 4),
// rounded and clamped into the segment.
std::set<int> make_random_schedule(int n_rounds, int n_updates, int calibration_rounds, Rng& rng);

struct ServerConfig {
    int calibration_rounds = 10;
    std::size_t buffer_capacity = 3000;
    TrainConfig train;
    ShiftTestConfig test;
    ScorerKind scorer = ScorerKind::kernel_mean;
    // Run the shift test under every policy, not only OCLADS (for metrics).
    bool test_all_policies = false;
};

struct RoundOutcome {
    int round = 0;
    bool testable = false;
    std::optional<ShiftVerdict> verdict;
    std::optional<std::string> downlink;  // serialized master model
};

class RoundOrderError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

class Server {
  public:
    Server(ModelParams initial_model, UpdatePolicy policy, ServerConfig config,
           std::uint64_t buffer_seed, std::uint64_t train_seed);

    // Shift test against the previous round, buffer insertion, training on
    // the buffer, then the transmission decision.
    RoundOutcome process_round(const UplinkPayload& payload);

    const ModelParams& master_model() const { return master_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const UpdatePolicy& policy() const { return policy_; }
    std::span<const Sample> last_round_received() const { return last_received_; }

  private:
    bool runs_shift_test() const;
    bool should_transmit(int round, const std::optional<ShiftVerdict>& verdict) const;

    ModelParams master_;
    UpdatePolicy policy_;
    ServerConfig config_;
    ReplayBuffer buffer_;
    Rng train_rng_;
    std::vector<Sample> last_received_;
    int last_round_ = 0;
};

}  // namespace oclads
