#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jobshoplab/env.hpp"

namespace jsl {

/// Chooses one candidate at a decision point, or nothing to let time pass.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::optional<Candidate> choose(const SimContext& ctx, const SimState& s,
                                          const std::vector<Candidate>& candidates) const = 0;
};

/// Shortest processing time; transports serve the longest-waiting job first.
class SptPolicy final : public Policy {
 public:
  std::string name() const override { return "spt"; }
  std::optional<Candidate> choose(const SimContext&, const SimState&, const std::vector<Candidate>&) const override;
};

/// Most work remaining, for machines and transports alike.
class MwkrPolicy final : public Policy {
 public:
  std::string name() const override { return "mwkr"; }
  std::optional<Candidate> choose(const SimContext&, const SimState&, const std::vector<Candidate>&) const override;
};

/// Uniform choice from a stream keyed by the policy seed and the episode position.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random"; }
  std::optional<Candidate> choose(const SimContext&, const SimState&, const std::vector<Candidate>&) const override;

 private:
  std::uint64_t seed_;
};

/// Follows fixed per-machine job orders; transports as in SPT.
class SequencePolicy final : public Policy {
 public:
  explicit SequencePolicy(std::vector<std::vector<int>> machine_orders) : orders_(std::move(machine_orders)) {}
  std::string name() const override { return "sequence"; }
  std::optional<Candidate> choose(const SimContext&, const SimState&, const std::vector<Candidate>&) const override;

 private:
  std::vector<std::vector<int>> orders_;
};

/// "spt", "mwkr" or "random". Throws ConfigError otherwise.
std::unique_ptr<Policy> make_policy(std::string_view name, std::uint64_t seed = 0);

/// Transport candidate serving the earliest-waiting job, nearest unit first.
std::optional<Candidate> fifo_transport_choice(const SimContext& ctx, const SimState& s,
                                               const std::vector<Candidate>& candidates);

struct EpisodeResult {
  SimState state;
  ObjectiveVector objectives;
  PluginMetrics plugin_metrics;
  std::int64_t steps = 0;
  double total_reward = 0;
};

/// Drives reset/step with the policy through the multidiscrete decoding path.
/// Throws Error when the step budget (10 x operations x jobs) is exhausted.
EpisodeResult run_episode(const Environment& env, const Policy& policy, std::uint64_t seed);
EpisodeResult run_episode(const Instance& inst, const EnvConfig& cfg, const Policy& policy, std::uint64_t seed);

}  // namespace jsl
