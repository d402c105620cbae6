#pragma once

#include "jamguard/common.hpp"
#include "jamguard/datakit.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace jamguard {

/// Transmitter/receiver link and MAC timing for one observation window.
struct ChannelConfig {
  double tx_power_w = 0.1;
  double tx_gain = 1.0;
  double rx_gain = 1.0;
  double tx_height_m = 1.5;
  double rx_height_m = 1.5;
  double distance_m = 60.0;
  double noise_power_w = 1e-11;
  int slots_per_window = 120;
  int packets_per_window_target = 20;
  /// SINR at which a packet decodes with probability 1/2.
  double sinr_ref = 10.0;
  double success_steepness = 2.0;

  /// Airtime of one packet, in slots.
  int packet_slots = 4;
  /// Interference power at which carrier sense reports the channel busy.
  double cca_threshold_w = 1e-8;
  /// Per-slot probability that other (legitimate) traffic holds the channel.
  double background_occupancy = 0.0;
  /// Log-normal shadowing, drawn once per window for the desired and the
  /// jammer power independently.
  double shadowing_db = 4.0;
  /// Per-packet RSS measurement noise.
  double rss_noise_db = 1.0;
  /// A frame is detected (counted as received) down to this many dB below sinr_ref.
  double detect_margin_db = 10.0;

  bool operator==(const ChannelConfig&) const = default;
};

enum class JammerKind { none, benign_degraded, constant, random, deceptive, reactive };

std::string_view to_string(JammerKind kind);
JammerKind jammer_kind_from_string(std::string_view name);
inline bool is_attack(JammerKind k) {
  return k != JammerKind::none && k != JammerKind::benign_degraded;
}

struct JammerProfile {
  JammerKind kind = JammerKind::none;
  double jam_power_w = 0.0;
  /// Per-slot on-probability of a random jammer.
  double duty_cycle = 0.5;
  int sense_delay_slots = 1;
  /// Per-slot probability that a deceptive jammer emits a decoy frame.
  double decoy_packet_rate = 0.3;

  /// Constant jammers are on in every slot regardless of duty_cycle.
  double effective_duty() const { return kind == JammerKind::constant ? 1.0 : duty_cycle; }

  bool operator==(const JammerProfile&) const = default;
};

/// Raw counters from one simulated window.
struct LinkWindow {
  int packets_sent = 0;
  int packets_acked = 0;
  int packets_received = 0;
  int packets_erroneous = 0;
  int cca_attempts = 0;
  int cca_busy = 0;
  /// Desired-signal power summed over decoded packets, scaled by the decode rate.
  double rss_sum_w = 0.0;
  int scenario_label = 0;

  bool operator==(const LinkWindow&) const = default;
};

/// Throws ConfigError on invariant violations.
void validate(const ChannelConfig& cfg);
void validate(const JammerProfile& jam);

/// Two-ray ground received power Pt*Gt*Gr*ht^2*hr^2/d^4.
double rss_linear(const ChannelConfig& cfg);

/// Packet decode probability for a given SINR: logistic in ln(SINR/sinr_ref).
double packet_success_probability(const ChannelConfig& cfg, double sinr);

LinkWindow simulate_window(const ChannelConfig& cfg, const JammerProfile& jam, std::uint64_t seed);

inline constexpr double kRssFloorDbm = -120.0;

Sample extract_features(const LinkWindow& w, double rss_floor_dbm = kRssFloorDbm);

struct Scenario {
  std::string name;
  ChannelConfig channel;
  JammerProfile jammer;
  double weight = 1.0;

  bool operator==(const Scenario&) const = default;
};

struct ScenarioMix {
  std::vector<Scenario> scenarios;

  bool operator==(const ScenarioMix&) const = default;
};

/// Index of the scenario that produced sample `index` under `seed`.
std::size_t pick_scenario(const ScenarioMix& mix, std::uint64_t seed, std::size_t index);

/// n windows, each with its scenario and simulation seed derived from
/// (seed, sample index). Independent of `jobs`.
Dataset generate_dataset(const ScenarioMix& mix, std::size_t n, std::uint64_t seed,
                         unsigned jobs = 1);

/// The reference mix: no attack and benign degradation on one side, the four
/// jammer kinds on the other, 50/50 overall.
ScenarioMix canonical_mix();
inline constexpr std::size_t kCanonicalSize = 10000;
inline constexpr std::uint64_t kCanonicalSeed = 42;
Dataset canonical_dataset(unsigned jobs = 1);

// Scenario-mix configuration file (JSON, schema_version required).
inline constexpr int kMixSchemaVersion = 1;
nlohmann::json to_json(const ScenarioMix& mix);
ScenarioMix mix_from_json(const nlohmann::json& doc);
ScenarioMix load_mix(const std::filesystem::path& path);
void save_mix(const ScenarioMix& mix, const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump; recorded as dataset provenance.
std::string mix_hash(const ScenarioMix& mix);

}  // namespace jamguard
