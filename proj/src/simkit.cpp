#include "jamguard/simkit.hpp"

#include "jamguard/format.hpp"
#include "jamguard/parallel.hpp"

#include <array>
#include <cmath>
#include <fstream>

namespace jamguard {

namespace {

constexpr std::array<std::pair<JammerKind, std::string_view>, 6> kKindNames{{
    {JammerKind::none, "none"},
    {JammerKind::benign_degraded, "benign_degraded"},
    {JammerKind::constant, "constant"},
    {JammerKind::random, "random"},
    {JammerKind::deceptive, "deceptive"},
    {JammerKind::reactive, "reactive"},
}};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string_view to_string(JammerKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

JammerKind jammer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw ConfigError("unknown jammer kind '" + std::string(name) + "'");
}

void validate(const ChannelConfig& c) {
  require(c.tx_power_w > 0 && c.tx_gain > 0 && c.rx_gain > 0,
          "channel: tx power and antenna gains must be > 0");
  require(c.tx_height_m > 0 && c.rx_height_m > 0, "channel: antenna heights must be > 0");
  require(c.distance_m > 0, "channel: distance must be > 0");
  require(c.noise_power_w >= 0, "channel: noise power must be >= 0");
  require(c.slots_per_window >= 1 && c.packets_per_window_target >= 1,
          "channel: slots and packet target must be >= 1");
  require(c.slots_per_window >= c.packets_per_window_target,
          "channel: slots_per_window must be >= packets_per_window_target");
  require(c.sinr_ref > 0 && c.success_steepness > 0,
          "channel: sinr_ref and success_steepness must be > 0");
  require(c.packet_slots >= 1, "channel: packet_slots must be >= 1");
  require(c.cca_threshold_w > 0, "channel: cca_threshold_w must be > 0");
  require(c.background_occupancy >= 0 && c.background_occupancy <= 1,
          "channel: background_occupancy must lie in [0,1]");
  require(c.shadowing_db >= 0 && c.rss_noise_db >= 0 && c.detect_margin_db >= 0,
          "channel: shadowing, rss noise and detect margin must be >= 0");
}

void validate(const JammerProfile& j) {
  require(j.jam_power_w >= 0, "jammer: jam_power_w must be >= 0");
  require(is_attack(j.kind) || j.jam_power_w == 0.0,
          "jammer: kind '" + std::string(to_string(j.kind)) + "' requires jam_power_w = 0");
  require(j.duty_cycle >= 0 && j.duty_cycle <= 1, "jammer: duty_cycle must lie in [0,1]");
  require(j.decoy_packet_rate >= 0 && j.decoy_packet_rate <= 1,
          "jammer: decoy_packet_rate must lie in [0,1]");
  require(j.sense_delay_slots >= 0, "jammer: sense_delay_slots must be >= 0");
}

double rss_linear(const ChannelConfig& cfg) {
  if (!(cfg.distance_m > 0)) throw ConfigError("rss_linear: distance must be > 0");
  const double k = cfg.tx_gain * cfg.rx_gain * (cfg.tx_height_m * cfg.tx_height_m) *
                   (cfg.rx_height_m * cfg.rx_height_m);
  const double d2 = cfg.distance_m * cfg.distance_m;
  return k * cfg.tx_power_w / (d2 * d2);
}

double packet_success_probability(const ChannelConfig& cfg, double sinr) {
  if (sinr <= 0.0) return 0.0;
  if (std::isinf(sinr)) return 1.0;
  return logistic(cfg.success_steepness * std::log(sinr / cfg.sinr_ref));
}

LinkWindow simulate_window(const ChannelConfig& cfg, const JammerProfile& jam, std::uint64_t seed) {
  validate(cfg);
  validate(jam);

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> shadow(0.0, 1.0);
  auto chance = [&](double p) { return p > 0.0 && unit(rng) < p; };

  const bool attack = is_attack(jam.kind);
  const double signal_w = rss_linear(cfg) * db_to_linear(cfg.shadowing_db * shadow(rng));
  const double jam_w = attack ? jam.jam_power_w * db_to_linear(cfg.shadowing_db * shadow(rng)) : 0.0;
  const bool jam_trips_cca = jam_w > cfg.cca_threshold_w;
  const double detect_ref_factor = db_to_linear(-cfg.detect_margin_db);

  LinkWindow w;
  w.scenario_label = attack ? 1 : 0;
  double rss_sum = 0.0;
  int decoded = 0;

  int slot = 0;
  while (slot < cfg.slots_per_window && w.packets_sent < cfg.packets_per_window_target) {
    // Carrier sense at the start of the slot.
    ++w.cca_attempts;
    bool busy = chance(cfg.background_occupancy);
    switch (jam.kind) {
      case JammerKind::constant: busy = busy || jam_trips_cca; break;
      case JammerKind::random: busy = chance(jam.effective_duty()) ? (busy || jam_trips_cca) : busy; break;
      case JammerKind::deceptive: busy = chance(jam.decoy_packet_rate) || busy; break;
      default: break;  // reactive jammers stay silent until a frame starts
    }
    if (busy) {
      ++w.cca_busy;
      ++slot;
      continue;
    }

    // Frame airtime: count slots overlapped by jamming energy.
    int jammed = 0;
    switch (jam.kind) {
      case JammerKind::constant: jammed = cfg.packet_slots; break;
      case JammerKind::random:
        for (int s = 0; s < cfg.packet_slots; ++s) jammed += chance(jam.effective_duty()) ? 1 : 0;
        break;
      case JammerKind::deceptive:
        for (int s = 0; s < cfg.packet_slots; ++s) jammed += chance(jam.decoy_packet_rate) ? 1 : 0;
        break;
      case JammerKind::reactive: jammed = std::max(0, cfg.packet_slots - jam.sense_delay_slots); break;
      default: break;
    }
    const double interference = jam_w * jammed / cfg.packet_slots;
    const double denom = cfg.noise_power_w + interference;
    const double sinr = denom > 0.0 ? signal_w / denom : std::numeric_limits<double>::infinity();
    const double p_decode = packet_success_probability(cfg, sinr);
    const double p_detect = std::isinf(sinr) ? 1.0
                            : logistic(cfg.success_steepness *
                                       std::log(sinr / (cfg.sinr_ref * detect_ref_factor)));

    ++w.packets_sent;
    const double u = unit(rng);
    if (u < p_decode) {
      ++w.packets_received;
      ++w.packets_acked;
      ++decoded;
      rss_sum += signal_w * db_to_linear(cfg.rss_noise_db * shadow(rng));
    } else if (u < std::max(p_decode, p_detect)) {
      ++w.packets_received;
      ++w.packets_erroneous;
    }
    slot += cfg.packet_slots;
  }

  // Capture degradation: the reported level falls with the decode rate.
  const double decode_rate =
      w.packets_received > 0 ? static_cast<double>(decoded) / w.packets_received : 0.0;
  w.rss_sum_w = rss_sum * decode_rate;
  return w;
}

Sample extract_features(const LinkWindow& w, double rss_floor_dbm) {
  Sample s;
  s.pdr = w.packets_sent > 0 ? static_cast<double>(w.packets_acked) / w.packets_sent : 0.0;
  s.bpr = w.packets_received > 0 ? static_cast<double>(w.packets_erroneous) / w.packets_received
                                 : 0.0;
  s.cca_busy_ratio = w.cca_attempts > 0 ? static_cast<double>(w.cca_busy) / w.cca_attempts : 0.0;
  const int correct = w.packets_received - w.packets_erroneous;
  s.rss_dbm = rss_floor_dbm;
  if (correct > 0 && w.rss_sum_w > 0.0)
    s.rss_dbm = std::max(rss_floor_dbm, 10.0 * std::log10(1000.0 * w.rss_sum_w / correct));
  s.label = w.scenario_label;
  return s;
}

// ---- dataset generation ---------------------------------------------------

std::size_t pick_scenario(const ScenarioMix& mix, std::uint64_t seed, std::size_t index) {
  double total = 0.0;
  for (const auto& s : mix.scenarios) total += s.weight;
  Rng rng(derive_seed(seed, streams::kScenario, index));
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < mix.scenarios.size(); ++i) {
    acc += mix.scenarios[i].weight;
    if (u < acc && mix.scenarios[i].weight > 0) return i;
  }
  // u == total after rounding: last scenario with positive weight.
  for (std::size_t i = mix.scenarios.size(); i-- > 0;)
    if (mix.scenarios[i].weight > 0) return i;
  return 0;
}

Dataset generate_dataset(const ScenarioMix& mix, std::size_t n, std::uint64_t seed, unsigned jobs) {
  if (mix.scenarios.empty()) throw ConfigError("scenario mix is empty");
  if (n < 1) throw UsageError("generate_dataset: n must be >= 1");
  double total = 0.0;
  for (const auto& s : mix.scenarios) {
    if (!(s.weight >= 0) || !std::isfinite(s.weight))
      throw ConfigError("scenario '" + s.name + "': weight must be finite and >= 0");
    validate(s.channel);
    validate(s.jammer);
    total += s.weight;
  }
  if (!(total > 0)) throw ConfigError("scenario mix weights sum to zero");

  std::vector<Sample> samples(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const Scenario& sc = mix.scenarios[pick_scenario(mix, seed, i)];
    samples[i] = extract_features(
        simulate_window(sc.channel, sc.jammer, derive_seed(seed, streams::kWindow, i)));
  });

  Dataset d(samples);
  d.meta()["generator"] = "simkit";
  d.meta()["generator_config_hash"] = mix_hash(mix);
  d.meta()["seed"] = std::to_string(seed);
  d.meta()["n"] = std::to_string(n);
  return d;
}

ScenarioMix canonical_mix() {
  const ChannelConfig link;  // defaults: short clean link
  ChannelConfig degraded = link;
  degraded.distance_m = 100.0;
  degraded.noise_power_w = 8e-11;
  degraded.background_occupancy = 0.3;

  auto jammer = [](JammerKind kind, double power) {
    JammerProfile j;
    j.kind = kind;
    j.jam_power_w = power;
    return j;
  };

  ScenarioMix mix;
  mix.scenarios = {
      {"no_attack", link, jammer(JammerKind::none, 0.0), 0.25},
      {"benign_degraded", degraded, jammer(JammerKind::benign_degraded, 0.0), 0.25},
      {"constant", link, jammer(JammerKind::constant, 1e-8), 0.125},
      {"random", link, jammer(JammerKind::random, 2e-8), 0.125},
      {"deceptive", link, jammer(JammerKind::deceptive, 2e-8), 0.125},
      {"reactive", link, jammer(JammerKind::reactive, 1e-8), 0.125},
  };
  return mix;
}

Dataset canonical_dataset(unsigned jobs) {
  return generate_dataset(canonical_mix(), kCanonicalSize, kCanonicalSeed, jobs);
}

// ---- JSON -----------------------------------------------------------------

namespace {

nlohmann::json channel_json(const ChannelConfig& c) {
  return {
      {"tx_power_w", c.tx_power_w},
      {"tx_gain", c.tx_gain},
      {"rx_gain", c.rx_gain},
      {"tx_height_m", c.tx_height_m},
      {"rx_height_m", c.rx_height_m},
      {"distance_m", c.distance_m},
      {"noise_power_w", c.noise_power_w},
      {"slots_per_window", c.slots_per_window},
      {"packets_per_window_target", c.packets_per_window_target},
      {"sinr_ref", c.sinr_ref},
      {"success_steepness", c.success_steepness},
      {"packet_slots", c.packet_slots},
      {"cca_threshold_w", c.cca_threshold_w},
      {"background_occupancy", c.background_occupancy},
      {"shadowing_db", c.shadowing_db},
      {"rss_noise_db", c.rss_noise_db},
      {"detect_margin_db", c.detect_margin_db},
  };
}

nlohmann::json jammer_json(const JammerProfile& j) {
  return {
      {"kind", std::string(to_string(j.kind))},
      {"jam_power_w", j.jam_power_w},
      {"duty_cycle", j.duty_cycle},
      {"sense_delay_slots", j.sense_delay_slots},
      {"decoy_packet_rate", j.decoy_packet_rate},
  };
}

// Missing optional fields keep their defaults; wrong types are config errors.
template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json to_json(const ScenarioMix& mix) {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& s : mix.scenarios)
    scenarios.push_back({{"name", s.name},
                         {"weight", s.weight},
                         {"channel", channel_json(s.channel)},
                         {"jammer", jammer_json(s.jammer)}});
  return {{"schema_version", kMixSchemaVersion}, {"scenarios", scenarios}};
}

ScenarioMix mix_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario mix: document must be a JSON object");
  if (!doc.contains("schema_version")) throw ConfigError("scenario mix: schema_version missing");
  if (!doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != kMixSchemaVersion)
    throw ConfigError("scenario mix: unsupported schema_version (expected " +
                      std::to_string(kMixSchemaVersion) + ")");
  if (!doc.contains("scenarios") || !doc["scenarios"].is_array())
    throw ConfigError("scenario mix: 'scenarios' array missing");

  ScenarioMix mix;
  std::size_t idx = 0;
  for (const auto& entry : doc["scenarios"]) {
    const std::string where = "scenario " + std::to_string(idx++);
    if (!entry.is_object()) throw ConfigError(where + ": must be an object");
    Scenario s;
    read_field(entry, "name", s.name, where);
    if (!entry.contains("weight")) throw ConfigError(where + ": weight missing");
    read_field(entry, "weight", s.weight, where);
    if (entry.contains("channel")) {
      const auto& c = entry["channel"];
      auto& ch = s.channel;
      read_field(c, "tx_power_w", ch.tx_power_w, where);
      read_field(c, "tx_gain", ch.tx_gain, where);
      read_field(c, "rx_gain", ch.rx_gain, where);
      read_field(c, "tx_height_m", ch.tx_height_m, where);
      read_field(c, "rx_height_m", ch.rx_height_m, where);
      read_field(c, "distance_m", ch.distance_m, where);
      read_field(c, "noise_power_w", ch.noise_power_w, where);
      read_field(c, "slots_per_window", ch.slots_per_window, where);
      read_field(c, "packets_per_window_target", ch.packets_per_window_target, where);
      read_field(c, "sinr_ref", ch.sinr_ref, where);
      read_field(c, "success_steepness", ch.success_steepness, where);
      read_field(c, "packet_slots", ch.packet_slots, where);
      read_field(c, "cca_threshold_w", ch.cca_threshold_w, where);
      read_field(c, "background_occupancy", ch.background_occupancy, where);
      read_field(c, "shadowing_db", ch.shadowing_db, where);
      read_field(c, "rss_noise_db", ch.rss_noise_db, where);
      read_field(c, "detect_margin_db", ch.detect_margin_db, where);
    }
    if (!entry.contains("jammer") || !entry["jammer"].contains("kind"))
      throw ConfigError(where + ": jammer.kind missing");
    const auto& j = entry["jammer"];
    std::string kind;
    read_field(j, "kind", kind, where);
    s.jammer.kind = jammer_kind_from_string(kind);
    read_field(j, "jam_power_w", s.jammer.jam_power_w, where);
    read_field(j, "duty_cycle", s.jammer.duty_cycle, where);
    read_field(j, "sense_delay_slots", s.jammer.sense_delay_slots, where);
    read_field(j, "decoy_packet_rate", s.jammer.decoy_packet_rate, where);
    validate(s.channel);
    validate(s.jammer);
    if (!(s.weight >= 0)) throw ConfigError(where + ": weight must be >= 0");
    mix.scenarios.push_back(std::move(s));
  }
  if (mix.scenarios.empty()) throw ConfigError("scenario mix: no scenarios");
  return mix;
}

ScenarioMix load_mix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario config " + path.string() + ": " + e.what());
  }
  return mix_from_json(doc);
}

void save_mix(const ScenarioMix& mix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << to_json(mix).dump(2) << '\n';
}

std::string mix_hash(const ScenarioMix& mix) { return fnv1a_hex(to_json(mix).dump()); }

}  // namespace jamguard
