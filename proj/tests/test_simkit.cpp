#include "jamguard/simkit.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace jamguard;

namespace {

ChannelConfig unit_link(double d) {
  ChannelConfig c;
  c.tx_power_w = 1.0;
  c.tx_gain = c.rx_gain = 1.0;
  c.tx_height_m = c.rx_height_m = 1.0;
  c.distance_m = d;
  return c;
}

// A link with no per-window randomness besides the packet draws.
ChannelConfig quiet_link() {
  ChannelConfig c;
  c.shadowing_db = 0.0;
  c.rss_noise_db = 0.0;
  c.background_occupancy = 0.0;
  return c;
}

JammerProfile jammer(JammerKind kind, double power) {
  JammerProfile j;
  j.kind = kind;
  j.jam_power_w = power;
  return j;
}

struct Means {
  double pdr = 0, bpr = 0, cca = 0;
  long long busy = 0, attempts = 0, sent = 0, acked = 0;
};

Means average(const ChannelConfig& c, const JammerProfile& j, int windows, std::uint64_t seed) {
  Means m;
  for (int i = 0; i < windows; ++i) {
    const LinkWindow w = simulate_window(c, j, derive_seed(seed, 99, static_cast<std::uint64_t>(i)));
    const Sample s = extract_features(w);
    m.pdr += s.pdr;
    m.bpr += s.bpr;
    m.cca += s.cca_busy_ratio;
    m.busy += w.cca_busy;
    m.attempts += w.cca_attempts;
    m.sent += w.packets_sent;
    m.acked += w.packets_acked;
  }
  m.pdr /= windows;
  m.bpr /= windows;
  m.cca /= windows;
  return m;
}

}  // namespace

TEST_CASE("rss_linear follows the two-ray fourth-power law") {
  CHECK(rss_linear(unit_link(10.0)) == doctest::Approx(1.0e-4).epsilon(1e-15));
  CHECK(rss_linear(unit_link(20.0)) == doctest::Approx(6.25e-6).epsilon(1e-15));

  ChannelConfig c = unit_link(1.0);
  c.tx_power_w = 2.0;
  c.tx_gain = 2.0;
  CHECK(rss_linear(c) == 4.0);

  SUBCASE("scaling distance by s divides by s^4") {
    const ChannelConfig base = ChannelConfig{};
    for (double s : {2.0, 0.5, 4.0}) {
      ChannelConfig scaled = base;
      scaled.distance_m *= s;
      CHECK(rss_linear(scaled) == rss_linear(base) / (s * s * s * s));
    }
    ChannelConfig scaled = base;
    scaled.distance_m *= 3.0;
    CHECK(rss_linear(scaled) == doctest::Approx(rss_linear(base) / 81.0).epsilon(1e-14));
  }

  SUBCASE("non-positive distance is rejected") {
    CHECK_THROWS_AS(rss_linear(unit_link(0.0)), ConfigError);
    CHECK_THROWS_AS(rss_linear(unit_link(-5.0)), ConfigError);
  }
}

TEST_CASE("packet success is logistic in log SINR") {
  ChannelConfig c;
  c.sinr_ref = 10.0;
  c.success_steepness = 2.0;
  CHECK(packet_success_probability(c, 10.0) == doctest::Approx(0.5));
  for (double sinr : {0.1, 1.0, 5.0, 20.0, 1000.0})
    CHECK(packet_success_probability(c, sinr) ==
          doctest::Approx(oracle::logistic(2.0 * std::log(sinr / 10.0))).epsilon(1e-13));
  CHECK(packet_success_probability(c, 0.0) == 0.0);
  CHECK(packet_success_probability(c, INFINITY) == 1.0);
}

TEST_CASE("extract_features computes the four ratios") {
  LinkWindow w;
  w.packets_sent = 100;
  w.packets_acked = 90;
  w.packets_received = 80;
  w.packets_erroneous = 8;
  w.cca_attempts = 100;
  w.cca_busy = 20;
  w.rss_sum_w = 72 * 1e-6;  // 72 correct packets at -30 dBm each
  w.scenario_label = 1;
  const Sample s = extract_features(w);
  CHECK(s.pdr == doctest::Approx(0.9));
  CHECK(s.bpr == doctest::Approx(0.1));
  CHECK(s.cca_busy_ratio == doctest::Approx(0.2));
  CHECK(s.rss_dbm == doctest::Approx(-30.0));
  CHECK(s.label == 1);

  SUBCASE("zero denominators give zero ratios and the rss sentinel") {
    const Sample z = extract_features(LinkWindow{});
    CHECK(z.pdr == 0.0);
    CHECK(z.bpr == 0.0);
    CHECK(z.cca_busy_ratio == 0.0);
    CHECK(z.rss_dbm == kRssFloorDbm);
  }
  SUBCASE("all received packets erroneous gives the sentinel") {
    LinkWindow e;
    e.packets_sent = e.packets_received = e.packets_erroneous = 5;
    e.cca_attempts = 5;
    CHECK(extract_features(e).rss_dbm == kRssFloorDbm);
    CHECK(extract_features(e, -100.0).rss_dbm == -100.0);
  }
}

TEST_CASE("simulate_window is a pure function of its inputs") {
  const ChannelConfig c;
  for (auto kind : {JammerKind::none, JammerKind::constant, JammerKind::random,
                    JammerKind::deceptive, JammerKind::reactive}) {
    const JammerProfile j = jammer(kind, is_attack(kind) ? 1e-8 : 0.0);
    CHECK(simulate_window(c, j, 1234) == simulate_window(c, j, 1234));
  }
  CHECK_FALSE(simulate_window(c, jammer(JammerKind::random, 1e-8), 1) ==
              simulate_window(c, jammer(JammerKind::random, 1e-8), 2));
}

TEST_CASE("clean strong link delivers nearly everything") {
  const ChannelConfig c;
  const double sinr = rss_linear(c) / c.noise_power_w;
  REQUIRE(sinr > 100 * c.sinr_ref);
  for (int i = 0; i < 1000; ++i) {
    const Sample s = extract_features(simulate_window(c, JammerProfile{}, static_cast<std::uint64_t>(i)));
    CHECK(s.pdr >= 0.95);
    CHECK(s.bpr <= 0.05);
    CHECK(s.label == 0);
  }
}

TEST_CASE("a strong constant jammer collapses delivery") {
  ChannelConfig c = quiet_link();
  c.cca_threshold_w = 1.0;  // keep carrier sense blind so frames are attempted
  const double jam = 1000.0 * rss_linear(c);
  REQUIRE(rss_linear(c) / (c.noise_power_w + jam) < 0.01 * c.sinr_ref);
  const Means m = average(c, jammer(JammerKind::constant, jam), 1000, 5);
  CHECK(m.pdr <= 0.2);
  for (int i = 0; i < 200; ++i)
    CHECK(extract_features(simulate_window(c, jammer(JammerKind::constant, jam), static_cast<std::uint64_t>(i))).pdr <= 0.2);
}

TEST_CASE("mean delivery matches the success law under steady interference") {
  // With shadowing off and carrier sense blind to the jammer, every frame
  // succeeds independently with probability p(SINR).
  ChannelConfig c = quiet_link();
  c.cca_threshold_w = 1.0;
  const double s = rss_linear(c);
  for (double target : {0.5, 2.0, 0.2}) {
    const double sinr = target * c.sinr_ref;
    const double jam = s / sinr - c.noise_power_w;
    const double p = oracle::logistic(c.success_steepness * std::log(target));
    const Means m = average(c, jammer(JammerKind::constant, jam), 1000, 17);
    const double pooled = static_cast<double>(m.acked) / static_cast<double>(m.sent);
    CAPTURE(target);
    CHECK(m.sent == 1000LL * c.packets_per_window_target);
    CHECK(std::abs(pooled - p) <= oracle::binomial_halfwidth(p, static_cast<double>(m.sent)));
  }
}

TEST_CASE("carrier sense busy rate matches decoy and background rates") {
  ChannelConfig c = quiet_link();
  SUBCASE("deceptive decoys") {
    JammerProfile j = jammer(JammerKind::deceptive, 1e-12);
    j.decoy_packet_rate = 0.3;
    const Means m = average(c, j, 1000, 3);
    const double rate = static_cast<double>(m.busy) / static_cast<double>(m.attempts);
    CHECK(std::abs(rate - 0.3) <= oracle::binomial_halfwidth(0.3, static_cast<double>(m.attempts)));
  }
  SUBCASE("background occupancy") {
    c.background_occupancy = 0.2;
    const Means m = average(c, JammerProfile{}, 1000, 4);
    const double rate = static_cast<double>(m.busy) / static_cast<double>(m.attempts);
    CHECK(std::abs(rate - 0.2) <= oracle::binomial_halfwidth(0.2, static_cast<double>(m.attempts)));
  }
  SUBCASE("constant jammer above threshold holds the channel") {
    const LinkWindow w = simulate_window(c, jammer(JammerKind::constant, 10 * c.cca_threshold_w), 9);
    CHECK(w.packets_sent == 0);
    CHECK(w.cca_busy == w.cca_attempts);
    CHECK(w.cca_attempts == c.slots_per_window);
  }
}

TEST_CASE("reactive jammer that reacts after the frame ends is harmless") {
  ChannelConfig c = quiet_link();
  JammerProfile late = jammer(JammerKind::reactive, 1e-3);
  late.sense_delay_slots = c.packet_slots;
  JammerProfile early = late;
  early.sense_delay_slots = 0;
  const Means harmless = average(c, late, 300, 8);
  const Means harmful = average(c, early, 300, 8);
  CHECK(harmless.pdr >= 0.99);
  CHECK(harmless.cca == 0.0);
  CHECK(harmful.pdr <= 0.01);
}

TEST_CASE("stronger constant jamming degrades the features monotonically") {
  const std::vector<double> powers{2e-9, 6e-9, 1.5e-8};
  SUBCASE("delivery and error ratios with carrier sense disabled") {
    ChannelConfig c;
    c.cca_threshold_w = 1.0;
    std::vector<Means> m;
    for (double p : powers) m.push_back(average(c, jammer(JammerKind::constant, p), 600, 21));
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
      CHECK(m[i + 1].pdr < m[i].pdr);
      CHECK(m[i + 1].bpr > m[i].bpr);
    }
  }
  SUBCASE("busy ratio and delivery with carrier sense enabled") {
    std::vector<Means> m;
    for (double p : powers) m.push_back(average(ChannelConfig{}, jammer(JammerKind::constant, p), 600, 21));
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
      CHECK(m[i + 1].cca > m[i].cca);
      CHECK(m[i + 1].pdr < m[i].pdr);
    }
  }
}

TEST_CASE("window counters respect their invariants in every canonical scenario") {
  const ScenarioMix mix = canonical_mix();
  for (const auto& sc : mix.scenarios) {
    CAPTURE(sc.name);
    for (int i = 0; i < 200; ++i) {
      const LinkWindow w = simulate_window(sc.channel, sc.jammer, static_cast<std::uint64_t>(i));
      CHECK(w.packets_acked <= w.packets_sent);
      CHECK(w.packets_erroneous <= w.packets_received);
      CHECK(w.packets_received <= w.packets_sent);
      CHECK(w.cca_busy <= w.cca_attempts);
      CHECK(w.scenario_label == (is_attack(sc.jammer.kind) ? 1 : 0));
      const Sample s = extract_features(w);
      for (double f : {s.pdr, s.bpr, s.cca_busy_ratio}) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
      }
      CHECK(std::isfinite(s.rss_dbm));
      CHECK(s.rss_dbm >= kRssFloorDbm);
    }
  }
}

TEST_CASE("configuration validation") {
  ChannelConfig c;
  CHECK_NOTHROW(validate(c));
  c.slots_per_window = c.packets_per_window_target - 1;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ChannelConfig{};
  c.noise_power_w = -1;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ChannelConfig{};
  c.tx_height_m = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = ChannelConfig{};
  c.noise_power_w = 0;
  CHECK_NOTHROW(validate(c));

  CHECK_THROWS_AS(validate(jammer(JammerKind::none, 1e-9)), ConfigError);
  CHECK_THROWS_AS(validate(jammer(JammerKind::benign_degraded, 1e-9)), ConfigError);
  JammerProfile j = jammer(JammerKind::random, 1e-9);
  j.duty_cycle = 1.5;
  CHECK_THROWS_AS(validate(j), ConfigError);
  j.duty_cycle = 0.5;
  j.sense_delay_slots = -1;
  CHECK_THROWS_AS(validate(j), ConfigError);
  CHECK(jammer(JammerKind::constant, 1).effective_duty() == 1.0);
}

TEST_CASE("jammer kind names round trip") {
  for (auto k : {JammerKind::none, JammerKind::benign_degraded, JammerKind::constant,
                 JammerKind::random, JammerKind::deceptive, JammerKind::reactive})
    CHECK(jammer_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(jammer_kind_from_string("smart"), ConfigError);
  CHECK_FALSE(is_attack(JammerKind::none));
  CHECK_FALSE(is_attack(JammerKind::benign_degraded));
  CHECK(is_attack(JammerKind::reactive));
}

TEST_CASE("generate_dataset") {
  ScenarioMix half;
  half.scenarios = {{"clean", ChannelConfig{}, JammerProfile{}, 0.5},
                    {"jammed", ChannelConfig{}, jammer(JammerKind::constant, 1e-8), 0.5}};

  SUBCASE("class balance follows the weights") {
    const Dataset d = generate_dataset(half, 10000, 11);
    CHECK(d.size() == 10000);
    const double mean = static_cast<double>(d.count_label(1)) / 10000.0;
    CHECK(std::abs(mean - 0.5) <= 0.02);
  }
  SUBCASE("single sample, single scenario") {
    ScenarioMix one;
    one.scenarios = {{"jammed", ChannelConfig{}, jammer(JammerKind::reactive, 1e-8), 1.0}};
    const Dataset d = generate_dataset(one, 1, 3);
    REQUIRE(d.size() == 1);
    CHECK(d.sample(0).label == 1);
  }
  SUBCASE("deterministic and independent of the worker count") {
    const Dataset a = generate_dataset(half, 500, 9, 1);
    CHECK(a == generate_dataset(half, 500, 9, 1));
    CHECK(a == generate_dataset(half, 500, 9, 3));
    CHECK_FALSE(a == generate_dataset(half, 500, 10, 1));
  }
  SUBCASE("provenance metadata") {
    const Dataset d = generate_dataset(half, 10, 77);
    CHECK(d.meta().at("seed") == "77");
    CHECK(d.meta().at("generator_config_hash") == mix_hash(half));
    CHECK(d.meta().at("n") == "10");
  }
  SUBCASE("zero weight scenarios never appear") {
    ScenarioMix skewed = half;
    skewed.scenarios[1].weight = 0.0;
    CHECK(generate_dataset(skewed, 300, 2).count_label(1) == 0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(generate_dataset(ScenarioMix{}, 10, 1), ConfigError);
    CHECK_THROWS_AS(generate_dataset(half, 0, 1), UsageError);
    ScenarioMix zero = half;
    for (auto& s : zero.scenarios) s.weight = 0.0;
    CHECK_THROWS_AS(generate_dataset(zero, 10, 1), ConfigError);
  }
}

TEST_CASE("canonical mix is balanced between attack and non-attack") {
  const ScenarioMix mix = canonical_mix();
  double attack = 0, total = 0;
  for (const auto& s : mix.scenarios) {
    total += s.weight;
    if (is_attack(s.jammer.kind)) attack += s.weight;
  }
  CHECK(attack / total == doctest::Approx(0.5));
  const Dataset d = canonical_dataset();
  CHECK(d.size() == kCanonicalSize);
  CHECK(std::abs(static_cast<double>(d.count_label(1)) / static_cast<double>(d.size()) - 0.5) <= 0.02);
}

TEST_CASE("scenario mix JSON") {
  const ScenarioMix mix = canonical_mix();
  const nlohmann::json doc = to_json(mix);
  CHECK(doc.at("schema_version") == kMixSchemaVersion);
  CHECK(mix_from_json(doc) == mix);
  CHECK(mix_hash(mix_from_json(doc)) == mix_hash(mix));

  SUBCASE("schema version is required") {
    nlohmann::json bad = doc;
    bad.erase("schema_version");
    CHECK_THROWS_AS(mix_from_json(bad), ConfigError);
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(mix_from_json(bad), ConfigError);
  }
  SUBCASE("invalid values are rejected") {
    nlohmann::json bad = doc;
    bad["scenarios"][0]["channel"]["distance_m"] = -1.0;
    CHECK_THROWS_AS(mix_from_json(bad), ConfigError);
    bad = doc;
    bad["scenarios"][2]["jammer"]["kind"] = "smart";
    CHECK_THROWS_AS(mix_from_json(bad), ConfigError);
    bad = doc;
    bad["scenarios"][0]["weight"] = "heavy";
    CHECK_THROWS_AS(mix_from_json(bad), ConfigError);
    bad = doc;
    bad["scenarios"] = nlohmann::json::array();
    CHECK_THROWS_AS(mix_from_json(bad), ConfigError);
  }
  SUBCASE("missing optional fields take defaults") {
    nlohmann::json lean = {{"schema_version", 1},
                           {"scenarios", {{{"name", "x"}, {"weight", 1.0}, {"jammer", {{"kind", "none"}}}}}}};
    const ScenarioMix m = mix_from_json(lean);
    REQUIRE(m.scenarios.size() == 1);
    CHECK(m.scenarios[0].channel == ChannelConfig{});
  }
}
