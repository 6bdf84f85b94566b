#include "redq/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "redq/detail/text.hpp"
#include "redq/error.hpp"

namespace redq {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(std::string_view key, const std::string& what) {
  throw ValidationError(std::string(key) + ": " + what);
}

[[noreturn]] void malformed(std::string_view key, const std::string& what) {
  throw ParseError("key '" + std::string(key) + "': " + what);
}

unsigned get_count(const json& j, std::string_view key) {
  const json& v = j.at(std::string(key));
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) malformed(key, "expected a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x > 0xffffffffULL) malformed(key, "value out of range");
  return static_cast<unsigned>(x);
}

std::string get_string(const json& j, std::string_view key) {
  const json& v = j.at(std::string(key));
  if (!v.is_string()) malformed(key, "expected a string");
  return v.get<std::string>();
}

template <class F>
auto keyed(std::string_view key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    if (std::string_view(e.what()).starts_with("key '")) throw;
    malformed(key, e.what());
  } catch (const ValidationError& e) {
    invalid(key, e.what());
  }
}

}  // namespace

void validate(const SystemConfig& c) {
  if (c.n == 0) invalid("n", "must be >= 1");
  if (c.n > kMaxServers) invalid("n", "must be <= 64");
  if (c.k == 0) invalid("k", "must be >= 1");
  if (c.k > c.n) invalid("k", "k exceeds n");
  if (c.m) {
    if (*c.m > c.n) invalid("m", "eligible-set size exceeds n");
    if (*c.m < c.k) invalid("m", "eligible-set size is below k");
  }
  try {
    validate_request_degree(c.request_degree, c.k, c.eligible_count());
  } catch (const InvalidRequestDegree& e) {
    const std::string what = e.what();
    if (what.find("exceeds") != std::string::npos) {
      invalid("request_degree", "request degree exceeds eligible set (" + what + ")");
    }
    invalid("request_degree", what);
  }
  keyed("arrivals", [&] { validate(c.arrivals); });
  const bool no_arrivals = std::holds_alternative<NoArrivals>(c.arrivals);
  if (std::holds_alternative<SaturatedRegime>(c.regime) && !no_arrivals) {
    invalid("arrivals", "saturated regime requires arrivals 'none'");
  }
  if (c.replications == 0) invalid("replications", "must be >= 1");
  if (const auto* b = std::get_if<BatchHorizon>(&c.horizon); b && b->batches == 0) {
    invalid("horizon", "batch count must be >= 1");
  }
  if (const auto* t = std::get_if<TimeHorizon>(&c.horizon); t && !(t->time > 0 && std::isfinite(t->time))) {
    invalid("horizon", "time must be > 0");
  }
}

SystemConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  static const std::set<std::string> known{"n",       "k",        "request_degree", "buffer_mode", "dispatch",
                                           "service", "removal",  "arrivals",       "regime",      "m",
                                           "seed",    "replications", "horizon"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) malformed(key, "unknown key");
  }
  for (const char* required : {"n", "k", "request_degree", "service"}) {
    if (!j.contains(required)) malformed(required, "missing required key");
  }

  SystemConfig c;
  c.n = get_count(j, "n");
  c.k = get_count(j, "k");

  const json& rd = j.at("request_degree");
  if (rd.is_array()) {
    PerBatchDegrees list;
    for (const json& v : rd) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        malformed("request_degree", "expected non-negative integers");
      }
      list.degrees.push_back(v.get<unsigned>());
    }
    c.request_degree = std::move(list);
  } else {
    c.request_degree = FixedDegree{get_count(j, "request_degree")};
  }

  if (j.contains("buffer_mode")) {
    const auto mode = get_string(j, "buffer_mode");
    if (mode == "central") {
      c.buffer_mode = BufferMode::kCentral;
    } else if (mode == "distributed") {
      c.buffer_mode = BufferMode::kDistributed;
    } else {
      malformed("buffer_mode", "expected 'central' or 'distributed'");
    }
  }
  if (j.contains("dispatch")) {
    c.dispatch = keyed("dispatch", [&] { return parse_dispatch_policy(get_string(j, "dispatch")); });
  }
  c.service = keyed("service", [&] { return parse_distribution(get_string(j, "service")); });
  if (j.contains("removal")) {
    c.removal = keyed("removal", [&] { return parse_distribution(get_string(j, "removal")); });
  }

  if (j.contains("arrivals")) {
    const json& a = j.at("arrivals");
    if (a.is_array()) {
      TraceArrivals trace;
      for (const json& v : a) {
        if (!v.is_number()) malformed("arrivals", "trace entries must be numbers");
        trace.times.push_back(v.get<double>());
      }
      c.arrivals = std::move(trace);
    } else {
      std::string text = get_string(j, "arrivals");
      const auto trimmed = detail::trim(text);
      if (trimmed.starts_with("trace(") && !base_dir.empty()) {
        const auto call = detail::parse_call(trimmed);
        if (call.args.size() == 1 && std::filesystem::path(call.args[0]).is_relative()) {
          text = "trace(" + (base_dir / call.args[0]).string() + ")";
        }
      }
      c.arrivals = keyed("arrivals", [&] { return parse_arrival_process(text); });
    }
  }

  if (j.contains("regime")) {
    const json& r = j.at("regime");
    if (r.is_object()) {
      if (!r.contains("saturated")) malformed("regime", "expected {\"saturated\": B0}");
      const json& b0 = r.at("saturated");
      if (!b0.is_number_integer() || b0.get<std::int64_t>() < 1) malformed("regime", "backlog must be >= 1");
      c.regime = SaturatedRegime{b0.get<std::uint64_t>()};
    } else {
      c.regime = keyed("regime", [&] { return parse_regime(get_string(j, "regime")); });
    }
  }
  if (j.contains("m") && !j.at("m").is_null()) c.m = get_count(j, "m");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      malformed("seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("replications")) c.replications = get_count(j, "replications");
  if (j.contains("horizon")) {
    const json& h = j.at("horizon");
    if (h.is_number_integer()) {
      if (h.get<std::int64_t>() < 1) malformed("horizon", "batch count must be >= 1");
      c.horizon = BatchHorizon{h.get<std::uint64_t>()};
    } else if (h.is_object() && h.contains("batches")) {
      if (!h.at("batches").is_number_integer() || h.at("batches").get<std::int64_t>() < 1) {
        malformed("horizon", "batch count must be >= 1");
      }
      c.horizon = BatchHorizon{h.at("batches").get<std::uint64_t>()};
    } else if (h.is_object() && h.contains("time")) {
      if (!h.at("time").is_number()) malformed("horizon", "time must be a number");
      c.horizon = TimeHorizon{h.at("time").get<double>()};
    } else {
      malformed("horizon", "expected an integer, {\"batches\": N} or {\"time\": T}");
    }
  }

  validate(c);
  return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const SystemConfig& c) {
  json j;
  j["n"] = c.n;
  j["k"] = c.k;
  if (const auto* f = std::get_if<FixedDegree>(&c.request_degree)) {
    j["request_degree"] = f->r;
  } else {
    j["request_degree"] = std::get<PerBatchDegrees>(c.request_degree).degrees;
  }
  j["buffer_mode"] = std::string(to_string(c.buffer_mode));
  j["dispatch"] = std::string(to_string(c.dispatch));
  j["service"] = to_string(c.service);
  j["removal"] = to_string(c.removal);
  if (const auto* t = std::get_if<TraceArrivals>(&c.arrivals)) {
    j["arrivals"] = t->times;
  } else {
    j["arrivals"] = to_string(c.arrivals);
  }
  j["regime"] = to_string(c.regime);
  if (c.m) {
    j["m"] = *c.m;
  } else {
    j["m"] = nullptr;
  }
  j["seed"] = c.seed;
  j["replications"] = c.replications;
  if (const auto* b = std::get_if<BatchHorizon>(&c.horizon)) {
    j["horizon"] = json{{"batches", b->batches}};
  } else {
    j["horizon"] = json{{"time", std::get<TimeHorizon>(c.horizon).time}};
  }
  return j;
}

void apply_seed_override(SystemConfig& config) {
  const char* env = std::getenv("REDQ_SEED");
  if (env == nullptr || *env == '\0') return;
  const std::string_view text(env);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("REDQ_SEED: expected a non-negative integer, got '" + std::string(text) + "'");
  }
  config.seed = seed;
}

}  // namespace redq
