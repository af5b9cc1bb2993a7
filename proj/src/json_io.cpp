#include "rq/json_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

namespace rq {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::set<std::string>& required,
                  const std::set<std::string>& optional,
                  const std::string& where) {
  for (const auto& k : required)
    if (!j.contains(k))
      throw JsonError("missing key '" + k + "' in " + where);
  for (const auto& [k, v] : j.items())
    if (!required.contains(k) && !optional.contains(k))
      throw JsonError("unknown key '" + k + "' in " + where);
}

ServiceLaw parse_service(const json& j) {
  if (!j.is_object()) throw JsonError("'service' must be an object");
  const std::string kind = j.value("kind", "");
  if (kind == "exponential") {
    require_keys(j, {"kind", "mu"}, {}, "service");
    return ServiceLaw::exponential(j.at("mu").get<double>());
  }
  if (kind == "deterministic") {
    require_keys(j, {"kind", "b"}, {}, "service");
    return ServiceLaw::deterministic(j.at("b").get<double>());
  }
  if (kind == "erlang") {
    require_keys(j, {"kind", "k", "rate"}, {}, "service");
    return ServiceLaw::erlang(j.at("k").get<int>(),
                              j.at("rate").get<double>());
  }
  if (kind == "hyperexp") {
    require_keys(j, {"kind", "probs", "rates"}, {}, "service");
    return ServiceLaw::hyperexp(j.at("probs").get<std::vector<double>>(),
                                j.at("rates").get<std::vector<double>>());
  }
  throw JsonError("unknown service kind '" + kind + "'");
}

BatchLaw parse_batch(const json& j) {
  if (!j.is_object()) throw JsonError("'batch' must be an object");
  const std::string kind = j.value("kind", "");
  if (kind == "geometric_binomial") {
    require_keys(j, {"kind", "u1"}, {}, "batch");
    return BatchLaw::geometric_binomial(j.at("u1").get<double>());
  }
  if (kind == "explicit") {
    require_keys(j, {"kind", "pmf"}, {}, "batch");
    std::map<std::pair<int, int>, double> pmf;
    for (const auto& row : j.at("pmf")) {
      if (!row.is_array() || row.size() != 3)
        throw JsonError("batch pmf rows must be [m1, m2, p]");
      pmf[{row[0].get<int>(), row[1].get<int>()}] = row[2].get<double>();
    }
    return BatchLaw::explicit_pmf(std::move(pmf));
  }
  throw JsonError("unknown batch kind '" + kind + "'");
}

}  // namespace

ModelSpec parse_model(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw JsonError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.contains("variant")) throw JsonError("missing key 'variant'");
  const Variant v = variant_from_name(j.at("variant").get<std::string>());

  ModelSpec m;
  if (is_batch(v)) {
    require_keys(j, {"variant", "lambda", "batch", "service", "mu1_star",
                     "mu2_star", "xi", "p1"},
                 {}, "model");
    m = ModelSpec::batch_model(
        v, j.at("lambda").get<double>(), parse_batch(j.at("batch")),
        parse_service(j.at("service")), j.at("mu1_star").get<double>(),
        j.at("mu2_star").get<double>(), j.at("xi").get<double>(),
        j.at("p1").get<double>());
  } else {
    require_keys(j, {"variant", "lambda1", "lambda2", "service", "mu1_star",
                     "mu2_star", "xi"},
                 {}, "model");
    m = ModelSpec::single_model(
        v, j.at("lambda1").get<double>(), j.at("lambda2").get<double>(),
        parse_service(j.at("service")), j.at("mu1_star").get<double>(),
        j.at("mu2_star").get<double>(), j.at("xi").get<double>());
  }
  return m;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw JsonError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string model_to_json(const ModelSpec& m) {
  json j;
  j["variant"] = variant_name(m.variant);
  if (is_batch(m.variant)) {
    j["lambda"] = m.lambda;
    j["p1"] = m.p1;
    json b;
    if (m.batch.kind == BatchLaw::Kind::GeometricBinomial) {
      b["kind"] = "geometric_binomial";
      b["u1"] = m.batch.u1;
    } else {
      b["kind"] = "explicit";
      json rows = json::array();
      for (const auto& [mm, p] : m.batch.pmf)
        rows.push_back({mm.first, mm.second, p});
      b["pmf"] = rows;
    }
    j["batch"] = b;
  } else {
    j["lambda1"] = m.lambda1;
    j["lambda2"] = m.lambda2;
  }
  j["mu1_star"] = m.mu1_star;
  j["mu2_star"] = m.mu2_star;
  j["xi"] = m.xi;
  json s;
  switch (m.service.kind) {
    case ServiceLaw::Kind::Exponential:
      s = {{"kind", "exponential"}, {"mu", m.service.mu}};
      break;
    case ServiceLaw::Kind::Deterministic:
      s = {{"kind", "deterministic"}, {"b", m.service.b}};
      break;
    case ServiceLaw::Kind::Erlang:
      s = {{"kind", "erlang"}, {"k", m.service.erlang_k},
           {"rate", m.service.erlang_rate}};
      break;
    case ServiceLaw::Kind::HyperExp:
      s = {{"kind", "hyperexp"}, {"probs", m.service.hyper_probs},
           {"rates", m.service.hyper_rates}};
      break;
  }
  j["service"] = s;
  return j.dump(2);
}

std::string content_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw JsonError("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace rq
