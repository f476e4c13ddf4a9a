#include "rwre/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rwre {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw ConfigError("unknown key " + where + "." + key);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad or missing " + where + "." + key + ": " + e.what());
  }
}

template <class T>
void get_opt(const json& obj, const std::string& key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

EnvironmentLaw parse_law(const json& j) {
  if (!j.is_object()) throw ConfigError("law must be an object");
  reject_unknown(j, {"K", "generator", "rows", "weights", "alpha", "delta", "relax_ellipticity"},
                 "law");
  EnvironmentLaw law;
  law.stepset = StepSet(get<int>(j, "K", "law"));
  const auto gen = get<std::string>(j, "generator", "law");
  if (gen == "mixture") {
    FiniteMixture mix;
    mix.rows = get<std::vector<std::vector<double>>>(j, "rows", "law");
    mix.weights = get<std::vector<double>>(j, "weights", "law");
    law.generator = std::move(mix);
  } else if (gen == "dirichlet") {
    law.generator = Dirichlet{get<std::vector<double>>(j, "alpha", "law")};
  } else {
    throw ConfigError("law.generator must be \"mixture\" or \"dirichlet\"");
  }
  get_opt(j, "delta", "law", law.delta);
  get_opt(j, "relax_ellipticity", "law", law.relax_ellipticity);
  law.validate();
  return law;
}

Tolerances parse_tolerances(const json& j) {
  Tolerances t;
  if (j.is_null()) return t;
  if (!j.is_object()) throw ConfigError("tolerances must be an object");
  reject_unknown(j,
                 {"truncEps", "segmentTol", "potentialTol", "quadratureTol", "varianceRel",
                  "covarianceRel", "ratioLo", "ratioHi", "skewMax", "kurtMax", "meetingSumRel",
                  "alpha", "zMax", "minReplicas", "normalityMinReplicas", "bootstrapResamples"},
                 "tolerances");
  const std::string w = "tolerances";
  get_opt(j, "truncEps", w, t.truncEps);
  get_opt(j, "segmentTol", w, t.segmentTol);
  get_opt(j, "potentialTol", w, t.potentialTol);
  get_opt(j, "quadratureTol", w, t.quadratureTol);
  get_opt(j, "varianceRel", w, t.varianceRel);
  get_opt(j, "covarianceRel", w, t.covarianceRel);
  get_opt(j, "ratioLo", w, t.ratioLo);
  get_opt(j, "ratioHi", w, t.ratioHi);
  get_opt(j, "skewMax", w, t.skewMax);
  get_opt(j, "kurtMax", w, t.kurtMax);
  get_opt(j, "meetingSumRel", w, t.meetingSumRel);
  get_opt(j, "alpha", w, t.alpha);
  get_opt(j, "zMax", w, t.zMax);
  get_opt(j, "minReplicas", w, t.minReplicas);
  get_opt(j, "normalityMinReplicas", w, t.normalityMinReplicas);
  get_opt(j, "bootstrapResamples", w, t.bootstrapResamples);
  return t;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"law", "experiment", "tolerances"}, "config");
  if (!j.contains("law")) throw ConfigError("config needs a law section");
  ExperimentConfig cfg;
  cfg.law = parse_law(j.at("law"));
  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    if (!e.is_object()) throw ConfigError("experiment must be an object");
    reject_unknown(e, {"nList", "sGrid", "rList", "theta", "replicas", "seed"}, "experiment");
    get_opt(e, "nList", "experiment", cfg.nList);
    get_opt(e, "sGrid", "experiment", cfg.sGrid);
    get_opt(e, "rList", "experiment", cfg.rList);
    if (e.contains("theta"))
      cfg.theta = get<std::vector<double>>(e, "theta", "experiment");
    else
      cfg.theta.assign(cfg.rList.size(), 1.0);
    get_opt(e, "replicas", "experiment", cfg.replicas);
    get_opt(e, "seed", "experiment", cfg.masterSeed);
  }
  cfg.tol = parse_tolerances(j.contains("tolerances") ? j.at("tolerances") : json());
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json law_to_json(const EnvironmentLaw& law) {
  json j;
  j["K"] = law.stepset.K();
  if (const auto* mix = std::get_if<FiniteMixture>(&law.generator)) {
    j["generator"] = "mixture";
    j["rows"] = mix->rows;
    j["weights"] = mix->weights;
  } else {
    j["generator"] = "dirichlet";
    j["alpha"] = std::get<Dirichlet>(law.generator).alpha;
  }
  j["delta"] = law.delta;
  j["relax_ellipticity"] = law.relax_ellipticity;
  return j;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["law"] = law_to_json(cfg.law);
  j["experiment"] = {{"nList", cfg.nList},       {"sGrid", cfg.sGrid},
                     {"rList", cfg.rList},       {"theta", cfg.theta},
                     {"replicas", cfg.replicas}, {"seed", cfg.masterSeed}};
  const Tolerances& t = cfg.tol;
  j["tolerances"] = {{"truncEps", t.truncEps},
                     {"segmentTol", t.segmentTol},
                     {"potentialTol", t.potentialTol},
                     {"quadratureTol", t.quadratureTol},
                     {"varianceRel", t.varianceRel},
                     {"covarianceRel", t.covarianceRel},
                     {"ratioLo", t.ratioLo},
                     {"ratioHi", t.ratioHi},
                     {"skewMax", t.skewMax},
                     {"kurtMax", t.kurtMax},
                     {"meetingSumRel", t.meetingSumRel},
                     {"alpha", t.alpha},
                     {"zMax", t.zMax},
                     {"minReplicas", t.minReplicas},
                     {"normalityMinReplicas", t.normalityMinReplicas},
                     {"bootstrapResamples", t.bootstrapResamples}};
  return j;
}

std::string serialize_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2); }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.law == b.law && a.nList == b.nList && a.sGrid == b.sGrid && a.rList == b.rList &&
         a.theta == b.theta && a.replicas == b.replicas && a.masterSeed == b.masterSeed &&
         a.tol == b.tol;
}

}  // namespace rwre
