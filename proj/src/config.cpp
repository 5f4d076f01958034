#include "modpi/config.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace modpi {

using json = nlohmann::json;

namespace {

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_of(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class M>
json matrix_json(const M& A) {
  json rows = json::array();
  for (int i = 0; i < A.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < A.cols(); ++j) {
      if constexpr (std::is_same_v<typename M::Scalar, cplx>)
        r.push_back(cjson(A(i, j)));
      else
        r.push_back(A(i, j));
    }
    rows.push_back(r);
  }
  return rows;
}

template <class M>
M matrix_of(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + ": expected a list of rows");
  const int n = static_cast<int>(j.size()), m = static_cast<int>(j[0].size());
  M A(n, m);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != m)
      throw ConfigError(std::string(what) + ": ragged rows");
    for (int k = 0; k < m; ++k) {
      if constexpr (std::is_same_v<typename M::Scalar, cplx>)
        A(i, k) = cplx_of(j[i][k], what);
      else
        A(i, k) = j[i][k].get<double>();
    }
  }
  return A;
}

std::string gauge_text(const Gauge& g) {
  if (g.kind != Gauge::Kind::Custom) return g.name();
  std::ostringstream s;
  s.precision(17);
  s << "custom:" << g.c;
  return s.str();
}

json to_json(const RunConfig& c) {
  json j;
  j["schema"] = 1;
  j["physics"] = {{"hbar", c.params.hbar}, {"mass", c.params.mass}, {"omega", c.params.omega},
                  {"dims", c.params.dims}};
  j["lattice"] = {{"scales", c.lattice_scales}, {"lambda", nullptr}, {"lambda_tilde", nullptr}};
  if (c.lattice_explicit) {
    j["lattice"]["lambda"] = (*c.lattice_explicit)[0];
    j["lattice"]["lambda_tilde"] = (*c.lattice_explicit)[1];
  }
  j["gauge"] = gauge_text(c.gauge);
  j["regulator"] = {{"epsilon", c.epsilon}, {"rho", c.rho},
                    {"kind", c.regulator == Regulator::Identity ? "identity" : "complex_time"}};
  j["truncation"] = {{"tail_tol", c.trunc.tail_tol}, {"max_radius", c.trunc.max_radius},
                     {"winding_cut", c.winding_cut}, {"n_zak", c.n_zak}};
  j["slicing"] = {{"N", c.slices}, {"order", c.order}, {"budget", c.budget}};
  j["states"] = {{"z0", cjson(c.z0)}, {"zf", cjson(c.zf)}};
  j["theta"] = {{"dims", c.theta.dims}, {"points", c.theta.points},
                {"tolerance", c.theta.tolerance}, {"tau", nullptr}};
  if (c.theta.tau) j["theta"]["tau"] = matrix_json(*c.theta.tau);
  json ends = json::array();
  for (const auto& e : c.propagate.endpoints) ends.push_back(e);
  j["propagate"] = {{"T", c.propagate.T}, {"endpoints", ends}, {"tolerance", c.propagate.tolerance},
                    {"sectors", c.propagate.sectors}, {"wmax", c.propagate.wmax}};
  j["dynamics"] = {{"T", c.dynamics.T}, {"X0", c.dynamics.X0}, {"Xf", c.dynamics.Xf},
                   {"W", c.dynamics.W}, {"samples", c.dynamics.samples},
                   {"tolerance", c.dynamics.tolerance}};
  j["legendre"] = {{"M", nullptr}, {"tolerance", c.legendre.tolerance}};
  if (c.legendre.M) j["legendre"]["M"] = matrix_json(*c.legendre.M);
  j["limit"] = {{"ladder", c.limit.ladder}, {"T", c.limit.T}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  const auto& ph = j.at("physics");
  c.params = {ph.at("hbar").get<double>(), ph.at("mass").get<double>(),
              ph.at("omega").get<double>(), ph.at("dims").get<int>()};
  const auto& lat = j.at("lattice");
  c.lattice_scales = lat.at("scales").get<std::vector<double>>();
  const bool hl = !lat.at("lambda").is_null(), ht = !lat.at("lambda_tilde").is_null();
  if (hl != ht) throw ConfigError("lattice: give both lambda and lambda_tilde or neither");
  if (hl) c.lattice_explicit = std::array<double, 2>{lat["lambda"].get<double>(), lat["lambda_tilde"].get<double>()};
  c.gauge = Gauge::parse(j.at("gauge").get<std::string>());
  const auto& rg = j.at("regulator");
  c.epsilon = rg.at("epsilon").get<double>();
  c.rho = rg.at("rho").get<std::vector<double>>();
  const auto kind = rg.at("kind").get<std::string>();
  if (kind == "identity")
    c.regulator = Regulator::Identity;
  else if (kind == "complex_time")
    c.regulator = Regulator::ComplexTime;
  else
    throw ConfigError("regulator.kind must be identity or complex_time");
  const auto& tr = j.at("truncation");
  c.trunc = {tr.at("tail_tol").get<double>(), tr.at("max_radius").get<int>()};
  c.winding_cut = tr.at("winding_cut").get<int>();
  c.n_zak = tr.at("n_zak").get<int>();
  const auto& sl = j.at("slicing");
  c.slices = sl.at("N").get<std::vector<int>>();
  c.order = sl.at("order").get<int>();
  c.budget = sl.at("budget").get<double>();
  c.z0 = cplx_of(j.at("states").at("z0"), "states.z0");
  c.zf = cplx_of(j.at("states").at("zf"), "states.zf");
  const auto& th = j.at("theta");
  c.theta.dims = th.at("dims").get<std::vector<int>>();
  c.theta.points = th.at("points").get<int>();
  c.theta.tolerance = th.at("tolerance").get<double>();
  if (!th.at("tau").is_null()) c.theta.tau = matrix_of<CMat>(th["tau"], "theta.tau");
  const auto& pr = j.at("propagate");
  c.propagate.T = pr.at("T").get<std::vector<double>>();
  c.propagate.endpoints.clear();
  for (const auto& e : pr.at("endpoints")) c.propagate.endpoints.push_back(e.get<std::array<double, 4>>());
  c.propagate.tolerance = pr.at("tolerance").get<double>();
  c.propagate.sectors = pr.at("sectors").get<bool>();
  c.propagate.wmax = pr.at("wmax").get<int>();
  const auto& dy = j.at("dynamics");
  c.dynamics.T = dy.at("T").get<double>();
  c.dynamics.X0 = dy.at("X0").get<std::array<double, 2>>();
  c.dynamics.Xf = dy.at("Xf").get<std::array<double, 2>>();
  c.dynamics.W = dy.at("W").get<std::array<int, 2>>();
  c.dynamics.samples = dy.at("samples").get<int>();
  c.dynamics.tolerance = dy.at("tolerance").get<double>();
  const auto& lg = j.at("legendre");
  if (!lg.at("M").is_null()) c.legendre.M = matrix_of<Mat>(lg["M"], "legendre.M");
  c.legendre.tolerance = lg.at("tolerance").get<double>();
  c.limit.ladder = j.at("limit").at("ladder").get<std::vector<double>>();
  c.limit.T = j.at("limit").at("T").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<int>();
  c.out_dir = j.at("output").at("dir").get<std::string>();
  return c;
}

// Keys the file may not introduce; nullable leaves accept any value.
void check_keys(const json& user, const json& defaults, const std::string& where) {
  if (!user.is_object()) throw ConfigError(where.empty() ? "config must be a JSON object" : where + ": expected an object");
  for (const auto& [k, v] : user.items()) {
    const std::string path = where.empty() ? k : where + "." + k;
    if (!defaults.contains(k)) throw ConfigError("unknown config key '" + path + "'");
    if (defaults[k].is_object()) check_keys(v, defaults[k], path);
  }
}

template <class T>
void require_sorted(const std::vector<T>& v, const char* what) {
  if (v.empty()) throw ConfigError(std::string(what) + " must be nonempty");
  if (!std::is_sorted(v.begin(), v.end())) throw ConfigError(std::string(what) + " must be sorted ascending");
}

RunConfig build(json j) {
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  params.validate();
  require_sorted(lattice_scales, "lattice.scales");
  for (double s : lattice_scales)
    if (!(s > 0)) throw ConfigError("lattice.scales must be positive");
  if (lattice_explicit) {
    // ModularLattice throws InvalidParams when lambda lambda_tilde != 2 pi hbar
    ModularLattice(Vec::Constant(params.dims, (*lattice_explicit)[0]),
                   Vec::Constant(params.dims, (*lattice_explicit)[1]), params);
  }
  require_sorted(rho, "regulator.rho");
  if (!(rho.front() > 0)) throw ConfigError("regulator.rho must be positive");
  if (!(epsilon > 0)) throw ConfigError("regulator.epsilon must be positive");
  if (!(trunc.tail_tol > 0) || trunc.max_radius < 1) throw ConfigError("truncation out of range");
  if (winding_cut < 0 || n_zak < 1) throw ConfigError("truncation out of range");
  require_sorted(slices, "slicing.N");
  if (slices.front() < 1 || order < 2 || !(budget > 0)) throw ConfigError("slicing out of range");
  require_sorted(theta.dims, "theta.dims");
  for (int D : theta.dims)
    if (D < 1 || D > 2) throw ConfigError("theta.dims entries must be 1 or 2");
  if (theta.points < 1) throw ConfigError("theta.points must be positive");
  require_sorted(propagate.T, "propagate.T");
  if (propagate.endpoints.empty()) throw ConfigError("propagate.endpoints must be nonempty");
  if (propagate.wmax < 0) throw ConfigError("propagate.wmax must be non-negative");
  if (dynamics.samples < 1) throw ConfigError("dynamics.samples must be positive");
  require_sorted(limit.ladder, "limit.ladder");
  if (!(limit.ladder.front() > 0)) throw ConfigError("limit.ladder must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

AmplitudeRequest RunConfig::request(double T, double lattice_scale) const {
  AmplitudeRequest r = AmplitudeRequest::make(params, T, lattice_scale);
  if (lattice_explicit)
    r.lattice = ModularLattice(Vec::Constant(params.dims, (*lattice_explicit)[0]),
                               Vec::Constant(params.dims, (*lattice_explicit)[1]), params);
  r.gauge = gauge;
  r.epsilon = epsilon;
  r.trunc = trunc;
  r.winding_cut = winding_cut;
  r.regulator = regulator;
  return r;
}

RunConfig config_from_json_text(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  json j = to_json(RunConfig{});
  check_keys(user, j, "");
  if (user.contains("schema") && user["schema"] != 1) throw ConfigError("unsupported config schema");
  j.merge_patch(user);
  // merge_patch drops keys set to null; put the nullable ones back
  for (const auto& [sec, key] : {std::pair{"lattice", "lambda"}, {"lattice", "lambda_tilde"},
                                 {"theta", "tau"}, {"legendre", "M"}})
    if (!j[sec].contains(key)) j[sec][key] = nullptr;
  RunConfig c = build(j);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json user = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
      user = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq), raw = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // bare strings, e.g. gauge=schrodinger
    }
    json* node = &user;
    std::stringstream ks(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ks, part, '.')) parts.push_back(part);
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
  }
  return config_from_json_text(user.dump());
}

std::string config_to_json_text(const RunConfig& c) { return to_json(c).dump(2); }

}  // namespace modpi
