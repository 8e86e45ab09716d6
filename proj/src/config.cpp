#include "nsalpha/config.hpp"

#include "nsalpha/mollifier.hpp"
#include "nsalpha/particles.hpp"
#include "nsalpha/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nsalpha {

using nlohmann::json;

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Walks one JSON object, reading known keys and recording every problem.
class Section {
 public:
  Section(const json& node, std::string path, std::vector<std::string>& violations)
      : node_(node), path_(std::move(path)), violations_(violations) {
    if (!node_.is_object()) fail("", "must be an object");
  }

  ~Section() {
    if (!node_.is_object()) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) violations_.push_back("unknown key '" + qualified(key) + "'");
    }
  }

  [[nodiscard]] bool has(const std::string& key) {
    seen_.insert(key);
    return node_.is_object() && node_.contains(key) && !node_.at(key).is_null();
  }

  const json& at(const std::string& key) { return node_.at(key); }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) return fail(key, "must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) return fail(key, "must be an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (!v.is_number_unsigned()) return fail(key, "must be a non-negative integer");
      out = v.get<Int>();
    } else {
      out = v.get<Int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!at(key).is_boolean()) return fail(key, "must be true or false");
    out = at(key).get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!at(key).is_string()) return fail(key, "must be a string");
    out = at(key).get<std::string>();
  }

  void fail(const std::string& key, const std::string& message) {
    violations_.push_back((key.empty() ? (path_.empty() ? "config" : path_) : qualified(key)) + " " + message);
  }

  [[nodiscard]] std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& node_;
  std::string path_;
  std::vector<std::string>& violations_;
  std::set<std::string> seen_;
};

bool read_vec3(const json& v, Vec3& out) {
  if (!v.is_array() || v.size() != 3) return false;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) return false;
    out(i) = v[i].get<double>();
  }
  return out.allFinite();
}

bool read_vec3i(const json& v, Vec3i& out) {
  if (!v.is_array() || v.size() != 3) return false;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number_integer()) return false;
    out(i) = v[i].get<int>();
  }
  return true;
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }
json vec_json(const Vec3i& v) { return json::array({v(0), v(1), v(2)}); }

void parse_noise(const json& node, ExperimentConfig& c, std::vector<std::string>& violations) {
  if (!node.is_array()) {
    violations.push_back("noise must be a list of terms");
    return;
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string path = "noise[" + std::to_string(i) + "]";
    Section s(node[i], path, violations);
    std::string type;
    s.string("type", type);
    if (type == "constant") {
      ConstantNoise term;
      if (!s.has("a") || !read_vec3(s.at("a"), term.a)) s.fail("a", "must be a list of 3 numbers");
      c.noise.emplace_back(term);
    } else if (type == "single_mode") {
      SingleModeNoise term;
      if (!s.has("eps") || !read_vec3(s.at("eps"), term.amplitude)) s.fail("eps", "must be a list of 3 numbers");
      if (!s.has("kappa") || !read_vec3i(s.at("kappa"), term.wavevector)) {
        s.fail("kappa", "must be a list of 3 integers");
      }
      std::string phase = "cos";
      s.string("phase", phase);
      if (phase == "sin") {
        term.phase = Phase::Sin;
      } else if (phase != "cos") {
        s.fail("phase", "must be \"cos\" or \"sin\"");
      }
      try {
        NoiseModel({term});
      } catch (const std::invalid_argument& e) {
        violations.push_back(path + ": " + e.what());
      }
      c.noise.emplace_back(term);
    } else {
      s.fail("type", "must be \"constant\" or \"single_mode\"");
    }
  }
}

void parse_norms(const json& node, ExperimentConfig& c, std::vector<std::string>& violations) {
  if (!node.is_array() || node.empty()) {
    violations.push_back("norms must be a non-empty list");
    return;
  }
  c.norms.clear();
  for (const auto& v : node) {
    if (v.is_number()) {
      c.norms.push_back({NormId::Kind::Sobolev, v.get<double>()});
    } else if (v == "L2") {
      c.norms.push_back({NormId::Kind::Sobolev, 0.0});
    } else if (v == "sup") {
      c.norms.push_back({NormId::Kind::Sup, 0.0});
    } else if (v == "eta") {
      c.norms.push_back({NormId::Kind::Sobolev, c.eta});
    } else {
      violations.push_back("norms entries must be numbers (Sobolev index s), \"L2\", \"sup\" or \"eta\"; got " +
                           v.dump());
    }
  }
}

void parse_initial_condition(const json& node, ExperimentConfig& c, std::vector<std::string>& violations) {
  Section s(node, "initial_condition", violations);
  InitialCondition& ic = c.initial_condition;
  s.string("id", ic.id);
  s.number("amplitude", ic.amplitude);
  static const std::set<std::string> known{"zero", "single_mode", "taylor_green", "abc", "modes"};
  if (!known.contains(ic.id)) s.fail("id", "must be one of zero, single_mode, taylor_green, abc, modes");
  if (s.has("modes")) {
    const json& list = s.at("modes");
    if (!list.is_array()) return s.fail("modes", "must be a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "initial_condition.modes[" + std::to_string(i) + "]";
      Section m(list[i], path, violations);
      FourierMode mode;
      if (!m.has("k") || !read_vec3i(m.at("k"), mode.k)) m.fail("k", "must be a list of 3 integers");
      if (m.has("cos") && !read_vec3(m.at("cos"), mode.cos_coeff)) m.fail("cos", "must be a list of 3 numbers");
      if (m.has("sin") && !read_vec3(m.at("sin"), mode.sin_coeff)) m.fail("sin", "must be a list of 3 numbers");
      const Vec3 k = mode.k.cast<double>();
      if (std::abs(k.dot(mode.cos_coeff)) + std::abs(k.dot(mode.sin_coeff)) > 1e-12) {
        violations.push_back(path + " coefficients must be orthogonal to k (divergence-free vorticity)");
      }
      if (mode.k.cwiseAbs().maxCoeff() >= c.M / 2) {
        violations.push_back(path + " wavevector must satisfy |k_j| < M/2");
      }
      ic.modes.push_back(mode);
    }
  }
  if (ic.id == "modes" && ic.modes.empty()) s.fail("modes", "must be non-empty when id is \"modes\"");
}

bool on_step_grid(double t, double dt) {
  try {
    step_index_of(t, dt);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

}  // namespace

std::string NormId::name() const {
  if (kind == Kind::Sup) return "sup";
  if (s == 0.0) return "L2";
  return "H" + format_number(s);
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig c;
  c.nu = nu;
  c.alpha = alpha;
  c.dt = dt;
  c.grid = grid();
  c.noise = noise_model();
  c.integrating_factor = integrating_factor;
  c.transpose_stretching = transpose_stretching;
  c.w_seed = seeds.w_seed();
  c.substeps = substeps;
  return c;
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<double> default_snapshots(double T, double dt) {
  const std::uint64_t steps = step_index_of(T, dt);
  const std::uint64_t stride = std::max<std::uint64_t>(1, steps / 10);
  std::vector<double> out;
  for (std::uint64_t s = 0; s < steps; s += stride) out.push_back(static_cast<double>(s) * dt);
  out.push_back(T);
  return out;
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  std::vector<std::string> v;
  {
    Section root(doc, "", v);
    if (!doc.is_object()) throw ConfigError(std::move(v));

    if (root.has("grid")) {
      Section s(root.at("grid"), "grid", v);
      s.integer("M", c.M);
      s.number("dealias_fraction", c.dealias_fraction);
      if (c.M < 4 || c.M % 2 != 0) s.fail("M", "must be even and >= 4");
      if (!(c.dealias_fraction > 0.0 && c.dealias_fraction <= 1.0)) s.fail("dealias_fraction", "must lie in (0, 1]");
    }
    if (root.has("kernel")) {
      Section s(root.at("kernel"), "kernel", v);
      s.number("alpha", c.alpha);
    }
    if (!(c.alpha > 0.0)) v.push_back("kernel.alpha must be > 0");
    root.number("nu", c.nu);
    if (c.nu < 0.0) v.push_back("nu must be >= 0");

    if (root.has("regime")) {
      Section s(root.at("regime"), "regime", v);
      s.number("p", c.p);
      s.number("alpha_sobolev", c.alpha_sobolev);
      s.number("eta", c.eta);
      s.number("beta", c.beta);
    }
    const BetaBound bound = beta_bound_check(c.p, c.alpha_sobolev, c.beta);
    if (bound.p_slack <= 0) v.push_back("regime.p must be > 6 (slack " + format_number(bound.p_slack) + ")");
    if (bound.alpha_lower_slack <= 0 || bound.alpha_upper_slack <= 0) {
      v.push_back("regime.alpha_sobolev must be in (6/p, 1) = (" + format_number(6.0 / c.p) + ", 1)");
    }
    if (bound.beta_lower_slack <= 0 || bound.beta_upper_slack <= 0) {
      v.push_back("beta must be in (0, 1/(3+α−6/p)) = (0, " + format_number(bound.beta_upper) + "); got " +
                  format_number(c.beta) + ", slack " +
                  format_number(std::min(bound.beta_lower_slack, bound.beta_upper_slack)));
    }

    bool explicit_snapshots = false;
    if (root.has("time")) {
      Section s(root.at("time"), "time", v);
      s.number("T", c.T);
      s.number("dt", c.dt);
      if (s.has("snapshots")) {
        explicit_snapshots = true;
        const json& list = s.at("snapshots");
        if (!list.is_array()) {
          s.fail("snapshots", "must be a list of times");
        } else {
          for (const auto& t : list) {
            if (!t.is_number()) {
              s.fail("snapshots", "entries must be numbers");
              break;
            }
            c.snapshots.push_back(t.get<double>());
          }
        }
      }
    }
    const bool time_ok = c.T > 0.0 && c.dt > 0.0 && on_step_grid(c.T, c.dt);
    if (!(c.T > 0.0)) v.push_back("time.T must be > 0");
    if (!(c.dt > 0.0)) v.push_back("time.dt must be > 0");
    if (c.T > 0.0 && c.dt > 0.0 && !time_ok) v.push_back("time.T must be a multiple of time.dt");
    if (time_ok) {
      if (!explicit_snapshots) c.snapshots = default_snapshots(c.T, c.dt);
      for (double t : c.snapshots) {
        if (t < 0.0 || t > c.T + 1e-12 || !on_step_grid(t, c.dt)) {
          v.push_back("time.snapshots entry " + format_number(t) + " is not a step-grid time in [0, T]");
        }
      }
    }

    if (root.has("particles")) {
      Section s(root.at("particles"), "particles", v);
      if (s.has("lattice_sides")) {
        const json& list = s.at("lattice_sides");
        c.lattice_sides.clear();
        if (!list.is_array() || list.empty()) {
          s.fail("lattice_sides", "must be a non-empty list of integers");
        } else {
          for (const auto& n : list) {
            if (!n.is_number_integer() || n.get<int>() < 1) {
              s.fail("lattice_sides", "entries must be integers >= 1");
              break;
            }
            c.lattice_sides.push_back(n.get<int>());
          }
        }
      }
      s.integer("grid_M", c.particle_grid);
      if (c.particle_grid != 0 && (c.particle_grid < 4 || c.particle_grid % 2 != 0)) {
        s.fail("grid_M", "must be 0 (automatic) or even and >= 4");
      }
    }

    if (root.has("noise")) parse_noise(root.at("noise"), c, v);

    if (root.has("seeds")) {
      Section s(root.at("seeds"), "seeds", v);
      s.integer("master", c.seeds.master);
      if (s.has("W")) {
        std::uint64_t w = 0;
        s.integer("W", w);
        c.seeds.w = w;
      }
      if (s.has("B")) {
        std::uint64_t b = 0;
        s.integer("B", b);
        c.seeds.b = b;
      }
    }

    if (root.has("norms")) parse_norms(root.at("norms"), c, v);
    if (root.has("initial_condition")) parse_initial_condition(root.at("initial_condition"), c, v);

    if (root.has("solver")) {
      Section s(root.at("solver"), "solver", v);
      s.boolean("integrating_factor", c.integrating_factor);
      s.boolean("transpose_stretching", c.transpose_stretching);
      s.integer("substeps", c.substeps);
      if (c.substeps < 1) s.fail("substeps", "must be >= 1");
    }

    if (root.has("flowmap")) {
      Section s(root.at("flowmap"), "flowmap", v);
      s.integer("labels_per_axis", c.flowmap.labels_per_axis);
      s.integer("replicas", c.flowmap.replicas);
      s.number("T", c.flowmap.T);
      s.integer("max_mode", c.flowmap.max_mode);
      s.integer("track_stride", c.flowmap.track_stride);
    }
    const FlowmapSettings& f = c.flowmap;
    if (f.labels_per_axis < 1) v.push_back("flowmap.labels_per_axis must be >= 1");
    if (f.replicas < 2) v.push_back("flowmap.replicas must be >= 2");
    if (f.max_mode < 0 || f.max_mode >= c.M / 2) v.push_back("flowmap.max_mode must be in [0, M/2)");
    if (f.track_stride < 1 || f.track_stride > 4) v.push_back("flowmap.track_stride must be in [1, 4]");
    if (c.dt > 0.0 && (!(f.T > 0.0) || !on_step_grid(f.T, c.dt))) {
      v.push_back("flowmap.T must be a positive multiple of time.dt");
    }
  }
  if (!v.empty()) throw ConfigError(std::move(v));
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  return parse_config(doc);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read " + path.string()});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

json to_json(const ExperimentConfig& c) {
  json noise = json::array();
  for (const auto& term : c.noise) {
    if (const auto* k = std::get_if<ConstantNoise>(&term)) {
      noise.push_back({{"type", "constant"}, {"a", vec_json(k->a)}});
    } else {
      const auto& m = std::get<SingleModeNoise>(term);
      noise.push_back({{"type", "single_mode"},
                       {"eps", vec_json(m.amplitude)},
                       {"kappa", vec_json(m.wavevector)},
                       {"phase", m.phase == Phase::Cos ? "cos" : "sin"}});
    }
  }
  json norms = json::array();
  for (const auto& n : c.norms) {
    if (n.kind == NormId::Kind::Sup) {
      norms.push_back("sup");
    } else if (n.s == 0.0) {
      norms.push_back("L2");
    } else {
      norms.push_back(n.s);
    }
  }
  json modes = json::array();
  for (const auto& m : c.initial_condition.modes) {
    modes.push_back({{"k", vec_json(m.k)}, {"cos", vec_json(m.cos_coeff)}, {"sin", vec_json(m.sin_coeff)}});
  }
  return {
      {"grid", {{"M", c.M}, {"dealias_fraction", c.dealias_fraction}}},
      {"kernel", {{"alpha", c.alpha}}},
      {"nu", c.nu},
      {"regime", {{"p", c.p}, {"alpha_sobolev", c.alpha_sobolev}, {"eta", c.eta}, {"beta", c.beta}}},
      {"time", {{"T", c.T}, {"dt", c.dt}, {"snapshots", c.snapshots}}},
      {"particles", {{"lattice_sides", c.lattice_sides}, {"grid_M", c.particle_grid}}},
      {"noise", noise},
      {"seeds", {{"master", c.seeds.master}, {"W", c.seeds.w_seed()}, {"B", c.seeds.b_seed()}}},
      {"norms", norms},
      {"initial_condition", {{"id", c.initial_condition.id}, {"amplitude", c.initial_condition.amplitude}, {"modes", modes}}},
      {"solver",
       {{"integrating_factor", c.integrating_factor},
        {"transpose_stretching", c.transpose_stretching},
        {"substeps", c.substeps}}},
      {"flowmap",
       {{"labels_per_axis", c.flowmap.labels_per_axis},
        {"replicas", c.flowmap.replicas},
        {"T", c.flowmap.T},
        {"max_mode", c.flowmap.max_mode},
        {"track_stride", c.flowmap.track_stride}}},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SpectralField initial_vorticity(const InitialCondition& ic, const GridSpec& grid) {
  const double a = ic.amplitude;
  auto fn = [&](const Vec3& x) -> Vec3 {
    using std::cos, std::sin;
    if (ic.id == "zero") return Vec3::Zero();
    if (ic.id == "single_mode") return a * Vec3(0, 0, cos(x(0)));
    if (ic.id == "taylor_green") {
      return a * Vec3(-cos(x(0)) * sin(x(1)) * sin(x(2)), -sin(x(0)) * cos(x(1)) * sin(x(2)),
                      2.0 * sin(x(0)) * sin(x(1)) * cos(x(2)));
    }
    if (ic.id == "abc") return a * Vec3(sin(x(2)) + cos(x(1)), sin(x(0)) + cos(x(2)), sin(x(1)) + cos(x(0)));
    if (ic.id == "modes") {
      Vec3 w = Vec3::Zero();
      for (const auto& m : ic.modes) {
        const double phase = m.k.cast<double>().dot(x);
        w += m.cos_coeff * cos(phase) + m.sin_coeff * sin(phase);
      }
      return a * w;
    }
    throw std::invalid_argument("initial condition: unknown id '" + ic.id + "'");
  };
  return forward_transform(sample_field(grid, fn));
}

}  // namespace nsalpha
