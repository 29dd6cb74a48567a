#include "config.hpp"

#include <cmath>
#include <fstream>

namespace svx::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, "must be finite");
  return d;
}

double positive(const json& v, const std::string& field) {
  const double d = get_number(v, field);
  if (!(d > 0.0)) fail(field, "must be positive");
  return d;
}

Index get_index(const json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  return v.get<Index>();
}

std::array<Index, 3> get_triple(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) fail(field, "expected an array of 3 integers");
  return {get_index(v[0], field + "[0]"), get_index(v[1], field + "[1]"), get_index(v[2], field + "[2]")};
}

int get_axis(const json& v, const std::string& field) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
  } else if (v.is_number_integer()) {
    const int a = v.get<int>();
    if (a >= 0 && a <= 2) return a;
  }
  fail(field, "expected \"x\", \"y\" or \"z\"");
}

int get_sign(const json& v, const std::string& field) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "+") return 1;
    if (s == "-") return -1;
  } else if (v.is_number_integer()) {
    const int a = v.get<int>();
    if (a == 1 || a == -1) return a;
  }
  fail(field, "expected \"+\" or \"-\"");
}

FaceSelector parse_face(const json& j, const std::string& path) {
  FaceSelector f;
  f.axis = get_axis(require(j, "axis", path), join(path, "axis"));
  f.sign = get_sign(require(j, "sign", path), join(path, "sign"));
  f.lo = get_triple(require(j, "min", path), join(path, "min"));
  f.hi = get_triple(require(j, "max", path), join(path, "max"));
  for (int a = 0; a < 3; ++a)
    if (f.lo[a] > f.hi[a]) fail(join(path, "min"), "exceeds max");
  return f;
}

SchurKind parse_schur(const std::string& s, const std::string& field) {
  if (s == "direct") return SchurKind::Direct;
  if (s == "amg") return SchurKind::AmgCg;
  fail(field, "expected \"direct\" or \"amg\"");
}

}  // namespace

void parse_geometry(const json& g, ProjectConfig& cfg) {
  const std::string p = "geometry";
  if (!g.is_object()) fail(p, "expected an object");
  cfg.geometry.dx = positive(require(g, "dx_m", p), join(p, "dx_m"));
  const auto dom = get_triple(require(g, "domain", p), join(p, "domain"));
  for (int a = 0; a < 3; ++a)
    if (dom[a] <= 0) fail(join(p, "domain"), "dimensions must be positive");
  cfg.geometry.domain = {dom[0], dom[1], dom[2]};

  const json& mats = require(g, "materials", p);
  if (!mats.is_object() || mats.empty()) fail(join(p, "materials"), "expected a non-empty object");
  std::vector<std::string> names;
  for (auto it = mats.begin(); it != mats.end(); ++it) {
    const std::string mp = join(join(p, "materials"), it.key());
    Material m;
    m.name = it.key();
    m.sigma0 = get_number(require(it.value(), "sigma0_S_per_m", mp), join(mp, "sigma0_S_per_m"));
    if (m.sigma0 < 0.0) fail(join(mp, "sigma0_S_per_m"), "must be >= 0");
    const json& lam = require(it.value(), "lambda_m", mp);
    if (lam.is_string()) {
      if (lam.get<std::string>() != "normal") fail(join(mp, "lambda_m"), "expected a number or \"normal\"");
      m.lambda = kNormalConductor;
      if (m.sigma0 == 0.0) fail(join(mp, "sigma0_S_per_m"), "a normal conductor needs sigma0 > 0");
    } else {
      m.lambda = positive(lam, join(mp, "lambda_m"));
    }
    names.push_back(m.name);
    cfg.geometry.materials.push_back(std::move(m));
  }

  const json& boxes = require(g, "boxes", p);
  if (!boxes.is_array() || boxes.empty()) fail(join(p, "boxes"), "expected a non-empty array");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::string bp = join(p, "boxes") + "[" + std::to_string(i) + "]";
    Box b;
    b.lo = get_triple(require(boxes[i], "min", bp), join(bp, "min"));
    b.hi = get_triple(require(boxes[i], "max", bp), join(bp, "max"));
    const json& mat = require(boxes[i], "material", bp);
    if (!mat.is_string()) fail(join(bp, "material"), "expected a material name");
    const auto it = std::find(names.begin(), names.end(), mat.get<std::string>());
    if (it == names.end()) fail(join(bp, "material"), "unknown material '" + mat.get<std::string>() + "'");
    b.material = static_cast<std::size_t>(it - names.begin());
    cfg.geometry.boxes.push_back(b);
  }

  const json& ports = require(g, "ports", p);
  if (!ports.is_array() || ports.empty()) fail(join(p, "ports"), "expected a non-empty array");
  for (std::size_t i = 0; i < ports.size(); ++i) {
    const std::string pp = join(p, "ports") + "[" + std::to_string(i) + "]";
    PortConfig pc;
    const json& name = require(ports[i], "name", pp);
    if (!name.is_string()) fail(join(pp, "name"), "expected a string");
    pc.name = name.get<std::string>();
    pc.plus = parse_face(require(ports[i], "plus_face", pp), join(pp, "plus_face"));
    pc.minus = parse_face(require(ports[i], "minus_face", pp), join(pp, "minus_face"));
    if (ports[i].contains("length_m")) pc.length_m = positive(ports[i]["length_m"], join(pp, "length_m"));
    cfg.ports.push_back(std::move(pc));
  }
}

ProjectConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  ProjectConfig cfg;
  cfg.base_dir = base_dir;
  if (!j.is_object()) fail("<root>", "expected an object");
  const json& g = require(j, "geometry", "");
  if (g.is_string()) {
    const auto path = base_dir / g.get<std::string>();
    std::ifstream in(path);
    if (!in) fail("geometry", "cannot open '" + path.string() + "'");
    json gj;
    try {
      gj = json::parse(in);
    } catch (const json::parse_error& e) {
      fail("geometry", std::string("invalid JSON in '") + path.string() + "': " + e.what());
    }
    parse_geometry(gj, cfg);
  } else {
    parse_geometry(g, cfg);
  }

  if (j.contains("frequencies_hz")) {
    const json& f = j["frequencies_hz"];
    if (!f.is_array() || f.empty()) fail("frequencies_hz", "expected a non-empty array");
    cfg.frequencies_hz.clear();
    for (std::size_t i = 0; i < f.size(); ++i)
      cfg.frequencies_hz.push_back(positive(f[i], "frequencies_hz[" + std::to_string(i) + "]"));
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (!s.is_object()) fail("solver", "expected an object");
    if (s.contains("rre")) {
      cfg.rre = positive(s["rre"], "solver.rre");
      if (cfg.rre >= 1.0) fail("solver.rre", "must be < 1");
    }
    if (s.contains("restart")) {
      cfg.restart = static_cast<int>(get_index(s["restart"], "solver.restart"));
      if (cfg.restart < 1) fail("solver.restart", "must be >= 1");
    }
    if (s.contains("max_iters")) {
      cfg.max_iters = static_cast<int>(get_index(s["max_iters"], "solver.max_iters"));
      if (cfg.max_iters < 1) fail("solver.max_iters", "must be >= 1");
    }
    if (s.contains("tucker_tol")) cfg.tucker_tol = positive(s["tucker_tol"], "solver.tucker_tol");
    if (s.contains("compress_circulants")) {
      if (!s["compress_circulants"].is_boolean()) fail("solver.compress_circulants", "expected a boolean");
      cfg.compress_circulants = s["compress_circulants"].get<bool>();
    }
    if (s.contains("schur")) {
      if (!s["schur"].is_string()) fail("solver.schur", "expected \"direct\" or \"amg\"");
      cfg.schur = parse_schur(s["schur"].get<std::string>(), "solver.schur");
    }
    if (s.contains("schur_tol")) cfg.schur_tol = positive(s["schur_tol"], "solver.schur_tol");
  }
  if (j.contains("cache")) {
    if (!j["cache"].is_string()) fail("cache", "expected a path");
    cfg.cache = base_dir / j["cache"].get<std::string>();
  }
  if (j.contains("reference_inductance_h")) {
    const json& r = j["reference_inductance_h"];
    if (r.is_number()) {
      if (cfg.ports.size() != 1) fail("reference_inductance_h", "a single number needs exactly one port");
      cfg.reference_inductance.emplace_back(cfg.ports[0].name, get_number(r, "reference_inductance_h"));
    } else if (r.is_object()) {
      for (auto it = r.begin(); it != r.end(); ++it) {
        const std::string f = "reference_inductance_h." + it.key();
        const bool known = std::any_of(cfg.ports.begin(), cfg.ports.end(),
                                       [&](const PortConfig& p) { return p.name == it.key(); });
        if (!known) fail(f, "unknown port");
        cfg.reference_inductance.emplace_back(it.key(), get_number(it.value(), f));
      }
    } else {
      fail("reference_inductance_h", "expected a number or an object keyed by port name");
    }
  }
  return cfg;
}

ProjectConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
  return parse_config(j, path.parent_path());
}

std::vector<PortSpec> resolve_ports(const ProjectConfig& cfg, const VoxelGrid& grid, const NodeIndex& nodes) {
  std::vector<PortSpec> out;
  for (std::size_t i = 0; i < cfg.ports.size(); ++i) {
    const auto& pc = cfg.ports[i];
    const std::string field = "geometry.ports[" + std::to_string(i) + "]";
    PortSpec p;
    p.name = pc.name;
    p.length_m = pc.length_m;
    p.plus = select_terminal(grid, nodes, pc.plus);
    p.minus = select_terminal(grid, nodes, pc.minus);
    if (p.plus.empty()) fail(field + ".plus_face", "selects no boundary face of a non-empty voxel");
    if (p.minus.empty()) fail(field + ".minus_face", "selects no boundary face of a non-empty voxel");
    try {
      validate_port(p, nodes);
    } catch (const GeometryError& e) {
      fail(field, e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace svx::cli
