#include "gapflow/config.hpp"

#include <fstream>
#include <sstream>

namespace gapflow {

using nlohmann::json;

namespace {

Rational rat(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": exact numbers must be strings, got " + j.dump());
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::vector<Rational> rat_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rat(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

json str_list(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& q : v) a.push_back(to_string(q));
  return a;
}

template <class T>
T number(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  auto v = j.get<long long>();
  if (v < 0) throw ConfigError(where + ": must be non-negative");
  return static_cast<T>(v);
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return j.at(key);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

Schedule parse_schedule(const json& j, const std::string& where) {
  if (j.is_string()) return Schedule::parse(j.get<std::string>());
  check_keys(j, {"kind", "values", "start", "stop", "step", "base", "denominator", "from", "to"}, where);
  Schedule s;
  const std::string kind = need(j, "kind", where).get<std::string>();
  if (kind == "list") {
    s.kind = Schedule::Kind::list;
    s.values = rat_list(need(j, "values", where), where + ".values");
  } else if (kind == "range") {
    s.kind = Schedule::Kind::range;
    s.start = rat(need(j, "start", where), where + ".start");
    s.stop = rat(need(j, "stop", where), where + ".stop");
    if (j.contains("step")) s.step = rat(j["step"], where + ".step");
  } else if (kind == "log") {
    s.kind = Schedule::Kind::log;
    s.from = number<long>(need(j, "from", where), where + ".from");
    s.to = number<long>(need(j, "to", where), where + ".to");
    if (j.contains("denominator")) s.denominator = number<long>(j["denominator"], where + ".denominator");
    if (j.contains("base")) s.base = number<long>(j["base"], where + ".base");
  } else {
    throw ConfigError(where + ": unknown schedule kind '" + kind + "'");
  }
  s.expand();  // validates
  return s;
}

json schedule_json(const Schedule& s) {
  switch (s.kind) {
    case Schedule::Kind::list: return {{"kind", "list"}, {"values", str_list(s.values)}};
    case Schedule::Kind::range:
      return {{"kind", "range"}, {"start", to_string(s.start)}, {"stop", to_string(s.stop)}, {"step", to_string(s.step)}};
    case Schedule::Kind::log:
      return {{"kind", "log"}, {"from", s.from}, {"to", s.to}, {"denominator", s.denominator}, {"base", s.base}};
  }
  return {};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Rational> Schedule::expand() const {
  std::vector<Rational> out;
  switch (kind) {
    case Kind::list: out = values; break;
    case Kind::range: {
      if (step <= 0) throw ConfigError("schedule step must be positive");
      if ((stop - start) / step > 10'000'000) throw ConfigError("schedule range too long");
      for (Rational t = start; t <= stop; t += step) out.push_back(t);
      break;
    }
    case Kind::log: {
      if (base < 2 || denominator < 1 || from < 0 || to < from) throw ConfigError("bad log schedule parameters");
      for (long i = from; i <= to; ++i) {
        Integer p, r;
        mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(i));
        mpz_root(r.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(denominator));
        out.emplace_back(r);
      }
      break;
    }
  }
  if (out.empty()) throw ConfigError("schedule is empty");
  for (const auto& t : out)
    if (t < 1) throw ConfigError("schedule values must be at least 1, got " + to_string(t));
  return out;
}

Schedule Schedule::parse(const std::string& text) {
  Schedule s;
  try {
    if (text.rfind("log:", 0) == 0) {
      auto parts = split(text.substr(4), ':');
      if (parts.size() < 2 || parts.size() > 4) throw ConfigError("log grid needs from:to[:denominator[:base]]");
      s.kind = Kind::log;
      s.from = std::stol(parts[0]);
      s.to = std::stol(parts[1]);
      if (parts.size() > 2) s.denominator = std::stol(parts[2]);
      if (parts.size() > 3) s.base = std::stol(parts[3]);
    } else if (text.find(':') != std::string::npos) {
      auto parts = split(text, ':');
      if (parts.size() < 2 || parts.size() > 3) throw ConfigError("range needs start:stop[:step]");
      s.kind = Kind::range;
      s.start = parse_rational(parts[0]);
      s.stop = parse_rational(parts[1]);
      if (parts.size() > 2) s.step = parse_rational(parts[2]);
    } else {
      s.kind = Kind::list;
      for (const auto& p : split(text, ',')) s.values.push_back(parse_rational(p));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("t grid '" + text + "': " + e.what());
  } catch (const std::out_of_range&) {
    throw ConfigError("t grid '" + text + "': number out of range");
  }
  s.expand();
  return s;
}

Schedule Schedule::log_grid(long from, long to, long denominator, long base) {
  Schedule s;
  s.kind = Kind::log;
  s.from = from;
  s.to = to;
  s.denominator = denominator;
  s.base = base;
  return s;
}

bool RegionSpec::operator==(const RegionSpec& o) const {
  if (kind != o.kind || lo != o.lo || hi != o.hi || rows.size() != o.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].a != o.rows[i].a || rows[i].b != o.rows[i].b || rows[i].strict != o.rows[i].strict) return false;
  return true;
}

VolumeOptions VolumeSpec::options() const {
  VolumeOptions o;
  o.method = method;
  o.samples = samples;
  o.shifts = shifts;
  o.resolution = resolution;
  o.seed = seed;
  return o;
}

// ---------------------------------------------------------------------------

RunConfig parse_config(const json& j) {
  check_keys(j,
             {"name", "field", "units", "region", "schedule", "label_schedule", "precision_bits", "tol_imag", "alpha",
              "K_prime", "volume", "word_length", "output"},
             "config");
  RunConfig c;
  if (j.contains("name")) c.name = j["name"].get<std::string>();

  const json& f = need(j, "field", "config");
  check_keys(f, {"minpoly", "omega", "hint_tolerance", "root_bits"}, "field");
  for (const auto& q : rat_list(need(f, "minpoly", "field"), "field.minpoly")) {
    if (!is_integer(q)) throw ConfigError("field.minpoly: coefficients must be integers");
    c.field.minpoly.push_back(q.get_num());
  }
  const json& om = need(f, "omega", "field");
  if (!om.is_array() || om.empty()) throw ConfigError("field.omega: expected a non-empty array");
  bool any_hint = false, all_hint = true;
  for (std::size_t i = 0; i < om.size(); ++i) {
    const std::string where = "field.omega[" + std::to_string(i) + "]";
    check_keys(om[i], {"def", "approx"}, where);
    c.field.omega_defs.push_back(rat_list(need(om[i], "def", where), where + ".def"));
    if (om[i].contains("approx")) {
      c.field.omega_approx.push_back(rat(om[i]["approx"], where + ".approx"));
      any_hint = true;
    } else {
      all_hint = false;
    }
  }
  if (any_hint && !all_hint) throw ConfigError("field.omega: give 'approx' for every generator or for none");
  if (f.contains("hint_tolerance")) c.field.hint_tolerance = rat(f["hint_tolerance"], "field.hint_tolerance");
  if (f.contains("root_bits")) c.field.root_bits = number<unsigned>(f["root_bits"], "field.root_bits");

  if (j.contains("units")) {
    const json& u = j["units"];
    if (!u.is_array()) throw ConfigError("units: expected an array of coordinate vectors");
    for (std::size_t i = 0; i < u.size(); ++i) c.units.push_back(rat_list(u[i], "units[" + std::to_string(i) + "]"));
  }

  const json& r = need(j, "region", "config");
  check_keys(r, {"kind", "lo", "hi", "rows"}, "region");
  const std::string kind = need(r, "kind", "region").get<std::string>();
  if (kind == "box") {
    c.region.kind = ConvexRegion::Kind::box;
    c.region.lo = rat_list(need(r, "lo", "region"), "region.lo");
    c.region.hi = rat_list(need(r, "hi", "region"), "region.hi");
  } else if (kind == "simplex") {
    c.region.kind = ConvexRegion::Kind::simplex;
  } else if (kind == "halfspaces") {
    c.region.kind = ConvexRegion::Kind::halfspaces;
    const json& rows = need(r, "rows", "region");
    if (!rows.is_array()) throw ConfigError("region.rows: expected an array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = "region.rows[" + std::to_string(i) + "]";
      check_keys(rows[i], {"a", "b", "strict"}, where);
      ConvexRegion::Halfspace h;
      h.a = rat_list(need(rows[i], "a", where), where + ".a");
      h.b = rat(need(rows[i], "b", where), where + ".b");
      if (rows[i].contains("strict")) h.strict = rows[i]["strict"].get<bool>();
      c.region.rows.push_back(std::move(h));
    }
  } else {
    throw ConfigError("region.kind: unknown kind '" + kind + "'");
  }

  c.schedule = parse_schedule(need(j, "schedule", "config"), "schedule");
  if (j.contains("label_schedule")) c.label_schedule = parse_schedule(j["label_schedule"], "label_schedule");
  if (j.contains("precision_bits")) c.precision_bits = number<unsigned>(j["precision_bits"], "precision_bits");
  if (j.contains("tol_imag")) c.tol_imag = rat(j["tol_imag"], "tol_imag");
  if (j.contains("alpha")) c.alpha = rat(j["alpha"], "alpha");
  if (j.contains("K_prime")) c.K_prime = rat(j["K_prime"], "K_prime");

  if (j.contains("volume")) {
    const json& v = j["volume"];
    check_keys(v, {"method", "samples", "shifts", "resolution", "seed"}, "volume");
    try {
      if (v.contains("method")) c.volume.method = parse_volume_method(v["method"].get<std::string>());
    } catch (const RegionError& e) {
      throw ConfigError(std::string("volume.method: ") + e.what());
    }
    if (v.contains("samples")) c.volume.samples = number<std::size_t>(v["samples"], "volume.samples");
    if (v.contains("shifts")) c.volume.shifts = number<std::size_t>(v["shifts"], "volume.shifts");
    if (v.contains("resolution")) c.volume.resolution = number<std::size_t>(v["resolution"], "volume.resolution");
    if (v.contains("seed")) c.volume.seed = number<std::uint64_t>(v["seed"], "volume.seed");
  }
  if (j.contains("word_length")) c.word_length = number<std::size_t>(j["word_length"], "word_length");
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, {"path", "format"}, "output");
    if (o.contains("path")) c.output_path = o["path"].get<std::string>();
    if (o.contains("format")) c.output_format = o["format"].get<std::string>();
  }

  if (c.precision_bits < 64 || c.precision_bits > kMaxCertifiedBits)
    throw ConfigError("precision_bits must lie in [64, " + std::to_string(kMaxCertifiedBits) + "]");
  if (c.output_format != "csv" && c.output_format != "json")
    throw ConfigError("output.format must be csv or json");
  if (c.volume.shifts < 2) throw ConfigError("volume.shifts must be at least 2");
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a wrongly typed value: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const RunConfig& c) {
  json j;
  if (!c.name.empty()) j["name"] = c.name;
  json f;
  std::vector<Rational> mp(c.field.minpoly.begin(), c.field.minpoly.end());
  f["minpoly"] = str_list(mp);
  json om = json::array();
  for (std::size_t i = 0; i < c.field.omega_defs.size(); ++i) {
    json o{{"def", str_list(c.field.omega_defs[i])}};
    if (i < c.field.omega_approx.size()) o["approx"] = to_string(c.field.omega_approx[i]);
    om.push_back(o);
  }
  f["omega"] = om;
  f["hint_tolerance"] = to_string(c.field.hint_tolerance);
  f["root_bits"] = c.field.root_bits;
  j["field"] = f;

  json units = json::array();
  for (const auto& u : c.units) units.push_back(str_list(u));
  j["units"] = units;

  json r;
  switch (c.region.kind) {
    case ConvexRegion::Kind::box:
      r = {{"kind", "box"}, {"lo", str_list(c.region.lo)}, {"hi", str_list(c.region.hi)}};
      break;
    case ConvexRegion::Kind::simplex: r = {{"kind", "simplex"}}; break;
    case ConvexRegion::Kind::halfspaces: {
      json rows = json::array();
      for (const auto& h : c.region.rows) rows.push_back({{"a", str_list(h.a)}, {"b", to_string(h.b)}, {"strict", h.strict}});
      r = {{"kind", "halfspaces"}, {"rows", rows}};
      break;
    }
  }
  j["region"] = r;
  j["schedule"] = schedule_json(c.schedule);
  if (c.label_schedule) j["label_schedule"] = schedule_json(*c.label_schedule);
  j["precision_bits"] = c.precision_bits;
  j["tol_imag"] = to_string(c.tol_imag);
  if (c.alpha) j["alpha"] = to_string(*c.alpha);
  if (c.K_prime) j["K_prime"] = to_string(*c.K_prime);
  j["volume"] = {{"method", to_string(c.volume.method)},
                 {"samples", c.volume.samples},
                 {"shifts", c.volume.shifts},
                 {"resolution", c.volume.resolution},
                 {"seed", c.volume.seed}};
  j["word_length"] = c.word_length;
  j["output"] = {{"path", c.output_path}, {"format", c.output_format}};
  return j;
}

// ---------------------------------------------------------------------------

Workspace Workspace::make(RunConfig config) {
  Workspace w;
  try {
    w.field = std::make_shared<const NumberField>(NumberField::make(config.field));
  } catch (const FieldError& e) {
    throw ConfigError(std::string("field: ") + e.what());
  }
  const std::size_t d = w.field->d();
  try {
    switch (config.region.kind) {
      case ConvexRegion::Kind::box:
        if (config.region.lo.size() != d || config.region.hi.size() != d)
          throw ConfigError("region: box bounds must have " + std::to_string(d) + " entries");
        w.region = std::make_unique<ConvexRegion>(ConvexRegion::box(config.region.lo, config.region.hi));
        break;
      case ConvexRegion::Kind::simplex:
        w.region = std::make_unique<ConvexRegion>(ConvexRegion::simplex(w.field));
        break;
      case ConvexRegion::Kind::halfspaces:
        w.region = std::make_unique<ConvexRegion>(ConvexRegion::halfspaces(d, config.region.rows));
        break;
    }
  } catch (const RegionError& e) {
    throw ConfigError(std::string("region: ") + e.what());
  }
  if (!config.units.empty()) {
    std::vector<FieldElement> gens;
    for (const auto& u : config.units) {
      if (u.size() != d + 1) throw ConfigError("units: each generator needs " + std::to_string(d + 1) + " coordinates");
      gens.emplace_back(u);
    }
    try {
      w.units = UnitSystem::make(*w.field, std::move(gens), config.precision_bits);
    } catch (const UnitError& e) {
      throw ConfigError(std::string("units: ") + e.what());
    } catch (const FieldError& e) {
      throw ConfigError(std::string("units: ") + e.what());
    }
  }
  w.config = std::move(config);
  return w;
}

const UnitSystem& Workspace::unit_system() const {
  if (!units) throw ConfigError("this command needs unit generators in the config");
  return *units;
}

}  // namespace gapflow
