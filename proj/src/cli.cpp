#include "gapflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gapflow/config.hpp"
#include "gapflow/gap_engine.hpp"
#include "gapflow/partition_volumes.hpp"
#include "gapflow/quasi_analyzer.hpp"
#include "gapflow/unit_flow.hpp"

namespace gapflow {

using ojson = nlohmann::ordered_json;

namespace {

struct Options {
  std::string command;
  std::string config_path;
  std::string t_text;
  std::string t_grid;
  unsigned precision_bits = 0;
  std::size_t samples = 0;
  std::string out;
  std::string format;
  bool full_precision = false;
  std::size_t length = 0;
  std::string method;
  std::size_t random = 0;
  std::uint64_t seed = 12345;
  bool theoretical = false;
  bool partition = false;
};

// ---------------------------------------------------------------------------
// Output

std::string fmt(double x, bool full) {
  char buf[64];
  std::snprintf(buf, sizeof buf, full ? "%.17g" : "%.5f", x);
  return buf;
}

std::string fmt_vec(const std::vector<double>& v, bool full) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], full);
  return s + ")";
}

std::string fmt_exact(const std::vector<Rational>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return s + ")";
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

struct Report {
  ojson meta = ojson::object();
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_report(const Report& r, const std::string& format, std::ostream& os) {
  if (format == "json") {
    ojson j = r.meta;
    ojson rows = ojson::array();
    for (const auto& row : r.rows) {
      ojson o = ojson::object();
      for (std::size_t c = 0; c < r.columns.size(); ++c) o[r.columns[c]] = row[c];
      rows.push_back(o);
    }
    j["rows"] = rows;
    os << j.dump(2) << "\n";
    return;
  }
  for (const auto& [k, v] : r.meta.items()) os << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  for (std::size_t c = 0; c < r.columns.size(); ++c) os << (c ? "," : "") << csv_cell(r.columns[c]);
  os << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << "\n";
  }
}

// ---------------------------------------------------------------------------
// Worked example: the cubic field x^3 - 7x^2 + 14x - 7 with units
// (2,-4,1), (-5,5,-1).

struct ReferenceRow {
  long t;
  std::array<long, 3> exact;
  std::array<double, 3> scaled;
};

constexpr std::array<ReferenceRow, 6> kReferenceTable = {{
    {3, {-5, 8, -2}, {-4.80194, 7.86690, -1.97869}},
    {10, {-3, 4, 0}, {-3.02177, 4.01463, -0.00234}},
    {31, {-41, 68, -18}, {-40.99761, 67.99839, -17.99974}},
    {100, {186, -308, 81}, {186.00012, -308.00008, 81.00001}},
    {316, {-20, 74, -63}, {-20.00001, 74.00001, -63.00000}},
    {1000, {424, -609, 61}, {424.00000, -609.00000, 61.00000}},
}};

bool is_reference_field(const RunConfig& c) {
  const std::vector<Integer> mp = {Integer(-7), Integer(14), Integer(-7), Integer(1)};
  const std::vector<std::vector<Rational>> defs = {{Rational(0), Rational(1)}, {Rational(0), Rational(0), Rational(1)}};
  const std::vector<std::vector<Rational>> units = {{Rational(2), Rational(-4), Rational(1)},
                                                    {Rational(-5), Rational(5), Rational(-1)}};
  return c.field.minpoly == mp && c.field.omega_defs == defs && c.units == units;
}

// ---------------------------------------------------------------------------

struct Context {
  Options opt;
  Workspace ws;
  std::ostream& err;

  const NumberField& F() const { return *ws.field; }
  const ConvexRegion& R() const { return *ws.region; }
  const UnitSystem& U() const { return ws.unit_system(); }
  bool full() const { return opt.full_precision; }

  // Warns when some beta_j log t sits so close to an integer that u1(t) is fragile.
  void check_margin(const Rational& t) const {
    if (t == 1) return;  // log t = 0, every exponent is exactly zero
    double m = U().exponent_margin(t);
    if (m < 1e-9) err << "warning: exponent within " << m << " of an integer at t = " << t.get_str() << "\n";
  }
  FieldElement unit(const Rational& t) const {
    check_margin(t);
    return positive_unit_at(F(), U(), t);
  }

  Rational single_t() const {
    if (!opt.t_text.empty()) {
      try {
        return parse_rational(opt.t_text);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--t: ") + e.what());
      }
    }
    return schedule().front();
  }
  std::vector<Rational> schedule() const {
    if (!opt.t_grid.empty()) return Schedule::parse(opt.t_grid).expand();
    return ws.config.schedule.expand();
  }
  std::vector<Rational> label_schedule() const {
    if (ws.config.label_schedule) return ws.config.label_schedule->expand();
    return schedule();
  }
  FlowOptions flow_options() const {
    FlowOptions fo;
    fo.tol_imag = Rational(ws.config.tol_imag).get_d();
    if (ws.config.alpha) fo.alpha = Rational(*ws.config.alpha).get_d();
    return fo;
  }
  VolumeOptions volume_options() const {
    auto v = ws.config.volume.options();
    if (!opt.method.empty()) {
      try {
        v.method = parse_volume_method(opt.method);
      } catch (const RegionError& e) {
        throw ConfigError(e.what());
      }
    }
    return v;
  }
};

void require_t_at_least_one(const Rational& t) {
  if (t < 1) throw ConfigError("t must be at least 1");
}

ojson field_meta(const Context& cx) {
  ojson m = ojson::object();
  if (!cx.ws.config.name.empty()) m["config"] = cx.ws.config.name;
  m["degree"] = cx.F().degree();
  m["signature"] = std::to_string(cx.F().r1()) + "," + std::to_string(cx.F().r2());
  return m;
}

// ---------------------------------------------------------------------------
// Commands

Report cmd_spectrum(const Context& cx) {
  const Rational t = cx.single_t();
  require_t_at_least_one(t);
  auto s = spectrum(cx.F(), cx.R(), t);
  Report r;
  r.meta = field_meta(cx);
  r.meta["t"] = to_string(t);
  r.meta["count"] = s.count();
  r.meta["distinct"] = s.num_distinct();
  ojson dist = ojson::array();
  for (std::size_t k = 0; k < s.num_distinct(); ++k)
    dist.push_back({{"spacing", s.distinct[k].to_string()}, {"value", fmt(s.distinct_value[k], cx.full())}});
  r.meta["distinct_spacings"] = dist;
  for (std::size_t j = 0; j < s.d; ++j) r.columns.push_back("m" + std::to_string(j + 1));
  r.columns.insert(r.columns.end(), {"fractional_part", "value", "spacing_to_next"});
  for (std::size_t i = 0; i < s.count(); ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < s.d; ++j) row.push_back(std::to_string(s.points.point(i)[j]));
    row.push_back(s.fractional_part(i).to_string());
    row.push_back(fmt(s.value[i], cx.full()));
    if (i + 1 < s.count()) {
      auto c = s.spacing_coords(i);
      std::vector<Rational> q(c.begin(), c.end());
      row.push_back(FieldElement(q).to_string());
    } else {
      row.emplace_back();
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

Report cmd_threegap(const Options& opt, const Context* cx, bool& failed) {
  Report r;
  r.columns = {"omega", "t_max", "max_distinct", "violations"};
  long t_max = 500;
  if (!opt.t_text.empty()) {
    Rational t = parse_rational(opt.t_text);
    if (!is_integer(t) || t < 1) throw ConfigError("--t must be a positive integer for threegap");
    t_max = t.get_num().get_si();
  } else if (cx) {
    t_max = floor(cx->schedule().back()).get_si();
  }
  std::vector<double> omegas;
  if (opt.random > 0) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (omegas.size() < opt.random) {
      double w = u(rng);
      if (w > 0 && w < 1) omegas.push_back(w);
    }
    r.meta["random_seed"] = opt.seed;
  } else {
    if (!cx) throw ConfigError("threegap needs --config or --random");
    if (cx->F().d() != 1) throw ConfigError("threegap needs a field of degree 2 (one generator)");
    omegas.push_back(cx->F().omega_double()[0]);
  }
  std::size_t worst = 0, bad = 0;
  for (double w : omegas) {
    double frac = w - std::floor(w);
    auto rep = three_gap_check(frac, t_max);
    worst = std::max(worst, rep.max_distinct);
    bad += rep.violations.size();
    std::string v;
    for (long t : rep.violations) v += (v.empty() ? "" : " ") + std::to_string(t);
    r.rows.push_back({fmt(frac, true), std::to_string(t_max), std::to_string(rep.max_distinct), v});
  }
  r.meta["cases"] = omegas.size();
  r.meta["max_distinct"] = worst;
  r.meta["violations"] = bad;
  failed = bad > 0;
  return r;
}

Report cmd_rates(const Context& cx) {
  const auto& us = cx.U();
  Report r;
  r.meta = field_meta(cx);
  r.meta["residual"] = fmt(us.residual(), true);
  std::string rows;
  for (auto i : us.solve_rows()) rows += (rows.empty() ? "" : " ") + std::to_string(i);
  r.meta["solve_rows"] = rows;
  r.meta["beta"] = fmt_vec(us.beta_double(), cx.full());
  r.columns = {"j", "generator", "beta"};
  if (!cx.opt.t_text.empty()) r.columns.push_back("exponent");
  std::vector<long> ex;
  if (!cx.opt.t_text.empty()) {
    Rational t = cx.single_t();
    require_t_at_least_one(t);
    ex = us.exponents(t);
    r.meta["t"] = to_string(t);
    cx.check_margin(t);
    r.meta["u1"] = unit_at(cx.F(), us, t).to_string();
  }
  for (std::size_t j = 0; j < us.rank(); ++j) {
    std::vector<std::string> row = {std::to_string(j + 1), us.generators()[j].to_string(),
                                    cx.full() ? format_fixed(us.beta()[j], 40) : fmt(us.beta_double()[j], false)};
    if (!ex.empty()) row.push_back(std::to_string(ex[j]));
    r.rows.push_back(std::move(row));
  }
  return r;
}

LabelSweep sweep_labels(const Context& cx) {
  for (const auto& t : cx.label_schedule()) cx.check_margin(t);
  return label_sweep(cx.F(), cx.U(), cx.R(), cx.label_schedule());
}

bool stable_final_half(const LabelSweep& sw) {
  const std::size_t n = sw.entries.size();
  for (std::size_t i = n / 2 + (n % 2); i < n; ++i)
    if (i > 0 && sw.entries[i].new_labels > 0) return false;
  return true;
}

Report cmd_labels(const Context& cx) {
  auto sw = sweep_labels(cx);
  Report r;
  r.meta = field_meta(cx);
  r.meta["labels"] = sw.labels.size();
  r.meta["burn_in_index"] = sw.burn_in;
  r.meta["stable_over_final_half"] = stable_final_half(sw);
  ojson labels = ojson::array();
  for (std::size_t j = 0; j < sw.labels.size(); ++j)
    labels.push_back({{"j", j + 1},
                      {"label", sw.labels.elements[j].to_string()},
                      {"value", fmt(cx.F().sigma1_double(sw.labels.elements[j]), cx.full())}});
  r.meta["label_set"] = labels;
  if (cx.opt.theoretical) {
    double Kp = 0;
    if (cx.ws.config.K_prime) {
      Kp = Rational(*cx.ws.config.K_prime).get_d();
    } else {
      try {
        Kp = cubic_transference_constant(cx.F()).K_prime;
      } catch (const InvariantError& e) {
        throw ConfigError(std::string("K_prime must be given in the config: ") + e.what());
      }
    }
    auto box = theoretical_box(cx.F(), cx.U(), Kp);
    r.meta["theoretical_K_prime"] = fmt(Kp, cx.full());
    r.meta["theoretical_box_volume"] = fmt(box.volume, true);
    r.meta["theoretical_expected_points"] = fmt(box.expected_points, true);
    auto th = theoretical_labels(cx.F(), cx.U(), box);
    std::size_t covered = 0;
    for (const auto& e : sw.labels.elements) covered += th.find(e).has_value();
    r.meta["theoretical_labels"] = th.size();
    r.meta["empirical_in_theoretical"] = std::to_string(covered) + "/" + std::to_string(sw.labels.size());
  }
  r.columns = {"t", "count", "distinct", "new_labels", "labels"};
  for (const auto& e : sw.entries)
    r.rows.push_back({to_string(e.t), std::to_string(e.count), std::to_string(e.distinct), std::to_string(e.new_labels),
                      std::to_string(e.labels_after)});
  return r;
}

Report cmd_flow(const Context& cx) {
  auto qf = QuasiFlow::make(cx.F(), cx.U(), cx.flow_options());
  Report r;
  r.meta = field_meta(cx);
  r.meta["k"] = qf.k();
  r.meta["gamma"] = fmt(qf.gamma(), cx.full());
  r.meta["alpha"] = fmt(qf.alpha(), cx.full());
  r.meta["condition_number"] = fmt(qf.condition_number(), cx.full());
  r.meta["theta"] = fmt_vec(qf.theta(), cx.full());
  r.meta["eigenvalue_order"] =
      "one eigenvalue per complex embedding: real embeddings first (sigma_1 leading), then each complex "
      "embedding followed by its conjugate; logarithms use the principal branch with log|x| + i pi on negative reals";
  r.columns = {"embedding", "re", "im", "kind", "theta"};
  auto ev = qf.eigenvalues();
  std::size_t rot = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const bool is_rot = rot < qf.rotational().size() && qf.rotational()[rot] == i;
    r.rows.push_back({std::to_string(i + 1), fmt(ev[i].real(), cx.full()), fmt(ev[i].imag(), cx.full()),
                      is_rot ? "rotational" : "decaying", is_rot ? fmt(qf.theta()[rot], cx.full()) : ""});
    if (is_rot) ++rot;
  }
  return r;
}

Report cmd_table6(const Context& cx, std::vector<std::string>& mismatches) {
  auto qf = QuasiFlow::make(cx.F(), cx.U(), cx.flow_options());
  std::vector<Rational> ts = cx.opt.t_grid.empty() ? Schedule::log_grid(1, 6).expand() : cx.schedule();
  const bool compare = is_reference_field(cx.ws.config) && cx.opt.t_grid.empty();
  Report r;
  r.meta = field_meta(cx);
  r.meta["reference_comparison"] = compare;
  r.columns = {"i", "t", "n(u1(t))", "t*g3", "max_error"};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    cx.check_margin(ts[i]);
    auto p = predict_expansion(qf, cx.U(), cx.F(), ts[i]);
    auto sc = p.scaled();
    double err = 0;
    for (std::size_t a = 0; a < sc.size(); ++a) err = std::max(err, std::abs(Rational(p.exact[a]).get_d() - sc[a]));
    r.rows.push_back({std::to_string(i + 1), to_string(ts[i]), fmt_exact(p.exact), fmt_vec(sc, cx.full()), fmt(err, cx.full())});
    if (compare) {
      const auto& ref = kReferenceTable[i];
      for (std::size_t a = 0; a < 3; ++a) {
        if (p.exact[a] != ref.exact[a])
          mismatches.push_back("row " + std::to_string(i + 1) + " exact coordinate " + std::to_string(a) + ": got " +
                               to_string(p.exact[a]) + ", expected " + std::to_string(ref.exact[a]));
        if (std::abs(sc[a] - ref.scaled[a]) > 1e-4)
          mismatches.push_back("row " + std::to_string(i + 1) + " predicted coordinate " + std::to_string(a) +
                               ": got " + fmt(sc[a], true) + ", expected " + fmt(ref.scaled[a], false));
      }
    }
  }
  return r;
}

Report cmd_sweep(const Context& cx) {
  auto sw = sweep_labels(cx);
  const auto& labels = sw.labels;
  std::optional<QuasiFlow> qf;
  try {
    qf = QuasiFlow::make(cx.F(), cx.U(), cx.flow_options());
  } catch (const FlowError&) {
  }
  Report r;
  r.meta = field_meta(cx);
  r.meta["columns"] =
      "t, |M(t)|, D(t), J, flagged (1 when some rescaled spacing is outside the label set), prediction_error "
      "(max |n(u1(t)) - t g3|), max_scaled_spacing (Delta_D t^d), then p_j per label in increasing order";
  ojson lj = ojson::array();
  for (const auto& e : labels.elements) lj.push_back(e.to_string());
  r.meta["labels"] = lj;
  r.columns = {"t", "count", "distinct", "J", "flagged", "prediction_error", "max_scaled_spacing"};
  for (const auto& e : labels.elements) r.columns.push_back("p" + e.to_string());
  for (const auto& t : cx.schedule()) {
    auto s = spectrum(cx.F(), cx.R(), t);
    std::vector<std::string> row = {to_string(t), std::to_string(s.count()), std::to_string(s.num_distinct()),
                                    std::to_string(labels.size())};
    std::optional<Proportions> props;
    if (s.count() >= 2) {
      try {
        props = proportions(cx.F(), s, labels, cx.unit(t));
      } catch (const UnitError&) {
      }
    }
    row.push_back(props || s.count() < 2 ? "0" : "1");
    row.push_back(qf ? fmt(Rational(t).get_d() * predict_expansion(*qf, cx.U(), cx.F(), t).error, cx.full()) : "");
    row.push_back(s.count() >= 2 ? fmt(max_scaled_spacing(s), cx.full()) : "");
    for (std::size_t j = 0; j < labels.size(); ++j)
      row.push_back(props ? fmt(Rational(props->p[j]).get_d(), cx.full()) : "");
    r.rows.push_back(std::move(row));
  }
  return r;
}

// Labels from the label schedule, extended by the spacings at t itself.
LabelSet labels_for(const Context& cx, const GapSpectrum& s, const FieldElement& u1) {
  auto sw = sweep_labels(cx);
  sw.labels.merge(cx.F(), rescaled_distinct(cx.F(), s, u1));
  return sw.labels;
}

Report cmd_proportions(const Context& cx) {
  const Rational t = cx.single_t();
  require_t_at_least_one(t);
  auto s = spectrum(cx.F(), cx.R(), t);
  if (s.count() < 2) throw InvariantError("proportions need at least two points");
  auto u1 = cx.unit(t);
  auto labels = labels_for(cx, s, u1);
  auto part = partition_lattice(cx.F(), s, labels, u1);
  Report r;
  r.meta = field_meta(cx);
  r.meta["t"] = to_string(t);
  r.meta["count"] = s.count();
  r.meta["u1"] = u1.to_string();
  if (cx.opt.partition) {
    for (std::size_t j = 0; j < s.d; ++j) r.columns.push_back("m" + std::to_string(j + 1));
    r.columns.push_back("label");
    for (std::size_t i = 0; i < s.count(); ++i) {
      std::vector<std::string> row;
      for (std::size_t j = 0; j < s.d; ++j) row.push_back(std::to_string(s.points.point(i)[j]));
      row.push_back(part.formula[i] < 0 ? "" : std::to_string(part.formula[i] + 1));
      r.rows.push_back(std::move(row));
    }
    return r;
  }
  auto props = proportions(cx.F(), s, labels, u1);
  auto sv = shift_vectors(cx.F(), labels, u1, t);
  auto vo = cx.volume_options();
  auto pv = partition_volumes(cx.R(), sv.normalized, vo);
  auto pred = predicted_proportions(pv, cx.R().volume());
  r.meta["volume_method"] = to_string(vo.method);
  r.columns = {"j", "label", "count", "p", "p_value", "predicted", "predicted_error", "difference"};
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const double p = Rational(props.p[j]).get_d();
    r.rows.push_back({std::to_string(j + 1), labels.elements[j].to_string(), std::to_string(props.counts[j]),
                      to_string(props.p[j]), fmt(p, cx.full()), fmt(pred.value[j], cx.full()),
                      fmt(pred.error[j], true), fmt(p - pred.value[j], cx.full())});
  }
  return r;
}

Report cmd_ratios(const Context& cx) {
  const Rational t = cx.single_t();
  require_t_at_least_one(t);
  auto s = spectrum(cx.F(), cx.R(), t);
  auto rs = ratio_stats(cx.F(), s);
  Report r;
  r.meta = field_meta(cx);
  r.meta["t"] = to_string(t);
  r.meta["pairs"] = s.count() >= 2 ? s.count() - 2 : 0;
  r.columns = {"ratio", "value", "count", "frequency", "frequency_value"};
  for (std::size_t k = 0; k < rs.ratios.size(); ++k)
    r.rows.push_back({rs.ratios[k].to_string(), fmt(cx.F().sigma1_double(rs.ratios[k]), cx.full()),
                      std::to_string(rs.counts[k]), to_string(rs.freq[k]), fmt(Rational(rs.freq[k]).get_d(), cx.full())});
  return r;
}

std::string word_text(const std::vector<std::uint32_t>& w) {
  std::string s;
  for (auto j : w) s += (s.empty() ? "" : "-") + std::to_string(j + 1);
  return s;
}

Report cmd_words(const Context& cx) {
  const Rational t = cx.single_t();
  require_t_at_least_one(t);
  const std::size_t l = cx.opt.length ? cx.opt.length : cx.ws.config.word_length;
  auto s = spectrum(cx.F(), cx.R(), t);
  auto u1 = cx.unit(t);
  auto labels = labels_for(cx, s, u1);
  auto props = proportions(cx.F(), s, labels, u1);
  auto ws = word_stats(props, l);
  auto part = partition_lattice(cx.F(), s, labels, u1);
  auto formula = word_counts_formula(part, l);
  auto sv = shift_vectors(cx.F(), labels, u1, t);
  auto vo = cx.volume_options();
  const double rv = cx.R().volume();
  Report r;
  r.meta = field_meta(cx);
  r.meta["t"] = to_string(t);
  r.meta["l"] = l;
  r.meta["windows"] = ws.windows;
  r.meta["volume_method"] = to_string(vo.method);
  ojson lj = ojson::array();
  for (const auto& e : labels.elements) lj.push_back(e.to_string());
  r.meta["labels"] = lj;
  r.columns = {"word", "count", "formula_count", "frequency", "frequency_value", "predicted", "predicted_error"};
  bool agree = formula.size() == ws.counts.size();
  for (const auto& [w, c] : ws.counts) {
    auto it = formula.find(w);
    const std::size_t fc = it == formula.end() ? 0 : it->second;
    agree = agree && fc == c;
    std::string pred, perr;
    if (rv > 0) {
      auto v = volume(word_region(cx.R(), sv.normalized, w), vo);
      pred = fmt(v.estimate / rv, cx.full());
      perr = fmt(v.error / rv, true);
    }
    r.rows.push_back({word_text(w), std::to_string(c), std::to_string(fc), to_string(ws.frequency(w)),
                      fmt(Rational(ws.frequency(w)).get_d(), cx.full()), pred, perr});
  }
  r.meta["formula_agrees"] = agree;
  if (!agree) throw InvariantError("word counts from the partition formula differ from sliding-window counts");
  return r;
}

Report cmd_volumes(const Context& cx) {
  const Rational t = cx.single_t();
  require_t_at_least_one(t);
  auto s = spectrum(cx.F(), cx.R(), t);
  if (s.count() < 2) throw InvariantError("volumes need at least two points");
  auto u1 = cx.unit(t);
  auto labels = labels_for(cx, s, u1);
  auto props = proportions(cx.F(), s, labels, u1);
  auto sv = shift_vectors(cx.F(), labels, u1, t);
  auto vo = cx.volume_options();
  auto pv = partition_volumes(cx.R(), sv.normalized, vo);
  auto pred = predicted_proportions(pv, cx.R().volume());
  Report r;
  r.meta = field_meta(cx);
  r.meta["t"] = to_string(t);
  r.meta["method"] = to_string(vo.method);
  if (vo.method == VolumeMethod::monte_carlo) {
    r.meta["samples"] = vo.samples;
    r.meta["shifts"] = vo.shifts;
    r.meta["seed"] = vo.seed;
    r.meta["error_kind"] = "99.73% Student-t half-width over randomly shifted Halton replicates";
  } else if (vo.method == VolumeMethod::grid) {
    r.meta["resolution"] = vo.resolution;
    r.meta["error_kind"] = "volume of cells whose corners disagree with the midpoint class";
  } else {
    r.meta["error_kind"] = "floating-point rounding bound";
  }
  r.meta["region_volume_exact"] = fmt(cx.R().volume(), cx.full());
  r.meta["region_volume"] = fmt(pv.region.estimate, cx.full());
  r.meta["region_volume_error"] = fmt(pv.region.error, true);
  r.meta["remainder_volume"] = fmt(pv.remainder.estimate, true);
  r.columns = {"j", "label", "v", "volume", "volume_error", "predicted", "predicted_error", "p"};
  for (std::size_t j = 0; j < labels.size(); ++j) {
    std::vector<Rational> v(sv.v[j].begin(), sv.v[j].end());
    r.rows.push_back({std::to_string(j + 1), labels.elements[j].to_string(), fmt_exact(v),
                      fmt(pv.parts[j].estimate, cx.full()), fmt(pv.parts[j].error, true), fmt(pred.value[j], cx.full()),
                      fmt(pred.error[j], true), fmt(Rational(props.p[j]).get_d(), cx.full())});
  }
  return r;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Level spacings of fractional parts over algebraic number fields"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "run configuration (JSON)");
  app.add_option("--t", opt.t_text, "scale t (exact decimal or fraction)");
  app.add_option("--t-grid", opt.t_grid, "t values: 3,10,31 | start:stop[:step] | log:from:to[:den[:base]]");
  app.add_option("--precision-bits", opt.precision_bits, "working precision for logarithms");
  app.add_option("--samples", opt.samples, "low-discrepancy sample count for volumes");
  app.add_option("--out", opt.out, "output file (default stdout)");
  app.add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--full-precision", opt.full_precision, "print full precision instead of 5 decimals");
  app.add_option("--length", opt.length, "word length l (words have l+1 labels)");
  app.add_option("--method", opt.method, "volume method: exact-box, monte-carlo or grid");
  app.add_option("--random", opt.random, "threegap: number of random frequencies");
  app.add_option("--seed", opt.seed, "threegap: seed for --random");
  app.add_flag("--theoretical", opt.theoretical, "labels: also enumerate the theoretical label box");
  app.add_flag("--partition", opt.partition, "proportions: emit the point classification instead");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"spectrum", "sorted fractional parts and spacings at --t"},
      {"threegap", "check D(t) <= 3 for one-dimensional frequencies"},
      {"rates", "rate vector beta for the unit generators"},
      {"labels", "label set accumulated over the schedule"},
      {"flow", "eigenvalues of L - I, rotation angles and decay"},
      {"table6", "n(u1(t)) against t g3 on t = floor(10^(i/2))"},
      {"sweep", "proportions, spacing counts and prediction error over the schedule"},
      {"proportions", "label proportions at --t with predicted volumes"},
      {"ratios", "neighbouring spacing ratios at --t"},
      {"words", "label word statistics at --t"},
      {"volumes", "partition volumes at --t"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    std::optional<Context> cx;
    if (!opt.config_path.empty()) {
      RunConfig cfg = load_config(opt.config_path);
      if (opt.precision_bits) cfg.precision_bits = opt.precision_bits;
      if (opt.samples) cfg.volume.samples = opt.samples;
      if (!opt.format.empty()) cfg.output_format = opt.format;
      if (!opt.out.empty()) cfg.output_path = opt.out;
      if (cfg.precision_bits < 64 || cfg.precision_bits > kMaxCertifiedBits)
        throw ConfigError("precision bits must lie in [64, " + std::to_string(kMaxCertifiedBits) + "]");
      cx.emplace(Context{opt, Workspace::make(std::move(cfg)), err});
    } else if (!(opt.command == "threegap" && opt.random > 0)) {
      throw ConfigError("--config is required");
    }
    const std::string format = cx ? cx->ws.config.output_format : (opt.format.empty() ? "csv" : opt.format);
    const std::string path = cx ? cx->ws.config.output_path : (opt.out.empty() ? "-" : opt.out);

    Report rep;
    int status = kExitOk;
    std::vector<std::string> mismatches;
    const std::string& c = opt.command;
    if (c == "spectrum") rep = cmd_spectrum(*cx);
    else if (c == "threegap") {
      bool failed = false;
      rep = cmd_threegap(opt, cx ? &*cx : nullptr, failed);
      if (failed) status = kExitInvariant;
    } else if (c == "rates") rep = cmd_rates(*cx);
    else if (c == "labels") rep = cmd_labels(*cx);
    else if (c == "flow") rep = cmd_flow(*cx);
    else if (c == "table6") rep = cmd_table6(*cx, mismatches);
    else if (c == "sweep") rep = cmd_sweep(*cx);
    else if (c == "proportions") rep = cmd_proportions(*cx);
    else if (c == "ratios") rep = cmd_ratios(*cx);
    else if (c == "words") rep = cmd_words(*cx);
    else if (c == "volumes") rep = cmd_volumes(*cx);

    if (path == "-") {
      write_report(rep, format, out);
    } else {
      std::ofstream f(path);
      if (!f) throw ConfigError("cannot write '" + path + "'");
      write_report(rep, format, f);
    }
    for (const auto& m : mismatches) err << "mismatch: " << m << "\n";
    if (!mismatches.empty()) status = kExitInvariant;
    return status;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const UnitError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const FlowError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const RegionError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace gapflow
