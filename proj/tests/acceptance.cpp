// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "gapflow/cli.hpp"
#include "gapflow/partition_volumes.hpp"
#include "gapflow/quasi_analyzer.hpp"
#include "test_fields.hpp"

using namespace gapflow;
using json = nlohmann::json;

namespace {

const std::string kConfig = std::string(GAPFLOW_SOURCE_DIR) + "/configs/cubic7_box.json";

struct Outcome {
  bool pass;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

FieldElement el(std::initializer_list<long> c) {
  std::vector<Rational> v;
  for (long x : c) v.emplace_back(x);
  return FieldElement(v);
}

struct Cubic {
  NumberField F = testing::cubic7();
  UnitSystem us = UnitSystem::make(F, {el({2, -4, 1}), el({-5, 5, -1})});
};

const Cubic& cubic() {
  static const Cubic c;
  return c;
}

json cli_json(std::vector<std::string> args, int& code) {
  args.insert(args.end(), {"--config", kConfig, "--format", "json", "--full-precision"});
  std::ostringstream out, err;
  code = run_cli(args, out, err);
  if (code != 0) return json();
  return json::parse(out.str());
}

// "(a, b, c)" -> {a, b, c}
std::vector<double> parse_tuple(std::string s) {
  std::vector<double> v;
  for (char& ch : s)
    if (ch == '(' || ch == ')' || ch == ',') ch = ' ';
  std::istringstream in(s);
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Outcome rates() {
  Clock clock;
  int code;
  auto j = cli_json({"rates"}, code);
  double secs = clock.seconds();
  if (code != 0) return {false, "exit code " + std::to_string(code)};
  const double want[2] = {1.96080, -0.70061};
  double worst = 0;
  for (std::size_t i = 0; i < 2; ++i)
    worst = std::max(worst, std::fabs(std::stod(j["rows"][i]["beta"].get<std::string>()) - want[i]));
  return {worst <= 1e-5 && secs < 1.0, "max |beta - ref| = " + num(worst) + ", " + num(secs) + " s"};
}

Outcome flow() {
  Clock clock;
  int code;
  auto j = cli_json({"flow"}, code);
  double secs = clock.seconds();
  if (code != 0) return {false, "exit code " + std::to_string(code)};
  std::vector<std::complex<double>> got;
  for (const auto& row : j["rows"])
    got.emplace_back(std::stod(row["re"].get<std::string>()), std::stod(row["im"].get<std::string>()));
  const std::vector<std::complex<double>> want = {{0, 6.16003}, {0, -2.20103}, {-3.0, 3.95900}};
  double worst = 0;
  for (const auto& w : want) {
    // Match up to conjugation: the sign of the imaginary part depends on the
    // embedding ordering convention reported in eigenvalue_order.
    double best = 1e300;
    for (const auto& g : got) {
      for (const auto& h : {g, std::conj(g)})
        best = std::min(best, std::max(std::fabs(h.real() - w.real()), std::fabs(h.imag() - w.imag())));
    }
    worst = std::max(worst, best);
  }
  bool ok = worst <= 1e-4 && j["k"] == 2 && got.size() == 3 && secs < 1.0;
  return {ok, "max component error " + num(worst) + ", k = " + j["k"].dump() + ", " + num(secs) + " s"};
}

struct TableRow {
  long t;
  std::vector<double> exact, scaled;
};

const std::vector<TableRow> kTable = {
    {3, {-5, 8, -2}, {-4.80194, 7.86690, -1.97869}},
    {10, {-3, 4, 0}, {-3.02177, 4.01463, -0.00234}},
    {31, {-41, 68, -18}, {-40.99761, 67.99839, -17.99974}},
    {100, {186, -308, 81}, {186.00012, -308.00008, 81.00001}},
    {316, {-20, 74, -63}, {-20.00001, 74.00001, -63.00000}},
    {1000, {424, -609, 61}, {424.00000, -609.00000, 61.00000}},
};

Outcome table6() {
  Clock clock;
  int code;
  auto j = cli_json({"table6"}, code);
  double secs = clock.seconds();
  if (code != 0) return {false, "exit code " + std::to_string(code)};
  if (j["rows"].size() != kTable.size()) return {false, "row count " + std::to_string(j["rows"].size())};
  bool exact_ok = true;
  double worst = 0;
  for (std::size_t i = 0; i < kTable.size(); ++i) {
    const auto& row = j["rows"][i];
    exact_ok = exact_ok && std::stol(row["t"].get<std::string>()) == kTable[i].t &&
               parse_tuple(row["n(u1(t))"].get<std::string>()) == kTable[i].exact;
    auto sc = parse_tuple(row["t*g3"].get<std::string>());
    for (std::size_t a = 0; a < 3; ++a) worst = std::max(worst, std::fabs(sc[a] - kTable[i].scaled[a]));
  }
  return {exact_ok && worst <= 1e-4 && secs < 5.0,
          std::string("integer rows ") + (exact_ok ? "match" : "differ") + ", max float error " + num(worst) + ", " +
              num(secs) + " s"};
}

Outcome error_law() {
  const auto& c = cubic();
  auto qf = QuasiFlow::make(c.F, c.us);
  double prev = 1e300;
  bool ok = true;
  std::string detail;
  for (long t : {10, 31, 100, 316, 1000}) {
    auto p = predict_expansion(qf, c.us, c.F, Rational(t));
    const double e = p.error * t;
    ok = ok && e <= 10.0 / t && e < prev;
    prev = e;
    detail += (detail.empty() ? "" : ", ") + std::to_string(t) + ":" + num(e);
  }
  return {ok, "max |n - t g3| by t: " + detail};
}

// Criteria 5 and 8 share the spectra for t <= 300.
struct BoxScan {
  std::size_t max_distinct = 0;
  long argmax = 0;
  double worst_ratio = 0;  // max spacing * t^2 / K'
  double K_prime = 0;
  double seconds = 0;
};

const BoxScan& box_scan() {
  static const BoxScan scan = [] {
    BoxScan b;
    Clock clock;
    const auto& c = cubic();
    auto R = ConvexRegion::unit_box(2);
    b.K_prime = cubic_transference_constant(c.F).K_prime;
    for (long t = 1; t <= 300; ++t) {
      auto s = spectrum(c.F, R, Rational(t));
      if (s.num_distinct() > b.max_distinct) {
        b.max_distinct = s.num_distinct();
        b.argmax = t;
      }
      if (t > 1) b.worst_ratio = std::max(b.worst_ratio, max_scaled_spacing(s) / b.K_prime);
    }
    b.seconds = clock.seconds();
    return b;
  }();
  return scan;
}

Outcome distinct_bound() {
  const auto& b = box_scan();
  return {b.max_distinct <= 10 && b.seconds < 120,
          "max D(t) = " + std::to_string(b.max_distinct) + " at t = " + std::to_string(b.argmax) + ", " +
              num(b.seconds) + " s"};
}

Outcome three_gap() {
  Clock clock;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0, 1);
  std::size_t violations = 0, max_d = 0;
  for (int k = 0; k < 100; ++k) {
    double w = u(rng);
    while (w == 0) w = u(rng);
    auto rep = three_gap_check(w, 500);
    violations += rep.violations.size();
    max_d = std::max(max_d, rep.max_distinct);
  }
  double secs = clock.seconds();
  return {violations == 0 && max_d <= 3 && secs < 60,
          "violations " + std::to_string(violations) + ", max D " + std::to_string(max_d) + ", " + num(secs) + " s"};
}

Outcome label_stability() {
  const auto& c = cubic();
  auto R = ConvexRegion::unit_box(2);
  std::vector<Rational> grid;
  for (int i = 4; i <= 12; ++i) grid.emplace_back(static_cast<long>(std::floor(std::pow(10.0, i / 4.0) + 1e-9)));
  auto sw = label_sweep(c.F, c.us, R, grid);
  // Membership of every rescaled spacing in the accumulated set.
  bool covered = true;
  for (const auto& t : grid) {
    auto s = spectrum(c.F, R, t);
    for (const auto& x : rescaled_distinct(c.F, s, positive_unit_at(c.F, c.us, t)))
      covered = covered && sw.labels.find(x).has_value();
  }
  const std::size_t half = grid.size() / 2 + 1;  // entries strictly in the second half
  std::size_t late = 0;
  std::string growth;
  for (std::size_t i = 0; i < sw.entries.size(); ++i) {
    if (i >= half) late += sw.entries[i].new_labels;
    growth += (i ? "," : "") + std::to_string(sw.entries[i].new_labels);
  }
  return {covered && late == 0,
          std::to_string(sw.labels.size()) + " labels, new per grid point [" + growth + "], " +
              std::to_string(late) + " added in the final half"};
}

Outcome transference() {
  const auto& b = box_scan();
  return {b.worst_ratio <= 1.0, "max spacing * t^2 / K' = " + num(b.worst_ratio, 4) + " (K' = " + num(b.K_prime, 5) + ")"};
}

Outcome dual_path() {
  const auto& c = cubic();
  auto R = ConvexRegion::unit_box(2);
  bool ok = true;
  std::size_t points = 0;
  for (long t : {20, 50, 100, 200}) {
    auto s = spectrum(c.F, R, Rational(t));
    auto u1 = positive_unit_at(c.F, c.us, Rational(t));
    LabelSet labels;
    labels.merge(c.F, rescaled_distinct(c.F, s, u1));
    auto part = partition_lattice(c.F, s, labels, u1);
    auto props = proportions(c.F, s, labels, u1);
    ok = ok && part.agree && part.counts == props.counts;
    ok = ok && word_counts_formula(part, 1) == word_stats(props, 1).counts;
    points += s.count();
  }
  return {ok, std::to_string(points) + " lattice points classified, length-2 words compared"};
}

struct ConvergenceRun {
  std::vector<double> ts, diff, budget;
};

ConvergenceRun convergence(const ConvexRegion& R, const VolumeOptions& opts) {
  const auto& c = cubic();
  ConvergenceRun run;
  for (long t : {50, 100, 200, 400}) {
    auto s = spectrum(c.F, R, Rational(t));
    auto u1 = positive_unit_at(c.F, c.us, Rational(t));
    LabelSet labels;
    labels.merge(c.F, rescaled_distinct(c.F, s, u1));
    auto props = proportions(c.F, s, labels, u1);
    auto sv = shift_vectors(c.F, labels, u1, Rational(t));
    auto pred = predicted_proportions(partition_volumes(R, sv.normalized, opts), R.volume());
    double d = 0, e = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      d = std::max(d, std::fabs(Rational(props.p[j]).get_d() - pred.value[j]));
      e = std::max(e, pred.error[j]);
    }
    run.ts.push_back(static_cast<double>(t));
    run.diff.push_back(d);
    run.budget.push_back(e);
  }
  return run;
}

Outcome proportion_convergence() {
  const auto& c = cubic();
  auto simplex = ConvexRegion::simplex(std::make_shared<const NumberField>(c.F));
  VolumeOptions mc;
  mc.method = VolumeMethod::monte_carlo;
  mc.samples = std::size_t{1} << 22;
  mc.seed = 24301;
  auto run = convergence(simplex, mc);
  double worst_share = 0;
  for (std::size_t i = 0; i < run.ts.size(); ++i) worst_share = std::max(worst_share, run.budget[i] / run.diff[i]);
  const double k = slope(run.ts, run.diff);

  VolumeOptions exact;
  exact.method = VolumeMethod::exact_box;
  auto box = convergence(ConvexRegion::unit_box(2), exact);

  std::string diffs;
  for (std::size_t i = 0; i < run.ts.size(); ++i) diffs += (i ? "," : "") + num(run.diff[i]);
  return {k >= -1.4 && k <= -0.6 && worst_share <= 0.25,
          "simplex slope " + num(k) + " (diffs " + diffs + "), max budget/diff " + num(worst_share) +
              "; box slope " + num(slope(box.ts, box.diff)) + " (informational)"};
}

Outcome linear_algebra() {
  const auto& c = cubic();
  auto qf = QuasiFlow::make(c.F, c.us);
  double exp_err = 0, comm = 0, fact = 0, imag = 0;
  const auto& L = qf.L_matrices();
  for (std::size_t j = 0; j < L.size(); ++j) {
    const auto& Ej = qf.E()[j];
    Eigen::MatrixXd E(Ej.rows(), Ej.cols());
    for (std::size_t a = 0; a < Ej.rows(); ++a)
      for (std::size_t b = 0; b < Ej.cols(); ++b) E(a, b) = Rational(Ej(a, b)).get_d();
    Eigen::MatrixXcd ex = L[j].exp();
    exp_err = std::max(exp_err, (ex - E.cast<std::complex<double>>()).norm() / E.norm());
    for (std::size_t k = j + 1; k < L.size(); ++k)
      comm = std::max(comm, (L[j] * L[k] - L[k] * L[j]).norm() / (L[j].norm() * L[k].norm()));
  }
  for (long t : {3, 10, 31, 100, 316, 1000}) {
    fact = std::max(fact, factorization_check(qf, c.us, c.F, Rational(t)).relative_residual);
    imag = std::max(imag, predict_expansion(qf, c.us, c.F, Rational(t)).max_imag);
  }
  return {exp_err <= 1e-9 && comm <= 1e-10 && fact <= 1e-8 && imag <= 1e-10,
          "exp " + num(exp_err) + ", commutator " + num(comm) + ", factorisation " + num(fact) + ", imag " + num(imag)};
}

FieldElement random_element(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> num_d(-50, 50), den_d(1, 12);
  std::vector<Rational> v;
  for (std::size_t i = 0; i < n; ++i) {
    Rational q(num_d(rng), den_d(rng));
    q.canonicalize();
    v.push_back(q);
  }
  return FieldElement(v);
}

Outcome exactness() {
  Clock clock;
  const NumberField fields[] = {testing::cubic7(), testing::golden(), testing::cbrt2()};
  std::mt19937_64 rng(7);
  std::size_t checks = 0, failures = 0;
  auto check = [&](bool ok) {
    ++checks;
    if (!ok) ++failures;
  };
  for (int round = 0; checks < 10000; ++round) {
    const auto& F = fields[round % 3];
    const std::size_t n = F.degree();
    auto a = random_element(rng, n), b = random_element(rng, n), x = random_element(rng, n);
    check(F.mul(F.mul(a, b), x) == F.mul(a, F.mul(b, x)));
    check(F.mul(a, b + x) == F.mul(a, b) + F.mul(a, x));
    if (!a.is_zero()) check(F.mul(a, F.inv(a)) == F.one());
    check(F.mult_matrix(F.mul(a, b)) == F.mult_matrix(a) * F.mult_matrix(b));
  }
  double secs = clock.seconds();
  return {failures == 0 && secs < 10,
          std::to_string(checks) + " identities, " + std::to_string(failures) + " failures, " + num(secs) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rate vector", rates},
      {"flow eigenvalues", flow},
      {"worked-example table", table6},
      {"error law", error_law},
      {"distinct-spacing bound", distinct_bound},
      {"three-gap suite", three_gap},
      {"uniform labelling stability", label_stability},
      {"transference bound", transference},
      {"partition dual path", dual_path},
      {"proportion convergence", proportion_convergence},
      {"linear-algebra invariants", linear_algebra},
      {"exactness oracle", exactness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail << "\n"
              << std::flush;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
