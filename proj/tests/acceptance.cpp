// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-statbeam-cli> <scratch-dir>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "statbeam/statbeam.hpp"

using namespace statbeam;

namespace {

struct Outcome {
  bool passed = false;
  std::string summary;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs;
  for (int k = 0; k < n; ++k) xs.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
  return xs;
}

Outcome summarize(const ValidationReport& rep) {
  Outcome out{rep.passed(), {}};
  for (const auto& c : rep.checks) {
    if (!out.summary.empty()) out.summary += "; ";
    out.summary += c.name + " = " + fmt("%.6g", c.measured) + " (" + c.comparison + " " + fmt("%.6g", c.threshold) +
                   (c.passed ? ")" : ", failed)");
  }
  return out;
}

LinkStatistics random_stats(RandomStream& rs) {
  const double a = 0.05 + 3.0 * rs.uniform();
  const double b = 0.05 + 3.0 * rs.uniform();
  return {a, b, std::sqrt(a * b) * rs.uniform()};
}

const ValidationOptions options{};

Outcome criterion_two_user_mc() {
  const double frac = detail::three_sigma_fraction(2, 20, options, 0, false);
  return {frac >= 0.97, fmt("fraction of 200 cells within 3 stderr = %.4f (>= 0.97)", frac)};
}

Outcome criterion_general_m() {
  const double f3 = detail::three_sigma_fraction(3, 10, options, 3000, true);
  const double f4 = detail::three_sigma_fraction(4, 10, options, 4000, true);
  double worst = 0.0;
  for (std::uint32_t k = 0; k < 50; ++k) {
    const Scenario sc = random_scenario(2, options.seed, 5000 + k);
    for (double rho : detail::validation_rhos)
      for (std::size_t i = 0; i < 2; ++i)
        worst = std::max(worst, std::abs(ergodic_rate_general(sc.sigmas[i], sc.ws, i, rho) -
                                         ergodic_rate_m2(sc.sigmas[i], sc.ws[i], sc.ws[1 - i], rho)));
  }
  return {f3 >= 0.97 && f4 >= 0.97 && worst <= 1e-9,
          fmt("M=3 fraction %.4f, M=4 fraction %.4f (>= 0.97); M=2 general vs two-user max diff %.3g (<= 1e-9)", f3,
              f4, worst)};
}

Outcome criterion_density() { return summarize(run_validation("density-uniform", options)); }

// Criteria 4 and 5 share one run of the oracle suite.
const ValidationReport& optimality_report() {
  static const ValidationReport rep = run_validation("optimality-oracle", options);
  return rep;
}

Outcome criterion_low_snr_oracle() {
  const ValidationReport& rep = optimality_report();
  ValidationReport low{"low", {rep.checks[0], rep.checks[1]}};
  return summarize(low);
}

Outcome criterion_high_snr_oracle() {
  const ValidationReport& rep = optimality_report();
  ValidationReport high{"high", {rep.checks[2], rep.checks[3]}};
  const double reference = high_snr_sum_rate_common_basis(4.0, 2.0);
  Outcome out = summarize(high);
  out.summary += fmt("; (4,2) common-basis value %.4f", reference);
  out.passed = out.passed && std::abs(reference - 2.5415) <= 5e-5;
  return out;
}

Outcome criterion_high_snr_limit() {
  RandomStream rs(options.seed, stream_id(StreamPurpose::fixture, 12000));
  double worst_limit = 0.0, worst_forms = 0.0;
  for (int k = 0; k < 20; ++k) {
    const LinkStatistics st = random_stats(rs);
    worst_limit = std::max(worst_limit, std::abs(ergodic_rate_m2(st, 1e6) - high_snr_rate_m2(st)));
    worst_forms = std::max(worst_forms, std::abs(high_snr_rate_m2(st) - high_snr_rate_m2_semi_metric(st)));
  }
  return {worst_limit <= 1e-2 && worst_forms <= 1e-10,
          fmt("max |rate(1e6) - asymptote| %.3g (<= 1e-2); max direct vs g/d form %.3g (<= 1e-10)", worst_limit,
              worst_forms)};
}

Outcome criterion_special_functions() {
  bool ok = true;
  double prev_f = INFINITY, prev_g = -INFINITY;
  for (int k = 1; k <= 1000; ++k) {
    const double z = k / 1000.0;
    const double f = f_func(z), g = g_func(z);
    ok = ok && f < prev_f && g > prev_g && f >= 2.0 - 1e-15 && g <= 2.0 + 1e-15 && g >= 2.0 * std::numbers::ln2;
    prev_f = f;
    prev_g = g;
  }
  ok = ok && std::abs(f_func(1.0) - 2.0) <= 1e-15 && std::abs(g_func(1.0) - 2.0) <= 1e-15 &&
       std::abs(g_func(1e-12) - 2.0 * std::numbers::ln2) <= 1e-9;
  const bool fg_ok = ok;

  bool sandwich = true;
  for (double x : log_grid(1e-9, 1e9, 1000)) {
    const double v = exp_e1(x);
    sandwich = sandwich && 0.5 * std::log1p(2.0 / x) <= v * (1 + 1e-14) && v <= std::log1p(1.0 / x) * (1 + 1e-14);
  }

  using Big = boost::multiprecision::cpp_bin_float_50;
  double worst = 0.0;
  for (double x : log_grid(1e-9, 1e9, 1000)) {
    const Big bx(x);
    const double ref = static_cast<double>(boost::math::expint(1, bx) * boost::multiprecision::exp(bx));
    worst = std::max(worst, std::abs(exp_e1(x) - ref) / ref);
  }
  return {fg_ok && sandwich && worst <= 1e-12,
          std::string("f/g monotone with limits: ") + (fg_ok ? "yes" : "no") +
              "; sandwich on [1e-9, 1e9]: " + (sandwich ? "yes" : "no") +
              fmt("; exp_e1 max relative error %.3g (<= 1e-12)", worst)};
}

Outcome criterion_asymptotic() { return summarize(run_validation("asymptotic-M", options)); }

Outcome criterion_fixed_point() { return summarize(run_validation("fixed-point", options)); }

Outcome criterion_upper_bound() {
  // Probes are random unit-norm beamformer sets. The same covariances with
  // Haar-random orthonormal sets are reported alongside.
  double worst_excess = -INFINITY, worst_orthonormal = -INFINITY, worst_achiever = 0.0;
  int violations = 0;
  for (std::uint32_t k = 0; k < 1000; ++k) {
    const Index m = 2 + k % 7;
    const Scenario sc = random_scenario(m, options.seed, 13000 + k);
    RandomStream rs(options.seed, stream_id(StreamPurpose::restart, 13000 + k));
    const double rho = std::pow(10.0, -2.0 + 5.0 * rs.uniform());
    const std::size_t user = k % static_cast<std::uint32_t>(m);
    const double bound = per_user_upper_bound(sc.sigmas[user], rho, static_cast<double>(m));
    const double excess = asymptotic_sinr(sc.sigmas, sc.ws, user, rho).rate - bound;
    worst_excess = std::max(worst_excess, excess);
    if (excess > 1e-12) ++violations;

    const Matrix q = random_unitary(m, rs);
    std::vector<Vector> cols;
    for (Index c = 0; c < m; ++c) cols.push_back(q.col(c));
    const BeamformerSet orthonormal = BeamformerSet::normalized(std::move(cols));
    worst_orthonormal = std::max(worst_orthonormal, asymptotic_sinr(sc.sigmas, orthonormal, user, rho).rate - bound);

    const BeamformerSet best = per_user_bound_achiever(sc.sigmas[user], user);
    worst_achiever = std::max(worst_achiever, std::abs(asymptotic_sinr(sc.sigmas, best, user, rho).rate - bound));
  }
  return {violations == 0 && worst_achiever <= 1e-12,
          fmt("random unit-norm probes: %.0f of 1000 exceed the bound by > 1e-12, max excess %.3g", violations,
              worst_excess) +
              fmt("; orthonormal probes max excess %.3g; achiever gap %.3g (<= 1e-12)", worst_orthonormal,
                  worst_achiever)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_reproducible_cli(const std::string& cli, const std::string& dir) {
  const std::string config = dir + "/acceptance_sweep.json";
  write_text_file(config, R"({
  "users": 2,
  "covariances": [
    {"kind": "exponential", "r": 0.7, "scale": 1.0, "angle": 0.3},
    {"kind": "random-spectrum", "eigenvalues": [2.0, 0.5], "seed": 11}
  ],
  "snr_grid_db": [-10, 0, 10, 20, 30],
  "mc_samples": 100000,
  "seed": 5,
  "beamformers": "low-snr",
  "grid_resolution": 32,
  "methods": ["closed-form", "monte-carlo", "low-snr", "high-snr", "large-M",
              "design-low-snr", "design-high-snr", "design-fixed-point", "design-grid-oracle"]
}
)");
  const std::string runs[][2] = {{"1", "a"}, {"1", "b"}, {"4", "c"}};
  std::vector<std::string> outputs;
  for (const auto& run : runs) {
    const std::string out = dir + "/acceptance_sweep_" + run[1] + ".csv";
    const std::string cmd = "\"" + cli + "\" sweep --config \"" + config + "\" --out \"" + out + "\" --workers " +
                            run[0] + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "sweep command failed: " + cmd};
    outputs.push_back(slurp(out));
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
  return {same, std::string(same ? "byte-identical" : "different") +
                    " CSV from two runs at 1 worker and one at 4 workers" +
                    fmt(" (%.0f bytes)", static_cast<double>(outputs[0].size()))};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <statbeam-cli> <scratch-dir>\n");
    return 2;
  }
  const std::string cli = argv[1], dir = argv[2];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 two-user closed form vs Monte Carlo", criterion_two_user_mc},
      {"2 general-M closed form vs Monte Carlo", criterion_general_m},
      {"3 quadratic-form density is uniform", criterion_density},
      {"4 low-SNR design vs grid oracle", criterion_low_snr_oracle},
      {"5 high-SNR design vs grid oracle", criterion_high_snr_oracle},
      {"6 closed form tends to the high-SNR limit", criterion_high_snr_limit},
      {"7 special functions", criterion_special_functions},
      {"8 large-M gap shrinks with M", criterion_asymptotic},
      {"9 fixed-point design", criterion_fixed_point},
      {"10 per-user large-M upper bound", criterion_upper_bound},
      {"11 reproducible CLI sweep", [&] { return criterion_reproducible_cli(cli, dir); }},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  criterion %s: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.summary.c_str(), secs);
    std::fflush(stdout);
    if (!o.passed) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
