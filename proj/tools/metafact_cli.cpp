// metafact: command-line front end for the meta-factorization library.
//
//   metafact factorize --synthetic rank_k:20x15:k=5:seed=7 --method svd-meta --rank 5
//   metafact lowrank --synthetic decaying_geometric:100x80 --method nystrom --rank 10 --trials 20
//   metafact verify --check periodicity --period 2 --pmax 3
//
// Reports go to stdout as one JSON document; diagnostics go to stderr.
// Exit codes: 0 success, 1 failed check, 2 validation error, 3 numerical breakdown.

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metafact/core.hpp"
#include "metafact/factorizations.hpp"
#include "metafact/io.hpp"
#include "metafact/kernels.hpp"
#include "metafact/periodic.hpp"
#include "metafact/pinv.hpp"
#include "metafact/randomized.hpp"

#ifndef METAFACT_VERSION
#define METAFACT_VERSION "0.0.0"
#endif

namespace {

using json = nlohmann::ordered_json;
using metafact::Error;
using metafact::ErrorKind;
using metafact::Index;
using metafact::Matrix;
namespace core = metafact::core;
namespace io = metafact::io;
namespace kernels = metafact::kernels;

constexpr const char* kDefaultVerifyInput = "rank_k:20x15:k=5";

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct InputOptions {
  std::string path;
  std::string synthetic;
  std::optional<std::uint64_t> seed;
};

struct Input {
  Matrix a;
  json descriptor;
  std::uint64_t seed = 0;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("METAFACT_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-') {
    throw Error(ErrorKind::InvalidArgument, "METAFACT_SEED must be an unsigned integer, got '" + std::string(env) + "'");
  }
  return v;
}

Input load_input(const InputOptions& opt, const char* fallback_synthetic) {
  Input in;
  in.seed = opt.seed ? *opt.seed : default_seed();
  if (!opt.path.empty() && !opt.synthetic.empty()) {
    throw Error(ErrorKind::InvalidArgument, "--input and --synthetic are mutually exclusive");
  }
  if (!opt.path.empty()) {
    const bool csv = opt.path.size() >= 4 && opt.path.compare(opt.path.size() - 4, 4, ".csv") == 0;
    in.a = csv ? io::read_csv(opt.path) : io::read_matrix_market(opt.path);
    in.descriptor = {{"path", opt.path}};
  } else {
    const std::string text = !opt.synthetic.empty() ? opt.synthetic : std::string(fallback_synthetic ? fallback_synthetic : "");
    if (text.empty()) throw Error(ErrorKind::InvalidArgument, "one of --input or --synthetic is required");
    const io::SyntheticSpec spec = io::parse_synthetic_spec(text, in.seed);
    in.a = io::generate(spec);
    in.descriptor = {{"synthetic", spec.to_string()}};
  }
  in.descriptor["rows"] = in.a.rows();
  in.descriptor["cols"] = in.a.cols();
  return in;
}

json report_header(const std::string& command, const std::vector<std::string>& argv, const Input& in) {
  json r;
  r["tool"] = "metafact";
  r["version"] = METAFACT_VERSION;
  r["command"] = command;
  r["argv"] = argv;
  r["input"] = in.descriptor;
  r["seed"] = in.seed;
  return r;
}

void add_meta_fields(json& rec, const core::FactorReport& rep) {
  rec["residual_rel"] = number(rep.residual_rel);
  rec["idem_defect_p"] = number(rep.idem_defect_p);
  rec["idem_defect_r"] = number(rep.idem_defect_r);
  rec["detected_rank"] = rep.detected_rank;
}

double truncated_svd_residual(const metafact::Vector& s, Index k) {
  double total = 0.0;
  double tail = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    total += s[i] * s[i];
    if (i >= k) tail += s[i] * s[i];
  }
  return total == 0.0 ? 0.0 : std::sqrt(tail / total);
}

void write_factors(const std::string& prefix, const Matrix& f, const Matrix& g, const Matrix& h) {
  io::write_matrix_market(f, prefix + "_F.mtx");
  io::write_matrix_market(g, prefix + "_G.mtx");
  io::write_matrix_market(h, prefix + "_H.mtx");
}

// ---- factorize -----------------------------------------------------------

struct FactorizeOptions {
  InputOptions input;
  std::string method;
  std::optional<Index> rank;
  std::string out;
};

int cmd_factorize(const FactorizeOptions& opt, const std::vector<std::string>& argv) {
  const Input in = load_input(opt.input, nullptr);
  const Matrix& a = in.a;
  if (opt.method != "pinv-meta" && !opt.rank) {
    throw Error(ErrorKind::InvalidArgument, "--rank is required for method " + opt.method);
  }
  const Index k = opt.rank.value_or(0);

  json rec;
  rec["method"] = opt.method;
  const auto start = std::chrono::steady_clock::now();
  Matrix f, g, h;
  bool structural = false;
  if (opt.method == "svd-meta") {
    const core::MetaFactorization mf = metafact::factorizations::svd_via_meta(a, k);
    rec["k"] = mf.k;
    add_meta_fields(rec, mf.report);
    const double gnorm = metafact::frobenius_norm(mf.g);
    const double off = gnorm == 0.0 ? 0.0 : metafact::off_diagonal_norm(mf.g) / gnorm;
    rec["off_diagonal_rel"] = number(off);
    structural = off <= 1e-10;
    f = mf.basis.f, g = mf.g, h = mf.basis.h;
  } else if (opt.method == "cpqr") {
    const auto cm = metafact::factorizations::cpqr_mixing(a, k);
    rec["k"] = cm.meta.k;
    add_meta_fields(rec, cm.meta.report);
    rec["deviation"] = number(cm.deviation);
    structural = cm.deviation <= 1e-10;
    f = cm.meta.basis.f, g = cm.meta.g, h = cm.meta.basis.h;
  } else if (opt.method == "pinv-meta") {
    const core::MetaFactorization mf = metafact::pinv::pinv_as_meta(a);
    rec["k"] = mf.k;
    add_meta_fields(rec, mf.report);
    structural = mf.report.within_tolerance;
    f = mf.basis.f, g = mf.g, h = mf.basis.h;
  } else {
    using metafact::factorizations::UtvVariant;
    const UtvVariant variant = opt.method == "utv-row-svd" ? UtvVariant::RowSvd
                               : opt.method == "utv-svd"   ? UtvVariant::TwoSidedSvd
                               : opt.method == "utv-qr"    ? UtvVariant::TwoSidedQr
                                                           : UtvVariant::TwoSidedLu;
    const auto utv = metafact::factorizations::utv(a, k, variant);
    rec["k"] = k;
    rec["variant"] = metafact::factorizations::variant_name(variant);
    rec["residual_rel"] = number(utv.residual_rel);
    rec["t_structure"] = utv.structure == kernels::UpLo::Upper ? "upper" : "lower";
    const bool triangular = utv.t_structurally_triangular();
    const double du = metafact::orthonormality_defect(utv.u);
    const double dv = metafact::orthonormality_defect(utv.v);
    rec["t_structurally_triangular"] = triangular;
    rec["u_orthonormality_defect"] = number(du);
    rec["v_orthonormality_defect"] = number(dv);
    rec["u_claimed_orthonormal"] = utv.u_orthonormal();
    rec["v_claimed_orthonormal"] = utv.v_orthonormal();
    structural = triangular && (!utv.u_orthonormal() || du <= 1e-10) && (!utv.v_orthonormal() || dv <= 1e-10);
    f = utv.u, g = utv.t, h = utv.v;
  }
  rec["structural_checks_passed"] = structural;
  rec["elapsed_seconds"] = seconds_since(start);
  if (!opt.out.empty()) {
    write_factors(opt.out, f, g, h);
    rec["factors"] = {opt.out + "_F.mtx", opt.out + "_G.mtx", opt.out + "_H.mtx"};
  }

  json report = report_header("factorize", argv, in);
  report["records"] = json::array({rec});
  std::cout << report.dump() << '\n';
  return 0;
}

// ---- lowrank -------------------------------------------------------------

struct LowrankOptions {
  InputOptions input;
  std::string method;
  std::optional<Index> rank;
  std::optional<Index> oversample;
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::string mode = "orthogonal";
  Index trials = 1;
  std::optional<Index> max_steps;
  std::optional<double> pivot_tol;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const Index n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_lowrank(const LowrankOptions& opt, const std::vector<std::string>& argv) {
  namespace rz = metafact::randomized;
  const Input in = load_input(opt.input, nullptr);
  const Matrix& a = in.a;
  const bool needs_rank = opt.method == "nystrom" || opt.method == "nystrom-direct" || opt.method == "cur-random";
  if (needs_rank && !opt.rank) throw Error(ErrorKind::InvalidArgument, "--rank is required for method " + opt.method);
  if (opt.trials == 0) throw Error(ErrorKind::InvalidArgument, "--trials must be at least 1");
  if (opt.method == "cur" && (opt.rows.empty() || opt.cols.empty())) {
    throw Error(ErrorKind::InvalidArgument, "method cur needs --rows and --cols");
  }
  const rz::CurMode mode = opt.mode == "orthogonal" ? rz::CurMode::Orthogonal : rz::CurMode::Interpolative;

  json trials = json::array();
  std::vector<double> residuals;
  Index baseline_k = opt.rank.value_or(0);
  for (Index t = 0; t < opt.trials; ++t) {
    const std::uint64_t seed = metafact::trial_seed(in.seed, t);
    const auto start = std::chrono::steady_clock::now();
    json rec;
    rec["trial"] = t;
    rec["seed"] = seed;
    double residual = 0.0;
    if (opt.method == "nystrom") {
      const core::MetaFactorization mf = rz::generalized_nystrom(a, {*opt.rank, opt.oversample, seed});
      residual = mf.report.residual_rel;
      rec["idem_defect_p"] = number(mf.report.idem_defect_p);
      rec["idem_defect_r"] = number(mf.report.idem_defect_r);
      rec["detected_rank"] = mf.report.detected_rank;
    } else if (opt.method == "nystrom-direct") {
      residual = core::relative_residual(a, rz::nystrom_unstable(a, {*opt.rank, opt.oversample, seed}));
    } else if (opt.method == "cur" || opt.method == "cur-random") {
      const rz::CurFactors c = opt.method == "cur" ? rz::cur(a, opt.rows, opt.cols, mode)
                                                   : rz::cur_random_naive(a, *opt.rank, seed, mode);
      residual = core::relative_residual(a, c.reconstruct());
      rec["rows"] = c.row_idx;
      rec["cols"] = c.col_idx;
      if (!opt.rank) baseline_k = c.row_idx.size();
    } else {
      const Index max_steps = opt.max_steps.value_or(std::min(a.rows(), a.cols()));
      const rz::WedderburnResult w = rz::wedderburn_reduce(a, max_steps, opt.pivot_tol);
      residual = w.meta.report.residual_rel;
      rec["steps"] = w.steps.size();
      json pivots = json::array();
      json gs = json::array();
      for (const rz::WedderburnStep& s : w.steps) {
        pivots.push_back({s.pivot->first, s.pivot->second});
        gs.push_back(number(s.g_r));
      }
      rec["pivots"] = pivots;
      rec["g"] = gs;
      if (!opt.rank) baseline_k = w.steps.size();
    }
    rec["residual_rel"] = number(residual);
    rec["elapsed_seconds"] = seconds_since(start);
    residuals.push_back(residual);
    trials.push_back(rec);
  }

  json record;
  record["method"] = opt.method;
  record["k"] = baseline_k;
  if (opt.method == "nystrom" || opt.method == "nystrom-direct") {
    record["oversample"] = opt.oversample.value_or(baseline_k);
  }
  if (opt.method == "cur" || opt.method == "cur-random") record["mode"] = opt.mode;
  record["trials"] = trials;
  record["aggregate"] = {{"median", number(median(residuals))},
                         {"min", number(*std::min_element(residuals.begin(), residuals.end()))},
                         {"max", number(*std::max_element(residuals.begin(), residuals.end()))}};
  record["baseline_truncated_svd_residual"] = number(truncated_svd_residual(kernels::singular_values(a), baseline_k));

  json report = report_header("lowrank", argv, in);
  report["records"] = json::array({record});
  std::cout << report.dump() << '\n';
  return 0;
}

// ---- verify --------------------------------------------------------------

struct VerifyOptions {
  InputOptions input;
  std::vector<std::string> checks;
  std::optional<Index> rank;
  Index period = 2;
  std::string generator = "shift";
  Index pmax = 3;
  std::string factors;
};

class CheckList {
 public:
  explicit CheckList(std::string name) : name_(std::move(name)) {}

  void item(const std::string& name, double measured, double threshold) {
    const bool ok = measured <= threshold;
    items_.push_back({{"name", name}, {"measured", number(measured)}, {"threshold", threshold}, {"passed", ok}});
    if (!ok) failed_.push_back(name_ + "." + name);
  }
  void equal(const std::string& name, Index measured, Index expected) {
    const bool ok = measured == expected;
    items_.push_back({{"name", name}, {"measured", measured}, {"expected", expected}, {"passed", ok}});
    if (!ok) failed_.push_back(name_ + "." + name);
  }
  void info(const std::string& key, json value) { info_[key] = std::move(value); }

  json to_json() const {
    json out{{"check", name_}, {"passed", failed_.empty()}, {"items", items_}};
    if (!info_.empty()) out["info"] = info_;
    return out;
  }
  const std::vector<std::string>& failed() const { return failed_; }

 private:
  std::string name_;
  json items_ = json::array();
  json info_ = json::object();
  std::vector<std::string> failed_;
};

void check_projector(CheckList& out, const Matrix& a, Index k, std::uint64_t seed) {
  metafact::Rng rng(seed);
  const Index m = a.rows();
  const Index n = a.cols();
  const core::BasisPair basis{a * rng.gaussian(n, k), metafact::transpose_times(a, rng.gaussian(m, k))};
  const double fnorm = metafact::frobenius_norm(basis.f);
  const struct {
    const char* label;
    Index width_b;
    Index width_d;
  } cases[] = {{"square", k, k}, {"oblique", std::min(m, k + 2), std::min(n, k + 2)}};
  for (const auto& c : cases) {
    const core::SketchPair sk{rng.gaussian(m, c.width_b), rng.gaussian(n, c.width_d)};
    const core::ProjectorPair pair = core::solve_projector_equation(basis, sk);
    const core::FactorReport rep = core::verify_idempotent(pair, basis, core::projector_tolerance(basis));
    const std::string p = c.label;
    const Matrix ytf = metafact::transpose_times(pair.y, basis.f);
    out.item(p + ".ytf_identity_defect", metafact::frobenius_norm(ytf - Matrix::identity(k)),
             pair.oblique ? 1e-9 : 1e-10);
    out.item(p + ".idem_defect_p", rep.idem_defect_p, 1e-10);
    out.item(p + ".idem_defect_r", rep.idem_defect_r, 1e-10);
    out.item(p + ".fytf_defect_rel", metafact::frobenius_norm(basis.f * ytf - basis.f) / fnorm, 1e-9);
    out.equal(p + ".rank_p", rep.rank_p, k);
  }
}

void check_penrose(CheckList& out, const Matrix& a) {
  const Matrix ap = kernels::pinv(a);
  const double na = metafact::frobenius_norm(a);
  const double scale = std::max(na, metafact::frobenius_norm(ap) * na * na);
  const double tol = 256.0 * static_cast<double>(std::max(a.rows(), a.cols())) * metafact::kEps * scale;
  const Matrix aap = a * ap;
  const Matrix apa = ap * a;
  out.item("a_ap_a", metafact::frobenius_norm(aap * a - a), tol);
  out.item("ap_a_ap", metafact::frobenius_norm(apa * ap - ap), tol);
  out.item("a_ap_symmetric", metafact::frobenius_norm(aap.transpose() - aap), tol);
  out.item("ap_a_symmetric", metafact::frobenius_norm(apa.transpose() - apa), tol);
}

// Cyclic generators padded with an identity block when the period does not
// fit k exactly; the padded matrix still satisfies Z^N = I.
struct PaddedGenerator {
  Matrix z;
  Index padding = 0;
};

PaddedGenerator padded_generator(Index k, Index period, metafact::periodic::GeneratorKind kind) {
  using metafact::periodic::GeneratorKind;
  const Index unit = kind == GeneratorKind::Shift ? period : 2;
  const Index core_size = k - k % unit;
  PaddedGenerator out{Matrix::identity(k), k - core_size};
  if (core_size > 0) out.z.set_block(0, 0, metafact::periodic::make_cyclic_generator(core_size, period, kind));
  return out;
}

void check_periodicity(CheckList& out, const Matrix& a, Index k, const VerifyOptions& opt) {
  namespace per = metafact::periodic;
  const per::GeneratorKind kind = opt.generator == "shift" ? per::GeneratorKind::Shift : per::GeneratorKind::Rotation;
  if (opt.period == 0) throw Error(ErrorKind::InvalidPeriod, "period must be at least 1");
  const PaddedGenerator padded = padded_generator(k, opt.period, kind);
  const per::PeriodicGenerators gen(padded.z, padded.z.transpose(), opt.period);
  const kernels::SvdFactors s = kernels::svd(a);
  const core::BasisPair basis{s.u.block(0, 0, a.rows(), k), s.v.block(0, 0, a.cols(), k)};
  const per::PeriodicFactorization pf = per::periodic_meta_factorize(a, basis, gen);
  const per::PowerDefects d = per::projector_power_defects(basis, pf.pair, opt.period);
  out.item("column_projector_power_defect", d.column, 1e-9);
  out.item("row_projector_power_defect", d.row, 1e-9);
  const per::PeriodicityReport rep = per::verify_periodicity(a, basis, pf.pair, gen, opt.pmax);
  json intermediate = json::array();
  for (const per::PowerResidual& p : rep.powers) {
    if (p.power == 0) continue;
    if (p.multiple_of_period) {
      out.item("power_" + std::to_string(p.power), p.residual_rel, rep.tolerance);
    } else {
      intermediate.push_back({{"power", p.power}, {"residual_rel", number(p.residual_rel)}});
    }
  }
  out.info("period", opt.period);
  out.info("generator", opt.generator);
  out.info("pmax", opt.pmax);
  out.info("identity_padding", padded.padding);
  out.info("intermediate_powers", intermediate);
}

void check_rank_reduction(CheckList& out, const Matrix& a, Index k, std::uint64_t seed) {
  namespace rz = metafact::randomized;
  auto record = [&](const std::string& label, const Matrix& f, const Matrix& g, const Matrix& h) {
    const rz::RankReductionReport r = rz::verify_rank_reduction_conditions(a, f, g, h);
    out.item(label + ".f_defect", r.f_defect, r.tolerance);
    out.item(label + ".h_defect", r.h_defect, r.tolerance);
    out.item(label + ".g_defect", r.g_defect, r.tolerance);
    out.equal(label + ".rank_residual", r.rank_residual, r.rank_a - std::min(r.rank_a, r.rank_fgh));
  };
  const rz::WedderburnResult w = rz::wedderburn_reduce(a, k);
  record("wedderburn", w.meta.basis.f, w.meta.g, w.meta.basis.h);
  const core::MetaFactorization ny = rz::generalized_nystrom(a, {k, 0, seed});
  record("nystrom", ny.basis.f, ny.g, ny.basis.h);
}

void check_reconstruction(CheckList& out, const Matrix& a, const std::string& prefix) {
  if (prefix.empty()) throw Error(ErrorKind::InvalidArgument, "--check reconstruction needs --factors <prefix>");
  const Matrix f = io::read_matrix_market(prefix + "_F.mtx");
  const Matrix g = io::read_matrix_market(prefix + "_G.mtx");
  const Matrix h = io::read_matrix_market(prefix + "_H.mtx");
  if (f.rows() != a.rows() || h.rows() != a.cols() || g.rows() != f.cols() || g.cols() != h.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "factor files do not conform to the input matrix");
  }
  out.item("residual_rel", core::relative_residual(a, core::reconstruct(f, g, h)), 1e-8);
  out.info("factors", prefix);
}

int cmd_verify(const VerifyOptions& opt, const std::vector<std::string>& argv) {
  const Input in = load_input(opt.input, kDefaultVerifyInput);
  const Matrix& a = in.a;
  std::vector<std::string> checks = opt.checks;
  if (checks.empty()) {
    checks = {"projector", "penrose", "periodicity", "rank-reduction"};
    if (!opt.factors.empty()) checks.push_back("reconstruction");
  }
  const Index rank = kernels::numerical_rank(a);
  const Index k = opt.rank.value_or(rank);
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "rank must be at least 1");
  if (k > rank) {
    throw Error(ErrorKind::RankTooLarge,
                "requested rank " + std::to_string(k) + " exceeds numerical rank " + std::to_string(rank));
  }

  json results = json::array();
  std::vector<std::string> failed;
  for (const std::string& name : checks) {
    CheckList list(name);
    const auto start = std::chrono::steady_clock::now();
    if (name == "projector") {
      check_projector(list, a, k, in.seed);
    } else if (name == "penrose") {
      check_penrose(list, a);
    } else if (name == "periodicity") {
      check_periodicity(list, a, k, opt);
    } else if (name == "rank-reduction") {
      check_rank_reduction(list, a, k, in.seed);
    } else {
      check_reconstruction(list, a, opt.factors);
    }
    json j = list.to_json();
    j["elapsed_seconds"] = seconds_since(start);
    results.push_back(j);
    failed.insert(failed.end(), list.failed().begin(), list.failed().end());
  }

  json report = report_header("verify", argv, in);
  report["k"] = k;
  report["checks"] = results;
  report["passed"] = failed.empty();
  report["failed"] = failed;
  std::cout << report.dump() << '\n';
  for (const std::string& f : failed) std::cerr << "check failed: " << f << '\n';
  return failed.empty() ? 0 : 1;
}

// ---- generate ------------------------------------------------------------

struct GenerateOptions {
  std::string synthetic;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_generate(const GenerateOptions& opt, const std::vector<std::string>& argv) {
  const Input in = load_input({"", opt.synthetic, opt.seed}, nullptr);
  const bool csv = opt.out.size() >= 4 && opt.out.compare(opt.out.size() - 4, 4, ".csv") == 0;
  if (csv) {
    io::write_csv(in.a, opt.out);
  } else {
    io::write_matrix_market(in.a, opt.out);
  }
  json report = report_header("generate", argv, in);
  report["output"] = opt.out;
  std::cout << report.dump() << '\n';
  return 0;
}

// ---- output --------------------------------------------------------------

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
    }
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
  } else {
    rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

void print_pretty(const std::string& text) {
  const json j = json::parse(text);
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(j, "", rows);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& r : rows) std::cout << r.first << std::string(width - r.first.size() + 2, ' ') << r.second << '\n';
}

int fail(ErrorKind kind, const std::string& message, std::optional<std::size_t> line = std::nullopt) {
  json err{{"kind", metafact::kind_name(kind)}, {"message", message}};
  if (line) err["line"] = *line;
  std::cout << json{{"error", err}}.dump() << '\n';
  std::cerr << "metafact: " << message << '\n';
  return metafact::is_numerical_breakdown(kind) ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-factorization toolkit: factorizations, low-rank approximations and invariant checks"};
  app.set_version_flag("--version", METAFACT_VERSION);
  app.require_subcommand(1);
  bool pretty = false;
  app.add_flag("--pretty", pretty, "Print a flattened human-readable view of the JSON report");

  const std::vector<std::string> args(argv + 1, argv + argc);

  auto add_input = [](CLI::App* sub, InputOptions& in) {
    sub->add_option("--input", in.path, "Matrix Market (.mtx) or CSV (.csv) file");
    sub->add_option("--synthetic", in.synthetic, "Synthetic spec kind:MxN[:key=val]...");
    sub->add_option("--seed", in.seed, "Seed (default: METAFACT_SEED or 0)");
  };

  FactorizeOptions fo;
  CLI::App* factorize = app.add_subcommand("factorize", "Run one factorization and report its invariants");
  add_input(factorize, fo.input);
  factorize->add_option("--method", fo.method, "Construction")
      ->required()
      ->check(CLI::IsMember({"svd-meta", "cpqr", "utv-row-svd", "utv-svd", "utv-qr", "utv-lu", "pinv-meta"}));
  factorize->add_option("--rank", fo.rank, "Target rank k");
  factorize->add_option("--out", fo.out, "Write <prefix>_F.mtx, <prefix>_G.mtx, <prefix>_H.mtx");
  factorize->add_flag("--json", "Emit JSON (always on)");

  LowrankOptions lo;
  CLI::App* lowrank = app.add_subcommand("lowrank", "Randomized and selection-based low-rank approximation");
  add_input(lowrank, lo.input);
  lowrank->add_option("--method", lo.method, "Construction")
      ->required()
      ->check(CLI::IsMember({"nystrom", "nystrom-direct", "cur", "cur-random", "wedderburn"}));
  lowrank->add_option("--rank", lo.rank, "Target rank k");
  lowrank->add_option("--oversample", lo.oversample, "Extra row-sketch columns (default k)");
  lowrank->add_option("--rows", lo.rows, "Row indices for cur, comma separated")->delimiter(',');
  lowrank->add_option("--cols", lo.cols, "Column indices for cur, comma separated")->delimiter(',');
  lowrank->add_option("--mode", lo.mode, "CUR anchors")->check(CLI::IsMember({"orthogonal", "interpolative"}));
  lowrank->add_option("--trials", lo.trials, "Repeat with split seeds");
  lowrank->add_option("--max-steps", lo.max_steps, "Wedderburn step limit (default min(m,n))");
  lowrank->add_option("--pivot-tol", lo.pivot_tol, "Wedderburn pivot tolerance");
  lowrank->add_flag("--json", "Emit JSON (always on)");

  VerifyOptions vo;
  CLI::App* verify = app.add_subcommand("verify", "Run invariant checks; exit 1 if any fails");
  add_input(verify, vo.input);
  verify->add_option("--check", vo.checks, "projector, penrose, periodicity, rank-reduction, reconstruction")
      ->delimiter(',')
      ->check(CLI::IsMember({"projector", "penrose", "periodicity", "rank-reduction", "reconstruction"}));
  verify->add_option("--rank", vo.rank, "Rank for basis-based checks (default: numerical rank)");
  verify->add_option("--period", vo.period, "Period N for the periodicity check");
  verify->add_option("--generator", vo.generator, "Generator kind")->check(CLI::IsMember({"shift", "rotation"}));
  verify->add_option("--pmax", vo.pmax, "Largest multiple p of the period to check");
  verify->add_option("--factors", vo.factors, "Prefix of factor files written by factorize --out");
  verify->add_flag("--json", "Emit JSON (always on)");

  GenerateOptions go;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic matrix to a file");
  generate->add_option("--synthetic", go.synthetic, "Synthetic spec")->required();
  generate->add_option("--seed", go.seed, "Seed (default: METAFACT_SEED or 0)");
  generate->add_option("--out", go.out, "Output path (.mtx or .csv)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(ErrorKind::InvalidArgument, e.what());
  }

  std::ostringstream captured;
  std::streambuf* original = nullptr;
  if (pretty) original = std::cout.rdbuf(captured.rdbuf());
  int code = 0;
  try {
    if (*factorize) {
      code = cmd_factorize(fo, args);
    } else if (*lowrank) {
      code = cmd_lowrank(lo, args);
    } else if (*verify) {
      code = cmd_verify(vo, args);
    } else {
      code = cmd_generate(go, args);
    }
  } catch (const Error& e) {
    code = fail(e.kind(), e.what(), e.line());
  } catch (const std::exception& e) {
    code = fail(ErrorKind::InvalidArgument, e.what());
  }
  if (pretty) {
    std::cout.rdbuf(original);
    print_pretty(captured.str());
  }
  return code;
}
