#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "speclab/coupling.hpp"
#include "speclab/error.hpp"
#include "speclab/hamiltonian.hpp"
#include "speclab/jacobi_ops.hpp"
#include "speclab/recurrence.hpp"
#include "speclab/tridiag.hpp"

namespace speclab::cli {

using Record = nlohmann::ordered_json;

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

namespace {

const std::vector<std::string> kCommands = {
    "mu",       "classify",        "surface",         "jacobi-spectrum", "jeps",      "count",
    "h-spectrum", "discrete2-check", "asymptotics",   "identity-check",  "transition-scan", "forms-test"};

const std::vector<std::string> kGridVars = {"alpha", "beta", "gamma_re", "gamma_im", "mu", "lambda", "epsilon"};

struct Settings {
  std::string command;
  std::optional<double> alpha, beta, gamma_re, gamma_im, mu, lambda_re, lambda_im, epsilon, lambda_min;
  std::optional<double> window_lo, window_hi;
  double tol = 1e-10;
  std::optional<std::size_t> n;
  std::size_t n_cap = std::size_t{1} << 20;
  std::size_t n_start = 2048;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::optional<int> workers;
  std::string family;
  std::string sizes;
  std::string format = "json";
  std::string output;
  std::string svg;
  std::string config;
  std::string grid_var;
  std::optional<double> grid_start, grid_stop;
  std::size_t grid_steps = 1;
  std::string grid_scale = "linear";
  std::string grid_values;
};

// ---- output -----------------------------------------------------------------

void emit_json(const Record& j, std::string& s) {
  using T = Record::value_t;
  switch (j.type()) {
    case T::number_float: {
      const double x = j.get<double>();
      s += std::isfinite(x) ? format_number(x) : "null";
      break;
    }
    case T::object: {
      s += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) s += ", ";
        first = false;
        s += Record(k).dump();
        s += ": ";
        emit_json(v, s);
      }
      s += '}';
      break;
    }
    case T::array: {
      s += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) s += ", ";
        emit_json(j[i], s);
      }
      s += ']';
      break;
    }
    default:
      s += j.dump();
  }
}

std::string csv_scalar(const Record& j) {
  using T = Record::value_t;
  switch (j.type()) {
    case T::null:
      return "";
    case T::number_float: {
      const double x = j.get<double>();
      return std::isfinite(x) ? format_number(x) : "";
    }
    case T::string:
      return j.get<std::string>();
    case T::array: {
      std::string s;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) s += ';';
        s += csv_scalar(j[i]);
      }
      return s;
    }
    default:
      return j.dump();
  }
}

std::string csv_field(const Record& j) {
  std::string s = csv_scalar(j);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string render(const std::vector<Record>& rows, const std::string& format, bool sweep) {
  std::string s;
  if (format == "json") {
    if (!sweep) {
      emit_json(rows.at(0), s);
      return s + "\n";
    }
    s += "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      s += "  ";
      emit_json(rows[i], s);
      s += i + 1 < rows.size() ? ",\n" : "\n";
    }
    return s + "]\n";
  }
  std::vector<std::string> cols;
  for (const Record& r : rows) {
    for (const auto& [k, v] : r.items()) {
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    }
  }
  // The diagnostic column goes last so the data columns line up across rows.
  if (auto it = std::find(cols.begin(), cols.end(), "error"); it != cols.end()) {
    cols.erase(it);
    cols.push_back("error");
  }
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + csv_field(Record(cols[i]));
  s += '\n';
  for (const Record& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) s += ',';
      if (r.contains(cols[i])) s += csv_field(r[cols[i]]);
    }
    s += '\n';
  }
  return s;
}

void write_svg(const std::string& path, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const std::vector<double>& xs, const std::vector<double>& ys) {
  const double w = 640, h = 400, m = 60;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
    x0 = std::min(x0, xs[i]);
    x1 = std::max(x1, xs[i]);
    y0 = std::min(y0, ys[i]);
    y1 = std::max(y1, ys[i]);
  }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (w - 2 * m); };
  auto py = [&](double y) { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); };
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidParameters, "cannot write " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
    << "</text>\n";
  f << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m
    << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\" font-family=\"sans-serif\">"
    << xlabel << " [" << format_number(x0) << ", " << format_number(x1) << "]</text>\n";
  f << "<text x=\"15\" y=\"" << h / 2 << "\" transform=\"rotate(-90 15 " << h / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\">" << ylabel << " [" << format_number(y0) << ", "
    << format_number(y1) << "]</text>\n";
  f << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::isfinite(xs[i]) && std::isfinite(ys[i])) f << px(xs[i]) << ',' << py(ys[i]) << ' ';
  }
  f << "\"/>\n</svg>\n";
}

// ---- commands ---------------------------------------------------------------

double need(const std::optional<double>& v, const char* flag) {
  if (!v) throw Error(ErrorKind::InvalidParameters, std::string("missing --") + flag);
  return *v;
}

CouplingParams params_of(const Settings& s) {
  return make_params(need(s.alpha, "alpha"), need(s.beta, "beta"), {s.gamma_re.value_or(0), s.gamma_im.value_or(0)});
}

cplx lambda_of(const Settings& s) { return {need(s.lambda_re, "lambda"), s.lambda_im.value_or(0)}; }

DoublingPolicy policy_of(const Settings& s) { return {s.n_start, s.n_cap}; }

Record mu_json(const MuValue& mu) { return mu.is_divergent() ? Record("infinity") : Record(mu.value()); }

JacobiFamily family_of(const Settings& s) {
  std::string f = s.family;
  if (f.empty()) f = s.epsilon ? "jeps" : s.lambda_re ? "calj" : "calj0";
  if (f == "calj0") return CalJ0{need(s.mu, "mu")};
  if (f == "calj") return CalJ{need(s.lambda_re, "lambda"), need(s.mu, "mu")};
  if (f == "jeps") return Jeps{need(s.epsilon, "epsilon")};
  if (f == "j0bar") return J0bar{};
  throw Error(ErrorKind::InvalidParameters, "unknown family '" + f + "' (calj0, calj, jeps, j0bar)");
}

std::string family_name(const JacobiFamily& f) {
  static const char* names[] = {"calj0", "calj", "jeps", "j0bar"};
  return names[f.index()];
}

Record cmd_mu(const Settings& s) {
  const CouplingParams p = params_of(s);
  Record r;
  if (p.beta != 0.0) {
    const CouplingDerived d = derive(p);
    r["mu1"] = mu_json(*d.mu1);
    r["mu2"] = *d.mu2;
  } else {
    r["mu1"] = nullptr;
    r["mu2"] = nullptr;
    r["mu_beta0"] = p.alpha != 0.0 ? Record(mu_beta_zero(p)) : Record(nullptr);
  }
  return r;
}

Record cmd_classify(const Settings& s) {
  const CouplingParams p = params_of(s);
  const auto classes = classify(p, s.tol);
  Record r;
  r["branches"] = Record::array();
  r["kinds"] = Record::array();
  r["mus"] = Record::array();
  for (const auto& c : classes) {
    r["branches"].push_back(std::string(to_string(c.branch)));
    r["kinds"].push_back(std::string(to_string(c.kind)));
    r["mus"].push_back(mu_json(c.mu));
  }
  // The branch whose mu crosses 1 on this (beta, gamma) slice decides the summary kind.
  std::vector<Branch> relevant;
  const CouplingParams c = canonicalize(p);
  if (c.beta == 0.0) {
    relevant = {Branch::BetaZero};
  } else {
    try {
      relevant = critical_branches(c.beta, c.gamma);
    } catch (const Error&) {
      for (const auto& cl : classes) relevant.push_back(cl.branch);
    }
  }
  std::vector<std::string> kinds;
  for (const auto& cl : classes) {
    if (std::find(relevant.begin(), relevant.end(), cl.branch) == relevant.end()) continue;
    const std::string k(to_string(cl.kind));
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  std::string joined;
  for (const auto& k : kinds) joined += (joined.empty() ? "" : ";") + k;
  r["kind"] = joined;
  return r;
}

Record cmd_surface(const Settings& s) {
  const double beta = need(s.beta, "beta");
  const cplx gamma{s.gamma_re.value_or(0), s.gamma_im.value_or(0)};
  Record r;
  r["alpha_c"] = critical_alpha(beta, gamma);
  r["branches"] = Record::array();
  for (Branch b : critical_branches(beta, gamma)) r["branches"].push_back(std::string(to_string(b)));
  return r;
}

Record cmd_jacobi_spectrum(const Settings& s, bool force_jeps) {
  Settings t = s;
  if (force_jeps) t.family = "jeps";
  const JacobiFamily f = family_of(t);
  const std::size_t n = s.n.value_or(1000);
  const TridiagonalMatrix m = build(f, n);
  const auto [glo, ghi] = m.gershgorin();
  const double lo = s.window_lo.value_or(glo), hi = s.window_hi.value_or(ghi + 1e-9 * (1 + std::abs(ghi)));
  const EigenvalueReport rep = eigenvalues_in_window(m, lo, hi, std::min(s.tol, 1e-10));
  Record r;
  r["family"] = family_name(f);
  r["N"] = n;
  r["window_lo"] = lo;
  r["window_hi"] = hi;
  r["count"] = rep.count_below_b - rep.count_below_a;
  r["smallest"] = smallest_eigenvalue(m, std::min(s.tol, 1e-10));
  r["eigenvalues"] = rep.eigenvalues;
  return r;
}

Record cmd_count(const Settings& s) {
  Record r;
  if (s.mu) {
    Settings t = s;
    if (t.family.empty()) t.family = s.epsilon ? "jeps" : "j0bar";
    const JacobiFamily f = family_of(t);
    if (!std::holds_alternative<Jeps>(f) && !std::holds_alternative<J0bar>(f)) {
      throw Error(ErrorKind::InvalidParameters, "count --mu applies to the jeps and j0bar families");
    }
    r["family"] = family_name(f);
    r["mu"] = *s.mu;
    if (s.n) {
      r["count"] = count_relative(f, *s.mu, *s.n, CountSide::Above);
      r["size"] = *s.n;
    } else {
      const StabilizedCount sc = count_stabilized(f, *s.mu, CountSide::Above, policy_of(s));
      r["count"] = sc.count;
      r["size"] = sc.size;
    }
    return r;
  }
  const EpsilonCount ec = count_below_epsilon(params_of(s), need(s.epsilon, "epsilon"), policy_of(s));
  r["epsilon"] = *s.epsilon;
  r["count"] = ec.count;
  r["branches"] = Record::array();
  r["mus"] = Record::array();
  for (const auto& bm : ec.counted_branches) {
    r["branches"].push_back(std::string(to_string(bm.branch)));
    r["mus"].push_back(mu_json(bm.mu));
  }
  r["per_branch"] = ec.per_branch;
  std::string w;
  for (const auto& x : ec.warnings) w += (w.empty() ? "" : "; ") + x;
  r["warnings"] = w;
  return r;
}

Record cmd_h_spectrum(const Settings& s) {
  const HSpectrumResult res =
      h_eigenvalues_below_threshold(params_of(s), s.lambda_min.value_or(kDefaultLambdaMin), s.tol, true, policy_of(s));
  Record r;
  r["count"] = res.eigenvalues.size();
  r["eigenvalues"] = Record::array();
  r["branches"] = Record::array();
  r["secular_defects"] = Record::array();
  for (const auto& e : res.eigenvalues) {
    r["eigenvalues"].push_back(e.lambda);
    r["branches"].push_back(std::string(to_string(e.branch)));
    r["secular_defects"].push_back(e.secular_defect);
  }
  r["branch_mus"] = Record::array();
  for (const auto& bm : res.branch_mus) r["branch_mus"].push_back(mu_json(bm.mu));
  r["per_branch_counts"] = res.per_branch_counts;
  r["n_modes"] = res.n_modes;
  r["lambda_min"] = res.lambda_min;
  r["method_agreement"] = res.method_agreement;
  return r;
}

Record cmd_discrete2(const Settings& s) {
  const Discrete2Check c = discrete2_check(params_of(s), policy_of(s));
  Record r;
  r["lhs"] = c.lhs;
  r["rhs"] = c.rhs;
  r["bound"] = c.bound;
  r["ok"] = c.ok;
  r["lambda_min"] = c.lambda_min;
  return r;
}

Record cmd_asymptotics(const Settings& s) {
  const AsymptoticsRow row = count_asymptotics_point(need(s.mu, "mu"), policy_of(s));
  Record r;
  r["mu"] = row.mu;
  r["counted"] = row.counted;
  r["predicted"] = row.predicted;
  r["ratio"] = row.ratio;
  r["size"] = row.size;
  return r;
}

Record cmd_identity(const Settings& s) {
  const double mu = need(s.mu, "mu");
  const cplx lam = lambda_of(s);
  const std::size_t n = s.n.value_or(1000);
  const RecurrenceSolution sol = iterate_forward(mu, lam, 1.0, n + 1);
  const IdentityCheck ic = identity_residual(sol, n);
  Record r;
  r["mu"] = mu;
  r["lambda_re"] = lam.real();
  r["lambda_im"] = lam.imag();
  r["N"] = n;
  r["lhs"] = ic.lhs;
  r["rhs"] = ic.rhs;
  r["residual"] = ic.residual;
  try {
    r["secular_defect"] = secular_defect(mu, lam);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoDominanceSplit) throw;
    r["secular_defect"] = nullptr;
  }
  return r;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidParameters, "bad size '" + tok + "'");
    }
  }
  return out;
}

Record cmd_transition_scan(const Settings& s) {
  const std::vector<std::size_t> sizes = s.sizes.empty() ? std::vector<std::size_t>{2048, 4096, 8192} : parse_sizes(s.sizes);
  const auto rep = transition_scan(need(s.mu, "mu"), sizes, {s.window_lo.value_or(-5), s.window_hi.value_or(5)},
                                   std::min(s.tol, 1e-12));
  Record r;
  r["mu"] = rep.mu;
  r["window_lo"] = rep.window.first;
  r["window_hi"] = rep.window.second;
  r["sizes"] = rep.sizes;
  r["smallest_eigs"] = rep.smallest_eigs;
  r["window_counts"] = rep.window_counts;
  return r;
}

Record cmd_forms_test(const Settings& s) {
  const CouplingParams p = params_of(s);
  const double c = lower_bound_constant(p);
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> logd(std::log(0.1), std::log(10.0));
  std::uniform_int_distribution<int> count(1, 13);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t violations = 0, a0_violations = 0;
  for (std::size_t i = 0; i < s.trials; ++i) {
    std::vector<ModeProfile> modes;
    std::vector<int> idx(13);
    for (int k = 0; k < 13; ++k) idx[k] = k;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(count(rng));
    for (int n : idx) modes.push_back({static_cast<std::size_t>(n), {g(rng), g(rng)}, {g(rng), g(rng)}, std::exp(logd(rng))});
    ModeTrialFunction t(std::move(modes));
    if (p.beta == 0.0) t = project_beta0(t, p.gamma);
    const FormValues f = evaluate_forms(t, p);
    const double ratio = 2.0 * f.full / f.norm_squared;
    worst = std::min(worst, ratio);
    if (f.full < 0.5 * c * f.norm_squared * (1 - 1e-12)) ++violations;
    if (f.a0 < 0.5 * f.norm_squared * (1 - 1e-14)) ++a0_violations;
  }
  Record r;
  r["c"] = c;
  r["trials"] = s.trials;
  r["min_ratio"] = worst;
  r["violations"] = violations;
  r["a0_violations"] = a0_violations;
  if (p.beta != 0.0) {
    const CouplingDerived d = derive(p);
    double gap = 0.0;
    for (int branch : {1, 2}) {
      const ModeProfile& m = saturating_trial(1.0, branch, d).modes().at(0);
      for (cplx v : {m.a, m.b}) gap = std::max(gap, std::abs(trace_energy(v, 1.0, 1.0) - std::norm(v)));
    }
    r["saturation_gap"] = gap;
  } else {
    r["saturation_gap"] = nullptr;
  }
  return r;
}

Record dispatch(const Settings& s) {
  const std::string& c = s.command;
  if (c == "mu") return cmd_mu(s);
  if (c == "classify") return cmd_classify(s);
  if (c == "surface") return cmd_surface(s);
  if (c == "jacobi-spectrum") return cmd_jacobi_spectrum(s, false);
  if (c == "jeps") return cmd_jacobi_spectrum(s, true);
  if (c == "count") return cmd_count(s);
  if (c == "h-spectrum") return cmd_h_spectrum(s);
  if (c == "discrete2-check") return cmd_discrete2(s);
  if (c == "asymptotics") return cmd_asymptotics(s);
  if (c == "identity-check") return cmd_identity(s);
  if (c == "transition-scan") return cmd_transition_scan(s);
  if (c == "forms-test") return cmd_forms_test(s);
  throw Error(ErrorKind::InvalidParameters, "unknown command " + c);
}

int exit_code(ErrorKind k) { return k == ErrorKind::NonConvergence ? kExitNonConvergence : kExitInvalid; }

// ---- sweeps -----------------------------------------------------------------

std::vector<double> grid_points(const Settings& s) {
  std::vector<double> xs;
  if (!s.grid_values.empty()) {
    std::stringstream ss(s.grid_values);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        xs.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidParameters, "bad grid value '" + tok + "'");
      }
    }
    return xs;
  }
  const double a = need(s.grid_start, "grid-start");
  const double b = s.grid_steps == 1 ? a : need(s.grid_stop, "grid-stop");
  if (s.grid_steps < 1) throw Error(ErrorKind::InvalidParameters, "grid-steps must be at least 1");
  if (s.grid_scale == "log" && !(a > 0 && b > 0)) {
    throw Error(ErrorKind::InvalidParameters, "log grid needs positive endpoints");
  }
  for (std::size_t i = 0; i < s.grid_steps; ++i) {
    const double t = s.grid_steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(s.grid_steps - 1);
    xs.push_back(s.grid_scale == "log" ? a * std::pow(b / a, t) : a + t * (b - a));
  }
  // Pin the endpoint exactly.
  if (s.grid_steps > 1) xs.back() = b;
  return xs;
}

void assign(Settings& s, const std::string& var, double x) {
  if (var == "alpha") s.alpha = x;
  else if (var == "beta") s.beta = x;
  else if (var == "gamma_re") s.gamma_re = x;
  else if (var == "gamma_im") s.gamma_im = x;
  else if (var == "mu") s.mu = x;
  else if (var == "lambda") s.lambda_re = x;
  else if (var == "epsilon") s.epsilon = x;
}

int resolve_workers(const Settings& s) {
  int w = s.workers.value_or(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  if (const char* env = std::getenv("SPECLAB_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw Error(ErrorKind::InvalidParameters, "SPECLAB_WORKERS must be a positive integer");
    w = static_cast<int>(v);
  }
  if (w < 1) throw Error(ErrorKind::InvalidParameters, "workers must be at least 1");
  return w;
}

struct PointResult {
  Record row;
  bool ok = false;
  int code = kExitOk;
};

std::vector<PointResult> run_sweep(const Settings& s, const std::vector<double>& xs, int workers) {
  std::vector<PointResult> results(xs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < xs.size();) {
      Settings t = s;
      assign(t, s.grid_var, xs[i]);
      PointResult& pr = results[i];
      pr.row[s.grid_var] = xs[i];
      try {
        Record rec = dispatch(t);
        pr.row["status"] = "ok";
        for (auto& [k, v] : rec.items()) {
          if (k != s.grid_var) pr.row[k] = v;
        }
        pr.ok = true;
      } catch (const Error& e) {
        pr.row["status"] = std::string(to_string(e.kind()));
        pr.row["error"] = e.what();
        pr.code = exit_code(e.kind());
      } catch (const std::exception& e) {
        pr.row["status"] = "InternalError";
        pr.row["error"] = e.what();
        pr.code = kExitInternal;
      }
    }
  };
  const int n = std::min<int>(workers, static_cast<int>(xs.size()));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(work);
  }
  return results;
}

// ---- argument handling --------------------------------------------------------

bool flag_present(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + scalar_text(x);
    return s;
  }
  return v.dump();
}

// Config entries become flags that were not given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::InvalidParameters, "cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidParameters, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::InvalidParameters, "config must be a JSON object");
  std::vector<std::pair<std::string, nlohmann::json>> flat;
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      for (const auto& [k2, v2] : v.items()) flat.emplace_back(k + "-" + k2, v2);
    } else {
      flat.emplace_back(k, v);
    }
  }
  std::vector<std::string> out = args;
  for (auto& [key, v] : flat) {
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") continue;
    if (key == "command") {
      const bool has_command = std::any_of(args.begin(), args.end(), [](const std::string& a) {
        return std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end();
      });
      if (!has_command) out.insert(out.begin(), scalar_text(v));
      continue;
    }
    const std::string flag = "--" + key;
    if (flag_present(args, flag)) continue;
    out.push_back(flag);
    out.push_back(scalar_text(v));
  }
  return out;
}

void add_options(CLI::App& app, Settings& s) {
  app.add_option("command", s.command, "Command to run")->check(CLI::IsMember(kCommands));
  app.add_option("--alpha", s.alpha);
  app.add_option("--beta", s.beta);
  app.add_option("--gamma-re", s.gamma_re);
  app.add_option("--gamma-im", s.gamma_im);
  app.add_option("--mu", s.mu);
  app.add_option("--lambda,--lambda-re", s.lambda_re, "Spectral parameter (real part)");
  app.add_option("--lambda-im", s.lambda_im);
  app.add_option("--lambda-min", s.lambda_min, "Lower end of the eigenvalue search");
  app.add_option("--epsilon", s.epsilon);
  app.add_option("--window-lo", s.window_lo);
  app.add_option("--window-hi", s.window_hi);
  app.add_option("--N", s.n, "Truncation size");
  app.add_option("--tol", s.tol)->capture_default_str();
  app.add_option("--n-cap", s.n_cap, "Largest truncation the doubling policy may reach")->capture_default_str();
  app.add_option("--n-start", s.n_start, "First truncation of the doubling policy")->capture_default_str();
  app.add_option("--trials", s.trials)->capture_default_str();
  app.add_option("--seed", s.seed)->capture_default_str();
  app.add_option("--family", s.family, "calj0, calj, jeps or j0bar");
  app.add_option("--sizes", s.sizes, "Comma-separated truncation sizes for transition-scan");
  app.add_option("--workers", s.workers);
  app.add_option("--format", s.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--output", s.output, "Write results here instead of stdout");
  app.add_option("--svg", s.svg, "Line chart for asymptotics and transition-scan");
  app.add_option("--config", s.config, "JSON file of flag values");
  app.add_option("--grid-var", s.grid_var)->check(CLI::IsMember(kGridVars));
  app.add_option("--grid-start", s.grid_start);
  app.add_option("--grid-stop", s.grid_stop);
  app.add_option("--grid-steps", s.grid_steps)->capture_default_str();
  app.add_option("--grid-scale", s.grid_scale)->check(CLI::IsMember({"linear", "log"}))->capture_default_str();
  app.add_option("--grid-values", s.grid_values, "Comma-separated grid points");
}

void maybe_svg(const Settings& s, const std::vector<Record>& rows, bool sweep) {
  if (s.svg.empty()) return;
  std::vector<double> xs, ys;
  if (s.command == "asymptotics" && sweep) {
    for (const Record& r : rows) {
      if (r.value("status", "") != "ok") continue;
      xs.push_back(r["mu"].get<double>() - 1.0);
      ys.push_back(r["ratio"].get<double>());
    }
    write_svg(s.svg, "counted / predicted", "mu - 1", "ratio", xs, ys);
  } else if (s.command == "transition-scan" && !sweep) {
    for (std::size_t i = 0; i < rows[0]["sizes"].size(); ++i) {
      xs.push_back(std::log2(rows[0]["sizes"][i].get<double>()));
      ys.push_back(rows[0]["window_counts"][i].get<double>());
    }
    write_svg(s.svg, "eigenvalues in window", "log2 N", "count", xs, ys);
  } else {
    throw Error(ErrorKind::InvalidParameters, "--svg is available for asymptotics sweeps and transition-scan");
  }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = raw_args;
  try {
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
      const std::string& a = raw_args[i];
      if (a == "--config" && i + 1 < raw_args.size()) args = merge_config(raw_args, raw_args[i + 1]);
      if (a.rfind("--config=", 0) == 0) args = merge_config(raw_args, a.substr(9));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  Settings s;
  CLI::App app{"Spectral analysis of the four-parameter contact-interaction model"};
  add_options(app, s);
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  if (s.command.empty()) {
    err << "error: a command is required\n" << app.help();
    return kExitInvalid;
  }

  try {
    const bool sweep = !s.grid_var.empty();
    std::vector<double> xs;
    int workers = 1;
    if (sweep) {
      xs = grid_points(s);
      workers = resolve_workers(s);
    }
    std::string text;
    int code = kExitOk;
    std::vector<Record> rows;
    if (sweep && xs.size() > 1) {
      auto results = run_sweep(s, xs, workers);
      bool any_ok = false;
      for (auto& pr : results) {
        any_ok = any_ok || pr.ok;
        if (!pr.ok) err << "warning: " << s.grid_var << " = " << format_number(pr.row[s.grid_var].get<double>())
                        << ": " << pr.row["error"].get<std::string>() << '\n';
        rows.push_back(std::move(pr.row));
      }
      code = any_ok ? kExitOk : kExitNonConvergence;
      text = render(rows, s.format, true);
    } else {
      Settings t = s;
      if (sweep && !xs.empty()) assign(t, s.grid_var, xs[0]);
      rows.push_back(dispatch(t));
      text = render(rows, s.format, false);
    }
    maybe_svg(s, rows, sweep && xs.size() > 1);
    if (s.output.empty()) {
      out << text;
    } else {
      std::ofstream f(s.output, std::ios::binary);
      if (!f) throw Error(ErrorKind::InvalidParameters, "cannot write " + s.output);
      f << text;
    }
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace speclab::cli
