// cmps: command-line front end for the cMPS calculus library.
//
// Subcommands: validate, check, gauge, finite, uniform, tangent,
// lattice-check. Reports are emitted as JSON with fixed field order and
// 17-significant-digit floats, so identical inputs produce byte-identical
// output; series can be written as CSV (x, re, im).

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cmps/finite.hpp"
#include "cmps/gauge.hpp"
#include "cmps/io.hpp"
#include "cmps/lattice.hpp"
#include "cmps/regularity.hpp"
#include "cmps/tangent.hpp"
#include "cmps/uniform.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using cmps::Complex;
using cmps::Matrix;

// Deterministic JSON emission: insertion-ordered fields, %.17g numbers.
class JsonWriter {
 public:
  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
  static std::string str(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  }

  JsonWriter& field(const std::string& key, const std::string& raw) {
    entries_.push_back(str(key) + ": " + raw);
    return *this;
  }
  JsonWriter& number(const std::string& key, double v) { return field(key, num(v)); }
  JsonWriter& integer(const std::string& key, long v) { return field(key, std::to_string(v)); }
  JsonWriter& boolean(const std::string& key, bool v) { return field(key, v ? "true" : "false"); }
  JsonWriter& text(const std::string& key, const std::string& v) { return field(key, str(v)); }
  JsonWriter& complex_value(const std::string& key, Complex z) {
    return field(key, "[" + num(z.real()) + ", " + num(z.imag()) + "]");
  }

  std::string done() const {
    std::string out = "{\n";
    for (size_t i = 0; i < entries_.size(); ++i)
      out += "  " + entries_[i] + (i + 1 < entries_.size() ? ",\n" : "\n");
    return out + "}\n";
  }

 private:
  std::vector<std::string> entries_;
};

std::string series_json(const std::vector<double>& x, const std::vector<Complex>& v) {
  std::string out = "[";
  for (size_t i = 0; i < x.size(); ++i) {
    out += "[" + JsonWriter::num(x[i]) + ", " + JsonWriter::num(v[i].real()) + ", " +
           JsonWriter::num(v[i].imag()) + "]";
    if (i + 1 < x.size()) out += ", ";
  }
  return out + "]";
}

std::string series_csv(const std::vector<double>& x, const std::vector<Complex>& v) {
  std::string out = "x,re,im\n";
  for (size_t i = 0; i < x.size(); ++i)
    out += JsonWriter::num(x[i]) + "," + JsonWriter::num(v[i].real()) + "," +
           JsonWriter::num(v[i].imag()) + "\n";
  return out;
}

std::string residual_table_json(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (int i = 0; i < m.rows(); ++i) {
    out += "[";
    for (int j = 0; j < m.cols(); ++j) {
      out += JsonWriter::num(m(i, j));
      if (j + 1 < m.cols()) out += ", ";
    }
    out += "]";
    if (i + 1 < m.rows()) out += ", ";
  }
  return out + "]";
}

struct CliConfig {
  int dense_budget = 8;
  double eig_tol = 1e-12;
  double solve_tol = 1e-10;
  double ode_tol = 1e-8;
  int threads = 1;
  long seed = 0;
  std::string format = "json";

  cmps::EvalOptions evalOptions() const {
    cmps::EvalOptions opts;
    opts.dense_budget = dense_budget;
    opts.eig_tol = eig_tol;
    opts.solve_tol = solve_tol;
    opts.threads = threads;
    return opts;
  }
};

void add_config_flags(CLI::App* app, CliConfig& cfg) {
  app->add_option("--dense-budget", cfg.dense_budget,
                  "dense linear algebra for D <= budget (env CMPS_DENSE_BUDGET)");
  app->add_option("--eig-tol", cfg.eig_tol, "eigensolver residual tolerance");
  app->add_option("--solve-tol", cfg.solve_tol, "linear solve tolerance");
  app->add_option("--ode-tol", cfg.ode_tol, "integrator drift report threshold");
  app->add_option("--threads", cfg.threads, "threads for momentum/position grids");
  app->add_option("--seed", cfg.seed, "seed for randomized helpers");
  app->add_option("--format", cfg.format, "report format: json or csv series")
      ->check(CLI::IsMember({"json", "csv"}));
}

void apply_env(CliConfig& cfg) {
  if (const char* env = std::getenv("CMPS_DENSE_BUDGET")) cfg.dense_budget = std::atoi(env);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    cmps::write_text_file(out_path, content);
}

bool wants_csv(const CliConfig& cfg, const std::string& out_path) {
  if (cfg.format == "csv") return true;
  return out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv";
}

JsonWriter provenance(const CliConfig& cfg, const std::string& command) {
  JsonWriter w;
  w.text("tool", "cmps").text("version", kVersion).text("command", command);
  w.number("dense_budget", cfg.dense_budget)
      .number("eig_tol", cfg.eig_tol)
      .number("solve_tol", cfg.solve_tol);
  return w;
}

int run_validate(const CliConfig&, const std::string& input) {
  const auto issues = cmps::validate_state_file(input);
  JsonWriter w;
  w.boolean("valid", issues.empty());
  std::string arr = "[";
  for (size_t i = 0; i < issues.size(); ++i) {
    arr += "{" + JsonWriter::str("path") + ": " + JsonWriter::str(issues[i].path) + ", " +
           JsonWriter::str("message") + ": " + JsonWriter::str(issues[i].message) + "}";
    if (i + 1 < issues.size()) arr += ", ";
  }
  w.field("issues", arr + "]");
  std::cout << w.done();
  return issues.empty() ? 0 : 1;
}

int run_check(const CliConfig& cfg, const std::string& input, int order,
              const std::string& parity_path, const std::string& out) {
  const auto state = cmps::load_state(input);
  cmps::RegularityReport rep;
  std::visit([&](const auto& s) {
    rep = order <= 1 ? cmps::check_first_order(s) : cmps::check_higher_order(s, order);
  }, state);

  JsonWriter w = provenance(cfg, "check");
  w.integer("order", rep.order);
  w.field("residuals", residual_table_json(rep.residuals));
  w.number("tolerance", rep.tolerance);
  w.boolean("passed", rep.passed);

  if (!parity_path.empty()) {
    const auto parity = cmps::load_parity(parity_path);
    const auto* uniform = std::get_if<cmps::UniformCMPS>(&state);
    cmps::require(uniform != nullptr, cmps::errc::shape_error,
                  "parity check is defined for uniform states");
    const auto prep = cmps::check_parity(*uniform, parity);
    w.number("parity_residual", prep.max_residual);
    w.boolean("parity_passed", prep.passed);
  }
  emit(out, w.done());
  return 0;
}

int run_gauge(const CliConfig& cfg, const std::string& input, const std::string& to,
              const std::string& out, const std::string& emit_g) {
  const auto state = cmps::load_state(input);
  const auto opts = cfg.evalOptions();
  if (const auto* uniform = std::get_if<cmps::UniformCMPS>(&state)) {
    cmps::require(to == "left" || to == "right", cmps::errc::shape_error,
                  "uniform states support --to left|right");
    const auto [normalized, fp] = cmps::normalize(*uniform, opts);
    const auto cf = to == "left" ? cmps::left_canonicalize_uniform(normalized, fp, opts)
                                 : cmps::right_canonicalize_uniform(normalized, fp, opts);
    cmps::save_state(out, cf.state);
    if (!emit_g.empty()) cmps::save_gauge_samples(emit_g, {cf.g});
    JsonWriter w = provenance(cfg, "gauge");
    w.text("to", to);
    w.number("mu", fp.mu);
    w.number("left_residual", cmps::left_orthonormal_residual(cf.state));
    w.number("right_residual", cmps::right_orthonormal_residual(cf.state));
    std::cout << w.done();
    return 0;
  }
  const auto& finite = std::get<cmps::FiniteCMPS>(state);
  cmps::require(to == "left" || to == "qzero", cmps::errc::shape_error,
                "finite states support --to left|qzero");
  const auto [transformed, g] = to == "left" ? cmps::left_orthonormalize_finite(finite)
                                             : cmps::eliminate_Q_gauge(finite);
  cmps::save_state(out, transformed);
  if (!emit_g.empty()) cmps::save_gauge_samples(emit_g, g.samples);
  JsonWriter w = provenance(cfg, "gauge");
  w.text("to", to);
  std::cout << w.done();
  return 0;
}

cmps::InteractionKernel parse_kernel(const std::string& text) {
  if (text.empty()) return cmps::InteractionKernel::delta(0.0);
  const auto colon = text.find(':');
  cmps::require(colon != std::string::npos, cmps::errc::parse_error,
                "interaction spec is kind:params (delta:c or exp:c,l)");
  const std::string kind = text.substr(0, colon);
  const std::string params = text.substr(colon + 1);
  if (kind == "delta") return cmps::InteractionKernel::delta(std::atof(params.c_str()));
  if (kind == "exp") {
    const auto comma = params.find(',');
    cmps::require(comma != std::string::npos, cmps::errc::parse_error,
                  "exponential kernel needs exp:c,l");
    return cmps::InteractionKernel::exponential(std::atof(params.substr(0, comma).c_str()),
                                                std::atof(params.substr(comma + 1).c_str()));
  }
  cmps::raise(cmps::errc::parse_error, "unknown interaction kind '" + kind + "'");
}

int run_finite(const CliConfig& cfg, const std::string& input, const std::string& observable,
               double mass, const std::string& potential_path, const std::string& interaction,
               int a, int b, bool raw, const std::string& out) {
  const auto state_any = cmps::load_state(input);
  const auto* fs = std::get_if<cmps::FiniteCMPS>(&state_any);
  cmps::require(fs != nullptr, cmps::errc::shape_error,
                "the finite subcommand needs a finite state file");
  const auto& s = *fs;
  const auto vdp = cmps::propagate(s);

  if (observable == "norm") {
    JsonWriter w = provenance(cfg, "finite");
    w.text("observable", "norm");
    w.number("norm", vdp.norm);
    w.number("norm_drift", vdp.norm_drift);
    w.boolean("drift_within_tolerance", vdp.norm_drift <= cfg.ode_tol * vdp.norm);
    emit(out, w.done());
    return 0;
  }
  if (observable == "density") {
    const auto series = cmps::density_profile(s, vdp, a, b, !raw);
    std::vector<double> xs(series.size());
    for (size_t k = 0; k < xs.size(); ++k) xs[k] = s.x(static_cast<int>(k));
    if (wants_csv(cfg, out)) {
      emit(out, series_csv(xs, series));
    } else {
      JsonWriter w = provenance(cfg, "finite");
      w.text("observable", "density");
      w.integer("a", a).integer("b", b);
      w.field("series", series_json(xs, series));
      emit(out, w.done());
    }
    return 0;
  }
  if (observable == "g2") {
    // pair correlation <psi+(x0) psi+(y) psi(y) psi(x0)> against y - x0,
    // with x0 at mid-grid
    const int mid = s.gridSize() / 2;
    const auto values_full = cmps::pair_correlation(s, vdp, a, mid, !raw);
    std::vector<double> xs(values_full.size());
    for (size_t k = 0; k < xs.size(); ++k) xs[k] = s.x(mid + static_cast<int>(k)) - s.x(mid);
    const auto& values = values_full;
    if (wants_csv(cfg, out)) {
      emit(out, series_csv(xs, values));
    } else {
      JsonWriter w = provenance(cfg, "finite");
      w.text("observable", "g2");
      w.field("series", series_json(xs, values));
      emit(out, w.done());
    }
    return 0;
  }
  if (observable == "energy") {
    std::vector<double> v;
    if (!potential_path.empty()) v = cmps::load_potential(potential_path);
    const std::vector<double> masses(s.speciesCount(), mass);
    const auto e = cmps::energy(s, vdp, masses, v, parse_kernel(interaction), !raw);
    JsonWriter w = provenance(cfg, "finite");
    w.text("observable", "energy");
    w.number("kinetic", e.kinetic);
    w.number("potential", e.potential);
    w.number("interaction", e.interaction);
    w.number("max_imag", e.max_imag);
    w.number("norm", vdp.norm);
    emit(out, w.done());
    return 0;
  }
  cmps::raise(cmps::errc::parse_error, "unknown finite observable '" + observable + "'");
}

int run_uniform(const CliConfig& cfg, const std::string& input, const std::string& observable,
                double mass, double v0, const std::string& interaction, int a, int b,
                double pmax, int pn, double xmax, int xn, const std::string& other,
                const std::string& parity_path, const std::string& out) {
  const auto state_any = cmps::load_state(input);
  const auto* us = std::get_if<cmps::UniformCMPS>(&state_any);
  cmps::require(us != nullptr, cmps::errc::shape_error,
                "the uniform subcommand needs a uniform state file");
  const auto opts = cfg.evalOptions();
  const auto [s, fp] = cmps::normalize(*us, opts);

  std::optional<cmps::ParityStructure> parity;
  if (!parity_path.empty()) parity = cmps::load_parity(parity_path);

  const auto regularity = cmps::check_first_order(s);
  const bool warn_tail = !regularity.passed &&
                         (observable == "np" || observable == "cutoff");
  if (warn_tail)
    std::cerr << "warning: first-order regularity fails (residual "
              << JsonWriter::num(regularity.maxResidual())
              << "); the p^-4 tail interpretation does not apply\n";

  JsonWriter w = provenance(cfg, "uniform");
  w.text("observable", observable);
  w.number("mu", fp.mu);
  w.number("fixed_point_residual_l", fp.residual_l);
  w.number("fixed_point_residual_r", fp.residual_r);
  if (warn_tail) w.boolean("regularity_warning", true);

  if (observable == "density") {
    w.complex_value("density", cmps::density(s, fp, a, b));
    emit(out, w.done());
    return 0;
  }
  if (observable == "energy") {
    const std::vector<double> masses(s.speciesCount(), mass);
    const auto e = cmps::energy_densities(s, fp, masses, v0, parse_kernel(interaction), opts);
    w.number("kinetic", e.kinetic);
    w.number("potential", e.potential);
    w.number("interaction", e.interaction);
    w.number("max_imag", e.max_imag);
    emit(out, w.done());
    return 0;
  }
  if (observable == "corr") {
    const double span = xmax > 0 ? xmax : 8.0 / (fp.gap > 0 ? fp.gap : 1.0);
    std::vector<double> xs(xn);
    for (int k = 0; k < xn; ++k) xs[k] = span * k / std::max(1, xn - 1);
    const auto series = cmps::correlation(s, fp, a, b, xs, parity, opts);
    if (wants_csv(cfg, out)) {
      emit(out, series_csv(series.x, series.values));
      return 0;
    }
    w.complex_value("long_range", series.long_range);
    w.field("series", series_json(series.x, series.values));
    emit(out, w.done());
    return 0;
  }
  if (observable == "np") {
    const double top = pmax > 0 ? pmax : 100.0 * cmps::transfer_norm_estimate(s);
    std::vector<double> ps(pn);
    for (int k = 0; k < pn; ++k) ps[k] = top * (k + 1) / pn;
    const auto occupation = cmps::momentum_occupation(s, fp, a, b, ps, parity, opts);
    if (wants_csv(cfg, out)) {
      emit(out, series_csv(occupation.p, occupation.values));
      return 0;
    }
    w.number("condensate_weight", occupation.condensate_weight);
    w.field("series", series_json(occupation.p, occupation.values));
    emit(out, w.done());
    return 0;
  }
  if (observable == "cutoff") {
    const double lambda = cmps::uv_cutoff(s, fp, a, b, parity, opts);
    w.number("uv_cutoff", lambda);
    if (lambda > 0) w.number("uv_length", 1.0 / lambda);
    // the density-based physical length scale, reported alongside; the two
    // numbers carry no fixed quantitative relation
    const double rho = cmps::density(s, fp, a, a).real();
    if (rho > 0) w.number("density_length", 1.0 / rho);
    emit(out, w.done());
    return 0;
  }
  if (observable == "xi") {
    const auto xi = cmps::correlation_length(s, fp, opts);
    if (xi)
      w.number("correlation_length", *xi);
    else
      w.field("correlation_length", "null");
    emit(out, w.done());
    return 0;
  }
  if (observable == "match") {
    cmps::require(!other.empty(), cmps::errc::parse_error, "match needs --other");
    const auto other_any = cmps::load_state(other);
    const auto* os = std::get_if<cmps::UniformCMPS>(&other_any);
    cmps::require(os != nullptr, cmps::errc::shape_error, "--other must be a uniform state");
    const auto [s2, fp2] = cmps::normalize(*os, opts);
    const auto m = cmps::match_states(s, fp, s2, opts);
    w.complex_value("lambda", m.lambda);
    w.boolean("equivalent", m.equivalent);
    if (m.phi) w.number("phi", *m.phi);
    if (m.g) w.number("recovery_residual", m.residual);
    emit(out, w.done());
    return 0;
  }
  cmps::raise(cmps::errc::parse_error, "unknown uniform observable '" + observable + "'");
}

int run_tangent(const CliConfig& cfg, const std::string& base_path, const std::string& t1_path,
                const std::string& t2_path, double p, const std::string& out) {
  const auto base_any = cmps::load_state(base_path);
  const auto opts = cfg.evalOptions();
  JsonWriter w = provenance(cfg, "tangent");
  if (const auto* us = std::get_if<cmps::UniformCMPS>(&base_any)) {
    const auto [s, fp] = cmps::normalize(*us, opts);
    auto t1 = cmps::load_tangent_uniform(t1_path, s);
    if (p != 0.0) t1.p = p;
    w.number("p", t1.p);
    w.complex_value("base_overlap_t1", cmps::base_overlap_uniform(s, fp, t1));
    if (!t2_path.empty()) {
      auto t2 = cmps::load_tangent_uniform(t2_path, s);
      if (p != 0.0) t2.p = p;
      const auto o = cmps::overlap_uniform(s, fp, t1, t2, opts);
      w.complex_value("overlap_delta_coefficient", o.delta_coefficient);
      w.complex_value("overlap_p0_extra", o.p0_extra);
    }
    emit(out, w.done());
    return 0;
  }
  const auto& fs = std::get<cmps::FiniteCMPS>(base_any);
  const auto vdp = cmps::propagate(fs);
  const auto t1 = cmps::load_tangent_finite(t1_path, fs);
  w.complex_value("base_overlap_t1", cmps::base_overlap_finite(fs, vdp, t1));
  if (!t2_path.empty()) {
    const auto t2 = cmps::load_tangent_finite(t2_path, fs);
    w.complex_value("overlap", cmps::overlap_finite(fs, vdp, t1, t2));
  }
  emit(out, w.done());
  return 0;
}

int run_lattice_check(const CliConfig& cfg, const std::string& input, double a0, int halvings,
                      const std::string& out) {
  const auto state_any = cmps::load_state(input);
  const auto* us = std::get_if<cmps::UniformCMPS>(&state_any);
  cmps::require(us != nullptr, cmps::errc::shape_error,
                "lattice-check needs a uniform state file");
  const auto opts = cfg.evalOptions();
  const auto [s, fp] = cmps::normalize(*us, opts);
  if (a0 <= 0) a0 = 1e-2 / cmps::transfer_norm_estimate(s);

  const double density_ref = cmps::density(s, fp, 0, 0).real();
  double kinetic_ref = 0.0;
  const bool single_boson = s.speciesCount() == 1 && !s.species.fermionic(0);
  if (single_boson) {
    const auto e = cmps::energy_densities(s, fp, {1.0}, 0.0,
                                          cmps::InteractionKernel::delta(0.0), opts);
    kinetic_ref = e.kinetic;
  }

  std::string csv = "a,observable,error,ratio\n";
  double prev_density = 0.0, prev_kinetic = 0.0, prev_transfer = 0.0;
  double a = a0;
  for (int k = 0; k <= halvings; ++k, a /= 2) {
    const double density_err =
        std::abs(cmps::lattice_observables(cmps::discretize(s, a, 2)).density - density_ref);
    csv += JsonWriter::num(a) + ",density," + JsonWriter::num(density_err) + "," +
           (k ? JsonWriter::num(prev_density / density_err) : "") + "\n";
    prev_density = density_err;
    if (single_boson) {
      const double kin =
          std::abs(cmps::lattice_observables(cmps::discretize(s, a, 3)).kinetic_fd - kinetic_ref);
      csv += JsonWriter::num(a) + ",kinetic," + JsonWriter::num(kin) + "," +
             (k ? JsonWriter::num(prev_kinetic / kin) : "") + "\n";
      prev_kinetic = kin;
    }
    const double transfer = cmps::lattice_transfer_check(s, a);
    csv += JsonWriter::num(a) + ",transfer," + JsonWriter::num(transfer) + "," +
           (k ? JsonWriter::num(prev_transfer / transfer) : "") + "\n";
    prev_transfer = transfer;
  }
  emit(out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous matrix product state calculus"};
  app.require_subcommand(1);
  CliConfig cfg;
  apply_env(cfg);

  std::string input, out, parity_path, emit_g, to, observable, interaction, potential_path;
  std::string t1_path, t2_path, other;
  int order = 1, a_idx = 0, b_idx = 0, pn = 50, xn = 50, halvings = 4;
  double mass = 1.0, v0 = 0.0, p = 0.0, pmax = 0.0, xmax = 0.0, lattice_a = 0.0;
  bool raw = false;

  auto* validate = app.add_subcommand("validate", "schema and invariant check");
  validate->add_option("--input", input)->required();
  add_config_flags(validate, cfg);

  auto* check = app.add_subcommand("check", "regularity / parity verification");
  check->add_option("--input", input)->required();
  check->add_option("--order", order);
  check->add_option("--parity", parity_path);
  check->add_option("--out", out);
  add_config_flags(check, cfg);

  auto* gauge = app.add_subcommand("gauge", "canonical forms and gauge transforms");
  gauge->add_option("--input", input)->required();
  gauge->add_option("--to", to)->required()->check(CLI::IsMember({"left", "right", "qzero"}));
  gauge->add_option("--out", out)->required();
  gauge->add_option("--emit-g", emit_g);
  add_config_flags(gauge, cfg);

  auto* finite = app.add_subcommand("finite", "finite-system expectation values");
  finite->add_option("--input", input)->required();
  finite->add_option("--observable", observable)
      ->required()
      ->check(CLI::IsMember({"norm", "density", "g2", "energy"}));
  finite->add_option("--mass", mass);
  finite->add_option("--potential", potential_path);
  finite->add_option("--interaction", interaction);
  finite->add_option("--a", a_idx);
  finite->add_option("--b", b_idx);
  finite->add_flag("--raw", raw, "report unnormalized values");
  finite->add_option("--out", out);
  add_config_flags(finite, cfg);

  auto* uniform = app.add_subcommand("uniform", "thermodynamic-limit observables");
  uniform->add_option("--input", input)->required();
  uniform->add_option("--observable", observable)
      ->required()
      ->check(CLI::IsMember({"density", "energy", "corr", "np", "cutoff", "xi", "match"}));
  uniform->add_option("--mass", mass);
  uniform->add_option("--v", v0);
  uniform->add_option("--interaction", interaction);
  uniform->add_option("--a", a_idx);
  uniform->add_option("--b", b_idx);
  uniform->add_option("--pmax", pmax);
  uniform->add_option("--pn", pn);
  uniform->add_option("--xmax", xmax);
  uniform->add_option("--xn", xn);
  uniform->add_option("--other", other);
  uniform->add_option("--parity", parity_path);
  uniform->add_option("--out", out);
  add_config_flags(uniform, cfg);

  auto* tangent = app.add_subcommand("tangent", "tangent-space overlaps");
  tangent->add_option("--base", input)->required();
  tangent->add_option("--t1", t1_path)->required();
  tangent->add_option("--t2", t2_path);
  tangent->add_option("--p", p);
  tangent->add_option("--out", out);
  add_config_flags(tangent, cfg);

  auto* lattice = app.add_subcommand("lattice-check", "lattice-discretization convergence");
  lattice->add_option("--input", input)->required();
  lattice->add_option("--a", lattice_a);
  lattice->add_option("--halvings", halvings);
  lattice->add_option("--out", out);
  add_config_flags(lattice, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 64;
  }

  try {
    if (app.got_subcommand(validate)) return run_validate(cfg, input);
    if (app.got_subcommand(check)) return run_check(cfg, input, order, parity_path, out);
    if (app.got_subcommand(gauge)) return run_gauge(cfg, input, to, out, emit_g);
    if (app.got_subcommand(finite))
      return run_finite(cfg, input, observable, mass, potential_path, interaction, a_idx, b_idx,
                        raw, out);
    if (app.got_subcommand(uniform))
      return run_uniform(cfg, input, observable, mass, v0, interaction, a_idx, b_idx, pmax, pn,
                         xmax, xn, other, parity_path, out);
    if (app.got_subcommand(tangent)) return run_tangent(cfg, input, t1_path, t2_path, p, out);
    if (app.got_subcommand(lattice))
      return run_lattice_check(cfg, input, lattice_a, halvings, out);
  } catch (const cmps::Error& e) {
    std::cerr << "{\"error\": {\"kind\": " << JsonWriter::str(cmps::to_string(e.code()))
              << ", \"message\": " << JsonWriter::str(e.what()) << "}}\n";
    return cmps::is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\": {\"kind\": \"Internal\", \"message\": " << JsonWriter::str(e.what())
              << "}}\n";
    return 2;
  }
  return 64;
}
