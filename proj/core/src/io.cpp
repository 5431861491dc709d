#include "cmps/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cmps {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  require(!j.is_discarded(), errc::parse_error, "malformed JSON");
  return j;
}

Complex complex_from(const json& j, const std::string& where) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          errc::parse_error, where + ": complex entries are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

Matrix matrix_from(const json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), errc::parse_error, where + ": matrix must be a row array");
  const int rows = static_cast<int>(j.size());
  require(j[0].is_array() && !j[0].empty(), errc::parse_error, where + ": rows must be arrays");
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    require(j[i].is_array() && static_cast<int>(j[i].size()) == cols, errc::parse_error,
            where + ": ragged rows");
    for (int k = 0; k < cols; ++k) m(i, k) = complex_from(j[i][k], where);
  }
  detail::require_finite(m, where);
  return m;
}

Vector vector_from(const json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), errc::parse_error, where + ": vector must be an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = complex_from(j[i], where);
  return v;
}

ordered_json complex_to(const Complex& z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json matrix_to(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(complex_to(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_to(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(complex_to(v(i)));
  return out;
}

SpeciesTable species_from(const json& j) {
  require(j.is_array() && !j.empty(), errc::parse_error, "species: nonempty array required");
  std::vector<Species> entries;
  for (const auto& s : j) {
    require(s.is_object() && s.contains("name") && s.contains("statistics"), errc::parse_error,
            "species entries need name and statistics");
    const std::string stats = s["statistics"].get<std::string>();
    require(stats == "boson" || stats == "fermion", errc::parse_error,
            "statistics must be 'boson' or 'fermion'");
    entries.push_back({s["name"].get<std::string>(),
                       stats == "boson" ? Statistics::boson : Statistics::fermion});
  }
  return SpeciesTable::build(entries);
}

ordered_json species_to(const SpeciesTable& table) {
  ordered_json out = ordered_json::array();
  for (const auto& s : table.entries())
    out.push_back({{"name", s.name},
                   {"statistics", s.stats == Statistics::boson ? "boson" : "fermion"}});
  return out;
}

UniformCMPS uniform_from(const json& j) {
  require(j.contains("D") && j.contains("species") && j.contains("Q") && j.contains("R"),
          errc::parse_error, "uniform state needs D, species, Q, R");
  UniformCMPS s;
  s.species = species_from(j["species"]);
  const int D = j["D"].get<int>();
  s.Q = matrix_from(j["Q"], "Q");
  require(s.Q.rows() == D, errc::parse_error, "Q does not match the declared D");
  require(j["R"].is_array() && static_cast<int>(j["R"].size()) == s.species.count(),
          errc::parse_error, "R must hold one matrix per species");
  for (size_t a = 0; a < j["R"].size(); ++a) s.R.push_back(matrix_from(j["R"][a], "R"));
  s.check();
  return s;
}

FiniteCMPS finite_from(const json& j) {
  require(j.contains("D") && j.contains("species") && j.contains("L") && j.contains("N") &&
              j.contains("Q_samples") && j.contains("R_samples") && j.contains("vL") &&
              j.contains("vR") && j.contains("boundary"),
          errc::parse_error, "finite state needs D, species, L, N, samples and boundary data");
  FiniteCMPS s;
  s.species = species_from(j["species"]);
  const int D = j["D"].get<int>();
  s.L = j["L"].get<double>();
  const int N = j["N"].get<int>();
  require(j["Q_samples"].is_array() && static_cast<int>(j["Q_samples"].size()) == N + 1,
          errc::parse_error, "Q_samples must hold N+1 matrices");
  for (const auto& q : j["Q_samples"]) s.Q.push_back(matrix_from(q, "Q_samples"));
  require(j["R_samples"].is_array() &&
              static_cast<int>(j["R_samples"].size()) == s.species.count(),
          errc::parse_error, "R_samples must hold one track per species");
  for (const auto& track : j["R_samples"]) {
    require(track.is_array() && static_cast<int>(track.size()) == N + 1, errc::parse_error,
            "R_samples tracks must hold N+1 matrices");
    std::vector<Matrix> t;
    for (const auto& r : track) t.push_back(matrix_from(r, "R_samples"));
    s.R.push_back(std::move(t));
  }
  s.vL = vector_from(j["vL"], "vL");
  s.vR = vector_from(j["vR"], "vR");
  const std::string boundary = j["boundary"].get<std::string>();
  require(boundary == "open" || boundary == "periodic", errc::parse_error,
          "boundary must be 'open' or 'periodic'");
  s.boundary = boundary == "open" ? BoundaryKind::open : BoundaryKind::periodic;
  if (j.contains("B")) s.B = matrix_from(j["B"], "B");
  require(s.dim() == D, errc::parse_error, "samples do not match the declared D");
  s.check();
  return s;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::parse_error, "cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  require(out.good(), errc::parse_error, "cannot write file: " + path);
  out << content;
}

AnyState parse_state(const std::string& text) {
  const json j = parse_json(text);
  require(j.is_object(), errc::parse_error, "state file must hold a JSON object");
  if (j.contains("Q_samples")) return finite_from(j);
  return uniform_from(j);
}

AnyState load_state(const std::string& path) { return parse_state(read_text_file(path)); }

std::string state_to_json(const UniformCMPS& state) {
  ordered_json j;
  j["D"] = state.dim();
  j["species"] = species_to(state.species);
  j["Q"] = matrix_to(state.Q);
  ordered_json rs = ordered_json::array();
  for (const auto& r : state.R) rs.push_back(matrix_to(r));
  j["R"] = std::move(rs);
  return j.dump(2);
}

std::string state_to_json(const FiniteCMPS& state) {
  ordered_json j;
  j["D"] = state.dim();
  j["species"] = species_to(state.species);
  j["L"] = state.L;
  j["N"] = state.gridSize();
  ordered_json qs = ordered_json::array();
  for (const auto& q : state.Q) qs.push_back(matrix_to(q));
  j["Q_samples"] = std::move(qs);
  ordered_json rtracks = ordered_json::array();
  for (const auto& track : state.R) {
    ordered_json t = ordered_json::array();
    for (const auto& r : track) t.push_back(matrix_to(r));
    rtracks.push_back(std::move(t));
  }
  j["R_samples"] = std::move(rtracks);
  j["vL"] = vector_to(state.vL);
  j["vR"] = vector_to(state.vR);
  j["boundary"] = state.boundary == BoundaryKind::open ? "open" : "periodic";
  if (state.B.size() > 0) j["B"] = matrix_to(state.B);
  return j.dump(2);
}

void save_state(const std::string& path, const UniformCMPS& state) {
  write_text_file(path, state_to_json(state));
}

void save_state(const std::string& path, const FiniteCMPS& state) {
  write_text_file(path, state_to_json(state));
}

std::vector<ValidationIssue> validate_state_text(const std::string& text) {
  std::vector<ValidationIssue> issues;
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    issues.push_back({"$", "malformed JSON"});
    return issues;
  }
  if (!j.is_object()) {
    issues.push_back({"$", "state file must hold a JSON object"});
    return issues;
  }
  try {
    if (j.contains("Q_samples"))
      (void)finite_from(j);
    else
      (void)uniform_from(j);
  } catch (const Error& e) {
    issues.push_back({"$", e.what()});
  }
  return issues;
}

std::vector<ValidationIssue> validate_state_file(const std::string& path) {
  try {
    return validate_state_text(read_text_file(path));
  } catch (const Error& e) {
    return {{path, e.what()}};
  }
}

TangentFinite load_tangent_finite(const std::string& path, const FiniteCMPS& base) {
  const json j = parse_json(read_text_file(path));
  require(j.contains("V_samples") && j.contains("W_samples") && j.contains("wR"),
          errc::parse_error, "finite tangent needs V_samples, W_samples, wR");
  TangentFinite t;
  for (const auto& v : j["V_samples"]) t.V.push_back(matrix_from(v, "V_samples"));
  for (const auto& track : j["W_samples"]) {
    std::vector<Matrix> ws;
    for (const auto& w : track) ws.push_back(matrix_from(w, "W_samples"));
    t.W.push_back(std::move(ws));
  }
  t.wR = vector_from(j["wR"], "wR");
  require(t.V.size() == base.Q.size(), errc::parse_error, "tangent grid mismatch");
  require(static_cast<int>(t.W.size()) == base.speciesCount(), errc::parse_error,
          "tangent species mismatch");
  return t;
}

TangentUniform load_tangent_uniform(const std::string& path, const UniformCMPS& base) {
  const json j = parse_json(read_text_file(path));
  require(j.contains("V") && j.contains("W"), errc::parse_error, "uniform tangent needs V, W");
  TangentUniform t;
  t.V = matrix_from(j["V"], "V");
  for (const auto& w : j["W"]) t.W.push_back(matrix_from(w, "W"));
  t.p = j.value("p", 0.0);
  require(t.V.rows() == base.dim(), errc::parse_error, "tangent dimension mismatch");
  require(static_cast<int>(t.W.size()) == base.speciesCount(), errc::parse_error,
          "tangent species mismatch");
  return t;
}

void save_tangent(const std::string& path, const TangentFinite& t) {
  ordered_json j;
  ordered_json vs = ordered_json::array();
  for (const auto& v : t.V) vs.push_back(matrix_to(v));
  j["V_samples"] = std::move(vs);
  ordered_json ws = ordered_json::array();
  for (const auto& track : t.W) {
    ordered_json tt = ordered_json::array();
    for (const auto& w : track) tt.push_back(matrix_to(w));
    ws.push_back(std::move(tt));
  }
  j["W_samples"] = std::move(ws);
  j["wR"] = vector_to(t.wR);
  write_text_file(path, j.dump(2));
}

void save_tangent(const std::string& path, const TangentUniform& t) {
  ordered_json j;
  j["V"] = matrix_to(t.V);
  ordered_json ws = ordered_json::array();
  for (const auto& w : t.W) ws.push_back(matrix_to(w));
  j["W"] = std::move(ws);
  j["p"] = t.p;
  write_text_file(path, j.dump(2));
}

ParityStructure load_parity(const std::string& path) {
  const json j = parse_json(read_text_file(path));
  require(j.contains("Dplus") && j.contains("Dminus"), errc::parse_error,
          "parity file needs Dplus and Dminus");
  return ParityStructure::blocks(j["Dplus"].get<int>(), j["Dminus"].get<int>());
}

std::vector<double> load_potential(const std::string& path) {
  const json j = parse_json(read_text_file(path));
  const json& arr = j.is_object() && j.contains("v_samples") ? j["v_samples"] : j;
  require(arr.is_array(), errc::parse_error, "potential file must hold an array of samples");
  std::vector<double> v;
  for (const auto& x : arr) {
    require(x.is_number(), errc::parse_error, "potential samples must be numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<Matrix> load_gauge_samples(const std::string& path) {
  const json j = parse_json(read_text_file(path));
  std::vector<Matrix> out;
  if (j.contains("g_samples")) {
    for (const auto& g : j["g_samples"]) out.push_back(matrix_from(g, "g_samples"));
  } else if (j.contains("g")) {
    out.push_back(matrix_from(j["g"], "g"));
  } else {
    raise(errc::parse_error, "gauge file needs g or g_samples");
  }
  return out;
}

void save_gauge_samples(const std::string& path, const std::vector<Matrix>& samples) {
  ordered_json j;
  if (samples.size() == 1) {
    j["g"] = matrix_to(samples.front());
  } else {
    ordered_json gs = ordered_json::array();
    for (const auto& g : samples) gs.push_back(matrix_to(g));
    j["g_samples"] = std::move(gs);
  }
  write_text_file(path, j.dump(2));
}

}  // namespace cmps
