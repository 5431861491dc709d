#pragma once

#include <optional>
#include <string>
#include <variant>

#include "cmps/regularity.hpp"
#include "cmps/tangent.hpp"
#include "cmps/types.hpp"

namespace cmps {

using AnyState = std::variant<UniformCMPS, FiniteCMPS>;

// State files hold complex entries as [re, im] pairs, matrices as arrays of
// rows. Uniform: {D, species, Q, R}; finite adds {L, N, Q_samples, R_samples,
// vL, vR, boundary, B?}. Malformed content raises ParseError.
AnyState load_state(const std::string& path);
AnyState parse_state(const std::string& json_text);

std::string state_to_json(const UniformCMPS& state);
std::string state_to_json(const FiniteCMPS& state);
void save_state(const std::string& path, const UniformCMPS& state);
void save_state(const std::string& path, const FiniteCMPS& state);

struct ValidationIssue {
  std::string path;
  std::string message;
};

// Schema plus invariant walk; returns every problem found instead of raising.
std::vector<ValidationIssue> validate_state_text(const std::string& json_text);
std::vector<ValidationIssue> validate_state_file(const std::string& path);

// Tangent files mirror the state schema: finite {V_samples, W_samples, wR},
// uniform {V, W, p}.
TangentFinite load_tangent_finite(const std::string& path, const FiniteCMPS& base);
TangentUniform load_tangent_uniform(const std::string& path, const UniformCMPS& base);
void save_tangent(const std::string& path, const TangentFinite& t);
void save_tangent(const std::string& path, const TangentUniform& t);

// {"Dplus": int, "Dminus": int}
ParityStructure load_parity(const std::string& path);

// {"v_samples": [..]} or a bare array
std::vector<double> load_potential(const std::string& path);

// {"g": matrix} or {"g_samples": [matrix..]}
std::vector<Matrix> load_gauge_samples(const std::string& path);
void save_gauge_samples(const std::string& path, const std::vector<Matrix>& samples);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cmps
