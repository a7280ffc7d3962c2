#pragma once

#include "clgm/instances.hpp"

#include <filesystem>
#include <string>

namespace clgm {

inline constexpr int kInstanceSchemaVersion = 1;

/// {schema_version, n1, n2, complete, unary: [[..]..], pairwise: [[i,j,s,l,cost]..]}
/// Reals may be JSON numbers or hex-float strings.
QapInstance instance_from_json(const std::string& text);
std::string instance_to_json(const QapInstance& inst);
QapInstance load_instance(const std::filesystem::path& path);

/// {n1, n2, pairs: [[i,s]..], objective}
std::string matching_to_json(const Matching& m, double objective);

/// Exact "%a" text of a double and its inverse.
std::string hex_float(double v);
double parse_hex_float(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace clgm
