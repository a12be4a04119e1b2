#pragma once

// File formats: numeric CSV panels, the process spec text format, fit
// results as JSON and the estimated network as DOT.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "savar/estimator.hpp"
#include "savar/process.hpp"

namespace savar::io {

/// Comma separated, one header row of labels, '.' decimals, no quoting.
/// Errors name the 1-based line and column.
TimeSeriesPanel read_csv(std::istream& in);
TimeSeriesPanel read_csv(const std::filesystem::path& path);
/// Shortest round-trip formatting, so read_csv(write_csv(x)) == x bitwise.
void write_csv(std::ostream& out, const TimeSeriesPanel& panel);
void write_csv(const std::filesystem::path& path, const TimeSeriesPanel& panel);

/// Spec text format, one `key = value` per line, '#' comments:
///   p = 3
///   noise = gaussian | laplace | student_t
///   noise_scale = 0.2
///   noise_df = 5
///   seed = 7
///   entry = <j> <k> <component>   (zero-based; f1..f5, zero, linear:<a>)
AdditiveVarSpec read_spec(std::istream& in);
AdditiveVarSpec read_spec(const std::filesystem::path& path);
void write_spec(std::ostream& out, const AdditiveVarSpec& spec);

void write_fit_json(std::ostream& out, const FitResult& fit);
void write_fit_json(const std::filesystem::path& path, const FitResult& fit);
/// Restores what prediction needs: coefficients, basis, shift, intercept,
/// lambda, labels and the support.
FitResult read_fit_json(std::istream& in);
FitResult read_fit_json(const std::filesystem::path& path);

/// digraph with one node per variable and an edge k -> j for every support
/// pair (j, k), labelled with the group norm.
void write_dot(std::ostream& out, const FitResult& fit);
void write_dot(const std::filesystem::path& path, const FitResult& fit);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
/// Whole-string parse; throws ErrorKind::validation naming `what`.
double parse_double(std::string_view text, const std::string& what);

}  // namespace savar::io
