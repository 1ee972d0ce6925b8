#pragma once

#include <string>

#include "svsc/problem.hpp"

namespace svsc {

// Fixed-format MPS for linear problems (binaries via INTORG markers plus BV
// bounds). Deterministic output; write_mps and read_mps round-trip.
std::string write_mps(const ProblemIR& p, const std::string& name = "SVSC");
ProblemIR read_mps(const std::string& text);
ProblemIR read_mps_file(const std::string& path);

// Structured-text dump that also covers quadratic rows and callback
// descriptors; for human inspection and external tooling.
std::string write_problem_text(const ProblemIR& p, const std::string& name = "SVSC");

// Dispatch by extension: ".mps" writes MPS (throws ConfigError
// "MPS_UNSUPPORTED" on quadratic/nonlinear content), anything else writes the
// structured text form.
void export_problem(const ProblemIR& p, const std::string& path);

}  // namespace svsc
